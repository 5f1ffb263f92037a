#include "cascadelab/env.hpp"

#include <algorithm>
#include <cmath>

#include "cascadelab/errors.hpp"
#include "doctest.h"

using namespace cascadelab;

namespace {

struct EnvFixture {
  TraceSet trace;
  PricingPolicy policy;
  EnvConfig config;

  explicit EnvFixture(int n = 40)
      : trace(synth_generate(SynthConfig::planted_two_arm(n), 21)),
        policy(PricingPolicy::pure_monetary(trace, 1.0, 1.0)) {}

  CascadeEnv make_env(double budget) const {
    return CascadeEnv(trace, policy, budget, trace.all_question_ids(), config);
  }
};

QuestionProgress progress_with(const std::vector<ResponseEntry>& responses,
                               int arm_count) {
  QuestionProgress p;
  p.question_id = 0;
  p.samples_per_arm.assign(static_cast<std::size_t>(arm_count), 0);
  for (const ResponseEntry& r : responses) {
    ++p.samples_per_arm[static_cast<std::size_t>(r.arm_id)];
    p.responses.push_back(r);
  }
  return p;
}

}  // namespace

TEST_SUITE("env") {

TEST_CASE("reward formula") {
  const double lambda = 5.0;
  // a1, final correct, current response correct -> 1 + lambda
  CHECK(reward_value(ActionKind::Return, true, true, lambda) == 6.0);
  // a2 with a correct response -> lambda
  CHECK(reward_value(ActionKind::RequerySame, true, false, lambda) == 5.0);
  // a2 with a wrong response -> 0
  CHECK(reward_value(ActionKind::RequerySame, false, false, lambda) == 0.0);
  // a1 on a skip -> 0
  CHECK(reward_value(ActionKind::Return, false, false, lambda) == 0.0);
  // a1, majority correct but last response wrong -> 1
  CHECK(reward_value(ActionKind::Return, false, true, lambda) == 1.0);
}

TEST_CASE("majority answer with the arm/answer tie-break") {
  CHECK(!majority_answer({}).has_value());

  // {7: 2, 3: 1} -> 7
  const std::vector<ResponseEntry> simple{
      {0, 7, false, 1.0}, {0, 3, false, 1.0}, {1, 7, false, 1.0}};
  CHECK(majority_answer(simple) == 7);

  // Tie between 4 (arms 0,1) and 9 (arms 0,2): highest backing arm wins.
  const std::vector<ResponseEntry> arm_tie{{0, 4, false, 1.0},
                                           {1, 4, false, 1.0},
                                           {0, 9, false, 1.0},
                                           {2, 9, false, 1.0}};
  CHECK(majority_answer(arm_tie) == 9);

  // Full tie on count and backing arm: lowest answer id.
  const std::vector<ResponseEntry> id_tie{{0, 5, false, 1.0},
                                          {0, 2, false, 1.0}};
  CHECK(majority_answer(id_tie) == 2);
}

TEST_CASE("state encoding blocks") {
  const EnvFixture f;
  BudgetLedger ledger(f.trace, f.policy, 1.0, 40);
  const std::vector<double> embedding(64, 0.0);

  SUBCASE("no responses: frequency block and agree flag are zero") {
    const QuestionProgress p = progress_with({}, 2);
    const auto v = encode_features(f.trace, ledger, p, embedding, f.config);
    CHECK(static_cast<int>(v.size()) == state_dim(2, 64));
    for (int i = 0; i < 5; ++i) CHECK(v[static_cast<std::size_t>(i)] == 0.0);
  }
  SUBCASE("two identical responses: top frequency 1, agree flag 1") {
    const QuestionProgress p =
        progress_with({{0, 3, true, 50.0}, {0, 3, true, 60.0}}, 2);
    const auto v = encode_features(f.trace, ledger, p, embedding, f.config);
    CHECK(v[0] == doctest::Approx(1.0));
    CHECK(v[1] == 0.0);
    CHECK(v[4] == 1.0);
    CHECK(v[3] == doctest::Approx(2.0 / f.config.requery_cap));
  }
  SUBCASE("counts {a:2, b:1} give the (2/3, 1/3, 0) block") {
    const QuestionProgress p = progress_with(
        {{0, 4, false, 1.0}, {0, 9, false, 1.0}, {1, 4, false, 1.0}}, 2);
    const auto v = encode_features(f.trace, ledger, p, embedding, f.config);
    CHECK(v[0] == doctest::Approx(2.0 / 3.0));
    CHECK(v[1] == doctest::Approx(1.0 / 3.0));
    CHECK(v[2] == 0.0);
    CHECK(v[4] == 0.0);  // last two disagree
  }
}

TEST_CASE("legal actions") {
  const EnvFixture f;

  SUBCASE("fresh question with budget: all three actions") {
    CascadeEnv env = f.make_env(1.0);
    const auto legal = env.legal_actions();
    CHECK(legal[0]);
    CHECK(legal[1]);
    CHECK(legal[2]);
  }
  SUBCASE("at the last arm a3 is excluded") {
    CascadeEnv env = f.make_env(1.0);
    rng::Stream rng(5);
    env.step(ActionKind::NextArm, rng);  // move to arm 1 (the last)
    const auto legal = env.legal_actions();
    CHECK(legal[0]);
    CHECK(legal[1]);
    CHECK(!legal[2]);
  }
  SUBCASE("no affordable action leaves only a1") {
    CascadeEnv env = f.make_env(1e-9);
    const auto legal = env.legal_actions();
    CHECK(legal[0]);
    CHECK(!legal[1]);
    CHECK(!legal[2]);
  }
  SUBCASE("re-query cap exhausts a2") {
    EnvFixture capped;
    capped.config.requery_cap = 2;
    CascadeEnv env = capped.make_env(1.0);
    rng::Stream rng(5);
    env.step(ActionKind::RequerySame, rng);
    env.step(ActionKind::RequerySame, rng);
    const auto legal = env.legal_actions();
    CHECK(!legal[1]);
    CHECK(legal[2]);
  }
  SUBCASE("requery ablation removes a2 everywhere") {
    EnvFixture ablated;
    ablated.config.allow_requery = false;
    CascadeEnv env = ablated.make_env(1.0);
    CHECK(!env.legal_actions()[1]);
  }
}

TEST_CASE("a1 with zero responses is a skip: incorrect, free, terminal") {
  const EnvFixture f;
  CascadeEnv env = f.make_env(1.0);
  rng::Stream rng(5);
  const Transition t = env.step(ActionKind::Return, rng);
  CHECK(t.question_final);
  CHECK(!t.final_correct);
  CHECK(t.reward == 0.0);
  CHECK(env.stats().spend == 0.0);
  CHECK(env.stats().unanswered == 1);
}

TEST_CASE("a3 charges exactly the sampled record's cost") {
  const EnvFixture f;
  CascadeEnv env = f.make_env(1.0);
  rng::Stream rng(5);
  const int qid = env.progress().question_id;

  const double before = env.ledger().spent();
  env.step(ActionKind::NextArm, rng);
  const double delta = env.ledger().spent() - before;

  // The first draw on arm 1 is the deterministic temperature-0 record.
  rng::Stream probe(0);
  const QueryRecord record = sample_response(f.trace, qid, 1, 0, probe);
  CHECK(delta == doctest::Approx(f.policy.query_cost(record)).epsilon(1e-12));
  CHECK(env.progress().arm_index == 1);
}

TEST_CASE("a1 returns the majority of recorded responses") {
  // p = 1 arm: two agreeing correct samples, majority correct.
  SynthConfig cfg = SynthConfig::planted_two_arm(10);
  cfg.arms[1].p_easy = 1.0;
  cfg.arms[1].p_hard = 1.0;
  const TraceSet trace = synth_generate(cfg, 3);
  const PricingPolicy policy = PricingPolicy::pure_monetary(trace, 1.0, 1.0);
  CascadeEnv env(trace, policy, 10.0, trace.all_question_ids(), EnvConfig{});
  rng::Stream rng(5);
  env.step(ActionKind::NextArm, rng);      // arm 1, always correct
  env.step(ActionKind::RequerySame, rng);  // again
  const Transition t = env.step(ActionKind::Return, rng);
  CHECK(t.question_final);
  CHECK(t.final_correct);
  CHECK(t.reward == doctest::Approx(6.0));
}

TEST_CASE("stream mode: a1 hands over to the next question, last is terminal") {
  const EnvFixture f(3);
  CascadeEnv env = f.make_env(1.0);
  rng::Stream rng(5);
  Transition t = env.step(ActionKind::Return, rng);
  CHECK(t.question_final);
  CHECK(!t.terminal);
  CHECK(t.next_legal[0]);
  env.step(ActionKind::Return, rng);
  t = env.step(ActionKind::Return, rng);
  CHECK(t.terminal);
  CHECK(env.done());
}

TEST_CASE("per-question terminal mode marks every a1 terminal") {
  EnvFixture f(3);
  f.config.terminal_per_question = true;
  CascadeEnv env = f.make_env(1.0);
  rng::Stream rng(5);
  const Transition t = env.step(ActionKind::Return, rng);
  CHECK(t.terminal);
  CHECK(!env.done());  // the stream itself continues
}

TEST_CASE("fuzzed episodes maintain every environment invariant") {
  const EnvFixture f(60);
  rng::Stream actions(91);
  rng::Stream env_rng(17);

  for (int round = 0; round < 8; ++round) {
    const double budget = actions.uniform(0.001, 0.05);
    CascadeEnv env = CascadeEnv(f.trace, f.policy, budget,
                                f.trace.all_question_ids(), f.config);
    int steps_this_question = 0;
    const int step_bound = 2 * f.config.requery_cap + 1;

    while (!env.done()) {
      const auto legal = env.legal_actions();
      std::vector<ActionKind> options;
      for (int a = 0; a < kActionCount; ++a) {
        if (legal[static_cast<std::size_t>(a)]) {
          options.push_back(static_cast<ActionKind>(a));
        }
      }
      REQUIRE(!options.empty());
      const ActionKind pick = options[static_cast<std::size_t>(
          actions.uniform_int(0, static_cast<std::int64_t>(options.size()) - 1))];

      const int arm_before = env.progress().arm_index;
      const Transition t = env.step(pick, env_rng);
      ++steps_this_question;

      // Budget safety after every step.
      REQUIRE(env.ledger().spent() <= env.ledger().total_budget());
      // Reward bound: {0} or lambda or [1, 1+lambda].
      const double r = t.reward;
      const bool ok_reward = r == 0.0 || r == f.config.lambda ||
                             (r >= 1.0 && r <= 1.0 + f.config.lambda);
      CHECK(ok_reward);
      // Forced returns present themselves as a1.
      if (t.forced_return) {
        CHECK(t.action == ActionKind::Return);
        CHECK(t.question_final);
      }
      // Feature boundedness.
      for (double x : t.state) {
        CHECK(x >= 0.0);
        CHECK(x <= kBudgetFeatureClip);
      }

      if (t.question_final) {
        CHECK(steps_this_question <= step_bound);
        steps_this_question = 0;
      } else {
        // Arm index never decreases within a question.
        CHECK(env.progress().arm_index >= arm_before);
      }
    }
    CHECK(env.stats().finalized == env.stats().questions);
  }
}

TEST_CASE("spend equals the sum of independently computed query costs") {
  // Temperature-0-only traversal: every draw is deterministic, so the
  // total can be recomputed outside the environment.
  const EnvFixture f(20);
  CascadeEnv env = f.make_env(1.0);
  rng::Stream rng(5);
  double expected = 0.0;
  rng::Stream probe(0);
  while (!env.done()) {
    const int qid = env.progress().question_id;
    if (env.legal_actions()[2]) {
      expected +=
          f.policy.query_cost(sample_response(f.trace, qid, 1, 0, probe));
      env.step(ActionKind::NextArm, rng);
    }
    env.step(ActionKind::Return, rng);
  }
  CHECK(env.stats().spend == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("question ordering modes") {
  const EnvFixture f(50);
  rng::Stream rng(3);
  const std::vector<int> ids = f.trace.all_question_ids();

  const auto given = order_questions(f.trace, ids, QuestionOrdering::Given, rng);
  CHECK(given == ids);

  const auto easy =
      order_questions(f.trace, ids, QuestionOrdering::EasyFirst, rng);
  bool seen_hard = false;
  for (int qid : easy) {
    const bool hard = f.trace.question(qid).tier == Tier::Hard;
    if (hard) seen_hard = true;
    CHECK((!seen_hard || hard));  // once hard begins, no easy follows
  }

  const auto hard_first =
      order_questions(f.trace, ids, QuestionOrdering::HardFirst, rng);
  CHECK(f.trace.question(hard_first.front()).tier == Tier::Hard);

  auto shuffled = order_questions(f.trace, ids, QuestionOrdering::Shuffled, rng);
  CHECK(shuffled != ids);
  std::sort(shuffled.begin(), shuffled.end());
  CHECK(shuffled == ids);
}

TEST_CASE("illegal actions are contract violations") {
  const EnvFixture f(2);
  CascadeEnv env = f.make_env(1.0);
  rng::Stream rng(5);
  env.step(ActionKind::NextArm, rng);  // now at the last arm
  CHECK_THROWS_AS(env.step(ActionKind::NextArm, rng), DataError);
}

}  // TEST_SUITE
