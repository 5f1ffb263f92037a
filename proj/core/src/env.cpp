#include "cascadelab/env.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "cascadelab/errors.hpp"

namespace cascadelab {

int state_dim(int arm_count, int embed_dim) {
  return kScalarFeatures + embed_dim + 2 * arm_count;
}

const char* action_name(ActionKind action) {
  switch (action) {
    case ActionKind::Return: return "return";
    case ActionKind::RequerySame: return "requery";
    case ActionKind::NextArm: return "next_arm";
  }
  return "?";
}

double reward_value(ActionKind action, bool current_response_correct,
                    bool final_correct, double lambda) {
  double r = current_response_correct ? lambda : 0.0;
  if (action == ActionKind::Return && final_correct) r += 1.0;
  return r;
}

std::optional<int> majority_answer(std::span<const ResponseEntry> responses) {
  if (responses.empty()) return std::nullopt;
  std::map<int, int> counts;
  for (const ResponseEntry& r : responses) ++counts[r.answer_id];
  int best_count = 0;
  for (const auto& [answer, count] : counts) best_count = std::max(best_count, count);

  int winner = -1;
  int winner_arm = -1;
  for (const auto& [answer, count] : counts) {
    if (count != best_count) continue;
    int top_arm = -1;
    for (const ResponseEntry& r : responses) {
      if (r.answer_id == answer) top_arm = std::max(top_arm, r.arm_id);
    }
    // Higher backing arm wins; map iteration order makes the final
    // tie-break the lowest answer id.
    if (top_arm > winner_arm) {
      winner_arm = top_arm;
      winner = answer;
    }
  }
  return winner;
}

std::vector<double> encode_features(const TraceSet& trace,
                                    const BudgetLedger& ledger,
                                    const QuestionProgress& progress,
                                    std::span<const double> embedding,
                                    const EnvConfig& config) {
  const int arm_count = trace.arm_count();
  const auto dim = static_cast<std::size_t>(state_dim(arm_count, config.embed_dim));
  std::vector<double> v(dim, 0.0);

  const double total = static_cast<double>(progress.responses.size());
  if (total > 0.0) {
    std::map<int, int> counts;
    for (const ResponseEntry& r : progress.responses) ++counts[r.answer_id];
    std::vector<double> freq;
    freq.reserve(counts.size());
    for (const auto& [answer, count] : counts) freq.push_back(count / total);
    std::sort(freq.begin(), freq.end(), std::greater<>());
    for (std::size_t i = 0; i < 3 && i < freq.size(); ++i) v[i] = freq[i];
  }
  v[3] = std::clamp(total / config.requery_cap, 0.0, kBudgetFeatureClip);
  if (progress.responses.size() >= 2) {
    const auto& a = progress.responses[progress.responses.size() - 2];
    const auto& b = progress.responses.back();
    v[4] = a.answer_id == b.answer_id ? 1.0 : 0.0;
  }
  v[5] = std::clamp(progress.last_input_tokens / 1000.0, 0.0, kBudgetFeatureClip);
  v[6] = std::clamp(progress.last_output_tokens / 1000.0, 0.0, kBudgetFeatureClip);

  // Embedding components live in [-1, 1]; re-range to [0, 1] so the whole
  // state vector is non-negative.
  for (int i = 0; i < config.embed_dim; ++i) {
    const double e = i < static_cast<int>(embedding.size())
                         ? embedding[static_cast<std::size_t>(i)]
                         : 0.0;
    v[static_cast<std::size_t>(kScalarFeatures + i)] =
        std::clamp(0.5 * (e + 1.0), 0.0, kBudgetFeatureClip);
  }

  const std::size_t requery_base = static_cast<std::size_t>(kScalarFeatures + config.embed_dim);
  for (int k = 0; k < arm_count; ++k) {
    v[requery_base + static_cast<std::size_t>(k)] =
        static_cast<double>(progress.samples_per_arm[static_cast<std::size_t>(k)]) /
        config.requery_cap;
    v[requery_base + static_cast<std::size_t>(arm_count + k)] =
        ledger.normalized_budget_feature(k);
  }
  return v;
}

std::vector<int> order_questions(const TraceSet& trace, std::vector<int> ids,
                                 QuestionOrdering ordering, rng::Stream& rng) {
  switch (ordering) {
    case QuestionOrdering::Given:
      break;
    case QuestionOrdering::EasyFirst:
      std::stable_sort(ids.begin(), ids.end(), [&](int a, int b) {
        return trace.question(a).tier < trace.question(b).tier;
      });
      break;
    case QuestionOrdering::HardFirst:
      std::stable_sort(ids.begin(), ids.end(), [&](int a, int b) {
        return trace.question(a).tier > trace.question(b).tier;
      });
      break;
    case QuestionOrdering::Shuffled:
      rng.shuffle(ids);
      break;
  }
  return ids;
}

CascadeEnv::CascadeEnv(const TraceSet& trace, const PricingPolicy& policy,
                       double budget, std::vector<int> question_order,
                       EnvConfig config, const EmbeddingAdapter* adapter)
    : trace_(&trace),
      policy_(&policy),
      config_(config),
      ledger_(trace, policy, budget, static_cast<int>(question_order.size())),
      order_(std::move(question_order)),
      adapter_(adapter) {
  stats_.questions = static_cast<int>(order_.size());
  stats_.queries_per_arm.assign(static_cast<std::size_t>(trace.arm_count()), 0);
  if (order_.empty()) {
    done_ = true;
  } else {
    begin_question();
  }
}

void CascadeEnv::begin_question() {
  progress_ = QuestionProgress{};
  progress_.question_id = order_[cursor_];
  progress_.samples_per_arm.assign(static_cast<std::size_t>(trace_->arm_count()), 0);
}

const std::vector<double>& CascadeEnv::embedding_for(int question_id) const {
  auto it = embed_cache_.find(question_id);
  if (it == embed_cache_.end()) {
    it = embed_cache_
             .emplace(question_id,
                      embed_question(trace_->question(question_id).text,
                                     config_.embed_dim))
             .first;
  }
  return it->second;
}

std::vector<double> CascadeEnv::encode() const {
  const std::vector<double>& raw = embedding_for(progress_.question_id);
  if (adapter_ != nullptr && !adapter_->is_identity()) {
    return encode_features(*trace_, ledger_, progress_, adapter_->apply(raw),
                           config_);
  }
  return encode_features(*trace_, ledger_, progress_, raw, config_);
}

double CascadeEnv::estimated_query_cost(int arm_id) const {
  return ledger_.avg_cost(arm_id);
}

std::array<bool, kActionCount> CascadeEnv::legal_actions() const {
  std::array<bool, kActionCount> legal{true, false, false};
  if (done_) return {false, false, false};
  const int k = progress_.arm_index;
  if (config_.allow_requery &&
      progress_.samples_per_arm[static_cast<std::size_t>(k)] < config_.requery_cap &&
      ledger_.affordable(estimated_query_cost(k))) {
    legal[1] = true;
  }
  if (k < trace_->arm_count() - 1 &&
      ledger_.affordable(estimated_query_cost(k + 1))) {
    legal[2] = true;
  }
  return legal;
}

Transition CascadeEnv::finalize(std::vector<double> state,
                                ActionKind recorded_action, bool forced) {
  const Question& q = trace_->question(progress_.question_id);
  const std::optional<int> answer = majority_answer(progress_.responses);
  const bool final_correct = answer.has_value() && *answer == q.ground_truth;
  const bool last_correct =
      !progress_.responses.empty() && progress_.responses.back().is_correct;

  Transition t;
  t.state = std::move(state);
  t.action = recorded_action;
  t.question_id = progress_.question_id;
  t.question_final = true;
  t.final_correct = final_correct;
  t.forced_return = forced;
  t.reward = reward_value(ActionKind::Return, last_correct, final_correct,
                          config_.lambda);

  ++stats_.finalized;
  if (final_correct) ++stats_.correct;
  if (progress_.responses.empty()) ++stats_.unanswered;

  ledger_.question_done();
  ++cursor_;
  if (cursor_ >= order_.size()) {
    done_ = true;
    t.terminal = true;
    t.next_state.assign(state_dim(trace_->arm_count(), config_.embed_dim), 0.0);
    t.next_legal = {false, false, false};
  } else {
    begin_question();
    t.terminal = config_.terminal_per_question;
    t.next_state = encode();
    t.next_legal = legal_actions();
  }
  stats_.spend = ledger_.spent();
  return t;
}

Transition CascadeEnv::step(ActionKind action, rng::Stream& rng) {
  if (done_) {
    throw DataError("step on a finished stream");
  }
  const auto legal = legal_actions();
  if (!legal[static_cast<std::size_t>(action)]) {
    throw DataError(std::string("illegal action '") + action_name(action) + "'");
  }

  std::vector<double> state = encode();
  if (action == ActionKind::Return) {
    return finalize(std::move(state), ActionKind::Return, false);
  }

  const int arm = action == ActionKind::RequerySame ? progress_.arm_index
                                                    : progress_.arm_index + 1;
  const int sample_index = progress_.samples_per_arm[static_cast<std::size_t>(arm)];
  const QueryRecord record =
      sample_response(*trace_, progress_.question_id, arm, sample_index, rng);
  const double monetary =
      policy_->monetary_price(arm, record.input_tokens, record.output_tokens);
  const double cost = policy_->combine(monetary, record.latency_s);
  if (!ledger_.affordable(cost)) {
    // The draw came in above the estimate; the query is never issued.
    return finalize(std::move(state), ActionKind::Return, true);
  }
  ledger_.charge_query(arm, monetary, record.latency_s);

  progress_.arm_index = arm;
  ++progress_.samples_per_arm[static_cast<std::size_t>(arm)];
  progress_.responses.push_back(ResponseEntry{arm, record.answer_id,
                                              record.is_correct,
                                              record.output_tokens});
  progress_.last_input_tokens = record.input_tokens;
  progress_.last_output_tokens = record.output_tokens;
  ++stats_.queries_per_arm[static_cast<std::size_t>(arm)];
  stats_.spend = ledger_.spent();

  Transition t;
  t.state = std::move(state);
  t.action = action;
  t.question_id = progress_.question_id;
  t.reward = reward_value(action, record.is_correct, false, config_.lambda);
  t.terminal = false;
  t.next_state = encode();
  t.next_legal = legal_actions();
  return t;
}

}  // namespace cascadelab
