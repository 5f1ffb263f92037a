#include "cascadelab/baselines.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>

#include "cascadelab/errors.hpp"

namespace cascadelab {

double accuracy_of(const StreamStats& stats) {
  return stats.questions > 0
             ? static_cast<double>(stats.correct) / stats.questions
             : 0.0;
}

namespace {

StreamStats fresh_stats(const TraceSet& trace, int questions) {
  StreamStats stats;
  stats.questions = questions;
  stats.queries_per_arm.assign(static_cast<std::size_t>(trace.arm_count()), 0);
  return stats;
}

// Cached raw embeddings shared by the estimator-driven baselines.
class EmbedCache {
 public:
  EmbedCache(const TraceSet& trace, int dim) : trace_(&trace), dim_(dim) {}

  const std::vector<double>& get(int question_id) {
    auto it = cache_.find(question_id);
    if (it == cache_.end()) {
      it = cache_
               .emplace(question_id,
                        embed_question(trace_->question(question_id).text, dim_))
               .first;
    }
    return it->second;
  }

 private:
  const TraceSet* trace_;
  int dim_;
  std::unordered_map<int, std::vector<double>> cache_;
};

void note_response(QuestionProgress& progress, const QueryRecord& record) {
  progress.arm_index = record.arm_id;
  ++progress.samples_per_arm[static_cast<std::size_t>(record.arm_id)];
  progress.responses.push_back(ResponseEntry{record.arm_id, record.answer_id,
                                             record.is_correct,
                                             record.output_tokens});
  progress.last_input_tokens = record.input_tokens;
  progress.last_output_tokens = record.output_tokens;
}

}  // namespace

StreamStats single_model_run(const TraceSet& trace,
                             std::vector<int> question_ids, double budget,
                             const PricingPolicy& policy) {
  StreamStats stats = fresh_stats(trace, static_cast<int>(question_ids.size()));
  if (question_ids.empty()) return stats;

  const double per_question = budget / static_cast<double>(question_ids.size());
  int chosen = -1;
  for (int k = 0; k < trace.arm_count(); ++k) {
    if (policy.expected_cost(trace, k) <= per_question) chosen = k;
  }
  if (chosen < 0) {
    stats.finalized = stats.questions;
    stats.unanswered = stats.questions;
    return stats;
  }

  BudgetLedger ledger(trace, policy, budget, stats.questions);
  rng::Stream unused(0);
  for (int qid : question_ids) {
    ++stats.finalized;
    const QueryRecord record = sample_response(trace, qid, chosen, 0, unused);
    const double monetary =
        policy.monetary_price(chosen, record.input_tokens, record.output_tokens);
    const double cost = policy.combine(monetary, record.latency_s);
    if (!ledger.affordable(cost)) {
      ++stats.unanswered;
      ledger.question_done();
      continue;
    }
    ledger.charge_query(chosen, monetary, record.latency_s);
    ++stats.queries_per_arm[static_cast<std::size_t>(chosen)];
    if (record.is_correct) ++stats.correct;
    ledger.question_done();
  }
  stats.spend = ledger.spent();
  return stats;
}

StreamStats majority_vote_run(const TraceSet& trace,
                              std::vector<int> question_ids, double budget,
                              int vote_n, const PricingPolicy& policy,
                              rng::Stream& rng) {
  if (vote_n < 1) {
    throw ConfigError("majority vote requires N >= 1");
  }
  StreamStats stats = fresh_stats(trace, static_cast<int>(question_ids.size()));
  if (question_ids.empty()) return stats;

  const double allowance = budget / static_cast<double>(question_ids.size());
  BudgetLedger ledger(trace, policy, budget, stats.questions);

  for (int qid : question_ids) {
    const Question& q = trace.question(qid);
    std::vector<ResponseEntry> responses;
    std::map<int, int> counts;
    double spent_here = 0.0;
    bool consensus = false;
    std::optional<int> final_answer;

    for (int k = 0; k < trace.arm_count() && !consensus; ++k) {
      for (int s = 0; s < vote_n; ++s) {
        const QueryRecord record = sample_response(trace, qid, k, s, rng);
        const double monetary =
            policy.monetary_price(k, record.input_tokens, record.output_tokens);
        const double cost = policy.combine(monetary, record.latency_s);
        if (spent_here + cost > allowance || !ledger.affordable(cost)) {
          k = trace.arm_count();  // question budget exhausted
          break;
        }
        ledger.charge_query(k, monetary, record.latency_s);
        spent_here += cost;
        ++stats.queries_per_arm[static_cast<std::size_t>(k)];
        responses.push_back(ResponseEntry{k, record.answer_id,
                                          record.is_correct,
                                          record.output_tokens});
        ++counts[record.answer_id];
      }
      for (const auto& [answer, count] : counts) {
        if (count >= vote_n) {
          consensus = true;
          break;
        }
      }
    }

    final_answer = majority_answer(responses);
    ++stats.finalized;
    if (!final_answer) {
      ++stats.unanswered;
    } else if (*final_answer == q.ground_truth) {
      ++stats.correct;
    }
    ledger.question_done();
  }
  stats.spend = ledger.spent();
  return stats;
}

double CorrectnessEstimator::predict(std::span<const double> features) const {
  const double z = net.forward(features)[0];
  return 1.0 / (1.0 + std::exp(-z));
}

namespace {

struct LabeledFeatures {
  std::vector<double> features;
  bool correct = false;
};

// Scripted traversal that visits every arm with one temperature-0 sample
// plus one re-query, labeling the state after each response.
std::vector<LabeledFeatures> collect_estimator_data(
    const TraceSet& trace, const PricingPolicy& policy,
    const EstimatorConfig& config, const std::vector<int>& ids,
    EmbedCache& embeds, rng::Stream& rng) {
  EnvConfig env_config;
  env_config.requery_cap = config.requery_cap;
  env_config.embed_dim = config.embed_dim;

  std::vector<LabeledFeatures> data;
  // The scripted traversal visits every arm twice per question; size the
  // collection ledger to afford it so labels cover the whole split.
  double traversal_cost = 0.0;
  for (int k = 0; k < trace.arm_count(); ++k) {
    traversal_cost += 2.0 * policy.expected_cost(trace, k);
  }
  const double budget =
      1.5 * traversal_cost * static_cast<double>(ids.size());
  BudgetLedger ledger(trace, policy, budget, static_cast<int>(ids.size()));
  for (int qid : ids) {
    QuestionProgress progress;
    progress.question_id = qid;
    progress.samples_per_arm.assign(static_cast<std::size_t>(trace.arm_count()), 0);
    for (int k = 0; k < trace.arm_count(); ++k) {
      bool stop = false;
      for (int s = 0; s < 2; ++s) {
        const QueryRecord record = sample_response(trace, qid, k, s, rng);
        const double monetary =
            policy.monetary_price(k, record.input_tokens, record.output_tokens);
        const double cost = policy.combine(monetary, record.latency_s);
        if (!ledger.affordable(cost)) {
          stop = true;
          break;
        }
        ledger.charge_query(k, monetary, record.latency_s);
        note_response(progress, record);
        data.push_back(LabeledFeatures{
            encode_features(trace, ledger, progress, embeds.get(qid), env_config),
            record.is_correct});
      }
      if (stop) break;
    }
    ledger.question_done();
  }
  return data;
}

double tuned_accuracy_threshold(const TraceSet& trace,
                                const CorrectnessEstimator& estimator,
                                const std::vector<int>& val_ids, double budget,
                                const PricingPolicy& policy, double threshold) {
  const std::array<double, 1> shared{threshold};
  const StreamStats stats = threshold_cascade_run(
      trace, val_ids, budget, estimator, shared, policy);
  return accuracy_of(stats);
}

}  // namespace

CorrectnessEstimator train_estimator(const TraceSet& trace,
                                     const PricingPolicy& policy,
                                     const EstimatorConfig& config) {
  if (config.budget_per_question <= 0.0) {
    throw ConfigError("estimator config needs a positive budget_per_question");
  }
  const std::vector<int> train_ids = trace.question_ids(Split::Train);
  std::vector<int> val_ids = trace.question_ids(Split::Val);
  if (val_ids.empty()) val_ids = train_ids;
  if (train_ids.empty()) {
    throw ConfigError("estimator needs a train split");
  }

  rng::Stream root(config.seed);
  rng::Stream data_rng = root.fork(1);
  rng::Stream init_rng = root.fork(2);
  rng::Stream shuffle_rng = root.fork(3);

  EmbedCache embeds(trace, config.embed_dim);
  std::vector<LabeledFeatures> data =
      collect_estimator_data(trace, policy, config, train_ids, embeds, data_rng);
  if (data.empty()) {
    throw DataError("estimator collected no training data");
  }

  std::size_t positives = 0;
  for (const LabeledFeatures& d : data) positives += d.correct ? 1 : 0;
  const std::size_t negatives = data.size() - positives;
  if (positives == 0 || negatives == 0) {
    throw DataError("degenerate estimator: single-class training data");
  }

  CorrectnessEstimator estimator;
  estimator.config = config;
  estimator.feature_dim = static_cast<int>(data.front().features.size());
  estimator.weight_positive =
      static_cast<double>(data.size()) / (2.0 * static_cast<double>(positives));
  estimator.weight_negative =
      static_cast<double>(data.size()) / (2.0 * static_cast<double>(negatives));
  estimator.net = Mlp::init(estimator.feature_dim, config.hidden, 1,
                            config.hidden_layers, init_rng);

  AdamOptimizer optimizer(config.learning_rate);
  std::vector<std::size_t> indices(data.size());
  std::iota(indices.begin(), indices.end(), 0);
  Mlp::Cache cache;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle_rng.shuffle(indices);
    for (std::size_t start = 0; start < indices.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop =
          std::min(indices.size(), start + static_cast<std::size_t>(config.batch_size));
      Mlp::Grads grads = estimator.net.zero_grads();
      const double inv_n = 1.0 / static_cast<double>(stop - start);
      for (std::size_t i = start; i < stop; ++i) {
        const LabeledFeatures& d = data[indices[i]];
        const double z = estimator.net.forward_cached(d.features, cache)[0];
        const double prob = 1.0 / (1.0 + std::exp(-z));
        const double y = d.correct ? 1.0 : 0.0;
        const double w =
            d.correct ? estimator.weight_positive : estimator.weight_negative;
        const std::array<double, 1> output_grad{w * (prob - y) * inv_n};
        estimator.net.backward(cache, output_grad, grads);
      }
      optimizer.step(estimator.net, grads);
    }
  }
  if (!estimator.net.all_finite()) {
    throw TrainingError("estimator weights went non-finite");
  }

  // Decision thresholds: grid-tuned on the validation split for routed
  // accuracy, preferring lower thresholds on ties.
  const double val_budget =
      config.budget_per_question * static_cast<double>(val_ids.size());
  double best_acc = -1.0;
  for (int i = 1; i < 50; ++i) {
    const double tau = 0.02 * i;
    const double acc = tuned_accuracy_threshold(trace, estimator, val_ids,
                                                val_budget, policy, tau);
    if (acc > best_acc + 1e-12) {
      best_acc = acc;
      estimator.threshold = tau;
    }
  }

  double best_band = -1.0;
  rng::Stream band_rng = root.fork(4);
  for (int hi = 1; hi <= 9; ++hi) {
    for (int lo = 0; lo <= hi; ++lo) {
      rng::Stream run_rng = band_rng.fork(static_cast<std::uint64_t>(hi * 16 + lo));
      const StreamStats stats = calibrated_cascade_run(
          trace, val_ids, val_budget, estimator, 0.1 * hi, 0.1 * lo, policy,
          run_rng);
      const double acc = accuracy_of(stats);
      if (acc > best_band + 1e-12) {
        best_band = acc;
        estimator.p_high = 0.1 * hi;
        estimator.p_low = 0.1 * lo;
      }
    }
  }
  return estimator;
}

StreamStats threshold_cascade_run(const TraceSet& trace,
                                  std::vector<int> question_ids, double budget,
                                  const ConfidenceFn& confidence,
                                  const EnvConfig& env_config,
                                  std::span<const double> thresholds,
                                  const PricingPolicy& policy) {
  if (thresholds.empty()) {
    throw ConfigError("threshold cascade needs at least one threshold");
  }
  if (thresholds.size() != 1 &&
      thresholds.size() != static_cast<std::size_t>(trace.arm_count())) {
    throw ConfigError("threshold count must be 1 or one per arm");
  }
  const auto threshold_for = [&](int arm) {
    return thresholds.size() == 1 ? thresholds[0]
                                  : thresholds[static_cast<std::size_t>(arm)];
  };

  StreamStats stats = fresh_stats(trace, static_cast<int>(question_ids.size()));
  BudgetLedger ledger(trace, policy, budget, stats.questions);
  EmbedCache embeds(trace, env_config.embed_dim);
  rng::Stream unused(0);

  for (int qid : question_ids) {
    const Question& q = trace.question(qid);
    QuestionProgress progress;
    progress.question_id = qid;
    progress.samples_per_arm.assign(static_cast<std::size_t>(trace.arm_count()), 0);
    std::optional<int> answer;

    for (int k = 0; k < trace.arm_count(); ++k) {
      const QueryRecord record = sample_response(trace, qid, k, 0, unused);
      const double monetary =
          policy.monetary_price(k, record.input_tokens, record.output_tokens);
      const double cost = policy.combine(monetary, record.latency_s);
      if (!ledger.affordable(cost)) break;
      ledger.charge_query(k, monetary, record.latency_s);
      ++stats.queries_per_arm[static_cast<std::size_t>(k)];
      note_response(progress, record);
      answer = record.answer_id;

      const std::vector<double> features =
          encode_features(trace, ledger, progress, embeds.get(qid), env_config);
      if (confidence(features, record) >= threshold_for(k)) break;
    }

    ++stats.finalized;
    if (!answer) {
      ++stats.unanswered;
    } else if (*answer == q.ground_truth) {
      ++stats.correct;
    }
    ledger.question_done();
  }
  stats.spend = ledger.spent();
  return stats;
}

StreamStats threshold_cascade_run(const TraceSet& trace,
                                  std::vector<int> question_ids, double budget,
                                  const CorrectnessEstimator& estimator,
                                  std::span<const double> thresholds,
                                  const PricingPolicy& policy) {
  EnvConfig env_config;
  env_config.requery_cap = estimator.config.requery_cap;
  env_config.embed_dim = estimator.config.embed_dim;
  const ConfidenceFn confidence =
      [&estimator](std::span<const double> features, const QueryRecord&) {
        return estimator.predict(features);
      };
  return threshold_cascade_run(trace, std::move(question_ids), budget,
                               confidence, env_config, thresholds, policy);
}

StreamStats calibrated_cascade_run(const TraceSet& trace,
                                   std::vector<int> question_ids, double budget,
                                   const CorrectnessEstimator& estimator,
                                   double p_high, double p_low,
                                   const PricingPolicy& policy,
                                   rng::Stream& rng) {
  if (p_low < 0.0 || p_low > p_high || p_high > 1.0) {
    throw ConfigError("calibrated cascade needs 0 <= p_low <= p_high <= 1");
  }
  EnvConfig env_config;
  env_config.requery_cap = estimator.config.requery_cap;
  env_config.embed_dim = estimator.config.embed_dim;

  StreamStats stats = fresh_stats(trace, static_cast<int>(question_ids.size()));
  BudgetLedger ledger(trace, policy, budget, stats.questions);
  EmbedCache embeds(trace, estimator.config.embed_dim);

  for (int qid : question_ids) {
    const Question& q = trace.question(qid);
    QuestionProgress progress;
    progress.question_id = qid;
    progress.samples_per_arm.assign(static_cast<std::size_t>(trace.arm_count()), 0);
    std::optional<int> answer;
    int k = 0;

    while (true) {
      const int sample_index = progress.samples_per_arm[static_cast<std::size_t>(k)];
      const QueryRecord record = sample_response(trace, qid, k, sample_index, rng);
      const double monetary =
          policy.monetary_price(k, record.input_tokens, record.output_tokens);
      const double cost = policy.combine(monetary, record.latency_s);
      if (!ledger.affordable(cost)) break;
      ledger.charge_query(k, monetary, record.latency_s);
      ++stats.queries_per_arm[static_cast<std::size_t>(k)];
      note_response(progress, record);
      answer = record.answer_id;

      const std::vector<double> features =
          encode_features(trace, ledger, progress, embeds.get(qid), env_config);
      const double confidence = estimator.predict(features);
      if (confidence >= p_high) break;
      if (confidence >= p_low &&
          progress.samples_per_arm[static_cast<std::size_t>(k)] <
              env_config.requery_cap) {
        continue;  // re-query the same arm
      }
      if (k + 1 < trace.arm_count()) {
        ++k;
        continue;
      }
      break;
    }

    ++stats.finalized;
    if (!answer) {
      ++stats.unanswered;
    } else if (*answer == q.ground_truth) {
      ++stats.correct;
    }
    ledger.question_done();
  }
  stats.spend = ledger.spent();
  return stats;
}

namespace {

void check_instance(const KnapsackInstance& instance) {
  if (instance.questions < 0 || instance.arms < 1) {
    throw ConfigError("knapsack instance needs at least one arm");
  }
  for (double c : instance.cost) {
    if (c < 0.0) throw DataError("knapsack instance has a negative cost");
  }
}

struct BranchState {
  const KnapsackInstance* instance;
  std::vector<double> suffix_max;  // best achievable value from question q on
  std::vector<int> choice;
  KnapsackSolution best;
  bool has_best = false;
};

void branch(BranchState& state, int q, double value, double cost) {
  const KnapsackInstance& inst = *state.instance;
  if (q == inst.questions) {
    if (!state.has_best || value > state.best.value + 1e-15) {
      state.best.choice = state.choice;
      state.best.value = value;
      state.best.cost = cost;
      state.has_best = true;
    }
    return;
  }
  if (state.has_best &&
      value + state.suffix_max[static_cast<std::size_t>(q)] <= state.best.value) {
    return;  // cannot strictly beat the incumbent; ties keep the earlier one
  }
  for (int k = 0; k < inst.arms; ++k) {
    const double c = inst.cost_at(q, k);
    if (cost + c <= inst.budget + 1e-12) {
      state.choice[static_cast<std::size_t>(q)] = k;
      branch(state, q + 1, value + inst.value_at(q, k), cost + c);
    }
  }
  state.choice[static_cast<std::size_t>(q)] = kSkipChoice;
  branch(state, q + 1, value, cost);
}

KnapsackSolution knapsack_branch_and_bound(const KnapsackInstance& inst) {
  BranchState state;
  state.instance = &inst;
  state.choice.assign(static_cast<std::size_t>(inst.questions), kSkipChoice);
  state.suffix_max.assign(static_cast<std::size_t>(inst.questions) + 1, 0.0);
  for (int q = inst.questions - 1; q >= 0; --q) {
    double best = 0.0;  // skip is always available
    for (int k = 0; k < inst.arms; ++k) best = std::max(best, inst.value_at(q, k));
    state.suffix_max[static_cast<std::size_t>(q)] =
        state.suffix_max[static_cast<std::size_t>(q) + 1] + best;
  }
  branch(state, 0, 0.0, 0.0);
  return state.best;
}

constexpr int kDpGridUnits = 10000;

KnapsackSolution knapsack_dp(const KnapsackInstance& inst) {
  const int units = kDpGridUnits;
  const double grid = inst.budget > 0.0 ? inst.budget / units : 1.0;
  const auto cost_units = [&](double cost) {
    return static_cast<int>(std::ceil(cost / grid - 1e-12));
  };

  const auto n = static_cast<std::size_t>(inst.questions);
  std::vector<double> dp(static_cast<std::size_t>(units) + 1, 0.0);
  // choice table: kSkipChoice or arm index, per question per budget unit
  std::vector<std::int8_t> chosen(n * (static_cast<std::size_t>(units) + 1),
                                  static_cast<std::int8_t>(kSkipChoice));
  if (inst.arms > 126) {
    throw ConfigError("dp knapsack supports at most 126 arms");
  }

  std::vector<double> next(dp.size());
  for (int q = 0; q < inst.questions; ++q) {
    for (int w = 0; w <= units; ++w) {
      double best = dp[static_cast<std::size_t>(w)];  // skip
      std::int8_t pick = static_cast<std::int8_t>(kSkipChoice);
      for (int k = 0; k < inst.arms; ++k) {
        const int cu = cost_units(inst.cost_at(q, k));
        if (cu > w) continue;
        const double v =
            dp[static_cast<std::size_t>(w - cu)] + inst.value_at(q, k);
        if (v > best + 1e-15) {
          best = v;
          pick = static_cast<std::int8_t>(k);
        }
      }
      next[static_cast<std::size_t>(w)] = best;
      chosen[static_cast<std::size_t>(q) * (units + 1) + static_cast<std::size_t>(w)] = pick;
    }
    dp.swap(next);
  }

  KnapsackSolution solution;
  solution.choice.assign(n, kSkipChoice);
  int w = units;
  for (int q = inst.questions - 1; q >= 0; --q) {
    const std::int8_t pick =
        chosen[static_cast<std::size_t>(q) * (units + 1) + static_cast<std::size_t>(w)];
    solution.choice[static_cast<std::size_t>(q)] = pick;
    if (pick != kSkipChoice) {
      solution.value += inst.value_at(q, pick);
      solution.cost += inst.cost_at(q, pick);
      w -= cost_units(inst.cost_at(q, pick));
    }
  }
  return solution;
}

}  // namespace

KnapsackSolution offline_knapsack_solve(const KnapsackInstance& instance) {
  check_instance(instance);
  if (instance.questions == 0) {
    return KnapsackSolution{};
  }
  if (instance.questions <= 12) {
    return knapsack_branch_and_bound(instance);
  }
  return knapsack_dp(instance);
}

std::pair<double, double> ratio_bounds(const KnapsackInstance& instance) {
  double lower = std::numeric_limits<double>::infinity();
  double upper = 0.0;
  for (int q = 0; q < instance.questions; ++q) {
    for (int k = 0; k < instance.arms; ++k) {
      const double v = instance.value_at(q, k);
      const double c = instance.cost_at(q, k);
      if (v <= 0.0 || c <= 0.0) continue;
      lower = std::min(lower, v / c);
      upper = std::max(upper, v / c);
    }
  }
  if (!std::isfinite(lower) || upper <= 0.0) {
    return {1.0, std::numbers::e};
  }
  return {lower, upper};
}

KnapsackSolution online_knapsack_run(const KnapsackInstance& instance,
                                     double ratio_lower, double ratio_upper) {
  check_instance(instance);
  if (ratio_lower <= 0.0 || ratio_upper <= 0.0) {
    throw ConfigError("online knapsack needs positive ratio bounds");
  }
  const bool degenerate = ratio_lower >= ratio_upper * std::numbers::e;
  if (degenerate) {
    std::fprintf(stderr,
                 "warning: online knapsack ratio bounds degenerate "
                 "(L >= U*e); falling back to the greedy ratio rule\n");
  }

  KnapsackSolution solution;
  solution.choice.assign(static_cast<std::size_t>(instance.questions),
                         kSkipChoice);
  for (int q = 0; q < instance.questions; ++q) {
    const double z = instance.budget > 0.0 ? solution.cost / instance.budget : 1.0;
    const double psi =
        (ratio_upper * std::numbers::e / ratio_lower) >= 1.0
            ? std::pow(ratio_upper * std::numbers::e / ratio_lower, z) *
                  (ratio_lower / std::numbers::e)
            : ratio_lower / std::numbers::e;

    int pick = kSkipChoice;
    double pick_value = 0.0;
    double pick_ratio = -1.0;
    for (int k = 0; k < instance.arms; ++k) {
      const double c = instance.cost_at(q, k);
      const double v = instance.value_at(q, k);
      if (solution.cost + c > instance.budget + 1e-12) continue;
      const double ratio =
          c > 0.0 ? v / c : std::numeric_limits<double>::infinity();
      if (degenerate) {
        if (ratio > pick_ratio) {
          pick_ratio = ratio;
          pick = k;
          pick_value = v;
        }
      } else if (ratio >= psi && v > pick_value) {
        pick = k;
        pick_value = v;
      }
    }
    if (pick != kSkipChoice) {
      solution.choice[static_cast<std::size_t>(q)] = pick;
      solution.value += instance.value_at(q, pick);
      solution.cost += instance.cost_at(q, pick);
    }
  }
  return solution;
}

KnapsackInstance oracle_instance(const TraceSet& trace,
                                 std::span<const int> question_ids,
                                 double budget, const PricingPolicy& policy) {
  KnapsackInstance inst;
  inst.questions = static_cast<int>(question_ids.size());
  inst.arms = trace.arm_count();
  inst.budget = budget;
  inst.value.reserve(static_cast<std::size_t>(inst.questions) * inst.arms);
  inst.cost.reserve(inst.value.capacity());
  rng::Stream unused(0);
  for (int qid : question_ids) {
    for (int k = 0; k < inst.arms; ++k) {
      const QueryRecord record = sample_response(trace, qid, k, 0, unused);
      inst.value.push_back(record.is_correct ? 1.0 : 0.0);
      inst.cost.push_back(policy.query_cost(record));
    }
  }
  return inst;
}

KnapsackInstance expected_instance(const TraceSet& trace,
                                   std::span<const int> question_ids,
                                   double budget, const PricingPolicy& policy) {
  KnapsackInstance inst;
  inst.questions = static_cast<int>(question_ids.size());
  inst.arms = trace.arm_count();
  inst.budget = budget;
  inst.value.reserve(static_cast<std::size_t>(inst.questions) * inst.arms);
  inst.cost.reserve(inst.value.capacity());
  rng::Stream unused(0);
  for (int qid : question_ids) {
    const Tier tier = trace.question(qid).tier;
    for (int k = 0; k < inst.arms; ++k) {
      const QueryRecord record = sample_response(trace, qid, k, 0, unused);
      inst.value.push_back(trace.tier_accuracy(k, tier));
      inst.cost.push_back(policy.query_cost(record));
    }
  }
  return inst;
}

namespace {

StreamStats stats_from_selection(const TraceSet& trace,
                                 std::span<const int> question_ids,
                                 const KnapsackSolution& solution,
                                 const PricingPolicy& policy) {
  StreamStats stats = fresh_stats(trace, static_cast<int>(question_ids.size()));
  rng::Stream unused(0);
  for (std::size_t i = 0; i < question_ids.size(); ++i) {
    ++stats.finalized;
    const int pick = solution.choice[i];
    if (pick == kSkipChoice) {
      ++stats.unanswered;
      continue;
    }
    const QueryRecord record =
        sample_response(trace, question_ids[i], pick, 0, unused);
    stats.spend += policy.query_cost(record);
    ++stats.queries_per_arm[static_cast<std::size_t>(pick)];
    if (record.is_correct) ++stats.correct;
  }
  return stats;
}

}  // namespace

StreamStats knapsack_offline_run(const TraceSet& trace,
                                 std::vector<int> question_ids, double budget,
                                 const PricingPolicy& policy) {
  const KnapsackInstance inst =
      oracle_instance(trace, question_ids, budget, policy);
  const KnapsackSolution solution = offline_knapsack_solve(inst);
  return stats_from_selection(trace, question_ids, solution, policy);
}

StreamStats knapsack_online_run(const TraceSet& trace,
                                std::vector<int> question_ids, double budget,
                                const PricingPolicy& policy) {
  const std::vector<int> train_ids = trace.question_ids(Split::Train);
  const KnapsackInstance train_inst = expected_instance(
      trace, train_ids.empty() ? question_ids : train_ids, budget, policy);
  const auto [lower, upper] = ratio_bounds(train_inst);
  const KnapsackInstance inst =
      expected_instance(trace, question_ids, budget, policy);
  const KnapsackSolution solution = online_knapsack_run(inst, lower, upper);
  return stats_from_selection(trace, question_ids, solution, policy);
}

}  // namespace cascadelab
