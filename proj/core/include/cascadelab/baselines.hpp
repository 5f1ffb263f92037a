#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "cascadelab/env.hpp"
#include "cascadelab/net.hpp"

namespace cascadelab {

// Every baseline reports through the same stats shape as the environment.
// accuracy = correct / questions, with skipped questions counted wrong.
double accuracy_of(const StreamStats& stats);

StreamStats single_model_run(const TraceSet& trace, std::vector<int> question_ids,
                             double budget, const PricingPolicy& policy);

StreamStats majority_vote_run(const TraceSet& trace, std::vector<int> question_ids,
                              double budget, int vote_n,
                              const PricingPolicy& policy, rng::Stream& rng);

struct EstimatorConfig {
  int hidden = 128;
  int hidden_layers = 1;
  double learning_rate = 5e-3;
  int epochs = 25;
  int batch_size = 64;
  std::uint64_t seed = 7;
  int embed_dim = 64;
  int requery_cap = 8;
  // Per-question allowance used while collecting features and tuning
  // decision thresholds on the validation split.
  double budget_per_question = 0.0;
};

// Two-layer correctness estimator over the same state features the RL
// policy sees, with a logistic output head.
struct CorrectnessEstimator {
  Mlp net;
  int feature_dim = 0;
  double weight_positive = 1.0;
  double weight_negative = 1.0;
  double threshold = 0.5;  // tuned single-threshold rule
  double p_high = 0.8;     // tuned calibrated-cascade band
  double p_low = 0.4;
  EstimatorConfig config;

  double predict(std::span<const double> features) const;
};

// Trains on the train split with inverse-class-frequency loss weights and
// tunes threshold / (p_high, p_low) on the validation split for routed
// accuracy at the configured per-question budget.
CorrectnessEstimator train_estimator(const TraceSet& trace,
                                     const PricingPolicy& policy,
                                     const EstimatorConfig& config);

// FrugalGPT-style cascade: no re-queries, escalate until the estimate
// clears the arm's threshold. `thresholds` holds one entry per arm or a
// single shared value.
StreamStats threshold_cascade_run(const TraceSet& trace,
                                  std::vector<int> question_ids, double budget,
                                  const CorrectnessEstimator& estimator,
                                  std::span<const double> thresholds,
                                  const PricingPolicy& policy);

// Same cascade with an arbitrary confidence function over the state
// features; lets tests drive it with a ground-truth oracle.
using ConfidenceFn = std::function<double(std::span<const double> features,
                                          const QueryRecord& last_response)>;
StreamStats threshold_cascade_run(const TraceSet& trace,
                                  std::vector<int> question_ids, double budget,
                                  const ConfidenceFn& confidence,
                                  const EnvConfig& env_config,
                                  std::span<const double> thresholds,
                                  const PricingPolicy& policy);

// Band rule: >= p_high return, [p_low, p_high) re-query the same arm (up to
// the cap), < p_low escalate.
StreamStats calibrated_cascade_run(const TraceSet& trace,
                                   std::vector<int> question_ids, double budget,
                                   const CorrectnessEstimator& estimator,
                                   double p_high, double p_low,
                                   const PricingPolicy& policy,
                                   rng::Stream& rng);

// Multiple-choice knapsack over (question, arm) items plus a free skip.
struct KnapsackInstance {
  int questions = 0;
  int arms = 0;
  std::vector<double> value;  // questions x arms, row-major
  std::vector<double> cost;
  double budget = 0.0;

  double value_at(int q, int k) const {
    return value[static_cast<std::size_t>(q) * arms + k];
  }
  double cost_at(int q, int k) const {
    return cost[static_cast<std::size_t>(q) * arms + k];
  }
};

inline constexpr int kSkipChoice = -1;

struct KnapsackSolution {
  std::vector<int> choice;  // arm index per question, kSkipChoice = skip
  double value = 0.0;
  double cost = 0.0;
};

// Exact branch and bound for small instances (<= 12 questions), otherwise
// budget-grid dynamic programming with value >= OPT(B - n*g). Ties break
// lexicographically (lowest question index, lowest arm, skip last).
KnapsackSolution offline_knapsack_solve(const KnapsackInstance& instance);

// Threshold-based online rule: accept the best-value arm whose value/cost
// ratio clears psi(z) = (U e / L)^z * (L / e) at fill fraction z.
KnapsackSolution online_knapsack_run(const KnapsackInstance& instance,
                                     double ratio_lower, double ratio_upper);

// Ratio bounds (min / max positive value/cost) estimated from an instance,
// normally built on the train split.
std::pair<double, double> ratio_bounds(const KnapsackInstance& instance);

// Trace-level instances: ground-truth correctness indicators (the offline
// bound) and tier-conditional probabilities (the online variant's values);
// both cost the actual temperature-0 records.
KnapsackInstance oracle_instance(const TraceSet& trace,
                                 std::span<const int> question_ids,
                                 double budget, const PricingPolicy& policy);
KnapsackInstance expected_instance(const TraceSet& trace,
                                   std::span<const int> question_ids,
                                   double budget, const PricingPolicy& policy);

StreamStats knapsack_offline_run(const TraceSet& trace,
                                 std::vector<int> question_ids, double budget,
                                 const PricingPolicy& policy);
StreamStats knapsack_online_run(const TraceSet& trace,
                                std::vector<int> question_ids, double budget,
                                const PricingPolicy& policy);

}  // namespace cascadelab
