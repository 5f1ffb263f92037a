#pragma once

#include <span>
#include <utility>
#include <vector>

#include "cascadelab/rng.hpp"

namespace cascadelab {

// Idealized cascade arm: an oracle flags wrong answers, so a run stops at
// the first correct one.
struct OracleArm {
  double p = 0.0;  // correctness probability
  double c = 0.0;  // inference cost, > 0
};

// Sum over arms of (probability all earlier arms failed) * cost.
double oracle_expected_cost(std::span<const OracleArm> arms);

// Permutation sorting arms by cost-normalized accuracy p/c descending;
// ties broken by lower cost, then input order.
std::vector<int> optimal_order(std::span<const OracleArm> arms);

struct OrderingReport {
  int instances = 0;
  int violations = 0;
  double max_gap = 0.0;        // best
  double worst_over_best = 0.0;  // max over instances of (max cost / min cost)
  std::vector<OracleArm> counterexample;
};

// Enumerates all M! orderings of each instance and checks that
// optimal_order attains the minimum expected cost within tolerance.
OrderingReport verify_ordering_bruteforce(
    std::span<const std::vector<OracleArm>> instances, double tolerance = 1e-12);

// Sorted answer-class distribution (descending probability, sums to one).
// The designated majority is class 0.
class AnswerDistribution {
 public:
  explicit AnswerDistribution(std::vector<double> probabilities);

  const std::vector<double>& p() const { return p_; }
  int support() const { return static_cast<int>(p_.size()); }
  int majority_class() const { return 0; }

 private:
  std::vector<double> p_;
};

struct KStopResult {
  int answer = 0;
  int draws = 0;
  bool capped = false;
};

// Draws i.i.d. answers until one reaches its K'th occurrence. A hard cap of
// 10 * K * support draws falls back to the plurality (ties to the lowest
// class index).
KStopResult k_stop_sc_run(const AnswerDistribution& dist, int k_stop,
                          rng::Stream& rng);

enum class AlphaMethod { Exact, MonteCarlo };

// Probability that the K-stop self-consistency run returns the true
// majority. Exact mode runs dynamic programming over occurrence-count
// vectors (support <= 12, k_stop <= 3); Monte Carlo repeats k_stop_sc_run.
double alpha_estimate(const AnswerDistribution& dist, int k_stop,
                      AlphaMethod method, long trials = 100000,
                      std::uint64_t seed = 12345);

}  // namespace cascadelab
