#include "cascadelab/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cascadelab/errors.hpp"

namespace cascadelab {

double oracle_expected_cost(std::span<const OracleArm> arms) {
  if (arms.empty()) {
    throw DataError("oracle_expected_cost on an empty arm list");
  }
  double expected = 0.0;
  double all_failed = 1.0;  // probability every earlier arm was wrong
  for (const OracleArm& arm : arms) {
    expected += all_failed * arm.c;
    all_failed *= 1.0 - arm.p;
  }
  return expected;
}

std::vector<int> optimal_order(std::span<const OracleArm> arms) {
  for (const OracleArm& arm : arms) {
    if (arm.c <= 0.0) {
      throw DataError("oracle arm cost must be positive");
    }
  }
  std::vector<int> order(arms.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    // p/c descending, compared without division.
    const double lhs = arms[static_cast<std::size_t>(a)].p * arms[static_cast<std::size_t>(b)].c;
    const double rhs = arms[static_cast<std::size_t>(b)].p * arms[static_cast<std::size_t>(a)].c;
    if (lhs != rhs) return lhs > rhs;
    return arms[static_cast<std::size_t>(a)].c < arms[static_cast<std::size_t>(b)].c;
  });
  return order;
}

OrderingReport verify_ordering_bruteforce(
    std::span<const std::vector<OracleArm>> instances, double tolerance) {
  OrderingReport report;
  for (const std::vector<OracleArm>& arms : instances) {
    if (arms.size() > 8) {
      throw ConfigError("brute-force ordering check limited to 8 arms");
    }
    ++report.instances;

    std::vector<int> perm(arms.size());
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    double worst = -std::numeric_limits<double>::infinity();
    std::vector<OracleArm> ordered(arms.size());
    do {
      for (std::size_t i = 0; i < perm.size(); ++i) {
        ordered[i] = arms[static_cast<std::size_t>(perm[i])];
      }
      const double cost = oracle_expected_cost(ordered);
      best = std::min(best, cost);
      worst = std::max(worst, cost);
    } while (std::next_permutation(perm.begin(), perm.end()));

    const std::vector<int> claimed = optimal_order(arms);
    for (std::size_t i = 0; i < claimed.size(); ++i) {
      ordered[i] = arms[static_cast<std::size_t>(claimed[i])];
    }
    const double claimed_cost = oracle_expected_cost(ordered);
    if (claimed_cost > best + tolerance) {
      ++report.violations;
      if (report.counterexample.empty()) report.counterexample = arms;
    }
    report.max_gap = std::max(report.max_gap, worst - best);
    if (best > 0.0) {
      report.worst_over_best = std::max(report.worst_over_best, worst / best);
    }
  }
  return report;
}

AnswerDistribution::AnswerDistribution(std::vector<double> probabilities)
    : p_(std::move(probabilities)) {
  if (p_.empty()) {
    throw DataError("answer distribution is empty");
  }
  double sum = 0.0;
  for (double x : p_) {
    if (x < 0.0) {
      throw DataError("answer distribution has a negative entry");
    }
    sum += x;
  }
  if (std::fabs(sum - 1.0) > 1e-9) {
    throw DataError("answer distribution sums to " + std::to_string(sum));
  }
  // Descending and stable: an exact tie for the top keeps the lowest input
  // index as the designated majority.
  std::stable_sort(p_.begin(), p_.end(), std::greater<>());
}

KStopResult k_stop_sc_run(const AnswerDistribution& dist, int k_stop,
                          rng::Stream& rng) {
  if (k_stop < 1) {
    throw ConfigError("k_stop must be at least 1");
  }
  const rng::DiscreteSampler sampler(dist.p());
  const int cap = 10 * k_stop * dist.support();
  std::vector<int> counts(static_cast<std::size_t>(dist.support()), 0);

  KStopResult result;
  for (int draw = 1; draw <= cap; ++draw) {
    const int j = sampler.sample(rng.uniform());
    result.draws = draw;
    if (++counts[static_cast<std::size_t>(j)] == k_stop) {
      result.answer = j;
      return result;
    }
  }
  // Plurality fallback; ties resolve to the lowest class index.
  result.capped = true;
  int best = 0;
  for (int j = 1; j < dist.support(); ++j) {
    if (counts[static_cast<std::size_t>(j)] > counts[static_cast<std::size_t>(best)]) {
      best = j;
    }
  }
  result.answer = best;
  return result;
}

namespace {

// Exact win probability of class 0 via dynamic programming over occurrence
// counts capped at k_stop - 1 per class (a class reaching k_stop absorbs).
double alpha_exact(const AnswerDistribution& dist, int k_stop) {
  const int m = dist.support();
  if (m > 12) {
    throw ConfigError("exact alpha refuses support > 12 (state explosion)");
  }
  double states_d = 1.0;
  for (int j = 0; j < m; ++j) states_d *= k_stop;
  if (states_d > (1 << 24)) {
    throw ConfigError("exact alpha state space too large");
  }
  const auto states = static_cast<std::size_t>(states_d);

  // Strides for the base-k_stop digit encoding.
  std::vector<std::size_t> stride(static_cast<std::size_t>(m));
  std::size_t s = 1;
  for (int j = 0; j < m; ++j) {
    stride[static_cast<std::size_t>(j)] = s;
    s *= static_cast<std::size_t>(k_stop);
  }

  std::vector<int> digit_sum(states, 0);
  for (std::size_t idx = 0; idx < states; ++idx) {
    std::size_t rest = idx;
    int total = 0;
    for (int j = 0; j < m; ++j) {
      total += static_cast<int>(rest % static_cast<std::size_t>(k_stop));
      rest /= static_cast<std::size_t>(k_stop);
    }
    digit_sum[idx] = total;
  }
  std::vector<std::size_t> order(states);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return digit_sum[a] < digit_sum[b];
  });

  std::vector<double> prob(states, 0.0);
  prob[0] = 1.0;
  double majority_wins = 0.0;
  for (std::size_t idx : order) {
    const double mass = prob[idx];
    if (mass == 0.0) continue;
    std::size_t rest = idx;
    for (int j = 0; j < m; ++j) {
      const int count = static_cast<int>(rest % static_cast<std::size_t>(k_stop));
      rest /= static_cast<std::size_t>(k_stop);
      const double pj = dist.p()[static_cast<std::size_t>(j)];
      if (pj == 0.0) continue;
      if (count == k_stop - 1) {
        if (j == dist.majority_class()) majority_wins += mass * pj;
      } else {
        prob[idx + stride[static_cast<std::size_t>(j)]] += mass * pj;
      }
    }
  }
  return majority_wins;
}

}  // namespace

double alpha_estimate(const AnswerDistribution& dist, int k_stop,
                      AlphaMethod method, long trials, std::uint64_t seed) {
  if (k_stop < 1) {
    throw ConfigError("k_stop must be at least 1");
  }
  if (method == AlphaMethod::Exact) {
    return alpha_exact(dist, k_stop);
  }
  rng::Stream rng(seed);
  long wins = 0;
  for (long t = 0; t < trials; ++t) {
    if (k_stop_sc_run(dist, k_stop, rng).answer == dist.majority_class()) {
      ++wins;
    }
  }
  return static_cast<double>(wins) / static_cast<double>(trials);
}

}  // namespace cascadelab
