#include "cascadelab/theory.hpp"

#include <cmath>
#include <vector>

#include "cascadelab/errors.hpp"
#include "doctest.h"

using namespace cascadelab;

namespace {

std::vector<OracleArm> random_arms(int count, rng::Stream& rng) {
  std::vector<OracleArm> arms(static_cast<std::size_t>(count));
  for (OracleArm& arm : arms) {
    arm.p = rng.uniform(0.05, 0.99);
    arm.c = rng.uniform(0.01, 2.0);
  }
  return arms;
}

std::vector<OracleArm> apply_order(const std::vector<OracleArm>& arms,
                                   const std::vector<int>& order) {
  std::vector<OracleArm> out;
  out.reserve(arms.size());
  for (int i : order) out.push_back(arms[static_cast<std::size_t>(i)]);
  return out;
}

}  // namespace

TEST_SUITE("theory") {

TEST_CASE("two-arm expected cost, both orders") {
  const std::vector<OracleArm> forward{{0.9, 1.0}, {0.5, 0.4}};
  CHECK(oracle_expected_cost(forward) == doctest::Approx(1.04));
  const std::vector<OracleArm> reversed{{0.5, 0.4}, {0.9, 1.0}};
  CHECK(oracle_expected_cost(reversed) == doctest::Approx(0.9));
}

TEST_CASE("single arm costs its own price; p = 1 truncates the tail") {
  const std::vector<OracleArm> one{{0.3, 0.7}};
  CHECK(oracle_expected_cost(one) == doctest::Approx(0.7));

  const std::vector<OracleArm> truncated{{1.0, 0.2}, {0.9, 100.0}};
  CHECK(oracle_expected_cost(truncated) == doctest::Approx(0.2));

  CHECK_THROWS_AS(oracle_expected_cost({}), DataError);
}

TEST_CASE("optimal order sorts by cost-normalized accuracy") {
  // Ratios 0.9 and 1.25: the second arm goes first.
  const std::vector<OracleArm> arms{{0.9, 1.0}, {0.5, 0.4}};
  CHECK(optimal_order(arms) == std::vector<int>{1, 0});
  CHECK(oracle_expected_cost(apply_order(arms, optimal_order(arms))) ==
        doctest::Approx(0.9));

  // Equal ratios: cheaper first.
  const std::vector<OracleArm> tied{{0.8, 0.8}, {0.5, 0.5}};
  CHECK(optimal_order(tied) == std::vector<int>{1, 0});

  const std::vector<OracleArm> single{{0.4, 1.0}};
  CHECK(optimal_order(single) == std::vector<int>{0});

  CHECK_THROWS_AS(optimal_order(std::vector<OracleArm>{{0.5, 0.0}}), DataError);
}

TEST_CASE("brute force confirms the ordering rule on 200 random instances") {
  rng::Stream rng(1234);
  std::vector<std::vector<OracleArm>> instances;
  for (int m = 2; m <= 6; ++m) {
    for (int i = 0; i < 40; ++i) instances.push_back(random_arms(m, rng));
  }
  const OrderingReport report = verify_ordering_bruteforce(instances, 1e-12);
  CHECK(report.instances == 200);
  CHECK(report.violations == 0);
  CHECK(report.max_gap > 0.0);
}

TEST_CASE("all-equal arms make every ordering equal") {
  const std::vector<std::vector<OracleArm>> instances{
      {{0.5, 1.0}, {0.5, 1.0}, {0.5, 1.0}, {0.5, 1.0}}};
  const OrderingReport report = verify_ordering_bruteforce(instances, 1e-12);
  CHECK(report.violations == 0);
  CHECK(report.max_gap == doctest::Approx(0.0));
}

TEST_CASE("two-model gap has the closed form |c2 p1 - c1 p2|") {
  rng::Stream rng(8);
  for (int i = 0; i < 50; ++i) {
    const std::vector<OracleArm> arms = random_arms(2, rng);
    const std::vector<OracleArm> swapped{arms[1], arms[0]};
    const double gap =
        std::fabs(oracle_expected_cost(arms) - oracle_expected_cost(swapped));
    const double closed =
        std::fabs(arms[1].c * arms[0].p - arms[0].c * arms[1].p);
    CHECK(gap == doctest::Approx(closed).epsilon(1e-10));
  }
}

TEST_CASE("exchange property: swapping adjacent arms out of order never helps") {
  rng::Stream rng(99);
  for (int trial = 0; trial < 60; ++trial) {
    const std::vector<OracleArm> raw = random_arms(5, rng);
    const std::vector<OracleArm> ordered =
        apply_order(raw, optimal_order(raw));
    const double best = oracle_expected_cost(ordered);
    for (std::size_t i = 0; i + 1 < ordered.size(); ++i) {
      std::vector<OracleArm> swapped = ordered;
      std::swap(swapped[i], swapped[i + 1]);
      CHECK(oracle_expected_cost(swapped) >= best - 1e-12);
    }
  }
}

TEST_CASE("answer distribution validation and sorting") {
  const AnswerDistribution d({0.2, 0.5, 0.3});
  CHECK(d.p() == std::vector<double>{0.5, 0.3, 0.2});
  CHECK(d.majority_class() == 0);
  CHECK_THROWS_AS(AnswerDistribution({0.5, 0.6}), DataError);
  CHECK_THROWS_AS(AnswerDistribution({-0.1, 1.1}), DataError);
  CHECK_THROWS_AS(AnswerDistribution({}), DataError);
}

TEST_CASE("k-stop run basics") {
  rng::Stream rng(4);
  const AnswerDistribution point({1.0});
  for (int k = 1; k <= 3; ++k) {
    const KStopResult r = k_stop_sc_run(point, k, rng);
    CHECK(r.answer == 0);
    CHECK(r.draws == k);  // exactly K draws of the single class
    CHECK(!r.capped);
  }

  const AnswerDistribution coin({0.6, 0.4});
  const KStopResult first = k_stop_sc_run(coin, 1, rng);
  CHECK(first.draws == 1);  // K = 1 returns the first draw

  CHECK_THROWS_AS(k_stop_sc_run(coin, 0, rng), ConfigError);
}

TEST_CASE("exact alpha matches the enumerated 0.648 cell") {
  const AnswerDistribution d({0.6, 0.4});
  // All length-3 sequences: 0.6^2 stops at two, plus the interleavings.
  CHECK(alpha_estimate(d, 2, AlphaMethod::Exact) == doctest::Approx(0.648));
}

TEST_CASE("exact alpha symmetric tie is one half") {
  const AnswerDistribution d({0.5, 0.5});
  CHECK(alpha_estimate(d, 2, AlphaMethod::Exact) == doctest::Approx(0.5));
}

TEST_CASE("point distribution always wins") {
  const AnswerDistribution d({1.0});
  for (int k = 1; k <= 3; ++k) {
    CHECK(alpha_estimate(d, k, AlphaMethod::Exact) == doctest::Approx(1.0));
  }
}

TEST_CASE("k = 1 alpha equals the majority probability") {
  rng::Stream rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> w(static_cast<std::size_t>(rng.uniform_int(2, 5)));
    double total = 0.0;
    for (double& x : w) {
      x = rng.uniform(0.05, 1.0);
      total += x;
    }
    for (double& x : w) x /= total;
    const AnswerDistribution d(w);
    CHECK(alpha_estimate(d, 1, AlphaMethod::Exact) ==
          doctest::Approx(d.p().front()));
  }
}

TEST_CASE("alpha is non-decreasing in the stop count") {
  rng::Stream rng(31);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<double> w(static_cast<std::size_t>(rng.uniform_int(2, 5)));
    double total = 0.0;
    for (double& x : w) {
      x = rng.uniform(0.05, 1.0);
      total += x;
    }
    for (double& x : w) x /= total;
    const AnswerDistribution d(w);
    const double a1 = alpha_estimate(d, 1, AlphaMethod::Exact);
    const double a2 = alpha_estimate(d, 2, AlphaMethod::Exact);
    const double a3 = alpha_estimate(d, 3, AlphaMethod::Exact);
    // The companion draft treats this as exploratory; a counterexample
    // would be a finding, so it is reported loudly.
    CHECK_MESSAGE(a2 >= a1 - 1e-12, "alpha(2) < alpha(1) at p = ",
                  d.p().front());
    CHECK_MESSAGE(a3 >= a2 - 1e-12, "alpha(3) < alpha(2) at p = ",
                  d.p().front());
  }
}

TEST_CASE("monte carlo alpha agrees with exact within three sigmas") {
  const std::vector<std::vector<double>> dists{
      {0.6, 0.4}, {0.5, 0.3, 0.2}, {0.4, 0.3, 0.2, 0.1}};
  for (const auto& p : dists) {
    const AnswerDistribution d(p);
    for (int k = 1; k <= 3; ++k) {
      const double exact = alpha_estimate(d, k, AlphaMethod::Exact);
      const long trials = 100000;
      const double mc =
          alpha_estimate(d, k, AlphaMethod::MonteCarlo, trials, 555 + k);
      const double sigma = std::sqrt(exact * (1.0 - exact) / trials);
      CHECK(std::fabs(mc - exact) <= 3.0 * sigma + 1e-9);
    }
  }
}

TEST_CASE("splitting the tail mass drives alpha toward one") {
  // p1 = 0.3 with the rest split evenly over W classes. Frozen expected
  // values come from an exact recursion over (majority hits, distinct
  // slivers seen): 0.521658 at W=10, 0.874660 at W=100, 0.984188 at
  // W=1000.
  const auto split = [](int w) {
    std::vector<double> p{0.3};
    for (int i = 0; i < w; ++i) p.push_back(0.7 / w);
    return AnswerDistribution(p);
  };
  const long trials = 100000;
  const double a10 =
      alpha_estimate(split(10), 2, AlphaMethod::MonteCarlo, trials, 9);
  const double a100 =
      alpha_estimate(split(100), 2, AlphaMethod::MonteCarlo, trials, 9);
  const double a1000 =
      alpha_estimate(split(1000), 2, AlphaMethod::MonteCarlo, trials, 9);

  const auto three_sigma = [&](double exact) {
    return 3.0 * std::sqrt(exact * (1.0 - exact) / trials);
  };
  CHECK(std::fabs(a10 - 0.521658) <= three_sigma(0.521658));
  CHECK(std::fabs(a100 - 0.874660) <= three_sigma(0.874660));
  CHECK(std::fabs(a1000 - 0.984188) <= three_sigma(0.984188));
  // Directional: finer splits push alpha toward 1.
  CHECK(a10 < a100);
  CHECK(a100 < a1000);
  CHECK(a1000 >= 0.9);
}

TEST_CASE("exact alpha refuses oversized supports") {
  std::vector<double> wide(static_cast<std::size_t>(13), 1.0 / 13.0);
  CHECK_THROWS_AS(alpha_estimate(AnswerDistribution(wide), 2, AlphaMethod::Exact),
                  ConfigError);
}

TEST_CASE("capped k-stop run falls back to plurality") {
  // Heavy two-way near-tie over many classes cannot reach K quickly, but
  // the cap guarantees an answer.
  std::vector<double> p(static_cast<std::size_t>(50), 0.02);
  const AnswerDistribution d(p);
  rng::Stream rng(12);
  const KStopResult r = k_stop_sc_run(d, 3, rng);
  CHECK(r.answer >= 0);
  CHECK(r.draws <= 10 * 3 * 50);
}

}  // TEST_SUITE
