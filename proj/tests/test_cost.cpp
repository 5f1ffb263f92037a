#include "cascadelab/cost.hpp"

#include <array>
#include <cmath>

#include "cascadelab/errors.hpp"
#include "doctest.h"

using namespace cascadelab;

namespace {

// One arm whose expected per-query monetary price is exactly `price`.
TraceSet flat_price_trace(double price, double latency = 1.0) {
  SynthConfig cfg;
  cfg.n_questions = 10;
  SynthArmConfig arm;
  arm.model_name = "flat";
  arm.marginal_accuracy = 0.5;
  arm.mean_input_tokens = 1000.0;
  arm.mean_output_tokens = 0.0;
  arm.input_price_per_1k = price;
  arm.output_price_per_1k = 0.0;
  arm.fixed_latency_s = latency;
  cfg.arms = {arm};
  return synth_generate(cfg, 1);
}

}  // namespace

TEST_SUITE("cost") {

TEST_CASE("per-query price reproduces the published table entry") {
  // GPT-3.5-turbo CoT test row: 773.70 in, 108.31 out at (0.0015, 0.002).
  const double price = per_query_price(773.70, 108.31, 0.0015, 0.002);
  CHECK(std::fabs(price - 1.377e-3) <= 1e-5);
}

TEST_CASE("per-query price basics") {
  CHECK(per_query_price(0.0, 0.0, 0.0015, 0.002) == 0.0);
  CHECK(per_query_price(1000.0, 1000.0, 0.0015, 0.002) ==
        doctest::Approx(0.0035));
}

TEST_CASE("per-query price is linear in each token count") {
  const double base = per_query_price(250.0, 80.0, 0.0015, 0.002);
  CHECK(per_query_price(500.0, 80.0, 0.0015, 0.002) - base ==
        doctest::Approx(per_query_price(250.0, 0.0, 0.0015, 0.002)));
  CHECK(per_query_price(250.0, 160.0, 0.0015, 0.002) - base ==
        doctest::Approx(per_query_price(0.0, 80.0, 0.0015, 0.002)));
}

TEST_CASE("combined cost reproduces the published combo rows") {
  const TraceSet trace = flat_price_trace(3.66e-4);
  const PricingPolicy combo = PricingPolicy::latency_combo(trace, 50000.0);
  // GPT-3.5 domain expert at beta = 50k.
  CHECK(std::fabs(combined_cost(3.66e-4, 6.0, combo) - 4.86e-4) <= 1e-6);

  const PricingPolicy combo500 = PricingPolicy::latency_combo(trace, 500000.0);
  // Llama row at beta = 500k: latency only.
  CHECK(std::fabs(combined_cost(0.0, 8.0, combo500) - 1.60e-5) <= 1e-7);

  CHECK(combined_cost(3.66e-4, 0.0, combo) == doctest::Approx(3.66e-4));

  const PricingPolicy pure = PricingPolicy::pure_monetary(trace, 0.1, 1e-3);
  CHECK(combined_cost(1.0, 50.0, pure) == 1.0);
}

TEST_CASE("combined cost is monotone in monetary, latency and 1/beta") {
  const TraceSet trace = flat_price_trace(1e-4);
  const PricingPolicy combo = PricingPolicy::latency_combo(trace, 50000.0);
  const PricingPolicy wider = PricingPolicy::latency_combo(trace, 100000.0);
  rng::Stream rng(3);
  for (int i = 0; i < 200; ++i) {
    const double m = rng.uniform(0.0, 1e-2);
    const double l = rng.uniform(0.0, 30.0);
    CHECK(combined_cost(m + 1e-5, l, combo) >= combined_cost(m, l, combo));
    CHECK(combined_cost(m, l + 0.5, combo) >= combined_cost(m, l, combo));
    // Larger beta weights latency less.
    CHECK(combined_cost(m, l, wider) <= combined_cost(m, l, combo));
  }
}

TEST_CASE("beta must be positive") {
  const TraceSet trace = flat_price_trace(1e-4);
  CHECK_THROWS_AS(PricingPolicy::latency_combo(trace, 0.0), ConfigError);
  CHECK_THROWS_AS(PricingPolicy::latency_combo(trace, -2.0), ConfigError);
}

TEST_CASE("alpha chain: ratios are exact by definition") {
  const LocalArmPrices p = alpha_scaled_prices(3.66e-4, 0.1);
  CHECK(p.mid == doctest::Approx(3.66e-5));
  CHECK(p.low / p.mid == doctest::Approx(0.1));

  const LocalArmPrices same = alpha_scaled_prices(5.0, 1.0);
  CHECK(same.mid == doctest::Approx(5.0));
  CHECK(same.low == doctest::Approx(5.0));
}

TEST_CASE("alpha chain reproduces the published alpha rows within rounding") {
  // The alpha = 1/10 row lists the 13b arm at 1.67e-4, so the implied base
  // is 1.672e-3; the alpha = 1/20 row must then be exactly half.
  const LocalArmPrices a10 = alpha_scaled_prices(1.672e-3, 0.1);
  const LocalArmPrices a20 = alpha_scaled_prices(1.672e-3, 0.05);
  CHECK(std::fabs(a10.mid - 1.67e-4) / 1.67e-4 <= 0.005);
  CHECK(a20.mid == doctest::Approx(0.5 * a10.mid));
  CHECK(std::fabs(a20.mid - 8.36e-5) / 8.36e-5 <= 0.005);
  // The published 7b cell (4.01e-6) came from the paper's own unrounded
  // base; the multiplicative relation is what must hold.
  CHECK(a20.low == doctest::Approx(0.05 * a20.mid));
  CHECK(std::fabs(a20.low - 4.01e-6) / 4.01e-6 <= 0.05);
  CHECK_THROWS_AS(alpha_scaled_prices(1.0, 0.0), ConfigError);
}

TEST_CASE("ledger charge arithmetic and overdraft safety") {
  const TraceSet trace = flat_price_trace(0.01);
  const PricingPolicy policy = PricingPolicy::pure_monetary(trace, 1.0, 1.0);
  BudgetLedger ledger(trace, policy, 1.0, 10);

  ledger.charge(0.3);
  CHECK(ledger.spent() == doctest::Approx(0.3));
  ledger.charge(0.2);
  CHECK(ledger.spent() == doctest::Approx(0.5));

  CHECK_THROWS_AS(ledger.charge(0.6), BudgetExceededError);
  CHECK(ledger.spent() == doctest::Approx(0.5));  // unchanged on failure

  // A sequence summing to exactly the budget is allowed.
  ledger.charge(0.5);
  CHECK(ledger.spent() == doctest::Approx(1.0));
  CHECK(ledger.remaining() == doctest::Approx(0.0));
}

TEST_CASE("ledger fuzz: spend never exceeds the budget") {
  const TraceSet trace = flat_price_trace(0.01);
  const PricingPolicy policy = PricingPolicy::pure_monetary(trace, 1.0, 1.0);
  rng::Stream rng(77);
  for (int round = 0; round < 50; ++round) {
    BudgetLedger ledger(trace, policy, rng.uniform(0.1, 2.0), 100);
    for (int i = 0; i < 200; ++i) {
      const double cost = rng.uniform(0.0, 0.2);
      try {
        ledger.charge(cost);
      } catch (const BudgetExceededError&) {
      }
      REQUIRE(ledger.spent() <= ledger.total_budget());
    }
  }
}

TEST_CASE("normalized budget feature") {
  const TraceSet trace = flat_price_trace(0.01);
  const PricingPolicy policy = PricingPolicy::pure_monetary(trace, 1.0, 1.0);

  SUBCASE("exact balance gives 1") {
    BudgetLedger ledger(trace, policy, 1.0, 100);
    CHECK(ledger.avg_cost(0) == doctest::Approx(0.01));
    CHECK(ledger.normalized_budget_feature(0) == doctest::Approx(1.0));
  }
  SUBCASE("exhausted budget gives 0") {
    BudgetLedger ledger(trace, policy, 1.0, 100);
    ledger.charge(1.0);
    CHECK(ledger.normalized_budget_feature(0) == doctest::Approx(0.0));
  }
  SUBCASE("large remainder clips at 10") {
    BudgetLedger ledger(trace, policy, 100.0, 1);
    CHECK(ledger.normalized_budget_feature(0) == doctest::Approx(10.0));
  }
}

TEST_CASE("budget feature is homogeneous below the clip") {
  const TraceSet cheap = flat_price_trace(0.01);
  const TraceSet pricey = flat_price_trace(0.02);
  const PricingPolicy p_cheap = PricingPolicy::pure_monetary(cheap, 1.0, 1.0);
  const PricingPolicy p_pricey = PricingPolicy::pure_monetary(pricey, 1.0, 1.0);
  BudgetLedger a(cheap, p_cheap, 1.0, 100);
  BudgetLedger b(pricey, p_pricey, 2.0, 100);
  CHECK(a.normalized_budget_feature(0) ==
        doctest::Approx(b.normalized_budget_feature(0)));
}

TEST_CASE("running cost estimate blends the prior with observations") {
  const TraceSet trace = flat_price_trace(0.01);
  const PricingPolicy policy = PricingPolicy::pure_monetary(trace, 1.0, 1.0);
  BudgetLedger ledger(trace, policy, 10.0, 100);
  // Ten observations at 0.03 against a prior of weight 10 at 0.01.
  for (int i = 0; i < 10; ++i) ledger.charge_query(0, 0.03, 1.0);
  CHECK(ledger.avg_monetary(0) == doctest::Approx(0.02));
}

TEST_CASE("latency window updates feed the combo-cost estimates") {
  const TraceSet trace = flat_price_trace(1e-4, 6.0);
  const PricingPolicy combo = PricingPolicy::latency_combo(trace, 50000.0);
  BudgetLedger ledger(trace, combo, 1.0, 100);

  const std::array<double, 3> window{4.0, 6.0, 8.0};
  ledger.update_latency_estimate(0, window);
  CHECK(ledger.avg_latency(0) == doctest::Approx(6.0));

  const std::array<double, 1> single{12.0};
  ledger.update_latency_estimate(0, single);
  CHECK(ledger.avg_latency(0) == doctest::Approx(12.0));

  CHECK_THROWS_AS(ledger.update_latency_estimate(0, std::span<const double>{}),
                  DataError);
}

TEST_CASE("hourly latency updates move the budget feature the opposite way") {
  const TraceSet trace = flat_price_trace(1e-4, 6.0);
  const PricingPolicy combo = PricingPolicy::latency_combo(trace, 50000.0);
  BudgetLedger ledger(trace, combo, 0.05, 100);

  const double before = ledger.normalized_budget_feature(0);
  const std::array<double, 2> slower{10.0, 14.0};
  ledger.update_latency_estimate(0, slower);
  const double after_slow = ledger.normalized_budget_feature(0);
  CHECK(after_slow < before);

  const std::array<double, 2> faster{1.0, 3.0};
  ledger.update_latency_estimate(0, faster);
  CHECK(ledger.normalized_budget_feature(0) > after_slow);
}

TEST_CASE("combo pricing zeroes local-arm monetary prices") {
  SynthConfig cfg = SynthConfig::paper_gsm8k();
  cfg.n_questions = 4;
  const TraceSet trace = synth_generate(cfg, 1);
  const PricingPolicy combo = PricingPolicy::latency_combo(trace, 500000.0);
  // Llama-2-7b: 8 s latency, no monetary price: 8 / 5e5.
  CHECK(combo.query_cost(0, 911.0, 119.0, 8.0) == doctest::Approx(1.6e-5));
  // Commercial arms keep their listed prices.
  CHECK(combo.monetary_price(3, 773.70, 108.31) ==
        doctest::Approx(per_query_price(773.70, 108.31, 0.0015, 0.002)));
}

TEST_CASE("pure-monetary pricing chains local arms off the base price") {
  SynthConfig cfg = SynthConfig::paper_gsm8k();
  cfg.n_questions = 4;
  const TraceSet trace = synth_generate(cfg, 1);
  const PricingPolicy policy =
      PricingPolicy::pure_monetary(trace, 0.1, 1.672e-3);
  const double cost_7b = policy.expected_cost(trace, 0);
  const double cost_13b = policy.expected_cost(trace, 1);
  CHECK(cost_13b == doctest::Approx(1.672e-4));
  CHECK(cost_7b / cost_13b == doctest::Approx(0.1));
}

}  // TEST_SUITE
