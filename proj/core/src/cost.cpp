#include "cascadelab/cost.hpp"

#include <algorithm>
#include <cmath>

#include "cascadelab/errors.hpp"

namespace cascadelab {

double per_query_price(double input_tokens, double output_tokens,
                       double input_price_per_1k, double output_price_per_1k) {
  return input_tokens * input_price_per_1k / 1000.0 +
         output_tokens * output_price_per_1k / 1000.0;
}

double per_query_price(double input_tokens, double output_tokens,
                       const ArmSpec& arm) {
  return per_query_price(input_tokens, output_tokens, arm.input_price_per_1k,
                         arm.output_price_per_1k);
}

LocalArmPrices alpha_scaled_prices(double base_price, double alpha) {
  if (alpha <= 0.0) {
    throw ConfigError("alpha must be positive");
  }
  LocalArmPrices p;
  p.mid = alpha * base_price;
  p.low = alpha * p.mid;
  return p;
}

namespace {

// Scale an arm's per-1k prices so its expected per-query price hits a target.
ArmPrice prices_for_target(const TraceSet& trace, int arm_id, double target) {
  const double mean_in = trace.mean_input_tokens(arm_id);
  const double mean_out = trace.mean_output_tokens(arm_id);
  // Keep the input/output split of the cheapest commercial tier.
  const double base_in = 0.0015;
  const double base_out = 0.002;
  const double at_base = per_query_price(mean_in, mean_out, base_in, base_out);
  const double scale = at_base > 0.0 ? target / at_base : 0.0;
  return ArmPrice{base_in * scale, base_out * scale};
}

}  // namespace

PricingPolicy PricingPolicy::pure_monetary(const TraceSet& trace, double alpha,
                                           double alpha_base_price) {
  if (alpha <= 0.0) {
    throw ConfigError("alpha must be positive");
  }
  PricingPolicy policy;
  policy.mode_ = PricingMode::PureMonetary;
  policy.alpha_ = alpha;
  policy.arm_prices_.reserve(trace.arms().size());

  // Local arms chain down from the base price: the most capable local arm
  // costs alpha * base, the next one alpha times that, and so on.
  int local_rank = 0;
  for (auto it = trace.arms().rbegin(); it != trace.arms().rend(); ++it) {
    if (it->is_local) ++local_rank;
  }
  int seen_local = 0;
  for (const ArmSpec& arm : trace.arms()) {
    if (!arm.is_local) {
      policy.arm_prices_.push_back(
          ArmPrice{arm.input_price_per_1k, arm.output_price_per_1k});
      continue;
    }
    const int depth = local_rank - seen_local;  // 1 = most capable local arm
    ++seen_local;
    const double target = std::pow(alpha, depth) * alpha_base_price;
    policy.arm_prices_.push_back(prices_for_target(trace, arm.arm_id, target));
  }
  return policy;
}

PricingPolicy PricingPolicy::latency_combo(const TraceSet& trace, double beta) {
  if (beta <= 0.0) {
    throw ConfigError("beta must be positive");
  }
  PricingPolicy policy;
  policy.mode_ = PricingMode::PriceLatencyCombo;
  policy.beta_ = beta;
  policy.arm_prices_.reserve(trace.arms().size());
  for (const ArmSpec& arm : trace.arms()) {
    // Locally hosted models have no monetary price under the combo cost.
    policy.arm_prices_.push_back(
        arm.is_local ? ArmPrice{}
                     : ArmPrice{arm.input_price_per_1k, arm.output_price_per_1k});
  }
  return policy;
}

double PricingPolicy::monetary_price(int arm_id, double input_tokens,
                                     double output_tokens) const {
  const ArmPrice& p = arm_prices_.at(static_cast<std::size_t>(arm_id));
  return per_query_price(input_tokens, output_tokens, p.input_per_1k,
                         p.output_per_1k);
}

double PricingPolicy::combine(double monetary, double latency_s) const {
  if (mode_ == PricingMode::PureMonetary) {
    return monetary;
  }
  return monetary + latency_s / beta_;
}

double PricingPolicy::query_cost(int arm_id, double input_tokens,
                                 double output_tokens, double latency_s) const {
  return combine(monetary_price(arm_id, input_tokens, output_tokens),
                 latency_s);
}

double PricingPolicy::query_cost(const QueryRecord& record) const {
  return query_cost(record.arm_id, record.input_tokens, record.output_tokens,
                    record.latency_s);
}

double PricingPolicy::expected_cost(const TraceSet& trace, int arm_id) const {
  const ArmSpec& arm = trace.arms().at(static_cast<std::size_t>(arm_id));
  return query_cost(arm_id, trace.mean_input_tokens(arm_id),
                    trace.mean_output_tokens(arm_id), arm.fixed_latency_s);
}

double combined_cost(double monetary, double latency_s,
                     const PricingPolicy& policy) {
  if (policy.mode() == PricingMode::PriceLatencyCombo && policy.beta() <= 0.0) {
    throw ConfigError("beta must be positive");
  }
  return policy.combine(monetary, latency_s);
}

BudgetLedger::BudgetLedger(const TraceSet& trace, const PricingPolicy& policy,
                           double total_budget, int questions)
    : policy_(policy), total_(total_budget), questions_remaining_(questions) {
  if (total_budget < 0.0) {
    throw ConfigError("budget must be non-negative");
  }
  arms_.reserve(trace.arms().size());
  for (const ArmSpec& arm : trace.arms()) {
    ArmEstimate est;
    est.monetary_mean = policy.monetary_price(arm.arm_id,
                                              trace.mean_input_tokens(arm.arm_id),
                                              trace.mean_output_tokens(arm.arm_id));
    est.weight = kCostPriorWeight;
    est.latency = arm.fixed_latency_s;
    arms_.push_back(est);
  }
}

void BudgetLedger::charge(double cost) {
  if (cost < 0.0) {
    throw ConfigError("cannot charge a negative cost");
  }
  if (spent_ + cost > total_ + kEps) {
    throw BudgetExceededError("charge of " + std::to_string(cost) +
                              " exceeds remaining budget " +
                              std::to_string(remaining()));
  }
  spent_ = std::min(spent_ + cost, total_);
}

void BudgetLedger::charge_query(int arm_id, double monetary, double latency_s) {
  charge(policy_.combine(monetary, latency_s));
  ArmEstimate& est = arms_.at(static_cast<std::size_t>(arm_id));
  est.monetary_mean =
      (est.monetary_mean * est.weight + monetary) / (est.weight + 1.0);
  est.weight += 1.0;
}

double BudgetLedger::avg_monetary(int arm_id) const {
  return arms_.at(static_cast<std::size_t>(arm_id)).monetary_mean;
}

double BudgetLedger::avg_latency(int arm_id) const {
  return arms_.at(static_cast<std::size_t>(arm_id)).latency;
}

double BudgetLedger::avg_cost(int arm_id) const {
  const ArmEstimate& est = arms_.at(static_cast<std::size_t>(arm_id));
  return policy_.combine(est.monetary_mean, est.latency);
}

double BudgetLedger::normalized_budget_feature(int arm_id) const {
  if (questions_remaining_ < 1) {
    return 0.0;
  }
  const double avg = avg_cost(arm_id);
  if (avg <= 0.0) {
    throw DataError("arm " + std::to_string(arm_id) +
                    " has no positive cost estimate");
  }
  const double raw = remaining() / (questions_remaining_ * avg);
  return std::clamp(raw, 0.0, kBudgetFeatureClip);
}

void BudgetLedger::update_latency_estimate(int arm_id,
                                           std::span<const double> window) {
  if (window.empty()) {
    throw DataError("latency window is empty");
  }
  double total = 0.0;
  for (double v : window) total += v;
  arms_.at(static_cast<std::size_t>(arm_id)).latency =
      total / static_cast<double>(window.size());
}

void BudgetLedger::question_done() {
  if (questions_remaining_ > 0) --questions_remaining_;
}

}  // namespace cascadelab
