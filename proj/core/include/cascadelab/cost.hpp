#pragma once

#include <span>
#include <vector>

#include "cascadelab/trace.hpp"

namespace cascadelab {

enum class PricingMode { PureMonetary, PriceLatencyCombo };

// Upper clip for the normalized remaining-budget state feature.
inline constexpr double kBudgetFeatureClip = 10.0;

// Prior weight (in pseudo-observations) on the trace-wide per-arm cost
// average when estimating running means.
inline constexpr double kCostPriorWeight = 10.0;

struct ArmPrice {
  double input_per_1k = 0.0;
  double output_per_1k = 0.0;
};

double per_query_price(double input_tokens, double output_tokens,
                       double input_price_per_1k, double output_price_per_1k);
double per_query_price(double input_tokens, double output_tokens,
                       const ArmSpec& arm);

struct LocalArmPrices {
  double mid = 0.0;  // alpha * base
  double low = 0.0;  // alpha^2 * base
};

// Chains local-model prices off a commercial base price.
LocalArmPrices alpha_scaled_prices(double base_price, double alpha);

// Resolved pricing for one run: mode, trade-off parameters and the per-arm
// price table actually used to charge queries. Local arms get alpha-chained
// prices in monetary mode and zero monetary price in combo mode.
class PricingPolicy {
 public:
  static PricingPolicy pure_monetary(const TraceSet& trace, double alpha,
                                     double alpha_base_price);
  static PricingPolicy latency_combo(const TraceSet& trace, double beta);

  PricingMode mode() const { return mode_; }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  const std::vector<ArmPrice>& arm_prices() const { return arm_prices_; }

  double monetary_price(int arm_id, double input_tokens,
                        double output_tokens) const;
  // Full per-query cost: monetary plus latency_s / beta in combo mode.
  double query_cost(int arm_id, double input_tokens, double output_tokens,
                    double latency_s) const;
  double query_cost(const QueryRecord& record) const;
  double combine(double monetary, double latency_s) const;

  // Trace-wide expected per-query cost of an arm; the ledger prior.
  double expected_cost(const TraceSet& trace, int arm_id) const;

 private:
  PricingMode mode_ = PricingMode::PureMonetary;
  double alpha_ = 1.0;
  double beta_ = 0.0;
  std::vector<ArmPrice> arm_prices_;
};

double combined_cost(double monetary, double latency_s,
                     const PricingPolicy& policy);

// Running spend and per-arm cost estimates for one simulation run.
// Single writer; one ledger per run.
class BudgetLedger {
 public:
  BudgetLedger(const TraceSet& trace, const PricingPolicy& policy,
               double total_budget, int questions);

  double total_budget() const { return total_; }
  double spent() const { return spent_; }
  double remaining() const { return total_ - spent_; }
  int questions_remaining() const { return questions_remaining_; }

  bool affordable(double cost) const { return spent_ + cost <= total_ + kEps; }

  // Adds cost to the spend; throws BudgetExceededError (ledger unchanged)
  // on overdraft.
  void charge(double cost);

  // Charge plus per-arm running-mean update, the normal path for a query.
  void charge_query(int arm_id, double monetary, double latency_s);

  // Estimated per-query cost of an arm under the active policy.
  double avg_cost(int arm_id) const;
  double avg_monetary(int arm_id) const;
  double avg_latency(int arm_id) const;

  // B_k = clip(remaining / (questions_remaining * avg_cost), 0, clip).
  double normalized_budget_feature(int arm_id) const;

  void update_latency_estimate(int arm_id, std::span<const double> window);

  void question_done();

 private:
  static constexpr double kEps = 1e-12;

  struct ArmEstimate {
    double monetary_mean = 0.0;
    double weight = 0.0;  // prior pseudo-observations + real observations
    double latency = 0.0;
  };

  PricingPolicy policy_;
  double total_ = 0.0;
  double spent_ = 0.0;
  int questions_remaining_ = 0;
  std::vector<ArmEstimate> arms_;
};

}  // namespace cascadelab
