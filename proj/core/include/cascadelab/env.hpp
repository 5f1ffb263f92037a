#pragma once

#include <array>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "cascadelab/cost.hpp"
#include "cascadelab/embed.hpp"
#include "cascadelab/trace.hpp"

namespace cascadelab {

enum class ActionKind { Return = 0, RequerySame = 1, NextArm = 2 };
inline constexpr int kActionCount = 3;

enum class QuestionOrdering { Given, EasyFirst, HardFirst, Shuffled };

struct ResponseEntry {
  int arm_id = 0;
  int answer_id = 0;
  bool is_correct = false;
  double output_tokens = 0.0;
};

struct Transition {
  std::vector<double> state;
  std::vector<double> next_state;
  ActionKind action = ActionKind::Return;
  double reward = 0.0;
  bool terminal = false;
  std::array<bool, kActionCount> next_legal{false, false, false};
  int question_id = 0;
  bool question_final = false;
  bool final_correct = false;
  bool forced_return = false;
};

struct EnvConfig {
  int requery_cap = 8;  // R_max samples per arm per question
  double lambda = 5.0;
  int embed_dim = 64;
  bool allow_requery = true;          // ablation switch for action a2
  bool terminal_per_question = false; // spec probe mode; default is one
                                      // episode across the whole stream
};

// State feature layout, shared between the environment and the baseline
// correctness estimator:
//   [0..2]  top-3 normalized answer frequencies (descending, zero-padded)
//   [3]     total responses / R_max
//   [4]     last-two-responses-agree indicator
//   [5]     input tokens of the latest query / 1000
//   [6]     output tokens of the latest response / 1000
//   [7..7+d)        question embedding (through the adapter when set)
//   [7+d..7+d+K)    per-arm sample counts / R_max
//   [7+d+K..7+d+2K) per-arm normalized remaining budget B_k
inline constexpr int kScalarFeatures = 7;

int state_dim(int arm_count, int embed_dim);

struct QuestionProgress {
  int question_id = 0;
  int arm_index = 0;
  std::vector<ResponseEntry> responses;
  std::vector<int> samples_per_arm;
  double last_input_tokens = 0.0;
  double last_output_tokens = 0.0;
};

std::vector<double> encode_features(const TraceSet& trace,
                                    const BudgetLedger& ledger,
                                    const QuestionProgress& progress,
                                    std::span<const double> embedding,
                                    const EnvConfig& config);

// Reward for one transition: indicator(final correct) on a1 plus
// lambda * indicator(current response correct) on any action.
double reward_value(ActionKind action, bool current_response_correct,
                    bool final_correct, double lambda);

// Majority answer over the recorded responses. Ties go to the class backed
// by the highest arm index, then to the lowest answer id. Returns nullopt
// when there are no responses (skip).
std::optional<int> majority_answer(std::span<const ResponseEntry> responses);

struct StreamStats {
  int questions = 0;
  int finalized = 0;
  int correct = 0;
  int unanswered = 0;  // finalized with zero responses
  double spend = 0.0;
  std::vector<long> queries_per_arm;
};

// The decision process over one question stream: query the trace, pay the
// ledger, featurize state. One instance per simulation run.
class CascadeEnv {
 public:
  CascadeEnv(const TraceSet& trace, const PricingPolicy& policy,
             double budget, std::vector<int> question_order, EnvConfig config,
             const EmbeddingAdapter* adapter = nullptr);

  bool done() const { return done_; }
  const BudgetLedger& ledger() const { return ledger_; }
  const StreamStats& stats() const { return stats_; }
  const QuestionProgress& progress() const { return progress_; }
  const EnvConfig& config() const { return config_; }

  std::vector<double> encode() const;
  std::array<bool, kActionCount> legal_actions() const;

  // Applies a legal action; illegal actions are a contract violation.
  // A mid-step overdraft (actual query cost above the estimate) degrades to
  // a forced return.
  Transition step(ActionKind action, rng::Stream& rng);

 private:
  void begin_question();
  Transition finalize(std::vector<double> state, ActionKind recorded_action,
                      bool forced);
  const std::vector<double>& embedding_for(int question_id) const;
  double estimated_query_cost(int arm_id) const;

  const TraceSet* trace_;
  const PricingPolicy* policy_;
  EnvConfig config_;
  BudgetLedger ledger_;
  std::vector<int> order_;
  std::size_t cursor_ = 0;
  bool done_ = false;
  QuestionProgress progress_;
  StreamStats stats_;
  const EmbeddingAdapter* adapter_;
  mutable std::unordered_map<int, std::vector<double>> embed_cache_;
};

std::vector<int> order_questions(const TraceSet& trace, std::vector<int> ids,
                                 QuestionOrdering ordering, rng::Stream& rng);

const char* action_name(ActionKind action);

}  // namespace cascadelab
