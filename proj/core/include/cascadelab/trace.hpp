#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "cascadelab/rng.hpp"

namespace cascadelab {

// One (model, prompt, temperature-policy) combination in the sorted list.
struct ArmSpec {
  int arm_id = 0;
  std::string model_name;
  std::string prompt_name;  // plain | domain_expert | standard_fewshot | cot_fewshot
  double input_price_per_1k = 0.0;
  double output_price_per_1k = 0.0;
  double fixed_latency_s = 0.0;
  double requery_temperature = 0.0;
  double marginal_accuracy = 0.0;  // calibration target
  bool is_local = false;           // runs on own hardware, priced via the alpha chain
};

enum class Split { Train, Val, Test };

enum class Tier { Easy, Hard };

struct Question {
  int question_id = 0;
  std::string text;
  int ground_truth = 0;  // canonical answer class (0 by construction)
  Split split = Split::Train;
  Tier tier = Tier::Easy;
};

// One sampled response for (question, arm, sample_index).
// sample_index 0 is the temperature-0 query; >= 1 are re-queries.
struct QueryRecord {
  int question_id = 0;
  int arm_id = 0;
  int sample_index = 0;
  int answer_id = 0;
  bool is_correct = false;
  double input_tokens = 0.0;
  double output_tokens = 0.0;
  double latency_s = 0.0;
};

// Per-arm generator parameters, kept in the trace header so re-queries can
// be drawn after a load without materializing every record.
struct ArmSynthParams {
  double p_easy = 0.0;
  double p_hard = 0.0;
  double mean_input_tokens = 0.0;
  double mean_output_tokens = 0.0;
};

struct SynthModel {
  std::uint64_t seed = 0;
  double easy_fraction = 0.5;
  int distractor_count = 20;
  double zipf_exponent = 1.1;
  double token_sigma = 0.3;
  double hard_output_scale = 1.5;
  double marker_fidelity = 0.9;
  std::vector<ArmSynthParams> arms;
};

struct SynthArmConfig {
  std::string model_name;
  std::string prompt_name = "cot_fewshot";
  double marginal_accuracy = 0.0;
  double mean_input_tokens = 0.0;
  double mean_output_tokens = 0.0;
  double input_price_per_1k = 0.0;
  double output_price_per_1k = 0.0;
  double fixed_latency_s = 0.0;
  double requery_temperature = 1.0;
  bool is_local = false;
  // Explicit tier probabilities; when unset they come from the delta rule.
  std::optional<double> p_easy;
  std::optional<double> p_hard;
};

struct SynthConfig {
  int n_questions = 2000;
  double easy_fraction = 0.5;    // rho
  double accuracy_delta = 0.25;  // p_easy = min(1, marginal + delta)
  int distractor_count = 20;     // W
  double zipf_exponent = 1.1;
  double token_sigma = 0.3;
  double hard_output_scale = 1.5;
  double marker_fidelity = 0.9;  // tier-marker words drawn from own tier vocab
  double train_fraction = 0.7;
  double val_fraction = 0.15;
  std::vector<SynthArmConfig> arms;

  // Six GSM8K-style arms calibrated to the published accuracy/cost tables.
  static SynthConfig paper_gsm8k();
  // Two-arm planted-structure setup: cheap 0.90 easy / 0.10 hard vs. an
  // arm at 20x cost with 0.95 on both tiers.
  static SynthConfig planted_two_arm(int n_questions = 2000);
};

class TraceSet {
 public:
  TraceSet() = default;
  TraceSet(std::vector<ArmSpec> arms, std::vector<Question> questions,
           std::vector<QueryRecord> records, std::optional<SynthModel> synth);

  const std::vector<ArmSpec>& arms() const { return arms_; }
  const std::vector<Question>& questions() const { return questions_; }
  const std::vector<QueryRecord>& records() const { return records_; }
  const std::optional<SynthModel>& synth() const { return synth_; }

  int arm_count() const { return static_cast<int>(arms_.size()); }
  int question_count() const { return static_cast<int>(questions_.size()); }

  const Question& question(int question_id) const;
  bool has_question(int question_id) const;
  const QueryRecord* find_record(int question_id, int arm_id, int sample_index) const;
  void add_record(const QueryRecord& record);

  std::vector<int> question_ids(Split split) const;
  std::vector<int> all_question_ids() const;

  // Expected token counts for an arm: synth means when present, otherwise
  // averages over stored records.
  double mean_input_tokens(int arm_id) const;
  double mean_output_tokens(int arm_id) const;

  // Tier-conditional correctness probability; falls back to the marginal
  // when the trace has no generator model.
  double tier_accuracy(int arm_id, Tier tier) const;

  // Checks arm ordering, price/probability ranges and record invariants;
  // throws DataError naming the offender.
  void validate() const;

 private:
  std::vector<ArmSpec> arms_;
  std::vector<Question> questions_;
  std::vector<QueryRecord> records_;
  std::optional<SynthModel> synth_;
  std::unordered_map<std::int64_t, std::size_t> record_index_;
  std::unordered_map<int, std::size_t> question_index_;

  void rebuild_indexes();
};

TraceSet load_trace(const std::filesystem::path& path);
void save_trace(const TraceSet& trace, const std::filesystem::path& path);

TraceSet synth_generate(const SynthConfig& config, std::uint64_t seed);

// sample_index 0 returns the stored or hash-deterministic temperature-0
// record; later indices return the stored record when present, else a fresh
// draw from rng. Throws TraceExhaustedError when neither is possible.
QueryRecord sample_response(const TraceSet& trace, int question_id, int arm_id,
                            int sample_index, rng::Stream& rng);

const char* split_name(Split split);
const char* tier_name(Tier tier);

}  // namespace cascadelab
