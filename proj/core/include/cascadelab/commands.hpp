#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cascadelab/cost.hpp"
#include "cascadelab/dqn.hpp"
#include "cascadelab/report.hpp"
#include "cascadelab/trace.hpp"

namespace cascadelab {

// Exit codes shared by the CLI and the command layer.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitDataError = 3;
inline constexpr int kExitTrainingError = 4;

struct PricingSpec {
  std::string mode = "monetary";  // monetary | combo
  double alpha = 0.1;
  double beta = 50000.0;
  double alpha_base_price = 1.672e-3;

  PricingPolicy build(const TraceSet& trace) const;
};

// Single JSON config document; CLI flags override individual keys.
struct RunConfig {
  std::string trace_path;
  std::string out_dir = "out";
  std::string checkpoint_path;

  // generate
  std::string synth_preset = "paper_gsm8k";  // paper_gsm8k | planted_two_arm
  std::optional<SynthConfig> synth_custom;
  std::optional<int> synth_n_questions;

  std::uint64_t seed = 1;
  std::vector<std::uint64_t> seeds;

  PricingSpec pricing;
  std::vector<PricingSpec> train_pricing;  // defaults to {pricing}

  std::vector<double> budgets;
  std::vector<std::string> methods;
  std::string ordering = "given";  // given | easy-first | hard-first | shuffled
  std::string split = "test";

  TrainConfig train;

  // fine-tuning / resume
  std::string finetune_from;
  int finetune_samples = -1;  // -1 = full train split
  std::string finetune_mode = "full";  // full | adapter
  std::string resume_from;

  int eval_threads = 0;  // 0 = hardware concurrency
};

RunConfig load_run_config(const std::filesystem::path& path);
RunConfig parse_run_config(const std::string& json_text);

QuestionOrdering ordering_from_name(const std::string& name);
Split split_from_tag(const std::string& name);

int cmd_generate(const RunConfig& config, const std::filesystem::path& out_path);
int cmd_train(const RunConfig& config);
int cmd_eval(const RunConfig& config);
int cmd_theory(const RunConfig& config);
int cmd_report(const RunConfig& config, const std::filesystem::path& results_path);

// Maps the library exception taxonomy onto exit codes and prints the error.
int run_guarded(const char* command, int (*body)(const RunConfig&),
                const RunConfig& config);

}  // namespace cascadelab
