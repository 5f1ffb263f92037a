// Command line front end: generate / train / eval / theory / report.
// Flags override keys from the JSON config document.

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cascadelab/commands.hpp"
#include "cascadelab/errors.hpp"

namespace {

using cascadelab::RunConfig;

struct CommonFlags {
  std::string config_path;
  std::optional<std::string> trace;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::vector<double> budgets;
  std::optional<double> alpha;
  std::optional<double> beta;
  std::optional<std::string> mode;
  std::optional<std::string> ordering;
  std::vector<std::string> methods;
  std::optional<std::string> split;
  std::optional<std::string> checkpoint;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "JSON config document");
  cmd->add_option("--trace", flags.trace, "trace file path");
  cmd->add_option("--out-dir", flags.out_dir, "output directory");
  cmd->add_option("--seed", flags.seed, "master seed");
  cmd->add_option("--budget", flags.budgets, "budget (repeatable)");
  cmd->add_option("--alpha", flags.alpha, "local-arm price ratio");
  cmd->add_option("--beta", flags.beta, "latency/price trade-off");
  cmd->add_option("--pricing-mode", flags.mode, "monetary | combo");
  cmd->add_option("--ordering", flags.ordering,
                  "given | easy-first | hard-first | shuffled");
  cmd->add_option("--methods", flags.methods, "methods (repeatable)")
      ->delimiter(',');
  cmd->add_option("--split", flags.split, "train | val | test");
  cmd->add_option("--checkpoint", flags.checkpoint, "checkpoint path");
}

RunConfig resolve_config(const CommonFlags& flags) {
  RunConfig config;
  if (!flags.config_path.empty()) {
    config = cascadelab::load_run_config(flags.config_path);
  }
  if (flags.trace) config.trace_path = *flags.trace;
  if (flags.out_dir) config.out_dir = *flags.out_dir;
  if (flags.seed) config.seed = *flags.seed;
  if (!flags.budgets.empty()) config.budgets = flags.budgets;
  if (flags.alpha) config.pricing.alpha = *flags.alpha;
  if (flags.beta) {
    config.pricing.beta = *flags.beta;
    if (!flags.mode) config.pricing.mode = "combo";
  }
  if (flags.mode) config.pricing.mode = *flags.mode;
  if (flags.ordering) config.ordering = *flags.ordering;
  if (!flags.methods.empty()) config.methods = flags.methods;
  if (flags.split) config.split = *flags.split;
  if (flags.checkpoint) config.checkpoint_path = *flags.checkpoint;
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"budget-constrained LLM cascade routing lab"};
  app.require_subcommand(1);

  // generate
  CommonFlags gen_flags;
  std::string gen_out = "trace.jsonl";
  std::optional<std::string> gen_preset;
  std::optional<int> gen_n;
  CLI::App* generate = app.add_subcommand("generate", "write a synthetic trace");
  add_common_flags(generate, gen_flags);
  generate->add_option("--out", gen_out, "output trace path");
  generate->add_option("--preset", gen_preset,
                       "paper_gsm8k | planted_two_arm");
  generate->add_option("--n-questions", gen_n, "question count");

  // train
  CommonFlags train_flags;
  std::optional<long> train_steps;
  std::optional<std::string> finetune_from;
  std::optional<int> finetune_samples;
  std::optional<std::string> finetune_mode;
  std::optional<std::string> resume_from;
  bool no_requery = false;
  CLI::App* train = app.add_subcommand("train", "train the selection policy");
  add_common_flags(train, train_flags);
  train->add_option("--steps", train_steps, "training steps");
  train->add_option("--finetune", finetune_from, "checkpoint to fine-tune");
  train->add_option("--finetune-samples", finetune_samples,
                    "questions used for fine-tuning");
  train->add_option("--finetune-mode", finetune_mode, "full | adapter");
  train->add_option("--resume", resume_from, "checkpoint to resume");
  train->add_flag("--no-requery", no_requery, "disable action a2");

  // eval
  CommonFlags eval_flags;
  std::vector<std::uint64_t> eval_seeds;
  CLI::App* eval = app.add_subcommand("eval", "run methods over budgets");
  add_common_flags(eval, eval_flags);
  eval->add_option("--seeds", eval_seeds, "evaluation seeds")->delimiter(',');

  // theory
  CommonFlags theory_flags;
  CLI::App* theory = app.add_subcommand(
      "theory", "cascade-ordering brute force and alpha tables");
  add_common_flags(theory, theory_flags);

  // report
  CommonFlags report_flags;
  std::string results_path = "out/results.csv";
  CLI::App* report = app.add_subcommand("report", "series / histogram / pareto");
  add_common_flags(report, report_flags);
  report->add_option("--results", results_path, "results.csv path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (generate->parsed()) {
      RunConfig config = resolve_config(gen_flags);
      if (gen_preset) config.synth_preset = *gen_preset;
      if (gen_n) config.synth_n_questions = *gen_n;
      return cascadelab::cmd_generate(config, gen_out);
    }
    if (train->parsed()) {
      RunConfig config = resolve_config(train_flags);
      if (train_steps) config.train.training_steps = *train_steps;
      if (finetune_from) config.finetune_from = *finetune_from;
      if (finetune_samples) config.finetune_samples = *finetune_samples;
      if (finetune_mode) config.finetune_mode = *finetune_mode;
      if (resume_from) config.resume_from = *resume_from;
      if (no_requery) config.train.allow_requery = false;
      return cascadelab::cmd_train(config);
    }
    if (eval->parsed()) {
      RunConfig config = resolve_config(eval_flags);
      if (!eval_seeds.empty()) config.seeds = eval_seeds;
      return cascadelab::cmd_eval(config);
    }
    if (theory->parsed()) {
      return cascadelab::cmd_theory(resolve_config(theory_flags));
    }
    if (report->parsed()) {
      return cascadelab::cmd_report(resolve_config(report_flags), results_path);
    }
  } catch (const cascadelab::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return cascadelab::kExitConfigError;
  } catch (const cascadelab::TrainingError& e) {
    std::fprintf(stderr, "training error: %s\n", e.what());
    return cascadelab::kExitTrainingError;
  } catch (const cascadelab::Error& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return cascadelab::kExitDataError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return cascadelab::kExitDataError;
  }
  return cascadelab::kExitOk;
}
