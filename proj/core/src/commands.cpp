#include "cascadelab/commands.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

#include "cascadelab/baselines.hpp"
#include "cascadelab/errors.hpp"
#include "cascadelab/theory.hpp"
#include "json.hpp"

namespace cascadelab {

namespace {

using nlohmann::json;

const std::set<std::string> kKnownMethods = {
    "rl",        "single",          "majority",
    "frugal",    "calibrated",      "knapsack_offline",
    "knapsack_online"};

void require_known_keys(const json& obj,
                        std::initializer_list<const char*> known,
                        const std::string& where) {
  for (const auto& item : obj.items()) {
    const std::string& key = item.key();
    if (!std::any_of(known.begin(), known.end(),
                     [&](const char* k) { return key == k; })) {
      throw ConfigError(where + ": unknown key '" + key + "'");
    }
  }
}

PricingSpec pricing_from_json(const json& j) {
  require_known_keys(j, {"mode", "alpha", "beta", "alpha_base_price"},
                     "pricing");
  PricingSpec spec;
  if (j.contains("mode")) spec.mode = j.at("mode").get<std::string>();
  if (j.contains("alpha")) spec.alpha = j.at("alpha").get<double>();
  if (j.contains("beta")) spec.beta = j.at("beta").get<double>();
  if (j.contains("alpha_base_price")) {
    spec.alpha_base_price = j.at("alpha_base_price").get<double>();
  }
  if (spec.mode != "monetary" && spec.mode != "combo") {
    throw ConfigError("pricing mode must be 'monetary' or 'combo'");
  }
  return spec;
}

SynthConfig synth_from_json(const json& j) {
  require_known_keys(j,
                     {"preset", "n_questions", "easy_fraction",
                      "accuracy_delta", "distractor_count", "zipf_exponent",
                      "token_sigma", "hard_output_scale", "marker_fidelity",
                      "train_fraction", "val_fraction", "arms"},
                     "synth");
  SynthConfig cfg;
  if (j.contains("preset")) {
    const std::string preset = j.at("preset").get<std::string>();
    if (preset == "paper_gsm8k") {
      cfg = SynthConfig::paper_gsm8k();
    } else if (preset == "planted_two_arm") {
      cfg = SynthConfig::planted_two_arm();
    } else {
      throw ConfigError("unknown synth preset '" + preset + "'");
    }
  }
  if (j.contains("n_questions")) cfg.n_questions = j.at("n_questions").get<int>();
  if (j.contains("easy_fraction")) cfg.easy_fraction = j.at("easy_fraction").get<double>();
  if (j.contains("accuracy_delta")) cfg.accuracy_delta = j.at("accuracy_delta").get<double>();
  if (j.contains("distractor_count")) cfg.distractor_count = j.at("distractor_count").get<int>();
  if (j.contains("zipf_exponent")) cfg.zipf_exponent = j.at("zipf_exponent").get<double>();
  if (j.contains("token_sigma")) cfg.token_sigma = j.at("token_sigma").get<double>();
  if (j.contains("hard_output_scale")) cfg.hard_output_scale = j.at("hard_output_scale").get<double>();
  if (j.contains("marker_fidelity")) cfg.marker_fidelity = j.at("marker_fidelity").get<double>();
  if (j.contains("train_fraction")) cfg.train_fraction = j.at("train_fraction").get<double>();
  if (j.contains("val_fraction")) cfg.val_fraction = j.at("val_fraction").get<double>();
  if (j.contains("arms")) {
    cfg.arms.clear();
    for (const json& a : j.at("arms")) {
      require_known_keys(a,
                         {"model_name", "prompt_name", "marginal_accuracy",
                          "mean_input_tokens", "mean_output_tokens",
                          "input_price_per_1k", "output_price_per_1k",
                          "fixed_latency_s", "requery_temperature", "is_local",
                          "p_easy", "p_hard"},
                         "synth arm");
      SynthArmConfig arm;
      arm.model_name = a.at("model_name").get<std::string>();
      if (a.contains("prompt_name")) arm.prompt_name = a.at("prompt_name").get<std::string>();
      if (a.contains("marginal_accuracy")) arm.marginal_accuracy = a.at("marginal_accuracy").get<double>();
      arm.mean_input_tokens = a.at("mean_input_tokens").get<double>();
      arm.mean_output_tokens = a.at("mean_output_tokens").get<double>();
      if (a.contains("input_price_per_1k")) arm.input_price_per_1k = a.at("input_price_per_1k").get<double>();
      if (a.contains("output_price_per_1k")) arm.output_price_per_1k = a.at("output_price_per_1k").get<double>();
      if (a.contains("fixed_latency_s")) arm.fixed_latency_s = a.at("fixed_latency_s").get<double>();
      if (a.contains("requery_temperature")) arm.requery_temperature = a.at("requery_temperature").get<double>();
      if (a.contains("is_local")) arm.is_local = a.at("is_local").get<bool>();
      if (a.contains("p_easy")) arm.p_easy = a.at("p_easy").get<double>();
      if (a.contains("p_hard")) arm.p_hard = a.at("p_hard").get<double>();
      cfg.arms.push_back(std::move(arm));
    }
  }
  return cfg;
}

TrainConfig train_from_json(const json& j, TrainConfig cfg) {
  require_known_keys(j,
                     {"learning_rate", "batch_size", "eps_start", "eps_end",
                      "eps_decay_tau", "gamma", "target_sync_period", "steps",
                      "lambda", "hidden", "hidden_layers", "replay_capacity",
                      "warmup", "eval_period", "embed_dim", "requery_cap",
                      "use_target_net", "allow_requery",
                      "terminal_per_question", "budgets_per_question",
                      "chunk_questions", "reference_budget"},
                     "train");
  if (j.contains("learning_rate")) cfg.learning_rate = j.at("learning_rate").get<double>();
  if (j.contains("batch_size")) cfg.batch_size = j.at("batch_size").get<int>();
  if (j.contains("eps_start")) cfg.eps_start = j.at("eps_start").get<double>();
  if (j.contains("eps_end")) cfg.eps_end = j.at("eps_end").get<double>();
  if (j.contains("eps_decay_tau")) cfg.eps_decay_tau = j.at("eps_decay_tau").get<double>();
  if (j.contains("gamma")) cfg.gamma = j.at("gamma").get<double>();
  if (j.contains("target_sync_period")) cfg.target_sync_period = j.at("target_sync_period").get<int>();
  if (j.contains("steps")) cfg.training_steps = j.at("steps").get<long>();
  if (j.contains("lambda")) cfg.lambda = j.at("lambda").get<double>();
  if (j.contains("hidden")) cfg.hidden = j.at("hidden").get<int>();
  if (j.contains("hidden_layers")) cfg.hidden_layers = j.at("hidden_layers").get<int>();
  if (j.contains("replay_capacity")) cfg.replay_capacity = j.at("replay_capacity").get<int>();
  if (j.contains("warmup")) cfg.warmup = j.at("warmup").get<int>();
  if (j.contains("eval_period")) cfg.eval_period = j.at("eval_period").get<long>();
  if (j.contains("embed_dim")) cfg.embed_dim = j.at("embed_dim").get<int>();
  if (j.contains("requery_cap")) cfg.requery_cap = j.at("requery_cap").get<int>();
  if (j.contains("use_target_net")) cfg.use_target_net = j.at("use_target_net").get<bool>();
  if (j.contains("allow_requery")) cfg.allow_requery = j.at("allow_requery").get<bool>();
  if (j.contains("terminal_per_question")) cfg.terminal_per_question = j.at("terminal_per_question").get<bool>();
  if (j.contains("budgets_per_question")) {
    cfg.train_budgets_per_question =
        j.at("budgets_per_question").get<std::vector<double>>();
  }
  if (j.contains("chunk_questions")) cfg.chunk_questions = j.at("chunk_questions").get<int>();
  if (j.contains("reference_budget")) cfg.reference_budget = j.at("reference_budget").get<double>();
  return cfg;
}

}  // namespace

PricingPolicy PricingSpec::build(const TraceSet& trace) const {
  if (mode == "monetary") {
    return PricingPolicy::pure_monetary(trace, alpha, alpha_base_price);
  }
  if (mode == "combo") {
    return PricingPolicy::latency_combo(trace, beta);
  }
  throw ConfigError("unknown pricing mode '" + mode + "'");
}

QuestionOrdering ordering_from_name(const std::string& name) {
  if (name == "given") return QuestionOrdering::Given;
  if (name == "easy-first") return QuestionOrdering::EasyFirst;
  if (name == "hard-first") return QuestionOrdering::HardFirst;
  if (name == "shuffled") return QuestionOrdering::Shuffled;
  throw ConfigError("unknown ordering '" + name + "'");
}

Split split_from_tag(const std::string& name) {
  if (name == "train") return Split::Train;
  if (name == "val") return Split::Val;
  if (name == "test") return Split::Test;
  throw ConfigError("unknown split '" + name + "'");
}

RunConfig parse_run_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError("config parse error: " + std::string(e.what()));
  }
  require_known_keys(doc,
                     {"trace", "out_dir", "checkpoint", "synth", "seed",
                      "seeds", "pricing", "train_pricing", "budgets",
                      "methods", "ordering", "split", "train",
                      "finetune_from", "finetune_samples", "finetune_mode",
                      "resume_from", "eval_threads"},
                     "config");
  RunConfig cfg;
  if (doc.contains("trace")) cfg.trace_path = doc.at("trace").get<std::string>();
  if (doc.contains("out_dir")) cfg.out_dir = doc.at("out_dir").get<std::string>();
  if (doc.contains("checkpoint")) cfg.checkpoint_path = doc.at("checkpoint").get<std::string>();
  if (doc.contains("synth")) {
    const json& s = doc.at("synth");
    if (s.contains("preset") && s.size() == 1) {
      cfg.synth_preset = s.at("preset").get<std::string>();
    } else {
      cfg.synth_custom = synth_from_json(s);
      if (s.contains("preset")) cfg.synth_preset = s.at("preset").get<std::string>();
    }
  }
  if (doc.contains("seed")) cfg.seed = doc.at("seed").get<std::uint64_t>();
  if (doc.contains("seeds")) cfg.seeds = doc.at("seeds").get<std::vector<std::uint64_t>>();
  if (doc.contains("pricing")) cfg.pricing = pricing_from_json(doc.at("pricing"));
  if (doc.contains("train_pricing")) {
    for (const json& p : doc.at("train_pricing")) {
      cfg.train_pricing.push_back(pricing_from_json(p));
    }
  }
  if (doc.contains("budgets")) cfg.budgets = doc.at("budgets").get<std::vector<double>>();
  if (doc.contains("methods")) cfg.methods = doc.at("methods").get<std::vector<std::string>>();
  if (doc.contains("ordering")) cfg.ordering = doc.at("ordering").get<std::string>();
  if (doc.contains("split")) cfg.split = doc.at("split").get<std::string>();
  if (doc.contains("train")) cfg.train = train_from_json(doc.at("train"), cfg.train);
  if (doc.contains("finetune_from")) cfg.finetune_from = doc.at("finetune_from").get<std::string>();
  if (doc.contains("finetune_samples")) cfg.finetune_samples = doc.at("finetune_samples").get<int>();
  if (doc.contains("finetune_mode")) cfg.finetune_mode = doc.at("finetune_mode").get<std::string>();
  if (doc.contains("resume_from")) cfg.resume_from = doc.at("resume_from").get<std::string>();
  if (doc.contains("eval_threads")) cfg.eval_threads = doc.at("eval_threads").get<int>();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file '" + path.string() + "'");
  }
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return parse_run_config(text);
}

namespace {

SynthConfig resolve_synth(const RunConfig& config) {
  SynthConfig cfg;
  if (config.synth_custom) {
    cfg = *config.synth_custom;
  } else if (config.synth_preset == "paper_gsm8k") {
    cfg = SynthConfig::paper_gsm8k();
  } else if (config.synth_preset == "planted_two_arm") {
    cfg = SynthConfig::planted_two_arm();
  } else {
    throw ConfigError("unknown synth preset '" + config.synth_preset + "'");
  }
  if (config.synth_n_questions) cfg.n_questions = *config.synth_n_questions;
  return cfg;
}

TraceSet load_required_trace(const RunConfig& config) {
  if (config.trace_path.empty()) {
    throw ConfigError("no trace path configured");
  }
  return load_trace(config.trace_path);
}

std::vector<PricingPolicy> build_train_pricing(const RunConfig& config,
                                               const TraceSet& trace) {
  std::vector<PricingPolicy> options;
  if (config.train_pricing.empty()) {
    options.push_back(config.pricing.build(trace));
  } else {
    for (const PricingSpec& spec : config.train_pricing) {
      options.push_back(spec.build(trace));
    }
  }
  return options;
}

void write_curve_csv(const std::vector<CurvePoint>& curve,
                     const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw DataError("cannot open '" + path.string() + "' for writing");
  }
  out << "step,epsilon,loss,eval_accuracy\n";
  for (const CurvePoint& p : curve) {
    out << p.step << ',' << format_double(p.eps) << ','
        << format_double(p.loss) << ',' << format_double(p.eval_accuracy)
        << '\n';
  }
}

}  // namespace

int cmd_generate(const RunConfig& config,
                 const std::filesystem::path& out_path) {
  const SynthConfig synth = resolve_synth(config);
  const TraceSet trace = synth_generate(synth, config.seed);
  std::filesystem::create_directories(out_path.parent_path().empty()
                                          ? "."
                                          : out_path.parent_path());
  save_trace(trace, out_path);
  std::fprintf(stderr, "generated %d questions, %d arms -> %s\n",
               trace.question_count(), trace.arm_count(),
               out_path.string().c_str());
  return kExitOk;
}

int cmd_train(const RunConfig& config) {
  const TraceSet trace = load_required_trace(config);
  const std::vector<PricingPolicy> pricing = build_train_pricing(config, trace);

  TrainConfig train = config.train;
  train.seed = config.seed;
  train.ordering = ordering_from_name(config.ordering);
  if (train.train_budgets_per_question.empty()) {
    if (config.budgets.empty()) {
      throw ConfigError("no training budgets configured");
    }
    // Fall back to the eval budgets, interpreted per train question.
    const double n =
        static_cast<double>(trace.question_ids(Split::Train).size());
    for (double b : config.budgets) {
      train.train_budgets_per_question.push_back(b / std::max(1.0, n));
    }
  }

  std::filesystem::create_directories(config.out_dir);
  const std::filesystem::path checkpoint_path =
      config.checkpoint_path.empty()
          ? std::filesystem::path(config.out_dir) / "checkpoint.json"
          : std::filesystem::path(config.checkpoint_path);

  TrainedPolicy policy;
  const auto started = std::chrono::steady_clock::now();
  if (!config.finetune_from.empty()) {
    const TrainedPolicy base = load_checkpoint(config.finetune_from);
    const FinetuneMode mode = config.finetune_mode == "adapter"
                                  ? FinetuneMode::AdapterOnly
                                  : FinetuneMode::Full;
    policy = finetune_policy(base, trace, pricing, config.finetune_samples,
                             train, mode);
  } else if (!config.resume_from.empty()) {
    const TrainedPolicy base = load_checkpoint(config.resume_from);
    policy = train_policy(trace, pricing, train, &base.net,
                          base.trained_steps);
  } else {
    policy = train_policy(trace, pricing, train);
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
          .count();

  save_checkpoint(policy, checkpoint_path);
  write_curve_csv(policy.curve,
                  std::filesystem::path(config.out_dir) / "training_curve.csv");
  std::fprintf(stderr, "trained %ld steps in %.1f s -> %s\n",
               policy.trained_steps, elapsed, checkpoint_path.string().c_str());
  return kExitOk;
}

namespace {

struct EvalCell {
  std::string method;
  double budget = 0.0;
  std::uint64_t seed = 0;
};

ResultRow run_cell(const TraceSet& trace, const RunConfig& config,
                   const PricingPolicy& pricing, const EvalCell& cell,
                   const TrainedPolicy* policy,
                   const CorrectnessEstimator* estimator) {
  const Split split = split_from_tag(config.split);
  rng::Stream order_rng = rng::Stream(cell.seed).fork(1);
  rng::Stream run_rng = rng::Stream(cell.seed).fork(2);
  std::vector<int> ids =
      order_questions(trace, trace.question_ids(split),
                      ordering_from_name(config.ordering), order_rng);

  const auto started = std::chrono::steady_clock::now();
  StreamStats stats;
  if (cell.method == "rl") {
    if (policy == nullptr) {
      throw ConfigError("method 'rl' needs a checkpoint");
    }
    EnvConfig env_config = policy->config.env_config();
    stats = evaluate_policy(trace, policy->net,
                            policy->adapter.is_identity() ? nullptr
                                                          : &policy->adapter,
                            pricing, cell.budget, std::move(ids), env_config,
                            cell.seed);
  } else if (cell.method == "single") {
    stats = single_model_run(trace, std::move(ids), cell.budget, pricing);
  } else if (cell.method == "majority") {
    stats = majority_vote_run(trace, std::move(ids), cell.budget, 2, pricing,
                              run_rng);
  } else if (cell.method == "frugal") {
    const std::array<double, 1> shared{estimator->threshold};
    stats = threshold_cascade_run(trace, std::move(ids), cell.budget,
                                  *estimator, shared, pricing);
  } else if (cell.method == "calibrated") {
    stats = calibrated_cascade_run(trace, std::move(ids), cell.budget,
                                   *estimator, estimator->p_high,
                                   estimator->p_low, pricing, run_rng);
  } else if (cell.method == "knapsack_offline") {
    stats = knapsack_offline_run(trace, std::move(ids), cell.budget, pricing);
  } else if (cell.method == "knapsack_online") {
    stats = knapsack_online_run(trace, std::move(ids), cell.budget, pricing);
  } else {
    throw ConfigError("unknown method '" + cell.method + "'");
  }

  ResultRow row;
  row.method = cell.method;
  row.budget = cell.budget;
  row.alpha = config.pricing.mode == "monetary" ? config.pricing.alpha : 0.0;
  row.beta = config.pricing.mode == "combo" ? config.pricing.beta : 0.0;
  row.seed = cell.seed;
  row.accuracy = accuracy_of(stats);
  row.spend = stats.spend;
  row.unanswered = stats.unanswered;
  row.questions = stats.questions;
  row.per_arm_queries.reserve(stats.queries_per_arm.size());
  for (long q : stats.queries_per_arm) {
    row.per_arm_queries.push_back(
        stats.questions > 0 ? static_cast<double>(q) / stats.questions : 0.0);
  }
  row.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - started)
                    .count();
  if (row.spend > row.budget + 1e-9) {
    throw DataError("method '" + cell.method + "' overspent its budget");
  }
  return row;
}

}  // namespace

int cmd_eval(const RunConfig& config) {
  const TraceSet trace = load_required_trace(config);
  const PricingPolicy pricing = config.pricing.build(trace);
  if (config.budgets.empty()) {
    throw ConfigError("no budgets configured");
  }
  std::vector<std::string> methods = config.methods;
  if (methods.empty()) {
    throw ConfigError("no methods configured");
  }
  for (const std::string& m : methods) {
    if (!kKnownMethods.contains(m)) {
      throw ConfigError("unknown method '" + m + "'");
    }
  }
  std::vector<std::uint64_t> seeds = config.seeds;
  if (seeds.empty()) seeds = {config.seed};

  std::optional<TrainedPolicy> policy;
  if (std::find(methods.begin(), methods.end(), "rl") != methods.end()) {
    if (config.checkpoint_path.empty()) {
      throw ConfigError("method 'rl' needs a checkpoint path");
    }
    policy = load_checkpoint(config.checkpoint_path);
  }

  std::optional<CorrectnessEstimator> estimator;
  const bool needs_estimator =
      std::find(methods.begin(), methods.end(), "frugal") != methods.end() ||
      std::find(methods.begin(), methods.end(), "calibrated") != methods.end();
  if (needs_estimator) {
    EstimatorConfig est_config;
    est_config.seed = config.seed;
    est_config.embed_dim = config.train.embed_dim;
    est_config.requery_cap = config.train.requery_cap;
    const std::size_t eval_n = trace.question_ids(split_from_tag(config.split)).size();
    const double reference =
        config.budgets[config.budgets.size() / 2];  // median budget
    est_config.budget_per_question =
        eval_n > 0 ? reference / static_cast<double>(eval_n) : reference;
    estimator = train_estimator(trace, pricing, est_config);
    std::fprintf(stderr,
                 "estimator trained: threshold %.2f, band [%.2f, %.2f]\n",
                 estimator->threshold, estimator->p_low, estimator->p_high);
  }

  std::vector<EvalCell> cells;
  for (const std::string& method : methods) {
    for (double budget : config.budgets) {
      for (std::uint64_t seed : seeds) {
        cells.push_back(EvalCell{method, budget, seed});
      }
    }
  }

  std::vector<ResultRow> rows(cells.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::string failure;
  std::mutex failure_mutex;

  const unsigned hw = std::thread::hardware_concurrency();
  const std::size_t thread_count = std::min<std::size_t>(
      cells.size(),
      config.eval_threads > 0 ? static_cast<std::size_t>(config.eval_threads)
                              : std::max(1u, hw));
  std::vector<std::thread> workers;
  workers.reserve(thread_count);
  for (std::size_t t = 0; t < thread_count; ++t) {
    workers.emplace_back([&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= cells.size() || failed.load()) break;
        try {
          rows[i] = run_cell(trace, config, pricing, cells[i],
                             policy ? &*policy : nullptr,
                             estimator ? &*estimator : nullptr);
        } catch (const std::exception& e) {
          const std::lock_guard<std::mutex> lock(failure_mutex);
          failed = true;
          if (failure.empty()) failure = e.what();
        }
      }
    });
  }
  for (std::thread& w : workers) w.join();
  if (failed) {
    throw DataError("evaluation failed: " + failure);
  }

  std::stable_sort(rows.begin(), rows.end(),
                   [](const ResultRow& a, const ResultRow& b) {
                     if (a.method != b.method) return a.method < b.method;
                     if (a.budget != b.budget) return a.budget < b.budget;
                     return a.seed < b.seed;
                   });

  std::filesystem::create_directories(config.out_dir);
  const std::filesystem::path out =
      std::filesystem::path(config.out_dir) / "results.csv";
  write_results_csv(rows, out);
  for (const ResultRow& r : rows) {
    std::fprintf(stderr, "%s budget=%g seed=%llu accuracy=%.4f spend=%g (%.0f ms)\n",
                 r.method.c_str(), r.budget,
                 static_cast<unsigned long long>(r.seed), r.accuracy, r.spend,
                 r.wall_ms);
  }
  std::fprintf(stderr, "%zu rows -> %s\n", rows.size(), out.string().c_str());
  return kExitOk;
}

int cmd_theory(const RunConfig& config) {
  std::filesystem::create_directories(config.out_dir);
  rng::Stream rng(config.seed);

  // Ordering lemma: random instances per arm count, brute force check.
  std::vector<std::vector<OracleArm>> instances;
  for (int m = 2; m <= 6; ++m) {
    for (int i = 0; i < 40; ++i) {
      std::vector<OracleArm> arms(static_cast<std::size_t>(m));
      for (OracleArm& arm : arms) {
        arm.p = rng.uniform(0.05, 0.99);
        arm.c = rng.uniform(0.01, 2.0);
      }
      instances.push_back(std::move(arms));
    }
  }
  const OrderingReport report = verify_ordering_bruteforce(instances);
  {
    std::ofstream out(std::filesystem::path(config.out_dir) / "ordering_report.csv");
    out << "instances,violations,max_gap,worst_over_best\n";
    out << report.instances << ',' << report.violations << ','
        << format_double(report.max_gap) << ','
        << format_double(report.worst_over_best) << '\n';
  }

  // Alpha tables for a small grid of distributions and stop counts.
  const std::vector<std::vector<double>> dists = {
      {1.0},
      {0.9, 0.1},
      {0.8, 0.2},
      {0.7, 0.3},
      {0.6, 0.4},
      {0.5, 0.5},
      {0.5, 0.3, 0.2},
      {0.4, 0.3, 0.2, 0.1},
  };
  {
    std::ofstream out(std::filesystem::path(config.out_dir) / "alpha_table.csv");
    out << "distribution,k_stop,alpha_exact,alpha_monte_carlo,one_minus_alpha,"
           "one_minus_p_squared\n";
    for (const std::vector<double>& p : dists) {
      const AnswerDistribution dist(p);
      for (int k = 1; k <= 3; ++k) {
        const double exact = alpha_estimate(dist, k, AlphaMethod::Exact);
        const double mc = alpha_estimate(dist, k, AlphaMethod::MonteCarlo,
                                         20000, config.seed + k);
        std::string label;
        for (std::size_t i = 0; i < p.size(); ++i) {
          if (i > 0) label += '|';
          label += format_double(p[i]);
        }
        const double one_minus_p = 1.0 - dist.p().front();
        out << label << ',' << k << ',' << format_double(exact) << ','
            << format_double(mc) << ',' << format_double(1.0 - exact) << ','
            << format_double(one_minus_p * one_minus_p) << '\n';
      }
    }
  }
  std::fprintf(stderr,
               "ordering: %d instances, %d violations; alpha table written\n",
               report.instances, report.violations);
  return report.violations == 0 ? kExitOk : kExitDataError;
}

int cmd_report(const RunConfig& config,
               const std::filesystem::path& results_path) {
  const std::vector<ResultRow> rows = read_results_csv(results_path);
  std::filesystem::create_directories(config.out_dir);
  const std::vector<SeriesRow> series = accuracy_series(rows);
  write_series_csv(series,
                   std::filesystem::path(config.out_dir) / "series.csv");
  write_histogram_csv(query_histogram(rows),
                      std::filesystem::path(config.out_dir) / "histogram.csv");
  write_pareto_csv(pareto_points(series),
                   std::filesystem::path(config.out_dir) / "pareto.csv");
  std::fprintf(stderr, "report written to %s\n", config.out_dir.c_str());
  return kExitOk;
}

int run_guarded(const char* command, int (*body)(const RunConfig&),
                const RunConfig& config) {
  try {
    return body(config);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "%s: config error: %s\n", command, e.what());
    return kExitConfigError;
  } catch (const TrainingError& e) {
    std::fprintf(stderr, "%s: training error: %s\n", command, e.what());
    return kExitTrainingError;
  } catch (const Error& e) {
    std::fprintf(stderr, "%s: data error: %s\n", command, e.what());
    return kExitDataError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "%s: error: %s\n", command, e.what());
    return kExitDataError;
  }
}

}  // namespace cascadelab
