#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "cascadelab/env.hpp"
#include "cascadelab/net.hpp"

namespace cascadelab {

struct TrainConfig {
  double learning_rate = 1e-4;
  int batch_size = 64;
  double eps_start = 0.9;
  double eps_end = 0.05;
  double eps_decay_tau = 1000.0;  // environment steps
  double gamma = 0.99;
  int target_sync_period = 500;
  long training_steps = 50000;
  double lambda = 5.0;
  std::uint64_t seed = 1;
  int hidden = 128;
  int hidden_layers = 1;
  int replay_capacity = 50000;
  int warmup = 1000;
  long eval_period = 2500;
  int embed_dim = 64;
  int requery_cap = 8;
  bool use_target_net = true;
  bool allow_requery = true;
  bool terminal_per_question = false;
  QuestionOrdering ordering = QuestionOrdering::Given;
  // Per-question budgets sampled per training episode; evaluation curves
  // use reference_budget (an absolute total for the validation split).
  std::vector<double> train_budgets_per_question;
  double reference_budget = 0.0;
  // Training episodes run over contiguous windows of the train stream so
  // the budget horizon stays inside the bootstrap horizon; the B_k
  // features are scale-free, so pacing transfers to full-length streams.
  int chunk_questions = 32;

  EnvConfig env_config() const {
    EnvConfig cfg;
    cfg.requery_cap = requery_cap;
    cfg.lambda = lambda;
    cfg.embed_dim = embed_dim;
    cfg.allow_requery = allow_requery;
    cfg.terminal_per_question = terminal_per_question;
    return cfg;
  }
};

// eps_end + (eps_start - eps_end) * exp(-step / tau).
double epsilon(long step, const TrainConfig& config);

// Epsilon-greedy over the legal set; illegal actions are masked out of the
// argmax. Ties break toward the lowest action index.
ActionKind select_action(const Mlp& net, std::span<const double> state,
                         std::array<bool, kActionCount> legal, double eps,
                         rng::Stream& rng);

class ReplayBuffer {
 public:
  explicit ReplayBuffer(int capacity);

  void push(Transition transition);
  std::size_t size() const { return storage_.size(); }
  int capacity() const { return capacity_; }

  // Uniform sample with replacement; requires size() >= count.
  std::vector<const Transition*> sample(int count, rng::Stream& rng) const;

 private:
  int capacity_;
  std::size_t write_pos_ = 0;
  std::vector<Transition> storage_;
};

// One Q-learning update on a batch: Huber(delta=1) between Q(s,a) and
// r (+ gamma * max legal target Q(s') when non-terminal), one Adam step.
// Returns the mean loss; throws TrainingError when the loss or weights go
// non-finite.
double dqn_train_step(Mlp& net, const Mlp& target,
                      std::span<const Transition* const> batch,
                      const TrainConfig& config, AdamOptimizer& optimizer);

struct CurvePoint {
  long step = 0;
  double eps = 0.0;
  double loss = 0.0;
  double eval_accuracy = 0.0;
};

struct TrainedPolicy {
  Mlp net;
  EmbeddingAdapter adapter;  // identity unless fine-tuned
  int arm_count = 0;
  int embed_dim = 0;
  long trained_steps = 0;
  TrainConfig config;
  std::vector<CurvePoint> curve;
};

// Full training run over the train split; deterministic given config.seed.
// `initial` resumes from existing weights; curve steps continue from
// step_offset.
TrainedPolicy train_policy(const TraceSet& trace,
                           const std::vector<PricingPolicy>& pricing_options,
                           const TrainConfig& config,
                           const Mlp* initial = nullptr, long step_offset = 0);

// Greedy rollout of a trained net over a question stream.
StreamStats evaluate_policy(const TraceSet& trace, const Mlp& net,
                            const EmbeddingAdapter* adapter,
                            const PricingPolicy& policy, double budget,
                            std::vector<int> question_order,
                            const EnvConfig& env_config, std::uint64_t seed);

void save_checkpoint(const TrainedPolicy& policy,
                     const std::filesystem::path& path);
TrainedPolicy load_checkpoint(const std::filesystem::path& path);

enum class FinetuneMode { Full, AdapterOnly };

// Adapts a checkpoint to a new arm set / trace using the first n_samples
// train questions. Arm-count feature blocks are re-sliced positionally; new
// arm columns start at zero. n_samples == 0 returns the checkpoint as-is.
TrainedPolicy finetune_policy(const TrainedPolicy& checkpoint,
                              const TraceSet& trace,
                              const std::vector<PricingPolicy>& pricing_options,
                              int n_samples, const TrainConfig& config,
                              FinetuneMode mode);

}  // namespace cascadelab
