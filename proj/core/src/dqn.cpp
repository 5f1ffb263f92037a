#include "cascadelab/dqn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "cascadelab/errors.hpp"
#include "json.hpp"

namespace cascadelab {

namespace {

using nlohmann::json;

enum : std::uint64_t {
  kInitTag = 101,
  kEnvTag = 102,
  kActionTag = 103,
  kBufferTag = 104,
  kEpochTag = 105,
  kEvalTag = 106,
};

constexpr int kEmbedOffset = kScalarFeatures;

}  // namespace

double epsilon(long step, const TrainConfig& config) {
  return config.eps_end +
         (config.eps_start - config.eps_end) *
             std::exp(-static_cast<double>(step) / config.eps_decay_tau);
}

ActionKind select_action(const Mlp& net, std::span<const double> state,
                         std::array<bool, kActionCount> legal, double eps,
                         rng::Stream& rng) {
  std::vector<int> candidates;
  for (int a = 0; a < kActionCount; ++a) {
    if (legal[static_cast<std::size_t>(a)]) candidates.push_back(a);
  }
  if (candidates.empty()) {
    throw DataError("select_action with an empty legal set");
  }
  if (rng.uniform() < eps) {
    const auto pick = static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(candidates.size()) - 1));
    return static_cast<ActionKind>(candidates[pick]);
  }
  const std::vector<double> q = net.forward(state);
  int best = candidates.front();
  double best_q = -std::numeric_limits<double>::infinity();
  for (int a : candidates) {
    if (q[static_cast<std::size_t>(a)] > best_q) {
      best_q = q[static_cast<std::size_t>(a)];
      best = a;
    }
  }
  return static_cast<ActionKind>(best);
}

ReplayBuffer::ReplayBuffer(int capacity) : capacity_(capacity) {
  if (capacity < 1) {
    throw ConfigError("replay capacity must be positive");
  }
  storage_.reserve(static_cast<std::size_t>(capacity));
}

void ReplayBuffer::push(Transition transition) {
  if (storage_.size() < static_cast<std::size_t>(capacity_)) {
    storage_.push_back(std::move(transition));
    return;
  }
  storage_[write_pos_] = std::move(transition);
  write_pos_ = (write_pos_ + 1) % static_cast<std::size_t>(capacity_);
}

std::vector<const Transition*> ReplayBuffer::sample(int count,
                                                    rng::Stream& rng) const {
  if (storage_.size() < static_cast<std::size_t>(count)) {
    throw DataError("replay buffer smaller than requested batch");
  }
  std::vector<const Transition*> batch;
  batch.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const auto idx = static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(storage_.size()) - 1));
    batch.push_back(&storage_[idx]);
  }
  return batch;
}

namespace {

double bootstrap_target(const Mlp& target, const Transition& t, double gamma) {
  if (t.terminal) return t.reward;
  bool any_legal = false;
  for (bool b : t.next_legal) any_legal |= b;
  if (!any_legal) return t.reward;
  const std::vector<double> q = target.forward(t.next_state);
  double best = -std::numeric_limits<double>::infinity();
  for (int a = 0; a < kActionCount; ++a) {
    if (t.next_legal[static_cast<std::size_t>(a)]) {
      best = std::max(best, q[static_cast<std::size_t>(a)]);
    }
  }
  return t.reward + gamma * best;
}

}  // namespace

double dqn_train_step(Mlp& net, const Mlp& target,
                      std::span<const Transition* const> batch,
                      const TrainConfig& config, AdamOptimizer& optimizer) {
  if (batch.empty()) {
    throw DataError("empty training batch");
  }
  Mlp::Grads grads = net.zero_grads();
  Mlp::Cache cache;
  std::vector<double> output_grad(static_cast<std::size_t>(net.output_dim()), 0.0);
  double loss_total = 0.0;
  const double inv_n = 1.0 / static_cast<double>(batch.size());

  for (const Transition* t : batch) {
    const double y = bootstrap_target(target, *t, config.gamma);
    const std::vector<double> q = net.forward_cached(t->state, cache);
    const auto a = static_cast<std::size_t>(t->action);
    const double diff = q[a] - y;
    loss_total += huber(diff);
    std::fill(output_grad.begin(), output_grad.end(), 0.0);
    output_grad[a] = huber_grad(diff) * inv_n;
    net.backward(cache, output_grad, grads);
  }
  optimizer.step(net, grads);

  const double loss = loss_total * inv_n;
  if (!std::isfinite(loss) || !net.all_finite()) {
    throw TrainingError("non-finite loss or weights after update at Adam step " +
                        std::to_string(optimizer.iterations()));
  }
  return loss;
}

StreamStats evaluate_policy(const TraceSet& trace, const Mlp& net,
                            const EmbeddingAdapter* adapter,
                            const PricingPolicy& policy, double budget,
                            std::vector<int> question_order,
                            const EnvConfig& env_config, std::uint64_t seed) {
  if (net.input_dim() != state_dim(trace.arm_count(), env_config.embed_dim)) {
    throw DataError("checkpoint input dimension " +
                    std::to_string(net.input_dim()) +
                    " does not match this trace (expected " +
                    std::to_string(state_dim(trace.arm_count(),
                                             env_config.embed_dim)) +
                    ")");
  }
  rng::Stream root(seed);
  rng::Stream env_rng = root.fork(kEnvTag);
  rng::Stream action_rng = root.fork(kActionTag);
  CascadeEnv env(trace, policy, budget, std::move(question_order), env_config,
                 adapter);
  while (!env.done()) {
    const std::vector<double> state = env.encode();
    const ActionKind action =
        select_action(net, state, env.legal_actions(), 0.0, action_rng);
    env.step(action, env_rng);
  }
  return env.stats();
}

namespace {

double curve_eval_accuracy(const TraceSet& trace, const Mlp& net,
                           const EmbeddingAdapter* adapter,
                           const PricingPolicy& policy,
                           const TrainConfig& config) {
  std::vector<int> ids = trace.question_ids(Split::Val);
  if (ids.empty()) ids = trace.question_ids(Split::Train);
  if (ids.empty()) return 0.0;
  const double budget =
      config.reference_budget > 0.0
          ? config.reference_budget
          : config.train_budgets_per_question.front() *
                static_cast<double>(ids.size());
  const StreamStats stats =
      evaluate_policy(trace, net, adapter, policy, budget, std::move(ids),
                      config.env_config(), config.seed ^ kEvalTag);
  return stats.questions > 0
             ? static_cast<double>(stats.correct) / stats.questions
             : 0.0;
}

}  // namespace

TrainedPolicy train_policy(const TraceSet& trace,
                           const std::vector<PricingPolicy>& pricing_options,
                           const TrainConfig& config, const Mlp* initial,
                           long step_offset) {
  if (pricing_options.empty()) {
    throw ConfigError("no pricing options supplied for training");
  }
  if (config.train_budgets_per_question.empty()) {
    throw ConfigError("no training budgets supplied");
  }
  std::vector<int> train_ids = trace.question_ids(Split::Train);
  if (train_ids.empty()) {
    throw ConfigError("trace has no train split");
  }
  // An infeasible floor is allowed: skipping is itself learnable.
  {
    double cheapest = std::numeric_limits<double>::infinity();
    for (const PricingPolicy& p : pricing_options) {
      for (const ArmSpec& arm : trace.arms()) {
        cheapest = std::min(cheapest, p.expected_cost(trace, arm.arm_id));
      }
    }
    const double min_budget =
        *std::min_element(config.train_budgets_per_question.begin(),
                          config.train_budgets_per_question.end());
    if (min_budget < cheapest) {
      std::fprintf(stderr,
                   "warning: smallest per-question training budget %.3g is "
                   "below the cheapest per-query cost %.3g\n",
                   min_budget, cheapest);
    }
  }

  const int dim = state_dim(trace.arm_count(), config.embed_dim);
  rng::Stream root(config.seed);
  rng::Stream init_rng = root.fork(kInitTag);
  rng::Stream env_rng = root.fork(kEnvTag);
  rng::Stream action_rng = root.fork(kActionTag);
  rng::Stream buffer_rng = root.fork(kBufferTag);
  rng::Stream epoch_rng = root.fork(kEpochTag);

  TrainedPolicy policy;
  if (initial != nullptr) {
    if (initial->input_dim() != dim) {
      throw DataError("resume checkpoint input dimension " +
                      std::to_string(initial->input_dim()) +
                      " does not match this trace (expected " +
                      std::to_string(dim) + ")");
    }
    policy.net = *initial;
  } else {
    policy.net = Mlp::init(dim, config.hidden, kActionCount,
                           config.hidden_layers, init_rng);
  }
  policy.arm_count = trace.arm_count();
  policy.embed_dim = config.embed_dim;
  policy.config = config;

  Mlp target = policy.net;
  AdamOptimizer optimizer(config.learning_rate);
  ReplayBuffer buffer(config.replay_capacity);
  const EnvConfig env_config = config.env_config();

  const std::vector<int> ordered_train =
      order_questions(trace, train_ids, config.ordering, epoch_rng);
  const std::size_t chunk =
      std::min(ordered_train.size(),
               static_cast<std::size_t>(std::max(1, config.chunk_questions)));

  long step = 0;
  double last_loss = 0.0;
  while (step < config.training_steps) {
    const double per_question =
        config.train_budgets_per_question[static_cast<std::size_t>(
            epoch_rng.uniform_int(0,
                static_cast<std::int64_t>(config.train_budgets_per_question.size()) - 1))];
    const PricingPolicy& pricing = pricing_options[static_cast<std::size_t>(
        epoch_rng.uniform_int(0, static_cast<std::int64_t>(pricing_options.size()) - 1))];
    const std::size_t start = static_cast<std::size_t>(epoch_rng.uniform_int(
        0, static_cast<std::int64_t>(ordered_train.size() - chunk)));
    const std::vector<int> order(ordered_train.begin() + static_cast<std::ptrdiff_t>(start),
                                 ordered_train.begin() + static_cast<std::ptrdiff_t>(start + chunk));
    const double budget = per_question * static_cast<double>(chunk);
    CascadeEnv env(trace, pricing, budget, order, env_config);

    while (!env.done() && step < config.training_steps) {
      const std::vector<double> state = env.encode();
      const ActionKind action = select_action(
          policy.net, state, env.legal_actions(), epsilon(step, config),
          action_rng);
      buffer.push(env.step(action, env_rng));

      if (buffer.size() >= static_cast<std::size_t>(
                               std::max(config.warmup, config.batch_size))) {
        const auto batch = buffer.sample(config.batch_size, buffer_rng);
        last_loss = dqn_train_step(
            policy.net, config.use_target_net ? target : policy.net, batch,
            config, optimizer);
      }
      ++step;
      if (config.use_target_net && step % config.target_sync_period == 0) {
        target = policy.net;
      }
      if (step % config.eval_period == 0 || step == config.training_steps) {
        CurvePoint point;
        point.step = step_offset + step;
        point.eps = epsilon(step, config);
        point.loss = last_loss;
        point.eval_accuracy = curve_eval_accuracy(
            trace, policy.net, nullptr, pricing_options.front(), config);
        policy.curve.push_back(point);
      }
    }
  }
  policy.trained_steps = step_offset + step;
  return policy;
}

namespace {

json layer_to_json(const Mlp::Layer& layer) {
  return json{{"in", layer.in}, {"out", layer.out}, {"w", layer.w}, {"b", layer.b}};
}

Mlp::Layer layer_from_json(const json& j) {
  Mlp::Layer layer;
  layer.in = j.at("in").get<int>();
  layer.out = j.at("out").get<int>();
  layer.w = j.at("w").get<std::vector<double>>();
  layer.b = j.at("b").get<std::vector<double>>();
  if (layer.w.size() != static_cast<std::size_t>(layer.in) * layer.out ||
      layer.b.size() != static_cast<std::size_t>(layer.out)) {
    throw DataError("checkpoint layer size mismatch");
  }
  return layer;
}

}  // namespace

void save_checkpoint(const TrainedPolicy& policy,
                     const std::filesystem::path& path) {
  json doc;
  doc["version"] = 1;
  doc["arm_count"] = policy.arm_count;
  doc["embed_dim"] = policy.embed_dim;
  doc["trained_steps"] = policy.trained_steps;
  doc["layers"] = json::array();
  for (const Mlp::Layer& layer : policy.net.layers()) {
    doc["layers"].push_back(layer_to_json(layer));
  }
  if (!policy.adapter.is_identity()) {
    doc["adapter"] = json{{"dim", policy.adapter.dim()},
                          {"weights", policy.adapter.weights()}};
  }
  doc["config"] = json{{"learning_rate", policy.config.learning_rate},
                       {"batch_size", policy.config.batch_size},
                       {"eps_start", policy.config.eps_start},
                       {"eps_end", policy.config.eps_end},
                       {"eps_decay_tau", policy.config.eps_decay_tau},
                       {"gamma", policy.config.gamma},
                       {"target_sync_period", policy.config.target_sync_period},
                       {"training_steps", policy.config.training_steps},
                       {"lambda", policy.config.lambda},
                       {"seed", policy.config.seed},
                       {"hidden", policy.config.hidden},
                       {"hidden_layers", policy.config.hidden_layers},
                       {"replay_capacity", policy.config.replay_capacity},
                       {"warmup", policy.config.warmup},
                       {"eval_period", policy.config.eval_period},
                       {"embed_dim", policy.config.embed_dim},
                       {"requery_cap", policy.config.requery_cap},
                       {"use_target_net", policy.config.use_target_net},
                       {"allow_requery", policy.config.allow_requery},
                       {"terminal_per_question", policy.config.terminal_per_question},
                       {"train_budgets_per_question", policy.config.train_budgets_per_question},
                       {"chunk_questions", policy.config.chunk_questions},
                       {"reference_budget", policy.config.reference_budget}};
  std::ofstream out(path);
  if (!out) {
    throw DataError("cannot open '" + path.string() + "' for writing");
  }
  out << doc.dump(2) << '\n';
}

TrainedPolicy load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot open checkpoint '" + path.string() + "'");
  }
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw DataError("checkpoint parse error: " + std::string(e.what()));
  }
  if (doc.at("version").get<int>() != 1) {
    throw DataError("unsupported checkpoint version");
  }
  TrainedPolicy policy;
  policy.arm_count = doc.at("arm_count").get<int>();
  policy.embed_dim = doc.at("embed_dim").get<int>();
  policy.trained_steps = doc.at("trained_steps").get<long>();
  for (const json& j : doc.at("layers")) {
    policy.net.layers().push_back(layer_from_json(j));
  }
  if (doc.contains("adapter")) {
    const json& a = doc.at("adapter");
    EmbeddingAdapter adapter(a.at("dim").get<int>());
    adapter.weights() = a.at("weights").get<std::vector<double>>();
    policy.adapter = std::move(adapter);
  }
  const json& c = doc.at("config");
  policy.config.learning_rate = c.at("learning_rate").get<double>();
  policy.config.batch_size = c.at("batch_size").get<int>();
  policy.config.eps_start = c.at("eps_start").get<double>();
  policy.config.eps_end = c.at("eps_end").get<double>();
  policy.config.eps_decay_tau = c.at("eps_decay_tau").get<double>();
  policy.config.gamma = c.at("gamma").get<double>();
  policy.config.target_sync_period = c.at("target_sync_period").get<int>();
  policy.config.training_steps = c.at("training_steps").get<long>();
  policy.config.lambda = c.at("lambda").get<double>();
  policy.config.seed = c.at("seed").get<std::uint64_t>();
  policy.config.hidden = c.at("hidden").get<int>();
  policy.config.hidden_layers = c.at("hidden_layers").get<int>();
  policy.config.replay_capacity = c.at("replay_capacity").get<int>();
  policy.config.warmup = c.at("warmup").get<int>();
  policy.config.eval_period = c.at("eval_period").get<long>();
  policy.config.embed_dim = c.at("embed_dim").get<int>();
  policy.config.requery_cap = c.at("requery_cap").get<int>();
  policy.config.use_target_net = c.at("use_target_net").get<bool>();
  policy.config.allow_requery = c.at("allow_requery").get<bool>();
  policy.config.terminal_per_question = c.at("terminal_per_question").get<bool>();
  policy.config.train_budgets_per_question =
      c.at("train_budgets_per_question").get<std::vector<double>>();
  policy.config.chunk_questions = c.at("chunk_questions").get<int>();
  policy.config.reference_budget = c.at("reference_budget").get<double>();
  return policy;
}

namespace {

// Re-slices the first layer's arm-count feature blocks positionally; new
// arm columns start at zero.
Mlp remap_first_layer(const Mlp& old_net, int old_arms, int new_arms,
                      int embed_dim) {
  Mlp net = old_net;
  if (old_arms == new_arms) return net;
  const int old_in = kScalarFeatures + embed_dim + 2 * old_arms;
  const int new_in = kScalarFeatures + embed_dim + 2 * new_arms;
  if (old_net.input_dim() != old_in) {
    throw DataError("checkpoint input dimension does not match its arm count");
  }
  Mlp::Layer& first = net.layers().front();
  std::vector<double> w(static_cast<std::size_t>(first.out) * new_in, 0.0);
  const int shared = kScalarFeatures + embed_dim;
  for (int r = 0; r < first.out; ++r) {
    const double* old_row = old_net.layers().front().w.data() +
                            static_cast<std::size_t>(r) * old_in;
    double* new_row = w.data() + static_cast<std::size_t>(r) * new_in;
    for (int c = 0; c < shared; ++c) new_row[c] = old_row[c];
    for (int k = 0; k < std::min(old_arms, new_arms); ++k) {
      new_row[shared + k] = old_row[shared + k];
      new_row[shared + new_arms + k] = old_row[shared + old_arms + k];
    }
  }
  first.in = new_in;
  first.w = std::move(w);
  return net;
}

// Online adapter-only updates: features are rebuilt each step, so there is
// no stale-replay problem as the adapter moves.
void adapter_finetune_loop(const TraceSet& trace,
                           const std::vector<PricingPolicy>& pricing_options,
                           const std::vector<int>& sample_ids,
                           const TrainConfig& config, const Mlp& frozen_net,
                           EmbeddingAdapter& adapter) {
  const int d = adapter.dim();
  rng::Stream root(config.seed);
  rng::Stream env_rng = root.fork(kEnvTag);
  rng::Stream action_rng = root.fork(kActionTag);
  rng::Stream epoch_rng = root.fork(kEpochTag);
  AdamOptimizer optimizer(config.learning_rate);
  const EnvConfig env_config = config.env_config();

  std::unordered_map<int, std::vector<double>> raw_cache;
  const auto raw_embedding = [&](int question_id) -> const std::vector<double>& {
    auto it = raw_cache.find(question_id);
    if (it == raw_cache.end()) {
      it = raw_cache
               .emplace(question_id,
                        embed_question(trace.question(question_id).text, d))
               .first;
    }
    return it->second;
  };

  Mlp::Cache cache;
  std::vector<double> adapter_grad(static_cast<std::size_t>(d) * d);
  long step = 0;
  while (step < config.training_steps) {
    const double budget =
        config.train_budgets_per_question[static_cast<std::size_t>(
            epoch_rng.uniform_int(0,
                static_cast<std::int64_t>(config.train_budgets_per_question.size()) - 1))] *
        static_cast<double>(sample_ids.size());
    const PricingPolicy& pricing = pricing_options[static_cast<std::size_t>(
        epoch_rng.uniform_int(0, static_cast<std::int64_t>(pricing_options.size()) - 1))];
    CascadeEnv env(trace, pricing, budget, sample_ids, env_config, &adapter);

    while (!env.done() && step < config.training_steps) {
      const std::vector<double> state = env.encode();
      const ActionKind action = select_action(
          frozen_net, state, env.legal_actions(), epsilon(step, config),
          action_rng);
      const std::vector<double>& raw = raw_embedding(env.progress().question_id);
      const Transition t = env.step(action, env_rng);

      const double y = bootstrap_target(frozen_net, t, config.gamma);
      const std::vector<double> q = frozen_net.forward_cached(t.state, cache);
      const auto a = static_cast<std::size_t>(t.action);
      std::vector<double> output_grad(kActionCount, 0.0);
      output_grad[a] = huber_grad(q[a] - y);

      Mlp::Grads unused = frozen_net.zero_grads();
      std::vector<double> input_grad;
      frozen_net.backward(cache, output_grad, unused, &input_grad);

      // Feature i of the embed block is clamp(0.5 * ((A e)_i + 1)); the 0.5
      // carries into the chain rule, clamped entries contribute nothing.
      std::fill(adapter_grad.begin(), adapter_grad.end(), 0.0);
      for (int r = 0; r < d; ++r) {
        const double feature = t.state[static_cast<std::size_t>(kEmbedOffset + r)];
        if (feature <= 0.0 || feature >= kBudgetFeatureClip) continue;
        const double g = 0.5 * input_grad[static_cast<std::size_t>(kEmbedOffset + r)];
        if (g == 0.0) continue;
        double* row = adapter_grad.data() + static_cast<std::size_t>(r) * d;
        for (int c = 0; c < d; ++c) row[c] += g * raw[static_cast<std::size_t>(c)];
      }
      optimizer.step_vector(adapter.weights(), adapter_grad);
      ++step;
    }
  }
}

}  // namespace

TrainedPolicy finetune_policy(const TrainedPolicy& checkpoint,
                              const TraceSet& trace,
                              const std::vector<PricingPolicy>& pricing_options,
                              int n_samples, const TrainConfig& config,
                              FinetuneMode mode) {
  if (n_samples == 0) {
    return checkpoint;
  }
  if (config.embed_dim != checkpoint.embed_dim) {
    throw ConfigError("fine-tune embed dimension " +
                      std::to_string(config.embed_dim) +
                      " is incompatible with checkpoint dimension " +
                      std::to_string(checkpoint.embed_dim));
  }
  std::vector<int> sample_ids = trace.question_ids(Split::Train);
  if (n_samples > 0 && static_cast<std::size_t>(n_samples) < sample_ids.size()) {
    sample_ids.resize(static_cast<std::size_t>(n_samples));
  }
  if (sample_ids.empty()) {
    throw ConfigError("no fine-tune samples available");
  }

  TrainedPolicy result = checkpoint;
  result.net = remap_first_layer(checkpoint.net, checkpoint.arm_count,
                                 trace.arm_count(), checkpoint.embed_dim);
  result.arm_count = trace.arm_count();
  result.config = config;
  result.curve.clear();

  if (mode == FinetuneMode::AdapterOnly) {
    if (result.adapter.is_identity()) {
      result.adapter = EmbeddingAdapter(checkpoint.embed_dim);
    }
    adapter_finetune_loop(trace, pricing_options, sample_ids, config,
                          result.net, result.adapter);
    result.trained_steps = checkpoint.trained_steps + config.training_steps;
    return result;
  }

  // Full fine-tune: the regular training loop seeded from the checkpoint
  // weights, restricted to the sample questions.
  rng::Stream root(config.seed);
  rng::Stream env_rng = root.fork(kEnvTag);
  rng::Stream action_rng = root.fork(kActionTag);
  rng::Stream buffer_rng = root.fork(kBufferTag);
  rng::Stream epoch_rng = root.fork(kEpochTag);
  AdamOptimizer optimizer(config.learning_rate);
  ReplayBuffer buffer(config.replay_capacity);
  Mlp target = result.net;
  const EnvConfig env_config = config.env_config();
  const EmbeddingAdapter* adapter =
      result.adapter.is_identity() ? nullptr : &result.adapter;

  long step = 0;
  while (step < config.training_steps) {
    const double budget =
        config.train_budgets_per_question[static_cast<std::size_t>(
            epoch_rng.uniform_int(0,
                static_cast<std::int64_t>(config.train_budgets_per_question.size()) - 1))] *
        static_cast<double>(sample_ids.size());
    const PricingPolicy& pricing = pricing_options[static_cast<std::size_t>(
        epoch_rng.uniform_int(0, static_cast<std::int64_t>(pricing_options.size()) - 1))];
    CascadeEnv env(trace, pricing, budget, sample_ids, env_config, adapter);
    while (!env.done() && step < config.training_steps) {
      const std::vector<double> state = env.encode();
      const ActionKind action = select_action(
          result.net, state, env.legal_actions(), epsilon(step, config),
          action_rng);
      buffer.push(env.step(action, env_rng));
      if (buffer.size() >= static_cast<std::size_t>(
                               std::max(config.warmup, config.batch_size))) {
        const auto batch = buffer.sample(config.batch_size, buffer_rng);
        dqn_train_step(result.net,
                       config.use_target_net ? target : result.net, batch,
                       config, optimizer);
      }
      ++step;
      if (config.use_target_net && step % config.target_sync_period == 0) {
        target = result.net;
      }
    }
  }
  result.trained_steps = checkpoint.trained_steps + step;
  return result;
}

}  // namespace cascadelab
