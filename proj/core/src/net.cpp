#include "cascadelab/net.hpp"

#include <cmath>

#include "cascadelab/errors.hpp"

namespace cascadelab {

void Mlp::Grads::zero() {
  for (auto& g : w) std::fill(g.begin(), g.end(), 0.0);
  for (auto& g : b) std::fill(g.begin(), g.end(), 0.0);
}

void Mlp::Grads::scale(double factor) {
  for (auto& g : w)
    for (double& x : g) x *= factor;
  for (auto& g : b)
    for (double& x : g) x *= factor;
}

Mlp Mlp::init(int input_dim, int hidden, int output_dim, int hidden_layers,
              rng::Stream& rng) {
  if (input_dim < 1 || hidden < 1 || output_dim < 1 || hidden_layers < 1) {
    throw ConfigError("network dimensions must be positive");
  }
  Mlp net;
  int in = input_dim;
  for (int l = 0; l <= hidden_layers; ++l) {
    const int out = l == hidden_layers ? output_dim : hidden;
    Layer layer;
    layer.in = in;
    layer.out = out;
    layer.w.resize(static_cast<std::size_t>(in) * out);
    layer.b.assign(static_cast<std::size_t>(out), 0.0);
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    for (double& w : layer.w) w = rng.uniform(-bound, bound);
    for (double& b : layer.b) b = rng.uniform(-bound, bound);
    net.layers_.push_back(std::move(layer));
    in = out;
  }
  return net;
}

std::vector<double> Mlp::forward(std::span<const double> input) const {
  Cache cache;
  return forward_cached(input, cache);
}

std::vector<double> Mlp::forward_cached(std::span<const double> input,
                                        Cache& cache) const {
  if (static_cast<int>(input.size()) != input_dim()) {
    throw DataError("input dimension " + std::to_string(input.size()) +
                    " does not match network input " +
                    std::to_string(input_dim()));
  }
  cache.input.assign(input.begin(), input.end());
  cache.pre.resize(layers_.size());
  cache.post.resize(layers_.size());

  const std::vector<double>* current = &cache.input;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const Layer& layer = layers_[l];
    auto& z = cache.pre[l];
    z.assign(static_cast<std::size_t>(layer.out), 0.0);
    for (int r = 0; r < layer.out; ++r) {
      const double* row = layer.w.data() + static_cast<std::size_t>(r) * layer.in;
      double acc = layer.b[static_cast<std::size_t>(r)];
      for (int c = 0; c < layer.in; ++c) acc += row[c] * (*current)[static_cast<std::size_t>(c)];
      z[static_cast<std::size_t>(r)] = acc;
    }
    auto& h = cache.post[l];
    h = z;
    if (l + 1 < layers_.size()) {
      for (double& x : h) x = x > 0.0 ? x : 0.0;
    }
    current = &h;
  }
  return cache.post.back();
}

Mlp::Grads Mlp::zero_grads() const {
  Grads g;
  g.w.reserve(layers_.size());
  g.b.reserve(layers_.size());
  for (const Layer& layer : layers_) {
    g.w.emplace_back(layer.w.size(), 0.0);
    g.b.emplace_back(layer.b.size(), 0.0);
  }
  return g;
}

void Mlp::backward(const Cache& cache, std::span<const double> output_grad,
                   Grads& grads, std::vector<double>* input_grad) const {
  std::vector<double> delta(output_grad.begin(), output_grad.end());
  for (std::size_t l = layers_.size(); l-- > 0;) {
    const Layer& layer = layers_[l];
    const std::vector<double>& below =
        l == 0 ? cache.input : cache.post[l - 1];

    auto& gw = grads.w[l];
    auto& gb = grads.b[l];
    for (int r = 0; r < layer.out; ++r) {
      const double d = delta[static_cast<std::size_t>(r)];
      gb[static_cast<std::size_t>(r)] += d;
      double* grow = gw.data() + static_cast<std::size_t>(r) * layer.in;
      for (int c = 0; c < layer.in; ++c) grow[c] += d * below[static_cast<std::size_t>(c)];
    }

    if (l == 0 && input_grad == nullptr) break;

    std::vector<double> prev(static_cast<std::size_t>(layer.in), 0.0);
    for (int r = 0; r < layer.out; ++r) {
      const double d = delta[static_cast<std::size_t>(r)];
      if (d == 0.0) continue;
      const double* row = layer.w.data() + static_cast<std::size_t>(r) * layer.in;
      for (int c = 0; c < layer.in; ++c) prev[static_cast<std::size_t>(c)] += d * row[c];
    }
    if (l > 0) {
      // ReLU mask of the layer below.
      const std::vector<double>& z = cache.pre[l - 1];
      for (int c = 0; c < layer.in; ++c) {
        if (z[static_cast<std::size_t>(c)] <= 0.0) prev[static_cast<std::size_t>(c)] = 0.0;
      }
      delta = std::move(prev);
    } else {
      *input_grad = std::move(prev);
    }
  }
}

bool Mlp::all_finite() const {
  for (const Layer& layer : layers_) {
    for (double x : layer.w)
      if (!std::isfinite(x)) return false;
    for (double x : layer.b)
      if (!std::isfinite(x)) return false;
  }
  return true;
}

void AdamOptimizer::apply(std::vector<double>& params,
                          std::span<const double> grads,
                          Moments& moments) const {
  if (moments.m.size() != params.size()) {
    moments.m.assign(params.size(), 0.0);
    moments.v.assign(params.size(), 0.0);
  }
  const double bc1 = 1.0 - std::pow(beta1_, t_);
  const double bc2 = 1.0 - std::pow(beta2_, t_);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    moments.m[i] = beta1_ * moments.m[i] + (1.0 - beta1_) * g;
    moments.v[i] = beta2_ * moments.v[i] + (1.0 - beta2_) * g * g;
    const double m_hat = moments.m[i] / bc1;
    const double v_hat = moments.v[i] / bc2;
    params[i] -= lr_ * m_hat / (std::sqrt(v_hat) + eps_);
  }
}

void AdamOptimizer::step(Mlp& net, const Mlp::Grads& grads) {
  auto& layers = net.layers();
  if (weight_moments_.size() != layers.size()) {
    weight_moments_.resize(layers.size());
    bias_moments_.resize(layers.size());
  }
  ++t_;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    apply(layers[l].w, grads.w[l], weight_moments_[l]);
    apply(layers[l].b, grads.b[l], bias_moments_[l]);
  }
}

void AdamOptimizer::step_vector(std::vector<double>& params,
                                std::span<const double> grads) {
  ++t_;
  apply(params, grads, vector_moments_);
}

double huber(double diff, double delta) {
  const double a = std::fabs(diff);
  if (a <= delta) return 0.5 * diff * diff;
  return delta * (a - 0.5 * delta);
}

double huber_grad(double diff, double delta) {
  if (diff > delta) return delta;
  if (diff < -delta) return -delta;
  return diff;
}

}  // namespace cascadelab
