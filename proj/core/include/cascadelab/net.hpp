#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cascadelab/rng.hpp"

namespace cascadelab {

// Fully connected net with rectified-linear hidden activations and a linear
// output head. Double precision throughout so gradients can be checked
// against finite differences tightly.
class Mlp {
 public:
  struct Layer {
    int in = 0;
    int out = 0;
    std::vector<double> w;  // row-major out x in
    std::vector<double> b;
  };

  struct Cache {
    std::vector<double> input;
    std::vector<std::vector<double>> pre;   // pre-activation per layer
    std::vector<std::vector<double>> post;  // post-activation per layer
  };

  struct Grads {
    std::vector<std::vector<double>> w;
    std::vector<std::vector<double>> b;

    void zero();
    void scale(double factor);
  };

  Mlp() = default;

  // Hidden layout: `hidden_layers` layers of width `hidden`. Weights are
  // uniform in +-1/sqrt(fan_in).
  static Mlp init(int input_dim, int hidden, int output_dim, int hidden_layers,
                  rng::Stream& rng);

  int input_dim() const { return layers_.empty() ? 0 : layers_.front().in; }
  int output_dim() const { return layers_.empty() ? 0 : layers_.back().out; }
  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& layers() { return layers_; }

  std::vector<double> forward(std::span<const double> input) const;
  std::vector<double> forward_cached(std::span<const double> input,
                                     Cache& cache) const;

  Grads zero_grads() const;

  // Backprop from dL/doutput; accumulates into grads. When input_grad is
  // non-null it receives dL/dinput (overwritten, not accumulated).
  void backward(const Cache& cache, std::span<const double> output_grad,
                Grads& grads, std::vector<double>* input_grad = nullptr) const;

  bool all_finite() const;

 private:
  std::vector<Layer> layers_;
};

class AdamOptimizer {
 public:
  AdamOptimizer(double learning_rate, double beta1 = 0.9, double beta2 = 0.999,
                double epsilon = 1e-8)
      : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon) {}

  void step(Mlp& net, const Mlp::Grads& grads);
  // Variant for a raw parameter vector (the embedding adapter).
  void step_vector(std::vector<double>& params, std::span<const double> grads);

  int iterations() const { return t_; }

 private:
  struct Moments {
    std::vector<double> m, v;
  };

  void apply(std::vector<double>& params, std::span<const double> grads,
             Moments& moments) const;

  double lr_, beta1_, beta2_, eps_;
  int t_ = 0;
  std::vector<Moments> weight_moments_;
  std::vector<Moments> bias_moments_;
  Moments vector_moments_;
};

// Huber loss with threshold delta (quadratic inside, linear outside).
double huber(double diff, double delta = 1.0);
double huber_grad(double diff, double delta = 1.0);

}  // namespace cascadelab
