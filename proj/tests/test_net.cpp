#include "cascadelab/net.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "cascadelab/dqn.hpp"
#include "cascadelab/errors.hpp"
#include "doctest.h"

using namespace cascadelab;

namespace {

Transition random_transition(int dim, rng::Stream& rng) {
  Transition t;
  t.state.resize(static_cast<std::size_t>(dim));
  t.next_state.resize(static_cast<std::size_t>(dim));
  for (double& x : t.state) x = rng.uniform(0.0, 1.0);
  for (double& x : t.next_state) x = rng.uniform(0.0, 1.0);
  t.action = static_cast<ActionKind>(rng.uniform_int(0, 2));
  t.reward = rng.uniform(0.0, 6.0);
  t.terminal = rng.bernoulli(0.25);
  for (int a = 0; a < kActionCount; ++a) {
    t.next_legal[static_cast<std::size_t>(a)] = rng.bernoulli(0.7);
  }
  t.next_legal[0] = true;
  return t;
}

// Test-side loss oracle, independent of dqn_train_step's gradient path.
double batch_loss(const Mlp& net, const Mlp& target,
                  const std::vector<Transition>& batch, double gamma) {
  double total = 0.0;
  for (const Transition& t : batch) {
    double y = t.reward;
    if (!t.terminal) {
      const std::vector<double> q = target.forward(t.next_state);
      double best = -1e300;
      for (int a = 0; a < kActionCount; ++a) {
        if (t.next_legal[static_cast<std::size_t>(a)]) {
          best = std::max(best, q[static_cast<std::size_t>(a)]);
        }
      }
      y += gamma * best;
    }
    const double diff =
        net.forward(t.state)[static_cast<std::size_t>(t.action)] - y;
    total += huber(diff);
  }
  return total / static_cast<double>(batch.size());
}

Mlp::Grads analytic_grads(const Mlp& net, const Mlp& target,
                          const std::vector<Transition>& batch, double gamma) {
  Mlp::Grads grads = net.zero_grads();
  Mlp::Cache cache;
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  for (const Transition& t : batch) {
    double y = t.reward;
    if (!t.terminal) {
      const std::vector<double> q = target.forward(t.next_state);
      double best = -1e300;
      for (int a = 0; a < kActionCount; ++a) {
        if (t.next_legal[static_cast<std::size_t>(a)]) {
          best = std::max(best, q[static_cast<std::size_t>(a)]);
        }
      }
      y += gamma * best;
    }
    const std::vector<double> q = net.forward_cached(t.state, cache);
    std::vector<double> output_grad(kActionCount, 0.0);
    const auto a = static_cast<std::size_t>(t.action);
    output_grad[a] = huber_grad(q[a] - y) * inv_n;
    net.backward(cache, output_grad, grads);
  }
  return grads;
}

struct GradCheckStats {
  double worst_rel = 0.0;
  int checked = 0;
};

// Central finite differences over every weight and bias.
GradCheckStats finite_difference_check(Mlp net, const Mlp& target,
                                       const std::vector<Transition>& batch,
                                       double gamma) {
  constexpr double h = 1e-5;
  const Mlp::Grads grads = analytic_grads(net, target, batch, gamma);
  GradCheckStats stats;
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    for (int part = 0; part < 2; ++part) {
      std::vector<double>& params =
          part == 0 ? net.layers()[l].w : net.layers()[l].b;
      const std::vector<double>& analytic = part == 0 ? grads.w[l] : grads.b[l];
      for (std::size_t i = 0; i < params.size(); ++i) {
        const double saved = params[i];
        params[i] = saved + h;
        const double up = batch_loss(net, target, batch, gamma);
        params[i] = saved - h;
        const double down = batch_loss(net, target, batch, gamma);
        params[i] = saved;
        const double fd = (up - down) / (2.0 * h);
        const double a = analytic[i];
        const double scale = std::max({std::fabs(a), std::fabs(fd), 1e-6});
        stats.worst_rel = std::max(stats.worst_rel, std::fabs(a - fd) / scale);
        ++stats.checked;
      }
    }
  }
  return stats;
}

}  // namespace

TEST_SUITE("net") {

TEST_CASE("zero weights map everything to zero") {
  rng::Stream rng(1);
  Mlp net = Mlp::init(5, 8, 3, 1, rng);
  for (auto& layer : net.layers()) {
    std::fill(layer.w.begin(), layer.w.end(), 0.0);
    std::fill(layer.b.begin(), layer.b.end(), 0.0);
  }
  const std::vector<double> x{0.3, -0.2, 1.0, 0.5, 0.9};
  for (double q : net.forward(x)) CHECK(q == 0.0);
}

TEST_CASE("tiny net forward matches hand arithmetic") {
  rng::Stream rng(1);
  Mlp net = Mlp::init(2, 1, 1, 1, rng);
  net.layers()[0].w = {1.0, 0.5};
  net.layers()[0].b = {0.25};
  net.layers()[1].w = {2.0};
  net.layers()[1].b = {-0.1};

  // z1 = 0.3 + 0.5*(-0.2) + 0.25 = 0.45; out = 2*0.45 - 0.1 = 0.8
  const std::vector<double> x{0.3, -0.2};
  CHECK(std::fabs(net.forward(x)[0] - 0.8) < 1e-12);

  // Negative pre-activation is clamped: out = -0.1.
  const std::vector<double> x2{-1.0, 0.5};
  CHECK(std::fabs(net.forward(x2)[0] - (-0.1)) < 1e-12);
}

TEST_CASE("dimension mismatch is rejected") {
  rng::Stream rng(1);
  const Mlp net = Mlp::init(4, 8, 3, 1, rng);
  CHECK_THROWS_AS(net.forward(std::vector<double>{1.0, 2.0}), DataError);
}

TEST_CASE("huber loss and gradient") {
  CHECK(huber(0.5) == doctest::Approx(0.125));
  CHECK(huber(2.0) == doctest::Approx(1.5));
  CHECK(huber(-2.0) == doctest::Approx(1.5));
  CHECK(huber_grad(0.5) == doctest::Approx(0.5));
  CHECK(huber_grad(3.0) == doctest::Approx(1.0));
  CHECK(huber_grad(-3.0) == doctest::Approx(-1.0));
}

TEST_CASE("analytic gradients match central finite differences") {
  // 20 random (net, batch) pairs; relative error under 1e-4.
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    rng::Stream rng(1000 + seed);
    const int dim = 6 + static_cast<int>(rng.uniform_int(0, 4));
    Mlp net = Mlp::init(dim, 12, kActionCount, 1, rng);
    Mlp target = Mlp::init(dim, 12, kActionCount, 1, rng);
    std::vector<Transition> batch;
    for (int i = 0; i < 8; ++i) batch.push_back(random_transition(dim, rng));
    const GradCheckStats stats =
        finite_difference_check(net, target, batch, 0.9);
    CHECK(stats.checked > 0);
    CHECK(stats.worst_rel < 1e-4);
  }
}

TEST_CASE("input gradients match finite differences too") {
  rng::Stream rng(47);
  Mlp net = Mlp::init(6, 10, 3, 1, rng);
  std::vector<double> x(6);
  for (double& v : x) v = rng.uniform(0.0, 1.0);

  Mlp::Cache cache;
  net.forward_cached(x, cache);
  const std::vector<double> output_grad{1.0, 0.0, 0.0};
  Mlp::Grads grads = net.zero_grads();
  std::vector<double> input_grad;
  net.backward(cache, output_grad, grads, &input_grad);

  constexpr double h = 1e-6;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + h;
    const double up = net.forward(x)[0];
    x[i] = saved - h;
    const double down = net.forward(x)[0];
    x[i] = saved;
    const double fd = (up - down) / (2.0 * h);
    CHECK(std::fabs(fd - input_grad[i]) <
          1e-4 * std::max({1.0, std::fabs(fd)}));
  }
}

TEST_CASE("two hidden layers are supported") {
  rng::Stream rng(3);
  Mlp net = Mlp::init(5, 8, 3, 2, rng);
  CHECK(net.layers().size() == 3);
  const std::vector<double> x{0.1, 0.2, 0.3, 0.4, 0.5};
  CHECK(net.forward(x).size() == 3);

  std::vector<Transition> batch;
  for (int i = 0; i < 4; ++i) batch.push_back(random_transition(5, rng));
  const GradCheckStats stats = finite_difference_check(net, net, batch, 0.9);
  CHECK(stats.worst_rel < 1e-4);
}

TEST_CASE("adam converges on a quadratic") {
  AdamOptimizer optimizer(0.1);
  std::vector<double> value{0.0};
  std::vector<double> grad{0.0};
  for (int step = 0; step < 1000; ++step) {
    grad[0] = 2.0 * (value[0] - 3.0);
    optimizer.step_vector(value, grad);
  }
  CHECK(value[0] == doctest::Approx(3.0).epsilon(1e-4));
}

TEST_CASE("loss decreases over 100 steps on a frozen batch") {
  rng::Stream rng(9);
  const int dim = 8;
  Mlp net = Mlp::init(dim, 16, kActionCount, 1, rng);
  const Mlp target = net;
  std::vector<Transition> batch;
  for (int i = 0; i < 16; ++i) batch.push_back(random_transition(dim, rng));
  std::vector<const Transition*> view;
  for (const Transition& t : batch) view.push_back(&t);

  TrainConfig config;
  config.gamma = 0.9;
  config.learning_rate = 1e-2;
  AdamOptimizer optimizer(config.learning_rate);
  const double before = batch_loss(net, target, batch, config.gamma);
  double last = 0.0;
  for (int step = 0; step < 100; ++step) {
    last = dqn_train_step(net, target, view, config, optimizer);
  }
  CHECK(last < before);
  CHECK(batch_loss(net, target, batch, config.gamma) < before);
}

TEST_CASE("single-transition train step matches a hand-computed target") {
  // One layer pair with known weights and a terminal transition: the loss
  // is huber(q - r) with q computable by hand.
  rng::Stream rng(1);
  Mlp net = Mlp::init(2, 1, 3, 1, rng);
  net.layers()[0].w = {1.0, -1.0};
  net.layers()[0].b = {0.5};
  net.layers()[1].w = {1.0, 2.0, -1.0};
  net.layers()[1].b = {0.0, 0.1, 0.2};

  Transition t;
  t.state = {0.6, 0.1};  // z1 = 0.6 - 0.1 + 0.5 = 1.0
  t.next_state = {0.0, 0.0};
  t.action = ActionKind::RequerySame;  // q = 2*1.0 + 0.1 = 2.1
  t.reward = 1.6;                      // diff = 0.5, huber = 0.125
  t.terminal = true;

  const Mlp target = net;
  TrainConfig config;
  AdamOptimizer optimizer(1e-4);
  const std::vector<const Transition*> batch{&t};
  const double loss = dqn_train_step(net, target, batch, config, optimizer);
  CHECK(std::fabs(loss - 0.125) < 1e-8);
}

TEST_CASE("nan weights abort training with a diagnostic") {
  rng::Stream rng(5);
  Mlp net = Mlp::init(3, 4, 3, 1, rng);
  net.layers()[0].w[0] = std::numeric_limits<double>::quiet_NaN();
  Transition t;
  t.state = {0.1, 0.2, 0.3};
  t.next_state = {0.0, 0.0, 0.0};
  t.action = ActionKind::Return;
  t.reward = 1.0;
  t.terminal = true;
  const Mlp target = net;
  TrainConfig config;
  AdamOptimizer optimizer(1e-4);
  const std::vector<const Transition*> batch{&t};
  CHECK_THROWS_AS(dqn_train_step(net, target, batch, config, optimizer),
                  TrainingError);
}

}  // TEST_SUITE
