#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>
#include <vector>

namespace cascadelab::rng {

// splitmix64 step; the mixing function behind all seeded hashing here.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Order-sensitive fold of several keys into one 64-bit hash.
inline std::uint64_t hash_keys(std::initializer_list<std::uint64_t> keys) {
  std::uint64_t state = 0x6a09e667f3bcc908ULL;
  std::uint64_t h = 0;
  for (std::uint64_t k : keys) {
    state ^= k + 0x9e3779b97f4a7c15ULL + (state << 6) + (state >> 2);
    h = splitmix64(state);
  }
  return h;
}

inline double unit_from_bits(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Uniform in [0,1) derived from a seeded hash; platform-stable.
inline double hash_unit(std::initializer_list<std::uint64_t> keys) {
  return unit_from_bits(hash_keys(keys));
}

// Deterministic random stream. The engine is std::mt19937_64 but all
// distributions are drawn here so sequences do not depend on the standard
// library implementation.
class Stream {
 public:
  explicit Stream(std::uint64_t seed) : engine_(seed), seed_(seed) {}

  std::uint64_t next_bits() { return engine_(); }

  double uniform() { return unit_from_bits(next_bits()); }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(next_bits() % span);
  }

  bool bernoulli(double p) { return uniform() < p; }

  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  double lognormal(double mu, double sigma) {
    return std::exp(mu + sigma * normal());
  }

  // Lognormal parameterized by its mean instead of mu.
  double lognormal_mean(double mean, double sigma) {
    if (mean <= 0.0) return 0.0;
    return lognormal(std::log(mean) - 0.5 * sigma * sigma, sigma);
  }

  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(i) - 1));
      std::swap(values[i - 1], values[j]);
    }
  }

  // Derived independent stream; stable under reordering of other draws.
  Stream fork(std::uint64_t tag) const {
    return Stream(hash_keys({seed_, tag}));
  }

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
};

// Index sampler over cumulative weights; used for Zipf draws.
class DiscreteSampler {
 public:
  explicit DiscreteSampler(const std::vector<double>& weights) {
    cumulative_.reserve(weights.size());
    double total = 0.0;
    for (double w : weights) {
      total += w;
      cumulative_.push_back(total);
    }
    for (double& c : cumulative_) c /= total;
  }

  int sample(double unit) const {
    int lo = 0;
    int hi = static_cast<int>(cumulative_.size()) - 1;
    while (lo < hi) {
      const int mid = (lo + hi) / 2;
      if (unit <= cumulative_[mid]) {
        hi = mid;
      } else {
        lo = mid + 1;
      }
    }
    return lo;
  }

  int size() const { return static_cast<int>(cumulative_.size()); }

 private:
  std::vector<double> cumulative_;
};

inline std::vector<double> zipf_weights(int count, double exponent) {
  std::vector<double> w(static_cast<std::size_t>(count));
  for (int j = 0; j < count; ++j) {
    w[static_cast<std::size_t>(j)] = 1.0 / std::pow(static_cast<double>(j + 1), exponent);
  }
  return w;
}

}  // namespace cascadelab::rng
