#pragma once

#include <cstdint>
#include <random>

#include "s2v/nn/tensor.hpp"

namespace s2v::nn {

/// Seeded generator state. Copying it forks an identical stream, which is
/// how callers replay a sampling decision.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  double uniform(double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  double normal() { return normal_(engine_); }
  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }
  std::uint64_t next_u64() { return engine_(); }

  Tensor normal_tensor(const Shape& shape) {
    Tensor t(shape);
    for (auto& v : t.data()) v = normal();
    return t;
  }

  bool operator==(const Rng& other) const = default;

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

}  // namespace s2v::nn
