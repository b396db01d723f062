#pragma once

#include <cstdint>
#include <vector>

#include "s2v/nn/tensor.hpp"

namespace s2v::replay {

/// Byte-packed pixel stack. Values must be multiples of 1/254 in [0, 1],
/// which covers every rendered intensity, so the round trip is exact.
class PackedVisual {
 public:
  PackedVisual() = default;
  explicit PackedVisual(const nn::Tensor& visual);

  nn::Tensor unpack() const;
  /// Writes the decoded values into `out` (length size()).
  void unpack_into(double* out) const;

  const nn::Shape& shape() const { return shape_; }
  std::size_t size() const { return codes_.size(); }
  bool empty() const { return codes_.empty(); }
  bool operator==(const PackedVisual&) const = default;

 private:
  nn::Shape shape_;
  std::vector<std::uint8_t> codes_;
};

struct Transition {
  std::vector<double> state;
  PackedVisual visual;  // empty when the learner never reads pixels
  std::vector<double> action;
  double reward = 0.0;
  std::vector<double> next_state;
  PackedVisual next_visual;
  bool done = false;  // true termination only; horizon cut-offs bootstrap
};

struct DaggerSample {
  PackedVisual visual;
  std::vector<double> expert_action;
};

}  // namespace s2v::replay
