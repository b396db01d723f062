#include "s2v/replay/records.hpp"

#include <cmath>
#include <stdexcept>

namespace s2v::replay {
namespace {
constexpr double kLevels = 254.0;
}

PackedVisual::PackedVisual(const nn::Tensor& visual) : shape_(visual.shape()), codes_(visual.size()) {
  for (std::size_t i = 0; i < visual.size(); ++i) {
    const double scaled = visual[i] * kLevels;
    const double code = std::round(scaled);
    if (!(code >= 0.0 && code <= kLevels) || code != scaled)
      throw std::invalid_argument("visual value " + std::to_string(visual[i]) + " is not on the 1/254 grid");
    codes_[i] = static_cast<std::uint8_t>(code);
  }
}

void PackedVisual::unpack_into(double* out) const {
  for (std::size_t i = 0; i < codes_.size(); ++i) out[i] = codes_[i] / kLevels;
}

nn::Tensor PackedVisual::unpack() const {
  nn::Tensor t(shape_);
  unpack_into(t.raw());
  return t;
}

}  // namespace s2v::replay
