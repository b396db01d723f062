#pragma once

#include <cstdint>
#include <stdexcept>

#include "s2v/nn/param_set.hpp"

namespace s2v::nn {

class NonFiniteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AdamState {
  ParamSet m;
  ParamSet v;
  std::uint64_t t = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamState for_params(const ParamSet& params);
};

/// One bias-corrected Adam update in place. Throws NonFiniteError (and
/// leaves params and state untouched) if any gradient entry is not finite.
void adam_step(ParamSet& params, const ParamSet& grads, AdamState& state, double lr);

}  // namespace s2v::nn
