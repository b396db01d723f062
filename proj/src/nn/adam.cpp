#include "s2v/nn/adam.hpp"

#include <cmath>

namespace s2v::nn {

AdamState AdamState::for_params(const ParamSet& params) {
  AdamState s;
  s.m = params.zeros_like();
  s.v = params.zeros_like();
  return s;
}

void adam_step(ParamSet& params, const ParamSet& grads, AdamState& state, double lr) {
  if (!(lr > 0.0)) throw std::invalid_argument("adam_step: learning rate must be positive");
  if (!params.same_layout(grads) || !params.same_layout(state.m) || !params.same_layout(state.v))
    throw std::invalid_argument("adam_step: parameter, gradient and moment layouts differ");
  for (const auto& [name, g] : grads)
    if (!g.all_finite()) throw NonFiniteError("adam_step: non-finite gradient for '" + name + "'");

  state.t += 1;
  const double t = static_cast<double>(state.t);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = params.entry(i).second;
    const Tensor& g = grads.entry(i).second;
    Tensor& m = state.m.entry(i).second;
    Tensor& v = state.v.entry(i).second;
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[j] = state.beta1 * m[j] + (1.0 - state.beta1) * g[j];
      v[j] = state.beta2 * v[j] + (1.0 - state.beta2) * g[j] * g[j];
      const double mhat = m[j] / c1;
      const double vhat = v[j] / c2;
      p[j] -= lr * mhat / (std::sqrt(vhat) + state.eps);
    }
  }
}

}  // namespace s2v::nn
