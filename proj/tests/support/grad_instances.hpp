// Random (network, input, loss) triples for gradient checking.
#pragma once

#include <functional>
#include <string>

#include "s2v/nn/autodiff.hpp"
#include "s2v/nn/layers.hpp"

namespace s2v::testing {

struct GradInstance {
  std::string label;
  nn::ParamSet params;
  std::function<nn::Var(nn::Graph&, const nn::ParamSet&)> build;

  double loss(const nn::ParamSet& p) const {
    nn::Graph g;
    return build(g, p).value()[0];
  }
  nn::ParamSet analytic() const {
    nn::Graph g;
    return nn::grad(build(g, params), params);
  }
};

inline GradInstance make_grad_instance(std::uint64_t seed) {
  using namespace s2v::nn;
  Rng rng(seed);
  GradInstance inst;
  const std::size_t batch = 1 + rng.index(4);
  auto hidden = [&rng] {
    std::vector<std::size_t> h(1 + rng.index(2));
    for (auto& v : h) v = 3 + rng.index(6);
    return h;
  };
  switch (seed % 5) {
    case 0: {  // MLP regression
      NetworkSpec spec{.in_dim = 2 + rng.index(5), .out_dim = 1 + rng.index(4), .hidden = hidden()};
      Mlp mlp("f.", spec);
      mlp.init(inst.params, rng);
      Tensor x = rng.normal_tensor({batch, spec.in_dim});
      Tensor y = rng.normal_tensor({batch, spec.out_dim});
      inst.label = "mlp+mse";
      inst.build = [mlp, x, y](Graph& g, const ParamSet& p) {
        return mean(square(mlp.forward(g, p, g.constant(x)) - g.constant(y)));
      };
      break;
    }
    case 1: {  // squashed Gaussian policy objective
      const std::size_t act = 1 + rng.index(3);
      NetworkSpec spec{.in_dim = 2 + rng.index(5), .out_dim = 2 * act, .hidden = hidden()};
      Mlp mlp("pi.", spec);
      mlp.init(inst.params, rng);
      inst.params.add("log_alpha", Tensor::scalar(rng.normal() * 0.5));
      Tensor x = rng.normal_tensor({batch, spec.in_dim});
      Tensor noise = rng.normal_tensor({batch, act});
      Tensor w = rng.normal_tensor({batch, act});
      inst.label = "gaussian-policy";
      inst.build = [mlp, x, noise, w, act](Graph& g, const ParamSet& p) {
        Var out = mlp.forward(g, p, g.constant(x));
        auto s = squashed_gaussian_sample(columns(out, 0, act), columns(out, act, 2 * act), noise);
        Var alpha = exp(g.param(p, "log_alpha"));
        return mean(alpha * s.log_prob) - mean(s.action * g.constant(w));
      };
      break;
    }
    case 2: {  // twin critic with min
      const std::size_t obs = 2 + rng.index(4), act = 1 + rng.index(2);
      NetworkSpec spec{.in_dim = obs + act, .out_dim = 1, .hidden = hidden()};
      Mlp q1("q1.", spec), q2("q2.", spec);
      q1.init(inst.params, rng);
      q2.init(inst.params, rng);
      Tensor o = rng.normal_tensor({batch, obs});
      Tensor a = rng.normal_tensor({batch, act});
      Tensor y = rng.normal_tensor({batch, 1});
      inst.label = "twin-critic";
      inst.build = [q1, q2, o, a, y](Graph& g, const ParamSet& p) {
        Var in = concat_cols(g.constant(o), g.constant(a));
        Var q = minimum(q1.forward(g, p, in), q2.forward(g, p, in));
        return mean(square(q - g.constant(y)));
      };
      break;
    }
    case 3: {  // conv encoder + head
      NetworkSpec enc_spec{.kind = NetworkKind::conv_encoder};
      enc_spec.height = 5 + rng.index(3);
      enc_spec.width = 5 + rng.index(3);
      enc_spec.in_channels = 1 + rng.index(3);
      enc_spec.channels = {2 + rng.index(2), 2 + rng.index(3)};
      enc_spec.feature_dim = 3 + rng.index(4);
      ConvEncoder enc("enc.", enc_spec);
      enc.init(inst.params, rng);
      NetworkSpec head_spec{.in_dim = enc_spec.feature_dim, .out_dim = 1 + rng.index(2), .hidden = {4}};
      Mlp head("head.", head_spec);
      head.init(inst.params, rng);
      Tensor x = rng.normal_tensor({batch, enc_spec.height, enc_spec.width, enc_spec.in_channels});
      Tensor y = rng.normal_tensor({batch, head_spec.out_dim});
      inst.label = "conv+mse";
      inst.build = [enc, head, x, y](Graph& g, const ParamSet& p) {
        Var out = tanh(head.forward(g, p, enc.forward(g, p, g.constant(x))));
        return mean(square(out - g.constant(y)));
      };
      break;
    }
    default: {  // temperature loss shape: scalar parameter times detached statistics
      NetworkSpec spec{.in_dim = 2 + rng.index(3), .out_dim = 2, .hidden = hidden()};
      Mlp mlp("f.", spec);
      mlp.init(inst.params, rng);
      inst.params.add("log_alpha", Tensor::scalar(rng.normal()));
      Tensor x = rng.normal_tensor({batch, spec.in_dim});
      inst.label = "temperature";
      inst.build = [mlp, x](Graph& g, const ParamSet& p) {
        Var h = mlp.forward(g, p, g.constant(x));
        Var stat = shift(sum_cols(log(shift(square(h), 1.0))), 0.5);
        return neg(mean(g.param(p, "log_alpha") * stat)) + mean(exp(clamp(h, -1.0, 1.0)));
      };
      break;
    }
  }
  return inst;
}

}  // namespace s2v::testing
