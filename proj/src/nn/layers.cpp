#include "s2v/nn/layers.hpp"

#include <cmath>
#include <numbers>

namespace s2v::nn {
namespace {

std::string layer_name(const std::string& prefix, std::size_t i) { return prefix + "l" + std::to_string(i); }

const Tensor& layer_param(const ParamSet& params, const std::string& name) {
  if (!params.contains(name)) throw ShapeError("missing parameter '" + name + "'");
  return params.at(name);
}

}  // namespace

Tensor fan_in_uniform(const Shape& shape, std::size_t fan_in, Rng& rng, double scale) {
  const double bound = scale / std::sqrt(static_cast<double>(fan_in));
  Tensor t(shape);
  for (auto& v : t.data()) v = rng.uniform(-bound, bound);
  return t;
}

Tensor chw_to_nhwc(const Tensor& chw) {
  if (chw.rank() != 4) throw ShapeError("chw_to_nhwc: expected [B, C, H, W], got " + shape_str(chw.shape()));
  const std::size_t B = chw.dim(0), C = chw.dim(1), H = chw.dim(2), W = chw.dim(3);
  Tensor out({B, H, W, C});
  for (std::size_t n = 0; n < B; ++n)
    for (std::size_t c = 0; c < C; ++c)
      for (std::size_t y = 0; y < H; ++y)
        for (std::size_t x = 0; x < W; ++x)
          out[((n * H + y) * W + x) * C + c] = chw[((n * C + c) * H + y) * W + x];
  return out;
}

// Mlp

Mlp::Mlp(std::string prefix, NetworkSpec spec) : prefix_(std::move(prefix)), spec_(std::move(spec)) {
  if (spec_.in_dim == 0 || spec_.out_dim == 0) throw ShapeError("mlp '" + prefix_ + "': zero-width input or output");
}

void Mlp::init(ParamSet& params, Rng& rng) const {
  std::size_t in = spec_.in_dim;
  for (std::size_t i = 0; i < layers(); ++i) {
    const bool last = i + 1 == layers();
    const std::size_t out = last ? spec_.out_dim : spec_.hidden[i];
    const double s = last ? spec_.final_scale : 1.0;
    params.add(layer_name(prefix_, i) + ".w", fan_in_uniform({in, out}, in, rng, s));
    params.add(layer_name(prefix_, i) + ".b", fan_in_uniform({out}, in, rng, s));
    in = out;
  }
}

Var Mlp::forward(Graph& g, const ParamSet& params, Var input) const {
  Var h = input;
  for (std::size_t i = 0; i < layers(); ++i) {
    const std::string name = layer_name(prefix_, i);
    const Tensor& w = layer_param(params, name + ".w");
    if (h.shape().size() != 2 || h.cols() != w.rows())
      throw ShapeError("mlp layer '" + name + "' expects input width " + std::to_string(w.rows()) + ", got " +
                       shape_str(h.shape()));
    h = linear(h, g.param(params, name + ".w"), g.param(params, name + ".b"));
    if (i + 1 < layers()) h = relu(h);
  }
  return h;
}

Tensor Mlp::forward(const ParamSet& params, const Tensor& input) const {
  Graph g;
  return forward(g, params, g.constant(input)).value();
}

// ConvEncoder

ConvEncoder::ConvEncoder(std::string prefix, NetworkSpec spec) : prefix_(std::move(prefix)), spec_(std::move(spec)) {
  std::size_t h = spec_.height, w = spec_.width, c = spec_.in_channels;
  if (c == 0) throw ShapeError("conv encoder '" + prefix_ + "': zero input channels");
  for (auto out : spec_.channels) {
    ConvGeometry geom{h, w, c, spec_.kernel, spec_.stride, spec_.padding};
    if (h + 2 * spec_.padding < spec_.kernel || w + 2 * spec_.padding < spec_.kernel)
      throw ShapeError("conv encoder '" + prefix_ + "': input too small for kernel");
    geometry_.push_back(geom);
    h = geom.out_height();
    w = geom.out_width();
    c = out;
  }
}

std::size_t ConvEncoder::flat_dim() const {
  const auto& last = geometry_.back();
  return last.out_height() * last.out_width() * spec_.channels.back();
}

void ConvEncoder::init(ParamSet& params, Rng& rng) const {
  for (std::size_t i = 0; i < geometry_.size(); ++i) {
    const auto& geom = geometry_[i];
    const std::size_t fan_in = geom.kernel * geom.kernel * geom.in_channels;
    const std::string name = prefix_ + "conv" + std::to_string(i);
    params.add(name + ".w", fan_in_uniform({fan_in, spec_.channels[i]}, fan_in, rng));
    params.add(name + ".b", fan_in_uniform({spec_.channels[i]}, fan_in, rng));
  }
  params.add(prefix_ + "proj.w", fan_in_uniform({flat_dim(), spec_.feature_dim}, flat_dim(), rng));
  params.add(prefix_ + "proj.b", fan_in_uniform({spec_.feature_dim}, flat_dim(), rng));
}

Var ConvEncoder::forward(Graph& g, const ParamSet& params, Var input) const {
  Var h = input;
  for (std::size_t i = 0; i < geometry_.size(); ++i) {
    const std::string name = prefix_ + "conv" + std::to_string(i);
    layer_param(params, name + ".w");
    try {
      h = relu(conv2d(h, g.param(params, name + ".w"), g.param(params, name + ".b"), geometry_[i]));
    } catch (const ShapeError& e) {
      throw ShapeError("conv layer '" + name + "': " + e.what());
    }
  }
  h = reshape(h, {h.shape()[0], flat_dim()});
  layer_param(params, prefix_ + "proj.w");
  return relu(linear(h, g.param(params, prefix_ + "proj.w"), g.param(params, prefix_ + "proj.b")));
}

// Squashed Gaussian

SquashedSample squashed_gaussian_sample(Var mean, Var log_std, const Tensor& noise) {
  if (mean.shape() != log_std.shape() || mean.shape() != noise.shape())
    throw ShapeError("squashed_gaussian_sample: mean " + shape_str(mean.shape()) + ", log_std " +
                     shape_str(log_std.shape()) + ", noise " + shape_str(noise.shape()) + " must agree");
  Graph& g = mean.graph();
  Var eps = g.constant(noise);
  Var ls = clamp(log_std, kLogStdMin, kLogStdMax);
  Var u = mean + exp(ls) * eps;
  // tanh rounds to exactly +-1 for |u| > ~19; keep actions strictly inside.
  const double edge = std::nextafter(1.0, 0.0);
  Var action = clamp(tanh(u), -edge, edge);

  Tensor base(noise.shape());
  const double half_log_2pi = 0.5 * std::log(2.0 * std::numbers::pi);
  for (std::size_t i = 0; i < noise.size(); ++i) base[i] = -0.5 * noise[i] * noise[i] - half_log_2pi;
  Var gauss = g.constant(std::move(base)) - ls;
  Var per_dim = gauss - log_tanh_jacobian(u, kTanhEps);
  Var log_prob = per_dim.shape().size() == 2 ? sum_cols(per_dim) : sum(per_dim);
  return {action, log_prob, u};
}

ActionSample squashed_gaussian_sample(const std::vector<double>& mean, const std::vector<double>& log_std,
                                      const std::vector<double>& noise) {
  Graph g;
  const std::size_t n = mean.size();
  auto row = [n](const std::vector<double>& v) { return Tensor({1, n}, v); };
  if (log_std.size() != n || noise.size() != n)
    throw ShapeError("squashed_gaussian_sample: mismatched vector lengths");
  auto s = squashed_gaussian_sample(g.constant(row(mean)), g.constant(row(log_std)), row(noise));
  return {s.action.value().vec(), s.log_prob.value()[0]};
}

}  // namespace s2v::nn
