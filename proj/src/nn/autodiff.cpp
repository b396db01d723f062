#include "s2v/nn/autodiff.hpp"

#include <algorithm>
#include <cmath>

#include "s2v/nn/kernels.hpp"

namespace s2v::nn {

const Tensor& Var::value() const { return graph_->value(id_); }

Var Graph::constant(Tensor value) { return record(std::move(value), false, nullptr); }

Var Graph::param(const ParamSet& set, const std::string& name) {
  ParamKey key{&set, name};
  if (auto it = params_.find(key); it != params_.end()) return Var(this, it->second);
  const Tensor& t = set.at(name);
  Node node;
  node.ref = &t;
  node.requires_grad = frozen_.count(&set) == 0;
  nodes_.push_back(std::move(node));
  params_.emplace(std::move(key), nodes_.size() - 1);
  return Var(this, nodes_.size() - 1);
}

Var Graph::record(Tensor value, bool requires_grad, Backward backward) {
  if (backward_done_) throw std::logic_error("graph already differentiated; build a new one");
  Node node;
  node.value = std::move(value);
  node.requires_grad = requires_grad;
  if (requires_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

const Tensor& Graph::value(std::size_t id) const {
  const Node& n = nodes_[id];
  return n.ref ? *n.ref : n.value;
}

Tensor& Graph::grad(std::size_t id) {
  Node& n = nodes_[id];
  if (n.grad.shape().empty()) n.grad = Tensor::zeros_like(value(id));
  return n.grad;
}

void Graph::backward(Var loss) {
  if (&loss.graph() != this) throw std::invalid_argument("loss belongs to another graph");
  if (value(loss.id()).size() != 1)
    throw ShapeError("loss must be a scalar, got shape " + shape_str(value(loss.id()).shape()));
  if (backward_done_) throw std::logic_error("backward already ran on this graph");
  backward_done_ = true;
  if (!nodes_[loss.id()].requires_grad) return;
  grad(loss.id())[0] = 1.0;
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.backward && !n.grad.shape().empty()) n.backward(*this, i);
  }
}

ParamSet Graph::param_grads(const ParamSet& params) const {
  if (frozen_.count(&params) != 0)
    throw std::logic_error("gradient requested for a frozen parameter set");
  ParamSet out;
  for (const auto& [name, t] : params) {
    auto it = params_.find(ParamKey{&params, name});
    if (it != params_.end() && !nodes_[it->second].grad.shape().empty())
      out.add(name, nodes_[it->second].grad);
    else
      out.add(name, Tensor::zeros_like(t));
  }
  return out;
}

ParamSet grad(Var loss, const ParamSet& params) {
  Graph& g = loss.graph();
  if (!g.backward_done()) g.backward(loss);
  return g.param_grads(params);
}

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ShapeError(what);
}

Graph& same_graph(Var a, Var b) {
  if (&a.graph() != &b.graph()) throw std::invalid_argument("operands live on different graphs");
  return a.graph();
}

void require_2d(Var x, const char* op) {
  require(x.shape().size() == 2, std::string(op) + ": expected a rank-2 tensor, got " + shape_str(x.shape()));
}

// Elementwise unary op. `df(x, y)` is the local derivative given input and output.
template <class F, class DF>
Var unary(Var x, F f, DF df) {
  Graph& g = x.graph();
  const Tensor& xv = x.value();
  Tensor out(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = f(xv[i]);
  const std::size_t xi = x.id();
  return g.record(std::move(out), g.requires_grad(xi), [xi, df](Graph& g, std::size_t self) {
    const Tensor& xv = g.value(xi);
    const Tensor& yv = g.value(self);
    const Tensor& gy = g.grad(self);
    Tensor& gx = g.grad(xi);
    for (std::size_t i = 0; i < xv.size(); ++i) gx[i] += gy[i] * df(xv[i], yv[i]);
  });
}

// Elementwise binary op with optional single-element broadcast on either side.
template <class F, class DA, class DB>
Var binary(Var a, Var b, const char* name, F f, DA da, DB db) {
  Graph& g = same_graph(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  const bool a_scalar = av.size() == 1 && (bv.size() != 1 || av.rank() < bv.rank());
  const bool b_scalar = !a_scalar && bv.size() == 1 && av.shape() != bv.shape();
  require(a_scalar || b_scalar || av.shape() == bv.shape(),
          std::string(name) + ": shapes " + shape_str(av.shape()) + " and " + shape_str(bv.shape()) + " differ");
  const Shape& shape = a_scalar ? bv.shape() : av.shape();
  Tensor out(shape);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(av[a_scalar ? 0 : i], bv[b_scalar ? 0 : i]);
  const std::size_t ai = a.id(), bi = b.id();
  const bool rg = g.requires_grad(ai) || g.requires_grad(bi);
  return g.record(std::move(out), rg, [=](Graph& g, std::size_t self) {
    const Tensor& av = g.value(ai);
    const Tensor& bv = g.value(bi);
    const Tensor& gy = g.grad(self);
    if (g.requires_grad(ai)) {
      Tensor& ga = g.grad(ai);
      for (std::size_t i = 0; i < gy.size(); ++i)
        ga[a_scalar ? 0 : i] += gy[i] * da(av[a_scalar ? 0 : i], bv[b_scalar ? 0 : i]);
    }
    if (g.requires_grad(bi)) {
      Tensor& gb = g.grad(bi);
      for (std::size_t i = 0; i < gy.size(); ++i)
        gb[b_scalar ? 0 : i] += gy[i] * db(av[a_scalar ? 0 : i], bv[b_scalar ? 0 : i]);
    }
  });
}

}  // namespace

Var matmul(Var x, Var w) {
  Graph& g = same_graph(x, w);
  require_2d(x, "matmul");
  require_2d(w, "matmul");
  const std::size_t m = x.rows(), k = x.cols(), n = w.cols();
  require(w.rows() == k, "matmul: input width " + std::to_string(k) + " does not match weight rows " +
                             std::to_string(w.rows()));
  Tensor out({m, n});
  gemm_accumulate(m, k, n, x.value().raw(), w.value().raw(), out.raw());
  const std::size_t xi = x.id(), wi = w.id();
  const bool rg = g.requires_grad(xi) || g.requires_grad(wi);
  return g.record(std::move(out), rg, [=](Graph& g, std::size_t self) {
    const Tensor& gy = g.grad(self);
    if (g.requires_grad(xi)) {
      std::vector<double> wt(k * n);
      transpose(k, n, g.value(wi).raw(), wt.data());
      gemm_accumulate(m, n, k, gy.raw(), wt.data(), g.grad(xi).raw());
    }
    if (g.requires_grad(wi)) {
      gemm_tn_accumulate(m, k, n, g.value(xi).raw(), gy.raw(), g.grad(wi).raw());
    }
  });
}

Var linear(Var x, Var w, Var b) {
  Graph& g = same_graph(x, w);
  require(b.value().size() == w.cols(), "linear: bias of " + std::to_string(b.value().size()) +
                                            " entries for " + std::to_string(w.cols()) + " outputs");
  Var y = matmul(x, w);
  Tensor out = y.value();
  const std::size_t m = out.rows(), n = out.cols();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] += bv[j];
  const std::size_t yi = y.id(), bi = b.id();
  const bool rg = g.requires_grad(yi) || g.requires_grad(bi);
  return g.record(std::move(out), rg, [=](Graph& g, std::size_t self) {
    const Tensor& gy = g.grad(self);
    if (g.requires_grad(yi)) {
      Tensor& gm = g.grad(yi);
      for (std::size_t i = 0; i < gy.size(); ++i) gm[i] += gy[i];
    }
    if (g.requires_grad(bi)) {
      Tensor& gb = g.grad(bi);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) gb[j] += gy[i * n + j];
    }
  });
}

Var relu(Var x) {
  return unary(x, [](double v) { return v > 0.0 ? v : 0.0; },
               [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Var tanh(Var x) {
  return unary(x, [](double v) { return std::tanh(v); }, [](double, double y) { return 1.0 - y * y; });
}

Var exp(Var x) {
  return unary(x, [](double v) { return std::exp(v); }, [](double, double y) { return y; });
}

Var log(Var x) {
  return unary(x, [](double v) { return std::log(v); }, [](double v, double) { return 1.0 / v; });
}

Var square(Var x) {
  return unary(x, [](double v) { return v * v; }, [](double v, double) { return 2.0 * v; });
}

Var neg(Var x) {
  return unary(x, [](double v) { return -v; }, [](double, double) { return -1.0; });
}

Var scale(Var x, double factor) {
  return unary(x, [factor](double v) { return factor * v; }, [factor](double, double) { return factor; });
}

Var shift(Var x, double offset) {
  return unary(x, [offset](double v) { return v + offset; }, [](double, double) { return 1.0; });
}

Var clamp(Var x, double lo, double hi) {
  return unary(x, [lo, hi](double v) { return std::clamp(v, lo, hi); },
               [lo, hi](double v, double) { return (v >= lo && v <= hi) ? 1.0 : 0.0; });
}

Var add(Var a, Var b) {
  return binary(a, b, "add", [](double x, double y) { return x + y; },
                [](double, double) { return 1.0; }, [](double, double) { return 1.0; });
}

Var sub(Var a, Var b) {
  return binary(a, b, "sub", [](double x, double y) { return x - y; },
                [](double, double) { return 1.0; }, [](double, double) { return -1.0; });
}

Var mul(Var a, Var b) {
  return binary(a, b, "mul", [](double x, double y) { return x * y; },
                [](double, double y) { return y; }, [](double x, double) { return x; });
}

// Ties route the gradient to the first operand.
Var minimum(Var a, Var b) {
  return binary(a, b, "minimum", [](double x, double y) { return x <= y ? x : y; },
                [](double x, double y) { return x <= y ? 1.0 : 0.0; },
                [](double x, double y) { return x <= y ? 0.0 : 1.0; });
}

Var log_tanh_jacobian(Var u, double eps) {
  return unary(
      u,
      [eps](double v) {
        const double c = std::cosh(v);
        return std::log(1.0 / (c * c) + eps);
      },
      [eps](double v, double) {
        const double c = std::cosh(v);
        const double sech2 = 1.0 / (c * c);
        return -2.0 * std::tanh(v) * sech2 / (sech2 + eps);
      });
}

Var sum(Var x) {
  Graph& g = x.graph();
  double total = 0.0;
  for (double v : x.value().data()) total += v;
  const std::size_t xi = x.id();
  return g.record(Tensor::scalar(total), g.requires_grad(xi), [xi](Graph& g, std::size_t self) {
    const double gy = g.grad(self)[0];
    Tensor& gx = g.grad(xi);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += gy;
  });
}

Var mean(Var x) { return scale(sum(x), 1.0 / static_cast<double>(x.value().size())); }

Var sum_cols(Var x) {
  Graph& g = x.graph();
  require_2d(x, "sum_cols");
  const std::size_t m = x.rows(), n = x.cols();
  Tensor out({m, 1});
  const Tensor& xv = x.value();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i] += xv[i * n + j];
  const std::size_t xi = x.id();
  return g.record(std::move(out), g.requires_grad(xi), [=](Graph& g, std::size_t self) {
    const Tensor& gy = g.grad(self);
    Tensor& gx = g.grad(xi);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) gx[i * n + j] += gy[i];
  });
}

Var columns(Var x, std::size_t begin, std::size_t end) {
  Graph& g = x.graph();
  require_2d(x, "columns");
  const std::size_t m = x.rows(), n = x.cols();
  require(begin < end && end <= n, "columns: range [" + std::to_string(begin) + ", " +
                                       std::to_string(end) + ") outside " + std::to_string(n) + " columns");
  const std::size_t w = end - begin;
  Tensor out({m, w});
  const Tensor& xv = x.value();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < w; ++j) out[i * w + j] = xv[i * n + begin + j];
  const std::size_t xi = x.id();
  return g.record(std::move(out), g.requires_grad(xi), [=](Graph& g, std::size_t self) {
    const Tensor& gy = g.grad(self);
    Tensor& gx = g.grad(xi);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < w; ++j) gx[i * n + begin + j] += gy[i * w + j];
  });
}

Var concat_cols(Var a, Var b) {
  Graph& g = same_graph(a, b);
  require_2d(a, "concat_cols");
  require_2d(b, "concat_cols");
  require(a.rows() == b.rows(), "concat_cols: row counts " + std::to_string(a.rows()) + " and " +
                                    std::to_string(b.rows()) + " differ");
  const std::size_t m = a.rows(), na = a.cols(), nb = b.cols(), n = na + nb;
  Tensor out({m, n});
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < m; ++i) {
    std::copy_n(av.raw() + i * na, na, out.raw() + i * n);
    std::copy_n(bv.raw() + i * nb, nb, out.raw() + i * n + na);
  }
  const std::size_t ai = a.id(), bi = b.id();
  const bool rg = g.requires_grad(ai) || g.requires_grad(bi);
  return g.record(std::move(out), rg, [=](Graph& g, std::size_t self) {
    const Tensor& gy = g.grad(self);
    if (g.requires_grad(ai)) {
      Tensor& ga = g.grad(ai);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < na; ++j) ga[i * na + j] += gy[i * n + j];
    }
    if (g.requires_grad(bi)) {
      Tensor& gb = g.grad(bi);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < nb; ++j) gb[i * nb + j] += gy[i * n + na + j];
    }
  });
}

Var reshape(Var x, Shape shape) {
  Graph& g = x.graph();
  require(shape_numel(shape) == x.value().size(),
          "reshape: cannot view " + shape_str(x.shape()) + " as " + shape_str(shape));
  const std::size_t xi = x.id();
  return g.record(x.value().reshaped(std::move(shape)), g.requires_grad(xi),
                  [xi](Graph& g, std::size_t self) {
                    const Tensor& gy = g.grad(self);
                    Tensor& gx = g.grad(xi);
                    for (std::size_t i = 0; i < gy.size(); ++i) gx[i] += gy[i];
                  });
}

Var detach(Var x) { return x.graph().constant(x.value()); }

Var conv2d(Var x, Var w, Var b, const ConvGeometry& geom) {
  Graph& g = same_graph(x, w);
  const Shape& xs = x.shape();
  require(xs.size() == 4 && xs[1] == geom.height && xs[2] == geom.width && xs[3] == geom.in_channels,
          "conv2d: input " + shape_str(xs) + " does not match geometry [B, " + std::to_string(geom.height) +
              ", " + std::to_string(geom.width) + ", " + std::to_string(geom.in_channels) + "]");
  const std::size_t patch = geom.kernel * geom.kernel * geom.in_channels;
  require(w.shape().size() == 2 && w.rows() == patch,
          "conv2d: weight " + shape_str(w.shape()) + " expects " + std::to_string(patch) + " rows");
  const std::size_t cout = w.cols();
  require(b.value().size() == cout, "conv2d: bias size does not match output channels");
  const std::size_t batch = xs[0], ho = geom.out_height(), wo = geom.out_width();
  const std::size_t rows = batch * ho * wo;

  // im2col; out-of-bounds taps stay zero.
  std::vector<double> col(rows * patch, 0.0);
  const Tensor& xv = x.value();
  const std::size_t H = geom.height, W = geom.width, C = geom.in_channels, K = geom.kernel;
  for (std::size_t n = 0; n < batch; ++n)
    for (std::size_t oy = 0; oy < ho; ++oy)
      for (std::size_t ox = 0; ox < wo; ++ox) {
        double* dst = col.data() + ((n * ho + oy) * wo + ox) * patch;
        for (std::size_t ky = 0; ky < K; ++ky) {
          const long iy = static_cast<long>(oy * geom.stride + ky) - static_cast<long>(geom.padding);
          if (iy < 0 || iy >= static_cast<long>(H)) continue;
          for (std::size_t kx = 0; kx < K; ++kx) {
            const long ix = static_cast<long>(ox * geom.stride + kx) - static_cast<long>(geom.padding);
            if (ix < 0 || ix >= static_cast<long>(W)) continue;
            const double* src = xv.raw() + ((n * H + iy) * W + ix) * C;
            std::copy_n(src, C, dst + (ky * K + kx) * C);
          }
        }
      }

  Tensor out({batch, ho, wo, cout});
  const Tensor& bv = b.value();
  for (std::size_t r = 0; r < rows; ++r) std::copy_n(bv.raw(), cout, out.raw() + r * cout);
  gemm_accumulate(rows, patch, cout, col.data(), w.value().raw(), out.raw());

  const std::size_t xi = x.id(), wi = w.id(), bi = b.id();
  const bool rg = g.requires_grad(xi) || g.requires_grad(wi) || g.requires_grad(bi);
  return g.record(std::move(out), rg,
                  [=, col = std::move(col)](Graph& g, std::size_t self) {
                    const Tensor& gy = g.grad(self);
                    if (g.requires_grad(bi)) {
                      Tensor& gb = g.grad(bi);
                      for (std::size_t r = 0; r < rows; ++r)
                        for (std::size_t c = 0; c < cout; ++c) gb[c] += gy[r * cout + c];
                    }
                    if (g.requires_grad(wi)) {
                      gemm_tn_accumulate(rows, patch, cout, col.data(), gy.raw(), g.grad(wi).raw());
                    }
                    if (g.requires_grad(xi)) {
                      std::vector<double> wt(patch * cout);
                      transpose(patch, cout, g.value(wi).raw(), wt.data());
                      std::vector<double> dcol(rows * patch, 0.0);
                      gemm_accumulate(rows, cout, patch, gy.raw(), wt.data(), dcol.data());
                      Tensor& gx = g.grad(xi);
                      for (std::size_t n = 0; n < batch; ++n)
                        for (std::size_t oy = 0; oy < ho; ++oy)
                          for (std::size_t ox = 0; ox < wo; ++ox) {
                            const double* src = dcol.data() + ((n * ho + oy) * wo + ox) * patch;
                            for (std::size_t ky = 0; ky < K; ++ky) {
                              const long iy = static_cast<long>(oy * geom.stride + ky) -
                                              static_cast<long>(geom.padding);
                              if (iy < 0 || iy >= static_cast<long>(H)) continue;
                              for (std::size_t kx = 0; kx < K; ++kx) {
                                const long ix = static_cast<long>(ox * geom.stride + kx) -
                                                static_cast<long>(geom.padding);
                                if (ix < 0 || ix >= static_cast<long>(W)) continue;
                                double* dst = gx.raw() + ((n * H + iy) * W + ix) * C;
                                const double* s = src + (ky * K + kx) * C;
                                for (std::size_t c = 0; c < C; ++c) dst[c] += s[c];
                              }
                            }
                          }
                    }
                  });
}

}  // namespace s2v::nn
