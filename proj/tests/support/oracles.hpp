// Test-only reference implementations. Nothing here calls into the autodiff
// tape except through the loss/gradient callbacks handed in by the caller.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "s2v/nn/layers.hpp"
#include "s2v/nn/param_set.hpp"
#include "s2v/nn/rng.hpp"

namespace s2v::testing {

using nn::ParamSet;
using nn::Tensor;

/// Straight-line MLP: plain triple loops over [in, out] weights, ReLU between
/// layers. Independent of the gemm kernels and the tape.
inline Tensor reference_mlp(const ParamSet& params, const std::string& prefix, std::size_t layers,
                            const Tensor& input) {
  std::size_t rows = input.rows();
  std::vector<double> h(input.data().begin(), input.data().end());
  std::size_t width = input.cols();
  for (std::size_t l = 0; l < layers; ++l) {
    const Tensor& w = params.at(prefix + "l" + std::to_string(l) + ".w");
    const Tensor& b = params.at(prefix + "l" + std::to_string(l) + ".b");
    const std::size_t out = w.cols();
    std::vector<double> next(rows * out);
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < out; ++j) {
        double acc = b[j];
        for (std::size_t k = 0; k < width; ++k) acc += h[i * width + k] * w[k * out + j];
        next[i * out + j] = (l + 1 < layers) ? std::max(acc, 0.0) : acc;
      }
    h = std::move(next);
    width = out;
  }
  return Tensor({rows, width}, h);
}

/// Direct (non-im2col) NHWC convolution.
inline Tensor reference_conv(const Tensor& x, const Tensor& w, const Tensor& b, std::size_t kernel,
                             std::size_t stride, std::size_t padding) {
  const std::size_t B = x.dim(0), H = x.dim(1), W = x.dim(2), C = x.dim(3), CO = w.cols();
  const std::size_t HO = (H + 2 * padding - kernel) / stride + 1, WO = (W + 2 * padding - kernel) / stride + 1;
  Tensor out({B, HO, WO, CO});
  for (std::size_t n = 0; n < B; ++n)
    for (std::size_t oy = 0; oy < HO; ++oy)
      for (std::size_t ox = 0; ox < WO; ++ox)
        for (std::size_t co = 0; co < CO; ++co) {
          double acc = b[co];
          for (std::size_t ky = 0; ky < kernel; ++ky)
            for (std::size_t kx = 0; kx < kernel; ++kx) {
              const long iy = long(oy * stride + ky) - long(padding);
              const long ix = long(ox * stride + kx) - long(padding);
              if (iy < 0 || ix < 0 || iy >= long(H) || ix >= long(W)) continue;
              for (std::size_t c = 0; c < C; ++c)
                acc += x[((n * H + iy) * W + ix) * C + c] * w[((ky * kernel + kx) * C + c) * CO + co];
            }
          out[((n * HO + oy) * WO + ox) * CO + co] = acc;
        }
  return out;
}

struct FdReport {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::size_t skipped = 0;  // entries where a ReLU kink sits inside the stencil
};

/// Central finite differences with step h against an analytic gradient.
/// Entries whose h and h/2 stencils disagree straddle a non-smooth point and
/// are skipped. Relative error is |a - f| / max(|a|, |f|, floor).
inline FdReport finite_difference_check(const std::function<double(const ParamSet&)>& loss,
                                        const ParamSet& analytic, ParamSet params, double h = 1e-5,
                                        double floor = 1e-6) {
  FdReport report;
  for (std::size_t e = 0; e < params.size(); ++e) {
    Tensor& p = params.entry(e).second;
    const Tensor& g = analytic.entry(e).second;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double orig = p[i];
      auto stencil = [&](double step) {
        p[i] = orig + step;
        const double up = loss(params);
        p[i] = orig - step;
        const double down = loss(params);
        p[i] = orig;
        return (up - down) / (2.0 * step);
      };
      const double fd = stencil(h);
      const double fd_half = stencil(h / 2);
      const double scale = std::max({std::abs(fd), std::abs(fd_half), floor});
      if (std::abs(fd - fd_half) / scale > 1e-6) {
        ++report.skipped;
        continue;
      }
      const double rel = std::abs(g[i] - fd) / std::max({std::abs(g[i]), std::abs(fd), floor});
      report.max_rel_error = std::max(report.max_rel_error, rel);
      ++report.checked;
    }
  }
  return report;
}

}  // namespace s2v::testing
