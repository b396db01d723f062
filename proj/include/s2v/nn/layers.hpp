#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "s2v/nn/autodiff.hpp"
#include "s2v/nn/param_set.hpp"
#include "s2v/nn/rng.hpp"

namespace s2v::nn {

enum class NetworkKind { mlp, conv_encoder, gaussian_head };

/// Architecture description shared by all network builders. Fields that do
/// not apply to a kind are ignored.
struct NetworkSpec {
  NetworkKind kind = NetworkKind::mlp;
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  std::vector<std::size_t> hidden{256, 256};
  // Scale applied to the last layer's initial weights and biases.
  double final_scale = 1.0;

  // conv_encoder only: NHWC input geometry and layer stack.
  std::size_t height = 16, width = 16, in_channels = 0;
  std::vector<std::size_t> channels{16, 32, 64};
  std::size_t kernel = 3, stride = 2, padding = 1;
  std::size_t feature_dim = 128;
};

/// Multi-layer perceptron with ReLU between layers and a linear output.
/// Parameters are named "<prefix>l<i>.w" ([in, out]) and "<prefix>l<i>.b".
class Mlp {
 public:
  Mlp() = default;
  Mlp(std::string prefix, NetworkSpec spec);

  void init(ParamSet& params, Rng& rng) const;
  Var forward(Graph& g, const ParamSet& params, Var input) const;
  /// Tape-free evaluation.
  Tensor forward(const ParamSet& params, const Tensor& input) const;

  const NetworkSpec& spec() const { return spec_; }
  const std::string& prefix() const { return prefix_; }
  std::size_t layers() const { return spec_.hidden.size() + 1; }

 private:
  std::string prefix_;
  NetworkSpec spec_;
};

/// Strided conv stack, flatten, linear projection and ReLU to a feature
/// vector. Input is NHWC [B, H, W, C].
class ConvEncoder {
 public:
  ConvEncoder() = default;
  ConvEncoder(std::string prefix, NetworkSpec spec);

  void init(ParamSet& params, Rng& rng) const;
  Var forward(Graph& g, const ParamSet& params, Var input) const;

  const NetworkSpec& spec() const { return spec_; }
  std::size_t feature_dim() const { return spec_.feature_dim; }
  std::size_t flat_dim() const;

 private:
  std::string prefix_;
  NetworkSpec spec_;
  std::vector<ConvGeometry> geometry_;
};

/// Uniform fan-in initialization: U(-1/sqrt(fan_in), 1/sqrt(fan_in)) times `scale`.
Tensor fan_in_uniform(const Shape& shape, std::size_t fan_in, Rng& rng, double scale = 1.0);

/// Converts a batch of channel-major visual observations [B, C, H, W] to NHWC.
Tensor chw_to_nhwc(const Tensor& chw);

inline constexpr double kLogStdMin = -5.0;
inline constexpr double kLogStdMax = 2.0;
inline constexpr double kTanhEps = 1e-6;

struct SquashedSample {
  Var action;    // [B, A], strictly inside (-1, 1)
  Var log_prob;  // [B, 1]
  Var pre_tanh;  // [B, A]
};

/// Reparameterized tanh-Gaussian sample: action = tanh(mean + exp(log_std) * noise).
/// log_std is clamped to [kLogStdMin, kLogStdMax]. The log-density carries the
/// change-of-variables term log(1 - tanh(u)^2 + eps) with 1 - tanh^2 evaluated
/// as sech^2 so it does not cancel for large |u|.
SquashedSample squashed_gaussian_sample(Var mean, Var log_std, const Tensor& noise);

struct ActionSample {
  std::vector<double> action;
  double log_prob = 0.0;
};
/// Single-vector convenience form.
ActionSample squashed_gaussian_sample(const std::vector<double>& mean, const std::vector<double>& log_std,
                                      const std::vector<double>& noise);

}  // namespace s2v::nn
