#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "s2v/nn/param_set.hpp"
#include "s2v/nn/tensor.hpp"

namespace s2v::nn {

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class Graph;

/// Handle to a value recorded on a Graph.
class Var {
 public:
  Var() = default;
  Var(Graph* graph, std::size_t id) : graph_(graph), id_(id) {}

  Graph& graph() const { return *graph_; }
  std::size_t id() const { return id_; }
  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  bool valid() const { return graph_ != nullptr; }

 private:
  Graph* graph_ = nullptr;
  std::size_t id_ = 0;
};

/// Tape for reverse-mode differentiation. Every op appends a node holding its
/// value and, when any input needs a gradient, a closure that pushes the
/// output gradient back to its inputs. Nodes are only ever appended, so the
/// tape order is a valid topological order.
class Graph {
 public:
  using Backward = std::function<void(Graph&, std::size_t self)>;

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(Tensor value);
  /// Leaf bound to a parameter. The tensor is referenced, not copied, and
  /// must outlive the graph. Repeated calls return the same node.
  Var param(const ParamSet& set, const std::string& name);
  /// Parameters of a frozen set enter the graph as constants.
  void freeze(const ParamSet& set) { frozen_.insert(&set); }

  Var record(Tensor value, bool requires_grad, Backward backward);

  const Tensor& value(std::size_t id) const;
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  /// Gradient buffer of a node, allocated on first use.
  Tensor& grad(std::size_t id);
  bool has_grad(std::size_t id) const { return !nodes_[id].grad.shape().empty(); }

  /// Reverse sweep from a scalar node. Runs at most once per graph.
  void backward(Var loss);
  bool backward_done() const { return backward_done_; }
  std::size_t size() const { return nodes_.size(); }

  /// Gradient of every entry of `params` that was bound on this graph.
  /// Entries not on the path to the loss get zeros.
  ParamSet param_grads(const ParamSet& params) const;

 private:
  struct Node {
    Tensor value;
    const Tensor* ref = nullptr;
    Tensor grad;
    bool requires_grad = false;
    Backward backward;
  };
  struct ParamKey {
    const ParamSet* set;
    std::string name;
    bool operator==(const ParamKey&) const = default;
  };
  struct ParamKeyHash {
    std::size_t operator()(const ParamKey& k) const {
      return std::hash<const void*>()(k.set) ^ (std::hash<std::string>()(k.name) << 1);
    }
  };

  std::vector<Node> nodes_;
  std::unordered_map<ParamKey, std::size_t, ParamKeyHash> params_;
  std::unordered_set<const ParamSet*> frozen_;
  bool backward_done_ = false;
};

/// Gradients of a scalar loss with respect to `params`, shape-matched,
/// zero for parameters off the path. Throws ShapeError for non-scalar loss.
ParamSet grad(Var loss, const ParamSet& params);

// Ops. Shapes are checked eagerly; mismatches throw ShapeError.

Var matmul(Var x, Var w);
Var linear(Var x, Var w, Var b);
Var relu(Var x);
Var tanh(Var x);
Var exp(Var x);
Var log(Var x);
Var square(Var x);
Var neg(Var x);
Var add(Var a, Var b);  // same shape, or one side has a single element
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var x, double factor);
Var shift(Var x, double offset);
Var clamp(Var x, double lo, double hi);
Var minimum(Var a, Var b);
/// log(1 - tanh(u)^2 + eps), with 1 - tanh^2 computed as 1 / cosh^2.
Var log_tanh_jacobian(Var u, double eps);
Var sum(Var x);
Var mean(Var x);
Var sum_cols(Var x);  // [B, N] -> [B, 1]
Var columns(Var x, std::size_t begin, std::size_t end);
Var concat_cols(Var a, Var b);
Var reshape(Var x, Shape shape);
Var detach(Var x);

struct ConvGeometry {
  std::size_t height = 0, width = 0, in_channels = 0;
  std::size_t kernel = 3, stride = 1, padding = 0;
  std::size_t out_height() const { return (height + 2 * padding - kernel) / stride + 1; }
  std::size_t out_width() const { return (width + 2 * padding - kernel) / stride + 1; }
};

/// 2-D convolution on NHWC input [B, H, W, C] with weights
/// [kernel*kernel*C, C_out] (row order: ky, kx, c). Output is NHWC.
Var conv2d(Var x, Var w, Var b, const ConvGeometry& geom);

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(Var a, Var b) { return mul(a, b); }

}  // namespace s2v::nn
