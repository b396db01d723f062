#include "s2v/nn/tensor.hpp"

#include <malloc.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "s2v/nn/param_set.hpp"

namespace s2v::nn {
namespace {

// Training allocates and frees the same few hundred KB-sized buffers every
// update. Left to its defaults glibc serves those with fresh mmaps, and the
// page faults on first touch cost more than the arithmetic.
const bool g_heap_tuned = [] {
  mallopt(M_MMAP_THRESHOLD, 512 << 20);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
  return true;
}();

}  // namespace

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) out << (i ? ", " : "") << shape[i];
  out << ']';
  return out.str();
}

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)) {
  for (auto d : shape_)
    if (d == 0) throw std::invalid_argument("tensor dimensions must be positive: " + shape_str(shape_));
  data_.assign(shape_numel(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
  for (auto d : shape_)
    if (d == 0) throw std::invalid_argument("tensor dimensions must be positive: " + shape_str(shape_));
  if (shape_numel(shape_) != data_.size())
    throw std::invalid_argument("tensor shape " + shape_str(shape_) + " does not match " +
                                std::to_string(data_.size()) + " values");
}

Tensor Tensor::reshaped(Shape shape) const {
  if (shape_numel(shape) != data_.size())
    throw std::invalid_argument("cannot reshape " + shape_str(shape_) + " to " + shape_str(shape));
  return Tensor(std::move(shape), data_);
}

void Tensor::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

// ParamSet

Tensor& ParamSet::add(const std::string& name, Tensor value) {
  if (contains(name)) throw std::invalid_argument("duplicate parameter name '" + name + "'");
  index_.emplace(name, entries_.size());
  entries_.emplace_back(name, std::move(value));
  return entries_.back().second;
}

Tensor& ParamSet::at(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("no parameter named '" + name + "'");
  return entries_[it->second].second;
}

const Tensor& ParamSet::at(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("no parameter named '" + name + "'");
  return entries_[it->second].second;
}

std::size_t ParamSet::numel() const {
  std::size_t n = 0;
  for (const auto& [_, t] : entries_) n += t.size();
  return n;
}

ParamSet ParamSet::zeros_like() const {
  ParamSet out;
  for (const auto& [name, t] : entries_) out.add(name, Tensor::zeros_like(t));
  return out;
}

ParamSet ParamSet::extract(const ParamSet& other, const std::string& prefix) {
  ParamSet out;
  for (const auto& [name, t] : other)
    if (name.compare(0, prefix.size(), prefix) == 0) out.add(name.substr(prefix.size()), t);
  return out;
}

void ParamSet::merge(const ParamSet& other, const std::string& prefix) {
  for (const auto& [name, t] : other) add(prefix + name, t);
}

void ParamSet::assign(const ParamSet& other) {
  if (!same_layout(other)) throw std::invalid_argument("parameter layouts differ");
  for (std::size_t i = 0; i < entries_.size(); ++i) entries_[i].second = other.entries_[i].second;
}

bool ParamSet::same_layout(const ParamSet& other) const {
  if (entries_.size() != other.entries_.size()) return false;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].first != other.entries_[i].first) return false;
    if (entries_[i].second.shape() != other.entries_[i].second.shape()) return false;
  }
  return true;
}

}  // namespace s2v::nn
