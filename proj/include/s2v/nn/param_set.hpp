#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "s2v/nn/tensor.hpp"

namespace s2v::nn {

/// Named tensors in insertion order. Iteration order is the construction
/// order, so two ParamSets built by the same code line up entry for entry.
class ParamSet {
 public:
  using Entry = std::pair<std::string, Tensor>;

  Tensor& add(const std::string& name, Tensor value);
  bool contains(const std::string& name) const { return index_.count(name) != 0; }
  Tensor& at(const std::string& name);
  const Tensor& at(const std::string& name) const;

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::size_t numel() const;

  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }
  Entry& entry(std::size_t i) { return entries_[i]; }
  const Entry& entry(std::size_t i) const { return entries_[i]; }

  /// Zero tensors with this set's names and shapes.
  ParamSet zeros_like() const;
  /// Copy every entry of `other` whose name starts with `prefix`, stripping it.
  static ParamSet extract(const ParamSet& other, const std::string& prefix);
  /// Append all entries of `other` under `prefix`.
  void merge(const ParamSet& other, const std::string& prefix);
  /// Overwrite values from a set with identical names and shapes.
  void assign(const ParamSet& other);

  bool same_layout(const ParamSet& other) const;
  bool operator==(const ParamSet& other) const { return entries_ == other.entries_; }

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace s2v::nn
