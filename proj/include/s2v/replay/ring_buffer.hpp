#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "s2v/nn/rng.hpp"

namespace s2v::replay {

/// Bounded FIFO store. Index 0 is the oldest record.
template <class Record>
class RingBuffer {
 public:
  explicit RingBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("ring buffer capacity must be positive");
    slots_.reserve(std::min<std::size_t>(capacity, 4096));
  }

  void push(Record record) {
    if (slots_.size() < capacity_) {
      slots_.push_back(std::move(record));
      return;
    }
    slots_[head_] = std::move(record);
    head_ = (head_ + 1) % capacity_;
  }

  std::size_t size() const { return slots_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return slots_.empty(); }

  const Record& operator[](std::size_t i) const {
    if (i >= slots_.size()) throw std::out_of_range("ring buffer index out of range");
    return slots_[(head_ + i) % slots_.size()];
  }

  /// Uniform draw with replacement. Throws on an empty buffer.
  std::vector<std::size_t> sample_indices(std::size_t batch, nn::Rng& rng) const {
    if (empty()) throw std::logic_error("cannot sample from an empty buffer");
    std::vector<std::size_t> idx(batch);
    for (auto& i : idx) i = rng.index(slots_.size());
    return idx;
  }

  std::vector<const Record*> sample_batch(std::size_t batch, nn::Rng& rng) const {
    std::vector<const Record*> out;
    out.reserve(batch);
    for (auto i : sample_indices(batch, rng)) out.push_back(&(*this)[i]);
    return out;
  }

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;  // oldest slot once full
  std::vector<Record> slots_;
};

}  // namespace s2v::replay
