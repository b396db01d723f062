#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>

#include "s2v/envs/env.hpp"
#include "s2v/replay/records.hpp"
#include "s2v/replay/ring_buffer.hpp"

using namespace s2v::replay;
using s2v::nn::Rng;

namespace {

std::vector<int> contents(const RingBuffer<int>& b) {
  std::vector<int> out;
  for (std::size_t i = 0; i < b.size(); ++i) out.push_back(b[i]);
  return out;
}

}  // namespace

TEST_CASE("push evicts the oldest record at capacity") {
  RingBuffer<std::string> b(2);
  b.push("a");
  CHECK(b.size() == 1);
  b.push("b");
  b.push("c");
  REQUIRE(b.size() == 2);
  CHECK(b[0] == "b");
  CHECK(b[1] == "c");
}

TEST_CASE("order is preserved below capacity and across wraparound") {
  RingBuffer<int> b(5);
  for (int i = 0; i < 5; ++i) b.push(i);
  CHECK(contents(b) == std::vector<int>{0, 1, 2, 3, 4});
  for (int i = 5; i < 13; ++i) b.push(i);
  CHECK(contents(b) == std::vector<int>{8, 9, 10, 11, 12});
  CHECK(b.capacity() == 5);
  CHECK_THROWS_AS(b[5], std::out_of_range);
  CHECK_THROWS_AS(RingBuffer<int>(0), std::invalid_argument);
}

TEST_CASE("sampling from a single record and from an empty buffer") {
  RingBuffer<int> b(10);
  Rng rng(1);
  CHECK_THROWS_AS(b.sample_batch(4, rng), std::logic_error);
  b.push(42);
  auto batch = b.sample_batch(4, rng);
  REQUIRE(batch.size() == 4);
  for (auto* r : batch) CHECK(*r == 42);
}

TEST_CASE("sampling is deterministic given the generator state") {
  RingBuffer<int> b(100);
  for (int i = 0; i < 100; ++i) b.push(i);
  Rng r1(77), r2(77);
  CHECK(b.sample_indices(64, r1) == b.sample_indices(64, r2));
  CHECK(r1 == r2);
}

TEST_CASE("sampling is uniform within 4 binomial standard deviations") {
  constexpr std::size_t ids = 1000, draws = 100000;
  RingBuffer<int> b(ids);
  for (std::size_t i = 0; i < ids + 250; ++i) b.push(static_cast<int>(i));  // wrap so slots are rotated
  std::vector<int> count(ids + 250, 0);
  Rng rng(2024);
  for (auto* r : b.sample_batch(draws, rng)) ++count[*r];
  const double p = 1.0 / ids;
  const double mean = draws * p;
  const double sd = std::sqrt(draws * p * (1 - p));
  int outside = 0;
  for (std::size_t i = 0; i < 250; ++i) CHECK(count[i] == 0);
  for (std::size_t i = 250; i < ids + 250; ++i)
    if (std::abs(count[i] - mean) > 4 * sd) ++outside;
  CHECK(outside == 0);
}

TEST_CASE("off-policy retention across rounds") {
  constexpr int rounds = 12, n_collect = 64;
  RingBuffer<int> keep(rounds * n_collect), on_policy(n_collect);
  for (int r = 0; r < rounds; ++r)
    for (int k = 0; k < n_collect; ++k) {
      keep.push(r * n_collect + k);
      on_policy.push(r * n_collect + k);
    }
  CHECK(keep.size() == rounds * n_collect);
  CHECK(keep[0] == 0);
  CHECK(on_policy.size() == n_collect);
  CHECK(on_policy[0] == (rounds - 1) * n_collect);
}

TEST_CASE("records are immutable once stored") {
  RingBuffer<std::vector<double>> b(3);
  std::vector<double> v{1, 2, 3};
  b.push(v);
  v[0] = 9;
  CHECK(b[0] == std::vector<double>{1, 2, 3});
}

TEST_CASE("packed visuals round-trip rendered observations exactly") {
  using namespace s2v::envs;
  for (auto id : {EnvId::reach, EnvId::push, EnvId::swingup}) {
    Env env(default_config(id, 3));
    auto obs = env.reset(0);
    for (int t = 0; t < 20; ++t) {
      PackedVisual packed(obs.visual);
      CHECK(packed.unpack() == obs.visual);
      std::vector<double> a(action_dim(id), 0.3);
      obs = env.step(a).observation;
    }
  }
  s2v::nn::Tensor bad({2}, {0.0, 0.3});
  CHECK_THROWS_AS(PackedVisual{bad}, std::invalid_argument);
  s2v::nn::Tensor out_of_range({1}, {1.5});
  CHECK_THROWS_AS(PackedVisual{out_of_range}, std::invalid_argument);
}
