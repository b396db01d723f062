#pragma once

// Synthetic learning curves with hand-computed metric values.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "s2v/harness/curve.hpp"
#include "s2v/harness/metrics.hpp"

namespace s2v::testing {

struct MetricCase {
  std::string name;
  std::vector<std::pair<std::uint64_t, double>> points;  // (env_steps, metric)
  std::uint64_t total_steps;
  double window_frac;
  double asymptote;
  double rel;
  std::optional<std::uint64_t> converged;
  std::uint64_t threshold;
  harness::Difficulty difficulty;

  harness::LearningCurve curve() const {
    harness::LearningCurve c;
    for (auto [s, m] : points) c.append({s, static_cast<double>(s) / 1000.0, m});
    return c;
  }
};

inline std::vector<MetricCase> metric_cases() {
  using harness::Difficulty;
  std::vector<MetricCase> cases;
  {
    MetricCase c{"constant", {}, 10000, 0.03, 5.0, 0.95, 1000, 1000, Difficulty::easy};
    for (std::uint64_t s = 1000; s <= 10000; s += 1000) c.points.push_back({s, 5.0});
    cases.push_back(c);
  }
  {
    MetricCase c{"two-point window", {}, 100, 0.15, 95.0, 0.95, 100, 50, Difficulty::hard};
    for (std::uint64_t s = 10; s <= 100; s += 10) c.points.push_back({s, static_cast<double>(s)});
    cases.push_back(c);
  }
  cases.push_back({"full window",
                   {{20000, 0.2}, {40000, 0.4}, {60000, 0.6}, {80000, 0.8}, {100000, 1.0}},
                   100000, 1.0, 0.6, 0.95, 60000, 100000, Difficulty::easy});
  {
    MetricCase c{"plateau at 50k", {}, 100000, 0.03, 1.0, 0.95, 50000, 100000, Difficulty::easy};
    const double m[] = {0.1, 0.3, 0.5, 0.7, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0};
    for (int k = 0; k < 10; ++k) c.points.push_back({10000u * (k + 1), m[k]});
    cases.push_back(c);
  }
  {
    // window {80k, 90k, 100k} = {1, 1, 0.9}; bar 0.95 * 2.9 / 3 = 0.918333...
    MetricCase c{"late dip", {}, 100000, 0.25, 2.9 / 3.0, 0.95, std::nullopt, 100000, Difficulty::hard};
    const double m[] = {0.0, 0.5, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.9};
    for (int k = 0; k < 10; ++k) c.points.push_back({10000u * (k + 1), m[k]});
    cases.push_back(c);
  }
  {
    // window {175k, 200k} -> -182.5; bar -182.5 - 0.05 * 182.5 = -191.625
    MetricCase c{"negative returns", {}, 200000, 0.15, -182.5, 0.95, 125000, 100000, Difficulty::hard};
    const double m[] = {-1000, -600, -300, -200, -190, -180, -185, -180};
    for (int k = 0; k < 8; ++k) c.points.push_back({25000u * (k + 1), m[k]});
    cases.push_back(c);
  }
  {
    // window {30k, 35k, 40k} -> 2.87 / 3; bar 0.908833...; converged exactly at the threshold
    MetricCase c{"noisy", {}, 40000, 0.3, 2.87 / 3.0, 0.95, 20000, 20000, Difficulty::easy};
    const double m[] = {0.2, 0.9, 0.3, 0.95, 0.97, 0.92, 0.99, 0.96};
    for (int k = 0; k < 8; ++k) c.points.push_back({5000u * (k + 1), m[k]});
    cases.push_back(c);
  }
  {
    MetricCase c{"all zero", {}, 100000, 0.03, 0.0, 0.95, 10000, 0, Difficulty::hard};
    for (std::uint64_t s = 10000; s <= 100000; s += 10000) c.points.push_back({s, 0.0});
    cases.push_back(c);
  }
  cases.push_back({"converged at first point, threshold 0",
                   {{0, 0.96}, {1000, 0.97}, {2000, 0.99}, {3000, 1.0}},
                   3000, 0.5, 0.995, 0.95, 0, 0, Difficulty::easy});
  cases.push_back({"single point", {{50000, 0.42}}, 50000, 0.03, 0.42, 0.95, 50000, 100000, Difficulty::easy});
  return cases;
}

}  // namespace s2v::testing
