#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "s2v/harness/curve.hpp"

namespace s2v::harness {

/// Mean metric over points with env_steps >= (1 - window_frac) * total_steps.
/// Throws std::invalid_argument when the window holds no point.
double asymptotic_performance(const LearningCurve& curve, std::uint64_t total_steps, double window_frac = 0.03);

enum class CiMethod { normal, student_t };
std::string to_string(CiMethod m);
CiMethod parse_ci_method(const std::string& name);

struct AggregateResult {
  double mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t n_seeds = 0;
};

/// mean +- q * s / sqrt(n), s with the n-1 denominator; q = 1.96 for the
/// normal method, the 0.975 Student-t quantile with n-1 dof otherwise.
AggregateResult ci95(const std::vector<double>& values, CiMethod method = CiMethod::normal);

/// First env_steps after which every point is >= rel * asymptote, where the
/// asymptote is asymptotic_performance over the curve's last point. Returns
/// nullopt when even the last point falls short.
std::optional<std::uint64_t> converged_step(const LearningCurve& curve, double rel = 0.95,
                                            double window_frac = 0.03);

enum class Difficulty { easy, hard };
std::string to_string(Difficulty d);

inline constexpr std::uint64_t kDeskDifficultyThreshold = 100'000;
inline constexpr std::uint64_t kPaperDifficultyThreshold = 4'000'000;

Difficulty classify_difficulty(std::optional<std::uint64_t> converged, std::uint64_t threshold_steps);

/// First env_steps whose metric reaches `level`, with wall seconds.
std::optional<CurvePoint> first_reaching(const LearningCurve& curve, double level);

}  // namespace s2v::harness
