#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "s2v/harness/metrics.hpp"
#include "s2v/harness/run.hpp"

namespace s2v::harness {

inline constexpr double kReturnNormalizer = 1000.0;

struct ReportOptions {
  CiMethod ci = CiMethod::normal;
  double window_frac = 0.03;
  std::uint64_t difficulty_threshold = kDeskDifficultyThreshold;
};

struct ReportResult {
  std::vector<std::filesystem::path> files;
  std::vector<std::string> warnings;
};

/// Curve shifted by the run's stage-1 offsets (identity for single-stage runs).
LearningCurve with_offsets(const RunRecord& run);

/// Table cell "mean & [low, high]" with two decimals; success rates are
/// shown in percent.
std::string format_cell(const AggregateResult& r, MetricKind kind);

/// Reads every complete run below `runs_root` and writes into `out_dir`:
///   summary.csv / summary.txt       asymptotic performance per (env, method)
///   curves_steps.csv                stage-local env steps
///   curves_steps_offset.csv         env steps including stage-1 offsets
///   curves_wall.csv                 cumulative wall seconds
///   difficulty.csv                  easy/hard labels from state-RL runs
///   normalized.csv                  per-task scores (returns / 1000), then averaged
/// Output depends only on the run files.
ReportResult make_report(const std::filesystem::path& runs_root, const std::filesystem::path& out_dir,
                         const ReportOptions& opts = {});

}  // namespace s2v::harness
