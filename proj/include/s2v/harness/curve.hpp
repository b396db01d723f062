#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "s2v/envs/env.hpp"

namespace s2v::harness {

enum class MetricKind { success_rate, episode_return };

std::string to_string(MetricKind kind);
MetricKind parse_metric_kind(const std::string& name);
/// reach and push report success rate; swingup reports return.
MetricKind metric_kind(envs::EnvId id);

struct CurvePoint {
  std::uint64_t env_steps = 0;
  double wall_seconds = 0.0;
  double metric = 0.0;
  bool operator==(const CurvePoint&) const = default;
};

/// Evaluation trace. env_steps strictly increases, wall_seconds never
/// decreases; append() enforces both.
struct LearningCurve {
  MetricKind kind = MetricKind::success_rate;
  std::vector<CurvePoint> points;

  void append(const CurvePoint& p);
  bool empty() const { return points.empty(); }
  bool operator==(const LearningCurve&) const = default;
};

/// Shortest decimal text that round-trips the double.
std::string format_double(double v);

inline constexpr const char* kCurveHeader = "env_steps,wall_seconds,metric";

/// Appends curve rows to a CSV file, flushing after each row so readers in
/// another process see complete lines.
class CurveWriter {
 public:
  explicit CurveWriter(const std::filesystem::path& path);
  void write(const CurvePoint& p);

 private:
  std::ofstream out_;
};

void write_curve_csv(const std::filesystem::path& path, const LearningCurve& curve);
LearningCurve read_curve_csv(const std::filesystem::path& path, MetricKind kind);

}  // namespace s2v::harness
