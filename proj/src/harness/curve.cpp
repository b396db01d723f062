#include "s2v/harness/curve.hpp"

#include <charconv>
#include <sstream>
#include <stdexcept>

namespace s2v::harness {

std::string to_string(MetricKind kind) { return kind == MetricKind::success_rate ? "success_rate" : "return"; }

MetricKind parse_metric_kind(const std::string& name) {
  if (name == "success_rate") return MetricKind::success_rate;
  if (name == "return") return MetricKind::episode_return;
  throw std::invalid_argument("unknown metric kind '" + name + "'");
}

MetricKind metric_kind(envs::EnvId id) {
  return id == envs::EnvId::swingup ? MetricKind::episode_return : MetricKind::success_rate;
}

void LearningCurve::append(const CurvePoint& p) {
  if (!points.empty()) {
    if (p.env_steps <= points.back().env_steps)
      throw std::invalid_argument("curve env_steps must strictly increase (" + std::to_string(p.env_steps) +
                                  " after " + std::to_string(points.back().env_steps) + ")");
    if (p.wall_seconds < points.back().wall_seconds)
      throw std::invalid_argument("curve wall_seconds must not decrease");
  }
  points.push_back(p);
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

CurveWriter::CurveWriter(const std::filesystem::path& path) : out_(path, std::ios::trunc) {
  if (!out_) throw std::runtime_error("cannot open curve file " + path.string());
  out_ << kCurveHeader << '\n' << std::flush;
}

void CurveWriter::write(const CurvePoint& p) {
  out_ << p.env_steps << ',' << format_double(p.wall_seconds) << ',' << format_double(p.metric) << '\n' << std::flush;
}

void write_curve_csv(const std::filesystem::path& path, const LearningCurve& curve) {
  CurveWriter w(path);
  for (const auto& p : curve.points) w.write(p);
}

LearningCurve read_curve_csv(const std::filesystem::path& path, MetricKind kind) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open curve file " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kCurveHeader)
    throw std::runtime_error(path.string() + ": expected header '" + kCurveHeader + "'");
  LearningCurve curve{kind, {}};
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    CurvePoint p;
    const char* s = line.data();
    const char* end = s + line.size();
    auto field = [&](auto& out) {
      auto r = std::from_chars(s, end, out);
      if (r.ec != std::errc()) throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": bad row");
      s = r.ptr;
      if (s < end && *s == ',') ++s;
    };
    field(p.env_steps);
    field(p.wall_seconds);
    field(p.metric);
    if (s != end) throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": trailing data");
    curve.append(p);
  }
  return curve;
}

}  // namespace s2v::harness
