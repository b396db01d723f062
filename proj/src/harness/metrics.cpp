#include "s2v/harness/metrics.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <stdexcept>

namespace s2v::harness {

double asymptotic_performance(const LearningCurve& curve, std::uint64_t total_steps, double window_frac) {
  if (!(window_frac > 0.0 && window_frac <= 1.0)) throw std::invalid_argument("window_frac must lie in (0, 1]");
  const double start = (1.0 - window_frac) * static_cast<double>(total_steps);
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& p : curve.points)
    if (static_cast<double>(p.env_steps) >= start) {
      sum += p.metric;
      ++n;
    }
  if (n == 0)
    throw std::invalid_argument("no curve point in the final " + format_double(window_frac * 100) +
                                "% of " + std::to_string(total_steps) +
                                " steps; evaluate more often or raise window_frac");
  return sum / static_cast<double>(n);
}

std::string to_string(CiMethod m) { return m == CiMethod::normal ? "normal" : "t"; }

CiMethod parse_ci_method(const std::string& name) {
  if (name == "normal") return CiMethod::normal;
  if (name == "t") return CiMethod::student_t;
  throw std::invalid_argument("unknown CI method '" + name + "' (expected normal or t)");
}

AggregateResult ci95(const std::vector<double>& values, CiMethod method) {
  const std::size_t n = values.size();
  if (n < 2) throw std::invalid_argument("ci95 needs at least 2 values, got " + std::to_string(n));
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double s = std::sqrt(ss / static_cast<double>(n - 1));
  double q = 1.96;
  if (method == CiMethod::student_t)
    q = boost::math::quantile(boost::math::students_t(static_cast<double>(n - 1)), 0.975);
  const double half = q * s / std::sqrt(static_cast<double>(n));
  return {mean, mean - half, mean + half, n};
}

std::optional<std::uint64_t> converged_step(const LearningCurve& curve, double rel, double window_frac) {
  if (curve.empty()) return std::nullopt;
  const double asym = asymptotic_performance(curve, curve.points.back().env_steps, window_frac);
  // rel * asym for positive asymptotes; mirrored for negative returns so the
  // bar always sits (1 - rel) * |asym| below the asymptote.
  const double bar = asym - (1.0 - rel) * std::abs(asym);
  std::optional<std::uint64_t> first;
  for (const auto& p : curve.points) {
    if (p.metric >= bar) {
      if (!first) first = p.env_steps;
    } else {
      first.reset();
    }
  }
  return first;
}

std::string to_string(Difficulty d) { return d == Difficulty::easy ? "easy" : "hard"; }

Difficulty classify_difficulty(std::optional<std::uint64_t> converged, std::uint64_t threshold_steps) {
  return converged && *converged <= threshold_steps ? Difficulty::easy : Difficulty::hard;
}

std::optional<CurvePoint> first_reaching(const LearningCurve& curve, double level) {
  for (const auto& p : curve.points)
    if (p.metric >= level) return p;
  return std::nullopt;
}

}  // namespace s2v::harness
