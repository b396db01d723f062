#include "s2v/harness/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace s2v::harness {
namespace {

namespace fs = std::filesystem;
using Cell = std::pair<envs::EnvId, Method>;

std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

class CsvFile {
 public:
  CsvFile(const fs::path& path, const std::string& header, ReportResult& result) : out_(path, std::ios::trunc) {
    if (!out_) throw std::runtime_error("cannot write " + path.string());
    out_ << header << '\n';
    result.files.push_back(path);
  }
  std::ofstream& row() { return out_; }

 private:
  std::ofstream out_;
};

struct CellStats {
  MetricKind kind = MetricKind::success_rate;
  std::vector<std::uint64_t> seeds;
  std::vector<double> values;
};

}  // namespace

LearningCurve with_offsets(const RunRecord& run) {
  LearningCurve out;
  out.kind = run.curve.kind;
  for (const auto& p : run.curve.points)
    out.points.push_back({p.env_steps + run.manifest.offsets.env_steps,
                          p.wall_seconds + run.manifest.offsets.wall_seconds, p.metric});
  return out;
}

std::string format_cell(const AggregateResult& r, MetricKind kind) {
  const double scale = kind == MetricKind::success_rate ? 100.0 : 1.0;
  return fixed2(r.mean * scale) + " & [" + fixed2(r.ci_low * scale) + ", " + fixed2(r.ci_high * scale) + "]";
}

ReportResult make_report(const fs::path& runs_root, const fs::path& out_dir, const ReportOptions& opts) {
  const auto runs = scan_runs(runs_root);
  if (runs.empty()) throw std::invalid_argument("no complete runs under " + runs_root.string());
  fs::create_directories(out_dir);
  ReportResult result;

  // Runs sorted by (env, method, seed) so every file is independent of directory names.
  std::vector<const RunRecord*> order;
  for (const auto& r : runs) order.push_back(&r);
  std::stable_sort(order.begin(), order.end(), [](const RunRecord* a, const RunRecord* b) {
    return std::tuple(a->manifest.env, a->manifest.method, a->manifest.seed) <
           std::tuple(b->manifest.env, b->manifest.method, b->manifest.seed);
  });

  std::map<Cell, CellStats> cells;
  std::map<envs::EnvId, std::set<std::uint64_t>> env_seeds;
  for (const RunRecord* r : order) {
    const auto& m = r->manifest;
    env_seeds[m.env].insert(m.seed);
    auto& cell = cells[{m.env, m.method}];
    cell.kind = m.metric;
    if (!cell.seeds.empty() && cell.seeds.back() == m.seed) {
      result.warnings.push_back(envs::to_string(m.env) + "/" + to_string(m.method) + ": duplicate seed " +
                                std::to_string(m.seed) + " in " + r->dir.string() + " ignored");
      continue;
    }
    try {
      cell.values.push_back(asymptotic_performance(r->curve, m.env_steps, opts.window_frac));
      cell.seeds.push_back(m.seed);
    } catch (const std::invalid_argument& e) {
      result.warnings.push_back(r->dir.string() + ": " + e.what());
    }
  }

  {
    CsvFile csv(out_dir / "summary.csv", "env,method,metric,n_seeds,mean,ci_low,ci_high", result);
    std::ostringstream txt;
    char line[256];
    std::snprintf(line, sizeof line, "%-8s %-11s %-14s %3s  %s\n", "env", "method", "metric", "n", "mean & [95% CI]");
    txt << line;
    for (const auto& [key, cell] : cells) {
      const auto& [env, method] = key;
      const std::string name = envs::to_string(env) + "/" + to_string(method);
      const auto& expected = env_seeds[env];
      if (cell.seeds.size() < expected.size())
        result.warnings.push_back(name + ": " + std::to_string(cell.seeds.size()) + " of " +
                                  std::to_string(expected.size()) + " seeds present");
      if (cell.values.empty()) continue;
      std::string mean = format_double(cell.values[0]), lo, hi, shown;
      if (cell.values.size() >= 2) {
        const auto agg = ci95(cell.values, opts.ci);
        mean = format_double(agg.mean);
        lo = format_double(agg.ci_low);
        hi = format_double(agg.ci_high);
        shown = format_cell(agg, cell.kind);
      } else {
        const double scale = cell.kind == MetricKind::success_rate ? 100.0 : 1.0;
        shown = fixed2(cell.values[0] * scale) + " & [n/a]";
        result.warnings.push_back(name + ": one seed, no confidence interval");
      }
      csv.row() << envs::to_string(env) << ',' << to_string(method) << ',' << to_string(cell.kind) << ','
                << cell.values.size() << ',' << mean << ',' << lo << ',' << hi << '\n';
      std::snprintf(line, sizeof line, "%-8s %-11s %-14s %3zu  %s\n", envs::to_string(env).c_str(),
                    to_string(method).c_str(), to_string(cell.kind).c_str(), cell.values.size(), shown.c_str());
      txt << line;
    }
    txt << "\nCI: " << (opts.ci == CiMethod::normal ? "normal, 1.96 s/sqrt(n)" : "Student t, n-1 dof")
        << "; asymptotic window " << format_double(opts.window_frac * 100) << "% of each run's env steps;"
        << " success rates in percent.\n";
    for (const auto& w : result.warnings) txt << "warning: " << w << '\n';
    std::ofstream out(out_dir / "summary.txt", std::ios::trunc);
    out << txt.str();
    result.files.push_back(out_dir / "summary.txt");
  }

  {
    CsvFile plain(out_dir / "curves_steps.csv", "env,method,seed,env_steps,wall_seconds,metric", result);
    CsvFile shifted(out_dir / "curves_steps_offset.csv", "env,method,seed,env_steps,wall_seconds,metric", result);
    CsvFile wall(out_dir / "curves_wall.csv", "env,method,seed,wall_seconds,metric", result);
    for (const RunRecord* r : order) {
      const auto& m = r->manifest;
      const std::string prefix =
          envs::to_string(m.env) + ',' + to_string(m.method) + ',' + std::to_string(m.seed) + ',';
      for (const auto& p : r->curve.points)
        plain.row() << prefix << p.env_steps << ',' << format_double(p.wall_seconds) << ','
                    << format_double(p.metric) << '\n';
      for (const auto& p : with_offsets(*r).points) {
        shifted.row() << prefix << p.env_steps << ',' << format_double(p.wall_seconds) << ','
                      << format_double(p.metric) << '\n';
        wall.row() << prefix << format_double(p.wall_seconds) << ',' << format_double(p.metric) << '\n';
      }
    }
  }

  {
    CsvFile csv(out_dir / "difficulty.csv", "env,seed,converged_step,label", result);
    std::map<envs::EnvId, std::pair<int, int>> votes;  // (easy, total)
    for (const RunRecord* r : order) {
      const auto& m = r->manifest;
      if (m.method != Method::state_rl) continue;
      std::optional<std::uint64_t> conv;
      try {
        conv = converged_step(r->curve, 0.95, opts.window_frac);
      } catch (const std::invalid_argument&) {
      }
      const Difficulty d = classify_difficulty(conv, opts.difficulty_threshold);
      csv.row() << envs::to_string(m.env) << ',' << m.seed << ',' << (conv ? std::to_string(*conv) : "") << ','
                << to_string(d) << '\n';
      auto& [easy, total] = votes[m.env];
      easy += d == Difficulty::easy;
      ++total;
    }
    // An environment is easy when a strict majority of its seeds converge in time.
    for (const auto& [env, v] : votes)
      csv.row() << envs::to_string(env) << ",all,," << (2 * v.first > v.second ? "easy" : "hard") << '\n';
  }

  {
    // Normalize per task, then average across tasks.
    CsvFile csv(out_dir / "normalized.csv", "method,env,normalized_score", result);
    std::map<Method, std::vector<double>> per_method;
    for (const auto& [key, cell] : cells) {
      if (cell.values.empty()) continue;
      double mean = 0.0;
      for (double v : cell.values) mean += v;
      mean /= static_cast<double>(cell.values.size());
      const double score = cell.kind == MetricKind::episode_return ? mean / kReturnNormalizer : mean;
      per_method[key.second].push_back(score);
      csv.row() << to_string(key.second) << ',' << envs::to_string(key.first) << ',' << format_double(score) << '\n';
    }
    for (const auto& [method, scores] : per_method) {
      double sum = 0.0;
      for (double s : scores) sum += s;
      csv.row() << to_string(method) << ",all," << format_double(sum / static_cast<double>(scores.size())) << '\n';
    }
  }
  return result;
}

}  // namespace s2v::harness
