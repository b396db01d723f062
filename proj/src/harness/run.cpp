#include "s2v/harness/run.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

namespace s2v::harness {

using nlohmann::json;

json to_json(const RunManifest& m) {
  return {{"format", kRunFormat},
          {"method", to_string(m.method)},
          {"env", envs::to_string(m.env)},
          {"seed", m.seed},
          {"metric", to_string(m.metric)},
          {"env_steps", m.env_steps},
          {"wall_seconds", m.wall_seconds},
          {"stage1_offsets", {{"env_steps", m.offsets.env_steps}, {"wall_seconds", m.offsets.wall_seconds}}},
          {"teacher_checkpoint", m.teacher_checkpoint},
          {"curve_file", kCurveFile},
          {"checkpoint_file", kCheckpointFile},
          {"config", m.config},
          {"complete", m.complete}};
}

RunManifest manifest_from_json(const json& j) {
  try {
    if (j.at("format").get<std::string>() != kRunFormat)
      throw std::invalid_argument("unsupported run format " + j.at("format").dump());
    RunManifest m;
    m.method = parse_method(j.at("method").get<std::string>());
    m.env = envs::parse_env_id(j.at("env").get<std::string>());
    m.seed = j.at("seed").get<std::uint64_t>();
    m.metric = parse_metric_kind(j.at("metric").get<std::string>());
    m.env_steps = j.at("env_steps").get<std::uint64_t>();
    m.wall_seconds = j.at("wall_seconds").get<double>();
    m.offsets.env_steps = j.at("stage1_offsets").at("env_steps").get<std::uint64_t>();
    m.offsets.wall_seconds = j.at("stage1_offsets").at("wall_seconds").get<double>();
    m.teacher_checkpoint = j.value("teacher_checkpoint", "");
    m.config = j.value("config", json::object());
    m.complete = j.at("complete").get<bool>();
    return m;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed run manifest: ") + e.what());
  }
}

void write_manifest(const std::filesystem::path& dir, const RunManifest& m) {
  std::filesystem::create_directories(dir);
  const auto tmp = dir / (std::string(kManifestFile) + ".tmp");
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << to_json(m).dump(2) << '\n';
    if (!out) throw std::runtime_error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, dir / kManifestFile);
}

RunManifest read_manifest(const std::filesystem::path& dir) {
  const auto path = dir / kManifestFile;
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("no run manifest at " + path.string());
  try {
    return manifest_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(path.string() + " is not valid JSON: " + e.what());
  }
}

std::vector<RunRecord> scan_runs(const std::filesystem::path& root) {
  if (!std::filesystem::is_directory(root)) throw std::invalid_argument("not a directory: " + root.string());
  std::vector<std::filesystem::path> dirs;
  if (std::filesystem::exists(root / kManifestFile)) dirs.push_back(root);
  for (const auto& e : std::filesystem::recursive_directory_iterator(root))
    if (e.is_regular_file() && e.path().filename() == kManifestFile) dirs.push_back(e.path().parent_path());
  std::sort(dirs.begin(), dirs.end());
  dirs.erase(std::unique(dirs.begin(), dirs.end()), dirs.end());
  std::vector<RunRecord> runs;
  for (const auto& d : dirs) {
    RunManifest m = read_manifest(d);
    if (!m.complete) continue;
    runs.push_back({d, m, read_curve_csv(d / kCurveFile, m.metric)});
  }
  return runs;
}

}  // namespace s2v::harness
