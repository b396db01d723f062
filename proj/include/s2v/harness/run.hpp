#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "s2v/envs/env.hpp"
#include "s2v/harness/config.hpp"
#include "s2v/harness/curve.hpp"

namespace s2v::harness {

inline constexpr const char* kRunFormat = "s2v-run-1";
inline constexpr const char* kManifestFile = "manifest.json";
inline constexpr const char* kCurveFile = "curve.csv";
inline constexpr const char* kCheckpointFile = "policy.ckpt";

/// Stage-1 cost carried by a distilled run.
struct StageOffsets {
  std::uint64_t env_steps = 0;
  double wall_seconds = 0.0;
  bool operator==(const StageOffsets&) const = default;
};

struct RunManifest {
  Method method = Method::state_rl;
  envs::EnvId env = envs::EnvId::reach;
  std::uint64_t seed = 0;
  MetricKind metric = MetricKind::success_rate;
  std::uint64_t env_steps = 0;  // consumed by this run's own stage
  double wall_seconds = 0.0;
  StageOffsets offsets;
  std::string teacher_checkpoint;  // s2v_dagger only
  nlohmann::json config = nlohmann::json::object();
  bool complete = false;
};

nlohmann::json to_json(const RunManifest& m);
RunManifest manifest_from_json(const nlohmann::json& j);

/// Writes <dir>/manifest.json via a temporary file and rename, so readers see
/// either the previous manifest or the new one.
void write_manifest(const std::filesystem::path& dir, const RunManifest& m);
RunManifest read_manifest(const std::filesystem::path& dir);

struct RunRecord {
  std::filesystem::path dir;
  RunManifest manifest;
  LearningCurve curve;
};

/// Run directories below `root` (including root itself) whose manifests are
/// complete, in lexicographic path order. Incomplete runs are skipped.
std::vector<RunRecord> scan_runs(const std::filesystem::path& root);

}  // namespace s2v::harness
