#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "s2v/harness/config.hpp"
#include "s2v/harness/run.hpp"

namespace s2v::harness {

struct RunRequest {
  envs::EnvId env = envs::EnvId::reach;
  std::uint64_t seed = 0;
  RunConfig config;
  std::filesystem::path out;
  std::filesystem::path teacher;  // distill only: teacher checkpoint
};

/// Each runner writes into `out`: curve.csv (rows flushed as they are
/// produced), policy.ckpt(.bin), and manifest.json, first incomplete and
/// finally marked complete. Distillation also writes rounds.csv.
RunManifest run_state_rl(const RunRequest& req);
RunManifest run_visual_rl(const RunRequest& req);
/// Reads stage-1 offsets from the manifest stored next to the teacher
/// checkpoint; throws if it is missing or belongs to another environment.
RunManifest run_distill(const RunRequest& req);

struct EvalReport {
  envs::EnvId env = envs::EnvId::reach;
  std::string agent;
  MetricKind metric = MetricKind::success_rate;
  double value = 0.0;
  std::size_t episodes = 0;
};

/// Deterministic evaluation of any saved policy (teacher, asymmetric agent or
/// student) on the held-out episode seeds.
EvalReport evaluate_checkpoint(const std::filesystem::path& ckpt, std::size_t episodes, std::uint64_t env_seed,
                               std::optional<envs::EnvId> expect_env = std::nullopt);

}  // namespace s2v::harness
