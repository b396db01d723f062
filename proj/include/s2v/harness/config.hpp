#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "s2v/dagger/dagger.hpp"
#include "s2v/envs/env.hpp"
#include "s2v/harness/clock.hpp"
#include "s2v/harness/metrics.hpp"
#include "s2v/rl/sac.hpp"

namespace s2v::harness {

enum class Method { s2v_dagger, visual_rl, state_rl };
std::string to_string(Method m);
Method parse_method(const std::string& name);

/// Everything a run needs besides env and seed.
struct RunConfig {
  std::vector<std::string> presets;
  rl::NetConfig net;
  rl::SacConfig sac;
  dagger::DaggerConfig dagger;
  std::uint64_t steps = 100'000;  // env steps for this run's stage
  ClockMode clock = ClockMode::ops;
  CiMethod ci = CiMethod::normal;
  double window_frac = 0.03;
  std::uint64_t difficulty_threshold = kDeskDifficultyThreshold;
};

/// Desk defaults for an (env, method) pair: gamma 0.8 for reach/push and
/// 0.99 for swingup, utd 1 for state RL and 0.25 for visual RL, the
/// ManiSkill-style imitation settings for reach/push and the DMControl-style
/// ones for swingup, and the per-env step budgets.
RunConfig default_run_config(envs::EnvId env, Method method);

std::vector<std::string> preset_names();
/// Throws std::invalid_argument naming an unknown preset.
void apply_preset(RunConfig& cfg, const std::string& name);

/// Layers a JSON document over the defaults: presets first (key "preset",
/// a name or a list), then explicit keys in sections "net", "sac", "dagger"
/// and "run". Unknown keys and presets are rejected by name.
RunConfig resolve_config(const nlohmann::json& doc, envs::EnvId env, Method method);
RunConfig load_config(const std::filesystem::path& path, envs::EnvId env, Method method);

/// Fully resolved configuration, as echoed into run manifests.
nlohmann::json to_json(const RunConfig& cfg);

}  // namespace s2v::harness
