#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "s2v/nn/tensor.hpp"

namespace s2v::envs {

using nn::Tensor;

enum class EnvId { reach, push, swingup };

std::string to_string(EnvId id);
EnvId parse_env_id(const std::string& name);

inline constexpr std::size_t kCanvas = 16;
inline constexpr std::size_t kFrameStack = 3;

struct EnvConfig {
  EnvId id = EnvId::reach;
  int horizon = 50;
  std::uint64_t seed = 0;
};

/// Default config for an environment: reach 50, push 100, swingup 200 ticks.
EnvConfig default_config(EnvId id, std::uint64_t seed = 0);
int default_horizon(EnvId id);

std::size_t state_dim(EnvId id);
std::size_t action_dim(EnvId id);
/// Semantic channels per rendered frame (one entity per channel).
std::size_t frame_channels(EnvId id);
/// Channels of the stacked visual observation.
inline std::size_t visual_channels(EnvId id) { return frame_channels(id) * kFrameStack; }

struct Vec2 {
  double x = 0.0, y = 0.0;
  bool operator==(const Vec2&) const = default;
};

/// Simulator ground truth. Fields not used by an environment stay zero.
struct SimState {
  Vec2 agent, goal, block;
  double theta = 0.0, omega = 0.0;
  bool operator==(const SimState&) const = default;
};

struct DualObservation {
  std::vector<double> state;  // o^S
  Tensor visual;              // o^V, [C * 3, 16, 16], oldest frame first
};

struct StepResult {
  DualObservation observation;
  double reward = 0.0;
  bool done = false;
  std::optional<bool> success;  // absent for return-based tasks
};

/// Low-dimensional state vector for a simulator state.
std::vector<double> encode_state(EnvId id, const SimState& s);
/// Inverse of encode_state on the fields the renderer needs.
SimState decode_state(EnvId id, std::span<const double> state);
/// One semantic frame [C, 16, 16] for a simulator state.
Tensor render_visual(EnvId id, const SimState& s);
/// Canvas index of a world coordinate in [-1, 1].
int pixel_index(double v);

/// Keyed counter-based generator: value i of stream (seed, episode_seed) is a
/// pure function of the three integers.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t episode_seed);
  double uniform(double lo, double hi);

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Wraps an angle to (-pi, pi].
double wrap_angle(double theta);

class Env {
 public:
  explicit Env(EnvConfig config);

  DualObservation reset(std::uint64_t episode_seed);
  /// Starts an episode from an explicit simulator state.
  DualObservation reset_to(const SimState& state);
  /// Advances one tick. Action is clipped to [-1, 1]^A. Throws
  /// std::logic_error when called before reset or after the episode ended.
  StepResult step(std::span<const double> action);

  const EnvConfig& config() const { return config_; }
  EnvId id() const { return config_.id; }
  const SimState& sim_state() const { return state_; }
  int tick() const { return tick_; }
  bool done() const { return done_; }
  DualObservation observation() const;

 private:
  EnvConfig config_;
  SimState state_;
  std::deque<Tensor> frames_;
  int tick_ = 0;
  bool started_ = false;
  bool done_ = false;
};

}  // namespace s2v::envs
