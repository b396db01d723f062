#include "s2v/envs/env.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace s2v::envs {
namespace {

constexpr double kPi = std::numbers::pi;

// reach
constexpr double kReachStep = 0.1;
constexpr double kGoalRadius = 0.1;
constexpr double kGoalBonus = 5.0;
constexpr double kReachInit = 0.8;

// push
constexpr double kPushStep = 0.08;
constexpr double kContactRadius = 0.15;
constexpr double kPushAgentInit = 0.8;
constexpr double kPushObjectInit = 0.6;
constexpr double kPushMinBlockGoal = 0.3;
constexpr double kPushMinAgentBlock = 0.25;

// swingup
constexpr double kGravity = 9.8;
constexpr double kMass = 1.0;
constexpr double kLength = 1.0;
constexpr double kDt = 0.05;
constexpr double kMaxSpeed = 8.0;
constexpr double kMaxTorque = 2.0;
constexpr double kInitSpread = 0.1;
constexpr int kRodPoints = 6;

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double dist(Vec2 a, Vec2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

Vec2 clip_box(Vec2 v) { return {std::clamp(v.x, -1.0, 1.0), std::clamp(v.y, -1.0, 1.0)}; }

void stamp(Tensor& frame, std::size_t channel, Vec2 p) {
  const int row = static_cast<int>(kCanvas) - 1 - pixel_index(p.y);
  const int col = pixel_index(p.x);
  auto put = [&](int r, int c, double v) {
    if (r < 0 || c < 0 || r >= int(kCanvas) || c >= int(kCanvas)) return;
    double& px = frame[(channel * kCanvas + r) * kCanvas + c];
    px = std::max(px, v);
  };
  put(row, col, 1.0);
  put(row - 1, col, 0.5);
  put(row + 1, col, 0.5);
  put(row, col - 1, 0.5);
  put(row, col + 1, 0.5);
}

}  // namespace

std::string to_string(EnvId id) {
  switch (id) {
    case EnvId::reach: return "reach";
    case EnvId::push: return "push";
    case EnvId::swingup: return "swingup";
  }
  return "?";
}

EnvId parse_env_id(const std::string& name) {
  if (name == "reach") return EnvId::reach;
  if (name == "push") return EnvId::push;
  if (name == "swingup") return EnvId::swingup;
  throw std::invalid_argument("unknown environment '" + name + "' (expected reach, push or swingup)");
}

int default_horizon(EnvId id) {
  switch (id) {
    case EnvId::reach: return 50;
    case EnvId::push: return 100;
    case EnvId::swingup: return 200;
  }
  return 0;
}

EnvConfig default_config(EnvId id, std::uint64_t seed) { return {id, default_horizon(id), seed}; }

std::size_t state_dim(EnvId id) {
  switch (id) {
    case EnvId::reach: return 6;
    case EnvId::push: return 10;
    case EnvId::swingup: return 3;
  }
  return 0;
}

std::size_t action_dim(EnvId id) { return id == EnvId::swingup ? 1 : 2; }

std::size_t frame_channels(EnvId id) {
  switch (id) {
    case EnvId::reach: return 2;
    case EnvId::push: return 3;
    case EnvId::swingup: return 1;
  }
  return 0;
}

int pixel_index(double v) {
  return static_cast<int>(std::floor((v + 1.0) / 2.0 * (kCanvas - 1) + 0.5));
}

double wrap_angle(double theta) {
  double t = std::fmod(theta + kPi, 2.0 * kPi);
  if (t <= 0.0) t += 2.0 * kPi;
  return t - kPi;
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t episode_seed)
    : key_(mix64(mix64(seed) ^ (episode_seed * 0xD1B54A32D192ED03ULL + 1))) {}

double CounterRng::uniform(double lo, double hi) {
  const std::uint64_t bits = mix64(key_ + (counter_++) * 0x9E3779B97F4A7C15ULL);
  const double unit = static_cast<double>(bits >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * unit;
}

std::vector<double> encode_state(EnvId id, const SimState& s) {
  switch (id) {
    case EnvId::reach:
      return {s.agent.x, s.agent.y, s.goal.x, s.goal.y, s.goal.x - s.agent.x, s.goal.y - s.agent.y};
    case EnvId::push:
      return {s.agent.x, s.agent.y, s.block.x, s.block.y, s.goal.x, s.goal.y,
              s.block.x - s.agent.x, s.block.y - s.agent.y, s.goal.x - s.block.x, s.goal.y - s.block.y};
    case EnvId::swingup:
      return {std::cos(s.theta), std::sin(s.theta), s.omega};
  }
  return {};
}

SimState decode_state(EnvId id, std::span<const double> v) {
  if (v.size() != state_dim(id)) throw std::invalid_argument("decode_state: wrong state width");
  SimState s;
  switch (id) {
    case EnvId::reach:
      s.agent = {v[0], v[1]};
      s.goal = {v[2], v[3]};
      break;
    case EnvId::push:
      s.agent = {v[0], v[1]};
      s.block = {v[2], v[3]};
      s.goal = {v[4], v[5]};
      break;
    case EnvId::swingup:
      s.theta = std::atan2(v[1], v[0]);
      s.omega = v[2];
      break;
  }
  return s;
}

Tensor render_visual(EnvId id, const SimState& s) {
  Tensor frame({frame_channels(id), kCanvas, kCanvas});
  switch (id) {
    case EnvId::reach:
      stamp(frame, 0, s.agent);
      stamp(frame, 1, s.goal);
      break;
    case EnvId::push:
      stamp(frame, 0, s.agent);
      stamp(frame, 1, s.block);
      stamp(frame, 2, s.goal);
      break;
    case EnvId::swingup: {
      const Vec2 tip{std::sin(s.theta), std::cos(s.theta)};
      for (int k = 0; k < kRodPoints; ++k) {
        const double t = static_cast<double>(k) / (kRodPoints - 1);
        stamp(frame, 0, {t * tip.x, t * tip.y});
      }
      break;
    }
  }
  return frame;
}

Env::Env(EnvConfig config) : config_(config) {
  if (config_.horizon <= 0) throw std::invalid_argument("episode horizon must be positive");
}

DualObservation Env::reset(std::uint64_t episode_seed) {
  CounterRng rng(config_.seed, episode_seed);
  state_ = SimState{};
  switch (config_.id) {
    case EnvId::reach:
      state_.agent = {rng.uniform(-kReachInit, kReachInit), rng.uniform(-kReachInit, kReachInit)};
      state_.goal = {rng.uniform(-kReachInit, kReachInit), rng.uniform(-kReachInit, kReachInit)};
      break;
    case EnvId::push:
      do {
        state_.block = {rng.uniform(-kPushObjectInit, kPushObjectInit), rng.uniform(-kPushObjectInit, kPushObjectInit)};
        state_.goal = {rng.uniform(-kPushObjectInit, kPushObjectInit), rng.uniform(-kPushObjectInit, kPushObjectInit)};
      } while (dist(state_.block, state_.goal) < kPushMinBlockGoal);
      do {
        state_.agent = {rng.uniform(-kPushAgentInit, kPushAgentInit), rng.uniform(-kPushAgentInit, kPushAgentInit)};
      } while (dist(state_.agent, state_.block) < kPushMinAgentBlock);
      break;
    case EnvId::swingup:
      state_.theta = rng.uniform(kPi - kInitSpread, kPi + kInitSpread);
      state_.omega = 0.0;
      break;
  }
  return reset_to(state_);
}

DualObservation Env::reset_to(const SimState& state) {
  state_ = state;
  frames_.clear();
  Tensor first = render_visual(config_.id, state_);
  for (std::size_t i = 0; i < kFrameStack; ++i) frames_.push_back(first);
  tick_ = 0;
  started_ = true;
  done_ = false;
  return observation();
}

StepResult Env::step(std::span<const double> action) {
  if (!started_) throw std::logic_error("step called before reset");
  if (done_) throw std::logic_error("step called after the episode ended; reset first");
  if (action.size() != action_dim(config_.id))
    throw std::invalid_argument("action has " + std::to_string(action.size()) + " entries, expected " +
                                std::to_string(action_dim(config_.id)));
  std::array<double, 2> a{};
  for (std::size_t i = 0; i < action.size(); ++i) a[i] = std::clamp(action[i], -1.0, 1.0);

  StepResult out;
  switch (config_.id) {
    case EnvId::reach: {
      state_.agent = clip_box({state_.agent.x + kReachStep * a[0], state_.agent.y + kReachStep * a[1]});
      const double d = dist(state_.agent, state_.goal);
      const bool hit = d < kGoalRadius;
      out.reward = -d + (hit ? kGoalBonus : 0.0);
      out.success = hit;
      break;
    }
    case EnvId::push: {
      const Vec2 agent = clip_box({state_.agent.x + kPushStep * a[0], state_.agent.y + kPushStep * a[1]});
      if (dist(agent, state_.block) < kContactRadius)
        state_.block = clip_box({state_.block.x + kPushStep * a[0], state_.block.y + kPushStep * a[1]});
      state_.agent = agent;
      const double to_block = dist(state_.agent, state_.block);
      const double to_goal = dist(state_.block, state_.goal);
      const bool hit = to_goal < kGoalRadius;
      out.reward = -0.5 * to_block - 1.0 * to_goal + (hit ? kGoalBonus : 0.0);
      out.success = hit;
      break;
    }
    case EnvId::swingup: {
      const double u = kMaxTorque * a[0];
      const double accel = 3.0 * kGravity / (2.0 * kLength) * std::sin(state_.theta) +
                           3.0 * u / (kMass * kLength * kLength);
      state_.omega = std::clamp(state_.omega + kDt * accel, -kMaxSpeed, kMaxSpeed);
      state_.theta = wrap_angle(state_.theta + kDt * state_.omega);
      out.reward = -(state_.theta * state_.theta + 0.1 * state_.omega * state_.omega + 0.001 * u * u);
      break;
    }
  }
  frames_.pop_front();
  frames_.push_back(render_visual(config_.id, state_));
  ++tick_;
  done_ = tick_ >= config_.horizon;
  out.done = done_;
  out.observation = observation();
  return out;
}

DualObservation Env::observation() const {
  DualObservation obs;
  obs.state = encode_state(config_.id, state_);
  const std::size_t c = frame_channels(config_.id);
  const std::size_t plane = kCanvas * kCanvas;
  obs.visual = Tensor({c * kFrameStack, kCanvas, kCanvas});
  for (std::size_t k = 0; k < frames_.size(); ++k)
    std::copy_n(frames_[k].raw(), c * plane, obs.visual.raw() + k * c * plane);
  return obs;
}

}  // namespace s2v::envs
