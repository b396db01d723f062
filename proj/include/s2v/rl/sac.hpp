#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "s2v/envs/env.hpp"
#include "s2v/harness/clock.hpp"
#include "s2v/harness/curve.hpp"
#include "s2v/nn/adam.hpp"
#include "s2v/nn/checkpoint.hpp"
#include "s2v/nn/layers.hpp"
#include "s2v/replay/records.hpp"
#include "s2v/replay/ring_buffer.hpp"

namespace s2v::rl {

using nn::Graph;
using nn::ParamSet;
using nn::Rng;
using nn::Tensor;
using nn::Var;

/// Layer sizes shared by every learner in a run.
struct NetConfig {
  std::vector<std::size_t> hidden{256, 256};
  std::vector<std::size_t> channels{16, 32, 64};
  std::size_t feature_dim = 128;
};

struct SacConfig {
  double gamma = 0.8;
  double tau = 0.005;
  double lr = 3e-4;
  std::size_t batch_size = 256;
  double utd = 1.0;  // gradient updates per env step
  bool autotune = true;
  double init_alpha = 0.1;
  std::uint64_t warmup = 1000;
  std::uint64_t eval_interval = 5000;
  std::size_t eval_episodes = 20;
  std::size_t buffer_capacity = 100'000;
};

/// Number of updates due after env step `step` (1-based). floor(utd) per
/// step when utd >= 1, otherwise one every round(1/utd) steps; none during
/// warmup.
std::size_t updates_due(std::uint64_t step, std::uint64_t warmup, double utd);

enum class AgentKind { state_teacher, asymmetric_visual };
enum class View { state, visual };
enum class ActionMode { stochastic, deterministic };

std::string to_string(AgentKind kind);
AgentKind parse_agent_kind(const std::string& name);
std::string to_string(View view);

/// Batched actor input. state: [B, S]. visual: [B, C, 16, 16] channel-major.
struct PolicyInput {
  View view = View::state;
  Tensor batch;
};

PolicyInput state_input(const std::vector<std::vector<double>>& states);
PolicyInput visual_input(const std::vector<Tensor>& visuals);
PolicyInput visual_input(const std::vector<const replay::PackedVisual*>& visuals);

/// Twin-critic SAC agent. The critics always read the state view (with its
/// privileged entries); the actor reads the state view for the teacher and
/// the pixel stack for the asymmetric agent.
class SacAgent {
 public:
  SacAgent(AgentKind kind, envs::EnvId env, const NetConfig& net, const SacConfig& sac, std::uint64_t seed);

  AgentKind kind() const { return kind_; }
  envs::EnvId env() const { return env_; }
  View actor_view() const { return kind_ == AgentKind::state_teacher ? View::state : View::visual; }
  std::size_t action_dim() const { return action_dim_; }
  const NetConfig& net() const { return net_; }
  double alpha() const;
  double log_alpha() const { return temperature.at("log_alpha")[0]; }

  struct Head {
    Var mean;
    Var log_std;
  };
  /// Actor pre-squash outputs. Throws std::invalid_argument on a view the
  /// actor does not consume.
  Head actor_head(Graph& g, const PolicyInput& input) const;
  /// Q_i(s, a) for i in {0, 1} using the given critic parameter set.
  Var q_value(Graph& g, const ParamSet& critic_params, int which, Var state, Var action) const;

  /// Deterministic or sampled actions for a batch, [B, A].
  Tensor act(const PolicyInput& input, ActionMode mode, Rng& rng) const;
  /// Input for the actor's view of a single observation.
  PolicyInput actor_input(const envs::DualObservation& obs) const;

  nn::Checkpoint to_checkpoint() const;
  static SacAgent from_checkpoint(const nn::Checkpoint& ckpt);

  ParamSet actor;
  ParamSet critic;
  ParamSet critic_target;
  ParamSet temperature;  // "log_alpha"
  nn::AdamState actor_opt, critic_opt, alpha_opt;

 private:
  AgentKind kind_;
  envs::EnvId env_;
  NetConfig net_;
  std::size_t action_dim_;
  nn::ConvEncoder encoder_;
  nn::Mlp actor_mlp_;
  nn::Mlp q_[2];
};

/// select_action: tanh(mean) in deterministic mode (rng untouched), a
/// squashed-Gaussian sample otherwise.
Tensor select_action(const SacAgent& agent, const PolicyInput& input, ActionMode mode, Rng& rng);
std::vector<double> select_action(const SacAgent& agent, const envs::DualObservation& obs, ActionMode mode,
                                  Rng& rng);

/// Training batch in tensor form.
struct Batch {
  Tensor state, action, reward, next_state, done;  // reward/done: [B, 1]
  PolicyInput actor_obs, actor_next_obs;
};
Batch make_batch(const SacAgent& agent, const std::vector<const replay::Transition*>& records);

/// y = r + gamma * (1 - done) * (min_q_next - alpha * log_prob_next), elementwise over [B, 1].
Tensor soft_target(const Tensor& reward, const Tensor& done, const Tensor& min_q_next,
                   const Tensor& log_prob_next, double gamma, double alpha);
/// Samples a' from the current actor at the next observation and evaluates the target critics.
Tensor critic_targets(const SacAgent& agent, const Batch& batch, double gamma, Rng& rng);

struct UpdateReport {
  double critic_loss = 0.0;
  double actor_loss = 0.0;
  double alpha_loss = 0.0;
  double alpha = 0.0;
  double entropy = 0.0;  // -mean log pi on the batch
  bool operator==(const UpdateReport&) const = default;
};

/// Critic-only gradient step; returns the loss before the step.
double critic_update(SacAgent& agent, const Batch& batch, const SacConfig& cfg, Rng& rng);
/// One full SAC step on a given batch: critics, actor, temperature, targets.
UpdateReport sac_update(SacAgent& agent, const Batch& batch, const SacConfig& cfg, Rng& rng);
/// Samples a batch from the buffer and runs sac_update.
UpdateReport sac_update_step(SacAgent& agent, const replay::RingBuffer<replay::Transition>& buffer,
                             const SacConfig& cfg, Rng& rng);
/// target <- tau * online + (1 - tau) * target
void polyak_update(ParamSet& target, const ParamSet& online, double tau);

/// Mean deterministic-policy metric over `episodes` held-out episodes
/// (seeds kEvalSeedBase + k): success rate for reach/push, return for swingup.
inline constexpr std::uint64_t kEvalSeedBase = 1'000'000;
double evaluate(const std::function<std::vector<double>(const envs::DualObservation&)>& policy,
                const envs::EnvConfig& env, std::size_t episodes);

struct TrainOptions {
  std::uint64_t total_steps = 100'000;
  std::uint64_t seed = 0;
  harness::ClockMode clock = harness::ClockMode::ops;
  std::filesystem::path curve_path;  // optional incremental CSV
  std::function<void(const harness::CurvePoint&)> on_eval;
};

struct TrainResult {
  SacAgent agent;
  harness::LearningCurve curve;
  std::uint64_t env_steps = 0;
  double wall_seconds = 0.0;
  std::uint64_t updates = 0;
  std::uint64_t transitions_stored = 0;  // training steps only; eval never stores
};

TrainResult train_rl(AgentKind kind, const envs::EnvConfig& env, const NetConfig& net, const SacConfig& cfg,
                     const TrainOptions& opts);

}  // namespace s2v::rl
