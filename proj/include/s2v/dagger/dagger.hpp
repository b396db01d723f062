#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include "s2v/envs/env.hpp"
#include "s2v/harness/clock.hpp"
#include "s2v/harness/curve.hpp"
#include "s2v/nn/adam.hpp"
#include "s2v/nn/checkpoint.hpp"
#include "s2v/nn/layers.hpp"
#include "s2v/replay/records.hpp"
#include "s2v/replay/ring_buffer.hpp"
#include "s2v/rl/sac.hpp"

namespace s2v::dagger {

using nn::Tensor;

struct DaggerConfig {
  std::size_t n_collect = 64;
  double delta = 0.01;  // early-stop threshold on the batch loss
  std::size_t batch_size = 128;
  double utd = 1.0;
  std::size_t buffer_capacity = 100'000;
  double lr = 3e-4;
  std::uint64_t eval_interval = 5000;
  std::size_t eval_episodes = 20;

  /// Gradient steps allowed per round: ceil(utd * n_collect).
  std::size_t max_grad_steps() const;
};

/// Visual student: conv encoder, MLP head, tanh. Reads only the pixel stack.
class StudentPolicy {
 public:
  StudentPolicy(envs::EnvId env, const rl::NetConfig& net, std::uint64_t seed);

  /// Actions for a [B, C, 16, 16] batch.
  nn::Var forward(nn::Graph& g, const Tensor& visual_batch) const;
  Tensor act(const Tensor& visual_batch) const;
  std::vector<double> act(const envs::DualObservation& obs) const;

  envs::EnvId env() const { return env_; }
  const rl::NetConfig& net() const { return net_; }

  nn::Checkpoint to_checkpoint() const;
  static StudentPolicy from_checkpoint(const nn::Checkpoint& ckpt);

  nn::ParamSet params;
  nn::AdamState opt;

 private:
  envs::EnvId env_;
  rl::NetConfig net_;
  nn::ConvEncoder encoder_;
  nn::Mlp head_;
};

/// Mean over batch and action dimensions of (predicted - labels)^2.
double imitation_loss(const Tensor& predicted, const Tensor& labels);
nn::Var imitation_loss(nn::Var predicted, const Tensor& labels);
double imitation_loss(const StudentPolicy& student, const std::vector<const replay::DaggerSample*>& batch);

/// Deterministic teacher actions for a batch of state observations, [K, A].
Tensor label_expert(const rl::SacAgent& teacher, const std::vector<std::vector<double>>& states);

/// Environment position carried across rounds, so episodes span rounds.
struct RolloutState {
  envs::Env env;
  std::uint64_t episode = 0;
  envs::DualObservation obs;

  RolloutState(const envs::EnvConfig& cfg);
};

struct RoundReport {
  std::size_t collected = 0;
  std::size_t grad_steps_used = 0;
  double final_loss = 0.0;  // batch loss of the last update
  double min_loss = 0.0;
};

/// One iteration of the collect / label / aggregate / fit loop.
RoundReport dagger_round(StudentPolicy& student, const rl::SacAgent& teacher, RolloutState& rollout,
                         replay::RingBuffer<replay::DaggerSample>& buffer, const DaggerConfig& cfg, nn::Rng& rng);

struct DistillOptions {
  std::uint64_t total_steps = 150'000;  // stage-2 env steps
  std::uint64_t seed = 0;
  harness::ClockMode clock = harness::ClockMode::ops;
  std::filesystem::path curve_path;
  std::function<void(const harness::CurvePoint&)> on_eval;
};

struct DistillResult {
  StudentPolicy student;
  harness::LearningCurve curve;
  std::vector<RoundReport> rounds;
  std::uint64_t env_steps = 0;
  double wall_seconds = 0.0;
};

DistillResult distill(const rl::SacAgent& teacher, const envs::EnvConfig& env, const rl::NetConfig& net,
                      const DaggerConfig& cfg, const DistillOptions& opts);

}  // namespace s2v::dagger
