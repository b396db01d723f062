#pragma once

#include <chrono>
#include <cstdint>
#include <string>

namespace s2v::harness {

/// wall: measured seconds. ops: seconds modelled from counted multiply-adds
/// and env ticks at fixed nominal rates, identical on every rerun.
enum class ClockMode { wall, ops };

std::string to_string(ClockMode mode);
ClockMode parse_clock_mode(const std::string& name);

inline constexpr double kOpsFlopsPerSecond = 1e10;
inline constexpr double kOpsSecondsPerEnvStep = 5e-6;

/// Training-time clock. Time between pause() and resume() is not counted,
/// which is how evaluation is kept out of the wall-clock curves.
class RunClock {
 public:
  explicit RunClock(ClockMode mode, double offset_seconds = 0.0);

  void pause();
  void resume();
  void count_env_steps(std::uint64_t n = 1) { env_steps_ += n; }
  double seconds() const;
  ClockMode mode() const { return mode_; }

 private:
  using Steady = std::chrono::steady_clock;
  double running_total() const;

  ClockMode mode_;
  double offset_;
  bool running_ = true;
  double banked_ = 0.0;
  Steady::time_point wall_start_;
  std::uint64_t flop_start_ = 0;
  std::uint64_t env_steps_ = 0;
};

}  // namespace s2v::harness
