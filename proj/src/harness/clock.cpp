#include "s2v/harness/clock.hpp"

#include <stdexcept>

#include "s2v/nn/kernels.hpp"

namespace s2v::harness {

std::string to_string(ClockMode mode) { return mode == ClockMode::wall ? "wall" : "ops"; }

ClockMode parse_clock_mode(const std::string& name) {
  if (name == "wall") return ClockMode::wall;
  if (name == "ops") return ClockMode::ops;
  throw std::invalid_argument("unknown clock '" + name + "' (expected wall or ops)");
}

RunClock::RunClock(ClockMode mode, double offset_seconds)
    : mode_(mode), offset_(offset_seconds), wall_start_(Steady::now()), flop_start_(nn::flop_counter()) {}

double RunClock::running_total() const {
  if (mode_ == ClockMode::wall) return std::chrono::duration<double>(Steady::now() - wall_start_).count();
  return static_cast<double>(nn::flop_counter() - flop_start_) / kOpsFlopsPerSecond;
}

void RunClock::pause() {
  if (!running_) return;
  banked_ += running_total();
  running_ = false;
}

void RunClock::resume() {
  if (running_) return;
  wall_start_ = Steady::now();
  flop_start_ = nn::flop_counter();
  running_ = true;
}

double RunClock::seconds() const {
  const double live = running_ ? running_total() : 0.0;
  const double steps = mode_ == ClockMode::ops ? static_cast<double>(env_steps_) * kOpsSecondsPerEnvStep : 0.0;
  return offset_ + banked_ + live + steps;
}

}  // namespace s2v::harness
