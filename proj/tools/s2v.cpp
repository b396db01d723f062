#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "s2v/harness/config.hpp"
#include "s2v/harness/report.hpp"
#include "s2v/harness/runner.hpp"

namespace fs = std::filesystem;
using namespace s2v;

namespace {

struct Common {
  std::string env;
  std::uint64_t seed = 0;
  std::string config;
  std::string out;
  std::optional<std::uint64_t> steps;
  std::optional<std::string> clock;
  std::string teacher;
};

void add_common(CLI::App* cmd, Common& c, bool need_env) {
  auto* env = cmd->add_option("--env", c.env, "reach, push or swingup")->check(CLI::IsMember({"reach", "push", "swingup"}));
  if (need_env) env->required();
  cmd->add_option("--seed", c.seed, "run seed");
  cmd->add_option("--config", c.config, "JSON config (presets and overrides)")->check(CLI::ExistingFile);
  cmd->add_option("--out", c.out, "output directory")->required();
  cmd->add_option("--steps", c.steps, "env steps for this stage (overrides the config)");
  cmd->add_option("--clock", c.clock, "ops (reproducible) or wall")->check(CLI::IsMember({"ops", "wall"}));
}

harness::RunRequest request(const Common& c, harness::Method method) {
  harness::RunRequest req;
  req.env = envs::parse_env_id(c.env);
  req.seed = c.seed;
  req.config = c.config.empty() ? harness::default_run_config(req.env, method)
                                : harness::load_config(c.config, req.env, method);
  if (c.steps) req.config.steps = *c.steps;
  if (c.clock) req.config.clock = harness::parse_clock_mode(*c.clock);
  req.out = c.out;
  req.teacher = c.teacher;
  return req;
}

void print_run(const harness::RunManifest& m, const fs::path& out) {
  std::printf("%s %s seed %llu: %llu env steps, %.3f s -> %s\n", harness::to_string(m.method).c_str(),
              envs::to_string(m.env).c_str(), static_cast<unsigned long long>(m.seed),
              static_cast<unsigned long long>(m.env_steps), m.wall_seconds, out.string().c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Train, distill, evaluate and compare visual control policies"};
  app.require_subcommand(1);

  Common state, visual, dist;
  auto* train_state = app.add_subcommand("train-state", "SAC teacher on the state view");
  add_common(train_state, state, true);
  auto* train_visual = app.add_subcommand("train-visual", "asymmetric actor-critic on pixels");
  add_common(train_visual, visual, true);
  auto* distill = app.add_subcommand("distill", "DAgger a visual student from a state teacher");
  add_common(distill, dist, true);
  distill->add_option("--teacher", dist.teacher, "teacher checkpoint (policy.ckpt of a train-state run)")
      ->required()
      ->check(CLI::ExistingFile);

  std::string eval_ckpt, eval_env, eval_out;
  std::uint64_t eval_seed = 0;
  std::size_t eval_episodes = 20;
  auto* eval = app.add_subcommand("eval", "evaluate a saved policy on held-out episodes");
  eval->add_option("--checkpoint", eval_ckpt, "policy checkpoint")->required()->check(CLI::ExistingFile);
  eval->add_option("--env", eval_env, "expected environment")->check(CLI::IsMember({"reach", "push", "swingup"}));
  eval->add_option("--seed", eval_seed, "environment seed");
  eval->add_option("--episodes", eval_episodes, "evaluation episodes")->check(CLI::PositiveNumber);
  eval->add_option("--out", eval_out, "write eval.json into this directory");

  std::string report_runs, report_out, report_config, report_ci;
  auto* report = app.add_subcommand("report", "aggregate complete runs into tables and curves");
  report->add_option("--runs", report_runs, "directory holding run directories")->required()->check(CLI::ExistingDirectory);
  report->add_option("--out", report_out, "report directory")->required();
  report->add_option("--config", report_config, "JSON config; its run section sets ci, window and threshold")
      ->check(CLI::ExistingFile);
  report->add_option("--ci", report_ci, "normal or t")->check(CLI::IsMember({"normal", "t"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "s2v: error: %s\n", e.what());
    return e.get_exit_code() != 0 ? e.get_exit_code() : 2;
  }

  try {
    if (*train_state) {
      auto req = request(state, harness::Method::state_rl);
      print_run(harness::run_state_rl(req), req.out);
    } else if (*train_visual) {
      auto req = request(visual, harness::Method::visual_rl);
      print_run(harness::run_visual_rl(req), req.out);
    } else if (*distill) {
      auto req = request(dist, harness::Method::s2v_dagger);
      print_run(harness::run_distill(req), req.out);
    } else if (*eval) {
      std::optional<envs::EnvId> expect;
      if (!eval_env.empty()) expect = envs::parse_env_id(eval_env);
      const auto rep = harness::evaluate_checkpoint(eval_ckpt, eval_episodes, eval_seed, expect);
      std::printf("%s %s %s %s over %zu episodes\n", envs::to_string(rep.env).c_str(), rep.agent.c_str(),
                  harness::to_string(rep.metric).c_str(), harness::format_double(rep.value).c_str(), rep.episodes);
      if (!eval_out.empty()) {
        fs::create_directories(eval_out);
        std::ofstream out(fs::path(eval_out) / "eval.json", std::ios::trunc);
        out << nlohmann::json{{"checkpoint", eval_ckpt},
                              {"env", envs::to_string(rep.env)},
                              {"agent", rep.agent},
                              {"metric", harness::to_string(rep.metric)},
                              {"value", rep.value},
                              {"episodes", rep.episodes},
                              {"env_seed", eval_seed}}
                   .dump(2)
            << '\n';
      }
    } else if (*report) {
      harness::ReportOptions opts;
      if (!report_config.empty()) {
        const auto cfg = harness::load_config(report_config, envs::EnvId::reach, harness::Method::state_rl);
        opts.ci = cfg.ci;
        opts.window_frac = cfg.window_frac;
        opts.difficulty_threshold = cfg.difficulty_threshold;
      }
      if (!report_ci.empty()) opts.ci = harness::parse_ci_method(report_ci);
      const auto res = harness::make_report(report_runs, report_out, opts);
      for (const auto& w : res.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
      for (const auto& f : res.files) std::printf("%s\n", f.string().c_str());
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "s2v: error: %s\n", e.what());
    return 1;
  }
  return 0;
}
