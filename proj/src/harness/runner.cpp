#include "s2v/harness/runner.hpp"

#include <fstream>
#include <stdexcept>

#include "s2v/dagger/dagger.hpp"
#include "s2v/rl/sac.hpp"

namespace s2v::harness {
namespace {

namespace fs = std::filesystem;

RunManifest begin_run(const RunRequest& req, Method method) {
  RunManifest m;
  m.method = method;
  m.env = req.env;
  m.seed = req.seed;
  m.metric = metric_kind(req.env);
  m.config = to_json(req.config);
  fs::create_directories(req.out);
  fs::remove(req.out / kCurveFile);
  write_manifest(req.out, m);
  return m;
}

RunManifest run_rl(const RunRequest& req, rl::AgentKind kind, Method method) {
  RunManifest m = begin_run(req, method);
  rl::TrainOptions opts;
  opts.total_steps = req.config.steps;
  opts.seed = req.seed;
  opts.clock = req.config.clock;
  opts.curve_path = req.out / kCurveFile;
  auto res = rl::train_rl(kind, envs::default_config(req.env, req.seed), req.config.net, req.config.sac, opts);
  nn::save_checkpoint(req.out / kCheckpointFile, res.agent.to_checkpoint());
  m.env_steps = res.env_steps;
  m.wall_seconds = res.wall_seconds;
  m.complete = true;
  write_manifest(req.out, m);
  return m;
}

}  // namespace

RunManifest run_state_rl(const RunRequest& req) { return run_rl(req, rl::AgentKind::state_teacher, Method::state_rl); }

RunManifest run_visual_rl(const RunRequest& req) {
  return run_rl(req, rl::AgentKind::asymmetric_visual, Method::visual_rl);
}

RunManifest run_distill(const RunRequest& req) {
  if (req.teacher.empty()) throw std::invalid_argument("distill needs a teacher checkpoint");
  const RunManifest stage1 = read_manifest(req.teacher.parent_path());
  if (!stage1.complete) throw std::invalid_argument("teacher run in " + req.teacher.parent_path().string() + " is not complete");
  if (stage1.method != Method::state_rl)
    throw std::invalid_argument("teacher run is " + to_string(stage1.method) + ", expected state_rl");
  const auto teacher = rl::SacAgent::from_checkpoint(nn::load_checkpoint(req.teacher));
  if (teacher.env() != req.env || stage1.env != req.env)
    throw std::invalid_argument("teacher was trained on " + envs::to_string(teacher.env()) + ", not " +
                                envs::to_string(req.env));

  RunManifest m = begin_run(req, Method::s2v_dagger);
  m.offsets = {stage1.env_steps, stage1.wall_seconds};
  m.teacher_checkpoint = req.teacher.string();
  write_manifest(req.out, m);

  dagger::DistillOptions opts;
  opts.total_steps = req.config.steps;
  opts.seed = req.seed;
  opts.clock = req.config.clock;
  opts.curve_path = req.out / kCurveFile;
  auto res = dagger::distill(teacher, envs::default_config(req.env, req.seed), req.config.net, req.config.dagger, opts);
  nn::save_checkpoint(req.out / kCheckpointFile, res.student.to_checkpoint());
  {
    std::ofstream rounds(req.out / "rounds.csv", std::ios::trunc);
    rounds << "round,collected,grad_steps,final_loss,min_loss\n";
    for (std::size_t i = 0; i < res.rounds.size(); ++i) {
      const auto& r = res.rounds[i];
      rounds << i << ',' << r.collected << ',' << r.grad_steps_used << ',' << format_double(r.final_loss) << ','
             << format_double(r.min_loss) << '\n';
    }
  }
  m.env_steps = res.env_steps;
  m.wall_seconds = res.wall_seconds;
  m.complete = true;
  write_manifest(req.out, m);
  return m;
}

EvalReport evaluate_checkpoint(const fs::path& ckpt, std::size_t episodes, std::uint64_t env_seed,
                               std::optional<envs::EnvId> expect_env) {
  const nn::Checkpoint ck = nn::load_checkpoint(ckpt);
  const std::string agent = ck.metadata.value("agent", "");
  const auto env = envs::parse_env_id(ck.metadata.value("env", ""));
  if (expect_env && *expect_env != env)
    throw std::invalid_argument(ckpt.string() + " holds a " + envs::to_string(env) + " policy, not " +
                                envs::to_string(*expect_env));
  const auto cfg = envs::default_config(env, env_seed);
  EvalReport rep{env, agent, metric_kind(env), 0.0, episodes};
  if (agent == "visual-student") {
    const auto student = dagger::StudentPolicy::from_checkpoint(ck);
    rep.value = rl::evaluate([&](const envs::DualObservation& o) { return student.act(o); }, cfg, episodes);
  } else {
    const auto sac = rl::SacAgent::from_checkpoint(ck);
    nn::Rng rng(env_seed);
    rep.value = rl::evaluate(
        [&](const envs::DualObservation& o) {
          return rl::select_action(sac, o, rl::ActionMode::deterministic, rng);
        },
        cfg, episodes);
  }
  return rep;
}

}  // namespace s2v::harness
