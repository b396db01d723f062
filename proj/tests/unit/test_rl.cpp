#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "s2v/rl/sac.hpp"

using namespace s2v;
using namespace s2v::rl;
using nn::Tensor;

namespace {

NetConfig small_net() {
  NetConfig n;
  n.hidden = {32, 32};
  n.channels = {8, 8, 8};
  n.feature_dim = 16;
  return n;
}

SacConfig small_sac() {
  SacConfig c;
  c.batch_size = 32;
  c.warmup = 100;
  c.eval_interval = 100;
  c.eval_episodes = 2;
  c.buffer_capacity = 5000;
  return c;
}

replay::RingBuffer<replay::Transition> random_buffer(envs::EnvId id, std::size_t n, bool pixels, std::uint64_t seed) {
  replay::RingBuffer<replay::Transition> buf(n);
  envs::Env env(envs::default_config(id, seed));
  nn::Rng rng(seed);
  std::uint64_t ep = 0;
  auto obs = env.reset(ep);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> a(envs::action_dim(id));
    for (auto& v : a) v = rng.uniform(-1, 1);
    auto r = env.step(a);
    replay::Transition t{obs.state, {}, a, r.reward, r.observation.state, {}, false};
    if (pixels) {
      t.visual = replay::PackedVisual(obs.visual);
      t.next_visual = replay::PackedVisual(r.observation.visual);
    }
    buf.push(std::move(t));
    obs = r.done ? env.reset(++ep) : r.observation;
  }
  return buf;
}

std::vector<const replay::Transition*> first_n(const replay::RingBuffer<replay::Transition>& b, std::size_t n) {
  std::vector<const replay::Transition*> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(&b[i]);
  return out;
}

double critic_loss_on(const SacAgent& agent, const Batch& batch, const Tensor& y) {
  nn::Graph g;
  auto s = g.constant(batch.state), a = g.constant(batch.action), t = g.constant(y);
  auto loss = mean(square(agent.q_value(g, agent.critic, 0, s, a) - t)) +
              mean(square(agent.q_value(g, agent.critic, 1, s, a) - t));
  return loss.value()[0];
}

// Sets the log_std half of the policy output to a constant via the last bias.
void force_log_std(SacAgent& agent, double value) {
  const std::string last = "pi.l" + std::to_string(agent.net().hidden.size());
  auto& w = agent.actor.at(last + ".w");
  auto& b = agent.actor.at(last + ".b");
  const std::size_t A = agent.action_dim();
  for (std::size_t r = 0; r < w.rows(); ++r)
    for (std::size_t c = A; c < 2 * A; ++c) w[r * w.cols() + c] = 0.0;
  for (std::size_t c = A; c < 2 * A; ++c) b[c] = value;
}

}  // namespace

TEST_CASE("soft target arithmetic") {
  const Tensor one({1, 1}, {1.0}), zero({1, 1}, {0.0});
  const Tensor q({1, 1}, {2.0}), lp({1, 1}, {-0.7});
  CHECK(soft_target(one, one, q, lp, 0.99, 0.3)[0] == 1.0);
  CHECK(soft_target(one, zero, q, lp, 0.0, 0.3)[0] == 1.0);
  CHECK(soft_target(one, zero, q, lp, 0.8, 0.0)[0] == doctest::Approx(2.6).epsilon(1e-15));
  CHECK(soft_target(one, zero, q, lp, 0.5, 1.0)[0] == doctest::Approx(1.0 + 0.5 * (2.0 + 0.7)));
}

TEST_CASE("critic targets mask terminal transitions") {
  SacAgent agent(AgentKind::state_teacher, envs::EnvId::reach, small_net(), small_sac(), 1);
  auto buf = random_buffer(envs::EnvId::reach, 64, false, 2);
  auto batch = make_batch(agent, first_n(buf, 64));
  for (std::size_t i = 0; i < 64; ++i) batch.done[i] = 1.0;
  nn::Rng rng(3);
  auto y = critic_targets(agent, batch, 0.8, rng);
  for (std::size_t i = 0; i < 64; ++i) CHECK(y[i] == batch.reward[i]);
  for (std::size_t i = 0; i < 64; ++i) batch.done[i] = 0.0;
  auto y0 = critic_targets(agent, batch, 0.0, rng);
  for (std::size_t i = 0; i < 64; ++i) CHECK(y0[i] == batch.reward[i]);
}

TEST_CASE("update-to-data schedule") {
  std::size_t quarter = 0, one = 0, two = 0;
  for (std::uint64_t s = 1; s <= 1000 + 400; ++s) {
    quarter += updates_due(s, 1000, 0.25);
    one += updates_due(s, 1000, 1.0);
    two += updates_due(s, 1000, 2.0);
  }
  CHECK(quarter == 100);
  CHECK(one == 400);
  CHECK(two == 800);
  CHECK(updates_due(1004, 1000, 0.25) == 1);
  CHECK(updates_due(1003, 1000, 0.25) == 0);
  CHECK(updates_due(1008, 1000, 0.125) == 1);
  CHECK(updates_due(1000, 1000, 1.0) == 0);
  CHECK_THROWS_AS(updates_due(5, 0, 0.0), std::invalid_argument);
}

TEST_CASE("tau = 1 copies the critics into the targets") {
  auto cfg = small_sac();
  cfg.tau = 1.0;
  SacAgent agent(AgentKind::state_teacher, envs::EnvId::push, small_net(), cfg, 4);
  auto buf = random_buffer(envs::EnvId::push, 200, false, 4);
  nn::Rng rng(5);
  sac_update_step(agent, buf, cfg, rng);
  CHECK(agent.critic_target == agent.critic);

  cfg.tau = 0.005;
  const auto before = agent.critic_target;
  sac_update_step(agent, buf, cfg, rng);
  CHECK_FALSE(agent.critic_target == before);
  CHECK_FALSE(agent.critic_target == agent.critic);
}

TEST_CASE("temperature moves toward the entropy target") {
  auto cfg = small_sac();
  auto buf = random_buffer(envs::EnvId::reach, 200, false, 6);
  for (double log_std : {-5.0, 0.0}) {
    SacAgent agent(AgentKind::state_teacher, envs::EnvId::reach, small_net(), cfg, 7);
    force_log_std(agent, log_std);
    const double before = agent.log_alpha();
    nn::Rng rng(8);
    auto rep = sac_update_step(agent, buf, cfg, rng);
    const double target = -static_cast<double>(agent.action_dim());
    if (log_std < 0) {
      CHECK(rep.entropy < target);
      CHECK(agent.log_alpha() > before);
    } else {
      CHECK(rep.entropy > target);
      CHECK(agent.log_alpha() < before);
    }
  }
  cfg.autotune = false;
  SacAgent fixed(AgentKind::state_teacher, envs::EnvId::reach, small_net(), cfg, 7);
  nn::Rng rng(1);
  const double before = fixed.log_alpha();
  sac_update_step(fixed, buf, cfg, rng);
  CHECK(fixed.log_alpha() == before);
}

TEST_CASE("updates are deterministic from identical state") {
  auto cfg = small_sac();
  for (auto kind : {AgentKind::state_teacher, AgentKind::asymmetric_visual}) {
    auto buf = random_buffer(envs::EnvId::reach, 200, true, 9);
    SacAgent a(kind, envs::EnvId::reach, small_net(), cfg, 10);
    SacAgent b = a;
    nn::Rng ra(11), rb(11);
    for (int i = 0; i < 3; ++i) CHECK(sac_update_step(a, buf, cfg, ra) == sac_update_step(b, buf, cfg, rb));
    CHECK(a.actor == b.actor);
    CHECK(a.critic == b.critic);
  }
}

TEST_CASE("select_action contract") {
  auto cfg = small_sac();
  SacAgent teacher(AgentKind::state_teacher, envs::EnvId::push, small_net(), cfg, 12);
  SacAgent visual(AgentKind::asymmetric_visual, envs::EnvId::push, small_net(), cfg, 12);
  envs::Env env(envs::default_config(envs::EnvId::push, 0));
  auto obs = env.reset(0);

  nn::Rng r1(1), r2(2);
  CHECK(select_action(teacher, obs, ActionMode::deterministic, r1) ==
        select_action(teacher, obs, ActionMode::deterministic, r2));
  CHECK(r1 == nn::Rng(1));

  force_log_std(teacher, 2.0);
  for (int i = 0; i < 200; ++i)
    for (double a : select_action(teacher, obs, ActionMode::stochastic, r1)) {
      CHECK(a > -1.0);
      CHECK(a < 1.0);
    }

  nn::Graph g;
  auto head = teacher.actor_head(g, teacher.actor_input(obs));
  auto zero = nn::squashed_gaussian_sample(head.mean, head.log_std, Tensor(head.mean.shape()));
  CHECK(zero.action.value().vec() == select_action(teacher, obs, ActionMode::deterministic, r1));

  CHECK_THROWS_AS(select_action(teacher, visual_input(std::vector<Tensor>{obs.visual}), ActionMode::deterministic, r1),
                  std::invalid_argument);
  CHECK_THROWS_AS(select_action(visual, state_input({obs.state}), ActionMode::deterministic, r1),
                  std::invalid_argument);
}

TEST_CASE("asymmetric actor ignores the state view") {
  SacAgent agent(AgentKind::asymmetric_visual, envs::EnvId::push, small_net(), small_sac(), 13);
  envs::Env env(envs::default_config(envs::EnvId::push, 1));
  auto obs = env.reset(3);
  for (int t = 0; t < 10; ++t) {
    auto blind = obs;
    std::fill(blind.state.begin(), blind.state.end(), 0.0);
    nn::Rng r(0);
    CHECK(select_action(agent, obs, ActionMode::deterministic, r) ==
          select_action(agent, blind, ActionMode::deterministic, r));
    nn::Rng ra(5), rb(5);
    CHECK(select_action(agent, obs, ActionMode::stochastic, ra) ==
          select_action(agent, blind, ActionMode::stochastic, rb));
    obs = env.step(std::vector<double>{0.5, -0.2}).observation;
  }
}

TEST_CASE("critic regression on a frozen buffer") {
  auto cfg = small_sac();
  cfg.batch_size = 64;
  cfg.lr = 1e-3;
  SacAgent agent(AgentKind::state_teacher, envs::EnvId::reach, small_net(), cfg, 14);
  auto buf = random_buffer(envs::EnvId::reach, 2000, false, 15);
  auto probe = make_batch(agent, first_n(buf, 512));
  nn::Rng rng(16);
  const Tensor y = critic_targets(agent, probe, cfg.gamma, rng);
  const double before = critic_loss_on(agent, probe, y);
  for (int i = 0; i < 500; ++i) critic_update(agent, make_batch(agent, buf.sample_batch(cfg.batch_size, rng)), cfg, rng);
  const double after = critic_loss_on(agent, probe, critic_targets(agent, probe, cfg.gamma, rng));
  MESSAGE("critic loss " << before << " -> " << after);
  CHECK(after <= 0.5 * before);
}

TEST_CASE("checkpoint round trip preserves every parameter") {
  auto dir = std::filesystem::temp_directory_path() / "s2v_rl_ckpt";
  std::filesystem::create_directories(dir);
  for (auto kind : {AgentKind::state_teacher, AgentKind::asymmetric_visual}) {
    SacAgent agent(kind, envs::EnvId::swingup, small_net(), small_sac(), 17);
    auto path = dir / ("agent_" + to_string(kind) + ".json");
    nn::save_checkpoint(path, agent.to_checkpoint());
    SacAgent back = SacAgent::from_checkpoint(nn::load_checkpoint(path));
    CHECK(back.kind() == kind);
    CHECK(back.env() == envs::EnvId::swingup);
    CHECK(back.actor == agent.actor);
    CHECK(back.critic == agent.critic);
    CHECK(back.critic_target == agent.critic_target);
    CHECK(back.temperature == agent.temperature);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("train_rl bookkeeping and determinism") {
  auto cfg = small_sac();
  TrainOptions o;
  o.total_steps = 450;
  o.seed = 3;
  auto path = std::filesystem::temp_directory_path() / "s2v_rl_curve.csv";
  o.curve_path = path;
  auto a = train_rl(AgentKind::state_teacher, envs::default_config(envs::EnvId::reach, 3), small_net(), cfg, o);
  o.curve_path.clear();
  auto b = train_rl(AgentKind::state_teacher, envs::default_config(envs::EnvId::reach, 3), small_net(), cfg, o);
  CHECK(a.curve == b.curve);
  CHECK(a.agent.actor == b.agent.actor);
  REQUIRE(a.curve.points.size() == 5);
  CHECK(a.curve.points.back().env_steps == 450);
  for (std::size_t i = 1; i < a.curve.points.size(); ++i) {
    CHECK(a.curve.points[i].env_steps > a.curve.points[i - 1].env_steps);
    CHECK(a.curve.points[i].wall_seconds >= a.curve.points[i - 1].wall_seconds);
  }
  CHECK(a.transitions_stored == 450);
  CHECK(a.updates == 350);
  CHECK(harness::read_curve_csv(path, harness::MetricKind::success_rate) == a.curve);
  std::filesystem::remove(path);
  o.total_steps = 50;
  CHECK_THROWS_AS(train_rl(AgentKind::state_teacher, envs::default_config(envs::EnvId::reach, 3), small_net(), cfg, o),
                  std::invalid_argument);
}

TEST_CASE("asymmetric training runs with pixel transitions") {
  auto cfg = small_sac();
  cfg.utd = 0.25;
  TrainOptions o;
  o.total_steps = 300;
  auto r = train_rl(AgentKind::asymmetric_visual, envs::default_config(envs::EnvId::push, 0), small_net(), cfg, o);
  CHECK(r.updates == 50);
  CHECK(r.curve.points.size() == 3);
}
