#include "s2v/rl/sac.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>

namespace s2v::rl {
namespace {

constexpr double kPolicyFinalScale = 1e-2;

nn::NetworkSpec mlp_spec(std::size_t in, std::size_t out, const NetConfig& net, double final_scale = 1.0) {
  nn::NetworkSpec s;
  s.kind = nn::NetworkKind::mlp;
  s.in_dim = in;
  s.out_dim = out;
  s.hidden = net.hidden;
  s.final_scale = final_scale;
  return s;
}

nn::NetworkSpec encoder_spec(envs::EnvId env, const NetConfig& net) {
  nn::NetworkSpec s;
  s.kind = nn::NetworkKind::conv_encoder;
  s.height = envs::kCanvas;
  s.width = envs::kCanvas;
  s.in_channels = envs::visual_channels(env);
  s.channels = net.channels;
  s.feature_dim = net.feature_dim;
  return s;
}

void check_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw nn::NonFiniteError(std::string(what) + " is not finite (" + std::to_string(v) + ")");
}

Tensor rows_to_tensor(const std::vector<const replay::Transition*>& records,
                      const std::vector<double> replay::Transition::*field) {
  const std::size_t n = (records.front()->*field).size();
  Tensor t({records.size(), n});
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& v = records[i]->*field;
    if (v.size() != n) throw std::invalid_argument("transition batch has ragged rows");
    std::copy(v.begin(), v.end(), t.raw() + i * n);
  }
  return t;
}

nlohmann::json net_json(const NetConfig& net) {
  return {{"hidden", net.hidden}, {"channels", net.channels}, {"feature_dim", net.feature_dim}};
}

}  // namespace

std::size_t updates_due(std::uint64_t step, std::uint64_t warmup, double utd) {
  if (!(utd > 0.0)) throw std::invalid_argument("update-to-data ratio must be positive");
  if (step <= warmup) return 0;
  if (utd >= 1.0) return static_cast<std::size_t>(std::floor(utd));
  const auto every = static_cast<std::uint64_t>(std::llround(1.0 / utd));
  return (step - warmup) % every == 0 ? 1 : 0;
}

std::string to_string(AgentKind kind) {
  return kind == AgentKind::state_teacher ? "state-teacher" : "asymmetric-visual";
}

AgentKind parse_agent_kind(const std::string& name) {
  if (name == "state-teacher") return AgentKind::state_teacher;
  if (name == "asymmetric-visual") return AgentKind::asymmetric_visual;
  throw std::invalid_argument("unknown agent kind '" + name + "'");
}

std::string to_string(View view) { return view == View::state ? "state" : "visual"; }

PolicyInput state_input(const std::vector<std::vector<double>>& states) {
  if (states.empty()) throw std::invalid_argument("empty state batch");
  const std::size_t n = states.front().size();
  Tensor t({states.size(), n});
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (states[i].size() != n) throw std::invalid_argument("ragged state batch");
    std::copy(states[i].begin(), states[i].end(), t.raw() + i * n);
  }
  return {View::state, std::move(t)};
}

PolicyInput visual_input(const std::vector<Tensor>& visuals) {
  if (visuals.empty()) throw std::invalid_argument("empty visual batch");
  const auto& s = visuals.front().shape();
  if (s.size() != 3) throw std::invalid_argument("visual observation must be [C, H, W]");
  Tensor t({visuals.size(), s[0], s[1], s[2]});
  const std::size_t n = visuals.front().size();
  for (std::size_t i = 0; i < visuals.size(); ++i) {
    if (visuals[i].shape() != s) throw std::invalid_argument("ragged visual batch");
    std::copy_n(visuals[i].raw(), n, t.raw() + i * n);
  }
  return {View::visual, std::move(t)};
}

PolicyInput visual_input(const std::vector<const replay::PackedVisual*>& visuals) {
  if (visuals.empty()) throw std::invalid_argument("empty visual batch");
  const auto& s = visuals.front()->shape();
  if (s.size() != 3) throw std::invalid_argument("visual observation must be [C, H, W]");
  Tensor t({visuals.size(), s[0], s[1], s[2]});
  const std::size_t n = visuals.front()->size();
  for (std::size_t i = 0; i < visuals.size(); ++i) {
    if (visuals[i]->shape() != s) throw std::invalid_argument("ragged visual batch");
    visuals[i]->unpack_into(t.raw() + i * n);
  }
  return {View::visual, std::move(t)};
}

// SacAgent

SacAgent::SacAgent(AgentKind kind, envs::EnvId env, const NetConfig& net, const SacConfig& sac, std::uint64_t seed)
    : kind_(kind), env_(env), net_(net), action_dim_(envs::action_dim(env)) {
  const std::size_t s_dim = envs::state_dim(env);
  Rng rng(seed);
  if (kind_ == AgentKind::asymmetric_visual) {
    encoder_ = nn::ConvEncoder("enc.", encoder_spec(env, net));
    encoder_.init(actor, rng);
    actor_mlp_ = nn::Mlp("pi.", mlp_spec(net.feature_dim, 2 * action_dim_, net, kPolicyFinalScale));
  } else {
    actor_mlp_ = nn::Mlp("pi.", mlp_spec(s_dim, 2 * action_dim_, net, kPolicyFinalScale));
  }
  actor_mlp_.init(actor, rng);
  for (int i = 0; i < 2; ++i) {
    q_[i] = nn::Mlp("q" + std::to_string(i) + ".", mlp_spec(s_dim + action_dim_, 1, net));
    q_[i].init(critic, rng);
  }
  critic_target = critic;
  temperature.add("log_alpha", Tensor::scalar(std::log(sac.init_alpha)));
  actor_opt = nn::AdamState::for_params(actor);
  critic_opt = nn::AdamState::for_params(critic);
  alpha_opt = nn::AdamState::for_params(temperature);
}

double SacAgent::alpha() const { return std::exp(log_alpha()); }

SacAgent::Head SacAgent::actor_head(Graph& g, const PolicyInput& input) const {
  if (input.view != actor_view())
    throw std::invalid_argument(to_string(kind_) + " actor consumes the " + to_string(actor_view()) +
                                " view, got " + to_string(input.view));
  Var h;
  if (kind_ == AgentKind::asymmetric_visual)
    h = encoder_.forward(g, actor, g.constant(nn::chw_to_nhwc(input.batch)));
  else
    h = g.constant(input.batch);
  Var out = actor_mlp_.forward(g, actor, h);
  return {columns(out, 0, action_dim_), columns(out, action_dim_, 2 * action_dim_)};
}

Var SacAgent::q_value(Graph& g, const ParamSet& critic_params, int which, Var state, Var action) const {
  return q_[which].forward(g, critic_params, concat_cols(state, action));
}

Tensor SacAgent::act(const PolicyInput& input, ActionMode mode, Rng& rng) const {
  Graph g;
  Head head = actor_head(g, input);
  if (mode == ActionMode::deterministic) {
    const double edge = std::nextafter(1.0, 0.0);
    return clamp(tanh(head.mean), -edge, edge).value();
  }
  Tensor noise = rng.normal_tensor(head.mean.shape());
  return nn::squashed_gaussian_sample(head.mean, head.log_std, noise).action.value();
}

PolicyInput SacAgent::actor_input(const envs::DualObservation& obs) const {
  if (actor_view() == View::state) return state_input({obs.state});
  return visual_input(std::vector<Tensor>{obs.visual});
}

nn::Checkpoint SacAgent::to_checkpoint() const {
  nn::Checkpoint ck;
  ck.params.merge(actor, "actor/");
  ck.params.merge(critic, "critic/");
  ck.params.merge(critic_target, "target/");
  ck.params.merge(temperature, "temperature/");
  ck.metadata = {{"agent", to_string(kind_)}, {"env", envs::to_string(env_)}, {"net", net_json(net_)}};
  return ck;
}

SacAgent SacAgent::from_checkpoint(const nn::Checkpoint& ck) {
  const auto& md = ck.metadata;
  if (!md.contains("agent") || !md.contains("env") || !md.contains("net"))
    throw nn::CheckpointError("checkpoint does not describe an RL agent");
  NetConfig net;
  net.hidden = md["net"]["hidden"].get<std::vector<std::size_t>>();
  net.channels = md["net"]["channels"].get<std::vector<std::size_t>>();
  net.feature_dim = md["net"]["feature_dim"].get<std::size_t>();
  SacAgent agent(parse_agent_kind(md["agent"]), envs::parse_env_id(md["env"]), net, SacConfig{}, 0);
  auto load = [&](ParamSet& dst, const std::string& prefix) {
    ParamSet src = ParamSet::extract(ck.params, prefix);
    if (!dst.same_layout(src)) throw nn::CheckpointError("checkpoint '" + prefix + "' parameters do not match the network");
    dst.assign(src);
  };
  load(agent.actor, "actor/");
  load(agent.critic, "critic/");
  load(agent.critic_target, "target/");
  load(agent.temperature, "temperature/");
  return agent;
}

Tensor select_action(const SacAgent& agent, const PolicyInput& input, ActionMode mode, Rng& rng) {
  return agent.act(input, mode, rng);
}

std::vector<double> select_action(const SacAgent& agent, const envs::DualObservation& obs, ActionMode mode,
                                  Rng& rng) {
  return agent.act(agent.actor_input(obs), mode, rng).vec();
}

// Updates

Batch make_batch(const SacAgent& agent, const std::vector<const replay::Transition*>& records) {
  if (records.empty()) throw std::invalid_argument("empty transition batch");
  Batch b;
  b.state = rows_to_tensor(records, &replay::Transition::state);
  b.action = rows_to_tensor(records, &replay::Transition::action);
  b.next_state = rows_to_tensor(records, &replay::Transition::next_state);
  b.reward = Tensor({records.size(), 1});
  b.done = Tensor({records.size(), 1});
  for (std::size_t i = 0; i < records.size(); ++i) {
    b.reward[i] = records[i]->reward;
    b.done[i] = records[i]->done ? 1.0 : 0.0;
  }
  if (agent.actor_view() == View::state) {
    b.actor_obs = {View::state, b.state};
    b.actor_next_obs = {View::state, b.next_state};
  } else {
    std::vector<const replay::PackedVisual*> v, nv;
    for (auto* r : records) {
      if (r->visual.empty() || r->next_visual.empty())
        throw std::invalid_argument("visual agent needs transitions with pixel observations");
      v.push_back(&r->visual);
      nv.push_back(&r->next_visual);
    }
    b.actor_obs = visual_input(v);
    b.actor_next_obs = visual_input(nv);
  }
  return b;
}

Tensor soft_target(const Tensor& reward, const Tensor& done, const Tensor& min_q_next, const Tensor& log_prob_next,
                   double gamma, double alpha) {
  const std::size_t n = reward.size();
  if (done.size() != n || min_q_next.size() != n || log_prob_next.size() != n)
    throw nn::ShapeError("soft_target: batch sizes disagree");
  Tensor y(reward.shape());
  for (std::size_t i = 0; i < n; ++i)
    y[i] = reward[i] + gamma * (1.0 - done[i]) * (min_q_next[i] - alpha * log_prob_next[i]);
  return y;
}

Tensor critic_targets(const SacAgent& agent, const Batch& batch, double gamma, Rng& rng) {
  Graph g;
  auto head = agent.actor_head(g, batch.actor_next_obs);
  Tensor noise = rng.normal_tensor(head.mean.shape());
  auto next = nn::squashed_gaussian_sample(head.mean, head.log_std, noise);
  Var s = g.constant(batch.next_state);
  Var q = minimum(agent.q_value(g, agent.critic_target, 0, s, next.action),
                  agent.q_value(g, agent.critic_target, 1, s, next.action));
  return soft_target(batch.reward, batch.done, q.value(), next.log_prob.value(), gamma, agent.alpha());
}

double critic_update(SacAgent& agent, const Batch& batch, const SacConfig& cfg, Rng& rng) {
  const Tensor y = critic_targets(agent, batch, cfg.gamma, rng);
  Graph g;
  Var target = g.constant(y);
  Var s = g.constant(batch.state), a = g.constant(batch.action);
  Var loss = mean(square(agent.q_value(g, agent.critic, 0, s, a) - target)) +
             mean(square(agent.q_value(g, agent.critic, 1, s, a) - target));
  const double value = loss.value()[0];
  check_finite(value, "critic loss");
  ParamSet grads = nn::grad(loss, agent.critic);
  nn::adam_step(agent.critic, grads, agent.critic_opt, cfg.lr);
  return value;
}

UpdateReport sac_update(SacAgent& agent, const Batch& batch, const SacConfig& cfg, Rng& rng) {
  UpdateReport rep;
  rep.critic_loss = critic_update(agent, batch, cfg, rng);

  const double alpha = agent.alpha();
  double mean_log_prob = 0.0;
  {
    Graph g;
    g.freeze(agent.critic);
    auto head = agent.actor_head(g, batch.actor_obs);
    Tensor noise = rng.normal_tensor(head.mean.shape());
    auto pi = nn::squashed_gaussian_sample(head.mean, head.log_std, noise);
    Var s = g.constant(batch.state);
    Var q = minimum(agent.q_value(g, agent.critic, 0, s, pi.action), agent.q_value(g, agent.critic, 1, s, pi.action));
    Var loss = mean(scale(pi.log_prob, alpha) - q);
    rep.actor_loss = loss.value()[0];
    check_finite(rep.actor_loss, "actor loss");
    for (double v : pi.log_prob.value().data()) mean_log_prob += v;
    mean_log_prob /= static_cast<double>(pi.log_prob.value().size());
    ParamSet grads = nn::grad(loss, agent.actor);
    nn::adam_step(agent.actor, grads, agent.actor_opt, cfg.lr);
  }
  rep.entropy = -mean_log_prob;

  if (cfg.autotune) {
    const double target_entropy = -static_cast<double>(agent.action_dim());
    Graph g;
    Var log_alpha = g.param(agent.temperature, "log_alpha");
    Var loss = scale(log_alpha, -(mean_log_prob + target_entropy));
    rep.alpha_loss = loss.value()[0];
    check_finite(rep.alpha_loss, "temperature loss");
    ParamSet grads = nn::grad(loss, agent.temperature);
    nn::adam_step(agent.temperature, grads, agent.alpha_opt, cfg.lr);
  }
  rep.alpha = agent.alpha();

  polyak_update(agent.critic_target, agent.critic, cfg.tau);
  return rep;
}

UpdateReport sac_update_step(SacAgent& agent, const replay::RingBuffer<replay::Transition>& buffer,
                             const SacConfig& cfg, Rng& rng) {
  if (buffer.size() < cfg.batch_size)
    throw std::logic_error("buffer holds " + std::to_string(buffer.size()) + " transitions, batch needs " +
                           std::to_string(cfg.batch_size));
  return sac_update(agent, make_batch(agent, buffer.sample_batch(cfg.batch_size, rng)), cfg, rng);
}

void polyak_update(ParamSet& target, const ParamSet& online, double tau) {
  if (!target.same_layout(online)) throw nn::ShapeError("polyak_update: layouts differ");
  for (std::size_t i = 0; i < target.size(); ++i) {
    auto dst = target.entry(i).second.data();
    auto src = online.entry(i).second.data();
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] = tau * src[k] + (1.0 - tau) * dst[k];
  }
}

double evaluate(const std::function<std::vector<double>(const envs::DualObservation&)>& policy,
                const envs::EnvConfig& env_cfg, std::size_t episodes) {
  if (episodes == 0) throw std::invalid_argument("evaluation needs at least one episode");
  envs::Env env(env_cfg);
  const bool returns = harness::metric_kind(env_cfg.id) == harness::MetricKind::episode_return;
  double total = 0.0;
  for (std::size_t k = 0; k < episodes; ++k) {
    auto obs = env.reset(kEvalSeedBase + k);
    double ret = 0.0;
    bool success = false;
    while (!env.done()) {
      auto r = env.step(policy(obs));
      ret += r.reward;
      success = success || r.success.value_or(false);
      obs = std::move(r.observation);
    }
    total += returns ? ret : (success ? 1.0 : 0.0);
  }
  return total / static_cast<double>(episodes);
}

TrainResult train_rl(AgentKind kind, const envs::EnvConfig& env_cfg, const NetConfig& net, const SacConfig& cfg,
                     const TrainOptions& opts) {
  if (opts.total_steps < cfg.warmup)
    throw std::invalid_argument("total steps (" + std::to_string(opts.total_steps) + ") below warmup (" +
                                std::to_string(cfg.warmup) + ")");
  if (cfg.eval_interval == 0) throw std::invalid_argument("eval interval must be positive");
  TrainResult out{SacAgent(kind, env_cfg.id, net, cfg, opts.seed), {harness::metric_kind(env_cfg.id), {}}, 0, 0.0, 0};
  SacAgent& agent = out.agent;
  const bool keep_pixels = agent.actor_view() == View::visual;

  Rng rng(opts.seed ^ 0x5DEECE66DULL);
  replay::RingBuffer<replay::Transition> buffer(cfg.buffer_capacity);
  std::unique_ptr<harness::CurveWriter> writer;
  if (!opts.curve_path.empty()) writer = std::make_unique<harness::CurveWriter>(opts.curve_path);

  envs::Env env(env_cfg);
  std::uint64_t episode = 0;
  auto obs = env.reset(episode);
  harness::RunClock clock(opts.clock);
  const std::size_t adim = envs::action_dim(env_cfg.id);

  auto eval_point = [&](std::uint64_t step) {
    clock.pause();
    Rng unused(0);
    const double metric = evaluate(
        [&](const envs::DualObservation& o) { return select_action(agent, o, ActionMode::deterministic, unused); },
        env_cfg, cfg.eval_episodes);
    harness::CurvePoint p{step, clock.seconds(), metric};
    out.curve.append(p);
    if (writer) writer->write(p);
    if (opts.on_eval) opts.on_eval(p);
    clock.resume();
  };

  for (std::uint64_t step = 1; step <= opts.total_steps; ++step) {
    std::vector<double> action(adim);
    if (step <= cfg.warmup) {
      for (auto& a : action) a = rng.uniform(-1.0, 1.0);
    } else {
      action = select_action(agent, obs, ActionMode::stochastic, rng);
    }
    auto res = env.step(action);
    clock.count_env_steps();

    replay::Transition t;
    t.state = obs.state;
    t.action = action;
    t.reward = res.reward;
    t.next_state = res.observation.state;
    t.done = false;
    if (keep_pixels) {
      t.visual = replay::PackedVisual(obs.visual);
      t.next_visual = replay::PackedVisual(res.observation.visual);
    }
    buffer.push(std::move(t));
    ++out.transitions_stored;

    obs = res.done ? env.reset(++episode) : std::move(res.observation);

    if (buffer.size() >= cfg.batch_size)
      for (std::size_t u = updates_due(step, cfg.warmup, cfg.utd); u > 0; --u) {
        sac_update_step(agent, buffer, cfg, rng);
        ++out.updates;
      }

    if (step % cfg.eval_interval == 0 || step == opts.total_steps) eval_point(step);
  }
  out.env_steps = opts.total_steps;
  out.wall_seconds = clock.seconds();
  return out;
}

}  // namespace s2v::rl
