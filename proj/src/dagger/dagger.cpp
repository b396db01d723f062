#include "s2v/dagger/dagger.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

namespace s2v::dagger {
namespace {

constexpr double kHeadFinalScale = 1e-2;

nlohmann::json net_json(const rl::NetConfig& net) {
  return {{"hidden", net.hidden}, {"channels", net.channels}, {"feature_dim", net.feature_dim}};
}

}  // namespace

std::size_t DaggerConfig::max_grad_steps() const {
  if (!(utd > 0.0)) throw std::invalid_argument("update-to-data ratio must be positive");
  return static_cast<std::size_t>(std::ceil(utd * static_cast<double>(n_collect)));
}

StudentPolicy::StudentPolicy(envs::EnvId env, const rl::NetConfig& net, std::uint64_t seed) : env_(env), net_(net) {
  nn::NetworkSpec enc;
  enc.kind = nn::NetworkKind::conv_encoder;
  enc.height = envs::kCanvas;
  enc.width = envs::kCanvas;
  enc.in_channels = envs::visual_channels(env);
  enc.channels = net.channels;
  enc.feature_dim = net.feature_dim;
  encoder_ = nn::ConvEncoder("enc.", enc);

  nn::NetworkSpec head;
  head.in_dim = net.feature_dim;
  head.out_dim = envs::action_dim(env);
  head.hidden = net.hidden;
  head.final_scale = kHeadFinalScale;
  head_ = nn::Mlp("pi.", head);

  nn::Rng rng(seed);
  encoder_.init(params, rng);
  head_.init(params, rng);
  opt = nn::AdamState::for_params(params);
}

nn::Var StudentPolicy::forward(nn::Graph& g, const Tensor& visual_batch) const {
  if (visual_batch.rank() != 4 || visual_batch.dim(1) != envs::visual_channels(env_))
    throw nn::ShapeError("student expects [B, " + std::to_string(envs::visual_channels(env_)) +
                         ", 16, 16] pixels, got " + nn::shape_str(visual_batch.shape()));
  nn::Var h = encoder_.forward(g, params, g.constant(nn::chw_to_nhwc(visual_batch)));
  return tanh(head_.forward(g, params, h));
}

Tensor StudentPolicy::act(const Tensor& visual_batch) const {
  nn::Graph g;
  return forward(g, visual_batch).value();
}

std::vector<double> StudentPolicy::act(const envs::DualObservation& obs) const {
  return act(rl::visual_input(std::vector<Tensor>{obs.visual}).batch).vec();
}

nn::Checkpoint StudentPolicy::to_checkpoint() const {
  nn::Checkpoint ck;
  ck.params = params;
  ck.metadata = {{"agent", "visual-student"}, {"env", envs::to_string(env_)}, {"net", net_json(net_)}};
  return ck;
}

StudentPolicy StudentPolicy::from_checkpoint(const nn::Checkpoint& ck) {
  const auto& md = ck.metadata;
  if (md.value("agent", "") != "visual-student") throw nn::CheckpointError("checkpoint does not hold a visual student");
  rl::NetConfig net;
  net.hidden = md["net"]["hidden"].get<std::vector<std::size_t>>();
  net.channels = md["net"]["channels"].get<std::vector<std::size_t>>();
  net.feature_dim = md["net"]["feature_dim"].get<std::size_t>();
  StudentPolicy s(envs::parse_env_id(md["env"]), net, 0);
  if (!s.params.same_layout(ck.params)) throw nn::CheckpointError("student parameters do not match the network");
  s.params.assign(ck.params);
  return s;
}

double imitation_loss(const Tensor& predicted, const Tensor& labels) {
  if (predicted.shape() != labels.shape())
    throw nn::ShapeError("imitation_loss: " + nn::shape_str(predicted.shape()) + " vs " +
                         nn::shape_str(labels.shape()));
  if (predicted.size() == 0) throw std::invalid_argument("imitation_loss on an empty batch");
  double s = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) s += (predicted[i] - labels[i]) * (predicted[i] - labels[i]);
  return s / static_cast<double>(predicted.size());
}

nn::Var imitation_loss(nn::Var predicted, const Tensor& labels) {
  return mean(square(predicted - predicted.graph().constant(labels)));
}

namespace {

struct FitBatch {
  Tensor visual;
  Tensor labels;
};

FitBatch gather(const std::vector<const replay::DaggerSample*>& batch) {
  if (batch.empty()) throw std::invalid_argument("imitation batch is empty");
  std::vector<const replay::PackedVisual*> vis;
  std::vector<std::vector<double>> acts;
  for (auto* s : batch) {
    vis.push_back(&s->visual);
    acts.push_back(s->expert_action);
  }
  return {rl::visual_input(vis).batch, rl::state_input(acts).batch};
}

}  // namespace

double imitation_loss(const StudentPolicy& student, const std::vector<const replay::DaggerSample*>& batch) {
  auto b = gather(batch);
  return imitation_loss(student.act(b.visual), b.labels);
}

Tensor label_expert(const rl::SacAgent& teacher, const std::vector<std::vector<double>>& states) {
  nn::Rng unused(0);
  return rl::select_action(teacher, rl::state_input(states), rl::ActionMode::deterministic, unused);
}

RolloutState::RolloutState(const envs::EnvConfig& cfg) : env(cfg) { obs = env.reset(episode); }

RoundReport dagger_round(StudentPolicy& student, const rl::SacAgent& teacher, RolloutState& rollout,
                         replay::RingBuffer<replay::DaggerSample>& buffer, const DaggerConfig& cfg, nn::Rng& rng) {
  if (teacher.actor_view() != rl::View::state) throw std::invalid_argument("DAgger teacher must be a state policy");
  RoundReport rep;

  std::vector<std::vector<double>> states;
  std::vector<replay::PackedVisual> visuals;
  states.reserve(cfg.n_collect);
  visuals.reserve(cfg.n_collect);
  for (std::size_t i = 0; i < cfg.n_collect; ++i) {
    states.push_back(rollout.obs.state);
    visuals.emplace_back(rollout.obs.visual);
    auto r = rollout.env.step(student.act(rollout.obs));
    rollout.obs = r.done ? rollout.env.reset(++rollout.episode) : std::move(r.observation);
  }
  rep.collected = cfg.n_collect;

  const Tensor labels = label_expert(teacher, states);
  const std::size_t adim = labels.cols();
  for (std::size_t i = 0; i < cfg.n_collect; ++i)
    buffer.push({std::move(visuals[i]), std::vector<double>(labels.raw() + i * adim, labels.raw() + (i + 1) * adim)});

  rep.min_loss = std::numeric_limits<double>::infinity();
  const std::size_t cap = cfg.max_grad_steps();
  for (std::size_t k = 1; k <= cap; ++k) {
    auto b = gather(buffer.sample_batch(cfg.batch_size, rng));
    nn::Graph g;
    nn::Var loss = imitation_loss(student.forward(g, b.visual), b.labels);
    const double j = loss.value()[0];
    if (!std::isfinite(j)) throw nn::NonFiniteError("imitation loss is not finite");
    nn::ParamSet grads = nn::grad(loss, student.params);
    nn::adam_step(student.params, grads, student.opt, cfg.lr);
    rep.grad_steps_used = k;
    rep.final_loss = j;
    rep.min_loss = std::min(rep.min_loss, j);
    if (j < cfg.delta) break;
  }
  return rep;
}

DistillResult distill(const rl::SacAgent& teacher, const envs::EnvConfig& env_cfg, const rl::NetConfig& net,
                      const DaggerConfig& cfg, const DistillOptions& opts) {
  if (teacher.env() != env_cfg.id)
    throw std::invalid_argument("teacher was trained on " + envs::to_string(teacher.env()) + ", not " +
                                envs::to_string(env_cfg.id));
  if (cfg.n_collect == 0 || cfg.eval_interval == 0) throw std::invalid_argument("n_collect and eval interval must be positive");
  DistillResult out{StudentPolicy(env_cfg.id, net, opts.seed), {harness::metric_kind(env_cfg.id), {}}, {}, 0, 0.0};
  StudentPolicy& student = out.student;

  std::unique_ptr<harness::CurveWriter> writer;
  if (!opts.curve_path.empty()) writer = std::make_unique<harness::CurveWriter>(opts.curve_path);

  nn::Rng rng(opts.seed ^ 0xDA66E7ULL);
  replay::RingBuffer<replay::DaggerSample> buffer(cfg.buffer_capacity);
  RolloutState rollout(env_cfg);
  harness::RunClock clock(opts.clock);

  std::uint64_t steps = 0;
  std::uint64_t next_eval = cfg.eval_interval;
  while (steps + cfg.n_collect <= opts.total_steps) {
    out.rounds.push_back(dagger_round(student, teacher, rollout, buffer, cfg, rng));
    steps += cfg.n_collect;
    clock.count_env_steps(cfg.n_collect);
    const bool last = steps + cfg.n_collect > opts.total_steps;
    if (steps >= next_eval || last) {
      clock.pause();
      const double metric = rl::evaluate([&](const envs::DualObservation& o) { return student.act(o); }, env_cfg,
                                         cfg.eval_episodes);
      harness::CurvePoint p{steps, clock.seconds(), metric};
      out.curve.append(p);
      if (writer) writer->write(p);
      if (opts.on_eval) opts.on_eval(p);
      clock.resume();
      while (next_eval <= steps) next_eval += cfg.eval_interval;
    }
  }
  out.env_steps = steps;
  out.wall_seconds = clock.seconds();
  return out;
}

}  // namespace s2v::dagger
