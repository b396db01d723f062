#include "s2v/harness/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <stdexcept>

namespace s2v::harness {
namespace {

using nlohmann::json;

struct Preset {
  const char* name;
  std::function<void(RunConfig&)> apply;
};

// Imitation and visual-RL settings from the hyperparameter tables; buffer
// sizes and batch sizes of the RL presets stay at desk scale.
const std::vector<Preset>& presets() {
  static const std::vector<Preset> table = {
      {"ms-dagger",
       [](RunConfig& c) {
         c.dagger.n_collect = 64;
         c.dagger.delta = 0.01;
         c.dagger.batch_size = 128;
         c.dagger.utd = 1.0;
         c.dagger.lr = 3e-4;
       }},
      {"dmc-dagger",
       [](RunConfig& c) {
         c.dagger.n_collect = 2000;
         c.dagger.delta = 0.025;
         c.dagger.batch_size = 100;
         c.dagger.utd = 1.0;
         c.dagger.lr = 3e-4;
       }},
      {"adroit-dagger",
       [](RunConfig& c) {
         c.dagger.n_collect = 64;
         c.dagger.delta = 0.1;
         c.dagger.batch_size = 512;
         c.dagger.utd = 0.5;
         c.dagger.lr = 3e-4;
       }},
      {"ms-aac",
       [](RunConfig& c) {
         c.sac.gamma = 0.8;
         c.sac.utd = 0.25;
         c.sac.autotune = true;
         c.sac.lr = 3e-4;
       }},
      {"dmc-aac",
       [](RunConfig& c) {
         c.sac.gamma = 0.99;
         c.sac.utd = 0.25;
         c.sac.autotune = true;
         c.sac.lr = 3e-4;
       }},
      {"adroit-aac",
       [](RunConfig& c) {
         c.sac.gamma = 0.95;
         c.sac.utd = 0.125;
         c.sac.autotune = true;
         c.sac.lr = 3e-4;
       }},
      {"paper-difficulty", [](RunConfig& c) { c.difficulty_threshold = kPaperDifficultyThreshold; }},
      {"ci-t", [](RunConfig& c) { c.ci = CiMethod::student_t; }},
  };
  return table;
}

template <class T>
T get(const json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw std::invalid_argument("config key '" + key + "' has the wrong type: " + v.dump());
  }
}

std::uint64_t get_count(const json& v, const std::string& key) {
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw std::invalid_argument("config key '" + key + "' must be a non-negative integer, got " + v.dump());
  return v.get<std::uint64_t>();
}

using Setter = std::function<void(RunConfig&, const json&, const std::string&)>;

template <class T, class Field>
Setter real(Field field) {
  return [field](RunConfig& c, const json& v, const std::string& k) { field(c) = get<T>(v, k); };
}

template <class Field>
Setter count(Field field) {
  return [field](RunConfig& c, const json& v, const std::string& k) { field(c) = get_count(v, k); };
}

const std::map<std::string, std::map<std::string, Setter>>& sections() {
  static const std::map<std::string, std::map<std::string, Setter>> table = {
      {"net",
       {{"hidden", real<std::vector<std::size_t>>([](RunConfig& c) -> auto& { return c.net.hidden; })},
        {"channels", real<std::vector<std::size_t>>([](RunConfig& c) -> auto& { return c.net.channels; })},
        {"feature_dim", count([](RunConfig& c) -> auto& { return c.net.feature_dim; })}}},
      {"sac",
       {{"gamma", real<double>([](RunConfig& c) -> auto& { return c.sac.gamma; })},
        {"tau", real<double>([](RunConfig& c) -> auto& { return c.sac.tau; })},
        {"lr", real<double>([](RunConfig& c) -> auto& { return c.sac.lr; })},
        {"batch_size", count([](RunConfig& c) -> auto& { return c.sac.batch_size; })},
        {"utd", real<double>([](RunConfig& c) -> auto& { return c.sac.utd; })},
        {"autotune", real<bool>([](RunConfig& c) -> auto& { return c.sac.autotune; })},
        {"init_alpha", real<double>([](RunConfig& c) -> auto& { return c.sac.init_alpha; })},
        {"warmup", count([](RunConfig& c) -> auto& { return c.sac.warmup; })},
        {"eval_interval", count([](RunConfig& c) -> auto& { return c.sac.eval_interval; })},
        {"eval_episodes", count([](RunConfig& c) -> auto& { return c.sac.eval_episodes; })},
        {"buffer_capacity", count([](RunConfig& c) -> auto& { return c.sac.buffer_capacity; })}}},
      {"dagger",
       {{"n_collect", count([](RunConfig& c) -> auto& { return c.dagger.n_collect; })},
        {"delta", real<double>([](RunConfig& c) -> auto& { return c.dagger.delta; })},
        {"batch_size", count([](RunConfig& c) -> auto& { return c.dagger.batch_size; })},
        {"utd", real<double>([](RunConfig& c) -> auto& { return c.dagger.utd; })},
        {"buffer_capacity", count([](RunConfig& c) -> auto& { return c.dagger.buffer_capacity; })},
        {"lr", real<double>([](RunConfig& c) -> auto& { return c.dagger.lr; })},
        {"eval_interval", count([](RunConfig& c) -> auto& { return c.dagger.eval_interval; })},
        {"eval_episodes", count([](RunConfig& c) -> auto& { return c.dagger.eval_episodes; })}}},
      {"run",
       {{"steps", count([](RunConfig& c) -> auto& { return c.steps; })},
        {"clock",
         [](RunConfig& c, const json& v, const std::string& k) { c.clock = parse_clock_mode(get<std::string>(v, k)); }},
        {"ci", [](RunConfig& c, const json& v, const std::string& k) { c.ci = parse_ci_method(get<std::string>(v, k)); }},
        {"window_frac", real<double>([](RunConfig& c) -> auto& { return c.window_frac; })},
        {"difficulty_threshold", count([](RunConfig& c) -> auto& { return c.difficulty_threshold; })}}},
  };
  return table;
}

void validate(const RunConfig& c) {
  auto fail = [](const std::string& what) { throw std::invalid_argument("invalid config: " + what); };
  if (!(c.sac.gamma > 0.0 && c.sac.gamma < 1.0)) fail("sac.gamma must lie in (0, 1)");
  if (!(c.sac.utd > 0.0)) fail("sac.utd must be positive");
  if (!(c.dagger.utd > 0.0)) fail("dagger.utd must be positive");
  if (c.sac.batch_size == 0 || c.dagger.batch_size == 0) fail("batch sizes must be positive");
  if (c.sac.buffer_capacity == 0 || c.dagger.buffer_capacity == 0) fail("buffer capacities must be positive");
  if (c.dagger.n_collect == 0) fail("dagger.n_collect must be positive");
  if (c.sac.eval_interval == 0 || c.dagger.eval_interval == 0) fail("eval intervals must be positive");
  if (c.net.hidden.empty() || c.net.channels.empty() || c.net.feature_dim == 0) fail("network sizes must be non-empty");
  if (!(c.window_frac > 0.0 && c.window_frac <= 1.0)) fail("run.window_frac must lie in (0, 1]");
}

}  // namespace

std::string to_string(Method m) {
  switch (m) {
    case Method::s2v_dagger: return "s2v_dagger";
    case Method::visual_rl: return "visual_rl";
    case Method::state_rl: return "state_rl";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  if (name == "s2v_dagger") return Method::s2v_dagger;
  if (name == "visual_rl") return Method::visual_rl;
  if (name == "state_rl") return Method::state_rl;
  throw std::invalid_argument("unknown method '" + name + "'");
}

RunConfig default_run_config(envs::EnvId env, Method method) {
  RunConfig c;
  const bool swingup = env == envs::EnvId::swingup;
  apply_preset(c, swingup ? "dmc-dagger" : "ms-dagger");
  c.presets.clear();
  c.sac.gamma = swingup ? 0.99 : 0.8;
  c.sac.utd = method == Method::visual_rl ? 0.25 : 1.0;
  switch (method) {
    case Method::s2v_dagger: c.steps = 150'000; break;
    case Method::state_rl:
    case Method::visual_rl:
      c.steps = env == envs::EnvId::reach ? 100'000 : env == envs::EnvId::push ? 400'000 : 200'000;
      break;
  }
  return c;
}

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& p : presets()) out.emplace_back(p.name);
  return out;
}

void apply_preset(RunConfig& cfg, const std::string& name) {
  for (const auto& p : presets())
    if (name == p.name) {
      p.apply(cfg);
      cfg.presets.push_back(name);
      return;
    }
  std::string known;
  for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
  throw std::invalid_argument("unknown preset '" + name + "' (known: " + known + ")");
}

RunConfig resolve_config(const json& doc, envs::EnvId env, Method method) {
  if (!doc.is_object()) throw std::invalid_argument("config must be a JSON object");
  RunConfig cfg = default_run_config(env, method);
  if (doc.contains("preset")) {
    const json& p = doc["preset"];
    if (p.is_string()) {
      apply_preset(cfg, p.get<std::string>());
    } else if (p.is_array()) {
      for (const auto& name : p) apply_preset(cfg, get<std::string>(name, "preset"));
    } else {
      throw std::invalid_argument("config key 'preset' must be a name or a list of names");
    }
  }
  for (const auto& [section, body] : doc.items()) {
    if (section == "preset") continue;
    auto sec = sections().find(section);
    if (sec == sections().end()) throw std::invalid_argument("unknown config key '" + section + "'");
    if (!body.is_object()) throw std::invalid_argument("config section '" + section + "' must be an object");
    for (const auto& [key, value] : body.items()) {
      const std::string full = section + "." + key;
      auto it = sec->second.find(key);
      if (it == sec->second.end()) throw std::invalid_argument("unknown config key '" + full + "'");
      it->second(cfg, value, full);
    }
  }
  validate(cfg);
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path, envs::EnvId env, Method method) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return resolve_config(doc, env, method);
}

json to_json(const RunConfig& c) {
  return {
      {"preset", c.presets},
      {"net", {{"hidden", c.net.hidden}, {"channels", c.net.channels}, {"feature_dim", c.net.feature_dim}}},
      {"sac",
       {{"gamma", c.sac.gamma},
        {"tau", c.sac.tau},
        {"lr", c.sac.lr},
        {"batch_size", c.sac.batch_size},
        {"utd", c.sac.utd},
        {"autotune", c.sac.autotune},
        {"init_alpha", c.sac.init_alpha},
        {"warmup", c.sac.warmup},
        {"eval_interval", c.sac.eval_interval},
        {"eval_episodes", c.sac.eval_episodes},
        {"buffer_capacity", c.sac.buffer_capacity}}},
      {"dagger",
       {{"n_collect", c.dagger.n_collect},
        {"delta", c.dagger.delta},
        {"batch_size", c.dagger.batch_size},
        {"utd", c.dagger.utd},
        {"buffer_capacity", c.dagger.buffer_capacity},
        {"lr", c.dagger.lr},
        {"eval_interval", c.dagger.eval_interval},
        {"eval_episodes", c.dagger.eval_episodes}}},
      {"run",
       {{"steps", c.steps},
        {"clock", to_string(c.clock)},
        {"ci", to_string(c.ci)},
        {"window_frac", c.window_frac},
        {"difficulty_threshold", c.difficulty_threshold}}},
  };
}

}  // namespace s2v::harness
