#include "sadq/train/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "sadq/common/error.hpp"

namespace sadq {

namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& field, const std::string& value, const std::string& expected) {
  fail(ErrorKind::kConfigInvalid, field + ": cannot read '" + value + "' as " + expected);
}

std::uint64_t to_u64(const std::string& field, const std::string& v) {
  std::uint64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad_value(field, v, "a non-negative integer");
  return out;
}

double to_double(const std::string& field, const std::string& v) {
  // from_chars for double is available in libstdc++ 11.
  double out = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(out)) bad_value(field, v, "a finite number");
  return out;
}

bool to_bool(const std::string& field, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  bad_value(field, v, "true or false");
}

std::vector<std::size_t> to_sizes(const std::string& field, const std::string& v) {
  std::vector<std::size_t> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_u64(field, trim(item)));
  if (out.empty()) bad_value(field, v, "a comma-separated list");
  return out;
}

template <class T>
std::string join(const std::vector<T>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

std::string fmt_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

template <class E>
struct Choice {
  const char* name;
  E value;
};

template <class E, std::size_t N>
E to_choice(const std::string& field, const std::string& v, const Choice<E> (&choices)[N]) {
  for (const auto& c : choices) {
    if (v == c.name) return c.value;
  }
  std::string names;
  for (const auto& c : choices) names += std::string(names.empty() ? "" : "|") + c.name;
  bad_value(field, v, names);
}

template <class E, std::size_t N>
std::string from_choice(E value, const Choice<E> (&choices)[N]) {
  for (const auto& c : choices) {
    if (value == c.value) return c.name;
  }
  return "?";
}

constexpr Choice<TargetUpdateUnit> kUnits[] = {{"env_steps", TargetUpdateUnit::kEnvSteps},
                                               {"grad_steps", TargetUpdateUnit::kGradSteps}};
constexpr Choice<QLoss> kQLosses[] = {{"mse", QLoss::kMse}, {"huber", QLoss::kHuber}};
constexpr Choice<ModelLoss> kModelLosses[] = {{"mse", ModelLoss::kSampleMse}, {"nll", ModelLoss::kGaussianNll}};
constexpr Choice<DistTargetMode> kDistModes[] = {{"blend", DistTargetMode::kBlend},
                                                 {"mixture", DistTargetMode::kMixture}};

struct Field {
  const char* section;
  const char* key;
  std::function<void(TrainConfig&, const std::string& field, const std::string& value)> set;
  std::function<std::string(const TrainConfig&)> get;
};

#define SADQ_U64(sec, key, member)                                                                  \
  Field {                                                                                           \
    sec, key, [](TrainConfig& c, const std::string& f, const std::string& v) { c.member = to_u64(f, v); }, \
        [](const TrainConfig& c) { return std::to_string(c.member); }                               \
  }
#define SADQ_DBL(sec, key, member)                                                                       \
  Field {                                                                                                \
    sec, key, [](TrainConfig& c, const std::string& f, const std::string& v) { c.member = to_double(f, v); }, \
        [](const TrainConfig& c) { return fmt_double(c.member); }                                        \
  }
#define SADQ_BOOL(sec, key, member)                                                                    \
  Field {                                                                                              \
    sec, key, [](TrainConfig& c, const std::string& f, const std::string& v) { c.member = to_bool(f, v); }, \
        [](const TrainConfig& c) { return std::string(c.member ? "true" : "false"); }                  \
  }
#define SADQ_SIZES(sec, key, member)                                                                    \
  Field {                                                                                               \
    sec, key, [](TrainConfig& c, const std::string& f, const std::string& v) { c.member = to_sizes(f, v); }, \
        [](const TrainConfig& c) { return join(c.member); }                                             \
  }
#define SADQ_CHOICE(sec, key, member, table)                                                                  \
  Field {                                                                                                     \
    sec, key, [](TrainConfig& c, const std::string& f, const std::string& v) { c.member = to_choice(f, v, table); }, \
        [](const TrainConfig& c) { return from_choice(c.member, table); }                                     \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      Field{"env", "id", [](TrainConfig& c, const std::string&, const std::string& v) { c.env.id = v; },
            [](const TrainConfig& c) { return c.env.id; }},
      SADQ_U64("env", "n_bits", env.n_bits),
      Field{"env", "max_steps",
            [](TrainConfig& c, const std::string& f, const std::string& v) {
              const auto n = to_u64(f, v);
              c.env.max_steps = n == 0 ? std::nullopt : std::optional<std::size_t>(n);
            },
            [](const TrainConfig& c) { return std::to_string(c.env.max_steps.value_or(0)); }},
      SADQ_U64("env.ocloud", "server_count", env.ocloud.server_count),
      SADQ_DBL("env.ocloud", "w1", env.ocloud.w1),
      SADQ_DBL("env.ocloud", "w2", env.ocloud.w2),
      SADQ_DBL("env.ocloud", "p0", env.ocloud.p0),
      SADQ_DBL("env.ocloud", "p1", env.ocloud.p1),
      SADQ_U64("env.ocloud", "warmup_tasks", env.ocloud.warmup_tasks),
      SADQ_U64("env.ocloud", "episode_tasks", env.ocloud.episode_tasks),
      SADQ_DBL("env.ocloud", "state_norm", env.ocloud.state_norm),
      SADQ_DBL("env.ocloud", "mean_interarrival", env.ocloud.mean_interarrival),
      Field{"env.ocloud", "trace_path",
            [](TrainConfig& c, const std::string&, const std::string& v) { c.env.ocloud.trace_path = v; },
            [](const TrainConfig& c) { return c.env.ocloud.trace_path; }},

      SADQ_DBL("q", "gamma", gamma),
      SADQ_SIZES("q", "hidden", q_hidden),
      SADQ_U64("q", "batch", q_batch),
      SADQ_DBL("q", "lr", q_lr),
      SADQ_U64("q", "updates_per_collect", q_updates_per_collect),
      SADQ_U64("q", "target_update_interval", target_update_interval),
      SADQ_CHOICE("q", "target_update_unit", target_update_unit, kUnits),
      SADQ_CHOICE("q", "loss", q_loss, kQLosses),
      SADQ_BOOL("q", "dueling_mean_subtract", dueling_mean_subtract),

      SADQ_SIZES("model", "hidden", model_hidden),
      SADQ_U64("model", "batch", model_batch),
      SADQ_DBL("model", "lr", model_lr),
      SADQ_U64("model", "updates_per_collect", model_updates_per_collect),
      SADQ_DBL("model", "state_norm", state_norm),
      SADQ_CHOICE("model", "loss", model_loss, kModelLosses),
      SADQ_DBL("model", "logvar_min", logvar_min),
      SADQ_DBL("model", "logvar_max", logvar_max),
      SADQ_DBL("model", "gate_loss", gate_loss),

      Field{"agent", "variant",
            [](TrainConfig& c, const std::string&, const std::string& v) { c.variant = parse_variant(v); },
            [](const TrainConfig& c) { return to_string(c.variant); }},
      SADQ_DBL("agent", "alpha", alpha),
      SADQ_DBL("agent", "beta", beta),
      SADQ_U64("agent", "atoms", atoms),
      SADQ_DBL("agent", "kappa", kappa),
      SADQ_CHOICE("agent", "dist_target", dist_target, kDistModes),

      SADQ_U64("schedule", "total_steps", total_steps),
      SADQ_U64("schedule", "buffer_size", buffer_size),
      SADQ_U64("schedule", "replay_frequency", replay_frequency),
      SADQ_DBL("schedule", "eps_start", eps_start),
      SADQ_DBL("schedule", "eps_end", eps_end),
      SADQ_U64("schedule", "eps_decay", eps_decay),
      SADQ_U64("schedule", "eval_interval", eval_interval),
      SADQ_U64("schedule", "eval_episodes", eval_episodes),
      SADQ_U64("schedule", "learning_starts", learning_starts),
      Field{"schedule", "seeds",
            [](TrainConfig& c, const std::string& f, const std::string& v) {
              c.seeds.clear();
              for (auto s : to_sizes(f, v)) c.seeds.push_back(s);
            },
            [](const TrainConfig& c) { return join(c.seeds); }},
      SADQ_U64("schedule", "checkpoint_interval", checkpoint_interval),
      SADQ_BOOL("schedule", "log_wall_clock", log_wall_clock),
      SADQ_BOOL("schedule", "log_model_loss", log_model_loss),
  };
  return table;
}

#undef SADQ_U64
#undef SADQ_DBL
#undef SADQ_BOOL
#undef SADQ_SIZES
#undef SADQ_CHOICE

void set_field(TrainConfig& c, const std::string& section, const std::string& key, const std::string& value) {
  const std::string name = section + "." + key;
  for (const auto& f : fields()) {
    if (section == f.section && key == f.key) {
      f.set(c, name, trim(value));
      return;
    }
  }
  fail(ErrorKind::kConfigInvalid, name + ": unknown configuration key");
}

}  // namespace

void TrainConfig::validate() const {
  const auto need = [](bool ok, const char* msg) {
    if (!ok) fail(ErrorKind::kConfigInvalid, msg);
  };
  need(env.n_bits >= 2, "env.n_bits must be >= 2");
  env.ocloud.validate();
  need(gamma >= 0.0 && gamma < 1.0, "q.gamma must lie in [0, 1)");
  need(!q_hidden.empty() && std::all_of(q_hidden.begin(), q_hidden.end(), [](auto h) { return h > 0; }),
       "q.hidden must list positive layer widths");
  need(q_batch > 0, "q.batch must be > 0");
  need(q_lr > 0.0, "q.lr must be > 0");
  need(q_updates_per_collect > 0, "q.updates_per_collect must be > 0");
  need(target_update_interval > 0, "q.target_update_interval must be > 0");
  need(!model_hidden.empty() && std::all_of(model_hidden.begin(), model_hidden.end(), [](auto h) { return h > 0; }),
       "model.hidden must list positive layer widths");
  need(model_batch > 0, "model.batch must be > 0");
  need(model_lr > 0.0, "model.lr must be > 0");
  need(state_norm > 0.0, "model.state_norm must be > 0");
  need(logvar_min < logvar_max, "model.logvar_min must be below model.logvar_max");
  need(gate_loss >= 0.0, "model.gate_loss must be >= 0");
  need(alpha >= 0.0 && alpha <= 1.0, "agent.alpha must lie in [0, 1]");
  need(beta >= 0.0, "agent.beta must be >= 0");
  need(atoms > 0, "agent.atoms must be > 0");
  need(kappa > 0.0, "agent.kappa must be > 0");
  need(total_steps > 0, "schedule.total_steps must be > 0");
  need(buffer_size > 0, "schedule.buffer_size must be > 0");
  need(replay_frequency > 0, "schedule.replay_frequency must be > 0");
  epsilon().validate();
  need(eval_interval > 0, "schedule.eval_interval must be > 0");
  need(eval_episodes > 0, "schedule.eval_episodes must be > 0");
  need(!seeds.empty(), "schedule.seeds must list at least one seed");
  need(effective_learning_starts() <= buffer_size, "schedule.learning_starts exceeds schedule.buffer_size");
}

std::size_t TrainConfig::effective_learning_starts() const {
  return learning_starts > 0 ? learning_starts : std::max(q_batch, model_batch);
}

AgentConfig TrainConfig::agent_config(const EnvSpec& spec) const {
  AgentConfig a;
  a.variant = variant;
  a.obs_dim = spec.obs_dim;
  a.action_count = spec.action_count;
  a.q_hidden = q_hidden;
  a.q_adam.lr = q_lr;
  a.dueling_mean_subtract = dueling_mean_subtract;
  a.atoms = atoms;
  a.kappa = kappa;
  a.q_loss = q_loss;
  a.mix = {alpha, beta, gamma};
  a.dist_mode = dist_target;
  a.model.obs_dim = spec.obs_dim;
  a.model.action_count = spec.action_count;
  a.model.hidden = model_hidden;
  a.model.state_norm = state_norm;
  a.model.logvar_min = logvar_min;
  a.model.logvar_max = logvar_max;
  a.model.loss = model_loss;
  a.model_adam.lr = model_lr;
  return a;
}

TrainConfig parse_config(const std::string& text, const TrainConfig& base) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    fail(ErrorKind::kConfigInvalid, "run file line " + std::to_string(e.line()) + ": " + e.message());
  }
  TrainConfig c = base;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      fail(ErrorKind::kConfigInvalid, section + ": key outside of any section");
    }
    for (const auto& [key, value] : body) set_field(c, section, key, value.data());
  }
  c.validate();
  return c;
}

TrainConfig load_config(const std::string& path, const TrainConfig& base) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIoError, "cannot open run file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), base);
}

void apply_override(TrainConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  const auto dot = assignment.substr(0, eq).rfind('.');
  if (eq == std::string::npos || dot == std::string::npos) {
    fail(ErrorKind::kConfigInvalid, "override '" + assignment + "' is not of the form section.key=value");
  }
  TrainConfig updated = config;
  set_field(updated, trim(assignment.substr(0, dot)), trim(assignment.substr(dot + 1, eq - dot - 1)),
            assignment.substr(eq + 1));
  updated.validate();
  config = std::move(updated);
}

std::string to_ini(const TrainConfig& config) {
  std::string out;
  std::string section;
  for (const auto& f : fields()) {
    if (section != f.section) {
      section = f.section;
      out += (out.empty() ? "[" : "\n[") + section + "]\n";
    }
    out += std::string(f.key) + " = " + f.get(config) + "\n";
  }
  return out;
}

std::vector<std::string> preset_names() { return {"cartpole", "acrobot", "bitflip", "ocloud"}; }

TrainConfig preset(const std::string& name) {
  TrainConfig c;
  c.env.id = name;
  if (name == "cartpole") {
    c.gamma = 0.97;
    c.q_hidden = {128, 128, 64};
    c.q_batch = 64;
    c.q_lr = 1e-3;
    c.q_updates_per_collect = 1;
    c.target_update_interval = 8000;
    c.total_steps = 160000;
    c.buffer_size = 100000;
    c.replay_frequency = 80;
    c.eps_start = 0.95;
    c.eps_end = 0.1;
    c.eps_decay = 10000;
    c.model_hidden = {256, 256};
    c.model_batch = 128;
    c.model_lr = 4e-5;
    c.model_updates_per_collect = 20;
    c.state_norm = 1.0;
    c.alpha = 0.7;
    c.beta = 0.5;
  } else if (name == "acrobot") {
    c.gamma = 0.99;
    c.q_hidden = {256, 256};
    c.q_batch = 128;
    c.q_lr = 1e-4;
    c.q_updates_per_collect = 10;
    c.target_update_interval = 2400;
    c.total_steps = 960000;
    c.buffer_size = 100000;
    c.replay_frequency = 96;
    c.eps_start = 1.0;
    c.eps_end = 0.05;
    c.eps_decay = 250000;
    c.model_hidden = {256, 256};
    c.model_batch = 256;
    c.model_lr = 4e-5;
    c.model_updates_per_collect = 1;
    c.state_norm = 1.0;
    c.alpha = 0.8;
    c.beta = 0.5;
  } else if (name == "bitflip") {
    c.env.n_bits = 8;
    c.gamma = 0.99;
    c.q_hidden = {128, 128, 64};
    c.q_batch = 128;
    c.q_lr = 5e-4;
    c.q_updates_per_collect = 10;
    c.target_update_interval = 4800;
    c.total_steps = 960000;
    c.buffer_size = 4000;
    c.replay_frequency = 96;
    c.eps_start = 0.2;
    c.eps_end = 0.2;
    c.eps_decay = 100;
    c.model_hidden = {256, 256};
    c.model_batch = 256;
    c.model_lr = 4e-4;
    c.model_updates_per_collect = 1;
    c.state_norm = 1.0;
    c.alpha = 0.6;
    c.beta = 0.5;
    c.eval_episodes = 50;
  } else if (name == "ocloud") {
    c.gamma = 0.8;
    c.q_hidden = {64, 64};
    c.q_batch = 32;
    c.q_lr = 5e-5;
    c.q_updates_per_collect = 1;
    c.target_update_interval = 2000;
    c.total_steps = 500000;
    c.buffer_size = 100000;
    c.replay_frequency = 100;
    c.eps_start = 0.05;
    c.eps_end = 0.05;
    c.eps_decay = 10000;
    c.model_hidden = {64, 64};
    c.model_batch = 64;
    c.model_lr = 5e-4;
    c.model_updates_per_collect = 1;
    // The environment already divides observations by its own norm (50).
    c.state_norm = 1.0;
    c.alpha = 0.5;
    c.beta = 0.5;
  } else {
    fail(ErrorKind::kConfigInvalid, "env.id: no preset named '" + name + "'");
  }
  c.validate();
  return c;
}

}  // namespace sadq
