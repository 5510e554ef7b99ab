#include "wpolab/config.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace wpolab {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string format_double(double v) {
  char buf[64];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

std::string join_ints(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(v[i]);
  }
  return out;
}

std::string join_seeds(const std::vector<std::uint64_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(v[i]);
  }
  return out;
}

[[noreturn]] void key_error(const std::string& key, const std::string& what) {
  throw std::invalid_argument("config key '" + key + "': " + what);
}

double parse_double(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size())
    key_error(key, "expected a real number, got '" + value + "'");
  return x;
}

long parse_long(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  char* end = nullptr;
  const long x = std::strtol(v.c_str(), &end, 10);
  if (v.empty() || end != v.c_str() + v.size())
    key_error(key, "expected an integer, got '" + value + "'");
  return x;
}

int parse_int(const std::string& key, const std::string& value) {
  return static_cast<int>(parse_long(key, value));
}

bool parse_bool(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  key_error(key, "expected true|false, got '" + value + "'");
}

std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
  std::vector<int> out;
  const std::string v = trim(value);
  if (v.empty()) return out;
  std::istringstream in(v);
  std::string tok;
  while (std::getline(in, tok, ',')) out.push_back(parse_int(key, tok));
  return out;
}

template <typename T>
T parse_enum(const std::string& key, const std::string& value,
             T (*conv)(const std::string&), const char* options) {
  try {
    return conv(trim(value));
  } catch (const std::invalid_argument&) {
    key_error(key, "unknown value '" + value + "' (valid: " + options + ")");
  }
}

void require_positive(const std::string& key, double v) {
  if (!(v > 0)) key_error(key, "must be positive");
}

void require_nonneg(const std::string& key, double v) {
  if (!(v >= 0)) key_error(key, "must be nonnegative");
}

const std::string& get(const ConfigMap& map, const std::string& key) {
  const auto it = map.find(key);
  if (it == map.end()) key_error(key, "missing (internal: defaults not merged)");
  return it->second;
}

}  // namespace

std::vector<std::uint64_t> parse_seed_list(const std::string& csv) {
  std::vector<std::uint64_t> out;
  std::istringstream in(trim(csv));
  std::string tok;
  while (std::getline(in, tok, ',')) {
    const std::string v = trim(tok);
    if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
      throw std::invalid_argument("bad seed list entry '" + tok + "'");
    out.push_back(std::stoull(v));
  }
  if (out.empty()) throw std::invalid_argument("empty seed list");
  return out;
}

ConfigMap config_to_map(const RunConfig& cfg) {
  const AgentConfig& a = cfg.agent;
  ConfigMap m;
  m["env"] = a.env;
  m["algorithm"] = to_string(a.algorithm);
  m["seed"] = std::to_string(a.seed);
  m["total_env_steps"] = std::to_string(a.total_env_steps);
  m["update_every"] = std::to_string(a.update_every);
  m["updates_per_step"] = std::to_string(a.updates_per_step);
  m["warmup_steps"] = std::to_string(a.warmup_steps);
  m["actor_hidden"] = join_ints(a.actor_hidden);
  m["critic_hidden"] = join_ints(a.critic_hidden);
  m["activation"] = to_string(a.activation);
  m["optimizer"] = to_string(a.optimizer);
  m["actor_lr"] = format_double(a.actor_lr);
  m["critic_lr"] = format_double(a.critic_lr);
  m["gamma"] = format_double(a.gamma);
  m["n_step"] = std::to_string(a.n_step);
  m["actor_delay_updates"] = std::to_string(a.actor_delay_updates);
  m["batch_size"] = std::to_string(a.batch_size);
  m["action_samples"] = std::to_string(a.action_samples);
  m["bootstrap_samples"] = std::to_string(a.bootstrap_samples);
  m["target_period"] = std::to_string(a.target_period);
  m["replay_capacity"] = std::to_string(a.replay_capacity);
  m["combiner"] = to_string(a.combiner);
  m["softmax_tau"] = format_double(a.softmax_tau);
  m["squash"] = to_string(a.squash);
  m["squash_scale"] = format_double(a.squash_scale);
  m["fisher_rescale"] = a.fisher_rescale ? "true" : "false";
  m["kl_mode"] = to_string(a.kl.mode);
  m["kl_alpha_mean"] = format_double(a.kl.alpha_mean);
  m["kl_alpha_std"] = format_double(a.kl.alpha_stddev);
  m["kl_epsilon_mean"] = format_double(a.kl.epsilon_mean);
  m["kl_epsilon_std"] = format_double(a.kl.epsilon_stddev);
  m["kl_dual_lr"] = format_double(a.kl.dual_lr);
  m["kl_alpha_min"] = format_double(a.kl.alpha_min);
  m["kl_alpha_max"] = format_double(a.kl.alpha_max);
  m["sigma_init"] = format_double(a.sigma_init);
  m["init_mean_bias"] = format_double(a.init_mean_bias);
  m["fixed_sigma"] = format_double(a.fixed_sigma);
  m["exploration_sigma_floor"] = format_double(a.exploration_sigma_floor);
  m["use_exact_critic"] = a.use_exact_critic ? "true" : "false";
  m["eval_interval"] = std::to_string(a.eval_interval);
  m["eval_episodes"] = std::to_string(a.eval_episodes);

  m["mog_steps"] = std::to_string(cfg.mog.steps);
  m["mog_batch"] = std::to_string(cfg.mog.batch);
  m["mog_lr"] = format_double(cfg.mog.lr);
  m["mog_sigma_init"] = format_double(cfg.mog.sigma_init);
  m["mog_mu_init"] = format_double(cfg.mog.mu_init);
  m["mog_log_every"] = std::to_string(cfg.mog.log_every);

  m["flow_q"] = cfg.flow.q;
  m["flow_kind"] = cfg.flow.kind;
  m["flow_mean"] = format_double(cfg.flow.mean);
  m["flow_stddev"] = format_double(cfg.flow.stddev);
  m["flow_lo"] = format_double(cfg.flow.lo);
  m["flow_hi"] = format_double(cfg.flow.hi);
  m["flow_cells"] = std::to_string(cfg.flow.cells);
  m["flow_dt"] = format_double(cfg.flow.dt);
  m["flow_steps"] = std::to_string(cfg.flow.steps);
  m["flow_log_every"] = std::to_string(cfg.flow.log_every);
  m["flow_squash"] = cfg.flow.squash;
  m["flow_squash_scale"] = format_double(cfg.flow.squash_scale);

  m["seeds"] = join_seeds(cfg.seeds);
  m["out_dir"] = cfg.out_dir;
  m["version"] = cfg.version;
  return m;
}

ConfigMap default_config_map() { return config_to_map(RunConfig{}); }

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = [] {
    const ConfigMap d = default_config_map();
    std::vector<ConfigKey> out;
    auto add = [&](const char* name, const char* doc) {
      out.push_back(ConfigKey{name, d.at(name), doc});
    };
    add("env", "task id: bandit_quadratic|bandit_quartic|lqr|pendulum|pendulum_replica2");
    add("algorithm", "actor update rule: wpo|classic_pg|dpg|svg0");
    add("seed", "run seed (cmd train sweeps 'seeds' instead)");
    add("total_env_steps", "environment steps per run");
    add("update_every", "environment steps between learner updates");
    add("updates_per_step", "learner updates per trigger");
    add("warmup_steps", "steps collected before learning starts");
    add("actor_hidden", "actor hidden layer widths, comma separated");
    add("critic_hidden", "critic hidden layer widths, comma separated");
    add("activation", "hidden activation: elu|silu");
    add("optimizer", "parameter optimizer: adam|sgd");
    add("actor_lr", "actor learning rate");
    add("critic_lr", "critic learning rate");
    add("gamma", "discount factor in (0,1]");
    add("n_step", "TD lookahead length");
    add("actor_delay_updates", "critic-only updates before the actor moves");
    add("batch_size", "segments per learner update");
    add("action_samples", "fresh policy samples per state in the actor update");
    add("bootstrap_samples", "target-policy samples for the bootstrap value");
    add("target_period", "updates between hard target syncs");
    add("replay_capacity", "segment capacity of the replay ring");
    add("combiner", "bootstrap combiner: mean|max|softmax");
    add("softmax_tau", "softmax combiner temperature");
    add("squash", "dQ/da squashing: identity|cube_root|tanh_scaled");
    add("squash_scale", "scale for tanh_scaled squashing");
    add("fisher_rescale", "apply diagonal-Fisher rescaling to actor updates");
    add("kl_mode", "trust region: none|soft|hard");
    add("kl_alpha_mean", "mean-KL penalty weight (soft mode)");
    add("kl_alpha_std", "stddev-KL penalty weight (soft mode)");
    add("kl_epsilon_mean", "mean-KL target (hard mode)");
    add("kl_epsilon_std", "stddev-KL target (hard mode)");
    add("kl_dual_lr", "dual ascent rate for hard-mode alphas");
    add("kl_alpha_min", "lower clip for hard-mode alphas");
    add("kl_alpha_max", "upper clip for hard-mode alphas");
    add("sigma_init", "initial policy stddev (head bias)");
    add("init_mean_bias", "initial policy mean (head bias)");
    add("fixed_sigma", "behavior noise stddev for dpg rollouts");
    add("exploration_sigma_floor",
        "floor on behavior stddev while acting (0 disables)");
    add("use_exact_critic", "bandit only: analytic Q instead of a critic net");
    add("eval_interval", "environment steps between evaluation rows");
    add("eval_episodes", "episodes per evaluation");
    add("mog_steps", "mixture experiment: update steps");
    add("mog_batch", "mixture experiment: samples per update");
    add("mog_lr", "mixture experiment: SGD learning rate");
    add("mog_sigma_init", "mixture experiment: initial component stddev");
    add("mog_mu_init", "mixture experiment: component means start at +-this");
    add("mog_log_every", "mixture experiment: steps between logged rows");
    add("flow_q", "grid flow: objective neg_quadratic|paper_quartic|constant");
    add("flow_kind", "grid flow: wasserstein|fisher_rao");
    add("flow_mean", "grid flow: initial Gaussian mean");
    add("flow_stddev", "grid flow: initial Gaussian stddev");
    add("flow_lo", "grid flow: domain lower edge");
    add("flow_hi", "grid flow: domain upper edge");
    add("flow_cells", "grid flow: number of cells");
    add("flow_dt", "grid flow: time step");
    add("flow_steps", "grid flow: number of steps");
    add("flow_log_every", "grid flow: steps between CSV rows");
    add("flow_squash", "grid flow: velocity squashing kind");
    add("flow_squash_scale", "grid flow: tanh_scaled velocity scale");
    add("seeds", "seed sweep for cmd train, comma separated");
    add("out_dir", "output root (env var WPOLAB_OUT overrides)");
    add("version", "artifact version string recorded in manifests");
    if (out.size() != d.size())
      throw std::logic_error("config key registry out of sync");
    return out;
  }();
  return keys;
}

ConfigMap parse_config_text(const std::string& text, const std::string& source_name) {
  ConfigMap map = default_config_map();
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(source_name + ":" + std::to_string(lineno) +
                                  ": expected KEY=VALUE, got '" + stripped + "'");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (map.find(key) == map.end())
      throw std::invalid_argument(source_name + ":" + std::to_string(lineno) +
                                  ": unknown key '" + key + "'");
    map[key] = value;
  }
  return map;
}

ConfigMap parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

void apply_override(ConfigMap& map, const std::string& assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string::npos)
    throw std::invalid_argument("--set expects KEY=VALUE, got '" + assignment + "'");
  const std::string key = trim(assignment.substr(0, eq));
  const std::string value = trim(assignment.substr(eq + 1));
  if (map.find(key) == map.end())
    throw std::invalid_argument("--set: unknown key '" + key + "'");
  map[key] = value;
}

RunConfig config_from_map(const ConfigMap& map) {
  RunConfig cfg;
  AgentConfig& a = cfg.agent;

  a.env = trim(get(map, "env"));
  a.algorithm = parse_enum(
      "algorithm", get(map, "algorithm"), algorithm_from_string,
      "wpo|classic_pg|dpg|svg0");
  {
    const std::string v = trim(get(map, "seed"));
    if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
      key_error("seed", "expected a nonnegative integer, got '" + v + "'");
    a.seed = std::stoull(v);
  }
  a.total_env_steps = parse_long("total_env_steps", get(map, "total_env_steps"));
  require_positive("total_env_steps", static_cast<double>(a.total_env_steps));
  a.update_every = parse_int("update_every", get(map, "update_every"));
  require_positive("update_every", a.update_every);
  a.updates_per_step = parse_int("updates_per_step", get(map, "updates_per_step"));
  require_positive("updates_per_step", a.updates_per_step);
  a.warmup_steps = parse_long("warmup_steps", get(map, "warmup_steps"));
  require_nonneg("warmup_steps", static_cast<double>(a.warmup_steps));
  a.actor_hidden = parse_int_list("actor_hidden", get(map, "actor_hidden"));
  a.critic_hidden = parse_int_list("critic_hidden", get(map, "critic_hidden"));
  for (int w : a.actor_hidden) require_positive("actor_hidden", w);
  for (int w : a.critic_hidden) require_positive("critic_hidden", w);
  a.activation = parse_enum("activation", get(map, "activation"),
                            activation_from_string, "elu|silu");
  if (a.activation == Activation::identity)
    key_error("activation", "unknown value 'identity' (valid: elu|silu)");
  a.optimizer = parse_enum("optimizer", get(map, "optimizer"),
                           optimizer_from_string, "adam|sgd");
  a.actor_lr = parse_double("actor_lr", get(map, "actor_lr"));
  require_nonneg("actor_lr", a.actor_lr);
  a.critic_lr = parse_double("critic_lr", get(map, "critic_lr"));
  require_nonneg("critic_lr", a.critic_lr);
  a.gamma = parse_double("gamma", get(map, "gamma"));
  if (!(a.gamma > 0.0 && a.gamma <= 1.0)) key_error("gamma", "must be in (0,1]");
  a.n_step = parse_int("n_step", get(map, "n_step"));
  require_positive("n_step", a.n_step);
  a.actor_delay_updates =
      parse_long("actor_delay_updates", get(map, "actor_delay_updates"));
  if (a.actor_delay_updates < 0)
    key_error("actor_delay_updates", "must be a nonnegative integer");
  a.batch_size = parse_int("batch_size", get(map, "batch_size"));
  require_positive("batch_size", a.batch_size);
  a.action_samples = parse_int("action_samples", get(map, "action_samples"));
  require_positive("action_samples", a.action_samples);
  a.bootstrap_samples = parse_int("bootstrap_samples", get(map, "bootstrap_samples"));
  require_positive("bootstrap_samples", a.bootstrap_samples);
  a.target_period = parse_int("target_period", get(map, "target_period"));
  require_positive("target_period", a.target_period);
  {
    const long cap = parse_long("replay_capacity", get(map, "replay_capacity"));
    require_positive("replay_capacity", static_cast<double>(cap));
    a.replay_capacity = static_cast<std::size_t>(cap);
  }
  a.combiner = parse_enum("combiner", get(map, "combiner"), combiner_from_string,
                          "mean|max|softmax");
  a.softmax_tau = parse_double("softmax_tau", get(map, "softmax_tau"));
  require_positive("softmax_tau", a.softmax_tau);
  a.squash = parse_enum("squash", get(map, "squash"), squash_from_string,
                        "identity|cube_root|tanh_scaled");
  a.squash_scale = parse_double("squash_scale", get(map, "squash_scale"));
  require_positive("squash_scale", a.squash_scale);
  a.fisher_rescale = parse_bool("fisher_rescale", get(map, "fisher_rescale"));
  a.kl.mode = parse_enum("kl_mode", get(map, "kl_mode"), kl_mode_from_string,
                         "none|soft|hard");
  a.kl.alpha_mean = parse_double("kl_alpha_mean", get(map, "kl_alpha_mean"));
  require_nonneg("kl_alpha_mean", a.kl.alpha_mean);
  a.kl.alpha_stddev = parse_double("kl_alpha_std", get(map, "kl_alpha_std"));
  require_nonneg("kl_alpha_std", a.kl.alpha_stddev);
  a.kl.epsilon_mean = parse_double("kl_epsilon_mean", get(map, "kl_epsilon_mean"));
  require_positive("kl_epsilon_mean", a.kl.epsilon_mean);
  a.kl.epsilon_stddev = parse_double("kl_epsilon_std", get(map, "kl_epsilon_std"));
  require_positive("kl_epsilon_std", a.kl.epsilon_stddev);
  a.kl.dual_lr = parse_double("kl_dual_lr", get(map, "kl_dual_lr"));
  require_positive("kl_dual_lr", a.kl.dual_lr);
  a.kl.alpha_min = parse_double("kl_alpha_min", get(map, "kl_alpha_min"));
  a.kl.alpha_max = parse_double("kl_alpha_max", get(map, "kl_alpha_max"));
  if (!(a.kl.alpha_min > 0.0 && a.kl.alpha_min <= a.kl.alpha_max))
    key_error("kl_alpha_min", "need 0 < kl_alpha_min <= kl_alpha_max");
  a.sigma_init = parse_double("sigma_init", get(map, "sigma_init"));
  if (!(a.sigma_init > kSigmaMin))
    key_error("sigma_init", "must exceed the sigma floor 1e-3");
  a.init_mean_bias = parse_double("init_mean_bias", get(map, "init_mean_bias"));
  a.fixed_sigma = parse_double("fixed_sigma", get(map, "fixed_sigma"));
  require_positive("fixed_sigma", a.fixed_sigma);
  a.exploration_sigma_floor = parse_double("exploration_sigma_floor",
                                           get(map, "exploration_sigma_floor"));
  if (a.exploration_sigma_floor < 0.0)
    key_error("exploration_sigma_floor", "must be a nonnegative real number");
  a.use_exact_critic = parse_bool("use_exact_critic", get(map, "use_exact_critic"));
  a.eval_interval = parse_long("eval_interval", get(map, "eval_interval"));
  require_positive("eval_interval", static_cast<double>(a.eval_interval));
  a.eval_episodes = parse_int("eval_episodes", get(map, "eval_episodes"));
  require_positive("eval_episodes", a.eval_episodes);

  cfg.mog.steps = parse_long("mog_steps", get(map, "mog_steps"));
  require_positive("mog_steps", static_cast<double>(cfg.mog.steps));
  cfg.mog.batch = parse_int("mog_batch", get(map, "mog_batch"));
  require_positive("mog_batch", cfg.mog.batch);
  cfg.mog.lr = parse_double("mog_lr", get(map, "mog_lr"));
  require_positive("mog_lr", cfg.mog.lr);
  cfg.mog.sigma_init = parse_double("mog_sigma_init", get(map, "mog_sigma_init"));
  require_positive("mog_sigma_init", cfg.mog.sigma_init);
  cfg.mog.mu_init = parse_double("mog_mu_init", get(map, "mog_mu_init"));
  cfg.mog.log_every = parse_long("mog_log_every", get(map, "mog_log_every"));
  require_positive("mog_log_every", static_cast<double>(cfg.mog.log_every));
  cfg.mog.algorithm = a.algorithm;
  cfg.mog.seed = a.seed;

  cfg.flow.q = trim(get(map, "flow_q"));
  if (cfg.flow.q != "neg_quadratic" && cfg.flow.q != "paper_quartic" &&
      cfg.flow.q != "constant")
    key_error("flow_q", "unknown value '" + cfg.flow.q +
                            "' (valid: neg_quadratic|paper_quartic|constant)");
  cfg.flow.kind = trim(get(map, "flow_kind"));
  if (cfg.flow.kind != "wasserstein" && cfg.flow.kind != "fisher_rao")
    key_error("flow_kind", "unknown value '" + cfg.flow.kind +
                               "' (valid: wasserstein|fisher_rao)");
  cfg.flow.mean = parse_double("flow_mean", get(map, "flow_mean"));
  cfg.flow.stddev = parse_double("flow_stddev", get(map, "flow_stddev"));
  require_positive("flow_stddev", cfg.flow.stddev);
  cfg.flow.lo = parse_double("flow_lo", get(map, "flow_lo"));
  cfg.flow.hi = parse_double("flow_hi", get(map, "flow_hi"));
  if (!(cfg.flow.lo < cfg.flow.hi)) key_error("flow_lo", "need flow_lo < flow_hi");
  cfg.flow.cells = parse_int("flow_cells", get(map, "flow_cells"));
  if (cfg.flow.cells < 16) key_error("flow_cells", "must be at least 16");
  cfg.flow.dt = parse_double("flow_dt", get(map, "flow_dt"));
  require_positive("flow_dt", cfg.flow.dt);
  cfg.flow.steps = parse_long("flow_steps", get(map, "flow_steps"));
  require_positive("flow_steps", static_cast<double>(cfg.flow.steps));
  cfg.flow.log_every = parse_long("flow_log_every", get(map, "flow_log_every"));
  require_positive("flow_log_every", static_cast<double>(cfg.flow.log_every));
  cfg.flow.squash = trim(get(map, "flow_squash"));
  parse_enum("flow_squash", cfg.flow.squash, squash_from_string,
             "identity|cube_root|tanh_scaled");
  cfg.flow.squash_scale =
      parse_double("flow_squash_scale", get(map, "flow_squash_scale"));
  require_positive("flow_squash_scale", cfg.flow.squash_scale);

  try {
    cfg.seeds = parse_seed_list(get(map, "seeds"));
  } catch (const std::invalid_argument& e) {
    key_error("seeds", e.what());
  }
  cfg.out_dir = trim(get(map, "out_dir"));
  if (cfg.out_dir.empty()) key_error("out_dir", "must not be empty");
  cfg.version = trim(get(map, "version"));
  return cfg;
}

std::string render_config(const ConfigMap& map) {
  std::string out;
  for (const auto& [key, value] : map) {
    out += key;
    out += '=';
    out += value;
    out += '\n';
  }
  return out;
}

void write_manifest(const std::string& path, const ConfigMap& map) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write manifest '" + path + "'");
  out << render_config(map);
  if (!out) throw std::runtime_error("failed writing manifest '" + path + "'");
}

}  // namespace wpolab
