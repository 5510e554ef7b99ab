#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "wpolab/critic.hpp"
#include "wpolab/diff_net.hpp"
#include "wpolab/envs.hpp"
#include "wpolab/policy.hpp"
#include "wpolab/replay.hpp"
#include "wpolab/wpo.hpp"

namespace wpolab {

enum class Algorithm { wpo, classic_pg, dpg, svg0 };

Algorithm algorithm_from_string(const std::string& s);
std::string to_string(Algorithm a);

enum class OptimizerKind { adam, sgd };

OptimizerKind optimizer_from_string(const std::string& s);
std::string to_string(OptimizerKind o);

// Network actor with a diagonal Gaussian head: outputs [mean..., raw...]
// and maps raw through sigma_min + softplus into the stddev.
struct GaussianActor {
  DiffNet net;
  int action_dim = 0;

  static GaussianActor make(int state_dim, int action_dim,
                            const std::vector<int>& hidden, Activation act,
                            Rng& rng, double sigma_init, double mean_bias);

  DiagGaussianParams params(const Vec& state) const;
};

struct ActorEval {
  NetTape tape;
  DiagGaussianParams params;
};

ActorEval actor_eval(const GaussianActor& actor, const Vec& state);
// Chains head cotangents (on mean and stddev) through the softplus map and
// the net into d_params.
void actor_backward(const GaussianActor& actor, const ActorEval& eval,
                    const Vec& d_mean, const Vec& d_stddev, Vec& d_params);

struct AgentConfig {
  std::string env = "bandit_quartic";
  Algorithm algorithm = Algorithm::wpo;
  std::uint64_t seed = 1;

  long total_env_steps = 100000;
  int update_every = 1;
  int updates_per_step = 1;
  long warmup_steps = 1000;

  std::vector<int> actor_hidden = {64, 64};
  std::vector<int> critic_hidden = {128, 128};
  Activation activation = Activation::elu;
  OptimizerKind optimizer = OptimizerKind::adam;
  double actor_lr = 3e-4;
  double critic_lr = 3e-4;

  double gamma = 0.99;
  int n_step = 5;
  // Updates that train only the critic before the actor (and the KL duals)
  // start moving, so early policy steps never chase unsettled values.
  long actor_delay_updates = 0;
  int batch_size = 256;
  int action_samples = 30;
  int bootstrap_samples = 8;
  int target_period = 100;
  std::size_t replay_capacity = 100000;
  Combiner combiner = Combiner::mean;
  double softmax_tau = 1.0;

  SquashKind squash = SquashKind::identity;
  double squash_scale = 1.0;
  bool fisher_rescale = true;
  KlConfig kl;

  double sigma_init = 0.5;
  double init_mean_bias = 0.0;
  double fixed_sigma = 0.3;  // dpg behavior noise
  // Floor on the behavior stddev while acting in the env. Keeps the replay
  // action distribution wide enough to identify dQ/da even after the policy
  // itself has gone nearly deterministic; updates still use the policy stddev.
  double exploration_sigma_floor = 0.0;
  bool use_exact_critic = false;

  long eval_interval = 2000;
  int eval_episodes = 5;
};

struct MetricsRow {
  long step = 0;
  long episode = 0;
  double eval_return_mean = 0.0;
  double eval_return_min = 0.0;
  double eval_return_max = 0.0;
  double critic_loss = 0.0;
  double kl_mean = 0.0;
  double kl_std = 0.0;
  double alpha_mean = 0.0;
  double alpha_std = 0.0;
  double q_grad_norm = 0.0;
  double actor_grad_norm = 0.0;
  double policy_sigma_mean = 0.0;
};

struct UpdateReport {
  long update_index = 0;
  double critic_loss = 0.0;
  double kl_mean = 0.0;
  double kl_stddev = 0.0;
  double alpha_mean_before = 0.0;
  double alpha_stddev_before = 0.0;
  double alpha_mean = 0.0;
  double alpha_stddev = 0.0;
  double q_grad_norm = 0.0;
  double actor_grad_norm = 0.0;
  double sigma_mean = 0.0;
};

struct TrainResult {
  std::vector<MetricsRow> metrics;
  GaussianActor actor;
  GaussianActor target_actor;
  CriticPair critic;
  KlState kl_state;
  long env_steps = 0;
  long updates = 0;
  long episodes = 0;
};

using UpdateHook = std::function<void(const UpdateReport&)>;

TrainResult run_training(const AgentConfig& cfg, const UpdateHook& on_update = {});

// Undiscounted episode returns; deterministic uses the policy mean.
Vec evaluate_policy(Env& env, const GaussianActor& actor, int episodes,
                    bool deterministic, Rng& rng);

// State-free mixture policy trained directly on the analytic quartic
// Q(a) = -a^4/100 + a^2 by plain SGD ascent.
struct MogConfig {
  long steps = 40000;
  int batch = 1024;
  double lr = 0.003;
  double sigma_init = 10.0;
  double mu_init = 1.0;
  Algorithm algorithm = Algorithm::wpo;  // wpo or classic_pg
  std::uint64_t seed = 1;
  long log_every = 50;
};

struct MogRow {
  long step = 0;
  Vec means;
  Vec stddevs;
  Vec weights;
};

std::vector<MogRow> run_mog_experiment(const MogConfig& cfg);

}  // namespace wpolab
