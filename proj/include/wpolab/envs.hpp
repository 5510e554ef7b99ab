#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "wpolab/rng.hpp"
#include "wpolab/vec.hpp"

namespace wpolab {

struct EnvSpec {
  int state_dim = 0;
  int action_dim = 0;
  Vec action_lo;
  Vec action_hi;
  int horizon = 0;
};

struct StepResult {
  Vec state;
  double reward = 0.0;
  bool terminal = false;     // episode ended inside the MDP, no bootstrap
  bool truncated = false;    // horizon cut, bootstrapping stays valid
  bool action_clipped = false;
};

class Env {
 public:
  virtual ~Env() = default;
  virtual EnvSpec spec() const = 0;
  virtual Vec reset(Rng& rng) = 0;
  // Clips the action to bounds before the dynamics and reports the clip.
  virtual StepResult step(const Vec& action) = 0;
};

// sum_i x_i exp(alpha x_i) / sum_i exp(alpha x_i), computed stably.
// alpha -> +inf approaches max, alpha -> -inf approaches min, alpha = 0 is
// the mean.
double smooth_max(const Vec& values, double alpha);

enum class BanditQ { neg_quadratic, paper_quartic };

// One-step environment, scalar action on [-15, 15], reward Q(a). Exposes
// the analytic Q and dQ/da for exact-critic experiments.
class BanditEnv : public Env {
 public:
  explicit BanditEnv(BanditQ kind);
  EnvSpec spec() const override;
  Vec reset(Rng& rng) override;
  StepResult step(const Vec& action) override;

  double q(double a) const;
  double dq(double a) const;
  BanditQ kind() const { return kind_; }

 private:
  BanditQ kind_;
  bool done_ = true;
};

// s' = a s + b u, reward -(q s^2 + r u^2), s0 ~ U(-init_range, init_range),
// episode truncates at the horizon.
class Lqr1dEnv : public Env {
 public:
  Lqr1dEnv(double a, double b, double q, double r, int horizon,
           double init_range = 1.0, double action_limit = 5.0);
  EnvSpec spec() const override;
  Vec reset(Rng& rng) override;
  StepResult step(const Vec& action) override;

  double dyn_a() const { return a_; }
  double dyn_b() const { return b_; }
  double cost_q() const { return q_; }
  double cost_r() const { return r_; }
  double init_range() const { return init_range_; }

 private:
  double a_, b_, q_, r_;
  int horizon_;
  double init_range_;
  double action_limit_;
  double s_ = 0.0;
  int t_ = 0;
};

// Infinite-horizon discounted Riccati fixed point for the 1-d problem,
// iterated to 1e-12. gain k gives the optimal control u = -k s.
struct RiccatiSolution {
  double p;
  double gain;
};
RiccatiSolution riccati_fixed_point(double a, double b, double q, double r,
                                    double gamma);

// Finite-horizon cost-to-go coefficients p_0..p_H (p_H = 0, undiscounted):
// optimal return from s0 over H steps is -p_0 * s0^2.
Vec riccati_horizon(double a, double b, double q, double r, int horizon);

// Optimal undiscounted average return over s0 ~ U(-init_range, init_range).
double lqr_optimal_average_return(const Lqr1dEnv& env);

// Swing-up pendulum, state (cos th, sin th, thdot), th = 0 upright, reward
// -(wrap(th)^2 + 0.1 thdot^2 + 0.001 u^2), semi-implicit Euler.
class PendulumEnv : public Env {
 public:
  PendulumEnv(double max_torque = 2.0, double dt = 0.05, int horizon = 200,
              double mass = 1.0, double length = 1.0, double gravity = 10.0);
  EnvSpec spec() const override;
  Vec reset(Rng& rng) override;
  StepResult step(const Vec& action) override;

  void set_state(double theta, double theta_dot);
  double theta() const { return theta_; }
  double theta_dot() const { return theta_dot_; }

 private:
  Vec observe() const;
  double max_torque_, dt_;
  int horizon_;
  double mass_, length_, gravity_;
  double theta_ = 0.0, theta_dot_ = 0.0;
  int t_ = 0;
};

// count copies of a base env with concatenated observations and actions.
// Per-step reward is smooth_max over the per-replica rewards scaled by
// 1/reward_max. Terminal when any replica terminates.
class ReplicaEnv : public Env {
 public:
  using Factory = std::function<std::unique_ptr<Env>()>;
  ReplicaEnv(const Factory& factory, int count, double alpha, double reward_max);
  EnvSpec spec() const override;
  Vec reset(Rng& rng) override;
  StepResult step(const Vec& action) override;

 private:
  std::vector<std::unique_ptr<Env>> envs_;
  double alpha_;
  double reward_max_;
};

// Environment registry used by the training configs: bandit_quadratic,
// bandit_quartic, lqr, pendulum, pendulum_replica2.
std::unique_ptr<Env> make_env(const std::string& name);

}  // namespace wpolab
