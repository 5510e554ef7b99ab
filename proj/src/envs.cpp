#include "wpolab/envs.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace wpolab {

namespace {

double clip_to(double v, double lo, double hi, bool& clipped) {
  if (v < lo) {
    clipped = true;
    return lo;
  }
  if (v > hi) {
    clipped = true;
    return hi;
  }
  return v;
}

void check_action_dim(const Vec& action, int dim, const char* where) {
  if (static_cast<int>(action.size()) != dim)
    throw std::invalid_argument(std::string(where) + ": action dim mismatch");
}

}  // namespace

double smooth_max(const Vec& values, double alpha) {
  if (values.empty()) throw std::invalid_argument("smooth_max: empty input");
  double m = values[0] * alpha;
  for (double x : values) m = std::max(m, alpha * x);
  double z = 0.0, s = 0.0;
  for (double x : values) {
    const double w = std::exp(alpha * x - m);
    z += w;
    s += w * x;
  }
  return s / z;
}

BanditEnv::BanditEnv(BanditQ kind) : kind_(kind) {}

EnvSpec BanditEnv::spec() const {
  return EnvSpec{1, 1, Vec{-15.0}, Vec{15.0}, 1};
}

Vec BanditEnv::reset(Rng&) {
  done_ = false;
  return Vec{0.0};
}

StepResult BanditEnv::step(const Vec& action) {
  check_action_dim(action, 1, "BanditEnv::step");
  if (done_) throw std::logic_error("BanditEnv::step: episode already finished");
  bool clipped = false;
  const double a = clip_to(action[0], -15.0, 15.0, clipped);
  done_ = true;
  return StepResult{Vec{0.0}, q(a), true, false, clipped};
}

double BanditEnv::q(double a) const {
  switch (kind_) {
    case BanditQ::neg_quadratic: return -0.5 * a * a;
    case BanditQ::paper_quartic: return -std::pow(a, 4) / 100.0 + a * a;
  }
  throw std::logic_error("bad bandit kind");
}

double BanditEnv::dq(double a) const {
  switch (kind_) {
    case BanditQ::neg_quadratic: return -a;
    case BanditQ::paper_quartic: return -a * a * a / 25.0 + 2.0 * a;
  }
  throw std::logic_error("bad bandit kind");
}

Lqr1dEnv::Lqr1dEnv(double a, double b, double q, double r, int horizon,
                   double init_range, double action_limit)
    : a_(a), b_(b), q_(q), r_(r), horizon_(horizon), init_range_(init_range),
      action_limit_(action_limit) {
  if (horizon < 1) throw std::invalid_argument("Lqr1dEnv: horizon must be >= 1");
  if (!(r > 0.0) || !(q >= 0.0))
    throw std::invalid_argument("Lqr1dEnv: need r > 0 and q >= 0");
}

EnvSpec Lqr1dEnv::spec() const {
  return EnvSpec{1, 1, Vec{-action_limit_}, Vec{action_limit_}, horizon_};
}

Vec Lqr1dEnv::reset(Rng& rng) {
  s_ = rng.uniform(-init_range_, init_range_);
  t_ = 0;
  return Vec{s_};
}

StepResult Lqr1dEnv::step(const Vec& action) {
  check_action_dim(action, 1, "Lqr1dEnv::step");
  if (t_ >= horizon_) throw std::logic_error("Lqr1dEnv::step: episode already finished");
  bool clipped = false;
  const double u = clip_to(action[0], -action_limit_, action_limit_, clipped);
  const double reward = -(q_ * s_ * s_ + r_ * u * u);
  s_ = a_ * s_ + b_ * u;
  ++t_;
  return StepResult{Vec{s_}, reward, false, t_ >= horizon_, clipped};
}

RiccatiSolution riccati_fixed_point(double a, double b, double q, double r,
                                    double gamma) {
  if (!(r > 0.0)) throw std::invalid_argument("riccati_fixed_point: need r > 0");
  double p = q;
  for (int i = 0; i < 1000000; ++i) {
    const double k = gamma * p * a * b / (r + gamma * p * b * b);
    const double ac = a - b * k;
    const double next = q + r * k * k + gamma * p * ac * ac;
    if (std::abs(next - p) < 1e-12) {
      p = next;
      break;
    }
    p = next;
  }
  const double k = gamma * p * a * b / (r + gamma * p * b * b);
  return RiccatiSolution{p, k};
}

Vec riccati_horizon(double a, double b, double q, double r, int horizon) {
  if (horizon < 1) throw std::invalid_argument("riccati_horizon: horizon must be >= 1");
  Vec p(static_cast<std::size_t>(horizon) + 1, 0.0);
  for (int t = horizon - 1; t >= 0; --t) {
    const double pn = p[t + 1];
    const double k = pn * a * b / (r + pn * b * b);
    const double ac = a - b * k;
    p[t] = q + r * k * k + pn * ac * ac;
  }
  return p;
}

double lqr_optimal_average_return(const Lqr1dEnv& env) {
  const Vec p = riccati_horizon(env.dyn_a(), env.dyn_b(), env.cost_q(), env.cost_r(),
                                env.spec().horizon);
  const double c = env.init_range();
  return -p[0] * c * c / 3.0;
}

PendulumEnv::PendulumEnv(double max_torque, double dt, int horizon, double mass,
                         double length, double gravity)
    : max_torque_(max_torque), dt_(dt), horizon_(horizon), mass_(mass),
      length_(length), gravity_(gravity) {
  if (horizon < 1) throw std::invalid_argument("PendulumEnv: horizon must be >= 1");
}

EnvSpec PendulumEnv::spec() const {
  return EnvSpec{3, 1, Vec{-max_torque_}, Vec{max_torque_}, horizon_};
}

Vec PendulumEnv::observe() const {
  return Vec{std::cos(theta_), std::sin(theta_), theta_dot_};
}

Vec PendulumEnv::reset(Rng& rng) {
  theta_ = rng.uniform(-std::numbers::pi, std::numbers::pi);
  theta_dot_ = rng.uniform(-1.0, 1.0);
  t_ = 0;
  return observe();
}

void PendulumEnv::set_state(double theta, double theta_dot) {
  theta_ = theta;
  theta_dot_ = theta_dot;
  t_ = 0;
}

StepResult PendulumEnv::step(const Vec& action) {
  check_action_dim(action, 1, "PendulumEnv::step");
  if (t_ >= horizon_) throw std::logic_error("PendulumEnv::step: episode already finished");
  bool clipped = false;
  const double u = clip_to(action[0], -max_torque_, max_torque_, clipped);

  const double angle = std::remainder(theta_, 2.0 * std::numbers::pi);
  const double reward = -(angle * angle + 0.1 * theta_dot_ * theta_dot_ + 0.001 * u * u);

  const double accel = gravity_ / length_ * std::sin(theta_) +
                       u / (mass_ * length_ * length_);
  theta_dot_ = std::clamp(theta_dot_ + dt_ * accel, -8.0, 8.0);
  theta_ += dt_ * theta_dot_;
  ++t_;
  return StepResult{observe(), reward, false, t_ >= horizon_, clipped};
}

ReplicaEnv::ReplicaEnv(const Factory& factory, int count, double alpha,
                       double reward_max)
    : alpha_(alpha), reward_max_(reward_max) {
  if (count < 1) throw std::invalid_argument("ReplicaEnv: count must be >= 1");
  if (!(reward_max > 0.0))
    throw std::invalid_argument("ReplicaEnv: reward_max must be positive");
  for (int i = 0; i < count; ++i) envs_.push_back(factory());
}

EnvSpec ReplicaEnv::spec() const {
  const EnvSpec base = envs_[0]->spec();
  EnvSpec out;
  out.state_dim = base.state_dim * static_cast<int>(envs_.size());
  out.action_dim = base.action_dim * static_cast<int>(envs_.size());
  out.horizon = base.horizon;
  for (std::size_t i = 0; i < envs_.size(); ++i) {
    out.action_lo.insert(out.action_lo.end(), base.action_lo.begin(), base.action_lo.end());
    out.action_hi.insert(out.action_hi.end(), base.action_hi.begin(), base.action_hi.end());
  }
  return out;
}

Vec ReplicaEnv::reset(Rng& rng) {
  Vec state;
  for (auto& env : envs_) {
    const Vec s = env->reset(rng);
    state.insert(state.end(), s.begin(), s.end());
  }
  return state;
}

StepResult ReplicaEnv::step(const Vec& action) {
  const EnvSpec base = envs_[0]->spec();
  check_action_dim(action, base.action_dim * static_cast<int>(envs_.size()),
                   "ReplicaEnv::step");
  StepResult out;
  Vec rewards;
  bool all_truncated = true;
  for (std::size_t i = 0; i < envs_.size(); ++i) {
    const Vec sub(action.begin() + static_cast<long>(i) * base.action_dim,
                  action.begin() + static_cast<long>(i + 1) * base.action_dim);
    const StepResult r = envs_[i]->step(sub);
    out.state.insert(out.state.end(), r.state.begin(), r.state.end());
    rewards.push_back(r.reward / reward_max_);
    out.terminal = out.terminal || r.terminal;
    all_truncated = all_truncated && r.truncated;
    out.action_clipped = out.action_clipped || r.action_clipped;
  }
  out.truncated = all_truncated;
  out.reward = smooth_max(rewards, alpha_);
  return out;
}

std::unique_ptr<Env> make_env(const std::string& name) {
  if (name == "bandit_quadratic")
    return std::make_unique<BanditEnv>(BanditQ::neg_quadratic);
  if (name == "bandit_quartic")
    return std::make_unique<BanditEnv>(BanditQ::paper_quartic);
  if (name == "lqr")
    return std::make_unique<Lqr1dEnv>(0.9, 1.0, 1.0, 1.0, 50);
  if (name == "pendulum")
    return std::make_unique<PendulumEnv>();
  if (name == "pendulum_replica2")
    return std::make_unique<ReplicaEnv>([] { return std::make_unique<PendulumEnv>(); },
                                        2, -4.0, 16.3);
  throw std::invalid_argument("unknown env: " + name);
}

}  // namespace wpolab
