#pragma once

#include <functional>
#include <string>

#include "wpolab/policy.hpp"
#include "wpolab/vec.hpp"

namespace wpolab {

// Odd, sign-preserving maps applied to dQ/da before it enters the update.
enum class SquashKind { identity, cube_root, tanh_scaled };

SquashKind squash_from_string(const std::string& s);
std::string to_string(SquashKind k);

double squash_value(double g, SquashKind kind, double scale);
Vec squash(const Vec& g, SquashKind kind, double scale);

// Cotangents to feed the Gaussian policy heads for one sampled action.
struct HeadCotangents {
  Vec d_mean;
  Vec d_stddev;
};

// Chains head cotangents into a flat parameter gradient. Direct-parameter
// policies use the identity chaining (concatenation); network actors chain
// through the net's reverse mode.
using HeadVjp = std::function<Vec(const Vec& d_mean, const Vec& d_stddev)>;

Vec identity_head_vjp(const Vec& d_mean, const Vec& d_stddev);

// Per-sample actor gradient d/dparams [ grad_a log pi(a) . squash(q_grad) ]
// with q_grad held fixed. With rescale on, the Gaussian head cotangents
// collapse to d_mean = squash(q_grad) and d_stddev = ((a-mean)/stddev) *
// squash(q_grad). Errors on non-finite q_grad, reporting its norm.
HeadCotangents wpo_head_cotangents(const DiagGaussianParams& p, const Vec& action,
                                   const Vec& q_grad, SquashKind kind,
                                   double squash_scale, bool rescale);

Vec wpo_sample_gradient(const DiagGaussianParams& p, const HeadVjp& head,
                        const Vec& action, const Vec& q_grad, SquashKind kind,
                        double squash_scale, bool rescale);

MixtureGrads wpo_sample_gradient(const MixtureParams& p, const Vec& action,
                                 const Vec& q_grad, SquashKind kind,
                                 double squash_scale, bool rescale);

ExponentialGrads wpo_sample_gradient(const ExponentialParams& p, const Vec& action,
                                     const Vec& q_grad, SquashKind kind,
                                     double squash_scale, bool rescale);

// Trust-region configuration. Soft mode applies fixed penalty weights; hard
// mode runs dual ascent on the weights toward per-part KL targets.
enum class KlMode { none, soft, hard };

KlMode kl_mode_from_string(const std::string& s);
std::string to_string(KlMode m);

struct KlConfig {
  KlMode mode = KlMode::none;
  double alpha_mean = std::log(2.0);
  double alpha_stddev = 1e4;
  double epsilon_mean = 0.01;
  double epsilon_stddev = 1e-4;
  double dual_lr = 0.01;
  double alpha_min = 1e-6;
  double alpha_max = 1e6;
};

struct KlState {
  double alpha_mean = 0.0;
  double alpha_stddev = 0.0;
};

KlState initial_kl_state(const KlConfig& cfg);

// Dual ascent on the penalty weights: alpha <- clip(alpha + dual_lr*(kl -
// epsilon), [alpha_min, alpha_max]). No-op in soft mode and none mode.
KlState update_kl_state(const KlConfig& cfg, const KlState& state,
                        double kl_mean, double kl_stddev);

// Ascent step theta + lr * (wpo_grad - alpha_mean * kl_mean_grad -
// alpha_stddev * kl_stddev_grad). Returns the applied gradient so callers
// can feed it to a stateful optimizer instead.
Vec kl_regularized_actor_gradient(const Vec& avg_wpo_grad, const Vec& kl_mean_grad,
                                  const Vec& kl_stddev_grad, const KlState& state);
Vec kl_regularized_actor_step(const Vec& theta, double lr, const Vec& avg_wpo_grad,
                              const Vec& kl_mean_grad, const Vec& kl_stddev_grad,
                              const KlState& state);

// Both sides of the integration-by-parts identity for a 1-d Gaussian:
//   E_pi[ d/dparams d/da log pi . dQ/da ]
//   = - int d/dparams log pi * d/da( pi dQ/da ) da,
// each by trapezoid quadrature on m cells over [lo, hi]. dQ/da and its
// derivative come from five-point stencils, exact for quartics.
struct FlowProjection {
  DiagGaussianGrads direct;
  DiagGaussianGrads by_parts;
};
FlowProjection flow_projection_lhs(const DiagGaussianParams& p,
                                   const std::function<double(double)>& q,
                                   double lo, double hi, int m);

}  // namespace wpolab
