#include "wpolab/wpo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "wpolab/quadrature.hpp"

namespace wpolab {

SquashKind squash_from_string(const std::string& s) {
  if (s == "identity") return SquashKind::identity;
  if (s == "cube_root") return SquashKind::cube_root;
  if (s == "tanh_scaled") return SquashKind::tanh_scaled;
  throw std::invalid_argument("unknown squash kind: " + s);
}

std::string to_string(SquashKind k) {
  switch (k) {
    case SquashKind::identity: return "identity";
    case SquashKind::cube_root: return "cube_root";
    case SquashKind::tanh_scaled: return "tanh_scaled";
  }
  throw std::logic_error("bad squash enum");
}

double squash_value(double g, SquashKind kind, double scale) {
  switch (kind) {
    case SquashKind::identity: return g;
    case SquashKind::cube_root: return std::cbrt(g);
    case SquashKind::tanh_scaled:
      if (!(scale > 0.0))
        throw std::invalid_argument("tanh_scaled squash needs a positive scale");
      return scale * std::tanh(g / scale);
  }
  throw std::logic_error("bad squash enum");
}

Vec squash(const Vec& g, SquashKind kind, double scale) {
  Vec out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = squash_value(g[i], kind, scale);
  return out;
}

Vec identity_head_vjp(const Vec& d_mean, const Vec& d_stddev) {
  Vec out;
  out.reserve(d_mean.size() + d_stddev.size());
  out.insert(out.end(), d_mean.begin(), d_mean.end());
  out.insert(out.end(), d_stddev.begin(), d_stddev.end());
  return out;
}

namespace {

void check_q_grad(const Vec& q_grad) {
  if (!all_finite(q_grad)) {
    double norm = 0.0;
    for (double v : q_grad) norm += v * v;
    std::ostringstream msg;
    msg << "wpo_sample_gradient: non-finite q_grad (norm " << std::sqrt(norm) << ")";
    throw std::runtime_error(msg.str());
  }
}

}  // namespace

HeadCotangents wpo_head_cotangents(const DiagGaussianParams& p, const Vec& action,
                                   const Vec& q_grad, SquashKind kind,
                                   double squash_scale, bool rescale) {
  check_same_size(p.mean, action, "wpo_head_cotangents");
  check_same_size(action, q_grad, "wpo_head_cotangents q_grad");
  check_q_grad(q_grad);
  const Vec sq = squash(q_grad, kind, squash_scale);
  HeadCotangents cot{Vec(action.size()), Vec(action.size())};
  for (std::size_t i = 0; i < action.size(); ++i) {
    const double d = action[i] - p.mean[i];
    const double s = p.stddev[i];
    if (rescale) {
      cot.d_mean[i] = sq[i];
      cot.d_stddev[i] = d / s * sq[i];
    } else {
      cot.d_mean[i] = sq[i] / (s * s);
      cot.d_stddev[i] = 2.0 * d * sq[i] / (s * s * s);
    }
  }
  return cot;
}

Vec wpo_sample_gradient(const DiagGaussianParams& p, const HeadVjp& head,
                        const Vec& action, const Vec& q_grad, SquashKind kind,
                        double squash_scale, bool rescale) {
  const HeadCotangents cot =
      wpo_head_cotangents(p, action, q_grad, kind, squash_scale, rescale);
  return head(cot.d_mean, cot.d_stddev);
}

MixtureGrads wpo_sample_gradient(const MixtureParams& p, const Vec& action,
                                 const Vec& q_grad, SquashKind kind,
                                 double squash_scale, bool rescale) {
  check_q_grad(q_grad);
  MixtureGrads g = mixed_contraction(p, action, squash(q_grad, kind, squash_scale));
  if (rescale) fisher_rescale(p, g);
  return g;
}

ExponentialGrads wpo_sample_gradient(const ExponentialParams& p, const Vec& action,
                                     const Vec& q_grad, SquashKind kind,
                                     double squash_scale, bool rescale) {
  check_q_grad(q_grad);
  ExponentialGrads g = mixed_contraction(p, action, squash(q_grad, kind, squash_scale));
  if (rescale) fisher_rescale(p, g);
  return g;
}

KlMode kl_mode_from_string(const std::string& s) {
  if (s == "none") return KlMode::none;
  if (s == "soft") return KlMode::soft;
  if (s == "hard") return KlMode::hard;
  throw std::invalid_argument("unknown kl mode: " + s);
}

std::string to_string(KlMode m) {
  switch (m) {
    case KlMode::none: return "none";
    case KlMode::soft: return "soft";
    case KlMode::hard: return "hard";
  }
  throw std::logic_error("bad kl mode enum");
}

KlState initial_kl_state(const KlConfig& cfg) {
  switch (cfg.mode) {
    case KlMode::none: return {0.0, 0.0};
    case KlMode::soft: return {cfg.alpha_mean, cfg.alpha_stddev};
    case KlMode::hard: return {cfg.alpha_min, cfg.alpha_min};
  }
  throw std::logic_error("bad kl mode enum");
}

KlState update_kl_state(const KlConfig& cfg, const KlState& state,
                        double kl_mean, double kl_stddev) {
  if (cfg.mode != KlMode::hard) return initial_kl_state(cfg);
  auto clip = [&](double a) { return std::clamp(a, cfg.alpha_min, cfg.alpha_max); };
  return {clip(state.alpha_mean + cfg.dual_lr * (kl_mean - cfg.epsilon_mean)),
          clip(state.alpha_stddev + cfg.dual_lr * (kl_stddev - cfg.epsilon_stddev))};
}

Vec kl_regularized_actor_gradient(const Vec& avg_wpo_grad, const Vec& kl_mean_grad,
                                  const Vec& kl_stddev_grad, const KlState& state) {
  check_same_size(avg_wpo_grad, kl_mean_grad, "kl_regularized_actor_gradient");
  check_same_size(avg_wpo_grad, kl_stddev_grad, "kl_regularized_actor_gradient");
  Vec g = avg_wpo_grad;
  axpy(-state.alpha_mean, kl_mean_grad, g);
  axpy(-state.alpha_stddev, kl_stddev_grad, g);
  return g;
}

Vec kl_regularized_actor_step(const Vec& theta, double lr, const Vec& avg_wpo_grad,
                              const Vec& kl_mean_grad, const Vec& kl_stddev_grad,
                              const KlState& state) {
  check_same_size(theta, avg_wpo_grad, "kl_regularized_actor_step");
  Vec out = theta;
  const Vec g =
      kl_regularized_actor_gradient(avg_wpo_grad, kl_mean_grad, kl_stddev_grad, state);
  axpy(lr, g, out);
  return out;
}

FlowProjection flow_projection_lhs(const DiagGaussianParams& p,
                                   const std::function<double(double)>& q,
                                   double lo, double hi, int m) {
  if (p.mean.size() != 1)
    throw std::invalid_argument("flow_projection_lhs: one-dimensional policies only");
  if (!(lo < hi) || m < 16)
    throw std::invalid_argument("flow_projection_lhs: bad grid");

  const double mu = p.mean[0];
  const double sigma = p.stddev[0];
  const double h = (hi - lo) / m;

  auto dq = [&](double a) {
    return (-q(a + 2 * h) + 8 * q(a + h) - 8 * q(a - h) + q(a - 2 * h)) / (12 * h);
  };
  auto d2q = [&](double a) {
    return (-q(a + 2 * h) + 16 * q(a + h) - 30 * q(a) + 16 * q(a - h) - q(a - 2 * h)) /
           (12 * h * h);
  };
  auto pdf = [&](double a) {
    const double z = (a - mu) / sigma;
    return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
  };

  FlowProjection out;
  out.direct.d_mean = {trapezoid(lo, hi, m, [&](double a) {
    return pdf(a) * dq(a) / (sigma * sigma);
  })};
  out.direct.d_stddev = {trapezoid(lo, hi, m, [&](double a) {
    return pdf(a) * 2.0 * (a - mu) / (sigma * sigma * sigma) * dq(a);
  })};

  auto div_pi_v = [&](double a) {
    const double dpi = pdf(a) * (-(a - mu) / (sigma * sigma));
    return dpi * dq(a) + pdf(a) * d2q(a);
  };
  out.by_parts.d_mean = {trapezoid(lo, hi, m, [&](double a) {
    const double score = (a - mu) / (sigma * sigma);
    return -score * div_pi_v(a);
  })};
  out.by_parts.d_stddev = {trapezoid(lo, hi, m, [&](double a) {
    const double d = a - mu;
    const double score = d * d / (sigma * sigma * sigma) - 1.0 / sigma;
    return -score * div_pi_v(a);
  })};
  return out;
}

}  // namespace wpolab
