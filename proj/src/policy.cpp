#include "wpolab/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace wpolab {

namespace {

constexpr double kLogTwoPi = 1.8378770664093453;

// responsibilities r_k(a) and per-component helpers shared by the mixture ops
struct MixtureWork {
  Vec r;                    // responsibilities, length K
  std::vector<Vec> u;       // u[k][i] = -(a_i - mu_ki) / sigma_ki^2
  Vec g;                    // grad_action_log_prob, length n
  double log_density;
};

MixtureWork mixture_work(const MixtureParams& p, const Vec& a) {
  const std::size_t K = p.components();
  const std::size_t n = p.dims();
  if (a.size() != n) throw std::invalid_argument("mixture: action dim mismatch");

  Vec logw(K);
  const Vec rho = p.weights();
  for (std::size_t k = 0; k < K; ++k) {
    double lp = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double z = (a[i] - p.means[k][i]) / p.stddevs[k][i];
      lp += -0.5 * z * z - std::log(p.stddevs[k][i]) - 0.5 * kLogTwoPi;
    }
    logw[k] = std::log(rho[k]) + lp;
  }
  const double m = *std::max_element(logw.begin(), logw.end());
  double z = 0.0;
  for (double lw : logw) z += std::exp(lw - m);

  MixtureWork w;
  w.log_density = m + std::log(z);
  w.r.resize(K);
  for (std::size_t k = 0; k < K; ++k) w.r[k] = std::exp(logw[k] - w.log_density);
  w.u.assign(K, Vec(n));
  w.g.assign(n, 0.0);
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t i = 0; i < n; ++i) {
      w.u[k][i] = -(a[i] - p.means[k][i]) / (p.stddevs[k][i] * p.stddevs[k][i]);
      w.g[i] += w.r[k] * w.u[k][i];
    }
  return w;
}

}  // namespace

Vec MixtureParams::weights() const {
  const double m = *std::max_element(logits.begin(), logits.end());
  Vec w(logits.size());
  double z = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    w[k] = std::exp(logits[k] - m);
    z += w[k];
  }
  for (double& v : w) v /= z;
  return w;
}

void validate(const DiagGaussianParams& p) {
  if (p.mean.empty() || p.mean.size() != p.stddev.size())
    throw std::invalid_argument("gaussian: mean/stddev size mismatch or empty");
  for (double s : p.stddev)
    if (!(s >= kSigmaMin))
      throw std::invalid_argument("gaussian: stddev below sigma_min");
}

void validate(const MixtureParams& p) {
  const std::size_t K = p.components();
  if (K == 0 || p.means.size() != K || p.stddevs.size() != K)
    throw std::invalid_argument("mixture: component count mismatch or empty");
  const std::size_t n = p.dims();
  if (n == 0) throw std::invalid_argument("mixture: zero action dims");
  for (std::size_t k = 0; k < K; ++k) {
    if (p.means[k].size() != n || p.stddevs[k].size() != n)
      throw std::invalid_argument("mixture: component dim mismatch");
    for (double s : p.stddevs[k])
      if (!(s >= kSigmaMin))
        throw std::invalid_argument("mixture: stddev below sigma_min");
    if (!std::isfinite(p.logits[k]))
      throw std::invalid_argument("mixture: non-finite logit");
  }
}

void validate(const ExponentialParams& p) {
  if (p.scales.empty())
    throw std::invalid_argument("exponential: empty scales");
  for (double b : p.scales)
    if (!(b > 0.0)) throw std::invalid_argument("exponential: scale must be positive");
}

double log_prob(const DiagGaussianParams& p, const Vec& a) {
  check_same_size(p.mean, a, "gaussian log_prob");
  double lp = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double z = (a[i] - p.mean[i]) / p.stddev[i];
    lp += -0.5 * z * z - std::log(p.stddev[i]) - 0.5 * kLogTwoPi;
  }
  return lp;
}

double log_prob(const MixtureParams& p, const Vec& a) {
  return mixture_work(p, a).log_density;
}

double log_prob(const ExponentialParams& p, const Vec& a) {
  check_same_size(p.scales, a, "exponential log_prob");
  double lp = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] < 0.0) return -std::numeric_limits<double>::infinity();
    lp += -std::log(p.scales[i]) - a[i] / p.scales[i];
  }
  return lp;
}

Vec sample(const DiagGaussianParams& p, Rng& rng) {
  Vec a(p.mean.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    a[i] = p.mean[i] + p.stddev[i] * rng.normal();
  return a;
}

Vec sample(const MixtureParams& p, Rng& rng) {
  const Vec rho = p.weights();
  const double u = rng.uniform();
  std::size_t k = 0;
  double acc = 0.0;
  for (; k + 1 < rho.size(); ++k) {
    acc += rho[k];
    if (u < acc) break;
  }
  Vec a(p.dims());
  for (std::size_t i = 0; i < a.size(); ++i)
    a[i] = p.means[k][i] + p.stddevs[k][i] * rng.normal();
  return a;
}

Vec sample(const ExponentialParams& p, Rng& rng) {
  Vec a(p.scales.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    a[i] = rng.exponential(p.scales[i]);
  return a;
}

Vec grad_action_log_prob(const DiagGaussianParams& p, const Vec& a) {
  check_same_size(p.mean, a, "gaussian grad_action");
  Vec g(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    g[i] = -(a[i] - p.mean[i]) / (p.stddev[i] * p.stddev[i]);
  return g;
}

Vec grad_action_log_prob(const MixtureParams& p, const Vec& a) {
  return mixture_work(p, a).g;
}

Vec grad_action_log_prob(const ExponentialParams& p, const Vec& a) {
  check_same_size(p.scales, a, "exponential grad_action");
  for (double ai : a)
    if (ai < 0.0) throw std::invalid_argument("exponential: action outside support");
  Vec g(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) g[i] = -1.0 / p.scales[i];
  return g;
}

DiagGaussianGrads grad_params_log_prob(const DiagGaussianParams& p, const Vec& a) {
  check_same_size(p.mean, a, "gaussian grad_params");
  DiagGaussianGrads g{Vec(a.size()), Vec(a.size())};
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - p.mean[i];
    const double s = p.stddev[i];
    g.d_mean[i] = d / (s * s);
    g.d_stddev[i] = (d * d - s * s) / (s * s * s);
  }
  return g;
}

MixtureGrads grad_params_log_prob(const MixtureParams& p, const Vec& a) {
  const MixtureWork w = mixture_work(p, a);
  const Vec rho = p.weights();
  const std::size_t K = p.components();
  const std::size_t n = p.dims();
  MixtureGrads g{Vec(K), std::vector<Vec>(K, Vec(n)), std::vector<Vec>(K, Vec(n))};
  for (std::size_t k = 0; k < K; ++k) {
    g.d_logits[k] = w.r[k] - rho[k];
    for (std::size_t i = 0; i < n; ++i) {
      const double d = a[i] - p.means[k][i];
      const double s = p.stddevs[k][i];
      g.d_means[k][i] = w.r[k] * d / (s * s);
      g.d_stddevs[k][i] = w.r[k] * (d * d - s * s) / (s * s * s);
    }
  }
  return g;
}

ExponentialGrads grad_params_log_prob(const ExponentialParams& p, const Vec& a) {
  check_same_size(p.scales, a, "exponential grad_params");
  ExponentialGrads g{Vec(a.size())};
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double b = p.scales[i];
    g.d_scales[i] = (a[i] - b) / (b * b);
  }
  return g;
}

DiagGaussianGrads mixed_contraction(const DiagGaussianParams& p, const Vec& a, const Vec& v) {
  check_same_size(p.mean, a, "gaussian mixed_contraction");
  check_same_size(a, v, "gaussian mixed_contraction cotangent");
  DiagGaussianGrads g{Vec(a.size()), Vec(a.size())};
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double s = p.stddev[i];
    g.d_mean[i] = v[i] / (s * s);
    g.d_stddev[i] = 2.0 * (a[i] - p.mean[i]) * v[i] / (s * s * s);
  }
  return g;
}

MixtureGrads mixed_contraction(const MixtureParams& p, const Vec& a, const Vec& v) {
  const MixtureWork w = mixture_work(p, a);
  if (v.size() != p.dims())
    throw std::invalid_argument("mixture mixed_contraction: cotangent dim mismatch");
  const std::size_t K = p.components();
  const std::size_t n = p.dims();
  MixtureGrads g{Vec(K), std::vector<Vec>(K, Vec(n)), std::vector<Vec>(K, Vec(n))};
  for (std::size_t k = 0; k < K; ++k) {
    double resid = 0.0;  // sum_j (u_kj - g_j) v_j
    for (std::size_t j = 0; j < n; ++j) resid += (w.u[k][j] - w.g[j]) * v[j];
    g.d_logits[k] = w.r[k] * resid;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = a[i] - p.means[k][i];
      const double s = p.stddevs[k][i];
      const double c = d / (s * s);
      const double score_s = d * d / (s * s * s) - 1.0 / s;
      g.d_means[k][i] = w.r[k] * (c * resid + v[i] / (s * s));
      g.d_stddevs[k][i] = w.r[k] * (score_s * resid + 2.0 * d * v[i] / (s * s * s));
    }
  }
  return g;
}

ExponentialGrads mixed_contraction(const ExponentialParams& p, const Vec& a, const Vec& v) {
  check_same_size(p.scales, a, "exponential mixed_contraction");
  check_same_size(a, v, "exponential mixed_contraction cotangent");
  ExponentialGrads g{Vec(a.size())};
  for (std::size_t i = 0; i < a.size(); ++i)
    g.d_scales[i] = v[i] / (p.scales[i] * p.scales[i]);
  return g;
}

void fisher_rescale(const DiagGaussianParams& p, DiagGaussianGrads& g) {
  check_same_size(p.mean, g.d_mean, "fisher_rescale");
  check_same_size(p.stddev, g.d_stddev, "fisher_rescale");
  for (std::size_t i = 0; i < p.mean.size(); ++i) {
    const double s2 = p.stddev[i] * p.stddev[i];
    g.d_mean[i] *= s2;
    g.d_stddev[i] *= 0.5 * s2;
  }
}

void fisher_rescale(const MixtureParams& p, MixtureGrads& g) {
  const std::size_t K = p.components();
  if (g.d_logits.size() != K || g.d_means.size() != K || g.d_stddevs.size() != K)
    throw std::invalid_argument("fisher_rescale: mixture grad shape mismatch");
  for (std::size_t k = 0; k < K; ++k) {
    double s2_mean = 0.0;
    for (std::size_t i = 0; i < p.dims(); ++i) {
      const double s2 = p.stddevs[k][i] * p.stddevs[k][i];
      g.d_means[k][i] *= s2;
      g.d_stddevs[k][i] *= s2;
      s2_mean += s2;
    }
    g.d_logits[k] *= s2_mean / static_cast<double>(p.dims());
  }
}

void fisher_rescale(const ExponentialParams& p, ExponentialGrads& g) {
  check_same_size(p.scales, g.d_scales, "fisher_rescale");
  for (std::size_t i = 0; i < p.scales.size(); ++i)
    g.d_scales[i] *= p.scales[i] * p.scales[i];
}

double kl_divergence(const DiagGaussianParams& p, const DiagGaussianParams& q) {
  return kl_mean_only(p, q) + kl_stddev_only(p, q);
}

double kl_mean_only(const DiagGaussianParams& p, const DiagGaussianParams& q) {
  check_same_size(p.mean, q.mean, "kl_mean_only");
  double kl = 0.0;
  for (std::size_t i = 0; i < p.mean.size(); ++i) {
    const double d = p.mean[i] - q.mean[i];
    kl += 0.5 * d * d / (q.stddev[i] * q.stddev[i]);
  }
  return kl;
}

double kl_stddev_only(const DiagGaussianParams& p, const DiagGaussianParams& q) {
  check_same_size(p.stddev, q.stddev, "kl_stddev_only");
  double kl = 0.0;
  for (std::size_t i = 0; i < p.stddev.size(); ++i) {
    const double sp = p.stddev[i];
    const double sq = q.stddev[i];
    kl += std::log(sq / sp) + 0.5 * sp * sp / (sq * sq) - 0.5;
  }
  return kl;
}

DiagGaussianGrads kl_mean_only_grad_q(const DiagGaussianParams& p, const DiagGaussianParams& q) {
  check_same_size(p.mean, q.mean, "kl_mean_only_grad_q");
  DiagGaussianGrads g{Vec(q.mean.size()), Vec(q.mean.size(), 0.0)};
  for (std::size_t i = 0; i < q.mean.size(); ++i) {
    const double d = p.mean[i] - q.mean[i];
    const double sq = q.stddev[i];
    g.d_mean[i] = -d / (sq * sq);
    g.d_stddev[i] = -d * d / (sq * sq * sq);
  }
  return g;
}

DiagGaussianGrads kl_stddev_only_grad_q(const DiagGaussianParams& p, const DiagGaussianParams& q) {
  check_same_size(p.stddev, q.stddev, "kl_stddev_only_grad_q");
  DiagGaussianGrads g{Vec(q.mean.size(), 0.0), Vec(q.mean.size())};
  for (std::size_t i = 0; i < q.stddev.size(); ++i) {
    const double sp = p.stddev[i];
    const double sq = q.stddev[i];
    g.d_stddev[i] = 1.0 / sq - sp * sp / (sq * sq * sq);
  }
  return g;
}

double stddev_from_raw(double raw) {
  double sp;
  if (raw > 30.0)
    sp = raw;
  else if (raw < -30.0)
    sp = std::exp(raw);
  else
    sp = std::log1p(std::exp(raw));
  return kSigmaMin + sp;
}

double stddev_from_raw_derivative(double raw) {
  if (raw > 30.0) return 1.0;
  if (raw < -30.0) return std::exp(raw);
  return 1.0 / (1.0 + std::exp(-raw));
}

double raw_from_stddev(double stddev) {
  const double sp = stddev - kSigmaMin;
  if (!(sp > 0.0))
    throw std::invalid_argument("raw_from_stddev: stddev must exceed sigma_min");
  if (sp > 30.0) return sp;
  return std::log(std::expm1(sp));
}

}  // namespace wpolab
