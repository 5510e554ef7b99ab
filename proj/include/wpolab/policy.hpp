#pragma once

#include <vector>

#include "wpolab/rng.hpp"
#include "wpolab/vec.hpp"

namespace wpolab {

inline constexpr double kSigmaMin = 1e-3;

// Diagonal Gaussian over an n-dimensional action.
struct DiagGaussianParams {
  Vec mean;
  Vec stddev;
};

struct DiagGaussianGrads {
  Vec d_mean;
  Vec d_stddev;
};

// Mixture of K diagonal Gaussians. Weights derive from logits by softmax.
struct MixtureParams {
  Vec logits;
  std::vector<Vec> means;
  std::vector<Vec> stddevs;

  Vec weights() const;
  std::size_t components() const { return logits.size(); }
  std::size_t dims() const { return means.empty() ? 0 : means[0].size(); }
};

struct MixtureGrads {
  Vec d_logits;
  std::vector<Vec> d_means;
  std::vector<Vec> d_stddevs;
};

// Product of exponentials on the nonnegative orthant, one scale per dim.
struct ExponentialParams {
  Vec scales;
};

struct ExponentialGrads {
  Vec d_scales;
};

void validate(const DiagGaussianParams& p);
void validate(const MixtureParams& p);
void validate(const ExponentialParams& p);

double log_prob(const DiagGaussianParams& p, const Vec& action);
double log_prob(const MixtureParams& p, const Vec& action);
double log_prob(const ExponentialParams& p, const Vec& action);

// Draw order: Gaussian uses n normals in dim order; mixture draws one
// uniform for the component then n normals; exponential uses n draws.
Vec sample(const DiagGaussianParams& p, Rng& rng);
Vec sample(const MixtureParams& p, Rng& rng);
Vec sample(const ExponentialParams& p, Rng& rng);

// d log pi / d action at the given action.
Vec grad_action_log_prob(const DiagGaussianParams& p, const Vec& action);
Vec grad_action_log_prob(const MixtureParams& p, const Vec& action);
Vec grad_action_log_prob(const ExponentialParams& p, const Vec& action);

// d log pi / d params (score function), for likelihood-ratio updates.
DiagGaussianGrads grad_params_log_prob(const DiagGaussianParams& p, const Vec& action);
MixtureGrads grad_params_log_prob(const MixtureParams& p, const Vec& action);
ExponentialGrads grad_params_log_prob(const ExponentialParams& p, const Vec& action);

// Mixed second derivative contracted with a cotangent on the action:
// d/d params [ grad_action_log_prob(action) . v ].
DiagGaussianGrads mixed_contraction(const DiagGaussianParams& p, const Vec& action, const Vec& v);
MixtureGrads mixed_contraction(const MixtureParams& p, const Vec& action, const Vec& v);
ExponentialGrads mixed_contraction(const ExponentialParams& p, const Vec& action, const Vec& v);

// Multiplies raw gradients by the inverse of the diagonal Fisher blocks:
// Gaussian mean block sigma^2, stddev block sigma^2/2; mixture components
// by the owning component's sigma_k^2 (logit grads use the mean of
// sigma_k^2 over dims); exponential scales by beta^2.
void fisher_rescale(const DiagGaussianParams& p, DiagGaussianGrads& g);
void fisher_rescale(const MixtureParams& p, MixtureGrads& g);
void fisher_rescale(const ExponentialParams& p, ExponentialGrads& g);

// KL(p || q) for diagonal Gaussians, with a mean/stddev split that sums
// exactly to the total.
double kl_divergence(const DiagGaussianParams& p, const DiagGaussianParams& q);
double kl_mean_only(const DiagGaussianParams& p, const DiagGaussianParams& q);
double kl_stddev_only(const DiagGaussianParams& p, const DiagGaussianParams& q);

// Gradients of the two KL parts with respect to q (the current policy).
DiagGaussianGrads kl_mean_only_grad_q(const DiagGaussianParams& p, const DiagGaussianParams& q);
DiagGaussianGrads kl_stddev_only_grad_q(const DiagGaussianParams& p, const DiagGaussianParams& q);

// Smooth positive map for network stddev heads: sigma_min + softplus(raw).
double stddev_from_raw(double raw);
double stddev_from_raw_derivative(double raw);
double raw_from_stddev(double stddev);

}  // namespace wpolab
