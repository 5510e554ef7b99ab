#pragma once

#include "wpolab/policy.hpp"
#include "wpolab/wpo.hpp"

namespace wpolab {

// Likelihood-ratio gradient (q - baseline) * d log pi / d params, as head
// cotangents for a Gaussian (chain through the actor) or directly for a
// mixture. With rescale on, the diagonal Fisher rescaling is applied.
HeadCotangents classic_pg_head_cotangents(const DiagGaussianParams& p,
                                          const Vec& action, double q_value,
                                          double baseline, bool rescale);
Vec classic_pg_gradient(const DiagGaussianParams& p, const HeadVjp& head,
                        const Vec& action, double q_value, double baseline,
                        bool rescale);
MixtureGrads classic_pg_gradient(const MixtureParams& p, const Vec& action,
                                 double q_value, double baseline, bool rescale);

// Deterministic policy gradient: dQ/da at the mean, through the mean head
// only (the stddev head receives a zero cotangent).
Vec dpg_gradient(const HeadVjp& head, const Vec& q_grad_at_mean);

// Reparameterized stochastic value gradient at a = mean + stddev * eta:
// mean cotangent q_grad, stddev cotangent eta * q_grad.
HeadCotangents svg0_head_cotangents(const Vec& eta, const Vec& q_grad);
Vec svg0_gradient(const HeadVjp& head, const Vec& eta, const Vec& q_grad);

// Reparameterized gradient for the exponential family at a = scales * eta,
// eta ~ Exp(1): d_scales = q_grad * a / scales.
ExponentialGrads svg0_gradient(const ExponentialParams& p, const Vec& action,
                               const Vec& q_grad);

}  // namespace wpolab
