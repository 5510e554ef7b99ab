#include "wpolab/baselines.hpp"

#include <stdexcept>

namespace wpolab {

HeadCotangents classic_pg_head_cotangents(const DiagGaussianParams& p,
                                          const Vec& action, double q_value,
                                          double baseline, bool rescale) {
  const double adv = q_value - baseline;
  DiagGaussianGrads score = grad_params_log_prob(p, action);
  if (rescale) fisher_rescale(p, score);
  HeadCotangents cot{std::move(score.d_mean), std::move(score.d_stddev)};
  scale(cot.d_mean, adv);
  scale(cot.d_stddev, adv);
  return cot;
}

Vec classic_pg_gradient(const DiagGaussianParams& p, const HeadVjp& head,
                        const Vec& action, double q_value, double baseline,
                        bool rescale) {
  const HeadCotangents cot =
      classic_pg_head_cotangents(p, action, q_value, baseline, rescale);
  return head(cot.d_mean, cot.d_stddev);
}

MixtureGrads classic_pg_gradient(const MixtureParams& p, const Vec& action,
                                 double q_value, double baseline, bool rescale) {
  const double adv = q_value - baseline;
  MixtureGrads g = grad_params_log_prob(p, action);
  if (rescale) fisher_rescale(p, g);
  scale(g.d_logits, adv);
  for (auto& v : g.d_means) scale(v, adv);
  for (auto& v : g.d_stddevs) scale(v, adv);
  return g;
}

Vec dpg_gradient(const HeadVjp& head, const Vec& q_grad_at_mean) {
  return head(q_grad_at_mean, Vec(q_grad_at_mean.size(), 0.0));
}

HeadCotangents svg0_head_cotangents(const Vec& eta, const Vec& q_grad) {
  check_same_size(eta, q_grad, "svg0_head_cotangents");
  HeadCotangents cot{q_grad, Vec(q_grad.size())};
  for (std::size_t i = 0; i < q_grad.size(); ++i)
    cot.d_stddev[i] = eta[i] * q_grad[i];
  return cot;
}

Vec svg0_gradient(const HeadVjp& head, const Vec& eta, const Vec& q_grad) {
  const HeadCotangents cot = svg0_head_cotangents(eta, q_grad);
  return head(cot.d_mean, cot.d_stddev);
}

ExponentialGrads svg0_gradient(const ExponentialParams& p, const Vec& action,
                               const Vec& q_grad) {
  check_same_size(p.scales, action, "svg0_gradient exponential");
  check_same_size(action, q_grad, "svg0_gradient exponential q_grad");
  ExponentialGrads g{Vec(action.size())};
  for (std::size_t i = 0; i < action.size(); ++i)
    g.d_scales[i] = q_grad[i] * action[i] / p.scales[i];
  return g;
}

}  // namespace wpolab
