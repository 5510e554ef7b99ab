#include "wpolab/critic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wpolab {

namespace {

Vec concat(const Vec& a, const Vec& b) {
  Vec out;
  out.reserve(a.size() + b.size());
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

}  // namespace

Combiner combiner_from_string(const std::string& s) {
  if (s == "mean") return Combiner::mean;
  if (s == "max") return Combiner::max;
  if (s == "softmax") return Combiner::softmax;
  throw std::invalid_argument("unknown bootstrap combiner: " + s);
}

std::string to_string(Combiner c) {
  switch (c) {
    case Combiner::mean: return "mean";
    case Combiner::max: return "max";
    case Combiner::softmax: return "softmax";
  }
  throw std::logic_error("bad combiner enum");
}

double CriticNet::q_value(const Vec& state, const Vec& action) const {
  return net.forward(concat(state, action))[0];
}

CriticNet::QGrad CriticNet::grad_action_q(const Vec& state, const Vec& action) const {
  const NetTape tape = net_forward(net, concat(state, action));
  const NetVjp vjp = net_backward(net, tape, Vec{1.0});
  QGrad out;
  out.q = tape.output[0];
  out.d_action.assign(vjp.d_input.begin() + static_cast<long>(state.size()),
                      vjp.d_input.end());
  return out;
}

void CriticPair::tick() {
  ++updates_since_sync;
  if (updates_since_sync >= update_period) {
    sync_target();
    updates_since_sync = 0;
  }
}

void CriticPair::sync_target() { target = online; }

double combine_bootstrap(const Vec& q_samples, Combiner c, double tau) {
  if (q_samples.empty())
    throw std::invalid_argument("combine_bootstrap: no samples");
  switch (c) {
    case Combiner::mean:
      return mean_of(q_samples);
    case Combiner::max:
      return *std::max_element(q_samples.begin(), q_samples.end());
    case Combiner::softmax: {
      if (!(tau > 0.0))
        throw std::invalid_argument("combine_bootstrap: tau must be positive");
      const double m = *std::max_element(q_samples.begin(), q_samples.end());
      double z = 0.0, s = 0.0;
      for (double q : q_samples) {
        const double w = std::exp((q - m) / tau);
        z += w;
        s += w * q;
      }
      return s / z;
    }
  }
  throw std::logic_error("bad combiner enum");
}

double td_n_target(const Vec& rewards, double gamma, double bootstrap,
                   bool episode_ended) {
  if (rewards.empty()) throw std::invalid_argument("td_n_target: empty rewards");
  double g = 0.0;
  double w = 1.0;
  for (double r : rewards) {
    g += w * r;
    w *= gamma;
  }
  if (!episode_ended) g += w * bootstrap;
  return g;
}

CriticUpdate critic_loss_gradient(const CriticNet& critic,
                                  const std::vector<Vec>& states,
                                  const std::vector<Vec>& actions,
                                  const Vec& targets) {
  const std::size_t B = states.size();
  if (B == 0 || actions.size() != B || targets.size() != B)
    throw std::invalid_argument("critic_loss_gradient: batch size mismatch");
  CriticUpdate out;
  out.grad.assign(critic.net.param_count(), 0.0);
  out.loss = 0.0;
  const double inv_b = 1.0 / static_cast<double>(B);
  for (std::size_t i = 0; i < B; ++i) {
    const NetTape tape = net_forward(critic.net, concat(states[i], actions[i]));
    const double err = tape.output[0] - targets[i];
    out.loss += 0.5 * err * err * inv_b;
    net_backward_accumulate(critic.net, tape, Vec{err * inv_b}, out.grad);
  }
  return out;
}

}  // namespace wpolab
