#pragma once

#include <string>
#include <vector>

#include "wpolab/diff_net.hpp"
#include "wpolab/vec.hpp"

namespace wpolab {

enum class Combiner { mean, max, softmax };

Combiner combiner_from_string(const std::string& s);
std::string to_string(Combiner c);

// Action-value network over the concatenated [state, action] input.
struct CriticNet {
  DiffNet net;

  double q_value(const Vec& state, const Vec& action) const;

  struct QGrad {
    double q;
    Vec d_action;
  };
  // Q and dQ/da in one forward/backward pair.
  QGrad grad_action_q(const Vec& state, const Vec& action) const;
};

// Online/target pair with hard target updates every update_period steps.
struct CriticPair {
  CriticNet online;
  CriticNet target;
  int update_period = 100;
  int updates_since_sync = 0;

  // call after each learner step; copies online into target when due
  void tick();
  void sync_target();
};

// Combines sampled target values: mean, max, or the exp(q/tau) weighted
// average (tau > 0). For any tau, mean <= softmax <= max.
double combine_bootstrap(const Vec& q_samples, Combiner c, double tau);

// G = sum_{t<k} gamma^t r_t + (episode_ended ? 0 : gamma^k * bootstrap),
// k = rewards.size(). Errors on an empty reward list.
double td_n_target(const Vec& rewards, double gamma, double bootstrap,
                   bool episode_ended);

// Gradient of the mean halved squared error 1/B sum 1/2 (Q(s,a) - G)^2
// over a batch, plus the loss value. The caller applies the optimizer.
struct CriticUpdate {
  Vec grad;
  double loss;
};
CriticUpdate critic_loss_gradient(const CriticNet& critic,
                                  const std::vector<Vec>& states,
                                  const std::vector<Vec>& actions,
                                  const Vec& targets);

}  // namespace wpolab
