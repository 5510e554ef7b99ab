#include "wpolab/agent.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "wpolab/baselines.hpp"

namespace wpolab {

Algorithm algorithm_from_string(const std::string& s) {
  if (s == "wpo") return Algorithm::wpo;
  if (s == "classic_pg") return Algorithm::classic_pg;
  if (s == "dpg") return Algorithm::dpg;
  if (s == "svg0") return Algorithm::svg0;
  throw std::invalid_argument("unknown algorithm: " + s);
}

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::wpo: return "wpo";
    case Algorithm::classic_pg: return "classic_pg";
    case Algorithm::dpg: return "dpg";
    case Algorithm::svg0: return "svg0";
  }
  throw std::logic_error("bad algorithm enum");
}

OptimizerKind optimizer_from_string(const std::string& s) {
  if (s == "adam") return OptimizerKind::adam;
  if (s == "sgd") return OptimizerKind::sgd;
  throw std::invalid_argument("unknown optimizer: " + s);
}

std::string to_string(OptimizerKind o) {
  return o == OptimizerKind::adam ? "adam" : "sgd";
}

GaussianActor GaussianActor::make(int state_dim, int action_dim,
                                  const std::vector<int>& hidden, Activation act,
                                  Rng& rng, double sigma_init, double mean_bias) {
  if (action_dim < 1) throw std::invalid_argument("GaussianActor: bad action_dim");
  std::vector<int> sizes;
  sizes.push_back(state_dim);
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(2 * action_dim);
  GaussianActor actor{DiffNet::make(sizes, act, rng), action_dim};
  // final-layer biases pin the initial head outputs
  const std::size_t total = actor.net.params.size();
  const std::size_t bias0 = total - 2 * static_cast<std::size_t>(action_dim);
  const double raw = raw_from_stddev(sigma_init);
  for (int i = 0; i < action_dim; ++i) {
    actor.net.params[bias0 + i] = mean_bias;
    actor.net.params[bias0 + action_dim + i] = raw;
  }
  return actor;
}

DiagGaussianParams GaussianActor::params(const Vec& state) const {
  const Vec out = net.forward(state);
  DiagGaussianParams p{Vec(action_dim), Vec(action_dim)};
  for (int i = 0; i < action_dim; ++i) {
    p.mean[i] = out[i];
    p.stddev[i] = stddev_from_raw(out[action_dim + i]);
  }
  return p;
}

ActorEval actor_eval(const GaussianActor& actor, const Vec& state) {
  ActorEval ev;
  ev.tape = net_forward(actor.net, state);
  ev.params.mean.assign(ev.tape.output.begin(),
                        ev.tape.output.begin() + actor.action_dim);
  ev.params.stddev.resize(actor.action_dim);
  for (int i = 0; i < actor.action_dim; ++i)
    ev.params.stddev[i] = stddev_from_raw(ev.tape.output[actor.action_dim + i]);
  return ev;
}

void actor_backward(const GaussianActor& actor, const ActorEval& eval,
                    const Vec& d_mean, const Vec& d_stddev, Vec& d_params) {
  const int n = actor.action_dim;
  if (static_cast<int>(d_mean.size()) != n || static_cast<int>(d_stddev.size()) != n)
    throw std::invalid_argument("actor_backward: cotangent dim mismatch");
  Vec v(2 * static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    v[i] = d_mean[i];
    v[n + i] =
        d_stddev[i] * stddev_from_raw_derivative(eval.tape.output[n + i]);
  }
  net_backward_accumulate(actor.net, eval.tape, v, d_params);
}

namespace {

struct Optimizer {
  OptimizerKind kind;
  Adam adam;
  Sgd sgd;

  explicit Optimizer(OptimizerKind k, double lr) : kind(k) {
    adam.lr = lr;
    sgd.lr = lr;
  }
  void step(Vec& params, const Vec& grad) {
    if (kind == OptimizerKind::adam)
      adam.step(params, grad);
    else
      sgd.step(params, grad);
  }
};

Vec clip_action(const Vec& a, const EnvSpec& spec, bool& clipped) {
  Vec out = a;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i] < spec.action_lo[i]) {
      out[i] = spec.action_lo[i];
      clipped = true;
    } else if (out[i] > spec.action_hi[i]) {
      out[i] = spec.action_hi[i];
      clipped = true;
    }
  }
  return out;
}

}  // namespace

Vec evaluate_policy(Env& env, const GaussianActor& actor, int episodes,
                    bool deterministic, Rng& rng) {
  Vec returns;
  for (int e = 0; e < episodes; ++e) {
    Vec state = env.reset(rng);
    double ret = 0.0;
    while (true) {
      const DiagGaussianParams p = actor.params(state);
      const Vec action = deterministic ? p.mean : sample(p, rng);
      const StepResult r = env.step(action);
      ret += r.reward;
      if (r.terminal || r.truncated) break;
      state = r.state;
    }
    returns.push_back(ret);
  }
  return returns;
}

TrainResult run_training(const AgentConfig& cfg, const UpdateHook& on_update) {
  auto env = make_env(cfg.env);
  auto eval_env = make_env(cfg.env);
  const EnvSpec spec = env->spec();

  const BanditEnv* bandit = dynamic_cast<const BanditEnv*>(env.get());
  if (cfg.use_exact_critic && !bandit)
    throw std::invalid_argument("use_exact_critic requires a bandit env");

  Rng rng(cfg.seed);
  Rng eval_rng(cfg.seed ^ 0x517cc1b727220a95ULL);

  GaussianActor actor = GaussianActor::make(spec.state_dim, spec.action_dim,
                                            cfg.actor_hidden, cfg.activation, rng,
                                            cfg.sigma_init, cfg.init_mean_bias);
  GaussianActor target_actor = actor;

  std::vector<int> critic_sizes;
  critic_sizes.push_back(spec.state_dim + spec.action_dim);
  critic_sizes.insert(critic_sizes.end(), cfg.critic_hidden.begin(),
                      cfg.critic_hidden.end());
  critic_sizes.push_back(1);
  CriticPair critic{CriticNet{DiffNet::make(critic_sizes, cfg.activation, rng)},
                    CriticNet{}, cfg.target_period};
  critic.target = critic.online;

  Optimizer actor_opt(cfg.optimizer, cfg.actor_lr);
  Optimizer critic_opt(cfg.optimizer, cfg.critic_lr);

  SegmentAssembler assembler(cfg.n_step);
  ReplayBuffer buffer(cfg.replay_capacity);
  KlState kl_state = initial_kl_state(cfg.kl);

  TrainResult result;
  long episodes = 0;
  long updates = 0;
  int sync_counter = 0;

  // window accumulators between metric rows
  double w_loss = 0, w_klm = 0, w_kls = 0, w_qgn = 0, w_agn = 0, w_sig = 0;
  long w_count = 0;

  const int n_act = spec.action_dim;
  const double inv_samples = 1.0 / static_cast<double>(cfg.action_samples);

  auto do_update = [&]() {
    // ---- critic step on a fresh batch of segments
    std::vector<Vec> states(cfg.batch_size), actions(cfg.batch_size);
    Vec targets(cfg.batch_size);
    for (int b = 0; b < cfg.batch_size; ++b) {
      const TrajectorySegment& seg = buffer.sample(rng);
      const std::size_t m = seg.steps.size();
      const std::size_t k = std::min<std::size_t>(m, cfg.n_step);
      Vec rewards(k);
      for (std::size_t t = 0; t < k; ++t) rewards[t] = seg.steps[t].reward;

      bool ended = false;
      const Vec* boot_state = nullptr;
      if (k < m) {
        boot_state = &seg.steps[k].state;
      } else if (seg.steps.back().terminal) {
        ended = true;
      } else {
        boot_state = &seg.steps.back().next_state;
      }

      double boot = 0.0;
      if (!ended) {
        const DiagGaussianParams tp = target_actor.params(*boot_state);
        Vec qs(cfg.bootstrap_samples);
        for (int i = 0; i < cfg.bootstrap_samples; ++i)
          qs[i] = critic.target.q_value(*boot_state, sample(tp, rng));
        boot = combine_bootstrap(qs, cfg.combiner, cfg.softmax_tau);
      }
      targets[b] = td_n_target(rewards, cfg.gamma, boot, ended);
      states[b] = seg.steps[0].state;
      actions[b] = seg.steps[0].action;
    }

    double loss = 0.0;
    if (!cfg.use_exact_critic) {
      CriticUpdate cu = critic_loss_gradient(critic.online, states, actions, targets);
      loss = cu.loss;
      critic_opt.step(critic.online.net.params, cu.grad);
    }

    // ---- actor step on the same batch of states
    std::vector<ActorEval> evals(states.size());
    double klm_sum = 0.0, kls_sum = 0.0, sig_sum = 0.0;
    std::vector<DiagGaussianParams> anchors(states.size());
    for (std::size_t b = 0; b < states.size(); ++b) {
      evals[b] = actor_eval(actor, states[b]);
      anchors[b] = target_actor.params(states[b]);
      klm_sum += kl_mean_only(anchors[b], evals[b].params);
      kls_sum += kl_stddev_only(anchors[b], evals[b].params);
      sig_sum += mean_of(evals[b].params.stddev);
    }
    const double inv_b = 1.0 / static_cast<double>(states.size());
    const double kl_mean = klm_sum * inv_b;
    const double kl_stddev = kls_sum * inv_b;
    const double sigma_mean = sig_sum * inv_b;

    const bool actor_active = updates >= cfg.actor_delay_updates;
    const KlState kl_before = kl_state;
    if (actor_active)
      kl_state = update_kl_state(cfg.kl, kl_state, kl_mean, kl_stddev);

    Vec actor_grad(actor.net.params.size(), 0.0);
    double qgn_sum = 0.0;
    long qgn_count = 0;
    for (std::size_t b = 0; actor_active && b < states.size(); ++b) {
      const DiagGaussianParams& p = evals[b].params;
      Vec cot_mean(n_act, 0.0), cot_std(n_act, 0.0);

      auto q_grad_at = [&](const Vec& a) {
        if (cfg.use_exact_critic)
          return CriticNet::QGrad{bandit->q(a[0]), Vec{bandit->dq(a[0])}};
        return critic.online.grad_action_q(states[b], a);
      };

      if (cfg.algorithm == Algorithm::dpg) {
        const CriticNet::QGrad qg = q_grad_at(p.mean);
        qgn_sum += norm2(qg.d_action);
        ++qgn_count;
        axpy(1.0, qg.d_action, cot_mean);
      } else if (cfg.algorithm == Algorithm::classic_pg) {
        std::vector<HeadCotangents> cots(cfg.action_samples);
        Vec qs(cfg.action_samples);
        for (int i = 0; i < cfg.action_samples; ++i) {
          const Vec a = sample(p, rng);
          const CriticNet::QGrad qg = q_grad_at(a);
          qs[i] = qg.q;
          qgn_sum += norm2(qg.d_action);
          ++qgn_count;
          cots[i] = classic_pg_head_cotangents(p, a, 1.0, 0.0, cfg.fisher_rescale);
        }
        const double baseline = mean_of(qs);
        for (int i = 0; i < cfg.action_samples; ++i) {
          axpy((qs[i] - baseline) * inv_samples, cots[i].d_mean, cot_mean);
          axpy((qs[i] - baseline) * inv_samples, cots[i].d_stddev, cot_std);
        }
      } else {
        for (int i = 0; i < cfg.action_samples; ++i) {
          const Vec eta = rng.normal_vec(n_act);
          Vec a(n_act);
          for (int d = 0; d < n_act; ++d) a[d] = p.mean[d] + p.stddev[d] * eta[d];
          const CriticNet::QGrad qg = q_grad_at(a);
          qgn_sum += cfg.algorithm == Algorithm::wpo
                         ? norm2(squash(qg.d_action, cfg.squash, cfg.squash_scale))
                         : norm2(qg.d_action);
          ++qgn_count;
          const HeadCotangents cot =
              cfg.algorithm == Algorithm::wpo
                  ? wpo_head_cotangents(p, a, qg.d_action, cfg.squash,
                                        cfg.squash_scale, cfg.fisher_rescale)
                  : svg0_head_cotangents(eta, qg.d_action);
          axpy(inv_samples, cot.d_mean, cot_mean);
          axpy(inv_samples, cot.d_stddev, cot_std);
        }
      }

      if (cfg.kl.mode != KlMode::none) {
        const DiagGaussianGrads gm = kl_mean_only_grad_q(anchors[b], p);
        const DiagGaussianGrads gs = kl_stddev_only_grad_q(anchors[b], p);
        axpy(-kl_state.alpha_mean, gm.d_mean, cot_mean);
        axpy(-kl_state.alpha_mean, gm.d_stddev, cot_std);
        axpy(-kl_state.alpha_stddev, gs.d_stddev, cot_std);
      }

      scale(cot_mean, inv_b);
      scale(cot_std, inv_b);
      actor_backward(actor, evals[b], cot_mean, cot_std, actor_grad);
    }

    if (actor_active) {
      Vec descent = actor_grad;
      scale(descent, -1.0);
      actor_opt.step(actor.net.params, descent);
    }

    ++updates;
    ++sync_counter;
    if (sync_counter >= cfg.target_period) {
      critic.sync_target();
      target_actor = actor;
      sync_counter = 0;
    }

    const double qgn = qgn_count ? qgn_sum / static_cast<double>(qgn_count) : 0.0;
    const double agn = norm2(actor_grad);
    w_loss += loss;
    w_klm += kl_mean;
    w_kls += kl_stddev;
    w_qgn += qgn;
    w_agn += agn;
    w_sig += sigma_mean;
    ++w_count;

    if (on_update) {
      UpdateReport rep;
      rep.update_index = updates;
      rep.critic_loss = loss;
      rep.kl_mean = kl_mean;
      rep.kl_stddev = kl_stddev;
      rep.alpha_mean_before = kl_before.alpha_mean;
      rep.alpha_stddev_before = kl_before.alpha_stddev;
      rep.alpha_mean = kl_state.alpha_mean;
      rep.alpha_stddev = kl_state.alpha_stddev;
      rep.q_grad_norm = qgn;
      rep.actor_grad_norm = agn;
      rep.sigma_mean = sigma_mean;
      on_update(rep);
    }
  };

  Vec state = env->reset(rng);
  for (long step = 1; step <= cfg.total_env_steps; ++step) {
    DiagGaussianParams p = actor.params(state);
    if (cfg.algorithm == Algorithm::dpg)
      p.stddev.assign(p.stddev.size(), cfg.fixed_sigma);
    else if (cfg.exploration_sigma_floor > 0.0)
      for (double& s : p.stddev) s = std::max(s, cfg.exploration_sigma_floor);
    bool clipped = false;
    const Vec action = clip_action(sample(p, rng), spec, clipped);
    const StepResult r = env->step(action);

    Transition tr;
    tr.state = state;
    tr.action = action;
    tr.reward = r.reward;
    tr.next_state = r.state;
    tr.terminal = r.terminal;
    tr.truncated = r.truncated;
    tr.action_clipped = clipped || r.action_clipped;
    for (auto& seg : assembler.push(tr)) buffer.push(std::move(seg));

    if (r.terminal || r.truncated) {
      ++episodes;
      state = env->reset(rng);
    } else {
      state = r.state;
    }

    if (step >= cfg.warmup_steps &&
        buffer.size() >= static_cast<std::size_t>(cfg.batch_size) &&
        step % cfg.update_every == 0)
      for (int u = 0; u < cfg.updates_per_step; ++u) do_update();

    if (step % cfg.eval_interval == 0) {
      const Vec rets = evaluate_policy(*eval_env, actor, cfg.eval_episodes,
                                       /*deterministic=*/true, eval_rng);
      MetricsRow row;
      row.step = step;
      row.episode = episodes;
      row.eval_return_mean = mean_of(rets);
      row.eval_return_min = *std::min_element(rets.begin(), rets.end());
      row.eval_return_max = *std::max_element(rets.begin(), rets.end());
      if (w_count > 0) {
        const double inv = 1.0 / static_cast<double>(w_count);
        row.critic_loss = w_loss * inv;
        row.kl_mean = w_klm * inv;
        row.kl_std = w_kls * inv;
        row.q_grad_norm = w_qgn * inv;
        row.actor_grad_norm = w_agn * inv;
        row.policy_sigma_mean = w_sig * inv;
      } else {
        row.policy_sigma_mean = mean_of(actor.params(state).stddev);
      }
      row.alpha_mean = kl_state.alpha_mean;
      row.alpha_std = kl_state.alpha_stddev;
      result.metrics.push_back(row);
      w_loss = w_klm = w_kls = w_qgn = w_agn = w_sig = 0.0;
      w_count = 0;
    }
  }

  result.actor = std::move(actor);
  result.target_actor = std::move(target_actor);
  result.critic = std::move(critic);
  result.kl_state = kl_state;
  result.env_steps = cfg.total_env_steps;
  result.updates = updates;
  result.episodes = episodes;
  return result;
}

std::vector<MogRow> run_mog_experiment(const MogConfig& cfg) {
  if (cfg.algorithm != Algorithm::wpo && cfg.algorithm != Algorithm::classic_pg)
    throw std::invalid_argument("run_mog_experiment: wpo or classic_pg only");
  const BanditEnv task(BanditQ::paper_quartic);
  Rng rng(cfg.seed);

  MixtureParams p;
  p.logits = {0.0, 0.0};
  p.means = {Vec{-cfg.mu_init}, Vec{cfg.mu_init}};
  p.stddevs = {Vec{cfg.sigma_init}, Vec{cfg.sigma_init}};
  validate(p);

  std::vector<MogRow> rows;
  auto log_row = [&](long step) {
    MogRow row;
    row.step = step;
    row.means = {p.means[0][0], p.means[1][0]};
    row.stddevs = {p.stddevs[0][0], p.stddevs[1][0]};
    row.weights = p.weights();
    if (!all_finite(row.means) || !all_finite(row.stddevs) ||
        !all_finite(row.weights))
      throw std::runtime_error("run_mog_experiment: non-finite parameters");
    rows.push_back(std::move(row));
  };

  log_row(0);
  const double inv_batch = 1.0 / static_cast<double>(cfg.batch);
  for (long step = 1; step <= cfg.steps; ++step) {
    MixtureGrads acc{Vec(2, 0.0), {Vec{0.0}, Vec{0.0}}, {Vec{0.0}, Vec{0.0}}};
    if (cfg.algorithm == Algorithm::wpo) {
      for (int i = 0; i < cfg.batch; ++i) {
        const Vec a = sample(p, rng);
        const MixtureGrads g = wpo_sample_gradient(
            p, a, Vec{task.dq(a[0])}, SquashKind::identity, 1.0, /*rescale=*/true);
        axpy(inv_batch, g.d_logits, acc.d_logits);
        for (int k = 0; k < 2; ++k) {
          axpy(inv_batch, g.d_means[k], acc.d_means[k]);
          axpy(inv_batch, g.d_stddevs[k], acc.d_stddevs[k]);
        }
      }
    } else {
      std::vector<Vec> actions(cfg.batch);
      Vec qs(cfg.batch);
      for (int i = 0; i < cfg.batch; ++i) {
        actions[i] = sample(p, rng);
        qs[i] = task.q(actions[i][0]);
      }
      const double baseline = mean_of(qs);
      for (int i = 0; i < cfg.batch; ++i) {
        const MixtureGrads g =
            classic_pg_gradient(p, actions[i], qs[i], baseline, /*rescale=*/false);
        axpy(inv_batch, g.d_logits, acc.d_logits);
        for (int k = 0; k < 2; ++k) {
          axpy(inv_batch, g.d_means[k], acc.d_means[k]);
          axpy(inv_batch, g.d_stddevs[k], acc.d_stddevs[k]);
        }
      }
    }

    axpy(cfg.lr, acc.d_logits, p.logits);
    for (int k = 0; k < 2; ++k) {
      axpy(cfg.lr, acc.d_means[k], p.means[k]);
      axpy(cfg.lr, acc.d_stddevs[k], p.stddevs[k]);
      p.stddevs[k][0] = std::max(p.stddevs[k][0], kSigmaMin);
    }

    if (step % cfg.log_every == 0 || step == cfg.steps) log_row(step);
  }
  return rows;
}

}  // namespace wpolab
