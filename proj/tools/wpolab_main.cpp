#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "wpolab/agent.hpp"
#include "wpolab/config.hpp"
#include "wpolab/envs.hpp"
#include "wpolab/flow.hpp"
#include "wpolab/metrics.hpp"
#include "wpolab/verify.hpp"

namespace fs = std::filesystem;
using namespace wpolab;

namespace {

struct CommonArgs {
  std::string config;
  std::vector<std::string> sets;
  std::string seeds;
  std::string out;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config, "config file, flat key=value lines");
  cmd->add_option("--set", args.sets, "override a config key, KEY=VALUE")
      ->type_name("KEY=VALUE");
  cmd->add_option("--seeds", args.seeds, "comma separated seed list");
  cmd->add_option("--out", args.out, "output directory");
}

ConfigMap build_map(const CommonArgs& args) {
  ConfigMap map = args.config.empty() ? default_config_map()
                                      : parse_config_file(args.config);
  for (const std::string& s : args.sets) apply_override(map, s);
  if (map["out_dir"] == RunConfig{}.out_dir) {
    if (const char* env_out = std::getenv("WPOLAB_OUT");
        env_out && *env_out != '\0')
      map["out_dir"] = env_out;
  }
  if (!args.seeds.empty()) map["seeds"] = args.seeds;
  if (!args.out.empty()) map["out_dir"] = args.out;
  return map;
}

std::string seed_file(const std::string& stem, std::uint64_t seed,
                      const char* ext) {
  return stem + "_seed" + std::to_string(seed) + ext;
}

int cmd_train(const ConfigMap& map) {
  const RunConfig cfg = config_from_map(map);
  fs::create_directories(cfg.out_dir);
  const fs::path out(cfg.out_dir);
  write_manifest((out / "manifest.txt").string(), config_to_map(cfg));

  const std::size_t n = cfg.seeds.size();
  std::vector<TrainResult> results(n);
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> workers;
  workers.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    workers.emplace_back([&, i] {
      try {
        AgentConfig acfg = cfg.agent;
        acfg.seed = cfg.seeds[i];
        results[i] = run_training(acfg);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    });
  }
  for (std::thread& w : workers) w.join();
  for (std::size_t i = 0; i < n; ++i)
    if (errors[i]) std::rethrow_exception(errors[i]);

  std::vector<std::vector<MetricsRow>> runs;
  std::vector<PlotSeries> series;
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t seed = cfg.seeds[i];
    const TrainResult& res = results[i];
    write_metrics_csv((out / seed_file("metrics", seed, ".csv")).string(),
                      res.metrics);
    save_checkpoint(
        (out / seed_file("checkpoint", seed, ".txt")).string(),
        {{"actor", &res.actor.net},
         {"actor_target", &res.target_actor.net},
         {"critic", &res.critic.online.net},
         {"critic_target", &res.critic.target.net}},
        {{"alpha_mean", res.kl_state.alpha_mean},
         {"alpha_std", res.kl_state.alpha_stddev},
         {"env_steps", static_cast<double>(res.env_steps)},
         {"updates", static_cast<double>(res.updates)},
         {"episodes", static_cast<double>(res.episodes)}});
    runs.push_back(res.metrics);
    PlotSeries s;
    s.name = "seed " + std::to_string(seed);
    for (const MetricsRow& row : res.metrics) {
      s.x.push_back(static_cast<double>(row.step));
      s.y.push_back(row.eval_return_mean);
    }
    series.push_back(std::move(s));
  }
  write_aggregate_csv((out / "aggregate.csv").string(), aggregate_runs(runs));
  write_line_plot_svg((out / "returns.svg").string(),
                      cfg.agent.env + " / " + to_string(cfg.agent.algorithm) +
                          ": evaluation return",
                      series);

  for (std::size_t i = 0; i < n; ++i) {
    const auto& rows = results[i].metrics;
    std::cout << "seed " << cfg.seeds[i] << ": " << results[i].env_steps
              << " env steps, " << results[i].updates << " updates";
    if (!rows.empty())
      std::cout << ", final eval return " << format_metric(rows.back().eval_return_mean);
    std::cout << '\n';
  }
  std::cout << "wrote " << (out / "manifest.txt").string() << ", per-seed metrics,"
            << " aggregate.csv, returns.svg\n";
  return 0;
}

int cmd_eval(const ConfigMap& map, std::string ckpt) {
  const RunConfig cfg = config_from_map(map);
  if (ckpt.empty())
    ckpt = (fs::path(cfg.out_dir) / seed_file("checkpoint", cfg.seeds.front(), ".txt"))
               .string();
  GaussianActor actor;
  load_checkpoint(ckpt, {{"actor", &actor.net}});
  actor.action_dim = actor.net.output_dim() / 2;

  auto env = make_env(cfg.agent.env);
  Rng rng(cfg.agent.seed ^ 0x9e3779b97f4a7c15ULL);
  const Vec det = evaluate_policy(*env, actor, cfg.agent.eval_episodes, true, rng);
  const Vec sto = evaluate_policy(*env, actor, cfg.agent.eval_episodes, false, rng);
  auto report = [](const char* label, const Vec& r) {
    double lo = r[0], hi = r[0], sum = 0.0;
    for (double v : r) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      sum += v;
    }
    std::cout << label << ": mean " << format_metric(sum / static_cast<double>(r.size()))
              << " min " << format_metric(lo) << " max " << format_metric(hi)
              << " over " << r.size() << " episodes\n";
  };
  std::cout << "checkpoint " << ckpt << " on " << cfg.agent.env << '\n';
  report("deterministic", det);
  report("stochastic   ", sto);
  return 0;
}

int cmd_flow(const ConfigMap& map) {
  const RunConfig cfg = config_from_map(map);
  const FlowConfig& f = cfg.flow;
  std::function<double(double)> q;
  if (f.q == "neg_quadratic")
    q = [](double a) { return -0.5 * a * a; };
  else if (f.q == "paper_quartic")
    q = [](double a) { return -a * a * a * a / 100.0 + a * a; };
  else
    q = [](double) { return 0.0; };
  const SquashKind kind = squash_from_string(f.squash);

  fs::create_directories(cfg.out_dir);
  const fs::path out(cfg.out_dir);
  write_manifest((out / "manifest.txt").string(), config_to_map(cfg));

  GridDensity grid = discretize_gaussian(f.mean, f.stddev, f.lo, f.hi, f.cells);
  std::ostringstream csv;
  csv << "t,mean,stddev,expected_q\n";
  std::vector<double> ts, means, stds, eqs;
  auto log_row = [&](long step) {
    const double t = static_cast<double>(step) * f.dt;
    const double m = grid_mean(grid), s = grid_stddev(grid),
                 e = expected_functional(grid, q);
    csv << format_metric(t) << ',' << format_metric(m) << ',' << format_metric(s)
        << ',' << format_metric(e) << '\n';
    ts.push_back(t);
    means.push_back(m);
    stds.push_back(s);
    eqs.push_back(e);
  };
  log_row(0);
  for (long step = 1; step <= f.steps; ++step) {
    grid = f.kind == "wasserstein"
               ? wasserstein_flow_step(grid, q, f.dt, kind, f.squash_scale)
               : fisher_rao_flow_step(grid, q, f.dt);
    if (step % f.log_every == 0 || step == f.steps) log_row(step);
  }

  std::ofstream csv_out(out / "flow.csv");
  if (!csv_out) throw std::runtime_error("cannot write flow.csv");
  csv_out << csv.str();
  csv_out.close();
  write_line_plot_svg((out / "flow.svg").string(),
                      f.kind + " flow of " + f.q + " over time",
                      {{"mean", ts, means}, {"stddev", ts, stds},
                       {"E[Q]", ts, eqs}});
  std::cout << "flow " << f.kind << " " << f.q << ": t=" << format_metric(ts.back())
            << " mean=" << format_metric(means.back())
            << " stddev=" << format_metric(stds.back())
            << " E[Q]=" << format_metric(eqs.back()) << '\n';
  std::cout << "wrote " << (out / "flow.csv").string() << " and flow.svg\n";
  return 0;
}

int cmd_mog(const ConfigMap& map) {
  const RunConfig cfg = config_from_map(map);
  const std::vector<MogRow> rows = run_mog_experiment(cfg.mog);

  fs::create_directories(cfg.out_dir);
  const fs::path out(cfg.out_dir);
  write_manifest((out / "manifest.txt").string(), config_to_map(cfg));

  std::ofstream csv(out / "mog.csv");
  if (!csv) throw std::runtime_error("cannot write mog.csv");
  csv << "step,mean_0,mean_1,stddev_0,stddev_1,weight_0,weight_1\n";
  PlotSeries m0{"mean 0", {}, {}}, m1{"mean 1", {}, {}}, s0{"stddev 0", {}, {}},
      s1{"stddev 1", {}, {}};
  for (const MogRow& r : rows) {
    csv << r.step << ',' << format_metric(r.means[0]) << ','
        << format_metric(r.means[1]) << ',' << format_metric(r.stddevs[0]) << ','
        << format_metric(r.stddevs[1]) << ',' << format_metric(r.weights[0])
        << ',' << format_metric(r.weights[1]) << '\n';
    const double t = static_cast<double>(r.step);
    m0.x.push_back(t);
    m0.y.push_back(r.means[0]);
    m1.x.push_back(t);
    m1.y.push_back(r.means[1]);
    s0.x.push_back(t);
    s0.y.push_back(r.stddevs[0]);
    s1.x.push_back(t);
    s1.y.push_back(r.stddevs[1]);
  }
  csv.close();
  if (!csv) throw std::runtime_error("failed writing mog.csv");
  write_line_plot_svg((out / "mog.svg").string(),
                      "mixture components under " + to_string(cfg.mog.algorithm),
                      {m0, m1, s0, s1});
  const MogRow& last = rows.back();
  std::cout << "mog " << to_string(cfg.mog.algorithm) << ": final means ("
            << format_metric(last.means[0]) << ", " << format_metric(last.means[1])
            << ") stddevs (" << format_metric(last.stddevs[0]) << ", "
            << format_metric(last.stddevs[1]) << ") weights ("
            << format_metric(last.weights[0]) << ", "
            << format_metric(last.weights[1]) << ")\n";
  std::cout << "wrote " << (out / "mog.csv").string() << " and mog.svg\n";
  return 0;
}

int cmd_verify(bool corrupt) {
  if (corrupt)
    std::cout << "note: mean rescaling deliberately corrupted by factor 1.05\n";
  const std::vector<CheckResult> results = run_identity_checks(corrupt);
  int failures = 0;
  for (const CheckResult& r : results) {
    std::cout << format_check_line(r) << '\n';
    if (!r.pass) ++failures;
  }
  std::cout << (failures == 0 ? "all identities hold\n"
                              : std::to_string(failures) + " identity check(s) failed\n");
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wpolab: a desk-scale actor-critic laboratory for Wasserstein "
               "policy optimization"};
  app.require_subcommand(0, 1);

  CommonArgs train_args, eval_args, flow_args, mog_args;
  std::string ckpt_path;
  bool corrupt = false;
  bool list_keys = false;
  app.add_flag("--keys", list_keys, "print every config key with default and doc");

  CLI::App* train = app.add_subcommand("train", "train an agent, one run per seed");
  add_common(train, train_args);
  CLI::App* eval = app.add_subcommand("eval", "evaluate a saved checkpoint");
  add_common(eval, eval_args);
  eval->add_option("--checkpoint", ckpt_path, "checkpoint file to load");
  CLI::App* flow = app.add_subcommand("flow", "run the nonparametric grid flow");
  add_common(flow, flow_args);
  CLI::App* mog = app.add_subcommand("mog", "mixture-of-Gaussians bandit experiment");
  add_common(mog, mog_args);
  CLI::App* verify = app.add_subcommand("verify", "run the analytic identity suite");
  verify->add_flag("--corrupt-rescale", corrupt,
                   "perturb the mean rescale to demonstrate check sensitivity")
      ->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (list_keys) {
      for (const ConfigKey& k : config_keys())
        std::printf("%-18s default=%-14s %s\n", k.name.c_str(),
                    k.default_value.c_str(), k.doc.c_str());
      return 0;
    }
    if (train->parsed()) return cmd_train(build_map(train_args));
    if (eval->parsed()) return cmd_eval(build_map(eval_args), ckpt_path);
    if (flow->parsed()) return cmd_flow(build_map(flow_args));
    if (mog->parsed()) return cmd_mog(build_map(mog_args));
    if (verify->parsed()) return cmd_verify(corrupt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  std::cout << app.help();
  return 1;
}
