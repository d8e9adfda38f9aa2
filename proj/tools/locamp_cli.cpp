// Command-line front end: sample, se, phase-diagram, oracle-check, bench.
//
// Every parameter can come from --config <json> or from a flag; flags win.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "locamp/amp.hpp"
#include "locamp/error.hpp"
#include "locamp/harness.hpp"
#include "locamp/instance.hpp"
#include "locamp/oracle.hpp"
#include "locamp/sampler.hpp"
#include "locamp/state_evolution.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace locamp;

namespace {

// Flags that were given on the command line, applied over the config file.
struct Overrides {
  std::vector<std::function<void(json&)>> apply;

  template <class T>
  CLI::Option* add(CLI::App* app, const std::string& flag, const std::string& key, T& var,
                   const std::string& help) {
    CLI::Option* opt = app->add_option(flag, var, help);
    apply.push_back([opt, key, &var](json& p) {
      if (opt->count() > 0) p[key] = var;
    });
    return opt;
  }
  CLI::Option* add_flag(CLI::App* app, const std::string& flag, const std::string& key, bool& var,
                        const std::string& help) {
    CLI::Option* opt = app->add_flag(flag, var, help);
    apply.push_back([opt, key, &var](json& p) {
      if (opt->count() > 0) p[key] = var;
    });
    return opt;
  }
};

json parse_prior(const json& spec) {
  if (!spec.is_string()) return spec;
  const std::string s = spec.get<std::string>();
  if (s == "rademacher") return {{"kind", "rademacher"}};
  if (s == "gaussian") return {{"kind", "gaussian"}, {"mean", 0.0}, {"var", 1.0}};
  if (s == "uniform") return {{"kind", "bounded_density"}, {"bound", 1.0}, {"shape", "uniform"}};
  return json::parse(s);
}

// "a:b:step" (inclusive) or "x,y,z".
std::vector<double> parse_grid(const json& spec) {
  if (spec.is_array()) return spec.get<std::vector<double>>();
  if (spec.is_number()) return {spec.get<double>()};
  const std::string s = spec.get<std::string>();
  std::vector<double> out;
  if (s.find(':') != std::string::npos) {
    double a, b, h;
    char c1, c2;
    std::istringstream is(s);
    if (!(is >> a >> c1 >> b >> c2 >> h) || h <= 0.0 || b < a) {
      throw InvalidArgument("bad grid '" + s + "', expected start:stop:step");
    }
    const long long n = std::llround(std::floor((b - a) / h + 1e-9));
    for (long long i = 0; i <= n; ++i) out.push_back(a + h * static_cast<double>(i));
    return out;
  }
  std::istringstream is(s);
  for (std::string item; std::getline(is, item, ',');) out.push_back(std::stod(item));
  if (out.empty()) throw InvalidArgument("empty grid");
  return out;
}

std::vector<Eigen::Index> parse_index_list(const json& spec) {
  std::vector<Eigen::Index> out;
  for (double v : parse_grid(spec)) out.push_back(static_cast<Eigen::Index>(v));
  return out;
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw InvalidArgument("cannot write " + path.string());
  os << text;
}

SamplerConfig sampler_from(const json& p) {
  SamplerConfig c;
  c.T = p.value("T", c.T);
  c.step = p.value("step", c.step);
  c.K = p.value("K", c.K);
  c.seed = p.value("seed", c.seed);
  c.warm_start = p.value("warm_start", c.warm_start);
  c.amp.empirical_tau = p.value("empirical_tau", c.amp.empirical_tau);
  c.amp.early_stop_tol = p.value("early_stop_tol", c.amp.early_stop_tol);
  return c;
}

int cmd_sample(const json& p, const fs::path& out) {
  const Prior prior = Prior::from_json(parse_prior(p.value("prior", json("rademacher"))));
  const Eigen::Index N = p.value("N", Eigen::Index{1250});
  const double alpha = p.value("alpha", 0.8);
  const double delta = p.value("delta", 0.01);
  SamplerConfig cfg = sampler_from(p);
  const std::string trajectory = p.value("trajectory", std::string());
  cfg.store_trajectory = !trajectory.empty();

  const Rng root(cfg.seed);
  Rng signal = root.split(Stream::prior), noise = root.split(Stream::instance),
      brownian = root.split(Stream::brownian);
  const ModelInstance inst = generate_instance(prior, N, alpha, delta, signal, noise);
  const ScalarDenoiser den(prior);
  const SampleRun run = localize_sample(inst, den, cfg, brownian);

  fs::create_directories(out);
  {
    std::ofstream os(out / "sample.csv");
    os << "i,theta_true,theta_alg\n" << std::setprecision(12);
    for (Eigen::Index i = 0; i < N; ++i) {
      os << i << ',' << inst.theta_true[i] << ',' << run.theta_alg[i] << '\n';
    }
  }
  if (cfg.store_trajectory) {
    std::vector<Eigen::Index> coords = {0, 1};
    if (p.contains("coords")) {
      coords.clear();
      for (Eigen::Index c : parse_index_list(p["coords"])) coords.push_back(c - 1);
    }
    fs::path path = trajectory;
    if (path.is_relative()) path = out / path;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream os(path);
    write_trajectory_csv(os, run, coords);
  }
  const json summary = {{"version", version()},
                        {"prior", prior.to_json()},
                        {"N", N},
                        {"M", inst.M},
                        {"alpha", inst.alpha},
                        {"delta", delta},
                        {"T", cfg.T},
                        {"step", run.step},
                        {"steps", run.steps},
                        {"K", cfg.K},
                        {"seed", cfg.seed},
                        {"algorithm_mse", algorithm_mse(inst.theta_true, run.theta_alg)},
                        {"seconds", run.seconds}};
  write_file(out / "sample.json", summary.dump(2) + "\n");
  std::cout << summary.dump(2) << '\n';
  return 0;
}

int cmd_se(const json& p, const fs::path& out) {
  const Prior prior = Prior::from_json(parse_prior(p.value("prior", json("rademacher"))));
  const ScalarDenoiser den(prior);
  const double alpha = p.value("alpha", 0.8);
  const double delta = p.value("delta", 0.01);
  const double t = p.value("t", 0.0);
  const int K = p.value("se_iterations", 200);
  const int grid = p.value("grid_size", 2000);

  std::optional<double> E0;
  if (p.contains("E0")) E0 = p["E0"].get<double>();
  const SeTrace tr = se_iterate(den, alpha, delta, t, K, E0);
  const FixedPointReport fp = find_fixed_points(den, alpha, delta, t, grid);
  fs::create_directories(out);
  {
    std::ofstream os(out / "se_trace.csv");
    write_se_trace_csv(os, tr);
  }
  json report = {{"version", version()},
                 {"prior", prior.to_json()},
                 {"alpha", alpha},
                 {"delta", delta},
                 {"t", t},
                 {"E_inf", tr.E_inf},
                 {"converged", tr.converged},
                 {"iterations", tr.E_seq.size() - 1},
                 {"fixed_points", fp.fixed_points},
                 {"unique", fp.unique},
                 {"max_residual", fp.max_residual}};
  if (p.value("delta_amp", false)) {
    const DeltaAmpEstimate est =
        delta_amp(den, alpha, p.value("delta_max", 1.0), p.value("resolution", 1e-4),
                  p.value("scan_points", 200), grid);
    report["delta_amp"] = {{"lower", est.lower},
                           {"upper", est.bounded ? json(est.upper) : json("inf")},
                           {"bounded", est.bounded}};
  }
  write_file(out / "se.json", report.dump(2) + "\n");
  std::cout << report.dump(2) << '\n';
  return 0;
}

int cmd_phase(const json& p, const fs::path& out) {
  const Prior prior = Prior::from_json(parse_prior(p.value("prior", json("rademacher"))));
  const ScalarDenoiser den(prior);
  const auto alphas = parse_grid(p.value("alpha_grid", json("0.4:0.1:1.0")));
  const auto deltas = parse_grid(p.value("delta_grid", json("0:0.01:0.1")));
  const auto ts = parse_grid(p.value("t_grid", json("0")));
  const auto cells = phase_diagram(den, alphas, deltas, ts, p.value("grid_size", 2000),
                                   p.value("threads", 1u));
  fs::create_directories(out);
  std::ofstream os(out / "phase_diagram.csv");
  write_phase_diagram_csv(os, cells);
  std::size_t non_unique = 0;
  for (const PhaseCell& c : cells) non_unique += !c.unique;
  std::cout << cells.size() << " cells, " << non_unique << " with multiple fixed points -> "
            << (out / "phase_diagram.csv").string() << '\n';
  return 0;
}

int cmd_oracle_check(const json& p, const fs::path& out) {
  const Prior prior = Prior::from_json(parse_prior(p.value("prior", json("rademacher"))));
  const ScalarDenoiser den(prior);
  const Eigen::Index N = p.value("N", Eigen::Index{10});
  const double alpha = p.value("alpha", 0.8);
  const double delta = p.value("delta", 0.005);
  const double t = p.value("t", 1.0);
  const int K = p.value("K", 200);
  const int instances = p.value("instances", 1000);
  const std::uint64_t seed = p.value("seed", std::uint64_t{0});

  // One instance for the AMP and overlap comparison.
  const Rng root(seed);
  auto draw = [&](std::uint64_t k, ModelInstance* inst_out, Eigen::VectorXd* z_out) {
    const Rng r = root.split(k);
    Rng signal = r.split(Stream::prior), noise = r.split(Stream::instance),
        loc = r.split(Stream::brownian);
    *inst_out = generate_instance(prior, N, alpha, delta, signal, noise);
    *z_out = t * inst_out->theta_true + std::sqrt(t) * loc.normal_vector(N);
    if (t == 0.0) z_out->setZero();
  };
  ModelInstance inst{prior};
  Eigen::VectorXd z;
  draw(0, &inst, &z);
  const ExactPosterior post = exact_posterior(inst, z, t);
  const AmpResult amp = amp_run(inst, den, z, t, K);
  const double denom = post.mean.norm();
  const double l2 = denom > 0.0 ? (amp.m_hat - post.mean).norm() / denom
                                : (amp.m_hat - post.mean).norm();
  const OverlapStats ov = overlap_stats(post);

  // Nishimori identity E[theta . m] = E[|m|^2] over fresh instances.
  double acc = 0.0, acc_sq = 0.0;
  for (int k = 1; k <= instances; ++k) {
    ModelInstance fresh{prior};
    Eigen::VectorXd zk;
    draw(static_cast<std::uint64_t>(k), &fresh, &zk);
    const Eigen::VectorXd m = exact_posterior(fresh, zk, t, false).mean;
    const double diff = (fresh.theta_true.dot(m) - m.squaredNorm()) / static_cast<double>(N);
    acc += diff;
    acc_sq += diff * diff;
  }
  const double gap = instances > 0 ? acc / instances : 0.0;
  const double gap_se =
      instances > 1 ? std::sqrt(std::max(0.0, acc_sq / instances - gap * gap) / (instances - 1))
                    : 0.0;

  const json report = {{"version", version()},
                       {"prior", prior.to_json()},
                       {"N", N},
                       {"M", inst.M},
                       {"delta", delta},
                       {"t", t},
                       {"K", K},
                       {"method", to_string(post.method)},
                       {"amp_vs_oracle_l2", l2},
                       {"sandwich_lhs", ov.lower},
                       {"lambda_m", ov.lambda_m},
                       {"sandwich_rhs", ov.upper},
                       {"sandwich_holds", ov.lower_holds && ov.upper_holds},
                       {"nishimori_gap", gap},
                       {"nishimori_gap_stderr", gap_se},
                       {"nishimori_instances", instances}};
  write_file(out / "oracle_check.json", report.dump(2) + "\n");
  std::cout << report.dump(2) << '\n';
  return 0;
}

int cmd_bench(const json& p, const fs::path& out) {
  json cfg_json = p;
  if (cfg_json.contains("prior")) cfg_json["prior"] = parse_prior(cfg_json["prior"]);
  if (cfg_json.contains("N") && cfg_json["N"].is_string()) {
    cfg_json["N"] = parse_index_list(cfg_json["N"]);
  }
  if (cfg_json.contains("baseline")) {
    auto b = cfg_json.value("baselines", std::vector<std::string>{});
    const auto name = cfg_json["baseline"].get<std::string>();
    if (std::find(b.begin(), b.end(), name) == b.end()) b.push_back(name);
    cfg_json["baselines"] = b;
  }
  const ExperimentConfig cfg = experiment_config_from_json(cfg_json);
  const MetricsReport report = run_experiment(cfg);
  write_report(report, out);
  std::cout << summary_json(report).dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Posterior sampling by stochastic localization with an AMP drift"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(version()));

  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  app.add_option("--config", config_path, "JSON file with parameters (flags override it)")
      ->check(CLI::ExistingFile);
  auto* out_opt = app.add_option("--out-dir", out_dir, "Directory for CSV/JSON outputs");
  auto* seed_opt = app.add_option("--seed", seed, "Random seed");

  Overrides ov;
  std::string prior;
  Eigen::Index N = 0;
  double alpha = 0, delta = 0, t = 0, T = 0, step = 0;
  int K = 0;

  auto* sample = app.add_subcommand("sample", "Draw one posterior sample with the localization sampler");
  std::string trajectory, coords;
  bool warm = false, empirical = false;
  ov.add(sample, "--prior", "prior", prior, "rademacher | gaussian | uniform | JSON object");
  ov.add(sample, "-N,--N", "N", N, "Signal dimension");
  ov.add(sample, "--alpha", "alpha", alpha, "Measurement rate M/N");
  ov.add(sample, "--delta", "delta", delta, "Noise variance Delta");
  ov.add(sample, "-T,--T", "T", T, "Localization horizon");
  ov.add(sample, "--step", "step", step, "Euler step");
  ov.add(sample, "-K,--K", "K", K, "AMP iterations per drift evaluation");
  ov.add(sample, "--trajectory", "trajectory", trajectory, "Write z_t/t of selected coordinates to this CSV");
  ov.add(sample, "--coords", "coords", coords, "1-based coordinates for the trajectory (default 1,2)");
  ov.add_flag(sample, "--warm-start", "warm_start", warm, "Warm-start AMP across steps");
  ov.add_flag(sample, "--empirical-tau", "empirical_tau", empirical, "Use |r|^2/M as the AMP variance");

  auto* se = app.add_subcommand("se", "State evolution, fixed points and Delta_AMP");
  int se_iters = 0, grid = 0, scan = 0;
  double E0 = 0, delta_max = 0, resolution = 0;
  bool want_damp = false;
  ov.add(se, "--prior", "prior", prior, "Prior");
  ov.add(se, "--alpha", "alpha", alpha, "Measurement rate");
  ov.add(se, "--delta", "delta", delta, "Noise variance");
  ov.add(se, "--t", "t", t, "Localization time");
  ov.add(se, "--iterations", "se_iterations", se_iters, "Maximum SE iterations");
  ov.add(se, "--E0", "E0", E0, "Initial MSE (default v)");
  ov.add(se, "--grid-size", "grid_size", grid, "Fixed-point scan resolution");
  ov.add_flag(se, "--delta-amp", "delta_amp", want_damp, "Also estimate Delta_AMP at this alpha");
  ov.add(se, "--delta-max", "delta_max", delta_max, "Upper end of the Delta_AMP scan");
  ov.add(se, "--resolution", "resolution", resolution, "Bisection resolution for Delta_AMP");
  ov.add(se, "--scan-points", "scan_points", scan, "Delta grid points for the Delta_AMP scan");

  auto* phase = app.add_subcommand("phase-diagram", "Fixed-point counts over (alpha, delta, t) grids");
  std::string alpha_grid, delta_grid, t_grid;
  unsigned threads = 1;
  ov.add(phase, "--prior", "prior", prior, "Prior");
  ov.add(phase, "--alpha-grid", "alpha_grid", alpha_grid, "start:stop:step or comma list");
  ov.add(phase, "--delta-grid", "delta_grid", delta_grid, "start:stop:step or comma list");
  ov.add(phase, "--t-grid", "t_grid", t_grid, "start:stop:step or comma list");
  ov.add(phase, "--grid-size", "grid_size", grid, "Fixed-point scan resolution");
  ov.add(phase, "--threads", "threads", threads, "Worker threads (0 = all cores)");

  auto* oracle = app.add_subcommand("oracle-check", "Compare AMP with the exact posterior");
  int instances = 0;
  ov.add(oracle, "--prior", "prior", prior, "Prior (discrete or gaussian)");
  ov.add(oracle, "-N,--N", "N", N, "Signal dimension");
  ov.add(oracle, "--alpha", "alpha", alpha, "Measurement rate");
  ov.add(oracle, "--delta", "delta", delta, "Noise variance");
  ov.add(oracle, "--t", "t", t, "Localization time");
  ov.add(oracle, "-K,--K", "K", K, "AMP iterations");
  ov.add(oracle, "--instances", "instances", instances, "Instances for the Nishimori check");

  auto* bench = app.add_subcommand("bench", "Multi-trial experiment with optional baselines");
  std::string baseline, n_list;
  int trials = 0;
  ov.add(bench, "--baseline", "baseline", baseline, "Add a baseline sampler (dps)");
  ov.add(bench, "--prior", "prior", prior, "Prior");
  ov.add(bench, "-N,--N", "N", n_list, "Dimensions, e.g. 192,768");
  ov.add(bench, "--alpha", "alpha", alpha, "Measurement rate");
  ov.add(bench, "--delta", "delta", delta, "Noise variance");
  ov.add(bench, "-T,--T", "T", T, "Localization horizon");
  ov.add(bench, "--step", "step", step, "Euler step");
  ov.add(bench, "-K,--K", "K", K, "AMP iterations");
  ov.add(bench, "--trials", "n_trials", trials, "Trials per N");
  ov.add(bench, "--threads", "threads", threads, "Worker threads (0 = all cores)");

  CLI11_PARSE(app, argc, argv);

  try {
    json p = json::object();
    if (!config_path.empty()) {
      std::ifstream is(config_path);
      p = json::parse(is);
    }
    for (auto& f : ov.apply) f(p);
    if (seed_opt->count() > 0) p["seed"] = seed;
    if (out_opt->count() > 0 || !p.contains("out_dir")) p["out_dir"] = out_dir;
    const fs::path out = p["out_dir"].get<std::string>();
    p.erase("out_dir");

    if (*sample) return cmd_sample(p, out);
    if (*se) return cmd_se(p, out);
    if (*phase) return cmd_phase(p, out);
    if (*oracle) return cmd_oracle_check(p, out);
    if (*bench) return cmd_bench(p, out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
