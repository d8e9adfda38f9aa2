#include "locamp/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <stdexcept>

#include "locamp/error.hpp"
#include "locamp/oracle.hpp"
#include "locamp/parallel.hpp"
#include "locamp/state_evolution.hpp"

#ifndef LOCAMP_VERSION
#define LOCAMP_VERSION "unknown"
#endif

namespace locamp {

const char* version() { return LOCAMP_VERSION; }

double algorithm_mse(const Eigen::VectorXd& theta, const Eigen::VectorXd& theta_alg) {
  require(theta.size() == theta_alg.size(), "algorithm_mse: length mismatch");
  require(theta.size() > 0, "algorithm_mse: empty vectors");
  return (theta - theta_alg).squaredNorm() / (2.0 * static_cast<double>(theta.size()));
}

MmseReference mmse_reference(const ScalarDenoiser& den, double alpha, double delta,
                             int scan_points, int grid_size) {
  const FixedPointReport rep = find_fixed_points(den, alpha, delta, 0.0, grid_size);
  MmseReference ref;
  ref.fixed_points = rep.fixed_points;
  bool unique_below = rep.unique;
  for (int j = 0; unique_below && j < scan_points; ++j) {
    unique_below = find_fixed_points(den, alpha, delta * j / scan_points, 0.0, grid_size).unique;
  }
  ref.is_mmse = rep.unique && unique_below;
  if (rep.unique) {
    ref.value = rep.fixed_points.front();
  } else {
    ref.value = se_iterate(den, alpha, delta, 0.0, 100000).E_inf;
  }
  if (ref.is_mmse) {
    ref.label = "MMSE";
  } else if (rep.unique) {
    ref.label = "AMP-MSE, possibly != MMSE (non-unique fixed point below this delta)";
  } else {
    ref.label = "AMP-MSE, possibly != MMSE (multiple fixed points)";
  }
  return ref;
}

namespace {

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& S) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S);
  const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
}

double logdet_spd(const Eigen::LLT<Eigen::MatrixXd>& llt) {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

}  // namespace

double gaussian_kl(const Eigen::VectorXd& m1, const Eigen::MatrixXd& S1, const Eigen::VectorXd& m2,
                   const Eigen::MatrixXd& S2) {
  const Eigen::LLT<Eigen::MatrixXd> l1(S1), l2(S2);
  if (l1.info() != Eigen::Success || l2.info() != Eigen::Success) {
    throw InvalidArgument("gaussian_kl: covariance is not positive definite");
  }
  const Eigen::VectorXd d = m2 - m1;
  const double trace = l2.solve(S1).trace();
  const double quad = d.dot(l2.solve(d));
  return 0.5 * (trace + quad - static_cast<double>(m1.size()) + logdet_spd(l2) - logdet_spd(l1));
}

double gaussian_w2(const Eigen::VectorXd& m1, const Eigen::MatrixXd& S1, const Eigen::VectorXd& m2,
                   const Eigen::MatrixXd& S2) {
  const Eigen::MatrixXd r1 = psd_sqrt(S1);
  const Eigen::MatrixXd cross = psd_sqrt(r1 * S2 * r1);
  const double w2sq = (m1 - m2).squaredNorm() + S1.trace() + S2.trace() - 2.0 * cross.trace();
  return std::sqrt(std::max(0.0, w2sq));
}

GaussianDiagnostics gaussian_case_diagnostics(const ModelInstance& inst,
                                              const Eigen::MatrixXd& samples, double T) {
  require(inst.prior.is_gaussian(), "gaussian diagnostics need a Gaussian prior");
  require(samples.cols() == inst.N, "gaussian diagnostics: sample length must equal N");
  require(samples.rows() >= 2, "gaussian diagnostics: need at least two samples");
  require(T > 0.0, "gaussian diagnostics: T must be positive");
  const Eigen::Index N = inst.N;
  const auto n = static_cast<double>(samples.rows());

  const ExactPosterior post = exact_posterior_gaussian(inst, Eigen::VectorXd::Zero(N), 0.0);
  Eigen::MatrixXd target = post.covariance;
  target.diagonal().array() += 1.0 / T;

  const Eigen::VectorXd mean = samples.colwise().mean();
  const Eigen::MatrixXd X = samples.rowwise() - mean.transpose();
  Eigen::MatrixXd fit = X.transpose() * X / n;

  GaussianDiagnostics d;
  d.n_samples = static_cast<std::size_t>(samples.rows());
  if (samples.rows() < 10 * N) {
    // Ledoit-Wolf shrinkage towards mu I.
    const double dN = static_cast<double>(N);
    const double mu = fit.trace() / dN;
    Eigen::MatrixXd target_id = fit;
    target_id.diagonal().array() -= mu;
    const double dispersion = target_id.squaredNorm() / dN;
    const double fit_sq = fit.squaredNorm();
    double b = 0.0;
    for (Eigen::Index k = 0; k < X.rows(); ++k) {
      const Eigen::VectorXd x = X.row(k).transpose();
      const double xx = x.squaredNorm();
      b += xx * xx - 2.0 * x.dot(fit * x) + fit_sq;
    }
    b /= n * n * dN;
    d.shrinkage = dispersion > 0.0 ? std::min(b, dispersion) / dispersion : 1.0;
    d.shrinkage_applied = true;
    fit *= 1.0 - d.shrinkage;
    fit.diagonal().array() += d.shrinkage * mu;
  } else {
    fit *= n / (n - 1.0);
  }

  d.kl_per_dim = gaussian_kl(post.mean, target, mean, fit) / static_cast<double>(N);
  d.w2_per_sqrt_dim =
      gaussian_w2(post.mean, target, mean, fit) / std::sqrt(static_cast<double>(N));
  return d;
}

Prior ExperimentConfig::make_prior() const { return Prior::from_json(prior); }

void ExperimentConfig::validate() const {
  require(!N_list.empty(), "config: N list is empty");
  for (Eigen::Index N : N_list) require(N >= 1, "config: N must be positive");
  require(std::isfinite(alpha) && alpha > 0.0, "config: alpha must be positive");
  require(std::isfinite(delta) && delta >= 0.0, "config: delta must be non-negative");
  require(n_trials >= 1, "config: n_trials must be at least 1");
  require(sampler.T > 0.0 && sampler.step > 0.0 && sampler.K >= 1, "config: bad sampler settings");
  for (const std::string& b : baselines) require(b == "dps", "config: unknown baseline " + b);
  if (!baselines.empty()) dps_schedule.validate();
  if (gaussian_diagnostics) {
    require(fixed_instance, "config: gaussian_diagnostics requires fixed_instance");
    require(run_amp, "config: gaussian_diagnostics requires the AMP sampler");
  }
  const Prior p = make_prior();
  if (!baselines.empty() || gaussian_diagnostics) {
    require(p.is_gaussian(), "config: DPS and Gaussian diagnostics need a Gaussian prior");
  }
}

ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  if (j.contains("prior")) c.prior = j.at("prior");
  if (j.contains("N")) {
    const auto& n = j.at("N");
    c.N_list.clear();
    if (n.is_array()) {
      for (const auto& v : n) c.N_list.push_back(v.get<Eigen::Index>());
    } else {
      c.N_list.push_back(n.get<Eigen::Index>());
    }
  }
  c.alpha = j.value("alpha", c.alpha);
  c.delta = j.value("delta", c.delta);
  c.sampler.T = j.value("T", c.sampler.T);
  c.sampler.step = j.value("step", c.sampler.step);
  c.sampler.K = j.value("K", c.sampler.K);
  c.sampler.warm_start = j.value("warm_start", c.sampler.warm_start);
  c.sampler.amp.empirical_tau = j.value("empirical_tau", c.sampler.amp.empirical_tau);
  c.sampler.amp.early_stop_tol = j.value("early_stop_tol", c.sampler.amp.early_stop_tol);
  c.n_trials = j.value("n_trials", c.n_trials);
  c.seed = j.value("seed", c.seed);
  c.run_amp = j.value("run_amp", c.run_amp);
  c.baselines = j.value("baselines", c.baselines);
  if (j.contains("dps")) {
    const auto& d = j.at("dps");
    from_json(d, c.dps_schedule);
    c.dps.guidance = d.value("guidance", c.dps.guidance);
    c.dps.normalized_step = d.value("normalized_step", c.dps.normalized_step);
    c.dps.guidance_scale = d.value("guidance_scale", c.dps.guidance_scale);
  }
  c.fixed_instance = j.value("fixed_instance", c.fixed_instance);
  c.gaussian_diagnostics = j.value("gaussian_diagnostics", c.gaussian_diagnostics);
  c.threads = j.value("threads", c.threads);
  c.validate();
  return c;
}

nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json dps;
  to_json(dps, c.dps_schedule);
  dps["guidance"] = c.dps.guidance;
  dps["normalized_step"] = c.dps.normalized_step;
  dps["guidance_scale"] = c.dps.guidance_scale;
  return {{"prior", c.prior},
          {"N", c.N_list},
          {"alpha", c.alpha},
          {"delta", c.delta},
          {"T", c.sampler.T},
          {"step", c.sampler.step},
          {"K", c.sampler.K},
          {"warm_start", c.sampler.warm_start},
          {"empirical_tau", c.sampler.amp.empirical_tau},
          {"early_stop_tol", c.sampler.amp.early_stop_tol},
          {"n_trials", c.n_trials},
          {"seed", c.seed},
          {"run_amp", c.run_amp},
          {"baselines", c.baselines},
          {"dps", dps},
          {"fixed_instance", c.fixed_instance},
          {"gaussian_diagnostics", c.gaussian_diagnostics},
          {"threads", c.threads}};
}

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

SamplerSummary summarize(const std::vector<TrialRecord>& rows) {
  SamplerSummary s;
  s.trials = static_cast<int>(rows.size());
  if (rows.empty()) return s;
  for (const TrialRecord& r : rows) {
    s.mean_mse += r.mse;
    s.mean_seconds += r.seconds;
  }
  s.mean_mse /= s.trials;
  s.mean_seconds /= s.trials;
  if (s.trials > 1) {
    double ss = 0.0;
    for (const TrialRecord& r : rows) ss += (r.mse - s.mean_mse) * (r.mse - s.mean_mse);
    s.sd_mse = std::sqrt(ss / (s.trials - 1));
  }
  return s;
}

}  // namespace

MetricsReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const Prior prior = cfg.make_prior();
  const ScalarDenoiser den(prior);
  const bool run_dps =
      std::find(cfg.baselines.begin(), cfg.baselines.end(), "dps") != cfg.baselines.end();

  MetricsReport report;
  report.config = to_json(cfg);
  report.version = version();

  for (Eigen::Index N : cfg.N_list) {
    // Per-trial root streams; substreams inside a trial keep samplers paired.
    auto trial_stream = [&](int trial) {
      return Rng(mix_seed(cfg.seed, (static_cast<std::uint64_t>(N) << 24) +
                                        static_cast<std::uint64_t>(trial)));
    };
    auto make = [&](int trial) {
      const Rng root = trial_stream(trial);
      Rng signal = root.split(Stream::prior), noise = root.split(Stream::instance);
      return generate_instance(prior, N, cfg.alpha, cfg.delta, signal, noise);
    };
    std::optional<ModelInstance> shared;
    if (cfg.fixed_instance) shared.emplace(make(0));

    DimensionReport dim;
    dim.N = N;
    dim.M = measurement_count(N, cfg.alpha);
    const double alpha_real = static_cast<double>(dim.M) / static_cast<double>(N);
    dim.mmse = mmse_reference(den, alpha_real, cfg.delta);

    const int n = cfg.n_trials;
    std::vector<TrialRecord> amp_rows(cfg.run_amp ? n : 0), dps_rows(run_dps ? n : 0);
    Eigen::MatrixXd samples;
    if (cfg.gaussian_diagnostics) samples.resize(n, N);

    parallel_for(static_cast<std::size_t>(n), cfg.threads, [&](std::size_t i) {
      const int trial = static_cast<int>(i);
      try {
        const Rng root = trial_stream(trial);
        std::optional<ModelInstance> own;
        if (!shared) own.emplace(make(trial));
        const ModelInstance& inst = shared ? *shared : *own;
        if (cfg.run_amp) {
          Rng brownian = root.split(Stream::brownian);
          const SampleRun run = localize_sample(inst, den, cfg.sampler, brownian);
          amp_rows[i] = {"amp", N, trial, algorithm_mse(inst.theta_true, run.theta_alg),
                         run.seconds};
          if (cfg.gaussian_diagnostics) samples.row(trial) = run.theta_alg.transpose();
        }
        if (run_dps) {
          Rng noise = root.split(Stream::baseline);
          const auto t0 = std::chrono::steady_clock::now();
          const Eigen::VectorXd theta = dps_sample(inst, cfg.dps_schedule, noise, cfg.dps);
          dps_rows[i] = {"dps", N, trial, algorithm_mse(inst.theta_true, theta), seconds_since(t0)};
        }
      } catch (const std::exception& e) {
        throw std::runtime_error("trial " + std::to_string(trial) + " (N=" + std::to_string(N) +
                                 "): " + e.what());
      }
    });

    if (cfg.run_amp) dim.samplers["amp"] = summarize(amp_rows);
    if (run_dps) dim.samplers["dps"] = summarize(dps_rows);
    if (cfg.gaussian_diagnostics) {
      dim.diagnostics = gaussian_case_diagnostics(*shared, samples, cfg.sampler.T);
    }
    report.trials.insert(report.trials.end(), amp_rows.begin(), amp_rows.end());
    report.trials.insert(report.trials.end(), dps_rows.begin(), dps_rows.end());
    report.dimensions.push_back(std::move(dim));
  }
  std::stable_sort(report.trials.begin(), report.trials.end(),
                   [](const TrialRecord& a, const TrialRecord& b) {
                     if (a.N != b.N) return a.N < b.N;
                     if (a.sampler != b.sampler) return a.sampler < b.sampler;
                     return a.trial < b.trial;
                   });
  report.seconds = seconds_since(start);
  return report;
}

void write_trials_csv(std::ostream& os, const MetricsReport& report) {
  std::map<Eigen::Index, double> reference;
  for (const DimensionReport& d : report.dimensions) reference[d.N] = d.mmse.value;
  os << "sampler,N,trial,mse,ln_mse,log10_mse,mmse_reference,seconds\n" << std::setprecision(10);
  for (const TrialRecord& r : report.trials) {
    os << r.sampler << ',' << r.N << ',' << r.trial << ',' << r.mse << ',' << std::log(r.mse)
       << ',' << std::log10(r.mse) << ',' << reference[r.N] << ',' << r.seconds << '\n';
  }
}

nlohmann::json summary_json(const MetricsReport& report) {
  nlohmann::json dims = nlohmann::json::array();
  for (const DimensionReport& d : report.dimensions) {
    nlohmann::json samplers = nlohmann::json::object();
    for (const auto& [name, s] : d.samplers) {
      samplers[name] = {{"mean_mse", s.mean_mse},
                        {"sd_mse", s.sd_mse},
                        {"mean_seconds", s.mean_seconds},
                        {"trials", s.trials}};
    }
    nlohmann::json entry = {{"N", d.N},
                            {"M", d.M},
                            {"mmse_reference",
                             {{"value", d.mmse.value},
                              {"label", d.mmse.label},
                              {"is_mmse", d.mmse.is_mmse},
                              {"fixed_points", d.mmse.fixed_points}}},
                            {"samplers", samplers}};
    if (d.diagnostics) {
      entry["gaussian_diagnostics"] = {{"kl_per_dim", d.diagnostics->kl_per_dim},
                                       {"w2_per_sqrt_dim", d.diagnostics->w2_per_sqrt_dim},
                                       {"n_samples", d.diagnostics->n_samples},
                                       {"shrinkage", d.diagnostics->shrinkage},
                                       {"shrinkage_applied", d.diagnostics->shrinkage_applied}};
    }
    dims.push_back(std::move(entry));
  }
  return {{"version", report.version},
          {"config", report.config},
          {"seconds", report.seconds},
          {"dimensions", dims}};
}

void write_report(const MetricsReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream csv(dir / "trials.csv");
  if (!csv) throw InvalidArgument("cannot write " + (dir / "trials.csv").string());
  write_trials_csv(csv, report);
  std::ofstream(dir / "summary.json") << summary_json(report).dump(2) << '\n';
}

}  // namespace locamp
