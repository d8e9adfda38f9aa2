#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "locamp/baseline.hpp"
#include "locamp/denoiser.hpp"
#include "locamp/instance.hpp"
#include "locamp/sampler.hpp"

namespace locamp {

/// Library version from `git describe` at configure time.
const char* version();

/// |theta - theta_alg|^2 / (2N). The factor 2 accounts for theta and theta_alg
/// being (approximately) i.i.d. given y, so a perfect sampler scores the MMSE.
double algorithm_mse(const Eigen::VectorXd& theta, const Eigen::VectorXd& theta_alg);

/// The t = 0 state-evolution fixed point used as the MMSE reference.
///
/// `is_mmse` is true only if the fixed point is unique at delta and at every
/// point of a uniform scan of [0, delta] (i.e. delta is below the scanned
/// Delta_AMP). Otherwise `value` is the point reached by state evolution from
/// the uninformative start and `label` says so.
struct MmseReference {
  double value = 0.0;
  std::vector<double> fixed_points;
  bool is_mmse = false;
  std::string label;
};

MmseReference mmse_reference(const ScalarDenoiser& denoiser, double alpha, double delta,
                             int scan_points = 50, int grid_size = 2000);

/// Gaussian-prior diagnostics against the exact law of z_T / T, which is
/// N(m_post, Sigma_post + I/T) with (m_post, Sigma_post) the t = 0 posterior.
struct GaussianDiagnostics {
  double kl_per_dim = 0.0;      // KL(target || fitted Gaussian) / N
  double w2_per_sqrt_dim = 0.0; // W2(target, fitted Gaussian) / sqrt(N)
  std::size_t n_samples = 0;
  double shrinkage = 0.0;       // Ledoit-Wolf intensity, 0 when not applied
  bool shrinkage_applied = false;
};

/// `samples` holds one sample per row. Ledoit-Wolf shrinkage towards a scaled
/// identity is applied when there are fewer than 10 N samples.
GaussianDiagnostics gaussian_case_diagnostics(const ModelInstance& instance,
                                              const Eigen::MatrixXd& samples, double T);

/// Closed-form divergences between N(m1, S1) and N(m2, S2).
double gaussian_kl(const Eigen::VectorXd& m1, const Eigen::MatrixXd& S1, const Eigen::VectorXd& m2,
                   const Eigen::MatrixXd& S2);
double gaussian_w2(const Eigen::VectorXd& m1, const Eigen::MatrixXd& S1, const Eigen::VectorXd& m2,
                   const Eigen::MatrixXd& S2);

struct ExperimentConfig {
  nlohmann::json prior = {{"kind", "gaussian"}, {"mean", 0.0}, {"var", 1.0}};
  std::vector<Eigen::Index> N_list = {192};
  double alpha = 2.0;
  double delta = 0.01;
  SamplerConfig sampler = [] {
    SamplerConfig s;
    s.T = 300.0;
    s.K = 50;
    return s;
  }();
  int n_trials = 1;
  std::uint64_t seed = 0;
  bool run_amp = true;
  std::vector<std::string> baselines;  // "dps"
  NoiseSchedule dps_schedule;
  DpsOptions dps;
  /// Reuse one instance per N and vary only the sampler noise; required for
  /// the Gaussian diagnostics, whose target law is per instance.
  bool fixed_instance = false;
  bool gaussian_diagnostics = false;
  unsigned threads = 1;

  Prior make_prior() const;
  void validate() const;
};

ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& config);

struct TrialRecord {
  std::string sampler;
  Eigen::Index N = 0;
  int trial = 0;
  double mse = 0.0;
  double seconds = 0.0;
};

struct SamplerSummary {
  double mean_mse = 0.0;
  double sd_mse = 0.0;
  double mean_seconds = 0.0;
  int trials = 0;
};

struct DimensionReport {
  Eigen::Index N = 0;
  Eigen::Index M = 0;
  MmseReference mmse;
  std::map<std::string, SamplerSummary> samplers;
  std::optional<GaussianDiagnostics> diagnostics;
};

struct MetricsReport {
  std::vector<TrialRecord> trials;  // sorted by (N, sampler, trial)
  std::vector<DimensionReport> dimensions;
  nlohmann::json config;
  std::string version;
  double seconds = 0.0;
};

/// For each N and trial: a fresh instance (or one shared instance when
/// fixed_instance is set), the AMP localization sampler and any baselines,
/// each drawing from its own seeded substream so samplers are paired.
MetricsReport run_experiment(const ExperimentConfig& config);

/// Columns: sampler, N, trial, mse, ln_mse, log10_mse, mmse_reference, seconds.
void write_trials_csv(std::ostream& os, const MetricsReport& report);
nlohmann::json summary_json(const MetricsReport& report);
/// Writes trials.csv and summary.json into `dir`.
void write_report(const MetricsReport& report, const std::filesystem::path& dir);

}  // namespace locamp
