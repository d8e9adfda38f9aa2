#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "locamp/amp.hpp"
#include "locamp/denoiser.hpp"
#include "locamp/instance.hpp"
#include "locamp/rng.hpp"

namespace locamp {

struct SamplerConfig {
  double T = 200.0;
  /// Requested step; the run uses L = round(T / step) steps of exactly T / L.
  double step = 0.1;
  int K = 20;
  std::uint64_t seed = 0;
  bool store_trajectory = false;
  /// Start AMP at step l+1 from step l's estimate. Off by default: the
  /// analyzed algorithm restarts AMP from zero at every step.
  bool warm_start = false;
  AmpOptions amp;
};

struct SampleRun {
  Eigen::VectorXd theta_alg;                 // z_T / T
  std::vector<Eigen::VectorXd> z_trajectory; // z_{t_0}, ..., z_{t_L} when stored
  std::vector<double> drift_norms;           // |m(z_{t_l}, t_l)|_2 per step
  std::vector<double> drift_max_abs;         // |m(z_{t_l}, t_l)|_inf per step
  int steps = 0;                             // L
  double step = 0.0;                         // T / L
  double T = 0.0;
  double seconds = 0.0;
};

/// Drift evaluated at (z_{t_l}, t_l) for step index l.
using DriftFn = std::function<Eigen::VectorXd(const Eigen::VectorXd& z, double t, int l)>;

/// Euler-Maruyama for dz = m(z, t) dt + dB from z_0 = 0:
///   z_{t_{l+1}} = z_{t_l} + m(z_{t_l}, t_l) step + sqrt(step) B_{l+1},  t_l = l step.
/// B_{l+1} is drawn from `rng` after the drift of step l is evaluated, so two
/// runs started from equal streams share their Brownian increments.
SampleRun run_localization(Eigen::Index N, const SamplerConfig& config, Rng& rng,
                           const DriftFn& drift);

/// Localization sampler with the K-iteration AMP estimate as drift.
SampleRun localize_sample(const ModelInstance& instance, const ScalarDenoiser& denoiser,
                          const SamplerConfig& config, Rng& rng);
/// Same, with the Brownian stream seeded from config.seed.
SampleRun localize_sample(const ModelInstance& instance, const ScalarDenoiser& denoiser,
                          const SamplerConfig& config);

/// Same stepping with the exact posterior mean as drift (closed form for a
/// Gaussian prior, enumeration for small discrete instances). Throws
/// OracleUnavailable otherwise.
SampleRun reference_localization(const ModelInstance& instance, const SamplerConfig& config,
                                 Rng& rng);

/// Rows l = 1..L with columns l, t_l, then z_{t_l}[c] / t_l for each c in
/// `coords` (0-based indices, printed 1-based in the header).
void write_trajectory_csv(std::ostream& os, const SampleRun& run,
                          const std::vector<Eigen::Index>& coords);

}  // namespace locamp
