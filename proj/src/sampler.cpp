#include "locamp/sampler.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <memory>
#include <ostream>
#include <string>

#include "locamp/error.hpp"
#include "locamp/oracle.hpp"

namespace locamp {

SampleRun run_localization(Eigen::Index N, const SamplerConfig& cfg, Rng& rng,
                           const DriftFn& drift) {
  require(std::isfinite(cfg.T) && cfg.T > 0.0, "sampler: T must be positive");
  require(std::isfinite(cfg.step) && cfg.step > 0.0, "sampler: step must be positive");
  require(cfg.K >= 1, "sampler: K must be at least 1");
  const long long L = std::llround(cfg.T / cfg.step);
  require(L >= 1, "sampler: T / step rounds to zero steps");

  const auto start = std::chrono::steady_clock::now();
  SampleRun run;
  run.steps = static_cast<int>(L);
  run.step = cfg.T / static_cast<double>(L);
  run.T = cfg.T;
  run.drift_norms.reserve(L);
  run.drift_max_abs.reserve(L);
  if (cfg.store_trajectory) run.z_trajectory.reserve(L + 1);

  const double sqrt_step = std::sqrt(run.step);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(N);
  if (cfg.store_trajectory) run.z_trajectory.push_back(z);
  for (int l = 0; l < run.steps; ++l) {
    const double t = l * run.step;
    const Eigen::VectorXd m = drift(z, t, l);
    if (m.size() != N) throw InvalidArgument("sampler: drift has wrong length");
    run.drift_norms.push_back(m.norm());
    run.drift_max_abs.push_back(N ? m.cwiseAbs().maxCoeff() : 0.0);
    z += run.step * m + sqrt_step * rng.normal_vector(N);
    if (cfg.store_trajectory) run.z_trajectory.push_back(z);
  }
  run.theta_alg = z / cfg.T;
  run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return run;
}

SampleRun localize_sample(const ModelInstance& inst, const ScalarDenoiser& den,
                          const SamplerConfig& cfg, Rng& rng) {
  const AmpSolver solver(inst, den, cfg.amp);
  Eigen::VectorXd previous;
  double previous_tau2 = 0.0;
  DriftFn drift = [&](const Eigen::VectorXd& z, double t, int l) {
    try {
      const bool warm = cfg.warm_start && previous.size() > 0;
      AmpResult res = solver.run(z, t, cfg.K, warm ? &previous : nullptr, previous_tau2);
      if (cfg.warm_start) {
        previous = res.m_hat;
        previous_tau2 = res.tau2;
      }
      return std::move(res.m_hat);
    } catch (const DivergenceError& e) {
      throw DivergenceError("localization step " + std::to_string(l) + ", amp", e.iteration(),
                            e.quantity());
    }
  };
  return run_localization(inst.N, cfg, rng, drift);
}

SampleRun localize_sample(const ModelInstance& inst, const ScalarDenoiser& den,
                          const SamplerConfig& cfg) {
  Rng rng(cfg.seed);
  return localize_sample(inst, den, cfg, rng);
}

SampleRun reference_localization(const ModelInstance& inst, const SamplerConfig& cfg, Rng& rng) {
  if (inst.prior.is_gaussian()) {
    const GaussianPosteriorMean mean(inst);
    return run_localization(inst.N, cfg, rng,
                            [&](const Eigen::VectorXd& z, double t, int) { return mean(z, t); });
  }
  // Fails early, before any stepping, when the state space is too large.
  exact_posterior_enumeration(inst, Eigen::VectorXd::Zero(inst.N), 0.0, false);
  return run_localization(inst.N, cfg, rng, [&](const Eigen::VectorXd& z, double t, int) {
    return exact_posterior_enumeration(inst, z, t, false).mean;
  });
}

void write_trajectory_csv(std::ostream& os, const SampleRun& run,
                          const std::vector<Eigen::Index>& coords) {
  if (run.z_trajectory.empty()) throw InvalidArgument("trajectory was not stored");
  os << "l,t_l";
  for (Eigen::Index c : coords) os << ",coord_" << (c + 1);
  os << '\n' << std::setprecision(12);
  for (std::size_t l = 1; l < run.z_trajectory.size(); ++l) {
    const double t = static_cast<double>(l) * run.step;
    os << l << ',' << t;
    for (Eigen::Index c : coords) {
      require(c >= 0 && c < run.z_trajectory[l].size(), "trajectory coordinate out of range");
      os << ',' << run.z_trajectory[l][c] / t;
    }
    os << '\n';
  }
}

}  // namespace locamp
