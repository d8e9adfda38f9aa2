#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "locamp/instance.hpp"
#include "locamp/rng.hpp"

namespace locamp {

/// Linear variance-preserving schedule beta(s) = beta_min + (beta_max - beta_min) s / horizon.
struct NoiseSchedule {
  double beta_min = 0.1;
  double beta_max = 20.0;
  double horizon = 1.0;
  int n_steps = 1000;

  double beta(double s) const;
  /// exp(-int_0^s beta).
  double alpha_bar(double s) const;
  void validate() const;
};

struct DpsOptions {
  /// Include the likelihood term; without it the sampler targets the prior.
  bool guidance = true;
  /// Replace the likelihood gradient by guidance_scale * grad |y - phi theta0_hat|
  /// (the normalized step of the original DPS recipe).
  bool normalized_step = false;
  double guidance_scale = 1.0;
};

/// Diffusion posterior sampling for a Gaussian prior N(mu0, sigma0^2).
///
/// Integrates the reverse of d theta = -(beta/2) theta ds + sqrt(beta) dW from
/// theta_horizon ~ N(0, I) with Euler-Maruyama. The prior score is exact and
/// the likelihood term uses the plug-in p(y | E[theta_0 | theta_s]) with the
/// Gaussian denoiser E[theta_0 | theta_s] = mu0 + c (theta_s - sqrt(abar) mu0),
/// c = sqrt(abar) sigma0^2 / (abar sigma0^2 + 1 - abar). The final step adds no noise.
Eigen::VectorXd dps_sample(const ModelInstance& instance, const NoiseSchedule& schedule, Rng& rng,
                           const DpsOptions& options = {});

void to_json(nlohmann::json& j, const NoiseSchedule& s);
void from_json(const nlohmann::json& j, NoiseSchedule& s);

}  // namespace locamp
