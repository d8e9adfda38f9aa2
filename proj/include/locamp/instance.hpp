#pragma once

#include <filesystem>

#include <Eigen/Dense>

#include "locamp/prior.hpp"
#include "locamp/rng.hpp"

namespace locamp {

/// One realization of y = phi theta + sqrt(delta / alpha) w.
///
/// `alpha` is the realized rate M / N; it is the value used in the noise
/// scale, the Onsager coefficient and the variance recursion.
struct ModelInstance {
  explicit ModelInstance(Prior p) : prior(std::move(p)) {}

  Prior prior;
  Eigen::Index N = 0;
  Eigen::Index M = 0;
  double alpha = 0.0;
  double delta = 0.0;
  Eigen::MatrixXd phi;         // M x N, entries N(0, 1/M)
  Eigen::VectorXd theta_true;  // may be empty for user-supplied data
  Eigen::VectorXd w;
  Eigen::VectorXd y;

  double noise_scale() const;
};

/// M = round(alpha N). Draws theta from `signal_rng` and (phi, w) from `noise_rng`.
ModelInstance generate_instance(const Prior& prior, Eigen::Index N, double alpha, double delta,
                                Rng& signal_rng, Rng& noise_rng);
/// Single-stream variant: theta, then phi, then w.
ModelInstance generate_instance(const Prior& prior, Eigen::Index N, double alpha, double delta,
                                Rng& rng);

/// Builds an instance from explicit parts; y is computed from them.
ModelInstance make_instance(const Prior& prior, Eigen::MatrixXd phi, Eigen::VectorXd theta,
                            Eigen::VectorXd w, double delta);
/// Instance with an observed y and no ground truth.
ModelInstance make_observed_instance(const Prior& prior, Eigen::MatrixXd phi, Eigen::VectorXd y,
                                     double delta);

Eigen::Index measurement_count(Eigen::Index N, double alpha);

void write_instance_binary(const ModelInstance& instance, const std::filesystem::path& path);
ModelInstance read_instance_binary(const std::filesystem::path& path);
/// Writes meta.json, phi.csv, theta.csv, w.csv and y.csv into `dir`.
void write_instance_csv(const ModelInstance& instance, const std::filesystem::path& dir);

}  // namespace locamp
