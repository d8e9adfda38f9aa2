#pragma once

#include <cstddef>
#include <string>

#include <Eigen/Dense>

#include "locamp/instance.hpp"

namespace locamp {

enum class PosteriorMethod { enumeration, gaussian_closed_form };

std::string to_string(PosteriorMethod method);

/// Exact law of theta given y and the localization observation z = t theta + sqrt(t) g.
///
/// log_partition is the log of  sum_x P_0(x) exp(-alpha/(2 delta) |phi x - y|^2
/// - |z - t x|^2 / (2t))  (an integral against the prior density in the
/// Gaussian case); the z term is absent at t = 0.
struct ExactPosterior {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;  // empty when not requested
  double log_partition = 0.0;
  PosteriorMethod method = PosteriorMethod::enumeration;
};

inline constexpr std::size_t kMaxEnumerationStates = std::size_t{1} << 20;

/// Sums over all |support|^N configurations. Throws OracleUnavailable for
/// continuous priors or more than kMaxEnumerationStates configurations.
ExactPosterior exact_posterior_enumeration(const ModelInstance& instance, const Eigen::VectorXd& z,
                                           double t, bool with_covariance = true);

/// Conjugate formulas for a Gaussian prior N(mu0, sigma0^2):
///   A = (alpha/delta) phi^T phi + (1/sigma0^2 + t) I,  mean = A^{-1} b,
///   b = (alpha/delta) phi^T y + z + mu0/sigma0^2.
ExactPosterior exact_posterior_gaussian(const ModelInstance& instance, const Eigen::VectorXd& z,
                                        double t, bool with_covariance = true);

/// Enumeration for discrete priors, closed form for Gaussian ones.
ExactPosterior exact_posterior(const ModelInstance& instance, const Eigen::VectorXd& z, double t,
                               bool with_covariance = true);

/// Posterior mean m(z, t) for a Gaussian prior at many (z, t) pairs: one
/// eigendecomposition of phi^T phi up front, O(N^2) per query.
class GaussianPosteriorMean {
 public:
  explicit GaussianPosteriorMean(const ModelInstance& instance);
  Eigen::VectorXd operator()(const Eigen::VectorXd& z, double t) const;

 private:
  Eigen::MatrixXd Q_;
  Eigen::VectorXd lambda_;  // eigenvalues of (alpha/delta) phi^T phi
  Eigen::VectorXd rhs_;     // Q^T ((alpha/delta) phi^T y + mu0/sigma0^2)
  double prior_precision_;
  double prior_mean_;
  bool point_mass_;
};

/// Overlap statistics of two independent posterior replicas:
///   q_p = <R_12>,  var_R = <(R_12 - q_p)^2>,  lambda_m = lambda_max(Cov),
/// and the two sides of  (p/2) var_R <= lambda_m <= p sqrt(var_R).
/// The upper side and lambda_m^2 <= tr(Cov^2) hold for every prior; the
/// lower side is only guaranteed for coordinates supported in [-1, 1].
struct OverlapStats {
  double q_p = 0.0;
  double var_R = 0.0;
  double lambda_m = 0.0;
  Eigen::Index p = 0;
  double lower = 0.0;  // (p/2) var_R
  double upper = 0.0;  // p sqrt(var_R)
  double trace_cov_sq = 0.0;
  bool lower_holds = false;
  bool upper_holds = false;
  bool trace_relation = false;
};

OverlapStats overlap_stats(const ExactPosterior& posterior, double tolerance = 1e-10);

/// Posterior mean from the raw two-channel integrand
///   x P_0(x) exp(-(z - t x)^2 / (2t) - (u - x)^2 / (2 sigma2)),
/// integrated by composite Simpson on n_grid intervals (bounded density and
/// Gaussian priors) or summed over atoms (discrete priors). Independent of the
/// effective-channel reduction used by ScalarDenoiser. The z term is dropped
/// at t = 0.
double denoiser_oracle(double u, double sigma2, double z, double t, const Prior& prior,
                       int n_grid = 200000);

}  // namespace locamp
