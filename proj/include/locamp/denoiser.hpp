#pragma once

#include <Eigen/Dense>

#include "locamp/prior.hpp"
#include "locamp/quadrature.hpp"

namespace locamp {

/// Single Gaussian channel equivalent to observing x through
///   u = x + Sigma v   and   z = t x + sqrt(t) g.
/// The posterior of x depends on (u, z) only through these two numbers.
struct EffectiveChannel {
  double precision;  // 1 / Sigma^2 + t
  double location;   // (u / Sigma^2 + z) / precision
};

/// At t = 0 the z-channel carries no information and z is ignored.
EffectiveChannel effective_channel(double u, double sigma2, double z, double t);

struct PosteriorMoments {
  double mean;
  double variance;
};

/// Bayes-optimal scalar denoiser for a product prior, plus the mmse* function.
///
/// Discrete and tabulated priors use exact finite sums evaluated in log space;
/// the Gaussian prior uses conjugate formulas. For atoms, mmse*(s) is the
/// integral of p(o) Var(x | o) over the observation o, by composite
/// Gauss-Legendre panels within 10 noise sd of some atom, refined around the
/// points where the posterior switches between neighbouring atoms.
class ScalarDenoiser {
 public:
  explicit ScalarDenoiser(Prior prior);

  const Prior& prior() const { return prior_; }

  /// Posterior mean and variance of x given x + N(0, 1/precision) = location.
  PosteriorMoments posterior(const EffectiveChannel& channel) const;

  double eta(double u, double sigma2, double z, double t) const;
  /// d eta / d u = Var(x | channel) / Sigma^2.
  double eta_prime(double u, double sigma2, double z, double t) const;

  Eigen::VectorXd eta_vector(const Eigen::VectorXd& u, double sigma2, const Eigen::VectorXd& z,
                             double t) const;
  /// eta applied coordinate-wise into `out`; returns the mean of eta' over coordinates.
  double apply(const Eigen::VectorXd& u, double sigma2, const Eigen::VectorXd& z, double t,
               Eigen::VectorXd& out) const;

  /// mmse*(s) = E (theta - E[theta | theta + s^{-1/2} G])^2. s may be +infinity.
  double mmse_star(double s) const;
  /// mmse(s, t) = mmse*(s + t).
  double mmse_two_channel(double s, double t) const;

 private:
  PosteriorMoments atom_posterior(double precision, double location) const;

  Prior prior_;
  QuadratureTable panel_;  // Gauss-Legendre on [-1, 1]
  std::vector<double> values_;
  std::vector<double> log_probs_;
  std::vector<double> sorted_values_;
  std::vector<double> sorted_log_probs_;
};

}  // namespace locamp
