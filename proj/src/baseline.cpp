#include "locamp/baseline.hpp"

#include <cmath>

#include "locamp/error.hpp"

namespace locamp {

double NoiseSchedule::beta(double s) const {
  return beta_min + (beta_max - beta_min) * s / horizon;
}

double NoiseSchedule::alpha_bar(double s) const {
  return std::exp(-(beta_min * s + 0.5 * (beta_max - beta_min) * s * s / horizon));
}

void NoiseSchedule::validate() const {
  require(std::isfinite(beta_min) && beta_min > 0.0, "schedule: beta_min must be positive");
  require(std::isfinite(beta_max) && beta_max >= beta_min, "schedule: beta_max < beta_min");
  require(std::isfinite(horizon) && horizon > 0.0, "schedule: horizon must be positive");
  require(n_steps >= 1, "schedule: n_steps must be positive");
}

Eigen::VectorXd dps_sample(const ModelInstance& inst, const NoiseSchedule& sched, Rng& rng,
                           const DpsOptions& opt) {
  sched.validate();
  if (!inst.prior.is_gaussian()) throw InvalidArgument("dps_sample needs a Gaussian prior");
  require(!opt.guidance || inst.delta > 0.0, "dps_sample: guidance needs delta > 0");
  const double mu0 = inst.prior.gaussian_mean();
  const double s0 = inst.prior.gaussian_variance();
  const Eigen::Index N = inst.N;
  const double lik = opt.guidance ? inst.alpha / inst.delta : 0.0;

  // phi^T (y - phi x) through the Gram matrix when that is cheaper.
  const bool use_gram = opt.guidance && inst.M > N;
  Eigen::MatrixXd gram;
  Eigen::VectorXd phi_t_y;
  if (opt.guidance) phi_t_y = inst.phi.transpose() * inst.y;
  if (use_gram) gram = inst.phi.transpose() * inst.phi;

  const double h = sched.horizon / sched.n_steps;
  Eigen::VectorXd theta = rng.normal_vector(N);
  Eigen::VectorXd theta0(N), grad(N), resid(inst.M);
  for (int i = 0; i < sched.n_steps; ++i) {
    const double s = sched.horizon - i * h;
    const double beta = sched.beta(s);
    const double abar = sched.alpha_bar(s);
    const double var_s = abar * s0 + 1.0 - abar;
    const double shift = std::sqrt(abar) * mu0;
    const double c = std::sqrt(abar) * s0 / var_s;

    Eigen::VectorXd drift = 0.5 * beta * theta - (beta / var_s) * (theta.array() - shift).matrix();
    if (opt.guidance) {
      theta0 = (c * (theta.array() - shift) + mu0).matrix();
      if (use_gram) {
        grad.noalias() = phi_t_y - gram * theta0;
      } else {
        resid.noalias() = inst.y - inst.phi * theta0;
        grad.noalias() = inst.phi.transpose() * resid;
      }
      grad *= c;
      if (opt.normalized_step) {
        double rnorm;
        if (use_gram) {
          rnorm = std::sqrt(std::max(
              0.0, inst.y.squaredNorm() - 2.0 * phi_t_y.dot(theta0) + theta0.dot(gram * theta0)));
        } else {
          rnorm = resid.norm();
        }
        if (rnorm > 0.0) theta += (opt.guidance_scale / rnorm) * grad;
      } else {
        drift += (beta * lik * opt.guidance_scale) * grad;
      }
    }
    theta += h * drift;
    if (i + 1 < sched.n_steps) theta += std::sqrt(beta * h) * rng.normal_vector(N);
    if (!theta.allFinite()) throw DivergenceError("dps", i, "theta");
  }
  return theta;
}

void to_json(nlohmann::json& j, const NoiseSchedule& s) {
  j = {{"beta_min", s.beta_min}, {"beta_max", s.beta_max}, {"horizon", s.horizon},
       {"n_steps", s.n_steps}};
}

void from_json(const nlohmann::json& j, NoiseSchedule& s) {
  s.beta_min = j.value("beta_min", s.beta_min);
  s.beta_max = j.value("beta_max", s.beta_max);
  s.horizon = j.value("horizon", s.horizon);
  s.n_steps = j.value("n_steps", s.n_steps);
  s.validate();
}

}  // namespace locamp
