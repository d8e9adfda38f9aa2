#include "locamp/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "locamp/error.hpp"

namespace locamp {

std::string to_string(PosteriorMethod method) {
  return method == PosteriorMethod::enumeration ? "enumeration" : "gaussian-closed-form";
}

namespace {

void check_posterior_inputs(const ModelInstance& inst, const Eigen::VectorXd& z, double t) {
  require(z.size() == inst.N, "oracle: z length must equal N");
  require(std::isfinite(t) && t >= 0.0, "oracle: t must be non-negative");
  require(inst.delta > 0.0, "oracle: delta must be positive for an exact posterior");
}

}  // namespace

ExactPosterior exact_posterior_enumeration(const ModelInstance& inst, const Eigen::VectorXd& z,
                                           double t, bool with_covariance) {
  check_posterior_inputs(inst, z, t);
  if (inst.prior.kind() != PriorKind::discrete) {
    throw OracleUnavailable("enumeration oracle needs a discrete prior");
  }
  const auto atoms = inst.prior.atoms();
  const std::size_t K = atoms.size();
  const Eigen::Index N = inst.N;
  std::size_t states = 1;
  for (Eigen::Index i = 0; i < N; ++i) {
    if (states > kMaxEnumerationStates / K) {
      throw OracleUnavailable("enumeration oracle: more than 2^20 configurations");
    }
    states *= K;
  }

  std::vector<double> log_p(K);
  for (std::size_t a = 0; a < K; ++a) log_p[a] = std::log(atoms[a].probability);
  const double lik = inst.alpha / (2.0 * inst.delta);

  // Pass 1: log-weights of every configuration, in mixed-radix order.
  std::vector<double> lw(states);
  Eigen::VectorXd x(N), resid(inst.M);
  double max_lw = -std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < states; ++s) {
    std::size_t code = s;
    double prior_term = 0.0;
    for (Eigen::Index i = 0; i < N; ++i) {
      const std::size_t d = code % K;
      code /= K;
      x[i] = atoms[d].value;
      prior_term += log_p[d];
    }
    resid.noalias() = inst.phi * x;
    resid -= inst.y;
    double value = prior_term - lik * resid.squaredNorm();
    if (t > 0.0) value -= (z - t * x).squaredNorm() / (2.0 * t);
    lw[s] = value;
    max_lw = std::max(max_lw, value);
  }

  auto config = [&](std::size_t s, Eigen::VectorXd& out) {
    for (Eigen::Index i = 0; i < N; ++i) {
      out[i] = atoms[s % K].value;
      s /= K;
    }
  };

  // Pass 2: normalizer and mean.
  double total = 0.0;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(N);
  for (std::size_t s = 0; s < states; ++s) {
    lw[s] = std::exp(lw[s] - max_lw);
    total += lw[s];
    config(s, x);
    mean += lw[s] * x;
  }
  mean /= total;

  ExactPosterior post;
  post.method = PosteriorMethod::enumeration;
  post.log_partition = max_lw + std::log(total);
  if (with_covariance) {
    // Pass 3: centered second moments.
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(N, N);
    for (std::size_t s = 0; s < states; ++s) {
      config(s, x);
      x -= mean;
      cov.selfadjointView<Eigen::Lower>().rankUpdate(x, lw[s] / total);
    }
    post.covariance = cov.selfadjointView<Eigen::Lower>();
  }
  post.mean = std::move(mean);
  return post;
}

ExactPosterior exact_posterior_gaussian(const ModelInstance& inst, const Eigen::VectorXd& z,
                                        double t, bool with_covariance) {
  check_posterior_inputs(inst, z, t);
  if (!inst.prior.is_gaussian()) throw OracleUnavailable("closed-form oracle needs a Gaussian prior");
  const double mu0 = inst.prior.gaussian_mean();
  const double s0 = inst.prior.gaussian_variance();
  const Eigen::Index N = inst.N;
  ExactPosterior post;
  post.method = PosteriorMethod::gaussian_closed_form;
  if (s0 == 0.0) {
    post.mean = Eigen::VectorXd::Constant(N, mu0);
    if (with_covariance) post.covariance = Eigen::MatrixXd::Zero(N, N);
    const Eigen::VectorXd resid = inst.phi * post.mean - inst.y;
    post.log_partition = -inst.alpha / (2.0 * inst.delta) * resid.squaredNorm();
    if (t > 0.0) post.log_partition -= (z - t * post.mean).squaredNorm() / (2.0 * t);
    return post;
  }

  const double c = inst.alpha / inst.delta;
  Eigen::MatrixXd A = c * (inst.phi.transpose() * inst.phi);
  A.diagonal().array() += 1.0 / s0 + t;
  Eigen::VectorXd b = c * (inst.phi.transpose() * inst.y);
  b.array() += mu0 / s0;
  if (t > 0.0) b += z;

  const Eigen::LLT<Eigen::MatrixXd> llt(A);
  if (llt.info() != Eigen::Success) throw InvalidArgument("gaussian oracle: singular system");
  post.mean = llt.solve(b);
  if (with_covariance) post.covariance = llt.solve(Eigen::MatrixXd::Identity(N, N));

  const Eigen::MatrixXd L = llt.matrixL();
  const double logdet = 2.0 * L.diagonal().array().log().sum();
  double quad = c * inst.y.squaredNorm() + static_cast<double>(N) * mu0 * mu0 / s0;
  if (t > 0.0) quad += z.squaredNorm() / t;
  post.log_partition = -0.5 * static_cast<double>(N) * std::log(s0) - 0.5 * logdet +
                       0.5 * b.dot(post.mean) - 0.5 * quad;
  return post;
}

ExactPosterior exact_posterior(const ModelInstance& inst, const Eigen::VectorXd& z, double t,
                               bool with_covariance) {
  if (inst.prior.is_gaussian()) return exact_posterior_gaussian(inst, z, t, with_covariance);
  return exact_posterior_enumeration(inst, z, t, with_covariance);
}

GaussianPosteriorMean::GaussianPosteriorMean(const ModelInstance& inst) {
  if (!inst.prior.is_gaussian()) throw OracleUnavailable("closed-form oracle needs a Gaussian prior");
  require(inst.delta > 0.0, "oracle: delta must be positive for an exact posterior");
  prior_mean_ = inst.prior.gaussian_mean();
  point_mass_ = inst.prior.gaussian_variance() == 0.0;
  prior_precision_ = point_mass_ ? 0.0 : 1.0 / inst.prior.gaussian_variance();
  if (point_mass_) return;
  const double c = inst.alpha / inst.delta;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(c * (inst.phi.transpose() * inst.phi));
  Q_ = eig.eigenvectors();
  lambda_ = eig.eigenvalues().cwiseMax(0.0);
  Eigen::VectorXd h = c * (inst.phi.transpose() * inst.y);
  h.array() += prior_mean_ * prior_precision_;
  rhs_ = Q_.transpose() * h;
}

Eigen::VectorXd GaussianPosteriorMean::operator()(const Eigen::VectorXd& z, double t) const {
  if (point_mass_) return Eigen::VectorXd::Constant(z.size(), prior_mean_);
  require(z.size() == Q_.rows(), "oracle: z length must equal N");
  Eigen::VectorXd coeff = rhs_;
  if (t > 0.0) coeff.noalias() += Q_.transpose() * z;
  coeff.array() /= lambda_.array() + prior_precision_ + t;
  return Q_ * coeff;
}

OverlapStats overlap_stats(const ExactPosterior& post, double tolerance) {
  const Eigen::Index p = post.mean.size();
  if (post.covariance.rows() != p || post.covariance.cols() != p || p == 0) {
    throw InvalidArgument("overlap_stats: posterior has no covariance");
  }
  const Eigen::MatrixXd& C = post.covariance;
  const double dp = static_cast<double>(p);
  // Independent replicas: <R^2> = (1/p^2) sum_ij <theta_i theta_j>^2.
  const Eigen::MatrixXd second = C + post.mean * post.mean.transpose();
  OverlapStats s;
  s.p = p;
  s.q_p = post.mean.squaredNorm() / dp;
  s.var_R = std::max(0.0, second.squaredNorm() / (dp * dp) - s.q_p * s.q_p);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(C, Eigen::EigenvaluesOnly);
  s.lambda_m = std::max(0.0, eig.eigenvalues().maxCoeff());
  s.trace_cov_sq = C.squaredNorm();
  s.lower = 0.5 * dp * s.var_R;
  s.upper = dp * std::sqrt(s.var_R);
  s.lower_holds = s.lower <= s.lambda_m + tolerance;
  s.upper_holds = s.lambda_m <= s.upper + tolerance;
  s.trace_relation = s.lambda_m * s.lambda_m <= s.trace_cov_sq + tolerance;
  return s;
}

double denoiser_oracle(double u, double sigma2, double z, double t, const Prior& prior,
                       int n_grid) {
  require(std::isfinite(u) && std::isfinite(z), "denoiser_oracle: non-finite input");
  require(sigma2 > 0.0 && std::isfinite(sigma2), "denoiser_oracle: sigma2 must be positive");
  require(t >= 0.0 && std::isfinite(t), "denoiser_oracle: t must be non-negative");
  auto log_channel = [&](double x) {
    double v = -(u - x) * (u - x) / (2.0 * sigma2);
    if (t > 0.0) v -= (z - t * x) * (z - t * x) / (2.0 * t);
    return v;
  };

  if (prior.kind() == PriorKind::discrete) {
    double max_lw = -std::numeric_limits<double>::infinity();
    for (const Atom& a : prior.atoms()) max_lw = std::max(max_lw, log_channel(a.value));
    double num = 0.0, den = 0.0;
    for (const Atom& a : prior.atoms()) {
      const double w = a.probability * std::exp(log_channel(a.value) - max_lw);
      num += w * a.value;
      den += w;
    }
    return num / den;
  }

  require(n_grid >= 2, "denoiser_oracle: n_grid too small");
  const int n = n_grid + (n_grid % 2);  // Simpson needs an even interval count
  double lo, hi;
  std::function<double(double)> log_prior;
  if (prior.is_gaussian()) {
    const double mu = prior.gaussian_mean(), v0 = prior.gaussian_variance();
    if (v0 == 0.0) return mu;
    const double sd0 = std::sqrt(v0), sd = std::sqrt(sigma2);
    lo = std::min(mu - 12.0 * sd0, u - 12.0 * sd);
    hi = std::max(mu + 12.0 * sd0, u + 12.0 * sd);
    if (t > 0.0) {
      lo = std::min(lo, z / t - 12.0 / std::sqrt(t));
      hi = std::max(hi, z / t + 12.0 / std::sqrt(t));
    }
    log_prior = [mu, v0](double x) { return -(x - mu) * (x - mu) / (2.0 * v0); };
  } else {
    const auto* density = prior.density();
    if (!density) throw OracleUnavailable("denoiser_oracle: density callable not retained");
    lo = -prior.support_bound();
    hi = prior.support_bound();
    log_prior = [density](double x) {
      const double p = (*density)(x);
      return p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity();
    };
  }

  const double h = (hi - lo) / n;
  std::vector<double> lw(n + 1);
  double max_lw = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= n; ++i) {
    const double x = lo + h * i;
    lw[i] = log_prior(x) + log_channel(x);
    max_lw = std::max(max_lw, lw[i]);
  }
  double num = 0.0, den = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double x = lo + h * i;
    const double simpson = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    const double w = simpson * std::exp(lw[i] - max_lw);
    num += w * x;
    den += w;
  }
  return num / den;
}

}  // namespace locamp
