#include "locamp/amp.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

#include "locamp/error.hpp"

namespace locamp {
namespace {

double initial_tau2(const ModelInstance& inst, const ScalarDenoiser& den) {
  return (inst.delta + den.prior().second_moment()) / inst.alpha;
}

double recursion_tau2(const ModelInstance& inst, const ScalarDenoiser& den, double tau2, double t) {
  return (inst.delta + den.mmse_two_channel(1.0 / tau2, t)) / inst.alpha;
}

double empirical_mse(const ModelInstance& inst, const Eigen::VectorXd& m) {
  if (inst.theta_true.size() != m.size()) return std::numeric_limits<double>::quiet_NaN();
  return (m - inst.theta_true).squaredNorm() / static_cast<double>(m.size());
}

void check_finite(const Eigen::VectorXd& v, int k, const char* what) {
  if (!v.allFinite()) throw DivergenceError("amp", k, what);
}

void check_inputs(const ModelInstance& inst, const Eigen::VectorXd& z, double t) {
  if (z.size() != inst.N) throw InvalidArgument("amp: z length must equal N");
  if (!(std::isfinite(t) && t >= 0.0)) throw InvalidArgument("amp: t must be non-negative");
  if (inst.y.size() != inst.M || inst.phi.rows() != inst.M || inst.phi.cols() != inst.N) {
    throw InvalidArgument("amp: inconsistent instance dimensions");
  }
}

}  // namespace

AmpState amp_init(const ModelInstance& inst, const ScalarDenoiser& den, const Eigen::VectorXd& z,
                  double t) {
  check_inputs(inst, z, t);
  AmpState s;
  s.k = 0;
  s.m_hat = Eigen::VectorXd::Zero(inst.N);
  s.r = inst.y;
  s.tau2 = initial_tau2(inst, den);
  s.b = 0.0;
  s.t = t;
  s.z = z;
  return s;
}

AmpState amp_step(AmpState s, const ModelInstance& inst, const ScalarDenoiser& den,
                  const AmpOptions& options) {
  if (s.m_hat.size() != inst.N || s.r.size() != inst.M) {
    throw InvalidArgument("amp_step: state does not match instance dimensions");
  }
  const double tau2 =
      options.empirical_tau ? s.r.squaredNorm() / static_cast<double>(inst.M) : s.tau2;
  if (!(std::isfinite(tau2) && tau2 > 0.0)) throw DivergenceError("amp", s.k, "tau2");

  const Eigen::VectorXd u = inst.phi.transpose() * s.r + s.m_hat;
  check_finite(u, s.k + 1, "effective observation");
  Eigen::VectorXd m_next;
  const double mean_derivative = den.apply(u, tau2, s.z, s.t, m_next);
  check_finite(m_next, s.k + 1, "m_hat");

  s.b = mean_derivative / inst.alpha;
  s.r = inst.y - inst.phi * m_next + s.b * s.r;
  check_finite(s.r, s.k + 1, "residual");
  s.m_hat = std::move(m_next);
  s.tau2 = recursion_tau2(inst, den, tau2, s.t);
  if (!std::isfinite(s.tau2)) throw DivergenceError("amp", s.k + 1, "tau2");
  ++s.k;
  return s;
}

AmpSolver::AmpSolver(const ModelInstance& instance, const ScalarDenoiser& denoiser,
                     AmpOptions options)
    : instance_(instance), denoiser_(denoiser), options_(options) {
  if (instance_.M > instance_.N) {
    gram_ = instance_.phi.transpose() * instance_.phi;
    phi_t_y_ = instance_.phi.transpose() * instance_.y;
    y_sq_ = instance_.y.squaredNorm();
  }
}

AmpResult AmpSolver::run(const Eigen::VectorXd& z, double t, int K,
                         const Eigen::VectorXd* warm_start, double warm_tau2) const {
  require(K >= 1, "amp_run: K must be at least 1");
  check_inputs(instance_, z, t);
  if (warm_start) {
    require(warm_start->size() == instance_.N, "amp_run: warm start has wrong length");
    require(std::isfinite(warm_tau2) && warm_tau2 > 0.0, "amp_run: warm start needs tau2 > 0");
  }
  return uses_gram() ? run_gram(z, t, K, warm_start, warm_tau2)
                     : run_direct(z, t, K, warm_start, warm_tau2);
}

double AmpSolver::next_tau2(double tau2, double t, double residual_sq) const {
  (void)residual_sq;
  return recursion_tau2(instance_, denoiser_, tau2, t);
}

AmpResult AmpSolver::run_direct(const Eigen::VectorXd& z, double t, int K,
                                const Eigen::VectorXd* warm, double warm_tau2) const {
  AmpState state = amp_init(instance_, denoiser_, z, t);
  if (warm) {
    state.m_hat = *warm;
    state.r = instance_.y - instance_.phi * state.m_hat;
    state.tau2 = warm_tau2;
  }
  const double M = static_cast<double>(instance_.M);
  auto row = [&](const AmpState& s) {
    const double rr = s.r.squaredNorm();
    return AmpTraceRow{s.k, options_.empirical_tau ? rr / M : s.tau2, std::sqrt(rr),
                       empirical_mse(instance_, s.m_hat)};
  };

  AmpResult result;
  result.trace.reserve(K + 1);
  result.trace.push_back(row(state));
  for (int k = 0; k < K; ++k) {
    const double tau_before = state.tau2;
    state = amp_step(std::move(state), instance_, denoiser_, options_);
    result.trace.push_back(row(state));
    if (options_.early_stop_tol > 0.0 && std::abs(state.tau2 - tau_before) < options_.early_stop_tol) {
      break;
    }
  }
  result.iterations = state.k;
  result.tau2 = state.tau2;
  result.m_hat = std::move(state.m_hat);
  return result;
}

AmpResult AmpSolver::run_gram(const Eigen::VectorXd& z, double t, int K,
                              const Eigen::VectorXd* warm, double warm_tau2) const {
  const ModelInstance& inst = instance_;
  const double M = static_cast<double>(inst.M);

  // s = phi^T r, rr = ||r||^2, yr = y^T r.
  Eigen::VectorXd m, s;
  double rr, yr, tau2;
  if (warm) {
    m = *warm;
    const Eigen::VectorXd gm = gram_ * m;
    s = phi_t_y_ - gm;
    rr = std::max(0.0, y_sq_ - 2.0 * phi_t_y_.dot(m) + m.dot(gm));
    yr = y_sq_ - phi_t_y_.dot(m);
    tau2 = warm_tau2;
  } else {
    m = Eigen::VectorXd::Zero(inst.N);
    s = phi_t_y_;
    rr = yr = y_sq_;
    tau2 = initial_tau2(inst, denoiser_);
  }

  AmpResult result;
  result.trace.reserve(K + 1);
  auto push_row = [&](int k) {
    result.trace.push_back(AmpTraceRow{k, options_.empirical_tau ? rr / M : tau2, std::sqrt(rr),
                                       empirical_mse(inst, m)});
  };
  push_row(0);

  Eigen::VectorXd u(inst.N), m_next(inst.N), gm(inst.N);
  int k = 0;
  while (k < K) {
    if (options_.empirical_tau) tau2 = rr / M;
    if (!(std::isfinite(tau2) && tau2 > 0.0)) throw DivergenceError("amp", k, "tau2");

    u.noalias() = s + m;
    check_finite(u, k + 1, "effective observation");
    const double b = denoiser_.apply(u, tau2, z, t, m_next) / inst.alpha;
    check_finite(m_next, k + 1, "m_hat");

    gm.noalias() = gram_ * m_next;
    const double err_sq = y_sq_ - 2.0 * phi_t_y_.dot(m_next) + m_next.dot(gm);
    const double err_dot_r = yr - m_next.dot(s);
    rr = std::max(0.0, err_sq + 2.0 * b * err_dot_r + b * b * rr);
    yr = y_sq_ - phi_t_y_.dot(m_next) + b * yr;
    s = phi_t_y_ - gm + b * s;
    check_finite(s, k + 1, "residual");
    m.swap(m_next);

    const double tau_before = tau2;
    tau2 = next_tau2(tau2, t, rr);
    if (!std::isfinite(tau2)) throw DivergenceError("amp", k + 1, "tau2");
    ++k;
    push_row(k);
    if (options_.early_stop_tol > 0.0 && std::abs(tau2 - tau_before) < options_.early_stop_tol) {
      break;
    }
  }
  result.iterations = k;
  result.tau2 = tau2;
  result.m_hat = std::move(m);
  return result;
}

AmpResult amp_run(const ModelInstance& instance, const ScalarDenoiser& denoiser,
                  const Eigen::VectorXd& z, double t, int K, const AmpOptions& options) {
  return AmpSolver(instance, denoiser, options).run(z, t, K);
}

std::vector<double> tau_sequence(const ScalarDenoiser& den, double alpha, double delta, double t,
                                 int K) {
  require(K >= 0, "tau_sequence: K must be non-negative");
  require(alpha > 0.0 && delta >= 0.0 && t >= 0.0, "tau_sequence: bad parameters");
  std::vector<double> taus;
  taus.reserve(K + 1);
  double tau2 = (delta + den.prior().second_moment()) / alpha;
  taus.push_back(tau2);
  for (int k = 0; k < K; ++k) {
    tau2 = (delta + den.mmse_two_channel(1.0 / tau2, t)) / alpha;
    taus.push_back(tau2);
  }
  return taus;
}

void write_amp_trace_csv(std::ostream& os, const std::vector<AmpTraceRow>& trace) {
  os << "k,tau2,residual_norm,empirical_mse\n" << std::setprecision(12);
  for (const AmpTraceRow& r : trace) {
    os << r.k << ',' << r.tau2 << ',' << r.residual_norm << ',';
    if (!std::isnan(r.empirical_mse)) os << r.empirical_mse;
    os << '\n';
  }
}

}  // namespace locamp
