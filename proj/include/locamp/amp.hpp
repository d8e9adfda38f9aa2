#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "locamp/denoiser.hpp"
#include "locamp/instance.hpp"

namespace locamp {

struct AmpOptions {
  /// Use ||r||^2 / M instead of the deterministic tau recursion (diagnostics only).
  bool empirical_tau = false;
  /// Stop once |tau_{k+1}^2 - tau_k^2| < early_stop_tol. Zero disables.
  double early_stop_tol = 0.0;
};

/// Iterate k of Bayes-AMP at localization time t:
/// m_hat = m^(k), r = r^(k), tau2 = tau_{k,t}^2, b = b^(k) (the Onsager
/// coefficient that entered r^(k); zero at k = 0).
struct AmpState {
  int k = 0;
  Eigen::VectorXd m_hat;
  Eigen::VectorXd r;
  double tau2 = 0.0;
  double b = 0.0;
  double t = 0.0;
  Eigen::VectorXd z;
};

struct AmpTraceRow {
  int k;
  double tau2;
  double residual_norm;
  double empirical_mse;  // ||m^(k) - theta||^2 / N, NaN when theta is unknown
};

struct AmpResult {
  Eigen::VectorXd m_hat;
  std::vector<AmpTraceRow> trace;  // rows k = 0..iterations
  double tau2 = 0.0;               // tau_{K,t}^2
  int iterations = 0;
};

/// m^(0) = 0, r^(0) = y, b^(0) = 0, tau_0^2 = (delta + v) / alpha.
AmpState amp_init(const ModelInstance& instance, const ScalarDenoiser& denoiser,
                  const Eigen::VectorXd& z, double t);

/// One AMP iteration:
///   m^(k+1) = eta(phi^T r^(k) + m^(k); tau_k^2, z, t)
///   b^(k+1) = (1 / (N alpha)) sum_i eta'(phi^T r^(k) + m^(k); tau_k^2, z, t)_i
///   r^(k+1) = y - phi m^(k+1) + b^(k+1) r^(k)
///   tau_{k+1}^2 = (delta + mmse*(1 / tau_k^2 + t)) / alpha
/// Throws DivergenceError on any non-finite iterate.
AmpState amp_step(AmpState state, const ModelInstance& instance, const ScalarDenoiser& denoiser,
                  const AmpOptions& options = {});

/// Runs AMP repeatedly on one instance. When M > N the iteration is carried
/// out on the N x N Gram matrix (phi^T r is tracked instead of r), which is
/// algebraically identical and 2 alpha times cheaper per iteration.
class AmpSolver {
 public:
  AmpSolver(const ModelInstance& instance, const ScalarDenoiser& denoiser, AmpOptions options = {});

  /// K iterations from the cold start, or from `warm_start` (with tau_0^2
  /// taken from `warm_tau2`) when given.
  AmpResult run(const Eigen::VectorXd& z, double t, int K,
                const Eigen::VectorXd* warm_start = nullptr, double warm_tau2 = 0.0) const;

  bool uses_gram() const { return gram_.size() > 0; }
  const ModelInstance& instance() const { return instance_; }
  const ScalarDenoiser& denoiser() const { return denoiser_; }

 private:
  AmpResult run_direct(const Eigen::VectorXd& z, double t, int K, const Eigen::VectorXd* warm,
                       double warm_tau2) const;
  AmpResult run_gram(const Eigen::VectorXd& z, double t, int K, const Eigen::VectorXd* warm,
                     double warm_tau2) const;
  double next_tau2(double tau2, double t, double residual_sq) const;

  const ModelInstance& instance_;
  const ScalarDenoiser& denoiser_;
  AmpOptions options_;
  Eigen::MatrixXd gram_;  // phi^T phi, empty unless M > N
  Eigen::VectorXd phi_t_y_;
  double y_sq_ = 0.0;
};

/// K iterations of AMP from the cold start; returns m^(K) and per-iteration diagnostics.
AmpResult amp_run(const ModelInstance& instance, const ScalarDenoiser& denoiser,
                  const Eigen::VectorXd& z, double t, int K, const AmpOptions& options = {});

/// tau_{0,t}^2, ..., tau_{K,t}^2 from the deterministic recursion.
std::vector<double> tau_sequence(const ScalarDenoiser& denoiser, double alpha, double delta,
                                 double t, int K);

/// CSV columns: k, tau2, residual_norm, empirical_mse.
void write_amp_trace_csv(std::ostream& os, const std::vector<AmpTraceRow>& trace);

}  // namespace locamp
