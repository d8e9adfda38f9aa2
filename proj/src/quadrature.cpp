#include "locamp/quadrature.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "locamp/error.hpp"

namespace locamp {
namespace {

// Orthonormal three-term recurrence p_{k+1} = ((x - a_k) p_k - b_k p_{k-1}) / b_{k+1}
// with a_k = 0 (both rules used here are symmetric). offdiag[k] = b_{k+1}.
//
// Nodes come from the Jacobi matrix eigenvalues (Golub-Welsch), polished with a
// few Newton steps on p_n; weights are the Christoffel numbers 1 / sum_k p_k(x)^2
// scaled by the total mass mu0.
QuadratureTable symmetric_gauss_rule(const std::vector<double>& offdiag, double mu0) {
  const int n = static_cast<int>(offdiag.size());
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd sub(n - 1);
  for (int k = 0; k + 1 < n; ++k) sub[k] = offdiag[k];

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& guesses = solver.eigenvalues();

  // Evaluates p_n(x), p_n'(x) and sum_{k<n} p_k(x)^2.
  auto evaluate = [&](double x, double& pn, double& dpn, double& christoffel) {
    double p_prev = 0.0, p = 1.0 / std::sqrt(mu0);
    double d_prev = 0.0, d = 0.0;
    christoffel = p * p;
    for (int k = 0; k < n; ++k) {
      const double b_prev = k == 0 ? 0.0 : offdiag[k - 1];
      const double p_next = (x * p - b_prev * p_prev) / offdiag[k];
      const double d_next = (p + x * d - b_prev * d_prev) / offdiag[k];
      p_prev = p;
      p = p_next;
      d_prev = d;
      d = d_next;
      if (k + 1 < n) christoffel += p * p;
    }
    pn = p;
    dpn = d;
  };

  QuadratureTable table;
  table.nodes.resize(n);
  table.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = guesses[i];
    double pn, dpn, c;
    for (int it = 0; it < 3; ++it) {
      evaluate(x, pn, dpn, c);
      if (dpn == 0.0) break;
      x -= pn / dpn;
    }
    evaluate(x, pn, dpn, c);
    table.nodes[i] = x;
    table.weights[i] = 1.0 / c;
  }
  // Exact symmetry.
  for (int i = 0; i < n / 2; ++i) {
    const double x = 0.5 * (table.nodes[n - 1 - i] - table.nodes[i]);
    const double w = 0.5 * (table.weights[n - 1 - i] + table.weights[i]);
    table.nodes[i] = -x;
    table.nodes[n - 1 - i] = x;
    table.weights[i] = table.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) table.nodes[n / 2] = 0.0;
  return table;
}

}  // namespace

QuadratureTable gauss_hermite_normal(int n) {
  require(n >= 1, "gauss_hermite_normal: need at least one node");
  if (n == 1) return {{0.0}, {1.0}};
  // Probabilists' Hermite polynomials: b_k = sqrt(k).
  std::vector<double> offdiag(n);
  for (int k = 0; k < n; ++k) offdiag[k] = std::sqrt(static_cast<double>(k + 1));
  QuadratureTable table = symmetric_gauss_rule(offdiag, 1.0);
  double total = 0.0;
  for (double w : table.weights) total += w;
  for (double& w : table.weights) w /= total;
  return table;
}

QuadratureTable gauss_legendre(int n, double a, double b) {
  require(n >= 1, "gauss_legendre: need at least one node");
  require(b > a, "gauss_legendre: empty interval");
  QuadratureTable table;
  if (n == 1) {
    table = {{0.0}, {2.0}};
  } else {
    std::vector<double> offdiag(n);
    for (int k = 0; k < n; ++k) {
      const double m = k + 1.0;
      offdiag[k] = m / std::sqrt(4.0 * m * m - 1.0);
    }
    table = symmetric_gauss_rule(offdiag, 2.0);
  }
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  for (std::size_t i = 0; i < table.size(); ++i) {
    table.nodes[i] = mid + half * table.nodes[i];
    table.weights[i] *= half;
  }
  return table;
}

}  // namespace locamp
