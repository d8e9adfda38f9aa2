#pragma once

#include <cstddef>
#include <vector>

namespace locamp {

/// Nodes and positive weights of a fixed quadrature rule. Immutable once built.
struct QuadratureTable {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }

  template <class F>
  double integrate(F&& f) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) acc += weights[i] * f(nodes[i]);
    return acc;
  }
};

/// Gauss-Hermite rule against the standard normal density: integrate(f) ~ E[f(Z)].
/// Weights sum to one.
QuadratureTable gauss_hermite_normal(int n);

/// Gauss-Legendre rule on [a, b] (weights sum to b - a).
QuadratureTable gauss_legendre(int n, double a, double b);

}  // namespace locamp
