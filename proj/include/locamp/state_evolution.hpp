#pragma once

#include <iosfwd>
#include <limits>
#include <optional>
#include <vector>

#include "locamp/denoiser.hpp"

namespace locamp {

/// E_seq[k] is the predicted MSE of the k-th AMP iterate: E_seq[0] = E0
/// (v for the cold start m^(0) = 0) and
///   E_seq[k+1] = mmse*(alpha / (delta + E_seq[k]) + t),
/// so that alpha tau_k^2 - delta = E_seq[k].
struct SeTrace {
  double t = 0.0;
  double delta = 0.0;
  double alpha = 0.0;
  std::vector<double> E_seq;
  bool converged = false;
  double E_inf = 0.0;
};

/// Iterates until K steps or |E_{k+1} - E_k| < tol.
SeTrace se_iterate(const ScalarDenoiser& denoiser, double alpha, double delta, double t, int K,
                   std::optional<double> E0 = std::nullopt, double tol = 1e-12);

/// mmse*(alpha / (delta + E) + t); delta + E is floored at 1e-300.
double fixed_point_map(const ScalarDenoiser& denoiser, double alpha, double delta, double t,
                       double E);

struct FixedPointReport {
  std::vector<double> fixed_points;  // ascending
  bool unique = false;
  int scan_resolution = 0;
  double residual_tolerance = 1e-9;
  double max_residual = 0.0;
};

/// All sign changes of g(E) = fixed_point_map(E) - E on [0, v], each refined by
/// bisection. The scan uses `grid_size` uniform points plus `grid_size`
/// geometric points down to 1e-12 v, so roots close to zero are resolved.
/// A grid point where g is exactly zero (typically E = 0 when mmse*
/// underflows) counts as a root. Tangential roots without a sign change are
/// not detected.
FixedPointReport find_fixed_points(const ScalarDenoiser& denoiser, double alpha, double delta,
                                   double t, int grid_size = 2000);

/// Delta_AMP as the interval [lower, upper]: lower is the largest Delta known
/// to have a unique t = 0 fixed point for all grid Delta' <= Delta, upper the
/// first Delta known to violate it. `bounded` is false when no violation was
/// found up to delta_max (then upper is +infinity and the answer is
/// ">= delta_max").
struct DeltaAmpEstimate {
  double lower = 0.0;
  double upper = std::numeric_limits<double>::infinity();
  bool bounded = false;
};

DeltaAmpEstimate delta_amp(const ScalarDenoiser& denoiser, double alpha, double delta_max,
                           double resolution, int scan_points = 200, int grid_size = 2000);

struct PhaseCell {
  double alpha;
  double delta;
  double t;
  std::vector<double> fixed_points;
  bool unique;
};

/// One find_fixed_points per (alpha, delta, t) cell, ordered alpha-major then
/// delta then t. Cells are evaluated on `threads` workers (0 = all cores).
std::vector<PhaseCell> phase_diagram(const ScalarDenoiser& denoiser,
                                     const std::vector<double>& alpha_grid,
                                     const std::vector<double>& delta_grid,
                                     const std::vector<double>& t_grid, int grid_size = 2000,
                                     unsigned threads = 1);

/// Columns alpha, delta, t, n_fixed_points, E_1..E_n, unique, where n is the
/// largest count in the table (missing entries left empty).
void write_phase_diagram_csv(std::ostream& os, const std::vector<PhaseCell>& cells);

void write_se_trace_csv(std::ostream& os, const SeTrace& trace);

}  // namespace locamp
