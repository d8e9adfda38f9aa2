#include "locamp/state_evolution.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

#include "locamp/error.hpp"
#include "locamp/parallel.hpp"

namespace locamp {
namespace {

constexpr double kFloor = 1e-300;

void check_parameters(double alpha, double delta, double t) {
  require(std::isfinite(alpha) && alpha > 0.0, "state evolution: alpha must be positive");
  require(std::isfinite(delta) && delta >= 0.0, "state evolution: delta must be non-negative");
  require(std::isfinite(t) && t >= 0.0, "state evolution: t must be non-negative");
}

std::vector<double> scan_grid(double v, int grid_size) {
  std::vector<double> grid;
  grid.reserve(2 * grid_size + 1);
  grid.push_back(0.0);
  for (int i = 1; i <= grid_size; ++i) grid.push_back(v * i / grid_size);
  const double lo = std::log(1e-12);
  for (int i = 0; i < grid_size; ++i) {
    grid.push_back(v * std::exp(lo - lo * i / (grid_size - 1)));
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

}  // namespace

double fixed_point_map(const ScalarDenoiser& den, double alpha, double delta, double t, double E) {
  // Noiseless and error-free: infinite SNR, so the map returns exactly 0.
  const double snr = delta + E > 0.0 ? alpha / (delta + E) : std::numeric_limits<double>::infinity();
  return den.mmse_two_channel(snr, t);
}

SeTrace se_iterate(const ScalarDenoiser& den, double alpha, double delta, double t, int K,
                   std::optional<double> E0, double tol) {
  check_parameters(alpha, delta, t);
  require(K >= 0, "se_iterate: K must be non-negative");
  SeTrace tr;
  tr.t = t;
  tr.delta = delta;
  tr.alpha = alpha;
  double E = E0.value_or(den.prior().second_moment());
  require(std::isfinite(E) && E >= 0.0, "se_iterate: E0 must be non-negative");
  tr.E_seq.push_back(E);
  for (int k = 0; k < K; ++k) {
    const double next = fixed_point_map(den, alpha, delta, t, E);
    tr.E_seq.push_back(next);
    const bool done = std::abs(next - E) < tol;
    E = next;
    if (done) {
      tr.converged = true;
      break;
    }
  }
  tr.E_inf = E;
  return tr;
}

FixedPointReport find_fixed_points(const ScalarDenoiser& den, double alpha, double delta, double t,
                                   int grid_size) {
  check_parameters(alpha, delta, t);
  require(grid_size >= 100, "find_fixed_points: grid_size must be at least 100");
  const double v = den.prior().second_moment();
  auto g = [&](double E) { return fixed_point_map(den, alpha, delta, t, E) - E; };

  FixedPointReport rep;
  rep.scan_resolution = grid_size;
  if (v == 0.0) {
    rep.fixed_points = {0.0};
    rep.unique = true;
    return rep;
  }

  const std::vector<double> grid = scan_grid(v, grid_size);
  std::vector<double> values(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) values[i] = g(grid[i]);

  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (values[i] == 0.0) {
      rep.fixed_points.push_back(grid[i]);
      continue;
    }
    if (i + 1 == grid.size() || values[i + 1] == 0.0) continue;
    if ((values[i] > 0.0) == (values[i + 1] > 0.0)) continue;
    double lo = grid[i], hi = grid[i + 1];
    const bool lo_positive = values[i] > 0.0;
    while (hi - lo > std::max(1e-12 * hi, kFloor)) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if ((g(mid) > 0.0) == lo_positive) lo = mid; else hi = mid;
    }
    rep.fixed_points.push_back(0.5 * (lo + hi));
  }

  for (double E : rep.fixed_points) rep.max_residual = std::max(rep.max_residual, std::abs(g(E)));
  rep.unique = rep.fixed_points.size() == 1;
  return rep;
}

DeltaAmpEstimate delta_amp(const ScalarDenoiser& den, double alpha, double delta_max,
                           double resolution, int scan_points, int grid_size) {
  require(std::isfinite(delta_max) && delta_max > 0.0, "delta_amp: delta_max must be positive");
  require(resolution > 0.0, "delta_amp: resolution must be positive");
  require(scan_points >= 1, "delta_amp: scan_points must be positive");
  auto unique_at = [&](double d) { return find_fixed_points(den, alpha, d, 0.0, grid_size).unique; };

  DeltaAmpEstimate est;
  if (!unique_at(0.0)) {
    est.lower = est.upper = 0.0;
    est.bounded = true;
    return est;
  }
  double last_unique = 0.0;
  for (int j = 1; j <= scan_points; ++j) {
    const double d = delta_max * j / scan_points;
    if (unique_at(d)) {
      last_unique = d;
      continue;
    }
    double lo = last_unique, hi = d;
    while (hi - lo > resolution) {
      const double mid = 0.5 * (lo + hi);
      if (unique_at(mid)) lo = mid; else hi = mid;
    }
    est.lower = lo;
    est.upper = hi;
    est.bounded = true;
    return est;
  }
  est.lower = delta_max;
  return est;
}

std::vector<PhaseCell> phase_diagram(const ScalarDenoiser& den, const std::vector<double>& alphas,
                                     const std::vector<double>& deltas,
                                     const std::vector<double>& ts, int grid_size,
                                     unsigned threads) {
  require(!alphas.empty() && !deltas.empty() && !ts.empty(), "phase_diagram: empty grid");
  std::vector<PhaseCell> cells;
  cells.reserve(alphas.size() * deltas.size() * ts.size());
  for (double a : alphas)
    for (double d : deltas)
      for (double t : ts) cells.push_back({a, d, t, {}, false});
  parallel_for(cells.size(), threads, [&](std::size_t i) {
    PhaseCell& c = cells[i];
    FixedPointReport rep = find_fixed_points(den, c.alpha, c.delta, c.t, grid_size);
    c.fixed_points = std::move(rep.fixed_points);
    c.unique = rep.unique;
  });
  return cells;
}

void write_phase_diagram_csv(std::ostream& os, const std::vector<PhaseCell>& cells) {
  std::size_t width = 1;
  for (const PhaseCell& c : cells) width = std::max(width, c.fixed_points.size());
  os << "alpha,delta,t,n_fixed_points";
  for (std::size_t j = 1; j <= width; ++j) os << ",E_" << j;
  os << ",unique\n" << std::setprecision(12);
  for (const PhaseCell& c : cells) {
    os << c.alpha << ',' << c.delta << ',' << c.t << ',' << c.fixed_points.size();
    for (std::size_t j = 0; j < width; ++j) {
      os << ',';
      if (j < c.fixed_points.size()) os << c.fixed_points[j];
    }
    os << ',' << (c.unique ? "true" : "false") << '\n';
  }
}

void write_se_trace_csv(std::ostream& os, const SeTrace& tr) {
  os << "k,E\n" << std::setprecision(15);
  for (std::size_t k = 0; k < tr.E_seq.size(); ++k) os << k << ',' << tr.E_seq[k] << '\n';
}

}  // namespace locamp
