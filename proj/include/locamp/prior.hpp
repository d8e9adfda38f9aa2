#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "locamp/rng.hpp"

namespace locamp {

struct Atom {
  double value;
  double probability;
};

enum class PriorKind { discrete, gaussian, bounded_density };

/// Scalar prior P_0 of a product prior on theta.
///
/// Discrete priors hold their atoms exactly. Bounded densities on [-L, L] are
/// stored as a Gauss-Legendre table (node, mass) so that every posterior
/// computation is a finite sum; the table is what gets serialized. Gaussian
/// priors are handled in closed form everywhere.
class Prior {
 public:
  static Prior discrete(std::vector<Atom> atoms);
  /// P_0 = (delta_{-1} + delta_{+1}) / 2.
  static Prior rademacher();
  static Prior gaussian(double mean, double variance);
  /// Density (not necessarily normalized) evaluated at `nodes` Gauss-Legendre
  /// points of [-bound, bound]. The callable is retained for reference
  /// integrations but is not part of the serialized form.
  static Prior bounded_density(double bound, std::function<double(double)> density,
                               int nodes = 201);
  /// Density values at the Gauss-Legendre nodes of [-bound, bound].
  static Prior bounded_density_table(double bound, std::vector<double> density_at_nodes);
  static Prior uniform(double bound, int nodes = 201);

  PriorKind kind() const { return kind_; }
  bool is_gaussian() const { return kind_ == PriorKind::gaussian; }
  bool bounded() const { return kind_ != PriorKind::gaussian; }

  /// Atoms of a discrete prior, or (node, mass) pairs of a density table.
  std::span<const Atom> atoms() const { return atoms_; }
  /// Density samples at the table nodes (bounded_density only).
  std::span<const double> density_samples() const { return density_samples_; }
  /// Retained density callable, or nullptr.
  const std::function<double(double)>* density() const { return density_.get(); }

  double gaussian_mean() const { return gauss_mean_; }
  double gaussian_variance() const { return gauss_var_; }

  /// L_theta; +infinity for the Gaussian kind.
  double support_bound() const { return bound_; }
  double mean() const { return mean_; }
  double variance() const { return variance_; }
  /// v = E[theta^2] per coordinate.
  double second_moment() const { return second_moment_; }

  nlohmann::json to_json() const;
  static Prior from_json(const nlohmann::json& j);
  std::string describe() const;

 private:
  Prior() = default;
  void finalize_moments();

  PriorKind kind_ = PriorKind::discrete;
  std::vector<Atom> atoms_;
  std::vector<double> density_samples_;
  std::shared_ptr<const std::function<double(double)>> density_;
  double gauss_mean_ = 0.0, gauss_var_ = 0.0;
  double bound_ = 0.0;
  double mean_ = 0.0, variance_ = 0.0, second_moment_ = 0.0;
};

/// n i.i.d. draws from P_0. Bounded densities are sampled from the piecewise
/// linear interpolant of the tabulated density, not from the table atoms.
Eigen::VectorXd sample_prior(const Prior& prior, Eigen::Index n, Rng& rng);

inline double prior_second_moment(const Prior& prior) { return prior.second_moment(); }

}  // namespace locamp
