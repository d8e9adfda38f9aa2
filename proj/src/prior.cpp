#include "locamp/prior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "locamp/error.hpp"
#include "locamp/quadrature.hpp"

namespace locamp {

Prior Prior::discrete(std::vector<Atom> atoms) {
  require(!atoms.empty(), "discrete prior: no atoms");
  double total = 0.0;
  for (const Atom& a : atoms) {
    require(std::isfinite(a.value), "discrete prior: non-finite atom value");
    require(std::isfinite(a.probability) && a.probability >= 0.0,
            "discrete prior: probabilities must be non-negative");
    total += a.probability;
  }
  require(std::abs(total - 1.0) <= 1e-12, "discrete prior: probabilities must sum to 1");
  std::erase_if(atoms, [](const Atom& a) { return a.probability == 0.0; });
  for (Atom& a : atoms) a.probability /= total;

  Prior p;
  p.kind_ = PriorKind::discrete;
  p.atoms_ = std::move(atoms);
  p.bound_ = 0.0;
  for (const Atom& a : p.atoms_) p.bound_ = std::max(p.bound_, std::abs(a.value));
  p.finalize_moments();
  return p;
}

Prior Prior::rademacher() { return discrete({{-1.0, 0.5}, {1.0, 0.5}}); }

Prior Prior::gaussian(double mean, double variance) {
  require(std::isfinite(mean), "gaussian prior: non-finite mean");
  require(std::isfinite(variance) && variance >= 0.0,
          "gaussian prior: variance must be finite and non-negative");
  Prior p;
  p.kind_ = PriorKind::gaussian;
  p.gauss_mean_ = mean;
  p.gauss_var_ = variance;
  p.bound_ = std::numeric_limits<double>::infinity();
  p.mean_ = mean;
  p.variance_ = variance;
  p.second_moment_ = mean * mean + variance;
  return p;
}

Prior Prior::bounded_density(double bound, std::function<double(double)> density, int nodes) {
  require(static_cast<bool>(density), "bounded_density prior: empty density");
  require(std::isfinite(bound) && bound > 0.0, "bounded_density prior: bound must be positive");
  const QuadratureTable rule = gauss_legendre(nodes, -bound, bound);
  std::vector<double> samples(rule.size());
  for (std::size_t i = 0; i < rule.size(); ++i) samples[i] = density(rule.nodes[i]);
  Prior p = bounded_density_table(bound, std::move(samples));
  p.density_ = std::make_shared<const std::function<double(double)>>(std::move(density));
  return p;
}

Prior Prior::bounded_density_table(double bound, std::vector<double> density_at_nodes) {
  require(std::isfinite(bound) && bound > 0.0, "bounded_density prior: bound must be positive");
  require(density_at_nodes.size() >= 2, "bounded_density prior: table needs at least 2 nodes");
  const QuadratureTable rule =
      gauss_legendre(static_cast<int>(density_at_nodes.size()), -bound, bound);
  double total = 0.0;
  for (double f : density_at_nodes) {
    require(std::isfinite(f) && f >= 0.0, "bounded_density prior: density must be non-negative");
  }
  for (std::size_t i = 0; i < rule.size(); ++i) total += rule.weights[i] * density_at_nodes[i];
  require(total > 0.0, "bounded_density prior: density integrates to zero");

  Prior p;
  p.kind_ = PriorKind::bounded_density;
  p.bound_ = bound;
  p.atoms_.reserve(rule.size());
  for (std::size_t i = 0; i < rule.size(); ++i) {
    p.atoms_.push_back({rule.nodes[i], rule.weights[i] * density_at_nodes[i] / total});
  }
  p.density_samples_ = std::move(density_at_nodes);
  p.finalize_moments();
  return p;
}

Prior Prior::uniform(double bound, int nodes) {
  return bounded_density(bound, [](double) { return 1.0; }, nodes);
}

void Prior::finalize_moments() {
  double m = 0.0, m2 = 0.0;
  for (const Atom& a : atoms_) {
    m += a.probability * a.value;
    m2 += a.probability * a.value * a.value;
  }
  double var = 0.0;
  for (const Atom& a : atoms_) var += a.probability * (a.value - m) * (a.value - m);
  mean_ = m;
  second_moment_ = m2;
  variance_ = var;
}

nlohmann::json Prior::to_json() const {
  nlohmann::json j;
  switch (kind_) {
    case PriorKind::discrete: {
      j["kind"] = "discrete";
      auto arr = nlohmann::json::array();
      for (const Atom& a : atoms_) arr.push_back({a.value, a.probability});
      j["atoms"] = arr;
      break;
    }
    case PriorKind::gaussian:
      j["kind"] = "gaussian";
      j["mean"] = gauss_mean_;
      j["var"] = gauss_var_;
      break;
    case PriorKind::bounded_density:
      j["kind"] = "bounded_density";
      j["bound"] = bound_;
      j["table"] = density_samples_;
      break;
  }
  return j;
}

Prior Prior::from_json(const nlohmann::json& j) {
  require(j.is_object() && j.contains("kind"), "prior config: missing 'kind'");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "rademacher") return rademacher();
  if (kind == "gaussian") {
    return gaussian(j.value("mean", 0.0), j.value("var", j.value("variance", 1.0)));
  }
  if (kind == "discrete") {
    require(j.contains("atoms") && j["atoms"].is_array(), "discrete prior: missing 'atoms'");
    std::vector<Atom> atoms;
    for (const auto& a : j["atoms"]) {
      if (a.is_array()) {
        require(a.size() == 2, "discrete prior: atoms must be [value, probability]");
        atoms.push_back({a[0].get<double>(), a[1].get<double>()});
      } else {
        atoms.push_back({a.at("value").get<double>(), a.at("probability").get<double>()});
      }
    }
    return discrete(std::move(atoms));
  }
  if (kind == "bounded_density") {
    const double bound = j.value("bound", 1.0);
    if (j.contains("table")) {
      return bounded_density_table(bound, j["table"].get<std::vector<double>>());
    }
    const std::string shape = j.value("shape", "uniform");
    require(shape == "uniform", "bounded_density prior: unknown shape '" + shape + "'");
    return uniform(bound, j.value("nodes", 201));
  }
  throw InvalidArgument("prior config: unknown kind '" + kind + "'");
}

std::string Prior::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case PriorKind::discrete:
      os << "discrete{";
      for (std::size_t i = 0; i < atoms_.size(); ++i) {
        os << (i ? ", " : "") << "(" << atoms_[i].value << ", " << atoms_[i].probability << ")";
      }
      os << "}";
      break;
    case PriorKind::gaussian:
      os << "gaussian(" << gauss_mean_ << ", " << gauss_var_ << ")";
      break;
    case PriorKind::bounded_density:
      os << "bounded_density(L=" << bound_ << ", nodes=" << atoms_.size() << ")";
      break;
  }
  return os.str();
}

namespace {

std::size_t pick(const std::vector<double>& cumulative, double u) {
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  return std::min<std::size_t>(it - cumulative.begin(), cumulative.size() - 1);
}

}  // namespace

Eigen::VectorXd sample_prior(const Prior& prior, Eigen::Index n, Rng& rng) {
  require(n >= 1, "sample_prior: n must be positive");
  Eigen::VectorXd out(n);
  switch (prior.kind()) {
    case PriorKind::gaussian: {
      const double sd = std::sqrt(prior.gaussian_variance());
      for (Eigen::Index i = 0; i < n; ++i) out[i] = prior.gaussian_mean() + sd * rng.normal();
      return out;
    }
    case PriorKind::discrete: {
      std::vector<double> cumulative;
      double acc = 0.0;
      for (const Atom& a : prior.atoms()) cumulative.push_back(acc += a.probability);
      for (Eigen::Index i = 0; i < n; ++i) {
        out[i] = prior.atoms()[pick(cumulative, rng.uniform() * acc)].value;
      }
      return out;
    }
    case PriorKind::bounded_density: {
      // Piecewise-linear density through (-L, f_0), (x_i, f_i), (L, f_last).
      const double L = prior.support_bound();
      std::vector<double> xs{-L}, fs;
      const auto* f = prior.density();
      const auto samples = prior.density_samples();
      fs.push_back(f ? (*f)(-L) : samples.front());
      for (std::size_t i = 0; i < samples.size(); ++i) {
        xs.push_back(prior.atoms()[i].value);
        fs.push_back(samples[i]);
      }
      xs.push_back(L);
      fs.push_back(f ? (*f)(L) : samples.back());

      std::vector<double> cumulative;
      double acc = 0.0;
      for (std::size_t s = 0; s + 1 < xs.size(); ++s) {
        acc += 0.5 * (fs[s] + fs[s + 1]) * (xs[s + 1] - xs[s]);
        cumulative.push_back(acc);
      }
      for (Eigen::Index i = 0; i < n; ++i) {
        const std::size_t s = pick(cumulative, rng.uniform() * acc);
        const double h = xs[s + 1] - xs[s];
        const double a = fs[s], b = fs[s + 1];
        const double u = rng.uniform();
        // Inverse CDF of the linear density a + (b - a) x / h on [0, h].
        double x;
        if (std::abs(b - a) <= 1e-14 * std::max(a, b)) {
          x = u * h;
        } else {
          const double slope = (b - a) / h;
          const double mass = 0.5 * (a + b) * h;
          x = (-a + std::sqrt(std::max(0.0, a * a + 2.0 * slope * u * mass))) / slope;
        }
        out[i] = std::clamp(xs[s] + x, -L, L);
      }
      return out;
    }
  }
  return out;
}

}  // namespace locamp
