#include "locamp/denoiser.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "locamp/error.hpp"

namespace locamp {

namespace {
constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934;
}  // namespace

EffectiveChannel effective_channel(double u, double sigma2, double z, double t) {
  if (!(std::isfinite(sigma2) && sigma2 > 0.0)) {
    throw InvalidArgument("denoiser: Sigma^2 must be finite and positive");
  }
  if (!(std::isfinite(t) && t >= 0.0)) {
    throw InvalidArgument("denoiser: t must be finite and non-negative");
  }
  if (!std::isfinite(u) || (t > 0.0 && !std::isfinite(z))) {
    throw InvalidArgument("denoiser: non-finite input");
  }
  const double inv = 1.0 / sigma2;
  if (t == 0.0) return {inv, u};
  const double precision = inv + t;
  return {precision, (u * inv + z) / precision};
}

ScalarDenoiser::ScalarDenoiser(Prior prior)
    : prior_(std::move(prior)), panel_(gauss_legendre(8, -1.0, 1.0)) {
  for (const Atom& a : prior_.atoms()) {
    values_.push_back(a.value);
    log_probs_.push_back(std::log(a.probability));
  }
  std::vector<std::size_t> order(values_.size());
  for (std::size_t a = 0; a < order.size(); ++a) order[a] = a;
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return values_[i] < values_[j]; });
  for (std::size_t a : order) {
    sorted_values_.push_back(values_[a]);
    sorted_log_probs_.push_back(log_probs_[a]);
  }
}

PosteriorMoments ScalarDenoiser::atom_posterior(double precision, double location) const {
  const std::size_t n = values_.size();
  if (n == 1) return {values_[0], 0.0};
  // log w_a = log p_a - precision (x_a - location)^2 / 2, normalized by log-sum-exp.
  double max_lw = -std::numeric_limits<double>::infinity();
  double lw_small[8];
  std::vector<double> lw_big;
  double* lw = lw_small;
  if (n > 8) {
    lw_big.resize(n);
    lw = lw_big.data();
  }
  for (std::size_t a = 0; a < n; ++a) {
    const double d = values_[a] - location;
    lw[a] = log_probs_[a] - 0.5 * precision * d * d;
    max_lw = std::max(max_lw, lw[a]);
  }
  double total = 0.0, first = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    lw[a] = std::exp(lw[a] - max_lw);
    total += lw[a];
    first += lw[a] * values_[a];
  }
  const double mean = first / total;
  double var = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    const double d = values_[a] - mean;
    var += lw[a] * d * d;
  }
  return {mean, var / total};
}

PosteriorMoments ScalarDenoiser::posterior(const EffectiveChannel& ch) const {
  if (prior_.is_gaussian()) {
    const double v0 = prior_.gaussian_variance();
    if (v0 == 0.0) return {prior_.gaussian_mean(), 0.0};
    const double post_precision = ch.precision + 1.0 / v0;
    return {(ch.precision * ch.location + prior_.gaussian_mean() / v0) / post_precision,
            1.0 / post_precision};
  }
  return atom_posterior(ch.precision, ch.location);
}

double ScalarDenoiser::eta(double u, double sigma2, double z, double t) const {
  return posterior(effective_channel(u, sigma2, z, t)).mean;
}

double ScalarDenoiser::eta_prime(double u, double sigma2, double z, double t) const {
  return posterior(effective_channel(u, sigma2, z, t)).variance / sigma2;
}

double ScalarDenoiser::apply(const Eigen::VectorXd& u, double sigma2, const Eigen::VectorXd& z,
                             double t, Eigen::VectorXd& out) const {
  if (u.size() != z.size()) throw InvalidArgument("eta_vector: u and z lengths differ");
  out.resize(u.size());
  double derivative_sum = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const PosteriorMoments pm = posterior(effective_channel(u[i], sigma2, z[i], t));
    out[i] = pm.mean;
    derivative_sum += pm.variance;
  }
  return u.size() ? derivative_sum / (sigma2 * static_cast<double>(u.size())) : 0.0;
}

Eigen::VectorXd ScalarDenoiser::eta_vector(const Eigen::VectorXd& u, double sigma2,
                                           const Eigen::VectorXd& z, double t) const {
  Eigen::VectorXd out;
  apply(u, sigma2, z, t, out);
  return out;
}

double ScalarDenoiser::mmse_star(double s) const {
  if (std::isnan(s) || s < 0.0) throw InvalidArgument("mmse_star: snr must be non-negative");
  if (std::isinf(s)) return 0.0;
  if (prior_.is_gaussian()) {
    const double v0 = prior_.gaussian_variance();
    return v0 / (1.0 + s * v0);
  }
  if (s == 0.0) return prior_.variance();
  constexpr double kWindow = 10.0;  // in noise sd
  constexpr double kReach = 40.0;   // atoms further away carry no weight
  const double sd = 1.0 / std::sqrt(s);
  const std::vector<double>& x = sorted_values_;
  const std::vector<double>& lp = sorted_log_probs_;
  const std::size_t n = x.size();

  // Observation windows around the atoms, merged where they overlap.
  std::vector<std::pair<double, double>> windows;
  for (double v : x) {
    if (!windows.empty() && v - kWindow * sd <= windows.back().second) {
      windows.back().second = v + kWindow * sd;
    } else {
      windows.emplace_back(v - kWindow * sd, v + kWindow * sd);
    }
  }
  // Switch points between neighbours, resolved with panels of width w / 2.
  std::vector<std::pair<double, double>> switches;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double gap = x[k + 1] - x[k];
    const double w = 1.0 / (s * gap);
    if (w >= 0.5 * sd) continue;
    switches.emplace_back(0.5 * (x[k] + x[k + 1]) + (lp[k] - lp[k + 1]) / (s * gap), w);
  }

  double acc = 0.0;
  std::vector<double> cuts, lw;
  for (const auto& [lo, hi] : windows) {
    cuts.clear();
    const int panels = static_cast<int>(std::ceil((hi - lo) / (0.5 * sd)));
    for (int i = 0; i <= panels; ++i) cuts.push_back(lo + (hi - lo) * i / panels);
    for (const auto& [center, w] : switches) {
      for (int j = -16; j <= 16; ++j) {
        const double o = center + 0.5 * w * j;
        if (o > lo && o < hi) cuts.push_back(o);
      }
    }
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      const double half = 0.5 * (cuts[i + 1] - cuts[i]), mid = 0.5 * (cuts[i + 1] + cuts[i]);
      if (half <= 0.0) continue;
      for (std::size_t j = 0; j < panel_.size(); ++j) {
        const double o = mid + half * panel_.nodes[j];
        const std::size_t first = static_cast<std::size_t>(
            std::lower_bound(x.begin(), x.end(), o - kReach * sd) - x.begin());
        const std::size_t last = static_cast<std::size_t>(
            std::upper_bound(x.begin(), x.end(), o + kReach * sd) - x.begin());
        if (first >= last) continue;
        lw.resize(last - first);
        double max_lw = -std::numeric_limits<double>::infinity();
        for (std::size_t a = first; a < last; ++a) {
          lw[a - first] = lp[a] - 0.5 * s * (x[a] - o) * (x[a] - o);
          max_lw = std::max(max_lw, lw[a - first]);
        }
        double total = 0.0, m1 = 0.0;
        for (std::size_t a = first; a < last; ++a) {
          lw[a - first] = std::exp(lw[a - first] - max_lw);
          total += lw[a - first];
          m1 += lw[a - first] * x[a];
        }
        const double mean = m1 / total;
        double var = 0.0;
        for (std::size_t a = first; a < last; ++a) {
          var += lw[a - first] * (x[a] - mean) * (x[a] - mean);
        }
        // p(o) Var(x | o), with p(o) = sum_a p_a N(o; x_a, 1/s).
        const double density = std::exp(max_lw) * total * kInvSqrt2Pi / sd;
        acc += half * panel_.weights[j] * density * (var / total);
      }
    }
  }
  return std::clamp(acc, 0.0, prior_.variance());
}

double ScalarDenoiser::mmse_two_channel(double s, double t) const {
  if (std::isnan(t) || t < 0.0) throw InvalidArgument("mmse_two_channel: t must be non-negative");
  if (std::isnan(s) || s < 0.0) throw InvalidArgument("mmse_two_channel: s must be non-negative");
  return mmse_star(s + t);
}

}  // namespace locamp
