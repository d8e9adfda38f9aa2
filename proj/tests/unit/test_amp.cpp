#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "locamp/amp.hpp"
#include "locamp/error.hpp"
#include "locamp/oracle.hpp"

using namespace locamp;

namespace {

ModelInstance instance(const Prior& p, Eigen::Index N, double alpha, double delta,
                       std::uint64_t seed) {
  Rng rng(seed);
  return generate_instance(p, N, alpha, delta, rng);
}

}  // namespace

TEST_CASE("amp_init") {
  const ModelInstance inst = instance(Prior::gaussian(0, 1), 100, 2.0, 0.01, 1);
  const ScalarDenoiser den(inst.prior);
  const AmpState s = amp_init(inst, den, Eigen::VectorXd::Zero(100), 0.0);
  CHECK(s.tau2 == doctest::Approx(0.505));
  CHECK(s.r == inst.y);
  CHECK(s.m_hat.norm() == 0.0);
  CHECK(s.b == 0.0);

  const ModelInstance noisy = instance(Prior::rademacher(), 100, 0.8, 1.0, 2);
  CHECK(amp_init(noisy, ScalarDenoiser(noisy.prior), Eigen::VectorXd::Zero(100), 0.0).tau2 ==
        doctest::Approx(2.5));
  CHECK_THROWS_AS(amp_init(noisy, ScalarDenoiser(noisy.prior), Eigen::VectorXd::Zero(3), 0.0),
                  InvalidArgument);
}

TEST_CASE("tau sequence") {
  const ScalarDenoiser g(Prior::gaussian(0, 1));
  const auto taus = tau_sequence(g, 2.0, 0.01, 0.0, 200);
  CHECK(taus[0] == doctest::Approx(0.505));
  // (0.01 + 1 / (1 + 1/0.505)) / 2
  CHECK(taus[1] == doctest::Approx(0.172774086378738).epsilon(1e-12));
  for (std::size_t k = 1; k < taus.size(); ++k) {
    CHECK(taus[k] <= taus[k - 1] + 1e-15);
    CHECK(taus[k] >= 0.01 / 2.0);
  }
  const double tau = taus.back();
  CHECK(std::abs(2.0 * tau - 0.01 - g.mmse_star(1.0 / tau)) < 1e-9);

  const ScalarDenoiser r(Prior::rademacher());
  CHECK(tau_sequence(r, 0.8, 0.01, 1e6, 1)[1] == doctest::Approx(0.01 / 0.8).epsilon(1e-6));
}

TEST_CASE("one iteration is a single denoising of phi^T y") {
  const ModelInstance inst = instance(Prior::rademacher(), 80, 0.7, 0.1, 5);
  const ScalarDenoiser den(inst.prior);
  Rng rng(6);
  const Eigen::VectorXd z = rng.normal_vector(80);
  const AmpResult res = amp_run(inst, den, z, 0.4, 1);
  const double tau0 = (0.1 + 1.0) / inst.alpha;
  const Eigen::VectorXd expect = den.eta_vector(inst.phi.transpose() * inst.y, tau0, z, 0.4);
  CHECK((res.m_hat - expect).norm() < 1e-14);
  CHECK(res.iterations == 1);
  CHECK(res.trace.size() == 2);
}

TEST_CASE("gaussian prior: AMP is the explicit linear recursion") {
  const ModelInstance inst = instance(Prior::gaussian(0, 1), 120, 2.0, 0.05, 7);
  const ScalarDenoiser den(inst.prior);
  Rng rng(8);
  const double t = 0.6;
  const Eigen::VectorXd z = std::sqrt(t) * rng.normal_vector(120) + t * inst.theta_true;

  // eta(u) = (u / tau2 + z) / p and eta' = 1 / (tau2 p), with p = 1 / tau2 + t + 1.
  Eigen::VectorXd m = Eigen::VectorXd::Zero(120), r = inst.y;
  double tau2 = (0.05 + 1.0) / inst.alpha;
  AmpState state = amp_init(inst, den, z, t);
  for (int k = 0; k < 30; ++k) {
    const double p = 1.0 / tau2 + t + 1.0;
    const Eigen::VectorXd m_next = ((inst.phi.transpose() * r + m) / tau2 + z) / p;
    const double b = (1.0 / p) / tau2 / inst.alpha;
    r = inst.y - inst.phi * m_next + b * r;
    m = m_next;
    tau2 = (0.05 + 1.0 / (1.0 / tau2 + t + 1.0)) / inst.alpha;
    state = amp_step(std::move(state), inst, den);
    CHECK((state.m_hat - m).norm() <= 1e-10 * std::max(1.0, m.norm()));
    CHECK(state.tau2 == doctest::Approx(tau2).epsilon(1e-13));
    CHECK(state.k == k + 1);
  }
}

TEST_CASE("gram-matrix path matches the direct iteration") {
  for (const Prior& p : {Prior::rademacher(), Prior::gaussian(0, 1), Prior::uniform(1.0, 41)}) {
    const ModelInstance inst = instance(p, 60, 2.5, 0.05, 9);
    const ScalarDenoiser den(p);
    Rng rng(10);
    const Eigen::VectorXd z = rng.normal_vector(60);
    for (bool empirical : {false, true}) {
      AmpOptions opt;
      opt.empirical_tau = empirical;
      const AmpSolver solver(inst, den, opt);
      REQUIRE(solver.uses_gram());
      const AmpResult fast = solver.run(z, 0.7, 25);
      AmpState s = amp_init(inst, den, z, 0.7);
      for (int k = 0; k < 25; ++k) s = amp_step(std::move(s), inst, den, opt);
      CHECK((fast.m_hat - s.m_hat).norm() <= 1e-9 * std::max(1.0, s.m_hat.norm()));
      CHECK(fast.trace.back().residual_norm == doctest::Approx(s.r.norm()).epsilon(1e-8));
    }
  }
}

TEST_CASE("symmetric zero input stays at zero") {
  ModelInstance inst = instance(Prior::rademacher(), 50, 0.8, 0.1, 11);
  inst.y.setZero();
  const ScalarDenoiser den(inst.prior);
  const AmpResult res = amp_run(inst, den, Eigen::VectorXd::Zero(50), 0.5, 20);
  CHECK(res.m_hat.norm() == 0.0);
}

TEST_CASE("bounded iterates and Onsager bound") {
  const ModelInstance inst = instance(Prior::uniform(1.0, 41), 200, 0.6, 0.2, 12);
  const ScalarDenoiser den(inst.prior);
  AmpState s = amp_init(inst, den, Eigen::VectorXd::Zero(200), 0.0);
  for (int k = 0; k < 10; ++k) {
    const double tau2 = s.tau2;
    s = amp_step(std::move(s), inst, den);
    CHECK(s.m_hat.cwiseAbs().maxCoeff() <= 1.0);
    CHECK(s.tau2 >= inst.delta / inst.alpha);
    CHECK(s.b >= 0.0);
    CHECK(s.b <= 1.0 / (tau2 * inst.alpha) + 1e-12);  // posterior variance <= L^2 = 1
  }
}

TEST_CASE("divergence is reported with the iteration") {
  ModelInstance inst = instance(Prior::gaussian(0, 1), 20, 1.0, 0.1, 13);
  inst.y[0] = NAN;
  const ScalarDenoiser den(inst.prior);
  try {
    amp_run(inst, den, Eigen::VectorXd::Zero(20), 0.0, 5);
    FAIL("expected a DivergenceError");
  } catch (const DivergenceError& e) {
    CHECK(e.iteration() == 1);
  }
}

TEST_CASE("early stopping and trace output") {
  const ModelInstance inst = instance(Prior::gaussian(0, 1), 100, 2.0, 0.01, 14);
  const ScalarDenoiser den(inst.prior);
  AmpOptions opt;
  opt.early_stop_tol = 1e-10;
  const AmpResult res = AmpSolver(inst, den, opt).run(Eigen::VectorXd::Zero(100), 0.0, 500);
  CHECK(res.iterations < 500);
  CHECK(res.trace.size() == static_cast<std::size_t>(res.iterations) + 1);
  std::ostringstream os;
  write_amp_trace_csv(os, res.trace);
  CHECK(os.str().rfind("k,tau2,residual_norm,empirical_mse\n0,", 0) == 0);
}

TEST_CASE("gaussian prior: AMP converges to the exact posterior mean") {
  const ModelInstance inst = instance(Prior::gaussian(0, 1), 200, 2.0, 0.01, 15);
  const ScalarDenoiser den(inst.prior);
  for (double t : {0.0, 1.0}) {
    Rng rng(16);
    const Eigen::VectorXd z = t * inst.theta_true + std::sqrt(t) * rng.normal_vector(200);
    const Eigen::VectorXd exact = exact_posterior_gaussian(inst, z, t, false).mean;
    const Eigen::VectorXd m = amp_run(inst, den, z, t, 100).m_hat;
    CHECK((m - exact).norm() / exact.norm() <= 1e-6);
  }
}

TEST_CASE("rademacher prior: iterates saturate at +-1") {
  const ModelInstance inst = instance(Prior::rademacher(), 1250, 0.8, 0.01, 15);
  const ScalarDenoiser den(inst.prior);
  const Eigen::VectorXd m = amp_run(inst, den, Eigen::VectorXd::Zero(1250), 0.0, 20).m_hat;
  CHECK((m.array().abs() >= 0.99).cast<double>().mean() >= 0.95);
}

TEST_CASE("empirical mse does not grow with K") {
  const ScalarDenoiser den(Prior::rademacher());
  std::vector<double> avg(16, 0.0);
  for (int s = 0; s < 20; ++s) {
    const ModelInstance inst = instance(Prior::rademacher(), 2000, 0.8, 0.01, 200 + s);
    const AmpResult r = AmpSolver(inst, den).run(Eigen::VectorXd::Zero(2000), 0.0, 15);
    for (int k = 0; k <= 15; ++k) avg[k] += r.trace[k].empirical_mse / 20.0;
  }
  for (int k = 1; k <= 15; ++k) CHECK(avg[k] <= avg[k - 1] + 0.01);
}
