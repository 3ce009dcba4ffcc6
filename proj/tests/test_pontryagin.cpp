#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "braidopt/cost.hpp"
#include "braidopt/model.hpp"
#include "braidopt/pontryagin.hpp"
#include "braidopt/propagator.hpp"
#include "oracles.hpp"

using namespace braidopt;

namespace {

ControlVector random_control(std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return {u(gen), u(gen), u(gen)};
}

// Pairing of Pi with an arbitrary velocity matrix,
// sum over entries of [Pi_R dR + Pi_I dI].
double pairing(const Eigen::Matrix4cd& pi, const Eigen::Matrix4cd& vel) {
  return pi.real().cwiseProduct(vel.real()).sum() +
         pi.imag().cwiseProduct(vel.imag()).sum();
}

}  // namespace

TEST_CASE("control Hamiltonian basics") {
  std::mt19937_64 gen(40);
  const Eigen::Matrix4cd rho = oracles::random_density(gen);
  const ControlVector c = random_control(gen);
  CHECK(control_hamiltonian(rho, Eigen::Matrix4cd::Zero(), c,
                            NoiseStrength(0.3)) == 0.0);
  const Eigen::Matrix4cd pi = oracles::random_hermitian(gen);
  CHECK(control_hamiltonian(rho, pi, {0, 0, 0}, NoiseStrength(0.3)) == 0.0);
}

TEST_CASE("control Hamiltonian equals the pairing with the master-equation "
          "velocity") {
  std::mt19937_64 gen(41);
  std::uniform_real_distribution<double> uw(0.0, 0.6);
  for (int k = 0; k < 20; ++k) {
    const Eigen::Matrix4cd rho = oracles::random_density(gen);
    Eigen::Matrix4cd pi = oracles::random_hermitian(gen);
    pi += 0.3 * (oracles::random_hermitian(gen) * std::complex<double>(0, 1));
    const ControlVector c = random_control(gen);
    const double w = uw(gen);
    const double h = control_hamiltonian(rho, pi, c, NoiseStrength(w));
    const Eigen::Matrix4cd vel =
        unvectorize(generator(c, w * w).K * vectorize(rho));
    CHECK(std::abs(h - pairing(pi, vel)) < 1e-12);
  }
}

TEST_CASE("switching functions from finite differences of H") {
  std::mt19937_64 gen(42);
  for (int k = 0; k < 20; ++k) {
    const Eigen::Matrix4cd rho = oracles::random_density(gen);
    const Eigen::Matrix4cd pi = oracles::random_hermitian(gen);
    const double w = 0.5;
    const NoiseStrength ns(w);
    const SwitchingFunctions fg = switching_functions(rho, pi);

    for (int j = 0; j < 3; ++j) {
      // H restricted to channel j is exactly F x + W^2 G x^2; recover F from
      // the centered first difference about x = h and 2 W^2 G from the second
      // difference.
      const double h = 1e-5;
      ControlVector x1{0, 0, 0}, x2{0, 0, 0};
      x1[j] = h;
      x2[j] = 2.0 * h;
      const double h0 = 0.0;
      const double h1 = control_hamiltonian(rho, pi, x1, ns);
      const double h2 = control_hamiltonian(rho, pi, x2, ns);
      const double second = (h2 - 2.0 * h1 + h0) / (h * h);
      const double g_fit = second / (2.0 * w * w);
      const double f_fit = (h2 - h0) / (2.0 * h) - 2.0 * h * (w * w) * g_fit;
      CHECK(std::abs(f_fit - fg.f[j]) <
            1e-6 * std::max(1.0, std::abs(fg.f[j])));
      CHECK(std::abs(g_fit - fg.g[j]) <
            1e-5 * std::max(1.0, std::abs(fg.g[j])));
    }
  }
}

TEST_CASE("F3 vanishes when rho and Pi are diagonal") {
  Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();
  rho.diagonal() << 0.4, 0.1, 0.3, 0.2;
  Eigen::Matrix4cd pi = Eigen::Matrix4cd::Zero();
  pi.diagonal() << 1.0, -0.5, 0.25, 0.0;
  const SwitchingFunctions fg = switching_functions(rho, pi);
  CHECK(std::abs(fg.f[2]) < 1e-15);
}

TEST_CASE("costate boundary") {
  const StatePair st = canonical_states();

  SUBCASE("finite and nonzero at rho0") {
    const Eigen::Matrix4cd pi = costate_boundary(st.rho0, st.sigma);
    CHECK(pi.allFinite());
    CHECK(pi.cwiseAbs().maxCoeff() > 1e-3);
  }

  SUBCASE("doubling the cost doubles the boundary costate") {
    // linearity of the gradient: the A/B traces scale with sigma - rho
    std::mt19937_64 gen(43);
    const Eigen::Matrix4cd rho = oracles::random_density(gen);
    const CostGradient g1 = cost_gradient(st.sigma, rho);
    // 2C corresponds to doubling both gradient matrices
    Eigen::Matrix4cd pi1 = costate_boundary(rho, st.sigma);
    const Eigen::Matrix4cd expected =
        2.0 * (g1.wrt_real.cast<std::complex<double>>() +
               std::complex<double>(0, 1) *
                   g1.wrt_imag.cast<std::complex<double>>());
    CHECK((2.0 * pi1 - expected).cwiseAbs().maxCoeff() < 1e-14);
  }

  SUBCASE("singular at the target") {
    CHECK_THROWS_AS(costate_boundary(st.sigma, st.sigma),
                    SingularGradientError);
  }
}

TEST_CASE("pointwise minimizer") {
  SUBCASE("noiseless bang rule") {
    CHECK(pointwise_minimizer(-0.3, 0.0, NoiseStrength(0.0)).delta == 1.0);
    CHECK(pointwise_minimizer(-0.3, 0.0, NoiseStrength(0.0)).branch ==
          Branch::UpperBang);
    CHECK(pointwise_minimizer(0.3, 0.0, NoiseStrength(0.0)).delta == 0.0);
    const PointwiseMinimum sing =
        pointwise_minimizer(1e-9, 0.0, NoiseStrength(0.0), 1e-6, 0.42);
    CHECK(sing.branch == Branch::Singular);
    CHECK(sing.delta == 0.42);
  }

  SUBCASE("interior candidate outside the box") {
    // W = 0.5, F = -1, G = +1: Delta^d = 2, so compare bounds only
    const PointwiseMinimum pm =
        pointwise_minimizer(-1.0, 1.0, NoiseStrength(0.5));
    CHECK(pm.delta == 1.0);
    CHECK(pm.branch == Branch::UpperBang);
  }

  SUBCASE("interior candidate wins") {
    // W = 0.5, F = -0.2, G = +1: Delta^d = 0.4, values {0, 0.05, -0.04}
    const PointwiseMinimum pm =
        pointwise_minimizer(-0.2, 1.0, NoiseStrength(0.5));
    CHECK(pm.delta == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(pm.branch == Branch::Continuous);
  }

  SUBCASE("argmin against an exhaustive scan") {
    std::mt19937_64 gen(44);
    std::normal_distribution<double> n(0.0, 1.0);
    std::uniform_real_distribution<double> uw(0.05, 0.6);
    for (int trial = 0; trial < 200; ++trial) {
      const bool noiseless = trial % 4 == 0;
      const double w = noiseless ? 0.0 : uw(gen);
      double f = n(gen);
      if (noiseless && std::abs(f) < 1e-5) f = 1e-5;  // skip singular flags
      const double g = n(gen);
      const PointwiseMinimum pm = pointwise_minimizer(f, g, NoiseStrength(w));
      const double w2 = w * w;
      const double v_ret = f * pm.delta + w2 * g * pm.delta * pm.delta;
      for (int s = 0; s <= 10000; ++s) {
        const double x = s * 1e-4;
        const double v = f * x + w2 * g * x * x;
        CHECK(v >= v_ret - 1e-9);
      }
    }
  }
}

TEST_CASE("evaluate_switching runs on arbitrary protocols") {
  const Protocol p = random_protocol(1.0, 0.05, 4);
  const SwitchingRecord rec = evaluate_switching(p, NoiseStrength(0.25));
  REQUIRE(rec.samples.size() == p.size());
  for (std::size_t k = 0; k < rec.samples.size(); ++k) {
    const SwitchingSample& s = rec.samples[k];
    for (int j = 0; j < 3; ++j) {
      CHECK(std::isfinite(s.f[j]));
      CHECK(std::isfinite(s.g[j]));
    }
    if (k > 0) CHECK(s.t > rec.samples[k - 1].t);
  }
}

TEST_CASE("H is constant along any constant-control trajectory") {
  // autonomous dynamics with a constant control: the pairing of the matched
  // forward/backward trajectories is time independent
  Protocol p;
  p.total_time = 2.0;
  for (int k = 0; k < 40; ++k) p.segments.push_back({0.05, {0.7, 0.2, 0.4}});
  const SwitchingRecord rec = evaluate_switching(p, NoiseStrength(0.3));
  double lo = rec.samples.front().hamiltonian;
  double hi = lo;
  for (const SwitchingSample& s : rec.samples) {
    lo = std::min(lo, s.hamiltonian);
    hi = std::max(hi, s.hamiltonian);
  }
  CHECK(hi - lo < 1e-10 * std::max(1.0, std::abs(hi)));
}

TEST_CASE("refinement contracts") {
  // a mildly-perturbed bang-bang start in regime II, noiseless
  const double tau = 2.0;
  Protocol p = resample_uniform(
      bangbang_protocol({0.35, 1.3, 0.9, 1.9, 0.15, 1.75}, tau), 0.02);
  const NoiseStrength w(0.0);

  const StatePair st = canonical_states();
  const double initial = trace_distance(st.sigma, propagate(p, w, st.rho0));

  auto [refined, rep] = refine(p, w);
  CHECK(rep.final_cost <= initial + 1e-12);
  CHECK(rep.final_cost <= rep.initial_cost + 1e-12);
  CHECK(rep.final_cost ==
        doctest::Approx(trace_distance(st.sigma, propagate(refined, w, st.rho0)))
            .epsilon(1e-12));

  // idempotence at the fixed point
  auto [again, rep2] = refine(refined, w);
  double max_change = 0.0;
  for (std::size_t k = 0; k < refined.size(); ++k)
    for (int j = 0; j < 3; ++j)
      max_change = std::max(max_change,
                            std::abs(again.segments[k].control[j] -
                                     refined.segments[k].control[j]));
  CHECK(max_change < 1e-8);
  CHECK(rep2.final_cost <= rep.final_cost + 1e-12);
}

TEST_CASE("verifier flags a corrupted protocol") {
  const double tau = 2.0;
  Protocol p = resample_uniform(
      bangbang_protocol({0.35, 1.3, 0.9, 1.9, 0.15, 1.75}, tau), 0.02);
  auto [refined, rep] = refine(p, NoiseStrength(0.0));
  REQUIRE(rep.final_cost < rep.initial_cost);

  // flip one interior segment of one channel
  Protocol corrupted = refined;
  const std::size_t mid = corrupted.size() / 2;
  corrupted.segments[mid].control.d1 =
      corrupted.segments[mid].control.d1 > 0.5 ? 0.0 : 1.0;
  const RefinementReport v = verify_optimality(corrupted, NoiseStrength(0.0));
  CHECK(v.violations >= 1);
}
