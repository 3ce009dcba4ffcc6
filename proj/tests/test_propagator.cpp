#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unsupported/Eigen/MatrixFunctions>

#include <random>

#include "braidopt/cost.hpp"
#include "braidopt/model.hpp"
#include "braidopt/propagator.hpp"
#include "oracles.hpp"

using namespace braidopt;
using oracles::operator""i;

namespace {

double max_abs(const Eigen::Matrix4cd& m) { return m.cwiseAbs().maxCoeff(); }

ControlVector random_control(std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return {u(gen), u(gen), u(gen)};
}

double purity(const Eigen::Matrix4cd& rho) {
  return (rho * rho).trace().real();
}

}  // namespace

TEST_CASE("generator basics") {
  CHECK(generator({0, 0, 0}, 0.3).K.cwiseAbs().maxCoeff() == 0.0);

  // rho0 is stationary under the hold control for any noise strength
  const Eigen::Matrix4cd rho0 = initial_density();
  for (double w2 : {0.0, 0.25}) {
    const Superoperator s = generator({0, 0, 1}, w2);
    CHECK((s.K * vectorize(rho0)).cwiseAbs().maxCoeff() < 1e-15);
  }

  CHECK_THROWS_AS(generator({0, 0, 1}, -0.1), std::domain_error);
  CHECK_THROWS_AS(generator({0, 0, 1.5}, 0.0), std::domain_error);
}

TEST_CASE("generator annihilates the trace functional") {
  // tr(rho) = <vec(1), vec(rho)>, so vec(1)^dag K must vanish
  std::mt19937_64 gen(21);
  const Vector16cd tr_vec = vectorize(Eigen::Matrix4cd::Identity());
  for (int k = 0; k < 10; ++k) {
    const Matrix16cd k16 = generator(random_control(gen), 0.2).K;
    CHECK((tr_vec.adjoint() * k16).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("generator agrees with the dense RK4 oracle") {
  std::mt19937_64 gen(22);
  for (int k = 0; k < 5; ++k) {
    const ControlVector c = random_control(gen);
    const double w2 = 0.16;
    const Eigen::Matrix4cd rho = oracles::random_density(gen);
    const Eigen::Matrix4cd via_exp = step(rho, c, w2, 0.05);
    const Eigen::Matrix4cd via_rk4 = oracles::rk4_evolve(rho, c, w2, 0.05);
    CHECK(max_abs(via_exp - via_rk4) < 1e-10);
  }
}

TEST_CASE("one short noisy step never raises purity") {
  std::mt19937_64 gen(23);
  for (int k = 0; k < 20; ++k) {
    const ControlVector c = random_control(gen);
    const Eigen::Matrix4cd rho = oracles::random_density(gen);
    const Eigen::Matrix4cd next = oracles::rk4_evolve(rho, c, 0.3, 1e-4, 1e-4);
    CHECK(purity(next) <= purity(rho) + 1e-14);
    // and the exponential path agrees with the oracle direction
    const Eigen::Matrix4cd next_exp = step(rho, c, 0.3, 1e-4);
    CHECK(max_abs(next - next_exp) < 1e-12);
  }
}

TEST_CASE("step preserves the stationary state and unitary purity") {
  const Eigen::Matrix4cd rho0 = initial_density();
  CHECK(max_abs(step(rho0, {0, 0, 1}, 0.25, 0.7) - rho0) < 1e-13);

  std::mt19937_64 gen(24);
  for (int k = 0; k < 10; ++k) {
    const ControlVector c = random_control(gen);
    const Eigen::Matrix4cd rho = oracles::random_density(gen);
    const Eigen::Matrix4cd next = step(rho, c, 0.0, 0.31);
    CHECK(std::abs(purity(next) - purity(rho)) < 1e-12);
  }

  CHECK_THROWS_AS(step(rho0, {0, 0, 1}, 0.0, 0.0), std::domain_error);
}

TEST_CASE("quarter-period rotation under O1 matches direct conjugation") {
  // exp(-i O1 pi/2) = -i O1 because O1 squares to the identity
  const Eigen::Matrix4cd o1 = basis_operators().O1;
  const Eigen::Matrix4cd u = -1i * o1;
  std::mt19937_64 gen(25);
  const Eigen::Matrix4cd rho = oracles::random_density(gen);
  const Eigen::Matrix4cd direct = u * rho * u.adjoint();
  CHECK(max_abs(step(rho, {1, 0, 0}, 0.0, M_PI / 2.0) - direct) < 1e-13);
}

TEST_CASE("segment exponential agrees with a step-halved reference") {
  std::mt19937_64 gen(26);
  std::uniform_real_distribution<double> uw(0.0, 0.5);
  for (int k = 0; k < 10; ++k) {
    const ControlVector c = random_control(gen);
    const double w = uw(gen);
    const double w2 = w * w;
    const Matrix16cd full = segment_exponential(c, w2, 0.02);
    const Matrix16cd half = segment_exponential(c, w2, 0.01);
    CHECK((full - half * half).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("noiseless fast path equals the generic exponential") {
  std::mt19937_64 gen(27);
  for (int k = 0; k < 5; ++k) {
    const ControlVector c = random_control(gen);
    const Matrix16cd closed = segment_exponential(c, 0.0, 0.37);
    const Matrix16cd generic = (generator(c, 0.0).K * 0.37).exp();
    CHECK((closed - generic).cwiseAbs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("propagate: empty protocol returns rho0") {
  Protocol empty;
  empty.total_time = 0.0;
  const Eigen::Matrix4cd rho0 = initial_density();
  CHECK(max_abs(propagate(empty, NoiseStrength(0.3), rho0) - rho0) == 0.0);
}

TEST_CASE("forward trajectories preserve trace, Hermiticity, positivity") {
  std::mt19937_64 gen(28);
  const Eigen::Matrix4cd rho0 = initial_density();
  for (double w : {0.0, 0.3}) {
    const Protocol p = random_protocol(1.5, 0.02, gen());
    Trajectory traj;
    propagate(p, NoiseStrength(w), rho0, &traj);
    REQUIRE(traj.states.size() == p.size() + 1);

    double last_purity = 2.0;
    for (const Eigen::Matrix4cd& rho : traj.states) {
      CHECK(std::abs(rho.trace().real() - 1.0) < 1e-12);
      CHECK(max_abs(rho - rho.adjoint()) < 1e-12);
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(
          rho, Eigen::EigenvaluesOnly);
      CHECK(es.eigenvalues().minCoeff() > -1e-10);
      if (w > 0.0) {
        CHECK(purity(rho) <= last_purity + 1e-10);  // purity monotone
        last_purity = purity(rho);
      }
    }
  }
}

TEST_CASE("parity block structure is preserved") {
  // seed an even-even block state; evolution must not leak into other blocks
  Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();
  rho(0, 0) = 0.7;
  rho(1, 1) = 0.3;
  rho(0, 1) = rho(1, 0) = 0.2;
  std::mt19937_64 gen(29);
  const Protocol p = random_protocol(0.8, 0.02, 31);
  const Eigen::Matrix4cd out = propagate(p, NoiseStrength(0.2), rho);
  CHECK(out.block<2, 2>(0, 2).cwiseAbs().maxCoeff() < 1e-13);
  CHECK(out.block<2, 2>(2, 0).cwiseAbs().maxCoeff() < 1e-13);

  // coherence-sector input stays in the coherence sector
  Eigen::Matrix4cd coh = Eigen::Matrix4cd::Zero();
  coh(0, 2) = 0.5;
  coh(2, 0) = 0.5;
  const Eigen::Matrix4cd out2 = propagate(p, NoiseStrength(0.2), coh);
  CHECK(out2.block<2, 2>(0, 0).cwiseAbs().maxCoeff() < 1e-13);
  CHECK(out2.block<2, 2>(2, 2).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("propagate agrees with the RK4 oracle across a protocol") {
  const Protocol p = random_protocol(0.4, 0.05, 77);
  const Eigen::Matrix4cd rho0 = initial_density();
  const double w = 0.4;
  const Eigen::Matrix4cd via_exp = propagate(p, NoiseStrength(w), rho0);
  const Eigen::Matrix4cd via_rk4 =
      oracles::rk4_evolve_protocol(rho0, p, w * w, 2e-5);
  CHECK(max_abs(via_exp - via_rk4) < 1e-9);
}

TEST_CASE("costate propagation") {
  std::mt19937_64 gen(30);
  const Protocol p = random_protocol(1.0, 0.05, 5);

  SUBCASE("forward-backward inverse consistency at w = 0") {
    const Eigen::Matrix4cd pi_tau = oracles::random_hermitian(gen);
    const Trajectory back = propagate_costate(p, NoiseStrength(0.0), pi_tau);
    REQUIRE(back.states.size() == p.size() + 1);
    // push Pi(0) forward with the costate flow exp(K(0) dt) segment by
    // segment; it must reproduce Pi(tau)
    Eigen::Matrix4cd pi = back.states.front();
    for (const Segment& s : p.segments)
      pi = step(pi, s.control, 0.0, s.duration);
    CHECK(max_abs(pi - pi_tau) < 1e-12);
  }

  SUBCASE("zero boundary stays zero") {
    const Trajectory back = propagate_costate(
        p, NoiseStrength(0.35), Eigen::Matrix4cd::Zero());
    for (const Eigen::Matrix4cd& m : back.states)
      CHECK(max_abs(m) == 0.0);
  }
}

TEST_CASE("sweep cost cache") {
  std::mt19937_64 gen(31);
  const StatePair st = canonical_states();
  const NoiseStrength w(0.2);
  Protocol p = random_protocol(1.2, 0.02, 9);
  SweepCostCache cache(p, w, st.rho0, st.sigma);

  SUBCASE("unchanged control reproduces the cached cost exactly") {
    const double c = cache.candidate_cost(7, p.segments[7].control);
    CHECK(c == cache.current_cost());
  }

  SUBCASE("matches brute-force single-segment edits") {
    std::uniform_int_distribution<std::size_t> pick(0, p.size() - 1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
      const std::size_t k = pick(gen);
      const ControlVector cand{u(gen), u(gen), u(gen)};
      const double fast = cached_sweep_cost(cache, p, k, cand);
      Protocol edited = p;
      edited.segments[k].control = cand;
      const double slow =
          trace_distance(st.sigma, propagate(edited, w, st.rho0));
      CHECK(std::abs(fast - slow) < 1e-10);
    }
  }

  SUBCASE("acceptance keeps subsequent queries consistent") {
    const ControlVector cand{0.9, 0.1, 0.4};
    const double predicted = cache.candidate_cost(3, cand);
    cache.accept(3, cand);
    p.segments[3].control = cand;
    CHECK(std::abs(cache.current_cost() - predicted) < 1e-12);
    const double again = cached_sweep_cost(cache, p, 11, p.segments[11].control);
    CHECK(std::abs(again - cache.current_cost()) < 1e-12);
  }

  SUBCASE("stale protocol is a usage error") {
    Protocol stale = p;
    stale.segments[2].control.d1 = 0.123456;
    CHECK_THROWS_AS(cached_sweep_cost(cache, stale, 0, ControlVector{}),
                    std::logic_error);
  }
}
