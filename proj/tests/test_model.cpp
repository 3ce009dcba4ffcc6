#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unsupported/Eigen/MatrixFunctions>

#include "braidopt/cost.hpp"
#include "braidopt/model.hpp"
#include "oracles.hpp"

using namespace braidopt;
using oracles::operator""i;

namespace {
double max_abs(const Eigen::Matrix4cd& m) { return m.cwiseAbs().maxCoeff(); }
}  // namespace

TEST_CASE("basis operators match the Majorana bilinears") {
  const BasisOperators& ops = basis_operators();
  for (int j = 0; j < 3; ++j) {
    CAPTURE(j);
    CHECK(max_abs(ops[j] - oracles::majorana_bilinear(j + 1)) < 1e-15);
  }
}

TEST_CASE("basis operator structure") {
  const BasisOperators& ops = basis_operators();
  const Eigen::Matrix4cd id = Eigen::Matrix4cd::Identity();

  for (int j = 0; j < 3; ++j) {
    CAPTURE(j);
    CHECK(max_abs(ops[j] - ops[j].adjoint()) < 1e-15);  // Hermitian
    CHECK(max_abs(ops[j] * ops[j] - id) < 1e-15);       // squares to identity
  }
  // O1 purely imaginary, O2 and O3 purely real
  CHECK(ops.O1.real().cwiseAbs().maxCoeff() < 1e-15);
  CHECK(ops.O2.imag().cwiseAbs().maxCoeff() < 1e-15);
  CHECK(ops.O3.imag().cwiseAbs().maxCoeff() < 1e-15);

  // block-diagonal in the 2x2 parity blocks
  for (int j = 0; j < 3; ++j) {
    CHECK(ops[j].block<2, 2>(0, 2).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(ops[j].block<2, 2>(2, 0).cwiseAbs().maxCoeff() < 1e-15);
  }

  const Eigen::Vector4cd o3diag = ops.O3.diagonal();
  CHECK(o3diag(0) == -1.0);
  CHECK(o3diag(1) == 1.0);
  CHECK(o3diag(2) == -1.0);
  CHECK(o3diag(3) == 1.0);
}

TEST_CASE("basis operators pairwise anticommute") {
  const BasisOperators& ops = basis_operators();
  for (int a = 0; a < 3; ++a)
    for (int b = a + 1; b < 3; ++b)
      CHECK(max_abs(ops[a] * ops[b] + ops[b] * ops[a]) < 1e-15);
}

TEST_CASE("hamiltonian assembly") {
  CHECK(max_abs(hamiltonian({0, 0, 0})) == 0.0);
  CHECK(max_abs(hamiltonian({0, 0, 1}) - basis_operators().O3) < 1e-15);

  // linearity under scaling
  const ControlVector c{0.3, 0.7, 0.2};
  CHECK(max_abs(hamiltonian({0.15, 0.35, 0.1}) - 0.5 * hamiltonian(c)) <
        1e-15);

  // commutes with the parity operator
  Eigen::Matrix4cd parity = Eigen::Matrix4cd::Zero();
  parity.diagonal() << 1, 1, -1, -1;
  const Eigen::Matrix4cd h = hamiltonian(c);
  CHECK(max_abs(h * parity - parity * h) < 1e-15);

  CHECK_THROWS_AS(hamiltonian({1.2, 0, 0}), std::domain_error);
  CHECK_THROWS_AS(hamiltonian({0, -0.1, 0}), std::domain_error);
}

TEST_CASE("initial and target densities") {
  const Eigen::Matrix4cd rho0 = initial_density();
  const Eigen::Matrix4cd sigma = target_density();

  CHECK(std::abs(rho0.trace().real() - 1.0) < 1e-15);
  CHECK(std::abs((rho0 * rho0).trace().real() - 1.0) < 1e-15);
  CHECK(std::abs(sigma.trace().real() - 1.0) < 1e-15);
  CHECK(std::abs((sigma * sigma).trace().real() - 1.0) < 1e-15);

  CHECK(rho0(0, 0) == 0.5);
  CHECK(rho0(0, 2) == 0.5);
  CHECK(rho0(2, 0) == 0.5);
  CHECK(rho0(2, 2) == 0.5);
  CHECK(std::abs(sigma(0, 2) - (-0.5i)) < 1e-15);

  // identical diagonals; only the 1-3 coherence phase differs
  CHECK((rho0.diagonal() - sigma.diagonal()).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(std::abs(std::abs(rho0(0, 2)) - std::abs(sigma(0, 2))) < 1e-15);
}

TEST_CASE("braid unitary") {
  const Eigen::Matrix4cd u = braid_unitary();
  CHECK(max_abs(u.adjoint() * u - Eigen::Matrix4cd::Identity()) < 1e-15);
  CHECK(std::abs(std::abs(u(0, 0)) - 1.0) < 1e-15);
  CHECK(std::abs(u(2, 2) / u(0, 0) - 1i) < 1e-15);

  // equals exp((pi/4) g2 g1) built from the oracle gamma matrices
  const auto g = oracles::gamma_matrices();
  const Eigen::Matrix4cd expref = ((M_PI / 4.0) * (g[2] * g[1])).exp();
  CHECK(max_abs(u - expref) < 1e-14);

  // maps rho0 exactly onto the target
  const Eigen::Matrix4cd mapped = u * initial_density() * u.adjoint();
  CHECK(max_abs(mapped - target_density()) < 1e-15);
  CHECK(trace_distance(target_density(), mapped) < 1e-14);
}

TEST_CASE("linear adiabatic protocol") {
  const double tau = 30.0;
  const Protocol p = linear_adiabatic_protocol(tau, 0.02);
  p.validate();
  CHECK(p.size() == 1500);

  double sum = 0.0;
  for (const Segment& s : p.segments) sum += s.duration;
  CHECK(sum == doctest::Approx(tau).epsilon(1e-12));

  // the exact ramp passes through (1/2, 0, 1/2) at tau/6
  const ControlVector mid = control_at(p, tau / 6.0);
  CHECK(mid.d1 == doctest::Approx(0.5).epsilon(1e-3));
  CHECK(mid.d2 == 0.0);
  CHECK(mid.d3 == doctest::Approx(0.5).epsilon(1e-3));

  // endpoints approach (0,0,1) to within one grid cell of ramp
  const ControlVector first = p.segments.front().control;
  const ControlVector last = p.segments.back().control;
  CHECK(first.d3 > 1.0 - 3.0 * 0.02 / tau - 1e-12);
  CHECK(first.d1 < 3.0 * 0.02 / tau + 1e-12);
  CHECK(last.d3 > 1.0 - 3.0 * 0.02 / tau - 1e-12);

  CHECK_THROWS_AS(linear_adiabatic_protocol(1.0, 0.5), std::domain_error);
  CHECK_THROWS_AS(linear_adiabatic_protocol(-1.0, 0.02), std::domain_error);
}

TEST_CASE("random protocol determinism and bounds") {
  const Protocol a = random_protocol(2.0, 0.02, 42);
  const Protocol b = random_protocol(2.0, 0.02, 42);
  const Protocol c = random_protocol(2.0, 0.02, 43);
  REQUIRE(a.size() == b.size());
  bool identical = true, differs = false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    identical = identical && a.segments[k].control == b.segments[k].control;
    differs = differs || !(a.segments[k].control == c.segments[k].control);
    CHECK(a.segments[k].control.within_bounds());
  }
  CHECK(identical);
  CHECK(differs);
}

TEST_CASE("bang-bang protocol construction") {
  SUBCASE("degenerate pairs give the constant hold protocol") {
    const Protocol p = bangbang_protocol({0.3, 0.3, 0.9, 0.9, 1.1, 1.1}, 2.0);
    p.validate();
    for (const Segment& s : p.segments) {
      CHECK(s.control.d1 == 0.0);
      CHECK(s.control.d2 == 0.0);
      CHECK(s.control.d3 == 1.0);
    }
  }

  SUBCASE("switch counts and duration") {
    const Protocol p =
        bangbang_protocol({0.2, 1.0, 0.8, 1.7, 0.1, 1.9}, 2.0);
    p.validate();
    double sum = 0.0;
    for (const Segment& s : p.segments) sum += s.duration;
    CHECK(sum == doctest::Approx(2.0).epsilon(1e-14));

    for (int j = 0; j < 3; ++j) {
      int switches = 0;
      for (std::size_t k = 0; k + 1 < p.size(); ++k)
        if (p.segments[k].control[j] != p.segments[k + 1].control[j])
          ++switches;
      CHECK(switches <= 2);
    }
  }

  SUBCASE("errors") {
    CHECK_THROWS_AS(bangbang_protocol({0.5, 0.2, 0, 0, 0, 0}, 1.0),
                    std::domain_error);  // unordered pair
    CHECK_THROWS_AS(bangbang_protocol({0, 0, 0, 0, 0, 1.5}, 1.0),
                    std::domain_error);  // out of range
  }
}

TEST_CASE("protocol validation") {
  Protocol p = random_protocol(1.0, 0.1, 7);
  p.validate();

  Protocol bad_sum = p;
  bad_sum.total_time = 1.5;
  CHECK_THROWS_AS(bad_sum.validate(), std::invalid_argument);

  Protocol bad_ctrl = p;
  bad_ctrl.segments[3].control.d2 = 1.5;
  CHECK_THROWS_AS(bad_ctrl.validate(), std::invalid_argument);

  Protocol bad_dur = p;
  bad_dur.segments[0].duration = 0.0;
  CHECK_THROWS_AS(bad_dur.validate(), std::invalid_argument);
}

TEST_CASE("resample and hold extension") {
  const Protocol bb = bangbang_protocol({0.2, 1.0, 0.8, 1.7, 0.1, 1.9}, 2.0);
  const Protocol grid = resample_uniform(bb, 0.02);
  grid.validate();
  CHECK(grid.size() == 100);
  // midpoint sampling reproduces the exact-segment controls away from edges
  CHECK(control_at(grid, 0.5).d1 == 1.0);
  CHECK(control_at(grid, 1.5).d1 == 0.0);

  const Protocol longer = extend_with_hold(grid, 2.5);
  longer.validate();
  CHECK(longer.size() == 125);
  CHECK(longer.segments.back().control.d3 == 1.0);
  CHECK(longer.segments.back().control.d1 == 0.0);
}

TEST_CASE("noise strength type") {
  CHECK(NoiseStrength(0.5).squared() == 0.25);
  CHECK_THROWS_AS(NoiseStrength(-0.1), std::domain_error);
}
