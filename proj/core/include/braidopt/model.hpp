#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace braidopt {

// Basis convention used throughout: (|0>, d+|1>, |1>, d+|0>) where the Dirac
// modes are c = (g1 + i g2)/2 and d = (g0 + i g3)/2, |1> = c+|0>.  The first
// two states have even fermion parity, the last two odd.  All matrices are
// serialized row-major in this order.
struct BasisOperators {
  Eigen::Matrix4cd O1;  // 1 (x) sigma_y   (purely imaginary)
  Eigen::Matrix4cd O2;  // -sigma_z (x) sigma_x   (purely real)
  Eigen::Matrix4cd O3;  // -1 (x) sigma_z   (purely real, diagonal)

  const Eigen::Matrix4cd& operator[](int j) const;  // j = 0, 1, 2
};

const BasisOperators& basis_operators();

// Hybridization amplitudes (Delta_1, Delta_2, Delta_3), each constrained to
// [0, 1] in units of the maximum hybridization energy.
struct ControlVector {
  double d1 = 0.0;
  double d2 = 0.0;
  double d3 = 0.0;

  double operator[](int j) const { return j == 0 ? d1 : (j == 1 ? d2 : d3); }
  double& operator[](int j) { return j == 0 ? d1 : (j == 1 ? d2 : d3); }
  bool within_bounds() const {
    return d1 >= 0.0 && d1 <= 1.0 && d2 >= 0.0 && d2 <= 1.0 && d3 >= 0.0 &&
           d3 <= 1.0;
  }
  bool operator==(const ControlVector&) const = default;
};

struct Segment {
  double duration = 0.0;
  ControlVector control;
};

// Piecewise-constant control protocol.  Supports uniform grids (all segment
// durations equal) as well as exact-boundary segment lists for bang-bang
// representations.  The nominal boundary control (0,0,1) is carried as
// metadata only; optimizers do not constrain the first or last segment.
struct Protocol {
  std::vector<Segment> segments;
  double total_time = 0.0;
  std::array<double, 3> endpoint{0.0, 0.0, 1.0};
  std::map<std::string, std::string> metadata;

  std::size_t size() const { return segments.size(); }

  // Throws std::invalid_argument if durations are not positive, controls are
  // out of bounds, or durations do not sum to total_time (1e-12 relative).
  void validate() const;
};

// Noise amplitude W of the multiplicative white noise; W^2 carries units of
// inverse time.
class NoiseStrength {
 public:
  NoiseStrength() = default;
  explicit NoiseStrength(double w);
  double value() const { return w_; }
  double squared() const { return w_ * w_; }

 private:
  double w_ = 0.0;
};

struct StatePair {
  Eigen::Matrix4cd rho0;   // initial pure state
  Eigen::Matrix4cd sigma;  // adiabatic target
};

// H = Delta_1 O1 + Delta_2 O2 + Delta_3 O3.  Throws std::domain_error when
// the control is outside [0,1]^3.
Eigen::Matrix4cd hamiltonian(const ControlVector& ctrl);

// rho_0 = |psi_0><psi_0| with psi_0 = (|0> + |1>)/sqrt(2).
Eigen::Matrix4cd initial_density();

// sigma = (|0><0| - i|0><1| + i|1><0| + |1><1|)/2, i.e. the image of rho_0
// under the braid unitary.
Eigen::Matrix4cd target_density();

StatePair canonical_states();

// exp((pi/4) g2 g1) in the computational basis: acts as the identity on |0>
// and multiplies |1> by i, up to the overall phase exp(-i pi/4).
Eigen::Matrix4cd braid_unitary();

// Three equal legs of the standard exchange ramp,
// (0,0,1) -> (1,0,0) -> (0,1,0) -> (0,0,1), sampled at segment midpoints
// onto a uniform grid of step ~dt.  Requires 0 < dt <= tau/3.
Protocol linear_adiabatic_protocol(double tau, double dt);

// Each segment control drawn i.i.d. uniform on [0,1]^3 from a seeded
// deterministic generator.
Protocol random_protocol(double tau, double dt, std::uint64_t seed);

// Six-switch-time bang-bang ansatz on exact segment boundaries:
//   Delta_1 = 1 on [t1, t2] else 0,
//   Delta_2 = 1 on [t3, t4] else 0,
//   Delta_3 = 0 on [t5, t6] else 1.
// Requires 0 <= t_k <= tau and ordering within each pair.  Adjacent segments
// with equal controls are merged, so each channel switches at most twice.
Protocol bangbang_protocol(const std::array<double, 6>& t, double tau);

// Control value of an exact-segment protocol at absolute time tt (boundaries
// resolve to the later segment).
ControlVector control_at(const Protocol& protocol, double tt);

// Resample an arbitrary protocol onto a uniform grid of step ~dt, taking the
// control at each grid-cell midpoint.
Protocol resample_uniform(const Protocol& protocol, double dt);

// Append hold segments with the stationary control (0,0,1) until the total
// time reaches new_tau, reusing the protocol's uniform grid step.
Protocol extend_with_hold(const Protocol& protocol, double new_tau);

}  // namespace braidopt
