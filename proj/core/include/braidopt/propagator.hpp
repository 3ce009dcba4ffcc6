#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "braidopt/model.hpp"

namespace braidopt {

using Matrix16cd = Eigen::Matrix<std::complex<double>, 16, 16>;
using Vector16cd = Eigen::Matrix<std::complex<double>, 16, 1>;

// Column-stacking vectorization, used consistently for rho and the costate.
Vector16cd vectorize(const Eigen::Matrix4cd& m);
Eigen::Matrix4cd unvectorize(const Vector16cd& v);

// Generator of the noise-averaged master equation,
//   d(rho)/dt = sum_j { i Delta_j [rho, O_j]
//                       - (W^2/2) Delta_j^2 [[rho, O_j], O_j] },
// acting on the column-stacked density matrix.  Units of inverse time.
struct Superoperator {
  Matrix16cd K;
  ControlVector control;
  double w_squared = 0.0;
};

// Throws std::domain_error for out-of-bounds control or negative w_squared.
Superoperator generator(const ControlVector& ctrl, double w_squared);

// exp(K dt).  For w_squared == 0 this uses the closed form
// exp(-iH dt) = cos(r dt) - i sin(r dt) H / r with r = |Delta| (the O_j
// anticommute and square to the identity); otherwise scaling-and-squaring on
// the 16x16 generator.
Matrix16cd segment_exponential(const ControlVector& ctrl, double w_squared,
                               double dt);

// Backward costate step exp(-K(-W^2) dt): the costate obeys the master
// equation with the sign of the double-commutator dissipator flipped.
Matrix16cd costate_segment_exponential(const ControlVector& ctrl,
                                       double w_squared, double dt);

// One segment of evolution: unvec(exp(K dt) vec(rho)).  Requires dt > 0.
Eigen::Matrix4cd step(const Eigen::Matrix4cd& rho, const ControlVector& ctrl,
                      double w_squared, double dt);

// States at segment boundaries; states.size() == segments.size() + 1.
struct Trajectory {
  std::vector<double> times;
  std::vector<Eigen::Matrix4cd> states;
};

// Ordered left-application of the per-segment exponentials to rho0.  When
// `trajectory` is non-null it receives the boundary states.
Eigen::Matrix4cd propagate(const Protocol& protocol, NoiseStrength w,
                           const Eigen::Matrix4cd& rho0,
                           Trajectory* trajectory = nullptr);

// Backward propagation of the costate from Pi(tau), applying
// exp(-K_n(-W^2) dt_n) in reverse segment order.  Returns Pi at all segment
// boundaries in ascending time order.
Trajectory propagate_costate(const Protocol& protocol, NoiseStrength w,
                             const Eigen::Matrix4cd& pi_tau);

std::uint64_t protocol_fingerprint(const Protocol& protocol);

// Fast single-segment-edit cost evaluation for the annealer: per-segment
// exponentials and prefix states are cached so a candidate cost needs one
// fresh 16x16 exponential plus one matrix-vector chain instead of a full
// re-propagation.
class SweepCostCache {
 public:
  SweepCostCache(Protocol protocol, NoiseStrength w, Eigen::Matrix4cd rho0,
                 Eigen::Matrix4cd sigma);

  const Protocol& protocol() const { return protocol_; }
  std::uint64_t fingerprint() const { return fingerprint_; }
  double current_cost() const { return cost_; }

  // Cost after replacing one segment's control; the cache is not modified.
  double candidate_cost(std::size_t segment, const ControlVector& ctrl) const;

  // Commit a control replacement and update exponentials and prefix states.
  void accept(std::size_t segment, const ControlVector& ctrl);

  // Full recomputation from scratch (drift guard).
  void rebuild();

 private:
  Protocol protocol_;
  double w2_ = 0.0;
  Eigen::Matrix4cd rho0_;
  Eigen::Matrix4cd sigma_;
  std::vector<Matrix16cd> exps_;    // exp(K_n dt_n) per segment
  std::vector<Vector16cd> prefix_;  // prefix_[n] = vec(rho) after n segments
  double cost_ = 0.0;
  std::uint64_t fingerprint_ = 0;
};

// Contract-checking entry point: verifies that `protocol` matches the state
// the cache was built for (throws std::logic_error on a stale cache), then
// returns the candidate cost.
double cached_sweep_cost(const SweepCostCache& cache, const Protocol& protocol,
                         std::size_t segment, const ControlVector& ctrl);

}  // namespace braidopt
