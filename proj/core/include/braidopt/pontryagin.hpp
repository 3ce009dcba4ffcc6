#pragma once

#include <Eigen/Dense>

#include <array>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "braidopt/cost.hpp"
#include "braidopt/model.hpp"

namespace braidopt {

inline constexpr double kDefaultEpsSing = 1e-6;

// Coefficients of the optimal-control Hamiltonian
//   H = sum_j [ F_j Delta_j + W^2 G_j Delta_j^2 ],
// evaluated from the real/imaginary split of the matched state rho and
// costate Pi = Pi_R + i Pi_I.
struct SwitchingFunctions {
  std::array<double, 3> f;
  std::array<double, 3> g;
};

SwitchingFunctions switching_functions(const Eigen::Matrix4cd& rho,
                                       const Eigen::Matrix4cd& pi);

// H = sum over entries of [Pi_R d(rho_R)/dt + Pi_I d(rho_I)/dt], a quadratic
// polynomial in the control amplitudes.
double control_hamiltonian(const Eigen::Matrix4cd& rho,
                           const Eigen::Matrix4cd& pi,
                           const ControlVector& ctrl, NoiseStrength w);

// Pi(tau) assembled from the cost gradient as Pi_R + i Pi_I.  Propagates
// SingularGradientError when rho_tau equals sigma.
Eigen::Matrix4cd costate_boundary(const Eigen::Matrix4cd& rho_tau,
                                  const Eigen::Matrix4cd& sigma,
                                  double eps_reg = kDefaultEpsReg);

enum class Branch { LowerBang, UpperBang, Continuous, Singular };

const char* branch_name(Branch b);

struct PointwiseMinimum {
  double delta = 0.0;
  Branch branch = Branch::LowerBang;
};

// Minimizer of f*Delta + W^2 g*Delta^2 over Delta in [0,1].  At W = 0 this is
// the bang rule on sign(f); |f| < eps_sing is flagged singular and resolves
// to the incumbent when one is supplied (NaN otherwise).  For W > 0 the
// boundary values are compared with the interior stationary point
// Delta^d = -f / (2 W^2 g) when it lies inside [0,1].  Ties within 1e-12
// resolve to the incumbent.
PointwiseMinimum pointwise_minimizer(
    double f, double g, NoiseStrength w, double eps_sing = kDefaultEpsSing,
    double incumbent = std::numeric_limits<double>::quiet_NaN());

// One sample of the switching record, evaluated at a segment midpoint with
// matched forward (rho) and backward (Pi) trajectories.
struct SwitchingSample {
  double t = 0.0;
  std::array<double, 3> f{};
  std::array<double, 3> g{};
  std::array<double, 3> delta_d{};  // NaN where undefined (W = 0 or g = 0)
  std::array<double, 3> control{};  // the protocol's control on this segment
  std::array<Branch, 3> branch{};
  double hamiltonian = 0.0;  // H at the protocol's own control
};

struct SwitchingRecord {
  std::vector<SwitchingSample> samples;  // one per segment, ascending time
};

// Forward-propagates rho, seeds Pi(tau) from the cost gradient, propagates Pi
// backward, and evaluates F, G, Delta^d and the branch labels at every
// segment midpoint.  No optimality of the input is assumed.  Throws
// SingularGradientError (with advice that the protocol already attains the
// cost minimum) when the boundary gradient is singular.
SwitchingRecord evaluate_switching(const Protocol& protocol, NoiseStrength w,
                                   const StatePair& states,
                                   double eps_reg = kDefaultEpsReg,
                                   double eps_sing = kDefaultEpsSing);
SwitchingRecord evaluate_switching(const Protocol& protocol, NoiseStrength w);

struct RefineOptions {
  int max_iters = 200;
  double relaxation = 0.5;    // first damped fallback; full synthesis tried first
  double control_tol = 1e-8;  // stop when the max control change is below
  double cost_tol = 1e-12;    // or the accepted cost change is below
  double lambda_floor = 1e-4;
  double eps_reg = kDefaultEpsReg;
  double eps_sing = kDefaultEpsSing;
};

struct RefinementReport {
  int iterations = 0;
  double initial_cost = 0.0;
  double final_cost = 0.0;
  double max_control_change = 0.0;  // last accepted iteration
  bool converged = false;
  bool at_minimum = false;  // singular cost gradient encountered
  // Optimality residuals (filled by verify_optimality).
  int violations = 0;
  double max_min_excess = 0.0;
  double hamiltonian_constancy = 0.0;
  std::string message;
};

// Iterates synthesis of the pointwise-minimizing control from the switching
// record, blending toward it and backtracking on any cost increase.  The
// cost never increases; a fixed point of the iteration is an exact pointwise
// minimizer of the control Hamiltonian on the protocol's grid.
std::pair<Protocol, RefinementReport> refine(const Protocol& protocol,
                                             NoiseStrength w,
                                             const RefineOptions& options = {});
std::pair<Protocol, RefinementReport> refine(const Protocol& protocol,
                                             NoiseStrength w,
                                             const StatePair& states,
                                             const RefineOptions& options = {});

struct VerifyTolerances {
  double eps_sing = kDefaultEpsSing;
  double min_excess_tol = 1e-9;  // allowed excess of H over the pointwise min
  double eps_reg = kDefaultEpsReg;
};

// Checks at every segment midpoint that the protocol's control attains the
// pointwise minimum of H within tolerance (violations are report entries,
// not errors) and reports the relative constancy of H along the trajectory,
// excluding samples within one segment of a bang switch.
RefinementReport verify_optimality(const Protocol& protocol, NoiseStrength w,
                                   const VerifyTolerances& tols = {});
RefinementReport verify_optimality(const Protocol& protocol, NoiseStrength w,
                                   const StatePair& states,
                                   const VerifyTolerances& tols = {});

}  // namespace braidopt
