#pragma once

#include <Eigen/Dense>

#include <stdexcept>

namespace braidopt {

inline constexpr double kDefaultEpsReg = 1e-10;

// Raised when the gate-error gradient is requested at (or numerically at) the
// cost minimum rho = sigma, where the cost is not differentiable.  The
// refinement loop treats this as convergence.
class SingularGradientError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Gate error C = (1/2) tr |sigma - rho| for Hermitian inputs.  Non-Hermitian
// input falls back to generalized_cost; `used_generalized`, when given,
// reports that the fallback was taken.
double trace_distance(const Eigen::Matrix4cd& sigma,
                      const Eigen::Matrix4cd& rho,
                      bool* used_generalized = nullptr);

// C = (1/2) tr sqrt((sigma - rho)^dag (sigma - rho)).  Real for arbitrary
// rho and equal to trace_distance whenever rho is Hermitian.
double generalized_cost(const Eigen::Matrix4cd& sigma,
                        const Eigen::Matrix4cd& rho);

struct HermitianSqrt {
  Eigen::Matrix4cd sqrt;       // principal square root
  Eigen::Matrix4cd pinv_sqrt;  // pseudo-inverse with spectral floor eps_reg
};

// Eigendecomposition-based square root of a Hermitian PSD matrix and the
// spectrally regularized pseudo-inverse of that square root: eigenvalues of
// sqrt(M) below eps_reg are projected out rather than inverted.
HermitianSqrt hermitian_sqrt_inverse(const Eigen::Matrix4cd& m,
                                     double eps_reg = kDefaultEpsReg);

// Derivatives of the generalized cost with respect to the real and imaginary
// parts of each density-matrix entry, all 16 entries treated as independent.
struct CostGradient {
  Eigen::Matrix4d wrt_real;
  Eigen::Matrix4d wrt_imag;
};

// dC/d(rho_R^ij) = -(1/4) tr{A [sqrt((sigma-rho)^2)]^-1} with
// A_{ab} = delta_{aj}(sigma-rho)_{ib} + (sigma-rho)_{ai} delta_{bj}, and the
// analogous B-matrix trace for the imaginary parts.  The inverse square root
// is regularized through hermitian_sqrt_inverse.  Throws
// SingularGradientError when sigma - rho vanishes to within eps_reg.
CostGradient cost_gradient(const Eigen::Matrix4cd& sigma,
                           const Eigen::Matrix4cd& rho,
                           double eps_reg = kDefaultEpsReg);

}  // namespace braidopt
