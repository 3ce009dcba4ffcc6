#include "braidopt/cost.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

namespace braidopt {

namespace {

double hermiticity_deviation(const Eigen::Matrix4cd& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

}  // namespace

double trace_distance(const Eigen::Matrix4cd& sigma,
                      const Eigen::Matrix4cd& rho, bool* used_generalized) {
  if (used_generalized) *used_generalized = false;
  const Eigen::Matrix4cd diff = sigma - rho;
  const double scale = std::max(1.0, diff.cwiseAbs().maxCoeff());
  if (hermiticity_deviation(diff) > 1e-10 * scale) {
    if (used_generalized) *used_generalized = true;
    return generalized_cost(sigma, rho);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(diff,
                                                     Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

double generalized_cost(const Eigen::Matrix4cd& sigma,
                        const Eigen::Matrix4cd& rho) {
  const Eigen::Matrix4cd diff = sigma - rho;
  Eigen::JacobiSVD<Eigen::Matrix4cd> svd(diff);
  return 0.5 * svd.singularValues().sum();
}

HermitianSqrt hermitian_sqrt_inverse(const Eigen::Matrix4cd& m,
                                     double eps_reg) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if (hermiticity_deviation(m) > 1e-9 * scale)
    throw std::domain_error("hermitian_sqrt_inverse: input not Hermitian");

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(m);
  if (es.eigenvalues().minCoeff() < -1e-6 * scale)
    throw std::domain_error(
        "hermitian_sqrt_inverse: input not positive semidefinite");

  Eigen::Vector4d s, sinv;
  for (int k = 0; k < 4; ++k) {
    s(k) = std::sqrt(std::max(0.0, es.eigenvalues()(k)));
    sinv(k) = s(k) >= eps_reg ? 1.0 / s(k) : 0.0;
  }
  const Eigen::Matrix4cd v = es.eigenvectors();
  HermitianSqrt out;
  out.sqrt = v * s.asDiagonal() * v.adjoint();
  out.pinv_sqrt = v * sinv.asDiagonal() * v.adjoint();
  return out;
}

CostGradient cost_gradient(const Eigen::Matrix4cd& sigma,
                           const Eigen::Matrix4cd& rho, double eps_reg) {
  const double scale = std::max(1.0, rho.cwiseAbs().maxCoeff());
  if (hermiticity_deviation(rho) > 1e-9 * scale)
    throw std::domain_error("cost_gradient: rho must be Hermitian");

  const Eigen::Matrix4cd diff = sigma - rho;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> esd(diff,
                                                      Eigen::EigenvaluesOnly);
  if (esd.eigenvalues().cwiseAbs().maxCoeff() < eps_reg)
    throw SingularGradientError(
        "cost_gradient: rho equals sigma within the regularization floor; "
        "the cost is at its (non-differentiable) minimum");

  const HermitianSqrt hs = hermitian_sqrt_inverse(diff * diff, eps_reg);
  const Eigen::Matrix4cd& s = hs.pinv_sqrt;
  const Eigen::Matrix4cd ds = diff * s;
  const Eigen::Matrix4cd sd = s * diff;

  const std::complex<double> quarter_i(0.0, 0.25);
  CostGradient g;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      // tr(A S) = (D S)_{ij} + (S D)_{ji}; tr(B S) = -(D S)_{ij} + (S D)_{ji}
      const std::complex<double> tr_as = ds(i, j) + sd(j, i);
      const std::complex<double> tr_bs = -ds(i, j) + sd(j, i);
      g.wrt_real(i, j) = (-0.25 * tr_as).real();
      g.wrt_imag(i, j) = (-quarter_i * tr_bs).real();
    }
  }
  return g;
}

}  // namespace braidopt
