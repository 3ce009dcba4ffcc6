#include "braidopt/model.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>

namespace braidopt {

namespace {

using std::complex_literals::operator""i;

Eigen::Matrix4cd kron2(const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b) {
  Eigen::Matrix4cd out;
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) out.block<2, 2>(2 * r, 2 * c) = a(r, c) * b;
  return out;
}

BasisOperators build_basis() {
  Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();
  Eigen::Matrix2cd sx, sy, sz;
  sx << 0, 1, 1, 0;
  sy << 0, -1i, 1i, 0;
  sz << 1, 0, 0, -1;

  BasisOperators ops;
  ops.O1 = kron2(id, sy);
  ops.O2 = -kron2(sz, sx);
  ops.O3 = -kron2(id, sz);
  return ops;
}

}  // namespace

const Eigen::Matrix4cd& BasisOperators::operator[](int j) const {
  switch (j) {
    case 0:
      return O1;
    case 1:
      return O2;
    default:
      return O3;
  }
}

const BasisOperators& basis_operators() {
  static const BasisOperators ops = build_basis();
  return ops;
}

void Protocol::validate() const {
  double sum = 0.0;
  for (const Segment& s : segments) {
    if (!(s.duration > 0.0))
      throw std::invalid_argument("protocol: segment durations must be > 0");
    if (!s.control.within_bounds())
      throw std::invalid_argument("protocol: control outside [0,1]^3");
    sum += s.duration;
  }
  const double scale = std::max(1.0, std::abs(total_time));
  if (std::abs(sum - total_time) > 1e-12 * scale)
    throw std::invalid_argument(
        "protocol: segment durations do not sum to total_time");
}

NoiseStrength::NoiseStrength(double w) : w_(w) {
  if (!(w >= 0.0)) throw std::domain_error("noise strength must be >= 0");
}

Eigen::Matrix4cd hamiltonian(const ControlVector& ctrl) {
  if (!ctrl.within_bounds())
    throw std::domain_error("hamiltonian: control outside [0,1]^3");
  const BasisOperators& ops = basis_operators();
  return ctrl.d1 * ops.O1 + ctrl.d2 * ops.O2 + ctrl.d3 * ops.O3;
}

Eigen::Matrix4cd initial_density() {
  Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();
  rho(0, 0) = rho(0, 2) = rho(2, 0) = rho(2, 2) = 0.5;
  return rho;
}

Eigen::Matrix4cd target_density() {
  Eigen::Matrix4cd sigma = Eigen::Matrix4cd::Zero();
  sigma(0, 0) = sigma(2, 2) = 0.5;
  sigma(0, 2) = -0.5i;
  sigma(2, 0) = 0.5i;
  return sigma;
}

StatePair canonical_states() { return {initial_density(), target_density()}; }

Eigen::Matrix4cd braid_unitary() {
  // g2 g1 = i(2 n_c - 1) is diagonal in the computational basis, so the
  // exponential is the phase gate below.
  const std::complex<double> m = std::exp(-1i * (M_PI / 4.0));
  const std::complex<double> p = std::exp(1i * (M_PI / 4.0));
  Eigen::Matrix4cd u = Eigen::Matrix4cd::Zero();
  u(0, 0) = m;
  u(1, 1) = p;
  u(2, 2) = p;
  u(3, 3) = m;
  return u;
}

namespace {

ControlVector linear_ramp(double t, double tau) {
  const double s = 3.0 * t / tau;
  ControlVector c;
  if (s <= 1.0) {
    c.d3 = 1.0 - s;
    c.d1 = s;
  } else if (s <= 2.0) {
    c.d1 = 2.0 - s;
    c.d2 = s - 1.0;
  } else {
    c.d2 = 3.0 - s;
    c.d3 = s - 2.0;
  }
  c.d1 = std::clamp(c.d1, 0.0, 1.0);
  c.d2 = std::clamp(c.d2, 0.0, 1.0);
  c.d3 = std::clamp(c.d3, 0.0, 1.0);
  return c;
}

std::size_t grid_size(double tau, double dt) {
  return static_cast<std::size_t>(std::max<long long>(1, std::llround(tau / dt)));
}

}  // namespace

Protocol linear_adiabatic_protocol(double tau, double dt) {
  if (!(tau > 0.0)) throw std::domain_error("linear protocol: tau must be > 0");
  if (!(dt > 0.0 && dt <= tau / 3.0))
    throw std::domain_error("linear protocol: require 0 < dt <= tau/3");
  const std::size_t n = grid_size(tau, dt);
  const double step = tau / static_cast<double>(n);
  Protocol p;
  p.total_time = tau;
  p.segments.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double mid = (static_cast<double>(k) + 0.5) * step;
    p.segments.push_back({step, linear_ramp(mid, tau)});
  }
  return p;
}

Protocol random_protocol(double tau, double dt, std::uint64_t seed) {
  if (!(tau > 0.0)) throw std::domain_error("random protocol: tau must be > 0");
  const std::size_t n = grid_size(tau, dt);
  const double step = tau / static_cast<double>(n);
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Protocol p;
  p.total_time = tau;
  p.segments.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    ControlVector c;
    c.d1 = unit(gen);
    c.d2 = unit(gen);
    c.d3 = unit(gen);
    p.segments.push_back({step, c});
  }
  return p;
}

Protocol bangbang_protocol(const std::array<double, 6>& t, double tau) {
  if (!(tau > 0.0)) throw std::domain_error("bang-bang: tau must be > 0");
  for (double tk : t)
    if (!(tk >= 0.0 && tk <= tau))
      throw std::domain_error("bang-bang: switch times must lie in [0, tau]");
  for (int ch = 0; ch < 3; ++ch)
    if (t[2 * ch] > t[2 * ch + 1])
      throw std::domain_error(
          "bang-bang: switch pair unordered within a channel");

  std::vector<double> bounds{0.0, tau};
  bounds.insert(bounds.end(), t.begin(), t.end());
  std::sort(bounds.begin(), bounds.end());
  bounds.erase(std::unique(bounds.begin(), bounds.end()), bounds.end());

  Protocol p;
  p.total_time = tau;
  for (std::size_t k = 0; k + 1 < bounds.size(); ++k) {
    const double a = bounds[k], b = bounds[k + 1];
    if (!(b > a)) continue;
    const double mid = 0.5 * (a + b);
    ControlVector c;
    c.d1 = (mid > t[0] && mid < t[1]) ? 1.0 : 0.0;
    c.d2 = (mid > t[2] && mid < t[3]) ? 1.0 : 0.0;
    c.d3 = (mid > t[4] && mid < t[5]) ? 0.0 : 1.0;
    if (!p.segments.empty() && p.segments.back().control == c)
      p.segments.back().duration += b - a;
    else
      p.segments.push_back({b - a, c});
  }
  return p;
}

ControlVector control_at(const Protocol& protocol, double tt) {
  double acc = 0.0;
  for (const Segment& s : protocol.segments) {
    acc += s.duration;
    if (tt < acc) return s.control;
  }
  if (protocol.segments.empty())
    throw std::invalid_argument("control_at: empty protocol");
  return protocol.segments.back().control;
}

Protocol resample_uniform(const Protocol& protocol, double dt) {
  if (!(dt > 0.0)) throw std::domain_error("resample: dt must be > 0");
  const double tau = protocol.total_time;
  const std::size_t n = grid_size(tau, dt);
  const double step = tau / static_cast<double>(n);
  Protocol p;
  p.total_time = tau;
  p.endpoint = protocol.endpoint;
  p.segments.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double mid = (static_cast<double>(k) + 0.5) * step;
    p.segments.push_back({step, control_at(protocol, mid)});
  }
  return p;
}

Protocol extend_with_hold(const Protocol& protocol, double new_tau) {
  if (!(new_tau >= protocol.total_time))
    throw std::domain_error("extend_with_hold: new_tau below current total");
  if (protocol.segments.empty())
    throw std::invalid_argument("extend_with_hold: empty protocol");
  const double step = protocol.segments.front().duration;
  Protocol p = protocol;
  const auto extra = static_cast<std::size_t>(
      std::llround((new_tau - protocol.total_time) / step));
  const ControlVector hold{0.0, 0.0, 1.0};
  for (std::size_t k = 0; k < extra; ++k) p.segments.push_back({step, hold});
  p.total_time = new_tau;
  return p;
}

}  // namespace braidopt
