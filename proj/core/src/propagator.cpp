#include "braidopt/propagator.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <complex>
#include <cstring>
#include <stdexcept>

#include "braidopt/cost.hpp"

namespace braidopt {

namespace {

using std::complex_literals::operator""i;

Matrix16cd kron4(const Eigen::Matrix4cd& a, const Eigen::Matrix4cd& b) {
  Matrix16cd out;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) out.block<4, 4>(4 * r, 4 * c) = a(r, c) * b;
  return out;
}

struct GeneratorBlocks {
  Matrix16cd commutator[3];  // i[rho, O_j] under vectorization
  Matrix16cd dissipator[3];  // (O_j^T (x) O_j) - 1, scaled by W^2 Delta_j^2
};

const GeneratorBlocks& blocks() {
  static const GeneratorBlocks b = [] {
    GeneratorBlocks g;
    const BasisOperators& ops = basis_operators();
    const Eigen::Matrix4cd id4 = Eigen::Matrix4cd::Identity();
    const Matrix16cd id16 = Matrix16cd::Identity();
    for (int j = 0; j < 3; ++j) {
      const Eigen::Matrix4cd& o = ops[j];
      g.commutator[j] =
          1i * (kron4(o.transpose(), id4) - kron4(id4, o));
      g.dissipator[j] = kron4(o.transpose(), o) - id16;
    }
    return g;
  }();
  return b;
}

Matrix16cd assemble(const ControlVector& ctrl, double commutator_sign,
                    double dissipator_w2) {
  const GeneratorBlocks& b = blocks();
  Matrix16cd k = Matrix16cd::Zero();
  for (int j = 0; j < 3; ++j) {
    const double d = ctrl[j];
    if (d != 0.0) k += (commutator_sign * d) * b.commutator[j];
    const double wdd = dissipator_w2 * d * d;
    if (wdd != 0.0) k += wdd * b.dissipator[j];
  }
  return k;
}

// exp(-iH t) for H = sum Delta_j O_j: the O_j pairwise anticommute and square
// to the identity, so H^2 = |Delta|^2 and the exponential is trigonometric.
Eigen::Matrix4cd unitary_exponential(const ControlVector& ctrl, double t) {
  const double r =
      std::sqrt(ctrl.d1 * ctrl.d1 + ctrl.d2 * ctrl.d2 + ctrl.d3 * ctrl.d3);
  if (r == 0.0) return Eigen::Matrix4cd::Identity();
  const Eigen::Matrix4cd h = ctrl.d1 * basis_operators().O1 +
                             ctrl.d2 * basis_operators().O2 +
                             ctrl.d3 * basis_operators().O3;
  return std::cos(r * t) * Eigen::Matrix4cd::Identity() -
         (1i * std::sin(r * t) / r) * h;
}

}  // namespace

Vector16cd vectorize(const Eigen::Matrix4cd& m) {
  return Eigen::Map<const Vector16cd>(m.data());
}

Eigen::Matrix4cd unvectorize(const Vector16cd& v) {
  return Eigen::Map<const Eigen::Matrix4cd>(v.data());
}

Superoperator generator(const ControlVector& ctrl, double w_squared) {
  if (!ctrl.within_bounds())
    throw std::domain_error("generator: control outside [0,1]^3");
  if (!(w_squared >= 0.0))
    throw std::domain_error("generator: w_squared must be >= 0");
  Superoperator s;
  s.control = ctrl;
  s.w_squared = w_squared;
  s.K = assemble(ctrl, +1.0, w_squared);
  return s;
}

Matrix16cd segment_exponential(const ControlVector& ctrl, double w_squared,
                               double dt) {
  if (w_squared == 0.0) {
    const Eigen::Matrix4cd u = unitary_exponential(ctrl, dt);
    return kron4(u.conjugate(), u);  // vec(U rho U+) = (conj(U) (x) U) vec(rho)
  }
  const Matrix16cd k = generator(ctrl, w_squared).K;
  return (k * dt).exp();
}

Matrix16cd costate_segment_exponential(const ControlVector& ctrl,
                                       double w_squared, double dt) {
  if (!ctrl.within_bounds())
    throw std::domain_error("costate exponential: control outside [0,1]^3");
  if (!(w_squared >= 0.0))
    throw std::domain_error("costate exponential: w_squared must be >= 0");
  if (w_squared == 0.0) {
    const Eigen::Matrix4cd u = unitary_exponential(ctrl, -dt);
    return kron4(u.conjugate(), u);
  }
  // -K(-W^2) = -sum_j Delta_j C_j + W^2 Delta_j^2 D_j
  const Matrix16cd k = assemble(ctrl, -1.0, w_squared);
  return (k * dt).exp();
}

Eigen::Matrix4cd step(const Eigen::Matrix4cd& rho, const ControlVector& ctrl,
                      double w_squared, double dt) {
  if (!(dt > 0.0)) throw std::domain_error("step: dt must be > 0");
  if (!ctrl.within_bounds())
    throw std::domain_error("step: control outside [0,1]^3");
  if (!(w_squared >= 0.0))
    throw std::domain_error("step: w_squared must be >= 0");
  return unvectorize(segment_exponential(ctrl, w_squared, dt) * vectorize(rho));
}

Eigen::Matrix4cd propagate(const Protocol& protocol, NoiseStrength w,
                           const Eigen::Matrix4cd& rho0,
                           Trajectory* trajectory) {
  protocol.validate();
  const double w2 = w.squared();
  Vector16cd v = vectorize(rho0);
  if (trajectory) {
    trajectory->times.assign(1, 0.0);
    trajectory->states.assign(1, rho0);
    trajectory->times.reserve(protocol.size() + 1);
    trajectory->states.reserve(protocol.size() + 1);
  }
  double t = 0.0;
  for (const Segment& s : protocol.segments) {
    v = segment_exponential(s.control, w2, s.duration) * v;
    t += s.duration;
    if (trajectory) {
      trajectory->times.push_back(t);
      trajectory->states.push_back(unvectorize(v));
    }
  }
  return unvectorize(v);
}

Trajectory propagate_costate(const Protocol& protocol, NoiseStrength w,
                             const Eigen::Matrix4cd& pi_tau) {
  protocol.validate();
  const double w2 = w.squared();
  const std::size_t n = protocol.size();

  Trajectory traj;
  traj.times.resize(n + 1);
  traj.states.resize(n + 1);
  double t = 0.0;
  traj.times[0] = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    t += protocol.segments[k].duration;
    traj.times[k + 1] = t;
  }

  Vector16cd v = vectorize(pi_tau);
  traj.states[n] = pi_tau;
  for (std::size_t k = n; k-- > 0;) {
    const Segment& s = protocol.segments[k];
    v = costate_segment_exponential(s.control, w2, s.duration) * v;
    traj.states[k] = unvectorize(v);
  }
  return traj;
}

std::uint64_t protocol_fingerprint(const Protocol& protocol) {
  // FNV-1a over the raw segment data
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](double x) {
    std::uint64_t bits;
    std::memcpy(&bits, &x, sizeof bits);
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xffu;
      h *= 1099511628211ull;
    }
  };
  mix(protocol.total_time);
  for (const Segment& s : protocol.segments) {
    mix(s.duration);
    mix(s.control.d1);
    mix(s.control.d2);
    mix(s.control.d3);
  }
  return h;
}

SweepCostCache::SweepCostCache(Protocol protocol, NoiseStrength w,
                               Eigen::Matrix4cd rho0, Eigen::Matrix4cd sigma)
    : protocol_(std::move(protocol)),
      w2_(w.squared()),
      rho0_(std::move(rho0)),
      sigma_(std::move(sigma)) {
  protocol_.validate();
  rebuild();
}

void SweepCostCache::rebuild() {
  const std::size_t n = protocol_.size();
  exps_.resize(n);
  prefix_.resize(n + 1);
  prefix_[0] = vectorize(rho0_);
  for (std::size_t k = 0; k < n; ++k) {
    const Segment& s = protocol_.segments[k];
    exps_[k] = segment_exponential(s.control, w2_, s.duration);
    prefix_[k + 1] = exps_[k] * prefix_[k];
  }
  cost_ = trace_distance(sigma_, unvectorize(prefix_[n]));
  fingerprint_ = protocol_fingerprint(protocol_);
}

double SweepCostCache::candidate_cost(std::size_t segment,
                                      const ControlVector& ctrl) const {
  const std::size_t n = protocol_.size();
  if (segment >= n)
    throw std::out_of_range("candidate_cost: segment index out of range");
  Vector16cd v =
      segment_exponential(ctrl, w2_, protocol_.segments[segment].duration) *
      prefix_[segment];
  for (std::size_t m = segment + 1; m < n; ++m) v = exps_[m] * v;
  return trace_distance(sigma_, unvectorize(v));
}

void SweepCostCache::accept(std::size_t segment, const ControlVector& ctrl) {
  const std::size_t n = protocol_.size();
  if (segment >= n)
    throw std::out_of_range("accept: segment index out of range");
  protocol_.segments[segment].control = ctrl;
  exps_[segment] = segment_exponential(
      ctrl, w2_, protocol_.segments[segment].duration);
  for (std::size_t m = segment; m < n; ++m)
    prefix_[m + 1] = exps_[m] * prefix_[m];
  cost_ = trace_distance(sigma_, unvectorize(prefix_[n]));
  fingerprint_ = protocol_fingerprint(protocol_);
}

double cached_sweep_cost(const SweepCostCache& cache, const Protocol& protocol,
                         std::size_t segment, const ControlVector& ctrl) {
  if (protocol_fingerprint(protocol) != cache.fingerprint())
    throw std::logic_error(
        "cached_sweep_cost: stale cache (protocol does not match the cached "
        "state)");
  return cache.candidate_cost(segment, ctrl);
}

}  // namespace braidopt
