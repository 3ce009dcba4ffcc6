#include "braidopt/pontryagin.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

#include "braidopt/propagator.hpp"

namespace braidopt {

namespace {

using std::complex_literals::operator""i;

double pair_sum(const Eigen::Matrix4d& a, const Eigen::Matrix4d& b) {
  return a.cwiseProduct(b).sum();
}

Eigen::Matrix4d comm(const Eigen::Matrix4d& a, const Eigen::Matrix4d& b) {
  return a * b - b * a;
}

}  // namespace

const char* branch_name(Branch b) {
  switch (b) {
    case Branch::LowerBang:
      return "lower";
    case Branch::UpperBang:
      return "upper";
    case Branch::Continuous:
      return "continuous";
    default:
      return "singular";
  }
}

SwitchingFunctions switching_functions(const Eigen::Matrix4cd& rho,
                                       const Eigen::Matrix4cd& pi) {
  const Eigen::Matrix4d rr = rho.real();
  const Eigen::Matrix4d ri = rho.imag();
  const Eigen::Matrix4d pr = pi.real();
  const Eigen::Matrix4d pim = pi.imag();

  const BasisOperators& ops = basis_operators();
  // O1 is purely imaginary; factor it as O1 = i * o1 with o1 real so every
  // pairing below stays in real arithmetic.
  const Eigen::Matrix4d o1 = ops.O1.imag();
  const Eigen::Matrix4d o2 = ops.O2.real();
  const Eigen::Matrix4d o3 = ops.O3.real();

  SwitchingFunctions out;
  // Imaginary-operator form: i[rho_X, O1] = -[rho_X, o1]
  out.f[0] = -pair_sum(pr, comm(rr, o1)) - pair_sum(pim, comm(ri, o1));
  // Real-operator form for O2, O3
  out.f[1] = -pair_sum(pr, comm(ri, o2)) + pair_sum(pim, comm(rr, o2));
  out.f[2] = -pair_sum(pr, comm(ri, o3)) + pair_sum(pim, comm(rr, o3));

  const double base = -pair_sum(pr, rr) - pair_sum(pim, ri);
  // O1 rho O1 = -(o1 rho o1) entrywise on the real and imaginary parts
  out.g[0] = base - pair_sum(pr, o1 * rr * o1) - pair_sum(pim, o1 * ri * o1);
  out.g[1] = base + pair_sum(pr, o2 * rr * o2) + pair_sum(pim, o2 * ri * o2);
  out.g[2] = base + pair_sum(pr, o3 * rr * o3) + pair_sum(pim, o3 * ri * o3);
  return out;
}

double control_hamiltonian(const Eigen::Matrix4cd& rho,
                           const Eigen::Matrix4cd& pi,
                           const ControlVector& ctrl, NoiseStrength w) {
  const SwitchingFunctions fg = switching_functions(rho, pi);
  const double w2 = w.squared();
  double h = 0.0;
  for (int j = 0; j < 3; ++j)
    h += fg.f[j] * ctrl[j] + w2 * fg.g[j] * ctrl[j] * ctrl[j];
  return h;
}

Eigen::Matrix4cd costate_boundary(const Eigen::Matrix4cd& rho_tau,
                                  const Eigen::Matrix4cd& sigma,
                                  double eps_reg) {
  const CostGradient g = cost_gradient(sigma, rho_tau, eps_reg);
  return g.wrt_real.cast<std::complex<double>>() +
         1i * g.wrt_imag.cast<std::complex<double>>();
}

PointwiseMinimum pointwise_minimizer(double f, double g, NoiseStrength w,
                                     double eps_sing, double incumbent) {
  const double w2 = w.squared();
  const bool has_incumbent = std::isfinite(incumbent);

  if (w2 == 0.0) {
    if (std::abs(f) < eps_sing) {
      return {has_incumbent ? incumbent
                            : std::numeric_limits<double>::quiet_NaN(),
              Branch::Singular};
    }
    return f > 0.0 ? PointwiseMinimum{0.0, Branch::LowerBang}
                   : PointwiseMinimum{1.0, Branch::UpperBang};
  }

  struct Cand {
    double delta;
    double value;
    Branch branch;
  };
  Cand cands[3];
  int n = 0;
  cands[n++] = {0.0, 0.0, Branch::LowerBang};
  cands[n++] = {1.0, f + w2 * g, Branch::UpperBang};
  if (g != 0.0) {
    const double dd = -f / (2.0 * w2 * g);
    if (dd >= 0.0 && dd <= 1.0)
      cands[n++] = {dd, -f * f / (4.0 * w2 * g), Branch::Continuous};
  }

  double vmin = cands[0].value;
  for (int k = 1; k < n; ++k) vmin = std::min(vmin, cands[k].value);

  const double tie = 1e-12;
  int tied = 0, pick = -1;
  for (int k = 0; k < n; ++k) {
    if (cands[k].value <= vmin + tie) {
      ++tied;
      if (pick < 0) pick = k;
      if (has_incumbent && std::abs(cands[k].delta - incumbent) < 1e-9)
        pick = k;  // ties resolve to the incumbent control value
    }
  }
  if (tied > 1 && has_incumbent)
    if (std::abs(cands[pick].delta - incumbent) < 1e-9)
      return {incumbent, cands[pick].branch};
  return {cands[pick].delta, cands[pick].branch};
}

SwitchingRecord evaluate_switching(const Protocol& protocol, NoiseStrength w,
                                   const StatePair& states, double eps_reg,
                                   double eps_sing) {
  protocol.validate();
  if (protocol.segments.empty())
    throw std::invalid_argument("evaluate_switching: empty protocol");
  const double w2 = w.squared();
  const std::size_t n = protocol.size();

  Trajectory fwd;
  const Eigen::Matrix4cd rho_tau = propagate(protocol, w, states.rho0, &fwd);
  Eigen::Matrix4cd pi_tau;
  try {
    pi_tau = costate_boundary(rho_tau, states.sigma, eps_reg);
  } catch (const SingularGradientError&) {
    throw SingularGradientError(
        "evaluate_switching: cost gradient singular at the final time; the "
        "protocol already attains the cost minimum");
  }
  const Trajectory bwd = propagate_costate(protocol, w, pi_tau);

  SwitchingRecord rec;
  rec.samples.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const Segment& s = protocol.segments[k];
    const double half = 0.5 * s.duration;
    const Eigen::Matrix4cd rho_mid = step(fwd.states[k], s.control, w2, half);
    const Eigen::Matrix4cd pi_mid = unvectorize(
        costate_segment_exponential(s.control, w2, half) *
        vectorize(bwd.states[k + 1]));

    SwitchingSample& out = rec.samples[k];
    out.t = fwd.times[k] + half;
    const SwitchingFunctions fg = switching_functions(rho_mid, pi_mid);
    out.f = fg.f;
    out.g = fg.g;
    out.hamiltonian = 0.0;
    for (int j = 0; j < 3; ++j) {
      out.control[j] = s.control[j];
      out.delta_d[j] = (w2 > 0.0 && fg.g[j] != 0.0)
                           ? -fg.f[j] / (2.0 * w2 * fg.g[j])
                           : std::numeric_limits<double>::quiet_NaN();
      out.branch[j] =
          pointwise_minimizer(fg.f[j], fg.g[j], w, eps_sing, s.control[j])
              .branch;
      out.hamiltonian +=
          fg.f[j] * s.control[j] + w2 * fg.g[j] * s.control[j] * s.control[j];
    }
  }
  return rec;
}

SwitchingRecord evaluate_switching(const Protocol& protocol, NoiseStrength w) {
  return evaluate_switching(protocol, w, canonical_states());
}

namespace {

double protocol_cost(const Protocol& protocol, NoiseStrength w,
                     const StatePair& states) {
  return trace_distance(states.sigma, propagate(protocol, w, states.rho0));
}

}  // namespace

std::pair<Protocol, RefinementReport> refine(const Protocol& protocol,
                                             NoiseStrength w,
                                             const StatePair& states,
                                             const RefineOptions& options) {
  Protocol current = protocol;
  current.validate();
  const std::size_t n = current.size();

  RefinementReport rep;
  double cost = protocol_cost(current, w, states);
  rep.initial_cost = cost;

  for (int iter = 1; iter <= options.max_iters; ++iter) {
    SwitchingRecord rec;
    try {
      rec = evaluate_switching(current, w, states, options.eps_reg,
                               options.eps_sing);
    } catch (const SingularGradientError&) {
      rep.at_minimum = true;
      rep.converged = true;
      rep.message = "cost gradient singular: protocol attains the minimum";
      break;
    }

    std::vector<ControlVector> synth(n);
    for (std::size_t k = 0; k < n; ++k) {
      for (int j = 0; j < 3; ++j) {
        const PointwiseMinimum pm = pointwise_minimizer(
            rec.samples[k].f[j], rec.samples[k].g[j], w, options.eps_sing,
            current.segments[k].control[j]);
        synth[k][j] = pm.delta;  // singular points keep their incoming value
      }
    }

    // Full synthesis first (an accepted lambda = 1 iterate is an exact
    // pointwise minimizer), then damped blends while the cost would rise.
    bool accepted = false;
    double lambda = 1.0;
    bool tried_full = false;
    while (true) {
      Protocol cand = current;
      double max_change = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        for (int j = 0; j < 3; ++j) {
          const double old = current.segments[k].control[j];
          double v = (1.0 - lambda) * old + lambda * synth[k][j];
          v = std::clamp(v, 0.0, 1.0);
          cand.segments[k].control[j] = v;
          max_change = std::max(max_change, std::abs(v - old));
        }
      }
      const double cand_cost = protocol_cost(cand, w, states);
      if (cand_cost <= cost) {
        const double dcost = cost - cand_cost;
        current = std::move(cand);
        cost = cand_cost;
        rep.iterations = iter;
        rep.max_control_change = max_change;
        accepted = true;
        if (max_change < options.control_tol) {
          rep.converged = true;
          rep.message = "control fixed point reached";
        } else if (dcost < options.cost_tol) {
          rep.converged = true;
          rep.message = "cost stationary";
        }
        break;
      }
      lambda = tried_full ? 0.5 * lambda : options.relaxation;
      tried_full = true;
      if (lambda < options.lambda_floor) break;
    }

    if (!accepted) {
      rep.converged = false;
      rep.message =
          "relaxation underflow: synthesis no longer reduces the cost";
      break;
    }
    if (rep.converged) break;
  }

  if (!rep.converged && rep.message.empty())
    rep.message = "maximum iterations reached";
  rep.final_cost = cost;
  return {current, rep};
}

std::pair<Protocol, RefinementReport> refine(const Protocol& protocol,
                                             NoiseStrength w,
                                             const RefineOptions& options) {
  return refine(protocol, w, canonical_states(), options);
}

RefinementReport verify_optimality(const Protocol& protocol, NoiseStrength w,
                                   const StatePair& states,
                                   const VerifyTolerances& tols) {
  RefinementReport rep;
  rep.final_cost = protocol_cost(protocol, w, states);
  const SwitchingRecord rec =
      evaluate_switching(protocol, w, states, tols.eps_reg, tols.eps_sing);
  const double w2 = w.squared();
  const std::size_t n = rec.samples.size();

  for (std::size_t k = 0; k < n; ++k) {
    const SwitchingSample& s = rec.samples[k];
    for (int j = 0; j < 3; ++j) {
      const PointwiseMinimum pm =
          pointwise_minimizer(s.f[j], s.g[j], w, tols.eps_sing);
      if (pm.branch == Branch::Singular) continue;
      const double d = s.control[j];
      const double v_proto = s.f[j] * d + w2 * s.g[j] * d * d;
      const double v_min =
          s.f[j] * pm.delta + w2 * s.g[j] * pm.delta * pm.delta;
      const double excess = v_proto - v_min;
      rep.max_min_excess = std::max(rep.max_min_excess, excess);
      if (excess > tols.min_excess_tol) ++rep.violations;
    }
  }

  // H-constancy, excluding samples within one segment of a bang switch where
  // discretization error dominates.
  std::vector<char> excluded(n, 0);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    for (int j = 0; j < 3; ++j) {
      if (std::abs(rec.samples[k + 1].control[j] - rec.samples[k].control[j]) >
          0.5) {
        excluded[k] = 1;
        excluded[k + 1] = 1;
      }
    }
  }
  double sum = 0.0;
  std::size_t kept = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (excluded[k]) continue;
    sum += rec.samples[k].hamiltonian;
    ++kept;
  }
  if (kept > 0) {
    const double mean = sum / static_cast<double>(kept);
    double dev = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      if (excluded[k]) continue;
      dev = std::max(dev, std::abs(rec.samples[k].hamiltonian - mean));
    }
    rep.hamiltonian_constancy = dev / std::max(std::abs(mean), 1e-15);
  }
  return rep;
}

RefinementReport verify_optimality(const Protocol& protocol, NoiseStrength w,
                                   const VerifyTolerances& tols) {
  return verify_optimality(protocol, w, canonical_states(), tols);
}

}  // namespace braidopt
