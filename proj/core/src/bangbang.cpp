#include "braidopt/bangbang.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include "braidopt/cost.hpp"
#include "braidopt/detail/parallel.hpp"
#include "braidopt/detail/rng.hpp"
#include "braidopt/propagator.hpp"

namespace braidopt {

double ansatz_cost(const BangBangParams& params, double tau, NoiseStrength w) {
  const Protocol p = bangbang_protocol(params.t, tau);
  const StatePair states = canonical_states();
  return trace_distance(states.sigma, propagate(p, w, states.rho0));
}

namespace {

// Internal coordinates x = (s1, w1, s2, w2, s3, w3): each channel's switch
// pair is (s_k, s_k + w_k) with s_k in [0, tau] and w_k in [0, tau - s_k],
// so the per-channel ordering holds by construction.
using Coords = std::array<double, 6>;

double reflect_into(double v, double lo, double hi) {
  if (hi <= lo) return lo;
  const double span = hi - lo;
  double u = std::fmod(v - lo, 2.0 * span);
  if (u < 0.0) u += 2.0 * span;
  return lo + (u <= span ? u : 2.0 * span - u);
}

Coords project(Coords x, double tau) {
  for (int k = 0; k < 3; ++k) {
    x[2 * k] = reflect_into(x[2 * k], 0.0, tau);
    x[2 * k + 1] = reflect_into(x[2 * k + 1], 0.0, tau - x[2 * k]);
  }
  return x;
}

BangBangParams to_params(const Coords& x) {
  BangBangParams p;
  for (int k = 0; k < 3; ++k) {
    p.t[2 * k] = x[2 * k];
    p.t[2 * k + 1] = x[2 * k] + x[2 * k + 1];
  }
  return p;
}

Coords from_params(const BangBangParams& p) {
  Coords x;
  for (int k = 0; k < 3; ++k) {
    x[2 * k] = p.t[2 * k];
    x[2 * k + 1] = p.t[2 * k + 1] - p.t[2 * k];
  }
  return x;
}

struct Objective {
  double tau;
  NoiseStrength w;
  double operator()(const Coords& x) const {
    return ansatz_cost(to_params(project(x, tau)), tau, w);
  }
};

struct Vertex {
  Coords x;
  double value;
};

// Nelder-Mead with reflection of out-of-bounds coordinates back into the
// feasible set.
Vertex simplex_descent(const Objective& obj, Coords x0, double tau,
                       int max_iters) {
  constexpr int dim = 6;
  std::vector<Vertex> simplex(dim + 1);
  simplex[0] = {project(x0, tau), obj(x0)};
  for (int d = 0; d < dim; ++d) {
    Coords x = simplex[0].x;
    const double step = std::max(0.15 * tau, 1e-3);
    x[d] += step;
    x = project(x, tau);
    simplex[d + 1] = {x, obj(x)};
  }

  auto by_value = [](const Vertex& a, const Vertex& b) {
    return a.value < b.value;
  };
  for (int it = 0; it < max_iters; ++it) {
    std::sort(simplex.begin(), simplex.end(), by_value);
    if (simplex.back().value - simplex.front().value < 1e-14) break;

    Coords centroid{};
    for (int v = 0; v < dim; ++v)
      for (int d = 0; d < dim; ++d) centroid[d] += simplex[v].x[d] / dim;

    auto along = [&](double coeff) {
      Coords x;
      for (int d = 0; d < dim; ++d)
        x[d] = centroid[d] + coeff * (centroid[d] - simplex.back().x[d]);
      return project(x, tau);
    };

    const Coords xr = along(1.0);
    const double fr = obj(xr);
    if (fr < simplex.front().value) {
      const Coords xe = along(2.0);
      const double fe = obj(xe);
      simplex.back() = fe < fr ? Vertex{xe, fe} : Vertex{xr, fr};
      continue;
    }
    if (fr < simplex[dim - 1].value) {
      simplex.back() = {xr, fr};
      continue;
    }
    const Coords xc = along(fr < simplex.back().value ? 0.5 : -0.5);
    const double fc = obj(xc);
    if (fc < std::min(fr, simplex.back().value)) {
      simplex.back() = {xc, fc};
      continue;
    }
    // shrink toward the best vertex
    for (int v = 1; v <= dim; ++v) {
      Coords x;
      for (int d = 0; d < dim; ++d)
        x[d] = 0.5 * (simplex[0].x[d] + simplex[v].x[d]);
      x = project(x, tau);
      simplex[v] = {x, obj(x)};
    }
  }
  std::sort(simplex.begin(), simplex.end(), by_value);
  return simplex.front();
}

Vertex golden_polish(const Objective& obj, Vertex v, double tau, int rounds) {
  constexpr double phi = 0.6180339887498949;
  for (int r = 0; r < rounds; ++r) {
    for (int d = 0; d < 6; ++d) {
      const bool is_start = (d % 2 == 0);
      const double lo = 0.0;
      const double hi = is_start ? tau : tau - v.x[d - 1];
      if (hi - lo < 1e-12) continue;
      double a = lo, b = hi;
      double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
      auto eval = [&](double t) {
        Coords x = v.x;
        x[d] = t;
        return obj(x);
      };
      double f1 = eval(x1), f2 = eval(x2);
      while (b - a > 1e-10 * std::max(1.0, tau)) {
        if (f1 < f2) {
          b = x2;
          x2 = x1;
          f2 = f1;
          x1 = b - phi * (b - a);
          f1 = eval(x1);
        } else {
          a = x1;
          x1 = x2;
          f1 = f2;
          x2 = a + phi * (b - a);
          f2 = eval(x2);
        }
      }
      const double best_t = f1 < f2 ? x1 : x2;
      const double best_f = std::min(f1, f2);
      if (best_f < v.value) {
        v.x[d] = best_t;
        v.x = project(v.x, tau);
        v.value = best_f;
      }
    }
  }
  return v;
}

}  // namespace

BangBangResult optimize_bangbang(double tau, NoiseStrength w,
                                 const BangBangOptions& opt) {
  if (!(tau > 0.0))
    throw std::domain_error("optimize_bangbang: tau must be > 0");
  if (opt.multistarts < 1)
    throw std::invalid_argument("optimize_bangbang: multistarts must be >= 1");

  const Objective obj{tau, w};

  // Start 0 is the degenerate all-collapsed point (the stationary protocol),
  // start 1 a staircase-exchange shape with wide overlapping pulses; hints
  // follow, then seeded random draws.  Half the draws sample (start, width)
  // directly, half sort two uniform switch times, which reaches wide pulses
  // far more often.
  std::vector<Coords> starts;
  starts.push_back(Coords{0.0, 0.0, 0.0, 0.0, 0.0, 0.0});
  {
    BangBangParams staircase;
    staircase.t = {0.0, 0.85 * tau, 0.4 * tau, tau, 0.05 * tau, 0.95 * tau};
    starts.push_back(project(from_params(staircase), tau));
  }
  for (const BangBangParams& h : opt.hints)
    starts.push_back(project(from_params(h), tau));
  const int total = std::max<int>(opt.multistarts,
                                  static_cast<int>(starts.size()));
  for (int m = static_cast<int>(starts.size()); m < total; ++m) {
    std::mt19937_64 gen(detail::derive_seed(opt.seed, m));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Coords x;
    for (int k = 0; k < 3; ++k) {
      if (m % 2 == 0) {
        x[2 * k] = unit(gen) * tau;
        x[2 * k + 1] = unit(gen) * (tau - x[2 * k]);
      } else {
        double a = unit(gen) * tau, b = unit(gen) * tau;
        if (a > b) std::swap(a, b);
        x[2 * k] = a;
        x[2 * k + 1] = b - a;
      }
    }
    starts.push_back(x);
  }

  std::vector<Vertex> results(starts.size());
  detail::parallel_for(starts.size(), opt.threads, [&](std::size_t m) {
    Vertex v = simplex_descent(obj, starts[m], tau, opt.simplex_max_iters);
    v = golden_polish(obj, v, tau, opt.polish_rounds);
    // restart the simplex from the polished point until it stalls
    for (int round = 0; round < 3; ++round) {
      Vertex again = simplex_descent(obj, v.x, tau, opt.simplex_max_iters);
      again = golden_polish(obj, again, tau, opt.polish_rounds);
      if (again.value >= v.value - 1e-12) break;
      v = again;
    }
    results[m] = v;
  });

  std::size_t best = 0;
  for (std::size_t m = 1; m < results.size(); ++m)
    if (results[m].value < results[best].value) best = m;

  BangBangResult out;
  out.params = to_params(project(results[best].x, tau));
  out.cost = results[best].value;
  out.start_index = static_cast<int>(best);
  return out;
}

}  // namespace braidopt
