#include "braidopt/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "braidopt/cost.hpp"
#include "braidopt/detail/parallel.hpp"
#include "braidopt/detail/rng.hpp"
#include "braidopt/pontryagin.hpp"
#include "braidopt/propagator.hpp"

namespace braidopt {

namespace {

std::vector<double> sorted_unique(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace

SweepResult run_sweep(const SweepOptions& opt) {
  if (opt.w_list.empty() || opt.tau_grid.empty())
    throw std::invalid_argument("run_sweep: empty grid");

  if (opt.method == "anneal")
    return anneal_grid(opt.tau_grid, opt.w_list, opt.anneal, opt.grid);
  if (opt.method != "bangbang")
    throw std::invalid_argument("run_sweep: unknown method '" + opt.method +
                                "'");

  const std::vector<double> taus = sorted_unique(opt.tau_grid);
  const std::vector<double> ws = sorted_unique(opt.w_list);
  const StatePair states = canonical_states();

  SweepResult out;
  for (double wv : ws) {
    const NoiseStrength w(wv);
    BangBangOptions bb = opt.bangbang;
    for (double tau : taus) {
      SweepRow row;
      row.tau = tau;
      row.w = wv;
      try {
        const BangBangResult r = optimize_bangbang(tau, w, bb);
        row.method = "bangbang";
        row.c_min = r.cost;
        row.protocol = bangbang_protocol(r.params.t, tau);
        if (opt.grid.warm_start) {
          bb.hints.assign(1, r.params);  // chain the previous optimum
        }
        if (opt.grid.apply_refine) {
          const Protocol base = resample_uniform(row.protocol, opt.anneal.dt);
          auto [refined, rep] = refine(base, w, states, opt.grid.refine);
          if (rep.final_cost <= row.c_min) {
            row.protocol = std::move(refined);
            row.c_min = rep.final_cost;
            row.method = "refined";
          }
        }
      } catch (const std::exception& e) {
        row.method = std::string("failed:") + e.what();
        row.c_min = std::numeric_limits<double>::quiet_NaN();
      }
      out.rows.push_back(std::move(row));
    }
  }
  return out;
}

RegimeEstimate find_regimes(const std::vector<SweepRow>& rows_one_w,
                            double delta_plateau) {
  std::vector<SweepRow> rows = rows_one_w;
  std::sort(rows.begin(), rows.end(),
            [](const SweepRow& a, const SweepRow& b) { return a.tau < b.tau; });
  if (rows.size() < 4)
    throw std::invalid_argument(
        "find_regimes: insufficient grid coverage (need >= 4 points)");

  const StatePair states = canonical_states();
  RegimeEstimate est;
  est.plateau_reference = trace_distance(states.sigma, states.rho0);
  const double floor = est.plateau_reference - delta_plateau;

  // Largest tau still at the plateau value.
  std::ptrdiff_t last_plateau = -1;
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (rows[i].c_min > floor) last_plateau = static_cast<std::ptrdiff_t>(i);
  if (last_plateau < 0) {
    est.tau_c_below_grid = true;
    est.tau_c = rows.front().tau;
  } else if (static_cast<std::size_t>(last_plateau) + 1 == rows.size()) {
    throw std::invalid_argument(
        "find_regimes: grid never leaves the plateau; extend the tau range");
  } else {
    est.tau_c = rows[last_plateau].tau;
  }

  // Slopes after the plateau; the regime-II end is where the descent rate
  // collapses relative to the median post-plateau slope.
  const std::size_t start =
      last_plateau < 0 ? 0 : static_cast<std::size_t>(last_plateau);
  std::vector<double> mags;
  for (std::size_t i = start; i + 1 < rows.size(); ++i) {
    const double dt = rows[i + 1].tau - rows[i].tau;
    if (dt <= 0.0) continue;
    mags.push_back(std::abs((rows[i + 1].c_min - rows[i].c_min) / dt));
  }
  if (mags.size() >= 2) {
    std::vector<double> sorted = mags;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2,
                     sorted.end());
    const double median = sorted[sorted.size() / 2];
    for (std::size_t k = 0; k < mags.size(); ++k) {
      if (mags[k] < 0.1 * median) {
        est.regime2_end = rows[start + k].tau;
        est.regime2_found = true;
        break;
      }
    }
  }
  return est;
}

std::vector<BaselineRow> adiabatic_baseline(const std::vector<double>& w_list,
                                            const std::vector<double>& tau_grid,
                                            double dt, int threads) {
  const StatePair states = canonical_states();
  std::vector<BaselineRow> rows(w_list.size() * tau_grid.size());
  detail::parallel_for(rows.size(), threads, [&](std::size_t idx) {
    const double wv = w_list[idx / tau_grid.size()];
    const double tau = tau_grid[idx % tau_grid.size()];
    const Protocol p = linear_adiabatic_protocol(tau, dt);
    const double c =
        trace_distance(states.sigma, propagate(p, NoiseStrength(wv),
                                               states.rho0));
    rows[idx] = {tau, wv, c};
  });
  return rows;
}

HistogramResult cost_histogram(const std::vector<double>& tau_grid,
                               long samples, double dt, NoiseStrength w,
                               std::uint64_t seed, int bins, int threads) {
  if (samples < 1) throw std::invalid_argument("histogram: samples must be >= 1");
  if (bins < 1) throw std::invalid_argument("histogram: bins must be >= 1");

  const StatePair states = canonical_states();
  HistogramResult out;
  out.taus = tau_grid;
  out.samples_per_tau = samples;
  out.reference_cost = trace_distance(states.sigma, states.rho0);
  out.bin_edges.resize(bins + 1);
  for (int b = 0; b <= bins; ++b)
    out.bin_edges[b] = static_cast<double>(b) / bins;
  out.counts.assign(tau_grid.size(), std::vector<long>(bins, 0));
  out.per_tau_min.assign(tau_grid.size(), 0.0);

  std::vector<double> costs(samples);
  for (std::size_t ti = 0; ti < tau_grid.size(); ++ti) {
    const double tau = tau_grid[ti];
    detail::parallel_for(samples, threads, [&](std::size_t i) {
      const Protocol p =
          random_protocol(tau, dt, detail::derive_seed(seed, ti, i));
      costs[i] =
          trace_distance(states.sigma, propagate(p, w, states.rho0));
    });
    double mn = costs[0];
    for (long i = 0; i < samples; ++i) {
      mn = std::min(mn, costs[i]);
      const int b = std::clamp(static_cast<int>(costs[i] * bins), 0, bins - 1);
      ++out.counts[ti][b];
    }
    out.per_tau_min[ti] = mn;
  }
  return out;
}

ExtrapolationResult extrapolate(const std::vector<SweepRow>& rows_one_w,
                                double tau_min, double tau_max, int degree,
                                int bootstrap_n, std::uint64_t seed) {
  if (degree < 1 || degree > 4)
    throw std::invalid_argument("extrapolate: degree must be in 1..4");

  std::vector<double> x, y;
  double wv = 0.0;
  for (const SweepRow& r : rows_one_w) {
    if (r.tau < tau_min || r.tau > tau_max || !std::isfinite(r.c_min)) continue;
    x.push_back(1.0 / r.tau);
    y.push_back(r.c_min);
    wv = r.w;
  }
  const int n = static_cast<int>(x.size());
  if (n < degree + 2)
    throw std::invalid_argument(
        "extrapolate: need at least degree + 2 points in the tau window");

  Eigen::MatrixXd v(n, degree + 1);
  Eigen::VectorXd rhs(n);
  for (int i = 0; i < n; ++i) {
    double p = 1.0;
    for (int k = 0; k <= degree; ++k) {
      v(i, k) = p;
      p *= x[i];
    }
    rhs(i) = y[i];
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(v,
                                        Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd coeff = svd.solve(rhs);
  const Eigen::VectorXd resid = rhs - v * coeff;

  ExtrapolationResult out;
  out.w = wv;
  out.degree = degree;
  out.points_used = n;
  out.coefficients.assign(coeff.data(), coeff.data() + degree + 1);
  out.intercept = coeff(0);
  out.residual_rms = std::sqrt(resid.squaredNorm() / n);
  out.condition_number =
      svd.singularValues()(0) /
      std::max(svd.singularValues()(degree), 1e-300);
  out.ill_conditioned = out.condition_number > 1e8;
  out.bootstrap_n = bootstrap_n;

  if (bootstrap_n > 0) {
    const Eigen::VectorXd fitted = v * coeff;
    std::mt19937_64 gen(detail::derive_seed(seed, 0xB007));
    std::uniform_int_distribution<int> pick(0, n - 1);
    double sum = 0.0, sum2 = 0.0;
    Eigen::VectorXd ystar(n);
    for (int b = 0; b < bootstrap_n; ++b) {
      for (int i = 0; i < n; ++i) ystar(i) = fitted(i) + resid(pick(gen));
      const double c0 = svd.solve(ystar)(0);
      sum += c0;
      sum2 += c0 * c0;
    }
    const double mean = sum / bootstrap_n;
    const double var =
        std::max(0.0, (sum2 - bootstrap_n * mean * mean) /
                          std::max(1, bootstrap_n - 1));
    out.intercept_stderr = std::sqrt(var);
  }
  return out;
}

}  // namespace braidopt
