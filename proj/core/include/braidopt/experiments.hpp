#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "braidopt/anneal.hpp"
#include "braidopt/bangbang.hpp"
#include "braidopt/model.hpp"
#include "braidopt/results.hpp"

namespace braidopt {

struct SweepOptions {
  std::vector<double> w_list;
  std::vector<double> tau_grid;
  std::string method = "anneal";  // "anneal" or "bangbang"
  AnnealConfig anneal;
  BangBangOptions bangbang;
  GridOptions grid;  // warm start, refinement, bang-bang deferral
};

// One optimization per (w, tau) grid point; per-point failures are recorded
// in the row's method field as "failed:<reason>" and the sweep continues.
SweepResult run_sweep(const SweepOptions& opt);

struct RegimeEstimate {
  double plateau_reference = 0.0;  // C at tau = 0
  double tau_c = 0.0;              // largest tau still on the plateau
  bool tau_c_below_grid = false;
  double regime2_end = 0.0;  // first tau where the descent flattens out
  bool regime2_found = false;
};

// Plateau detector: tau_c is the largest grid tau whose C_min stays within
// delta_plateau of C(tau = 0); the regime-II end is the first tau where the
// descent slope magnitude drops below 10% of the post-plateau median slope.
// Throws std::invalid_argument when the grid never leaves the plateau or has
// fewer than four points.
RegimeEstimate find_regimes(const std::vector<SweepRow>& rows_one_w,
                            double delta_plateau = 1e-3);

struct BaselineRow {
  double tau = 0.0;
  double w = 0.0;
  double cost = 0.0;
};

// Gate error of the linear exchange ramp over an adiabatic-window tau grid.
std::vector<BaselineRow> adiabatic_baseline(const std::vector<double>& w_list,
                                            const std::vector<double>& tau_grid,
                                            double dt = 0.02, int threads = 0);

struct HistogramResult {
  std::vector<double> taus;
  std::vector<double> bin_edges;            // size bins + 1, spanning [0, 1]
  std::vector<std::vector<long>> counts;    // [tau index][bin]
  std::vector<double> per_tau_min;
  double reference_cost = 0.0;  // C at tau = 0
  long samples_per_tau = 0;
};

// Cost distribution of seeded random protocols; the per-sample seeds are
// derived from (seed, tau index, sample index) so results are independent of
// the thread count and the first n samples of a larger run coincide with a
// run of n samples.
HistogramResult cost_histogram(const std::vector<double>& tau_grid,
                               long samples, double dt, NoiseStrength w,
                               std::uint64_t seed, int bins = 120,
                               int threads = 0);

struct ExtrapolationResult {
  double w = 0.0;
  int degree = 0;
  std::vector<double> coefficients;  // ascending powers of 1/tau
  double intercept = 0.0;
  double intercept_stderr = 0.0;  // bootstrap over fit residuals
  double residual_rms = 0.0;
  double condition_number = 0.0;
  bool ill_conditioned = false;
  int bootstrap_n = 0;
  int points_used = 0;
};

// Least-squares polynomial fit of C_min against 1/tau over [tau_min, tau_max]
// with a residual-resampling bootstrap for the intercept standard error.
// Requires at least degree + 2 points in the window.
ExtrapolationResult extrapolate(const std::vector<SweepRow>& rows_one_w,
                                double tau_min, double tau_max, int degree,
                                int bootstrap_n, std::uint64_t seed);

}  // namespace braidopt
