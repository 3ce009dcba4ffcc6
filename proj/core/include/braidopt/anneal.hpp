#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "braidopt/bangbang.hpp"
#include "braidopt/model.hpp"
#include "braidopt/pontryagin.hpp"
#include "braidopt/results.hpp"

namespace braidopt {

struct AnnealConfig {
  double dt = 0.02;
  int sweeps = 2000;
  int moves_per_sweep = 0;  // 0 -> 3x the number of intervals
  double beta0 = 10.0;
  double beta_growth = 1.02;  // geometric schedule, per sweep
  double move_scale = 0.1;
  double min_acceptance = 0.05;  // halve move_scale below this rate
  std::uint64_t seed = 1;
  int restarts = 4;
  int recompute_interval = 100;  // accepted moves between full recomputations
  int threads = 0;               // 0 -> hardware concurrency

  void validate() const;
};

struct AnnealResult {
  Protocol best_protocol;
  double best_cost = 0.0;
  // (sweep, running best cost); the running minimum is non-increasing.
  std::vector<std::pair<int, double>> cost_trace;
  // (sweep, acceptance rate among in-bounds Metropolis proposals).
  std::vector<std::pair<int, double>> acceptance_trace;
};

// Test seam: replaces the cached cost evaluation with an arbitrary
// functional of the protocol.
using CostFn = std::function<double(const Protocol&)>;

// One strictly sequential Metropolis chain: a random interval's three
// parameters are perturbed together by uniform draws in [-move_scale,
// +move_scale]; proposals leaving [0,1] are rejected outright; otherwise
// accepted with probability min(1, exp(-beta dC)).
AnnealResult anneal_chain(double tau, NoiseStrength w, const AnnealConfig& cfg,
                          std::uint64_t seed, const Protocol* init = nullptr,
                          const CostFn* cost_override = nullptr);

// Runs cfg.restarts independent chains (concurrently) and merges them by
// (cost, restart index).  When warm_start is given, chain 0 starts from it;
// the remaining chains start from seeded random protocols.
AnnealResult anneal(double tau, NoiseStrength w, const AnnealConfig& cfg,
                    const Protocol* warm_start = nullptr);

struct GridOptions {
  bool warm_start = true;         // chain grid points in ascending tau
  bool apply_refine = true;       // polish each point's best protocol
  bool defer_to_bangbang = true;  // rerun poorly converged points
  double spread_threshold = 1e-3;
  RefineOptions refine;
  BangBangOptions bangbang;
};

// Independent anneal per (w, tau) grid point, assembled into a SweepResult.
// Points whose restart spread exceeds spread_threshold are rerun with the
// bang-bang ansatz and the better result is kept.
SweepResult anneal_grid(const std::vector<double>& tau_list,
                        const std::vector<double>& w_list,
                        const AnnealConfig& cfg, const GridOptions& opt = {});

}  // namespace braidopt
