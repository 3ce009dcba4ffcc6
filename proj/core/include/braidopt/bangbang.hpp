#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "braidopt/model.hpp"

namespace braidopt {

// Six switch times (t1..t6) in [0, tau]; within each channel's pair the
// first switch must not exceed the second.
struct BangBangParams {
  std::array<double, 6> t{};
};

// Builds the exact-segment protocol for the ansatz and evaluates the gate
// error at exact segment boundaries (no time-grid discretization).
double ansatz_cost(const BangBangParams& params, double tau, NoiseStrength w);

struct BangBangOptions {
  int multistarts = 64;
  std::uint64_t seed = 1;
  int threads = 0;
  int simplex_max_iters = 600;
  int polish_rounds = 2;
  std::vector<BangBangParams> hints;  // extra start points (annealer output)
};

struct BangBangResult {
  BangBangParams params;
  double cost = 0.0;
  int start_index = -1;  // which multistart produced the optimum
};

// Bounded derivative-free minimization of ansatz_cost: per-channel pairs are
// reparameterized as (start, width >= 0) so the ordering stays feasible by
// construction; simplex descent with boundary reflection is followed by a
// coordinate-wise golden-section polish.  Multistarts (the degenerate
// all-collapsed point, seeded random draws, and any hints) run concurrently
// and merge deterministically by (cost, start index).
BangBangResult optimize_bangbang(double tau, NoiseStrength w,
                                 const BangBangOptions& opt = {});

}  // namespace braidopt
