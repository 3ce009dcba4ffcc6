#include "braidopt/anneal.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <stdexcept>

#include "braidopt/cost.hpp"
#include "braidopt/detail/parallel.hpp"
#include "braidopt/detail/rng.hpp"
#include "braidopt/propagator.hpp"

namespace braidopt {

void AnnealConfig::validate() const {
  if (!(dt > 0.0) || sweeps <= 0 || moves_per_sweep < 0 || !(beta0 > 0.0) ||
      !(beta_growth > 1.0) || !(move_scale > 0.0 && move_scale <= 1.0) ||
      restarts <= 0 || recompute_interval <= 0)
    throw std::invalid_argument("anneal: invalid configuration");
}

AnnealResult anneal_chain(double tau, NoiseStrength w, const AnnealConfig& cfg,
                          std::uint64_t seed, const Protocol* init,
                          const CostFn* cost_override) {
  cfg.validate();
  if (!(tau > 0.0)) throw std::domain_error("anneal: tau must be > 0");

  Protocol proto = init ? *init
                        : random_protocol(tau, cfg.dt,
                                          detail::derive_seed(seed, 0xA11CE));
  proto.validate();
  const std::size_t n = proto.size();
  const int moves =
      cfg.moves_per_sweep > 0 ? cfg.moves_per_sweep : static_cast<int>(3 * n);

  const StatePair states = canonical_states();
  std::optional<SweepCostCache> cache;
  if (!cost_override) cache.emplace(proto, w, states.rho0, states.sigma);

  auto current_protocol = [&]() -> const Protocol& {
    return cost_override ? proto : cache->protocol();
  };
  double cost =
      cost_override ? (*cost_override)(proto) : cache->current_cost();

  AnnealResult res;
  res.best_protocol = current_protocol();
  res.best_cost = cost;
  res.cost_trace.reserve(cfg.sweeps);
  res.acceptance_trace.reserve(cfg.sweeps);

  std::mt19937_64 gen(detail::derive_seed(seed, 0xC0FFEE));
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> kick(-1.0, 1.0);

  double move_scale = cfg.move_scale;
  double beta = cfg.beta0;
  int accepted_since_recompute = 0;

  for (int sweep = 0; sweep < cfg.sweeps; ++sweep) {
    long attempts = 0, accepted = 0;
    for (int m = 0; m < moves; ++m) {
      const std::size_t k = pick(gen);
      const ControlVector old = current_protocol().segments[k].control;
      ControlVector cand;
      for (int j = 0; j < 3; ++j) cand[j] = old[j] + move_scale * kick(gen);
      if (!cand.within_bounds()) continue;  // rejected outright, not clipped

      ++attempts;
      double cand_cost;
      if (cost_override) {
        Protocol trial = proto;
        trial.segments[k].control = cand;
        cand_cost = (*cost_override)(trial);
      } else {
        cand_cost = cache->candidate_cost(k, cand);
      }
      const double dc = cand_cost - cost;
      if (dc < 0.0 || unit(gen) < std::exp(-beta * dc)) {
        ++accepted;
        if (cost_override)
          proto.segments[k].control = cand;
        else
          cache->accept(k, cand);
        cost = cand_cost;
        if (!cost_override &&
            ++accepted_since_recompute >= cfg.recompute_interval) {
          cache->rebuild();
          cost = cache->current_cost();
          accepted_since_recompute = 0;
        }
        if (cost < res.best_cost) {
          res.best_cost = cost;
          res.best_protocol = current_protocol();
        }
      }
    }
    const double rate =
        attempts > 0 ? static_cast<double>(accepted) / attempts : 0.0;
    res.cost_trace.emplace_back(sweep, res.best_cost);
    res.acceptance_trace.emplace_back(sweep, rate);
    if (rate < cfg.min_acceptance) move_scale *= 0.5;
    beta *= cfg.beta_growth;
  }

  // Pin the reported optimum to a from-scratch evaluation.
  res.best_cost =
      cost_override
          ? (*cost_override)(res.best_protocol)
          : trace_distance(states.sigma,
                           propagate(res.best_protocol, w, states.rho0));
  return res;
}

AnnealResult anneal(double tau, NoiseStrength w, const AnnealConfig& cfg,
                    const Protocol* warm_start) {
  cfg.validate();
  std::vector<AnnealResult> chains(cfg.restarts);
  detail::parallel_for(cfg.restarts, cfg.threads, [&](std::size_t r) {
    const Protocol* init = (r == 0 && warm_start) ? warm_start : nullptr;
    chains[r] = anneal_chain(tau, w, cfg, detail::derive_seed(cfg.seed, r),
                             init);
  });
  std::size_t best = 0;
  for (std::size_t r = 1; r < chains.size(); ++r)
    if (chains[r].best_cost < chains[best].best_cost) best = r;
  return chains[best];
}

SweepResult anneal_grid(const std::vector<double>& tau_list,
                        const std::vector<double>& w_list,
                        const AnnealConfig& cfg, const GridOptions& opt) {
  if (tau_list.empty() || w_list.empty())
    throw std::invalid_argument("anneal_grid: empty grid");
  std::vector<double> taus = tau_list;
  std::vector<double> ws = w_list;
  std::sort(taus.begin(), taus.end());
  std::sort(ws.begin(), ws.end());

  const StatePair states = canonical_states();
  SweepResult out;
  for (double wv : ws) {
    const NoiseStrength w(wv);
    std::optional<Protocol> prev;
    for (double tau : taus) {
      std::optional<Protocol> warm;
      if (opt.warm_start && prev) warm = extend_with_hold(*prev, tau);

      std::vector<AnnealResult> chains(cfg.restarts);
      detail::parallel_for(cfg.restarts, cfg.threads, [&](std::size_t r) {
        const Protocol* init = (r == 0 && warm) ? &*warm : nullptr;
        chains[r] = anneal_chain(tau, w, cfg,
                                 detail::derive_seed(cfg.seed, r), init);
      });
      std::size_t best = 0;
      double lo = chains[0].best_cost, hi = chains[0].best_cost;
      for (std::size_t r = 1; r < chains.size(); ++r) {
        lo = std::min(lo, chains[r].best_cost);
        hi = std::max(hi, chains[r].best_cost);
        if (chains[r].best_cost < chains[best].best_cost) best = r;
      }

      SweepRow row;
      row.tau = tau;
      row.w = wv;
      row.method = "anneal";
      row.c_min = chains[best].best_cost;
      row.protocol = chains[best].best_protocol;

      // Restart spread flags poor convergence near the regime boundary;
      // those points are handed to the bang-bang ansatz.
      if (opt.defer_to_bangbang && hi - lo > opt.spread_threshold) {
        BangBangOptions bb = opt.bangbang;
        bb.seed = detail::derive_seed(cfg.seed, 0xBB, static_cast<std::uint64_t>(
                                                          tau * 1e6));
        const BangBangResult bbr = optimize_bangbang(tau, w, bb);
        if (bbr.cost < row.c_min) {
          row.method = "bangbang";
          row.c_min = bbr.cost;
          row.protocol = bangbang_protocol(bbr.params.t, tau);
        }
      }

      if (opt.apply_refine) {
        const Protocol base = row.method == "bangbang"
                                  ? resample_uniform(row.protocol, cfg.dt)
                                  : row.protocol;
        auto [refined, rep] = refine(base, w, states, opt.refine);
        if (rep.final_cost <= row.c_min) {
          row.protocol = std::move(refined);
          row.c_min = rep.final_cost;
          row.method = "refined";
        }
      }

      // Warm starts chain on the uniform grid regardless of which method won.
      prev = resample_uniform(row.protocol, cfg.dt);
      out.rows.push_back(std::move(row));
    }
  }
  return out;
}

}  // namespace braidopt
