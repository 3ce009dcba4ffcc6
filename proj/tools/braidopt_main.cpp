// braidopt: noise-canceling optimal control protocols for a four-Majorana
// braiding gate.  Subcommands cover single-protocol simulation, the two
// optimizers, Pontryagin-based refinement/verification, and the sweep,
// regime, baseline, histogram and extrapolation experiments.
//
// Exit codes: 0 success, 1 usage error, 2 numerical failure.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "braidopt/anneal.hpp"
#include "braidopt/bangbang.hpp"
#include "braidopt/cost.hpp"
#include "braidopt/experiments.hpp"
#include "braidopt/model.hpp"
#include "braidopt/pontryagin.hpp"
#include "braidopt/propagator.hpp"
#include "braidopt/protocol_io.hpp"

namespace fs = std::filesystem;
using namespace braidopt;

namespace {

struct GlobalFlags {
  std::uint64_t seed = 1;
  int threads = 0;
  std::string out_dir = ".";
  double dt = 0.02;
};

std::string out_path(const GlobalFlags& g, const std::string& name) {
  fs::create_directories(g.out_dir);
  return (fs::path(g.out_dir) / name).string();
}

std::string point_tag(double tau, double w) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "tau%.6g_w%.6g", tau, w);
  return buf;
}

std::vector<double> parse_grid(const std::string& spec) {
  // "lo:hi:step" or a comma-separated list
  std::vector<double> out;
  if (spec.find(':') != std::string::npos) {
    double lo, hi, step;
    if (std::sscanf(spec.c_str(), "%lf:%lf:%lf", &lo, &hi, &step) != 3 ||
        step <= 0.0 || hi < lo)
      throw CLI::ValidationError("grid", "expected lo:hi:step with step > 0");
    for (double v = lo; v <= hi + 1e-9 * step; v += step)
      out.push_back(std::min(v, hi));
    return out;
  }
  std::string token;
  std::istringstream in(spec);
  while (std::getline(in, token, ','))
    if (!token.empty()) out.push_back(std::stod(token));
  if (out.empty()) throw CLI::ValidationError("grid", "empty grid");
  return out;
}

void add_anneal_options(CLI::App* cmd, AnnealConfig& cfg) {
  cmd->add_option("--sweeps", cfg.sweeps, "Annealing sweeps");
  cmd->add_option("--moves-per-sweep", cfg.moves_per_sweep,
                  "Moves per sweep (0 = 3x interval count)");
  cmd->add_option("--beta0", cfg.beta0, "Initial inverse temperature");
  cmd->add_option("--beta-growth", cfg.beta_growth,
                  "Geometric beta growth per sweep");
  cmd->add_option("--move-scale", cfg.move_scale, "Proposal half-width");
  cmd->add_option("--min-acceptance", cfg.min_acceptance,
                  "Acceptance rate below which the move scale halves");
  cmd->add_option("--restarts", cfg.restarts, "Independent restarts");
  cmd->add_option("--recompute-interval", cfg.recompute_interval,
                  "Accepted moves between full recomputations");
}

void add_refine_options(CLI::App* cmd, RefineOptions& opt) {
  cmd->add_option("--max-iters", opt.max_iters, "Refinement iteration limit");
  cmd->add_option("--lambda", opt.relaxation, "Relaxation (damped fallback)");
  cmd->add_option("--eps-reg", opt.eps_reg, "Spectral regularization floor");
  cmd->add_option("--eps-sing", opt.eps_sing, "Singular-arc threshold on |F|");
}

void print_report(const RefinementReport& rep) {
  std::cout << "iterations=" << rep.iterations
            << " initial_cost=" << format_full(rep.initial_cost)
            << " final_cost=" << format_full(rep.final_cost)
            << " converged=" << (rep.converged ? "yes" : "no");
  if (!rep.message.empty()) std::cout << " (" << rep.message << ")";
  std::cout << "\n";
}

int run(int argc, char** argv) {
  CLI::App app{
      "Optimal noise-canceling control protocols for a four-Majorana "
      "braiding gate under multiplicative white noise"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand
  app.set_config("--config", "", "INI config file (flags override it)");

  GlobalFlags g;
  app.add_option("--seed", g.seed, "Base random seed")->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads (0 = hardware)")
      ->capture_default_str();
  app.add_option("--out-dir", g.out_dir, "Output directory")
      ->capture_default_str();
  app.add_option("--dt", g.dt, "Time-grid step")->capture_default_str();

  // ---- simulate ----------------------------------------------------------
  auto* c_sim = app.add_subcommand(
      "simulate", "Evaluate the gate error of a protocol file");
  std::string sim_protocol;
  double sim_w = 0.0;
  std::string sim_traj;
  int sim_stride = 1;
  c_sim->add_option("--protocol", sim_protocol, "Protocol JSON file")
      ->required();
  c_sim->add_option("--noise", sim_w, "Noise strength W")->required();
  c_sim->add_option("--trajectory", sim_traj, "Write the trajectory CSV here");
  c_sim->add_option("--stride", sim_stride, "Trajectory downsampling stride");

  // ---- anneal ------------------------------------------------------------
  auto* c_anneal = app.add_subcommand(
      "anneal", "Simulated-annealing protocol optimization at one (tau, W)");
  double an_tau = 1.0, an_w = 0.0;
  AnnealConfig an_cfg;
  c_anneal->add_option("--tau", an_tau, "Total time")->required();
  c_anneal->add_option("--noise", an_w, "Noise strength W")->required();
  add_anneal_options(c_anneal, an_cfg);

  // ---- bangbang ----------------------------------------------------------
  auto* c_bb = app.add_subcommand(
      "bangbang", "Six-parameter bang-bang ansatz optimization");
  double bb_tau = 1.0, bb_w = 0.0;
  int bb_multistarts = 64;
  c_bb->add_option("--tau", bb_tau, "Total time")->required();
  c_bb->add_option("--noise", bb_w, "Noise strength W")->required();
  c_bb->add_option("--multistarts", bb_multistarts, "Multistart count");

  // ---- refine ------------------------------------------------------------
  auto* c_refine = app.add_subcommand(
      "refine", "Iterative Pontryagin refinement of a protocol file");
  std::string rf_protocol, rf_out, rf_switching;
  double rf_w = 0.0;
  RefineOptions rf_opt;
  c_refine->add_option("--protocol", rf_protocol, "Protocol JSON file")
      ->required();
  c_refine->add_option("--noise", rf_w, "Noise strength W")->required();
  c_refine->add_option("--out", rf_out, "Refined protocol output file");
  c_refine->add_option("--switching", rf_switching,
                       "Switching-record CSV of the refined protocol");
  add_refine_options(c_refine, rf_opt);

  // ---- verify ------------------------------------------------------------
  auto* c_verify = app.add_subcommand(
      "verify", "Pointwise-minimum and H-constancy checks for a protocol");
  std::string vf_protocol, vf_switching;
  double vf_w = 0.0;
  VerifyTolerances vf_tols;
  c_verify->add_option("--protocol", vf_protocol, "Protocol JSON file")
      ->required();
  c_verify->add_option("--noise", vf_w, "Noise strength W")->required();
  c_verify->add_option("--switching", vf_switching,
                       "Switching-record CSV output");
  c_verify->add_option("--eps-sing", vf_tols.eps_sing,
                       "Singular-arc threshold on |F|");

  // ---- sweep -------------------------------------------------------------
  auto* c_sweep = app.add_subcommand(
      "sweep", "Optimize over a (tau, W) grid and tabulate C_min");
  std::string sw_taus, sw_ws, sw_method = "anneal";
  AnnealConfig sw_cfg;
  bool sw_no_refine = false, sw_no_warm = false, sw_no_defer = false;
  int sw_multistarts = 48;
  c_sweep->add_option("--tau-grid", sw_taus, "Grid: lo:hi:step or list")
      ->required();
  c_sweep->add_option("--noise-list", sw_ws, "Comma-separated W values")
      ->required();
  c_sweep->add_option("--method", sw_method, "anneal or bangbang");
  c_sweep->add_option("--multistarts", sw_multistarts,
                      "Bang-bang multistarts");
  c_sweep->add_flag("--no-refine", sw_no_refine, "Skip refinement");
  c_sweep->add_flag("--no-warm-start", sw_no_warm, "Independent grid points");
  c_sweep->add_flag("--no-defer", sw_no_defer,
                    "Never fall back to the bang-bang ansatz");
  add_anneal_options(c_sweep, sw_cfg);

  // ---- regimes -----------------------------------------------------------
  auto* c_regimes = app.add_subcommand(
      "regimes", "Estimate regime boundaries from a sweep CSV");
  std::string rg_sweep;
  double rg_delta = 1e-3;
  c_regimes->add_option("--sweep", rg_sweep, "Sweep CSV file")->required();
  c_regimes->add_option("--delta", rg_delta, "Plateau tolerance");

  // ---- baseline ----------------------------------------------------------
  auto* c_base = app.add_subcommand(
      "baseline", "Linear-ramp cost over an adiabatic tau window");
  std::string ba_taus = "10:100:10", ba_ws = "0,0.1,0.2";
  c_base->add_option("--tau-grid", ba_taus, "Grid: lo:hi:step or list");
  c_base->add_option("--noise-list", ba_ws, "Comma-separated W values");

  // ---- histogram ---------------------------------------------------------
  auto* c_hist = app.add_subcommand(
      "histogram", "Cost distribution of random protocols");
  std::string hs_taus;
  long hs_samples = 100000;
  double hs_w = 0.0;
  int hs_bins = 120;
  c_hist->add_option("--tau-grid", hs_taus, "Grid: lo:hi:step or list")
      ->required();
  c_hist->add_option("--samples", hs_samples, "Samples per tau (>= 1000)");
  c_hist->add_option("--noise", hs_w, "Noise strength W");
  c_hist->add_option("--bins", hs_bins, "Cost bins on [0, 1]");

  // ---- extrapolate -------------------------------------------------------
  auto* c_ext = app.add_subcommand(
      "extrapolate", "Polynomial-in-1/tau fit of a sweep's C_min curve");
  std::string ex_sweep;
  double ex_w = 0.25, ex_tau_min = 0.0, ex_tau_max = 1e30;
  int ex_degree = 3, ex_bootstrap = 1000;
  c_ext->add_option("--sweep", ex_sweep, "Sweep CSV file")->required();
  c_ext->add_option("--noise", ex_w, "Which W value to fit")->required();
  c_ext->add_option("--tau-min", ex_tau_min, "Window lower edge");
  c_ext->add_option("--tau-max", ex_tau_max, "Window upper edge");
  c_ext->add_option("--degree", ex_degree, "Fit degree (1-4)");
  c_ext->add_option("--bootstrap", ex_bootstrap, "Bootstrap resamples");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  const StatePair states = canonical_states();

  if (c_sim->parsed()) {
    const Protocol p = load_protocol(sim_protocol);
    Trajectory traj;
    const Eigen::Matrix4cd rho_tau =
        propagate(p, NoiseStrength(sim_w), states.rho0,
                  sim_traj.empty() ? nullptr : &traj);
    const double cost = trace_distance(states.sigma, rho_tau);
    if (!sim_traj.empty()) write_trajectory_csv(traj, sim_traj, sim_stride);
    std::cout << "cost=" << format_full(cost) << "\n";
    return 0;
  }

  if (c_anneal->parsed()) {
    an_cfg.dt = g.dt;
    an_cfg.seed = g.seed;
    an_cfg.threads = g.threads;
    const AnnealResult r = anneal(an_tau, NoiseStrength(an_w), an_cfg);
    const std::string proto_file =
        out_path(g, "protocol_" + point_tag(an_tau, an_w) + "_anneal.json");
    Protocol best = r.best_protocol;
    best.metadata["generator"] = "anneal";
    best.metadata["seed"] = std::to_string(g.seed);
    save_protocol(best, proto_file);
    append_anneal_result_csv(out_path(g, "anneal_results.csv"), an_tau, an_w,
                             g.seed, r.best_cost, proto_file);
    std::cout << "best_cost=" << format_full(r.best_cost) << "\n"
              << "protocol=" << proto_file << "\n";
    return 0;
  }

  if (c_bb->parsed()) {
    BangBangOptions opt;
    opt.multistarts = bb_multistarts;
    opt.seed = g.seed;
    opt.threads = g.threads;
    const BangBangResult r = optimize_bangbang(bb_tau, NoiseStrength(bb_w), opt);
    Protocol p = bangbang_protocol(r.params.t, bb_tau);
    p.metadata["generator"] = "bangbang";
    p.metadata["seed"] = std::to_string(g.seed);
    const std::string proto_file =
        out_path(g, "protocol_" + point_tag(bb_tau, bb_w) + "_bangbang.json");
    save_protocol(p, proto_file);
    std::cout << "cost=" << format_full(r.cost) << "\nswitch_times=";
    for (int k = 0; k < 6; ++k)
      std::cout << (k ? "," : "") << format_full(r.params.t[k]);
    std::cout << "\nprotocol=" << proto_file << "\n";
    return 0;
  }

  if (c_refine->parsed()) {
    const Protocol p = load_protocol(rf_protocol);
    const NoiseStrength w(rf_w);
    auto [refined, rep] = refine(p, w, rf_opt);
    print_report(rep);
    if (!rf_out.empty()) {
      Protocol out = refined;
      out.metadata["generator"] = "refine";
      save_protocol(out, rf_out);
      std::cout << "protocol=" << rf_out << "\n";
    }
    if (!rf_switching.empty())
      write_switching_csv(evaluate_switching(refined, w), rf_switching);
    return 0;
  }

  if (c_verify->parsed()) {
    const Protocol p = load_protocol(vf_protocol);
    const NoiseStrength w(vf_w);
    const RefinementReport rep = verify_optimality(p, w, vf_tols);
    std::cout << "cost=" << format_full(rep.final_cost)
              << " violations=" << rep.violations
              << " max_min_excess=" << format_full(rep.max_min_excess)
              << " hamiltonian_constancy="
              << format_full(rep.hamiltonian_constancy) << "\n";
    if (!vf_switching.empty())
      write_switching_csv(evaluate_switching(p, w), vf_switching);
    return 0;
  }

  if (c_sweep->parsed()) {
    SweepOptions opt;
    opt.tau_grid = parse_grid(sw_taus);
    opt.w_list = parse_grid(sw_ws);
    opt.method = sw_method;
    opt.anneal = sw_cfg;
    opt.anneal.dt = g.dt;
    opt.anneal.seed = g.seed;
    opt.anneal.threads = g.threads;
    opt.bangbang.multistarts = sw_multistarts;
    opt.bangbang.seed = g.seed;
    opt.bangbang.threads = g.threads;
    opt.grid.warm_start = !sw_no_warm;
    opt.grid.apply_refine = !sw_no_refine;
    opt.grid.defer_to_bangbang = !sw_no_defer;
    opt.grid.bangbang = opt.bangbang;

    SweepResult sweep = run_sweep(opt);
    fs::create_directories(fs::path(g.out_dir) / "protocols");
    for (SweepRow& row : sweep.rows) {
      if (row.method.rfind("failed:", 0) == 0) continue;
      row.protocol_file =
          "protocols/" + point_tag(row.tau, row.w) + ".json";
      Protocol p = row.protocol;
      p.metadata["generator"] = row.method;
      save_protocol(p, (fs::path(g.out_dir) / row.protocol_file).string());
    }
    for (double wv : opt.w_list) {
      std::vector<SweepRow> rows_w;
      for (const SweepRow& r : sweep.rows)
        if (r.w == wv) rows_w.push_back(r);
      try {
        const RegimeEstimate est = find_regimes(rows_w);
        sweep.regimes.push_back({wv, est.tau_c, est.tau_c_below_grid,
                                 est.regime2_end, est.regime2_found});
      } catch (const std::invalid_argument&) {
        // grid does not cover the regime boundaries; annotations omitted
      }
    }
    const std::string sweep_file = out_path(g, "sweep.csv");
    write_sweep_csv(sweep, sweep_file);
    std::cout << "sweep=" << sweep_file << " rows=" << sweep.rows.size()
              << "\n";
    return 0;
  }

  if (c_regimes->parsed()) {
    const SweepResult sweep = read_sweep_csv(rg_sweep);
    std::vector<double> ws;
    for (const SweepRow& r : sweep.rows)
      if (std::find(ws.begin(), ws.end(), r.w) == ws.end()) ws.push_back(r.w);
    std::sort(ws.begin(), ws.end());
    for (double wv : ws) {
      std::vector<SweepRow> rows_w;
      for (const SweepRow& r : sweep.rows)
        if (r.w == wv) rows_w.push_back(r);
      const RegimeEstimate est = find_regimes(rows_w, rg_delta);
      std::cout << "w=" << format_full(wv)
                << " tau_c=" << format_full(est.tau_c)
                << (est.tau_c_below_grid ? " (below grid)" : "");
      if (est.regime2_found)
        std::cout << " regime2_end=" << format_full(est.regime2_end);
      std::cout << "\n";
    }
    return 0;
  }

  if (c_base->parsed()) {
    const auto rows = adiabatic_baseline(parse_grid(ba_ws),
                                         parse_grid(ba_taus), g.dt, g.threads);
    const std::string path = out_path(g, "baseline.csv");
    write_baseline_csv(rows, path);
    std::cout << "baseline=" << path << " rows=" << rows.size() << "\n";
    return 0;
  }

  if (c_hist->parsed()) {
    const HistogramResult hist =
        cost_histogram(parse_grid(hs_taus), hs_samples, g.dt,
                       NoiseStrength(hs_w), g.seed, hs_bins, g.threads);
    const std::string hist_path = out_path(g, "histogram.csv");
    const std::string min_path = out_path(g, "histogram_minima.csv");
    write_histogram_csv(hist, hist_path);
    write_histogram_minima_csv(hist, min_path);
    std::cout << "histogram=" << hist_path << " minima=" << min_path << "\n";
    for (std::size_t ti = 0; ti < hist.taus.size(); ++ti)
      std::cout << "tau=" << format_full(hist.taus[ti])
                << " min_cost=" << format_full(hist.per_tau_min[ti]) << "\n";
    return 0;
  }

  if (c_ext->parsed()) {
    const SweepResult sweep = read_sweep_csv(ex_sweep);
    std::vector<SweepRow> rows_w;
    for (const SweepRow& r : sweep.rows)
      if (r.w == ex_w) rows_w.push_back(r);
    const ExtrapolationResult fit = extrapolate(
        rows_w, ex_tau_min, ex_tau_max, ex_degree, ex_bootstrap, g.seed);
    const std::string path = out_path(g, "extrapolation.csv");
    write_extrapolation_csv(fit, path);
    std::cout << "intercept=" << format_full(fit.intercept)
              << " stderr=" << format_full(fit.intercept_stderr)
              << " residual_rms=" << format_full(fit.residual_rms)
              << (fit.ill_conditioned ? " (ill-conditioned)" : "") << "\n"
              << "fit=" << path << "\n";
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const CLI::Error& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  }
}
