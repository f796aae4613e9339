#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "speclab/estimators.hpp"
#include "speclab/fuzz.hpp"
#include "speclab/io.hpp"
#include "speclab/potential.hpp"
#include "speclab/propagator.hpp"
#include "speclab/sweep.hpp"
#include "speclab/transport.hpp"

namespace speclab {

// ---------------------------------------------------------------------------
// Trajectory observable tracker: one evolution, running sups finalized at a
// ladder of time checkpoints.

struct SupLadder {
  std::vector<double> checkpoints;
  std::vector<double> sup_h_alpha_sq;  // homogeneous H^alpha squared
  std::vector<double> sup_h1_sq;       // homogeneous H^1 squared
  std::vector<double> sup_h_alpha_full;  // inhomogeneous H^alpha (growth runs)
  double max_norm_drift = 0.0;
};

inline SupLadder track_sup_ladder(const SymbolSpec& spec,
                                  const PotentialModel& pot, double k,
                                  int n_max, const std::vector<double>& T_list,
                                  double alpha, double tol) {
  SupLadder out;
  out.checkpoints = T_list;
  const std::size_t n = T_list.size();
  out.sup_h_alpha_sq.assign(n, 0.0);
  out.sup_h1_sq.assign(n, 0.0);
  out.sup_h_alpha_full.assign(n, 0.0);

  double run_a = 0.0, run_1 = 0.0, run_af = 0.0;
  std::size_t next = 0;
  EvolveConfig cfg;
  cfg.k = k;
  cfg.t0 = 0.0;
  cfg.t1 = T_list.back();
  cfg.tol = tol;
  cfg.observer_times = T_list;
  cfg.picture = Picture::interaction;
  cfg.step_observer = [&](double t, const FourierState& v) {
    while (next < n && t > T_list[next] + 1e-12) {
      out.sup_h_alpha_sq[next] = run_a;
      out.sup_h1_sq[next] = run_1;
      out.sup_h_alpha_full[next] = run_af;
      ++next;
    }
    run_a = std::max(run_a, sobolev_norm_sq(v, {alpha, true}));
    run_1 = std::max(run_1, sobolev_norm_sq(v, {1.0, true}));
    run_af = std::max(run_af, std::sqrt(sobolev_norm_sq(v, {alpha, false})));
  };
  Trajectory tr = evolve(constant_one(n_max), spec, pot, cfg);
  while (next < n) {
    out.sup_h_alpha_sq[next] = run_a;
    out.sup_h1_sq[next] = run_1;
    out.sup_h_alpha_full[next] = run_af;
    ++next;
  }
  out.max_norm_drift = tr.stats.max_norm_drift;
  return out;
}

// ---------------------------------------------------------------------------
// Experiment plumbing

struct ExperimentOutput {
  json summary;
  std::vector<std::pair<std::string, std::string>> files;  // name -> bytes
  std::vector<std::pair<std::string, bool>> assertions;

  bool all_passed() const {
    for (const auto& [name, ok] : assertions)
      if (!ok) return false;
    return true;
  }
  std::string first_failure() const {
    for (const auto& [name, ok] : assertions)
      if (!ok) return name;
    return {};
  }
};

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& key, const std::string& what)
      : std::runtime_error("config key '" + key + "': " + what), key(key) {}
  std::string key;
};

namespace cfgutil {

template <typename T>
T get(const json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const std::exception& e) {
    throw ConfigError(key, e.what());
  }
}

template <typename T>
T require(const json& j, const std::string& key) {
  if (!j.contains(key)) throw ConfigError(key, "missing");
  try {
    return j.at(key).get<T>();
  } catch (const std::exception& e) {
    throw ConfigError(key, e.what());
  }
}

}  // namespace cfgutil

// Shared potential recipe: {"kind": ..., parameters...} or {"file": path}.
inline PotentialModel potential_from_config(const json& j,
                                            std::uint64_t default_seed) {
  if (j.contains("file")) {
    std::ifstream in(j.at("file").get<std::string>());
    if (!in) throw ConfigError("potential.file", "cannot open");
    json pj;
    in >> pj;
    return potential_from_json(pj);
  }
  const std::string kind = cfgutil::get<std::string>(j, "kind", "random_bounded");
  const std::uint64_t seed = cfgutil::get<std::uint64_t>(j, "seed", default_seed);
  const int l_max = cfgutil::get<int>(j, "l_max", 6);
  const double t0 = cfgutil::get<double>(j, "t0", 0.0);
  const double t1 = cfgutil::get<double>(j, "t1", 8.0);
  const int cells = cfgutil::get<int>(j, "cells", 32);
  if (kind == "zero") return make_zero_potential(t0, std::max(t1, t0 + 1.0));
  if (kind == "constant_imag")
    return make_constant_imag(cfgutil::get<double>(j, "c", 1.0));
  if (kind == "random_bounded")
    return make_random_bounded(seed, l_max, uniform_grid(t0, t1, cells),
                               cfgutil::get<double>(j, "bound", 1.0));
  if (kind == "random_complex")
    return make_random_complex(seed, l_max, uniform_grid(t0, t1, cells),
                               cfgutil::get<double>(j, "bound", 1.0));
  if (kind == "decaying")
    return make_decaying(seed, l_max, cfgutil::get<double>(j, "gamma", 0.96),
                         cfgutil::get<double>(j, "C", 1.0),
                         uniform_grid(t0, t1, cells));
  if (kind == "oscillatory_Q") {
    OscillatoryQSpec spec = OscillatoryQSpec::random(
        seed, l_max, cfgutil::get<double>(j, "gamma", 0.9),
        cfgutil::get<double>(j, "lambda", 0.1),
        cfgutil::get<double>(j, "start_T", t0));
    return make_oscillatory(spec, geometric_grid(t0, t1, cells));
  }
  throw ConfigError("potential.kind", "unknown kind " + kind);
}

inline SymbolSpec symbol_from_config(const json& j) {
  const std::string kind = cfgutil::get<std::string>(j, "kind", "schrodinger");
  if (kind == "schrodinger") return SymbolSpec::schrodinger();
  if (kind == "gaps") return SymbolSpec::gaps();
  if (kind == "decay_laplacian") return SymbolSpec::decay_laplacian();
  if (kind == "decay_drift") return SymbolSpec::decay_drift();
  if (kind == "static") {
    auto p = cfgutil::get<std::vector<double>>(j, "poly", {0.0, 1.0, 0.0});
    p.resize(3, 0.0);
    return SymbolSpec::static_symbol(p[0], p[1], p[2]);
  }
  throw ConfigError("symbol.kind", "unknown kind " + kind);
}

// ---------------------------------------------------------------------------
// theorem11: LHS_alpha(T) = int_{-A}^{A} sup_t ||u||^2_{dot H^alpha} dk
// against D1+D2 and the open-problem side 1 + int int V^2, over a T-doubling
// ladder and an ensemble of bounded real potentials.

struct Theorem11Config {
  int n_ensemble = 8;
  double alpha = 0.4;
  double A = 2.0;
  int M = 64;
  int n_max = 64;
  std::vector<double> T_list = {1.0, 2.0, 4.0, 8.0};
  std::uint64_t seed = 1;
  int threads = 1;
  double tol = 1e-9;
  int l_max = 6;
  int cells = 32;
  double bound = 1.0;
  std::string weight = "sqrt1p";  // w(t) = (1+t)^{1/2}, or "one"

  static Theorem11Config from_json(const json& j) {
    Theorem11Config c;
    c.n_ensemble = cfgutil::get<int>(j, "n_ensemble", c.n_ensemble);
    c.alpha = cfgutil::get<double>(j, "alpha", c.alpha);
    c.A = cfgutil::get<double>(j, "A", c.A);
    c.M = cfgutil::get<int>(j, "M", c.M);
    c.n_max = cfgutil::get<int>(j, "n_max", c.n_max);
    c.T_list = cfgutil::get<std::vector<double>>(j, "T_list", c.T_list);
    c.seed = cfgutil::get<std::uint64_t>(j, "seed", c.seed);
    c.threads = cfgutil::get<int>(j, "threads", c.threads);
    c.tol = cfgutil::get<double>(j, "tol", c.tol);
    c.l_max = cfgutil::get<int>(j, "l_max", c.l_max);
    c.cells = cfgutil::get<int>(j, "cells", c.cells);
    c.bound = cfgutil::get<double>(j, "bound", c.bound);
    c.weight = cfgutil::get<std::string>(j, "weight", c.weight);
    if (!(c.alpha < 0.5))
      throw ConfigError("alpha", "theorem11 requires alpha < 1/2");
    return c;
  }

  std::function<double(double)> weight_fn() const {
    if (weight == "one") return [](double) { return 1.0; };
    return [](double t) { return std::sqrt(1.0 + t); };
  }
};

struct Theorem11Row {
  std::uint64_t pot_seed;
  double T;
  double lhs_alpha;   // int dk of sup_t ||u||^2_{dot H^alpha}
  double lhs_h1;      // same at alpha = 1
  double d1, d2;
  double open_rhs;    // 1 + int_0^T int V^2
  double ratio_dd;    // lhs_alpha / (d1 + d2)
  double ratio_open;  // lhs_h1 / open_rhs
};

struct Theorem11Result {
  std::vector<Theorem11Row> rows;
  std::vector<double> max_ratio_dd_per_T;  // over the ensemble, T-ordered
  std::vector<double> T_list;
  double completeness = 1.0;
};

inline Theorem11Result run_theorem11(const Theorem11Config& cfg) {
  const SymbolSpec sch = SymbolSpec::schrodinger();
  Theorem11Result res;
  res.T_list = cfg.T_list;
  res.max_ratio_dd_per_T.assign(cfg.T_list.size(), 0.0);
  const double Tmax = cfg.T_list.back();

  for (int e = 0; e < cfg.n_ensemble; ++e) {
    const std::uint64_t pot_seed = CounterRng(cfg.seed, 0x711 + e).next_u64();
    const PotentialModel pot = make_random_bounded(
        pot_seed, cfg.l_max, uniform_grid(0.0, Tmax, cfg.cells), cfg.bound);

    SweepConfig sweep;
    sweep.A = cfg.A;
    sweep.M = cfg.M;
    sweep.seed = pot_seed;
    sweep.threads = cfg.threads;
    for (double T : cfg.T_list) {
      sweep.columns.push_back("sup_ha_sq_T" + format_double(T));
      sweep.columns.push_back("sup_h1_sq_T" + format_double(T));
    }
    sweep.eval = [&](double k, std::uint64_t) {
      const SupLadder lad = track_sup_ladder(sch, pot, k, cfg.n_max,
                                             cfg.T_list, cfg.alpha, cfg.tol);
      std::vector<double> v;
      for (std::size_t i = 0; i < cfg.T_list.size(); ++i) {
        v.push_back(lad.sup_h_alpha_sq[i]);
        v.push_back(lad.sup_h1_sq[i]);
      }
      return v;
    };
    const SweepReport rep = k_sweep(sweep);
    res.completeness = std::min(res.completeness, rep.completeness);

    for (std::size_t i = 0; i < cfg.T_list.size(); ++i) {
      const double T = cfg.T_list[i];
      Theorem11Row row;
      row.pot_seed = pot_seed;
      row.T = T;
      row.lhs_alpha = rep.integrals[2 * i];
      row.lhs_h1 = rep.integrals[2 * i + 1];
      row.d1 = D1(pot, T);
      row.d2 = D2(pot, T, cfg.weight_fn());
      row.open_rhs = 1.0 + v_squared_time_integral(pot, 0.0, T);
      row.ratio_dd = row.lhs_alpha / (row.d1 + row.d2);
      row.ratio_open = row.lhs_h1 / row.open_rhs;
      res.max_ratio_dd_per_T[i] =
          std::max(res.max_ratio_dd_per_T[i], row.ratio_dd);
      res.rows.push_back(row);
    }
  }
  return res;
}

inline ExperimentOutput emit_theorem11(const Theorem11Config& cfg,
                                       const Theorem11Result& res) {
  ExperimentOutput out;
  std::string csv = csv_header({"pot_seed", "T", "lhs_alpha", "lhs_h1", "d1",
                                "d2", "open_rhs", "ratio_dd", "ratio_open"});
  for (const auto& r : res.rows)
    csv += csv_line({static_cast<double>(r.pot_seed), r.T, r.lhs_alpha,
                     r.lhs_h1, r.d1, r.d2, r.open_rhs, r.ratio_dd,
                     r.ratio_open});
  out.files.emplace_back("theorem11.csv", csv);
  json s;
  s["A"] = cfg.A;
  s["M"] = cfg.M;
  s["n_max"] = cfg.n_max;
  s["alpha"] = cfg.alpha;
  s["T_list"] = res.T_list;
  s["max_ratio_dd_per_T"] = res.max_ratio_dd_per_T;
  s["completeness"] = res.completeness;
  out.summary = s;
  out.assertions.emplace_back("all trajectories completed",
                              res.completeness == 1.0);
  bool finite = true;
  for (const auto& r : res.rows)
    if (!std::isfinite(r.ratio_dd) || !std::isfinite(r.ratio_open))
      finite = false;
  out.assertions.emplace_back("ratios finite", finite);
  return out;
}

// ---------------------------------------------------------------------------
// lemma22: k-grid average of sup_S ||P_N Vtilde_S Q_N||^2 against the
// N^{-1} log N scaling across an N-doubling ladder.

struct Lemma22Config {
  std::uint64_t seed = 1;
  int l_max = 8;
  double T = 2.0;
  std::vector<int> N_list = {8, 16, 32, 64};
  double A = 2.0;
  int M = 64;
  int grid_cells = 512;
  int pot_cells = 32;
  int threads = 1;

  static Lemma22Config from_json(const json& j) {
    Lemma22Config c;
    c.seed = cfgutil::get<std::uint64_t>(j, "seed", c.seed);
    c.l_max = cfgutil::get<int>(j, "l_max", c.l_max);
    c.T = cfgutil::get<double>(j, "T", c.T);
    c.N_list = cfgutil::get<std::vector<int>>(j, "N_list", c.N_list);
    c.A = cfgutil::get<double>(j, "A", c.A);
    c.M = cfgutil::get<int>(j, "M", c.M);
    c.grid_cells = cfgutil::get<int>(j, "grid_cells", c.grid_cells);
    c.pot_cells = cfgutil::get<int>(j, "pot_cells", c.pot_cells);
    c.threads = cfgutil::get<int>(j, "threads", c.threads);
    return c;
  }
};

struct Lemma22Result {
  std::vector<int> N_list;
  std::vector<double> avg_lower_sq;  // k-grid average of sup-HS^2 (lower)
  std::vector<double> avg_upper_sq;
  std::vector<double> normalized;  // avg_lower_sq * N / log N
  double band_ratio = 0.0;         // max/min of normalized
  SlopeFit slope;                  // of normalized vs N (should be ~flat)
  double tail_sensitivity = 0.0;   // |avg(A) - avg(2A)|/avg(A) at largest N
  std::string rows_csv;
};

inline Lemma22Result run_lemma22(const Lemma22Config& cfg) {
  const SymbolSpec sch = SymbolSpec::schrodinger();
  const PotentialModel pot = make_random_bounded(
      cfg.seed, cfg.l_max, uniform_grid(0.0, cfg.T, cfg.pot_cells), 1.0);
  const IntervalGrid grid = make_interval_grid(pot, 0.0, cfg.T, cfg.grid_cells);

  Lemma22Result res;
  res.N_list = cfg.N_list;
  res.rows_csv = csv_header({"N", "k", "value_lower", "value_upper", "grid_size"});

  auto k_average = [&](int N, double A) {
    SweepConfig sweep;
    sweep.A = A;
    sweep.M = cfg.M;
    sweep.seed = cfg.seed;
    sweep.threads = cfg.threads;
    sweep.columns = {"sup_hs_lower_sq", "sup_hs_upper_sq"};
    sweep.eval = [&](double k, std::uint64_t) {
      const SupHsBounds b = sup_hs_offdiag(pot, sch, N, k, grid);
      return std::vector<double>{b.lower * b.lower, b.upper * b.upper};
    };
    return k_sweep(sweep);
  };

  for (int N : cfg.N_list) {
    const SweepReport rep = k_average(N, cfg.A);
    for (const auto& r : rep.rows)
      res.rows_csv += csv_line({static_cast<double>(N), r.k,
                                std::sqrt(r.values[0]), std::sqrt(r.values[1]),
                                static_cast<double>(grid.points())});
    // averages (integral / (2A))
    res.avg_lower_sq.push_back(rep.integrals[0] / (2.0 * cfg.A));
    res.avg_upper_sq.push_back(rep.integrals[1] / (2.0 * cfg.A));
    res.normalized.push_back(res.avg_lower_sq.back() * N / std::log(N));
  }
  const auto [mn, mx] =
      std::minmax_element(res.normalized.begin(), res.normalized.end());
  res.band_ratio = *mx / std::max(*mn, 1e-300);
  std::vector<double> Ns(cfg.N_list.begin(), cfg.N_list.end());
  res.slope = fit_loglog(Ns, res.normalized);

  const SweepReport wide = k_average(cfg.N_list.back(), 2.0 * cfg.A);
  const double avg_wide = wide.integrals[0] / (4.0 * cfg.A);
  res.tail_sensitivity = std::abs(avg_wide - res.avg_lower_sq.back()) /
                         std::max(res.avg_lower_sq.back(), 1e-300);
  return res;
}

inline ExperimentOutput emit_lemma22(const Lemma22Config& cfg,
                                     const Lemma22Result& res) {
  ExperimentOutput out;
  out.files.emplace_back("lemma22.csv", res.rows_csv);
  json s;
  s["N_list"] = res.N_list;
  s["A"] = cfg.A;
  s["avg_lower_sq"] = res.avg_lower_sq;
  s["avg_upper_sq"] = res.avg_upper_sq;
  s["normalized_by_logN_over_N"] = res.normalized;
  s["band_ratio"] = res.band_ratio;
  s["loglog_slope"] = res.slope.slope;
  s["loglog_slope_half_width"] = res.slope.half_width;
  s["tail_sensitivity_A_vs_2A"] = res.tail_sensitivity;
  out.summary = s;
  out.assertions.emplace_back("normalized values positive",
                              *std::min_element(res.normalized.begin(),
                                                res.normalized.end()) > 0.0);
  return out;
}

// ---------------------------------------------------------------------------
// oscillatory: zero-mode deviation scaling in lambda and T_start.

struct OscillatoryConfig {
  double gamma = 0.9;
  double lambda = 0.02;
  double T_start = 4.0;
  double t_factor = 16.0;  // evolve to T_start * t_factor
  int l_max = 4;
  int n_max = 32;
  double A = 2.0;
  int M = 32;
  std::uint64_t seed = 1;
  int threads = 1;
  double tol = 1e-9;
  int cells = 96;

  static OscillatoryConfig from_json(const json& j) {
    OscillatoryConfig c;
    c.gamma = cfgutil::get<double>(j, "gamma", c.gamma);
    c.lambda = cfgutil::get<double>(j, "lambda", c.lambda);
    c.T_start = cfgutil::get<double>(j, "T_start", c.T_start);
    c.t_factor = cfgutil::get<double>(j, "t_factor", c.t_factor);
    c.l_max = cfgutil::get<int>(j, "l_max", c.l_max);
    c.n_max = cfgutil::get<int>(j, "n_max", c.n_max);
    c.A = cfgutil::get<double>(j, "A", c.A);
    c.M = cfgutil::get<int>(j, "M", c.M);
    c.seed = cfgutil::get<std::uint64_t>(j, "seed", c.seed);
    c.threads = cfgutil::get<int>(j, "threads", c.threads);
    c.tol = cfgutil::get<double>(j, "tol", c.tol);
    c.cells = cfgutil::get<int>(j, "cells", c.cells);
    return c;
  }
};

struct OscillatoryRun {
  double lambda, T_start;
  double avg_tail;       // k-average of sup (1 - |u_hat_0|^2)
  double avg_dev0_sq;    // k-average of sup |1 - u_hat_0|^2
  double max_dev0;       // max over k of sup |1 - u_hat_0|
  long chain_violations; // total over k
  std::string csv;
};

struct OscillatoryResult {
  std::vector<OscillatoryRun> runs;  // (lam,T), (2lam,T), (lam,2T)
  double tail_ratio = 0.0;           // avg_tail(2 lam)/avg_tail(lam)
  double dev0_sq_ratio = 0.0;        // avg_dev0_sq(2 lam)/avg_dev0_sq(lam)
  double T_trend_ratio = 0.0;        // avg_tail(lam, 2T)/avg_tail(lam, T)
};

inline OscillatoryRun oscillatory_one_run(const OscillatoryConfig& cfg,
                                          double lambda, double T_start) {
  const double t_end = T_start * cfg.t_factor;
  OscillatoryQSpec qspec = OscillatoryQSpec::random(cfg.seed, cfg.l_max,
                                                    cfg.gamma, lambda, T_start);
  const PotentialModel pot =
      make_oscillatory(qspec, geometric_grid(T_start, t_end, cfg.cells));

  SweepConfig sweep;
  sweep.A = cfg.A;
  sweep.M = cfg.M;
  sweep.seed = cfg.seed;
  sweep.threads = cfg.threads;
  sweep.columns = {"sup_tail", "sup_dev0", "sup_dev_full", "chain_violations"};
  sweep.eval = [&](double k, std::uint64_t) {
    const ZeroModeResult r =
        zero_mode_deviation(pot, T_start, k, t_end, cfg.n_max, cfg.tol);
    return std::vector<double>{r.sup_tail_mass, r.sup_dev_zero_mode,
                               r.sup_dev_full,
                               static_cast<double>(r.chain_violations)};
  };
  const SweepReport rep = k_sweep(sweep);

  OscillatoryRun run;
  run.lambda = lambda;
  run.T_start = T_start;
  double tail_acc = 0.0, dev_acc = 0.0, viol = 0.0;
  run.max_dev0 = 0.0;
  for (const auto& r : rep.rows) {
    tail_acc += r.values[0];
    dev_acc += r.values[1] * r.values[1];
    run.max_dev0 = std::max(run.max_dev0, r.values[1]);
    viol += r.values[3];
  }
  run.avg_tail = tail_acc / cfg.M;
  run.avg_dev0_sq = dev_acc / cfg.M;
  run.chain_violations = static_cast<long>(viol);
  run.csv = rep.to_csv();
  return run;
}

inline OscillatoryResult run_oscillatory(const OscillatoryConfig& cfg) {
  OscillatoryResult res;
  res.runs.push_back(oscillatory_one_run(cfg, cfg.lambda, cfg.T_start));
  res.runs.push_back(oscillatory_one_run(cfg, 2.0 * cfg.lambda, cfg.T_start));
  res.runs.push_back(oscillatory_one_run(cfg, cfg.lambda, 2.0 * cfg.T_start));
  res.tail_ratio = res.runs[1].avg_tail / std::max(res.runs[0].avg_tail, 1e-300);
  res.dev0_sq_ratio =
      res.runs[1].avg_dev0_sq / std::max(res.runs[0].avg_dev0_sq, 1e-300);
  res.T_trend_ratio =
      res.runs[2].avg_tail / std::max(res.runs[0].avg_tail, 1e-300);
  return res;
}

inline ExperimentOutput emit_oscillatory(const OscillatoryConfig& cfg,
                                         const OscillatoryResult& res) {
  ExperimentOutput out;
  std::string csv = csv_header(
      {"lambda", "T_start", "avg_tail", "avg_dev0_sq", "max_dev0"});
  for (const auto& r : res.runs)
    csv += csv_line({r.lambda, r.T_start, r.avg_tail, r.avg_dev0_sq, r.max_dev0});
  out.files.emplace_back("oscillatory.csv", csv);
  for (std::size_t i = 0; i < res.runs.size(); ++i)
    out.files.emplace_back("oscillatory_run" + std::to_string(i) + ".csv",
                           res.runs[i].csv);
  json s;
  s["gamma"] = cfg.gamma;
  s["lambda"] = cfg.lambda;
  s["T_start"] = cfg.T_start;
  s["tail_ratio_lambda_doubling"] = res.tail_ratio;
  s["dev0_sq_ratio_lambda_doubling"] = res.dev0_sq_ratio;
  s["tail_ratio_T_doubling"] = res.T_trend_ratio;
  out.summary = s;
  long viol = 0;
  for (const auto& r : res.runs) viol += r.chain_violations;
  out.assertions.emplace_back("trick1 chain holds at every sample", viol == 0);
  return out;
}

// ---------------------------------------------------------------------------
// wkb: per-block WKB error trend across a diadic T-ladder.

struct WkbTrendConfig {
  double gamma = 0.96;
  int n_max = 128;
  double A = 2.0;
  int M = 32;
  std::vector<double> T_list = {64.0, 256.0, 1024.0};
  std::uint64_t seed = 1;
  int threads = 1;
  int l_max = 8;
  double cell_width = 0.5;
  double C = 1.0;
  double tol = 1e-9;
  int n_obs = 16;
  int x_points = 512;

  static WkbTrendConfig from_json(const json& j) {
    WkbTrendConfig c;
    c.gamma = cfgutil::get<double>(j, "gamma", c.gamma);
    c.n_max = cfgutil::get<int>(j, "n_max", c.n_max);
    c.A = cfgutil::get<double>(j, "A", c.A);
    c.M = cfgutil::get<int>(j, "M", c.M);
    c.T_list = cfgutil::get<std::vector<double>>(j, "T_list", c.T_list);
    c.seed = cfgutil::get<std::uint64_t>(j, "seed", c.seed);
    c.threads = cfgutil::get<int>(j, "threads", c.threads);
    c.l_max = cfgutil::get<int>(j, "l_max", c.l_max);
    c.cell_width = cfgutil::get<double>(j, "cell_width", c.cell_width);
    c.C = cfgutil::get<double>(j, "C", c.C);
    c.tol = cfgutil::get<double>(j, "tol", c.tol);
    c.n_obs = cfgutil::get<int>(j, "n_obs", c.n_obs);
    c.x_points = cfgutil::get<int>(j, "x_points", c.x_points);
    return c;
  }
};

struct WkbTrendResult {
  std::vector<double> T_list;
  std::vector<double> median_error;  // over k, per T
  double end_over_start = 0.0;
  bool monotone = false;
  std::string csv;
};

inline WkbTrendResult run_wkb_trend(const WkbTrendConfig& cfg) {
  // One potential over the whole span with a fixed time resolution, so the
  // local roughness scale does not change with T.
  const double span_lo = cfg.T_list.front();
  const double span_hi = 2.0 * cfg.T_list.back();
  const int cells = std::max(
      16, static_cast<int>(std::ceil((span_hi - span_lo) / cfg.cell_width)));
  const PotentialModel pot = make_decaying(
      cfg.seed, cfg.l_max, cfg.gamma, cfg.C, uniform_grid(span_lo, span_hi, cells));
  const DiadicParams params = DiadicParams::for_gamma(cfg.gamma);

  WkbTrendResult res;
  res.T_list = cfg.T_list;
  res.csv = csv_header({"T", "k", "sup_error"});

  for (double T : cfg.T_list) {
    SweepConfig sweep;
    sweep.A = cfg.A;
    sweep.M = cfg.M;
    sweep.seed = cfg.seed;
    sweep.threads = cfg.threads;
    sweep.columns = {"sup_error"};
    sweep.eval = [&](double k, std::uint64_t) {
      WkbOptions opt;
      opt.n_obs = cfg.n_obs;
      opt.x_points = cfg.x_points;
      opt.tol = cfg.tol;
      const WkbResult w =
          wkb_compare(pot, params, T, k, constant_one(cfg.n_max), opt);
      return std::vector<double>{w.sup_error};
    };
    const SweepReport rep = k_sweep(sweep);
    std::vector<double> errs;
    for (const auto& r : rep.rows)
      if (r.ok) {
        errs.push_back(r.values[0]);
        res.csv += csv_line({T, r.k, r.values[0]});
      }
    res.median_error.push_back(quantile(errs, 0.5));
  }
  res.monotone = true;
  for (std::size_t i = 1; i < res.median_error.size(); ++i)
    if (res.median_error[i] > res.median_error[i - 1]) res.monotone = false;
  res.end_over_start =
      res.median_error.back() / std::max(res.median_error.front(), 1e-300);
  return res;
}

inline ExperimentOutput emit_wkb_trend(const WkbTrendConfig& cfg,
                                       const WkbTrendResult& res) {
  ExperimentOutput out;
  out.files.emplace_back("wkb_trend.csv", res.csv);
  json s;
  s["gamma"] = cfg.gamma;
  s["n_max"] = cfg.n_max;
  s["T_list"] = res.T_list;
  s["median_error"] = res.median_error;
  s["end_over_start"] = res.end_over_start;
  s["monotone_decreasing"] = res.monotone;
  out.summary = s;
  out.assertions.emplace_back("median errors positive",
                              res.median_error.front() > 0.0);
  return out;
}

// ---------------------------------------------------------------------------
// diadic: chained pipeline over a lambda ladder.

struct DiadicConfig {
  double gamma = 0.96;
  std::vector<double> lambda_list = {0.4, 0.2, 0.1};
  int j0 = 4;
  int j_max = 7;
  int n_max = 32;
  double A = 2.0;
  int M = 16;
  std::uint64_t seed = 1;
  int threads = 1;
  int l_max = 4;
  double cell_width = 0.5;
  double tol = 1e-8;
  int x_points = 256;

  static DiadicConfig from_json(const json& j) {
    DiadicConfig c;
    c.gamma = cfgutil::get<double>(j, "gamma", c.gamma);
    c.lambda_list = cfgutil::get<std::vector<double>>(j, "lambda_list", c.lambda_list);
    c.j0 = cfgutil::get<int>(j, "j0", c.j0);
    c.j_max = cfgutil::get<int>(j, "j_max", c.j_max);
    c.n_max = cfgutil::get<int>(j, "n_max", c.n_max);
    c.A = cfgutil::get<double>(j, "A", c.A);
    c.M = cfgutil::get<int>(j, "M", c.M);
    c.seed = cfgutil::get<std::uint64_t>(j, "seed", c.seed);
    c.threads = cfgutil::get<int>(j, "threads", c.threads);
    c.l_max = cfgutil::get<int>(j, "l_max", c.l_max);
    c.cell_width = cfgutil::get<double>(j, "cell_width", c.cell_width);
    c.tol = cfgutil::get<double>(j, "tol", c.tol);
    c.x_points = cfgutil::get<int>(j, "x_points", c.x_points);
    return c;
  }
};

struct DiadicLambdaRow {
  double lambda;
  double k_avg_sup_u_minus_G;
  double bad_set_fraction;
  std::vector<double> per_j_median_wkb;
  std::vector<DiadicPerK> per_k;
};

struct DiadicResult {
  std::vector<DiadicLambdaRow> rows;
  bool error_decreases = false;
};

inline DiadicResult run_diadic(const DiadicConfig& cfg) {
  DiadicParams params = DiadicParams::for_gamma(cfg.gamma);
  params.A = cfg.A;
  std::vector<double> k_grid;
  for (int i = 0; i < cfg.M; ++i)
    k_grid.push_back(-cfg.A + 2.0 * cfg.A * (i + 0.5) / cfg.M);

  const double lo = std::pow(2.0, cfg.j0);
  const double hi = std::pow(2.0, cfg.j_max + 1);
  const int cells = std::max(
      16, static_cast<int>(std::ceil((hi - lo) / cfg.cell_width)));

  DiadicResult res;
  for (double lambda : cfg.lambda_list) {
    const PotentialModel pot = make_decaying(cfg.seed, cfg.l_max, cfg.gamma,
                                             lambda, uniform_grid(lo, hi, cells));
    DiadicOptions opt;
    opt.x_points = cfg.x_points;
    opt.tol = cfg.tol;
    // parallel over k: run per-k pipelines and merge in k order
    DiadicReport merged;
    std::vector<DiadicReport> parts(k_grid.size());
    parallel_for(static_cast<int>(k_grid.size()), cfg.threads, [&](int i) {
      parts[static_cast<std::size_t>(i)] =
          diadic_pipeline(pot, params, {k_grid[static_cast<std::size_t>(i)]},
                          cfg.j0, cfg.j_max, cfg.n_max, opt);
    });
    merged.j0 = cfg.j0;
    merged.j_max = cfg.j_max;
    std::vector<std::vector<double>> per_j(
        static_cast<std::size_t>(cfg.j_max - cfg.j0 + 1));
    double acc = 0.0;
    int bad = 0;
    for (const auto& p : parts) {
      merged.rows.push_back(p.rows.front());
      acc += p.rows.front().sup_u_minus_G;
      if (p.rows.front().betar_flagged || p.rows.front().omega_sum >= 1.0)
        ++bad;
      for (std::size_t jj = 0; jj < p.rows.front().block_wkb_errors.size(); ++jj)
        per_j[jj].push_back(p.rows.front().block_wkb_errors[jj]);
    }
    DiadicLambdaRow row;
    row.lambda = lambda;
    row.k_avg_sup_u_minus_G = acc / static_cast<double>(k_grid.size());
    row.bad_set_fraction =
        static_cast<double>(bad) / static_cast<double>(k_grid.size());
    for (auto& v : per_j) row.per_j_median_wkb.push_back(quantile(v, 0.5));
    res.rows.push_back(std::move(row));
  }
  res.error_decreases = true;
  for (std::size_t i = 1; i < res.rows.size(); ++i)
    if (res.rows[i].k_avg_sup_u_minus_G >=
        res.rows[i - 1].k_avg_sup_u_minus_G)
      res.error_decreases = false;
  return res;
}

inline ExperimentOutput emit_diadic(const DiadicConfig& cfg,
                                    const DiadicResult& res) {
  ExperimentOutput out;
  std::string csv =
      csv_header({"lambda", "k_avg_sup_u_minus_G", "bad_set_fraction"});
  for (const auto& r : res.rows)
    csv += csv_line({r.lambda, r.k_avg_sup_u_minus_G, r.bad_set_fraction});
  out.files.emplace_back("diadic.csv", csv);
  json s;
  s["gamma"] = cfg.gamma;
  s["j0"] = cfg.j0;
  s["j_max"] = cfg.j_max;
  json rows = json::array();
  for (const auto& r : res.rows) {
    json rr;
    rr["lambda"] = r.lambda;
    rr["k_avg_sup_u_minus_G"] = r.k_avg_sup_u_minus_G;
    rr["bad_set_fraction"] = r.bad_set_fraction;
    rr["per_j_median_wkb"] = r.per_j_median_wkb;
    rows.push_back(rr);
  }
  s["rows"] = rows;
  s["error_decreases_with_lambda"] = res.error_decreases;
  out.summary = s;
  out.assertions.emplace_back("lambda ladder error trend decreasing",
                              res.error_decreases);
  return out;
}

// ---------------------------------------------------------------------------
// growth: complex bounded V, fitted growth exponent theta per k node.

struct GrowthConfig {
  double alpha = 0.5;
  double p = 1.6;
  double A = 2.0;
  int M = 32;
  int n_max = 32;
  std::vector<double> T_list = {1.0, 2.0, 4.0};
  std::uint64_t seed = 1;
  int threads = 1;
  double tol = 1e-8;
  int l_max = 4;
  int cells = 16;
  double bound = 1.0;

  static GrowthConfig from_json(const json& j) {
    GrowthConfig c;
    c.alpha = cfgutil::get<double>(j, "alpha", c.alpha);
    c.p = cfgutil::get<double>(j, "p", c.p);
    c.A = cfgutil::get<double>(j, "A", c.A);
    c.M = cfgutil::get<int>(j, "M", c.M);
    c.n_max = cfgutil::get<int>(j, "n_max", c.n_max);
    c.T_list = cfgutil::get<std::vector<double>>(j, "T_list", c.T_list);
    c.seed = cfgutil::get<std::uint64_t>(j, "seed", c.seed);
    c.threads = cfgutil::get<int>(j, "threads", c.threads);
    c.tol = cfgutil::get<double>(j, "tol", c.tol);
    c.l_max = cfgutil::get<int>(j, "l_max", c.l_max);
    c.cells = cfgutil::get<int>(j, "cells", c.cells);
    c.bound = cfgutil::get<double>(j, "bound", c.bound);
    return c;
  }
};

struct GrowthResult {
  std::vector<double> thetas;  // per k node
  double q10 = 0, q50 = 0, q90 = 0;
  double fraction_below_2p2 = 0.0;
  std::string csv;
};

inline GrowthResult run_growth(const GrowthConfig& cfg) {
  const ComplexVParams params(cfg.p, cfg.alpha);  // validates the exponents
  (void)params;
  const SymbolSpec sch = SymbolSpec::schrodinger();
  const PotentialModel pot = make_random_complex(
      cfg.seed, cfg.l_max, uniform_grid(0.0, cfg.T_list.back(), cfg.cells),
      cfg.bound);

  SweepConfig sweep;
  sweep.A = cfg.A;
  sweep.M = cfg.M;
  sweep.seed = cfg.seed;
  sweep.threads = cfg.threads;
  sweep.columns = {"theta"};
  for (double T : cfg.T_list)
    sweep.columns.push_back("log1p_sup_Halpha_T" + format_double(T));
  sweep.eval = [&](double k, std::uint64_t) {
    const SupLadder lad = track_sup_ladder(sch, pot, k, cfg.n_max, cfg.T_list,
                                           cfg.alpha, cfg.tol);
    std::vector<double> z;
    for (double v : lad.sup_h_alpha_full) z.push_back(std::log1p(v));
    const SlopeFit fit = fit_loglog(cfg.T_list, z);
    std::vector<double> row{fit.slope};
    row.insert(row.end(), z.begin(), z.end());
    return row;
  };
  const SweepReport rep = k_sweep(sweep);

  GrowthResult res;
  res.csv = rep.to_csv();
  for (const auto& r : rep.rows)
    if (r.ok) res.thetas.push_back(r.values[0]);
  res.q10 = quantile(res.thetas, 0.1);
  res.q50 = quantile(res.thetas, 0.5);
  res.q90 = quantile(res.thetas, 0.9);
  int below = 0;
  for (double th : res.thetas)
    if (th <= 2.2) ++below;
  res.fraction_below_2p2 =
      res.thetas.empty()
          ? 0.0
          : static_cast<double>(below) / static_cast<double>(res.thetas.size());
  return res;
}

inline ExperimentOutput emit_growth(const GrowthConfig& cfg,
                                    const GrowthResult& res) {
  ExperimentOutput out;
  out.files.emplace_back("growth.csv", res.csv);
  json s;
  s["alpha"] = cfg.alpha;
  s["T_list"] = cfg.T_list;
  s["theta_q10"] = res.q10;
  s["theta_q50"] = res.q50;
  s["theta_q90"] = res.q90;
  s["fraction_theta_below_2.2"] = res.fraction_below_2p2;
  out.summary = s;
  out.assertions.emplace_back("theta fits available", !res.thetas.empty());
  return out;
}

// ---------------------------------------------------------------------------
// variation: p-variation norms of the integrated conjugated potential.

struct VariationConfig {
  std::uint64_t seed = 1;
  int l_max = 4;
  double T = 1.0;
  int grid_cells = 64;
  double k = 1.0;
  double p = 1.6;
  double alpha = 0.5;
  int n_max = 16;

  static VariationConfig from_json(const json& j) {
    VariationConfig c;
    c.seed = cfgutil::get<std::uint64_t>(j, "seed", c.seed);
    c.l_max = cfgutil::get<int>(j, "l_max", c.l_max);
    c.T = cfgutil::get<double>(j, "T", c.T);
    c.grid_cells = cfgutil::get<int>(j, "grid_cells", c.grid_cells);
    c.k = cfgutil::get<double>(j, "k", c.k);
    c.p = cfgutil::get<double>(j, "p", c.p);
    c.alpha = cfgutil::get<double>(j, "alpha", c.alpha);
    c.n_max = cfgutil::get<int>(j, "n_max", c.n_max);
    return c;
  }
};

struct VariationResultReport {
  std::vector<double> betas;
  std::vector<double> op_norms;      // operator-curve variation per beta
  std::vector<double> scalar_norms;  // carleson prefix curve of mode 1
  double d_full = 0.0;               // single-increment lower bound
  std::string csv;
};

inline VariationResultReport run_variation(const VariationConfig& cfg) {
  const ComplexVParams params(cfg.p, cfg.alpha);
  const SymbolSpec sch = SymbolSpec::schrodinger();
  const PotentialModel pot = make_random_bounded(
      cfg.seed, cfg.l_max, uniform_grid(0.0, cfg.T, 8), 1.0);
  const IntervalGrid grid = make_interval_grid(pot, 0.0, cfg.T, cfg.grid_cells);

  const IncrementCurve op_curve =
      build_v2_curve(pot, sch, cfg.k, params.mu, grid, cfg.n_max);
  std::vector<cplx> prefix{cplx(0.0)};
  for (std::size_t i = 0; i + 1 < grid.t.size(); ++i)
    prefix.push_back(prefix.back() + oscillatory_integral(pot, 1, cfg.k,
                                                          grid.t[i],
                                                          grid.t[i + 1]));
  const IncrementCurve scalar = prefix_curve(prefix);

  VariationResultReport res;
  res.betas = {1.0, 1.5, 2.0};
  std::string csv = csv_header({"beta", "op_variation", "scalar_variation"});
  for (double b : res.betas) {
    res.op_norms.push_back(variation_norm(op_curve, b).value);
    res.scalar_norms.push_back(variation_norm(scalar, b).value);
    csv += csv_line({b, res.op_norms.back(), res.scalar_norms.back()});
  }
  res.d_full = op_curve.d(0, grid.points() - 1);
  res.csv = csv;
  return res;
}

inline ExperimentOutput emit_variation(const VariationConfig& cfg,
                                       const VariationResultReport& res) {
  ExperimentOutput out;
  out.files.emplace_back("variation.csv", res.csv);
  json s;
  s["betas"] = res.betas;
  s["op_variation"] = res.op_norms;
  s["scalar_variation"] = res.scalar_norms;
  s["single_increment"] = res.d_full;
  s["mu"] = ComplexVParams(cfg.p, cfg.alpha).mu;
  out.summary = s;
  bool mono = true;
  for (std::size_t i = 1; i < res.op_norms.size(); ++i)
    if (res.op_norms[i] > res.op_norms[i - 1] + 1e-12) mono = false;
  out.assertions.emplace_back("variation non-increasing in beta", mono);
  out.assertions.emplace_back("single increment below the norm",
                              res.d_full <= res.op_norms.back() + 1e-12);
  return out;
}

// ---------------------------------------------------------------------------
// fuzz-appendix

struct FuzzConfig {
  long otriv_trials = 100000;
  int dim = 16;
  long krein_trials = 10000;
  std::uint64_t seed = 1;

  static FuzzConfig from_json(const json& j) {
    FuzzConfig c;
    c.otriv_trials = cfgutil::get<long>(j, "otriv_trials", c.otriv_trials);
    c.dim = cfgutil::get<int>(j, "dim", c.dim);
    c.krein_trials = cfgutil::get<long>(j, "krein_trials", c.krein_trials);
    c.seed = cfgutil::get<std::uint64_t>(j, "seed", c.seed);
    return c;
  }
};

struct FuzzResult {
  OtrivReport otriv;
  KreinReport krein;
  KreinReport krein_double;  // 2x trials for the stability check
  double krein_stability = 0.0;
};

inline FuzzResult run_fuzz(const FuzzConfig& cfg) {
  FuzzResult res;
  res.otriv = fuzz_otriv(cfg.otriv_trials, cfg.dim, cfg.seed);
  res.krein = fuzz_krein(cfg.krein_trials, cfg.seed);
  res.krein_double = fuzz_krein(2 * cfg.krein_trials, cfg.seed);
  res.krein_stability =
      std::abs(res.krein_double.max_ratio - res.krein.max_ratio) /
      res.krein.max_ratio;
  return res;
}

inline ExperimentOutput emit_fuzz(const FuzzConfig& cfg, const FuzzResult& res) {
  ExperimentOutput out;
  json s;
  s["otriv_trials"] = res.otriv.trials;
  s["otriv_violations"] = res.otriv.violations;
  s["otriv_max_ratio"] = res.otriv.max_ratio;
  s["krein_trials"] = res.krein.trials;
  s["krein_max_ratio"] = res.krein.max_ratio;
  s["krein_max_ratio_2x"] = res.krein_double.max_ratio;
  s["krein_stability"] = res.krein_stability;
  out.summary = s;
  out.files.emplace_back("fuzz.csv",
                         csv_header({"suite", "trials", "value"}) +
                             csv_line({0.0, static_cast<double>(res.otriv.trials),
                                       res.otriv.max_ratio}) +
                             csv_line({1.0, static_cast<double>(res.krein.trials),
                                       res.krein.max_ratio}));
  out.assertions.emplace_back("orthogonality inequality: zero violations",
                              res.otriv.violations == 0);
  out.assertions.emplace_back("product-bound constant stable under doubling",
                              res.krein_stability <= 0.10);
  (void)cfg;
  return out;
}

// ---------------------------------------------------------------------------
// evolve: single-trajectory CSV dump
// columns: t, k, l2, Halpha, tail_mu1, tail_mu2, re_u0, im_u0

struct EvolveDumpConfig {
  SymbolSpec symbol = SymbolSpec::schrodinger();
  PotentialModel pot = make_zero_potential();
  double k = 1.0;
  double t0 = 0.0;
  double t1 = 1.0;
  int n_samples = 64;
  double tol = 1e-9;
  int n_max = 32;
  double alpha = 0.5;
  int mu1 = 4;
  int mu2 = 16;

  static EvolveDumpConfig from_json(const json& j, std::uint64_t seed) {
    EvolveDumpConfig c;
    if (j.contains("symbol")) c.symbol = symbol_from_config(j["symbol"]);
    if (j.contains("potential"))
      c.pot = potential_from_config(j["potential"], seed);
    c.k = cfgutil::get<double>(j, "k", c.k);
    c.t0 = cfgutil::get<double>(j, "t0", c.t0);
    c.t1 = cfgutil::get<double>(j, "t1", c.t1);
    c.n_samples = cfgutil::get<int>(j, "n_samples", c.n_samples);
    c.tol = cfgutil::get<double>(j, "tol", c.tol);
    c.n_max = cfgutil::get<int>(j, "n_max", c.n_max);
    c.alpha = cfgutil::get<double>(j, "alpha", c.alpha);
    c.mu1 = cfgutil::get<int>(j, "mu1", c.mu1);
    c.mu2 = cfgutil::get<int>(j, "mu2", c.mu2);
    return c;
  }
};

inline ExperimentOutput run_evolve_dump(const EvolveDumpConfig& cfg) {
  EvolveConfig ecfg;
  ecfg.k = cfg.k;
  ecfg.t0 = cfg.t0;
  ecfg.t1 = cfg.t1;
  ecfg.tol = cfg.tol;
  ecfg.picture = Picture::lab;
  for (int i = 1; i <= cfg.n_samples; ++i)
    ecfg.observer_times.push_back(cfg.t0 +
                                  (cfg.t1 - cfg.t0) * i / cfg.n_samples);
  FourierState init = constant_one(cfg.n_max);
  init.time_stamp = cfg.t0;
  Trajectory tr = evolve(init, cfg.symbol, cfg.pot, ecfg);

  std::string csv = csv_header(
      {"t", "k", "l2", "Halpha", "tail_mu1", "tail_mu2", "re_u0", "im_u0"});
  for (const auto& s : tr.states)
    csv += csv_line({s.time_stamp, cfg.k, s.l2_norm(),
                     sobolev_norm(s, {cfg.alpha, false}),
                     tail_mass(s, std::min(cfg.mu1, cfg.n_max)),
                     tail_mass(s, std::min(cfg.mu2, cfg.n_max)),
                     s.at(0).real(), s.at(0).imag()});
  ExperimentOutput out;
  out.files.emplace_back("trajectory.csv", csv);
  out.files.emplace_back("potential.json", potential_to_json(cfg.pot).dump(2) + "\n");
  json s;
  s["k"] = cfg.k;
  s["n_max"] = cfg.n_max;
  s["steps_accepted"] = tr.stats.accepted;
  s["max_norm_drift"] = tr.stats.max_norm_drift;
  out.summary = s;
  out.assertions.emplace_back("trajectory completed",
                              tr.states.size() ==
                                  static_cast<std::size_t>(cfg.n_samples));
  return out;
}

// ---------------------------------------------------------------------------
// sweep: generic named-observable k-sweep

struct GenericSweepConfig {
  double A = 2.0;
  int M = 64;
  std::uint64_t seed = 1;
  int threads = 1;
  bool monte_carlo = false;
  std::string observable = "one";
  double T = 1.0;
  int n_max = 32;
  double tol = 1e-8;
  double alpha = 0.5;
  SymbolSpec symbol = SymbolSpec::schrodinger();
  std::optional<PotentialModel> pot;

  static GenericSweepConfig from_json(const json& j, std::uint64_t seed) {
    GenericSweepConfig c;
    c.A = cfgutil::get<double>(j, "A", c.A);
    c.M = cfgutil::get<int>(j, "M", c.M);
    c.seed = cfgutil::get<std::uint64_t>(j, "seed", seed);
    c.threads = cfgutil::get<int>(j, "threads", c.threads);
    c.monte_carlo = cfgutil::get<bool>(j, "monte_carlo", c.monte_carlo);
    c.observable = cfgutil::get<std::string>(j, "observable", c.observable);
    c.T = cfgutil::get<double>(j, "T", c.T);
    c.n_max = cfgutil::get<int>(j, "n_max", c.n_max);
    c.tol = cfgutil::get<double>(j, "tol", c.tol);
    c.alpha = cfgutil::get<double>(j, "alpha", c.alpha);
    if (j.contains("symbol")) c.symbol = symbol_from_config(j["symbol"]);
    if (j.contains("potential"))
      c.pot = potential_from_config(j["potential"], seed);
    return c;
  }
};

inline ExperimentOutput run_generic_sweep(const GenericSweepConfig& cfg) {
  SweepConfig sweep;
  sweep.A = cfg.A;
  sweep.M = cfg.M;
  sweep.seed = cfg.seed;
  sweep.threads = cfg.threads;
  sweep.monte_carlo = cfg.monte_carlo;
  sweep.columns = {cfg.observable};

  if (cfg.observable == "one") {
    sweep.eval = [](double, std::uint64_t) { return std::vector<double>{1.0}; };
  } else if (cfg.observable == "k_squared") {
    sweep.eval = [](double k, std::uint64_t) {
      return std::vector<double>{k * k};
    };
  } else if (cfg.observable == "sup_halpha_hom_sq" ||
             cfg.observable == "sup_l2_drift") {
    const PotentialModel pot =
        cfg.pot ? *cfg.pot
                : make_random_bounded(cfg.seed, 6,
                                      uniform_grid(0.0, cfg.T, 32), 1.0);
    const bool drift = (cfg.observable == "sup_l2_drift");
    sweep.eval = [cfg, pot, drift](double k, std::uint64_t) {
      const SupLadder lad = track_sup_ladder(cfg.symbol, pot, k, cfg.n_max,
                                             {cfg.T}, cfg.alpha, cfg.tol);
      return std::vector<double>{drift ? lad.max_norm_drift
                                       : lad.sup_h_alpha_sq[0]};
    };
  } else {
    throw ConfigError("observable", "unknown observable " + cfg.observable);
  }

  const SweepReport rep = k_sweep(sweep);
  ExperimentOutput out;
  out.files.emplace_back("sweep.csv", rep.to_csv());
  out.summary = rep.summary();
  out.assertions.emplace_back("all rows completed", rep.completeness == 1.0);
  return out;
}

// ---------------------------------------------------------------------------
// dispatcher

inline ExperimentOutput run_experiment(const json& config) {
  const std::string experiment = cfgutil::require<std::string>(config, "experiment");
  const std::uint64_t seed = cfgutil::get<std::uint64_t>(config, "seed", 1);

  ExperimentOutput out;
  if (experiment == "theorem11") {
    const auto cfg = Theorem11Config::from_json(config);
    out = emit_theorem11(cfg, run_theorem11(cfg));
  } else if (experiment == "lemma22") {
    const auto cfg = Lemma22Config::from_json(config);
    out = emit_lemma22(cfg, run_lemma22(cfg));
  } else if (experiment == "oscillatory") {
    const auto cfg = OscillatoryConfig::from_json(config);
    out = emit_oscillatory(cfg, run_oscillatory(cfg));
  } else if (experiment == "wkb") {
    const auto cfg = WkbTrendConfig::from_json(config);
    out = emit_wkb_trend(cfg, run_wkb_trend(cfg));
  } else if (experiment == "diadic") {
    const auto cfg = DiadicConfig::from_json(config);
    out = emit_diadic(cfg, run_diadic(cfg));
  } else if (experiment == "growth") {
    const auto cfg = GrowthConfig::from_json(config);
    out = emit_growth(cfg, run_growth(cfg));
  } else if (experiment == "variation") {
    const auto cfg = VariationConfig::from_json(config);
    out = emit_variation(cfg, run_variation(cfg));
  } else if (experiment == "fuzz-appendix") {
    const auto cfg = FuzzConfig::from_json(config);
    out = emit_fuzz(cfg, run_fuzz(cfg));
  } else if (experiment == "evolve") {
    out = run_evolve_dump(EvolveDumpConfig::from_json(config, seed));
  } else if (experiment == "sweep") {
    out = run_generic_sweep(GenericSweepConfig::from_json(config, seed));
  } else {
    throw ConfigError("experiment", "unknown experiment " + experiment);
  }
  return out;
}

}  // namespace speclab
