#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "speclab/io.hpp"
#include "speclab/prng.hpp"

namespace speclab {

// Index-parallel worker pool. Tasks are independent; results land in
// preallocated slots, so the output is identical for any thread count.
template <typename Fn>
void parallel_for(int n, int threads, Fn&& fn) {
  if (threads <= 0)
    threads = static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&]() {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  for (auto& th : pool) th.join();
}

// k-sweep over [-A, A]: midpoint nodes (default) or Monte Carlo nodes
// (flagged in the report); one deterministic seed per node.
struct SweepConfig {
  double A = 2.0;
  int M = 64;
  std::uint64_t seed = 1;
  int threads = 1;
  bool monte_carlo = false;
  std::vector<std::string> columns;
  // evaluates all observables at node k with the node's derived seed
  std::function<std::vector<double>(double k, std::uint64_t k_seed)> eval;

  void validate() const {
    if (M < 8) throw std::domain_error("SweepConfig: M must be >= 8");
    if (!(A > 0.0)) throw std::domain_error("SweepConfig: A must be > 0");
    if (!eval) throw std::domain_error("SweepConfig: no observable");
    if (columns.empty()) throw std::domain_error("SweepConfig: no columns");
  }
};

struct SweepRow {
  double k = 0.0;
  std::vector<double> values;
  bool ok = false;
  std::string error;
};

struct SweepReport {
  double A = 0.0;
  int M = 0;
  std::uint64_t seed = 0;
  std::string quadrature;  // "midpoint" or "montecarlo"
  std::vector<std::string> columns;
  std::vector<SweepRow> rows;
  std::vector<double> integrals;   // (2A/M) sum over completed rows
  std::vector<double> sup_over_k;  // per column
  double completeness = 0.0;

  // Aggregates must be recomputable from the rows.
  std::vector<double> recompute_integrals() const {
    std::vector<double> acc(columns.size(), 0.0);
    for (const auto& r : rows)
      if (r.ok)
        for (std::size_t c = 0; c < acc.size(); ++c) acc[c] += r.values[c];
    for (auto& v : acc) v *= 2.0 * A / static_cast<double>(M);
    return acc;
  }

  std::string to_csv() const {
    std::vector<std::string> hdr{"k"};
    hdr.insert(hdr.end(), columns.begin(), columns.end());
    std::string out = csv_header(hdr);
    for (const auto& r : rows) {
      if (!r.ok) continue;
      std::vector<double> line{r.k};
      line.insert(line.end(), r.values.begin(), r.values.end());
      out += csv_line(line);
    }
    return out;
  }

  json summary() const {
    json j;
    j["A"] = A;
    j["M"] = M;
    j["seed"] = seed;
    j["quadrature"] = quadrature;
    j["columns"] = columns;
    j["integrals"] = integrals;
    j["sup_over_k"] = sup_over_k;
    j["completeness"] = completeness;
    return j;
  }
};

inline std::uint64_t node_seed(std::uint64_t seed, int node_index) {
  return CounterRng(seed, 0xA110C ^ static_cast<std::uint64_t>(node_index))
      .next_u64();
}

inline SweepReport k_sweep(const SweepConfig& cfg) {
  cfg.validate();
  SweepReport rep;
  rep.A = cfg.A;
  rep.M = cfg.M;
  rep.seed = cfg.seed;
  rep.quadrature = cfg.monte_carlo ? "montecarlo" : "midpoint";
  rep.columns = cfg.columns;
  rep.rows.resize(static_cast<std::size_t>(cfg.M));

  std::vector<double> nodes(static_cast<std::size_t>(cfg.M));
  if (cfg.monte_carlo) {
    CounterRng rng(cfg.seed, 0x4D43);
    for (int i = 0; i < cfg.M; ++i)
      nodes[static_cast<std::size_t>(i)] = rng.uniform(-cfg.A, cfg.A);
  } else {
    for (int i = 0; i < cfg.M; ++i)
      nodes[static_cast<std::size_t>(i)] =
          -cfg.A + (2.0 * cfg.A) * (i + 0.5) / cfg.M;
  }

  parallel_for(cfg.M, cfg.threads, [&](int i) {
    SweepRow& row = rep.rows[static_cast<std::size_t>(i)];
    row.k = nodes[static_cast<std::size_t>(i)];
    try {
      row.values = cfg.eval(row.k, node_seed(cfg.seed, i));
      row.ok = (row.values.size() == cfg.columns.size());
      if (!row.ok) row.error = "column count mismatch";
    } catch (const std::exception& e) {
      row.ok = false;
      row.error = e.what();
    }
  });

  int n_ok = 0;
  rep.sup_over_k.assign(cfg.columns.size(), 0.0);
  for (const auto& r : rep.rows) {
    if (!r.ok) continue;
    ++n_ok;
    for (std::size_t c = 0; c < cfg.columns.size(); ++c)
      rep.sup_over_k[c] = std::max(rep.sup_over_k[c], r.values[c]);
  }
  rep.completeness = static_cast<double>(n_ok) / static_cast<double>(cfg.M);
  rep.integrals = rep.recompute_integrals();
  return rep;
}

// Least-squares slope of y against x with residual-based half width.
struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double half_width = 0.0;
};

inline SlopeFit fit_loglog(const std::vector<double>& x,
                           const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n)
    throw std::invalid_argument("fit_loglog: need >= 2 matched points");
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  const double nd = static_cast<double>(n);
  SlopeFit f;
  const double denom = nd * sxx - sx * sx;
  f.slope = (nd * sxy - sx * sy) / denom;
  f.intercept = (sy - f.slope * sx) / nd;
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ly[i] - (f.slope * lx[i] + f.intercept);
    ss += r * r;
  }
  if (n > 2) {
    const double var = ss / (nd - 2.0) / (sxx - sx * sx / nd);
    f.half_width = 2.0 * std::sqrt(std::max(0.0, var));
  }
  return f;
}

inline double quantile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return v[lo] * (1.0 - frac) + v[hi] * frac;
}

}  // namespace speclab
