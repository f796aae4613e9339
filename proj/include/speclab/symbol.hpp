#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace speclab {

// Dispersion multiplier lambda(n,t) of the free operator acting on e^{inx},
// excluding the coupling k.
//
//  static_poly      lambda(n)   = p1 n + p2 n^2 + p3 n^3       (d <= 3)
//  gaps             lambda(n,t) = n/(t+1) + [|n| <= t/2] n^2/(t+1)^2
//  decay_laplacian  lambda(n,t) = n^2/(t+1)^2     (decaying -Delta, no drift)
//  decay_drift      lambda(n,t) = n/(t+1)         (transport-only symbol)
//
// The last two are the degenerate members of the gaps family used by the
// oscillatory-potential tracker and by transport cross-checks.
struct SymbolSpec {
  enum class Kind { static_poly, gaps, decay_laplacian, decay_drift };

  Kind kind = Kind::static_poly;
  std::array<double, 3> poly = {0.0, 1.0, 0.0};  // p1, p2, p3

  static SymbolSpec schrodinger() {
    SymbolSpec s;
    s.kind = Kind::static_poly;
    s.poly = {0.0, 1.0, 0.0};
    return s;
  }
  static SymbolSpec static_symbol(double p1, double p2 = 0.0, double p3 = 0.0) {
    SymbolSpec s;
    s.kind = Kind::static_poly;
    s.poly = {p1, p2, p3};
    return s;
  }
  static SymbolSpec gaps() {
    SymbolSpec s;
    s.kind = Kind::gaps;
    return s;
  }
  static SymbolSpec decay_laplacian() {
    SymbolSpec s;
    s.kind = Kind::decay_laplacian;
    return s;
  }
  static SymbolSpec decay_drift() {
    SymbolSpec s;
    s.kind = Kind::decay_drift;
    return s;
  }

  bool time_dependent() const { return kind != Kind::static_poly; }
};

constexpr int kNoBandCheck = std::numeric_limits<int>::max();

inline double symbol_multiplier(const SymbolSpec& spec, int n, double t,
                                int band = kNoBandCheck) {
  if (band != kNoBandCheck && std::abs(n) > band)
    throw std::domain_error("symbol_multiplier: mode outside band");
  if (spec.time_dependent() && t < 0.0)
    throw std::domain_error("symbol_multiplier: t must be >= 0");
  const double nd = static_cast<double>(n);
  switch (spec.kind) {
    case SymbolSpec::Kind::static_poly:
      return spec.poly[0] * nd + spec.poly[1] * nd * nd +
             spec.poly[2] * nd * nd * nd;
    case SymbolSpec::Kind::gaps: {
      double v = nd / (t + 1.0);
      if (std::abs(nd) <= t / 2.0) v += nd * nd / ((t + 1.0) * (t + 1.0));
      return v;
    }
    case SymbolSpec::Kind::decay_laplacian:
      return nd * nd / ((t + 1.0) * (t + 1.0));
    case SymbolSpec::Kind::decay_drift:
      return nd / (t + 1.0);
  }
  return 0.0;
}

// Accumulated phase Phi_n(t0,t1) = int_{t0}^{t1} lambda(n,tau) dtau, in
// closed form. The gaps projection threshold |n| = tau/2 switches the
// quadratic piece on at tau = 2|n|; the antiderivatives are
// n log(1+t) and -n^2/(1+t).
inline double symbol_phase_integral(const SymbolSpec& spec, int n, double t0,
                                    double t1) {
  const double nd = static_cast<double>(n);
  switch (spec.kind) {
    case SymbolSpec::Kind::static_poly:
      return symbol_multiplier(spec, n, 0.0) * (t1 - t0);
    case SymbolSpec::Kind::gaps: {
      double v = nd * (std::log1p(t1) - std::log1p(t0));
      const double ton = 2.0 * std::abs(nd);  // quadratic term active from here
      const double a = std::max(t0, ton);
      if (t1 > a) v += nd * nd * (1.0 / (1.0 + a) - 1.0 / (1.0 + t1));
      return v;
    }
    case SymbolSpec::Kind::decay_laplacian:
      return nd * nd * (1.0 / (1.0 + t0) - 1.0 / (1.0 + t1));
    case SymbolSpec::Kind::decay_drift:
      return nd * (std::log1p(t1) - std::log1p(t0));
  }
  return 0.0;
}

// Times in (t0,t1) where the gaps generator jumps (projection threshold
// crossings t = 2|n| for in-band modes). The integrator steps exactly onto
// these.
inline std::vector<double> symbol_breakpoints(const SymbolSpec& spec,
                                              int n_max, double t0,
                                              double t1) {
  std::vector<double> out;
  if (spec.kind != SymbolSpec::Kind::gaps) return out;
  for (int n = 1; n <= n_max; ++n) {
    const double tc = 2.0 * n;
    if (tc > t0 && tc < t1) out.push_back(tc);
  }
  return out;
}

}  // namespace speclab
