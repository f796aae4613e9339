#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "speclab/cell_integrals.hpp"
#include "speclab/fourier_state.hpp"
#include "speclab/prng.hpp"

namespace speclab {

// Potential V(x,t) = sum_{|l| <= l_max} Vhat_l(t) e^{ilx} with
// piecewise-linear complex time profiles Vhat_l on a shared breakpoint grid.
// Linearity in t is what keeps every oscillatory time integral downstream
// exact. The potential is supported on the grid span: V(.,t) = 0 outside
// [t_begin, t_end] (the cut-off potentials V chi_{t>T} are modeled by grids
// starting at T).
struct PotentialModel {
  enum class Kind {
    random_bounded,
    decaying,
    oscillatory_Q,
    constant_imag,
    custom
  };

  Kind kind = Kind::custom;
  int l_max = 0;
  bool reality = true;
  std::vector<double> grid;               // breakpoints t_0 < ... < t_M
  std::vector<std::vector<cplx>> values;  // [l + l_max][breakpoint]
  std::optional<double> decay_gamma;
  std::optional<double> amplitude_lambda;
  std::optional<double> sup_bound;  // declared constant bound, if any
  std::uint64_t seed = 0;

  int n_profiles() const { return 2 * l_max + 1; }
  int n_cells() const { return static_cast<int>(grid.size()) - 1; }
  double t_begin() const { return grid.front(); }
  double t_end() const { return grid.back(); }

  const std::vector<cplx>& profile(int l) const {
    return values[static_cast<std::size_t>(l + l_max)];
  }
  std::vector<cplx>& profile(int l) {
    return values[static_cast<std::size_t>(l + l_max)];
  }

  bool is_zero() const {
    for (const auto& p : values)
      for (const auto& v : p)
        if (v != cplx(0.0)) return false;
    return true;
  }

  // Cell index containing t (clamped to the span).
  int cell_of(double t) const {
    if (t <= grid.front()) return 0;
    if (t >= grid.back()) return n_cells() - 1;
    const auto it = std::upper_bound(grid.begin(), grid.end(), t);
    return static_cast<int>(it - grid.begin()) - 1;
  }

  // Linear coefficients of Vhat_l on cell c: value a at grid[c], slope b.
  void cell_coeffs(int l, int c, cplx& a, cplx& b) const {
    const auto& p = profile(l);
    const std::size_t i = static_cast<std::size_t>(c);
    a = p[i];
    const double dt = grid[i + 1] - grid[i];
    b = dt > 0.0 ? (p[i + 1] - p[i]) / dt : cplx(0.0);
  }

  cplx coeff(int l, double t) const {
    if (std::abs(l) > l_max) return 0.0;
    if (t < grid.front() || t > grid.back()) return 0.0;
    if (t == grid.front()) return profile(l).front();
    if (t == grid.back()) return profile(l).back();
    const int c = cell_of(t);
    cplx a, b;
    cell_coeffs(l, c, a, b);
    return a + b * (t - grid[static_cast<std::size_t>(c)]);
  }

  cplx value(double x, double t) const {
    cplx sum = 0.0;
    const cplx e = std::polar(1.0, x);
    cplx p = std::polar(1.0, -l_max * x);
    for (int l = -l_max; l <= l_max; ++l) {
      sum += coeff(l, t) * p;
      p *= e;
    }
    return sum;
  }
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

inline void check_grid(const std::vector<double>& grid) {
  require(grid.size() >= 2, "potential grid needs at least 2 breakpoints");
  for (std::size_t i = 1; i < grid.size(); ++i)
    require(grid[i] > grid[i - 1], "potential grid must be strictly increasing");
}

}  // namespace detail

// sup over an x-grid of |V(x,t)| (a certified lower bound of the true sup;
// 512 points is the documented default).
inline double sup_norm_on_grid(const PotentialModel& pot, double t,
                               int nx = 512) {
  double best = 0.0;
  for (int i = 0; i < nx; ++i) {
    const double x = 2.0 * M_PI * i / nx;
    best = std::max(best, std::abs(pot.value(x, t)));
  }
  return best;
}

inline void enforce_reality(PotentialModel& pot) {
  for (int l = 1; l <= pot.l_max; ++l) {
    auto& neg = pot.profile(-l);
    const auto& p = pot.profile(l);
    for (std::size_t i = 0; i < p.size(); ++i) neg[i] = std::conj(p[i]);
  }
  auto& zero = pot.profile(0);
  for (auto& v : zero) v = cplx(v.real(), 0.0);
}

inline bool reality_holds(const PotentialModel& pot, double tol = 0.0) {
  for (int l = 0; l <= pot.l_max; ++l)
    for (std::size_t i = 0; i < pot.grid.size(); ++i)
      if (std::abs(pot.profile(-l)[i] - std::conj(pot.profile(l)[i])) > tol)
        return false;
  return true;
}

// Real V with sup_x |V(x,t)| <= bound, deterministic in seed. Raw per-mode
// amplitudes scale like 1/(1+|l|); a single global rescale then puts the
// largest breakpoint sup exactly at `bound`.
inline PotentialModel make_random_bounded(std::uint64_t seed, int l_max,
                                          std::vector<double> grid,
                                          double bound) {
  detail::require(bound >= 0.0, "make_random_bounded: bound must be >= 0");
  detail::check_grid(grid);
  PotentialModel pot;
  pot.kind = PotentialModel::Kind::random_bounded;
  pot.l_max = l_max;
  pot.reality = true;
  pot.grid = std::move(grid);
  pot.seed = seed;
  pot.sup_bound = bound;
  pot.values.assign(static_cast<std::size_t>(pot.n_profiles()),
                    std::vector<cplx>(pot.grid.size(), cplx(0.0)));
  CounterRng rng(seed, 0x70AD);
  for (int l = 0; l <= l_max; ++l) {
    const double amp = 1.0 / (1.0 + l);
    for (std::size_t i = 0; i < pot.grid.size(); ++i) {
      const double re = amp * rng.symmetric();
      const double im = (l == 0) ? 0.0 : amp * rng.symmetric();
      pot.profile(l)[i] = cplx(re, im);
    }
  }
  enforce_reality(pot);
  double s = 0.0;
  for (std::size_t i = 0; i < pot.grid.size(); ++i)
    s = std::max(s, sup_norm_on_grid(pot, pot.grid[i]));
  const double scale = (s > 0.0) ? bound / s : 0.0;
  for (auto& p : pot.values)
    for (auto& v : p) v *= scale;
  return pot;
}

// Real V with the envelope sup_x |V(x,t_i)| = C (1+t_i)^{-gamma} met with
// equality at every breakpoint.
inline PotentialModel make_decaying(std::uint64_t seed, int l_max,
                                    double gamma, double C,
                                    std::vector<double> grid) {
  if (gamma <= 0.0 || gamma > 1.0)
    throw std::domain_error("make_decaying: gamma must lie in (0,1]");
  detail::require(C >= 0.0, "make_decaying: C must be >= 0");
  PotentialModel pot = make_random_bounded(seed, l_max, std::move(grid), 1.0);
  pot.kind = PotentialModel::Kind::decaying;
  pot.decay_gamma = gamma;
  pot.sup_bound = C;
  for (std::size_t i = 0; i < pot.grid.size(); ++i) {
    double s = sup_norm_on_grid(pot, pot.grid[i]);
    const double target = C * std::pow(1.0 + pot.grid[i], -gamma);
    const double scale = (s > 0.0) ? target / s : 0.0;
    for (auto& p : pot.values) p[i] *= scale;
  }
  return pot;
}

// Complex-valued V with sup_x |V(x,t_i)| <= bound at the breakpoints
// (no reality constraint; the L^2 norm of solutions is not conserved).
inline PotentialModel make_random_complex(std::uint64_t seed, int l_max,
                                          std::vector<double> grid,
                                          double bound) {
  detail::require(bound >= 0.0, "make_random_complex: bound must be >= 0");
  detail::check_grid(grid);
  PotentialModel pot;
  pot.kind = PotentialModel::Kind::custom;
  pot.l_max = l_max;
  pot.reality = false;
  pot.grid = std::move(grid);
  pot.seed = seed;
  pot.sup_bound = bound;
  pot.values.assign(static_cast<std::size_t>(pot.n_profiles()),
                    std::vector<cplx>(pot.grid.size(), cplx(0.0)));
  CounterRng rng(seed, 0xC0111);
  for (int l = -l_max; l <= l_max; ++l) {
    const double amp = 1.0 / (1.0 + std::abs(l));
    for (std::size_t i = 0; i < pot.grid.size(); ++i)
      pot.profile(l)[i] = amp * cplx(rng.symmetric(), rng.symmetric());
  }
  double s = 0.0;
  for (std::size_t i = 0; i < pot.grid.size(); ++i)
    s = std::max(s, sup_norm_on_grid(pot, pot.grid[i]));
  const double scale = (s > 0.0) ? bound / s : 0.0;
  for (auto& p : pot.values)
    for (auto& v : p) v *= scale;
  return pot;
}

// x-profile of Q for the oscillatory class: Q(x,t) = lambda (1+t)^{-gamma} q(x)
// with max(||q||_inf, ||q_x||_inf) < 1 after normalization, so that both
// envelope conditions ||Q|| < lambda (1+t)^{-gamma} and
// ||Q_x|| < lambda (1+t)^{1-gamma} hold strictly for all t >= 0.
struct OscillatoryQSpec {
  std::vector<cplx> q_modes;  // q_hat_l for l = 0..l_max (negative by reality)
  double gamma = 0.9;
  double lambda = 0.1;
  double start_T = 0.0;

  int l_max() const { return static_cast<int>(q_modes.size()) - 1; }

  static OscillatoryQSpec random(std::uint64_t seed, int l_max, double gamma,
                                 double lambda, double start_T) {
    if (gamma <= 0.75)
      throw std::domain_error("OscillatoryQSpec: gamma must exceed 3/4");
    if (lambda < 0.0)
      throw std::domain_error("OscillatoryQSpec: lambda must be >= 0");
    if (start_T < 0.0)
      throw std::domain_error("OscillatoryQSpec: start_T must be >= 0");
    OscillatoryQSpec spec;
    spec.gamma = gamma;
    spec.lambda = lambda;
    spec.start_T = start_T;
    spec.q_modes.assign(static_cast<std::size_t>(l_max) + 1, cplx(0.0));
    CounterRng rng(seed, 0x51C);
    for (int l = 1; l <= l_max; ++l)
      spec.q_modes[static_cast<std::size_t>(l)] =
          cplx(rng.symmetric(), rng.symmetric()) / (1.0 + l);
    spec.normalize();
    return spec;
  }

  // Scale q so that max(sup|q|, sup|q_x|) = 0.999 on a 512-point x-grid.
  void normalize() {
    double s = 0.0;
    for (int i = 0; i < 512; ++i) {
      const double x = 2.0 * M_PI * i / 512;
      cplx q = 0.0, qx = 0.0;
      for (int l = 1; l <= l_max(); ++l) {
        const cplx ql = q_modes[static_cast<std::size_t>(l)];
        const cplx e = std::polar(1.0, l * x);
        q += ql * e + std::conj(ql * e);
        qx += cplx(0.0, static_cast<double>(l)) * ql * e +
              std::conj(cplx(0.0, static_cast<double>(l)) * ql * e);
      }
      s = std::max({s, std::abs(q), std::abs(qx)});
    }
    if (s > 0.0)
      for (auto& m : q_modes) m *= 0.999 / s;
  }
};

// V = Q_x(x,t)/(t+1):   Vhat_l(t) = i l Qhat_l(t)/(t+1),
// Qhat_l(t) = lambda (1+t)^{-gamma} q_hat_l. Sampled at the grid times and
// interpolated linearly; both (con2) envelopes are re-verified at the grid
// times and a violation names the offending (l,t).
inline PotentialModel make_oscillatory(const OscillatoryQSpec& spec,
                                       std::vector<double> grid) {
  detail::check_grid(grid);
  detail::require(grid.front() >= spec.start_T - 1e-12,
                  "make_oscillatory: grid must start at or after start_T");
  PotentialModel pot;
  pot.kind = PotentialModel::Kind::oscillatory_Q;
  pot.l_max = std::max(spec.l_max(), 0);
  pot.reality = true;
  pot.grid = std::move(grid);
  pot.decay_gamma = spec.gamma;
  pot.amplitude_lambda = spec.lambda;
  pot.values.assign(static_cast<std::size_t>(pot.n_profiles()),
                    std::vector<cplx>(pot.grid.size(), cplx(0.0)));
  for (int l = 1; l <= spec.l_max(); ++l) {
    const cplx ql = spec.q_modes[static_cast<std::size_t>(l)];
    for (std::size_t i = 0; i < pot.grid.size(); ++i) {
      const double t = pot.grid[i];
      const double envelope = spec.lambda * std::pow(1.0 + t, -spec.gamma);
      pot.profile(l)[i] =
          cplx(0.0, static_cast<double>(l)) * ql * envelope / (t + 1.0);
    }
  }
  enforce_reality(pot);

  // Envelope certificates at grid times.
  for (std::size_t i = 0; i < pot.grid.size(); ++i) {
    const double t = pot.grid[i];
    // Reconstruct Q and Q_x at time t from the q-modes.
    for (int j = 0; j < 512; ++j) {
      const double x = 2.0 * M_PI * j / 512;
      cplx q = 0.0, qx = 0.0;
      for (int l = 1; l <= spec.l_max(); ++l) {
        const cplx ql = spec.q_modes[static_cast<std::size_t>(l)] *
                        spec.lambda * std::pow(1.0 + t, -spec.gamma);
        const cplx e = std::polar(1.0, l * x);
        q += ql * e + std::conj(ql * e);
        qx += cplx(0.0, static_cast<double>(l)) * ql * e +
              std::conj(cplx(0.0, static_cast<double>(l)) * ql * e);
      }
      const double q_env = spec.lambda * std::pow(1.0 + t, -spec.gamma);
      const double qx_env = spec.lambda * std::pow(1.0 + t, 1.0 - spec.gamma);
      if (spec.lambda > 0.0 &&
          (std::abs(q) >= q_env || std::abs(qx) >= qx_env))
        throw std::runtime_error(
            "make_oscillatory: envelope violated at (l<=" +
            std::to_string(spec.l_max()) + ", t=" + std::to_string(t) + ")");
    }
  }
  return pot;
}

// V(x,t) = i c: the scalar non-self-adjoint example with ||u(t)|| = e^{ct}.
inline PotentialModel make_constant_imag(double c, double t_end = 1048576.0) {
  PotentialModel pot;
  pot.kind = PotentialModel::Kind::constant_imag;
  pot.l_max = 0;
  pot.reality = (c == 0.0);
  pot.grid = {0.0, t_end};
  pot.values = {{cplx(0.0, c), cplx(0.0, c)}};
  return pot;
}

inline PotentialModel make_zero_potential(double t0 = 0.0, double t1 = 1.0) {
  PotentialModel pot;
  pot.kind = PotentialModel::Kind::custom;
  pot.l_max = 0;
  pot.reality = true;
  pot.grid = {t0, t1};
  pot.values = {{cplx(0.0), cplx(0.0)}};
  return pot;
}

// (V(.,t) * u): banded convolution, truncated to the band of `state`.
inline FourierState apply_potential(const PotentialModel& pot, double t,
                                    const FourierState& state) {
  FourierState out(state.n_max, state.picture, state.time_stamp);
  for (int n = -state.n_max; n <= state.n_max; ++n) {
    cplx acc = 0.0;
    const int lo = std::max(-pot.l_max, n - state.n_max);
    const int hi = std::min(pot.l_max, n + state.n_max);
    for (int l = lo; l <= hi; ++l) acc += pot.coeff(l, t) * state.at(n - l);
    out.at(n) = acc;
  }
  return out;
}

// Exact int_{t0}^{t1} Vhat_l(t) e^{i omega t} dt for [t0,t1] inside a single
// linear piece of the profile. Callers integrating across breakpoints must
// split (contract error otherwise).
inline cplx oscillatory_cell_integral(const PotentialModel& pot, int l,
                                      double omega, double t0, double t1) {
  detail::require(t1 >= t0, "oscillatory_cell_integral: needs t1 >= t0");
  if (std::abs(l) > pot.l_max || t1 == t0) return 0.0;
  const int c0 = pot.cell_of(t0);
  const int c1 = pot.cell_of(t1 - 1e-15 * std::max(1.0, std::abs(t1)));
  const int c = pot.cell_of(0.5 * (t0 + t1));
  if (c0 != c1)
    throw std::invalid_argument(
        "oscillatory_cell_integral: [t0,t1] straddles a profile breakpoint");
  cplx a, b;
  pot.cell_coeffs(l, c, a, b);
  return linear_phase_integral(a, b, pot.grid[static_cast<std::size_t>(c)],
                               omega, t0, t1);
}

// Same integral over an arbitrary interval, split at profile breakpoints
// (the part outside the support [t_begin, t_end] contributes zero).
inline cplx oscillatory_integral(const PotentialModel& pot, int l,
                                 double omega, double t0, double t1) {
  if (std::abs(l) > pot.l_max || t1 <= t0) return 0.0;
  t0 = std::max(t0, pot.t_begin());
  t1 = std::min(t1, pot.t_end());
  if (t1 <= t0) return 0.0;
  cplx acc = 0.0;
  double a = t0;
  while (a < t1) {
    const int c = pot.cell_of(a + 1e-15 * std::max(1.0, std::abs(a)));
    const double cell_end =
        (c + 1 < static_cast<int>(pot.grid.size()))
            ? pot.grid[static_cast<std::size_t>(c) + 1]
            : t1;
    const double b = std::min(t1, std::max(cell_end, a));
    cplx ca, cb;
    pot.cell_coeffs(l, c, ca, cb);
    acc += linear_phase_integral(ca, cb, pot.grid[static_cast<std::size_t>(c)],
                                 omega, a, b);
    if (b <= a) break;
    a = b;
  }
  return acc;
}

// int_T |V(x,t)|^2 dx with the normalized measure = sum_l |Vhat_l(t)|^2;
// the time integral over a cell is a quadratic polynomial, integrated
// exactly (Simpson is exact on quadratics).
inline double l2x_norm_sq(const PotentialModel& pot, double t) {
  double acc = 0.0;
  for (int l = -pot.l_max; l <= pot.l_max; ++l) acc += std::norm(pot.coeff(l, t));
  return acc;
}

inline double v_squared_time_integral(const PotentialModel& pot, double t0,
                                      double t1, double weight_power = 0.0) {
  // int_{t0}^{t1} (1+t)^p sum_l |Vhat_l(t)|^2 dt. Exact for p = 0; for
  // p != 0 uses per-cell 5-point Gauss-Legendre (the integrand is a smooth
  // low-degree product on each cell).
  static const double gl_x[5] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                 0.5384693101056831, 0.9061798459386640};
  static const double gl_w[5] = {0.2369268850561891, 0.4786286704993665,
                                 0.5688888888888889, 0.4786286704993665,
                                 0.2369268850561891};
  t0 = std::max(t0, pot.t_begin());
  t1 = std::min(t1, pot.t_end());
  double acc = 0.0;
  double a = t0;
  while (a < t1) {
    const int c = pot.cell_of(a + 1e-15 * std::max(1.0, std::abs(a)));
    const double cell_end = (c + 1 < static_cast<int>(pot.grid.size()))
                                ? pot.grid[static_cast<std::size_t>(c) + 1]
                                : t1;
    const double b = std::min(t1, std::max(cell_end, a));
    if (b <= a) break;
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    if (weight_power == 0.0) {
      // Simpson: exact for the quadratic |Vhat|^2 per cell.
      acc += (b - a) / 6.0 *
             (l2x_norm_sq(pot, a) + 4.0 * l2x_norm_sq(pot, mid) +
              l2x_norm_sq(pot, b));
    } else {
      for (int g = 0; g < 5; ++g) {
        const double t = mid + half * gl_x[g];
        acc += half * gl_w[g] * std::pow(1.0 + t, weight_power) *
               l2x_norm_sq(pot, t);
      }
    }
    a = b;
  }
  return acc;
}

// Grid builders --------------------------------------------------------

inline std::vector<double> uniform_grid(double t0, double t1, int cells) {
  detail::require(cells >= 1 && t1 > t0, "uniform_grid: bad parameters");
  std::vector<double> g(static_cast<std::size_t>(cells) + 1);
  for (int i = 0; i <= cells; ++i)
    g[static_cast<std::size_t>(i)] = t0 + (t1 - t0) * i / cells;
  g.back() = t1;
  return g;
}

// Geometric spacing in (1+t): suits decaying envelopes, where a profile
// sampled at the nodes tracks C(1+t)^{-gamma} with uniform relative error.
inline std::vector<double> geometric_grid(double t0, double t1, int cells) {
  detail::require(cells >= 1 && t1 > t0 && t0 >= 0.0,
                  "geometric_grid: bad parameters");
  std::vector<double> g(static_cast<std::size_t>(cells) + 1);
  const double r = std::log((1.0 + t1) / (1.0 + t0));
  for (int i = 0; i <= cells; ++i)
    g[static_cast<std::size_t>(i)] =
        (1.0 + t0) * std::exp(r * i / cells) - 1.0;
  g.front() = t0;
  g.back() = t1;
  return g;
}

}  // namespace speclab
