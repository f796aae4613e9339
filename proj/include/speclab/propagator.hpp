#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "speclab/banded.hpp"
#include "speclab/cell_integrals.hpp"
#include "speclab/fourier_state.hpp"
#include "speclab/potential.hpp"
#include "speclab/symbol.hpp"

namespace speclab {

// Time evolution of i u_t = (k Lambda(t) + V(t)) u on the Fourier side.
// Everything is propagated in the interaction picture
//
//   u_hat_n(t) = e^{-ik Phi_n(t)} v_n(t),   Phi_n(t) = int_0^t lambda(n,s) ds,
//   i v' = Vtilde(t) v,   Vtilde_mn(t) = e^{ik(Phi_m - Phi_n)(t)} Vhat_{m-n}(t),
//
// with one step v <- exp(-i Omega1) v, Omega1 = int_{t}^{t+dt} Vtilde.
// For static symbols Omega1 is assembled exactly from the oscillatory cell
// antiderivatives (the phases are linear in time); for time-dependent
// symbols the closed-form phase integrals feed a per-cell Gauss-Legendre
// rule. Exactness of Omega1 removes the (k (lambda_m - lambda_n))^2
// stiffness of a plain midpoint evaluation; what remains is the genuine
// order-2 Magnus remainder ~ dt^3 ||[Vtilde', Vtilde]||.

struct EvolveConfig {
  double k = 1.0;
  double t0 = 0.0;
  double t1 = 1.0;
  double dt_init = 1e-2;
  double tol = 1e-9;  // local (per-step) error target in l2
  bool adaptive = true;
  Picture picture = Picture::lab;
  std::vector<double> observer_times;  // sorted, within [t0, t1]
  // Called after every accepted step with the interaction-picture state
  // (all mode moduli and u_hat_0 agree with the lab picture, so norms and
  // zero-mode trackers can run here without phase conversions).
  std::function<void(double, const FourierState&)> step_observer;
  bool window_adaptive = true;  // restrict work to the occupied mode window

  void validate() const {
    if (!(t1 > t0) || t0 < 0.0)
      throw std::domain_error("EvolveConfig: need t1 > t0 >= 0");
    if (!(tol > 0.0)) throw std::domain_error("EvolveConfig: tol must be > 0");
    if (!(dt_init > 0.0))
      throw std::domain_error("EvolveConfig: dt_init must be > 0");
  }
};

struct StepStats {
  long accepted = 0;
  long rejected = 0;
  double min_dt = std::numeric_limits<double>::infinity();
  double max_dt = 0.0;
  double max_norm_drift = 0.0;  // |l2(v) - l2(v0)| along the run
};

struct Trajectory {
  std::vector<FourierState> states;  // at observer times, requested picture
  StepStats stats;
};

class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& msg, double t, double dt, double err)
      : std::runtime_error(msg), t(t), dt(dt), err(err) {}
  double t, dt, err;
};

// Interaction-picture matrix element (volna):
//   e^{ik(lambda_m - lambda_n) t} Vhat_{m-n}(t), with accumulated phases
//   int_0^t (lambda_m - lambda_n) for time-dependent symbols.
inline cplx interaction_entry(const SymbolSpec& spec,
                              const PotentialModel& pot, double k, double t,
                              int m, int n) {
  const double phase =
      k * (symbol_phase_integral(spec, m, 0.0, t) -
           symbol_phase_integral(spec, n, 0.0, t));
  return std::polar(1.0, phase) * pot.coeff(m - n, t);
}

namespace detail {

// Maximal subintervals of [t0,t1] on which every Vhat_l is a single linear
// piece (with constant extension outside the profile span) and, for the
// gaps symbol, no projection threshold is crossed.
template <typename Fn>
void for_each_linear_chunk(const SymbolSpec& spec, const PotentialModel& pot,
                           int n_max, double t0, double t1, Fn&& fn) {
  std::vector<double> cuts;
  cuts.push_back(t0);
  cuts.push_back(t1);
  for (double b : pot.grid)
    if (b > t0 && b < t1) cuts.push_back(b);
  for (double b : symbol_breakpoints(spec, n_max, t0, t1)) cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    if (cuts[i + 1] > cuts[i]) fn(cuts[i], cuts[i + 1]);
}

// Linear coefficients of Vhat_l on [a,b] (single piece), as value at t_ref
// and slope; zero outside the support.
inline void chunk_coeffs(const PotentialModel& pot, int l, double a, double b,
                         cplx& va, cplx& slope, double& t_ref) {
  if (b <= pot.t_begin() || a >= pot.t_end()) {
    va = 0.0;
    slope = 0.0;
    t_ref = a;
    return;
  }
  const int c = pot.cell_of(0.5 * (a + b));
  pot.cell_coeffs(l, c, va, slope);
  t_ref = pot.grid[static_cast<std::size_t>(c)];
}

// Exact assembly for static symbols. Entry (m, m-l) of int_a^b Vtilde:
// omega(m) = k (lambda(m) - lambda(m-l)) is a quadratic polynomial in m, so
// e^{i omega(m) a} and e^{i omega(m) (b-a)} follow second-order geometric
// recurrences along each diagonal (no transcendentals in the inner loop).
inline void add_omega1_static(const SymbolSpec& spec, const PotentialModel& pot,
                              double k, double a, double b, BandedMatrix& out) {
  const double p1 = spec.poly[0], p2 = spec.poly[1], p3 = spec.poly[2];
  const double d = b - a;
  for (int l = -pot.l_max; l <= pot.l_max; ++l) {
    cplx va, slope;
    double t_ref;
    chunk_coeffs(pot, l, a, b, va, slope, t_ref);
    if (va == cplx(0.0) && slope == cplx(0.0)) continue;
    const double ld = static_cast<double>(l);
    // omega(m) = k [ c0 + c1 m + c2 m^2 ]
    const double c0 = k * (p1 * ld - p2 * ld * ld + p3 * ld * ld * ld);
    const double c1 = k * (2.0 * p2 * ld - 3.0 * p3 * ld * ld);
    const double c2 = k * (3.0 * p3 * ld);
    const int m_lo = std::max(out.n_lo, out.n_lo + l);
    const int m_hi = std::min(out.n_hi, out.n_hi + l);
    if (m_lo > m_hi) continue;
    double omega = c0 + c1 * m_lo + c2 * static_cast<double>(m_lo) * m_lo;
    cplx Pa = std::polar(1.0, omega * a);
    cplx Ea = std::polar(1.0, omega * d);
    double dw = c1 + c2 * (2.0 * m_lo + 1.0);  // omega(m+1) - omega(m)
    cplx ra = std::polar(1.0, dw * a);
    cplx re = std::polar(1.0, dw * d);
    const cplx rra = std::polar(1.0, 2.0 * c2 * a);
    const cplx rre = std::polar(1.0, 2.0 * c2 * d);
    auto& diag = out.diags[static_cast<std::size_t>(l + out.band)];
    for (int m = m_lo; m <= m_hi; ++m) {
      diag[static_cast<std::size_t>(m - out.n_lo)] +=
          linear_phase_integral_prepped(va, slope, t_ref, omega, a, b, Pa, Ea);
      omega += dw;
      Pa *= ra;
      Ea *= re;
      ra *= rra;
      re *= rre;
      dw += 2.0 * c2;
    }
  }
}

// Gauss-Legendre assembly for time-dependent symbols (the phase integrals
// Phi_n are closed-form; chunks are short enough that GL-5 resolves the
// oscillation, and the step controller catches it when they are not).
inline void add_omega1_timedep(const SymbolSpec& spec,
                               const PotentialModel& pot, double k, double a,
                               double b, BandedMatrix& out) {
  static const double gl_x[5] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                 0.5384693101056831, 0.9061798459386640};
  static const double gl_w[5] = {0.2369268850561891, 0.4786286704993665,
                                 0.5688888888888889, 0.4786286704993665,
                                 0.2369268850561891};
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  const int width = out.width();
  std::vector<cplx> ph(static_cast<std::size_t>(width));
  for (int g = 0; g < 5; ++g) {
    const double t = mid + half * gl_x[g];
    const double w = half * gl_w[g];
    for (int n = out.n_lo; n <= out.n_hi; ++n)
      ph[static_cast<std::size_t>(n - out.n_lo)] =
          std::polar(1.0, k * symbol_phase_integral(spec, n, 0.0, t));
    for (int l = -pot.l_max; l <= pot.l_max; ++l) {
      const cplx vl = pot.coeff(l, t);
      if (vl == cplx(0.0)) continue;
      const int m_lo = std::max(out.n_lo, out.n_lo + l);
      const int m_hi = std::min(out.n_hi, out.n_hi + l);
      auto& diag = out.diags[static_cast<std::size_t>(l + out.band)];
      for (int m = m_lo; m <= m_hi; ++m) {
        const cplx pm = ph[static_cast<std::size_t>(m - out.n_lo)];
        const cplx pn = ph[static_cast<std::size_t>(m - l - out.n_lo)];
        diag[static_cast<std::size_t>(m - out.n_lo)] +=
            w * vl * pm * std::conj(pn);
      }
    }
  }
}

}  // namespace detail

namespace detail {

// Reuse storage when the window shape is unchanged.
inline void reset_shape(BandedMatrix& m, int lo, int hi, int band) {
  if (m.n_lo == lo && m.n_hi == hi && m.band == band) {
    for (auto& diag : m.diags) std::fill(diag.begin(), diag.end(), cplx(0.0));
  } else {
    m = BandedMatrix(lo, hi, band);
  }
}

}  // namespace detail

// Omega1 = int_{t0}^{t1} Vtilde(tau) dtau over the mode window, banded with
// the potential's bandwidth. The integral is additive in time, so step
// doubling assembles the two half matrices and sums them for the full step.
inline void assemble_omega1_into(const SymbolSpec& spec,
                                 const PotentialModel& pot, double k,
                                 double t0, double t1, int n_max_for_breaks,
                                 BandedMatrix& out) {
  detail::for_each_linear_chunk(
      spec, pot, n_max_for_breaks, t0, t1, [&](double a, double b) {
        if (spec.time_dependent())
          detail::add_omega1_timedep(spec, pot, k, a, b, out);
        else
          detail::add_omega1_static(spec, pot, k, a, b, out);
      });
}

inline BandedMatrix assemble_omega1(const SymbolSpec& spec,
                                    const PotentialModel& pot, double k,
                                    double t0, double t1, int n_lo, int n_hi,
                                    int n_max_for_breaks) {
  BandedMatrix out(n_lo, n_hi, pot.l_max);
  assemble_omega1_into(spec, pot, k, t0, t1, n_max_for_breaks, out);
  return out;
}

// Point evaluation of Vtilde(t) over a window.
inline BandedMatrix assemble_vtilde(const SymbolSpec& spec,
                                    const PotentialModel& pot, double k,
                                    double t, int n_lo, int n_hi) {
  BandedMatrix out(n_lo, n_hi, pot.l_max);
  const int width = out.width();
  std::vector<cplx> ph(static_cast<std::size_t>(width));
  for (int n = n_lo; n <= n_hi; ++n)
    ph[static_cast<std::size_t>(n - n_lo)] =
        std::polar(1.0, k * symbol_phase_integral(spec, n, 0.0, t));
  for (int l = -pot.l_max; l <= pot.l_max; ++l) {
    const cplx vl = pot.coeff(l, t);
    if (vl == cplx(0.0)) continue;
    const int m_lo = std::max(n_lo, n_lo + l);
    const int m_hi = std::min(n_hi, n_hi + l);
    auto& diag = out.diags[static_cast<std::size_t>(l + out.band)];
    for (int m = m_lo; m <= m_hi; ++m)
      diag[static_cast<std::size_t>(m - n_lo)] =
          vl * ph[static_cast<std::size_t>(m - n_lo)] *
          std::conj(ph[static_cast<std::size_t>(m - l - n_lo)]);
  }
  return out;
}

// Picture conversions (global gauge anchored at t = 0).
inline FourierState to_picture(const FourierState& s, const SymbolSpec& spec,
                               double k, Picture target) {
  if (s.picture == target) return s;
  FourierState out = s;
  out.picture = target;
  const double sign = (target == Picture::lab) ? -1.0 : 1.0;
  for (int n = -s.n_max; n <= s.n_max; ++n) {
    const double phi = symbol_phase_integral(spec, n, 0.0, s.time_stamp);
    out.at(n) = s.at(n) * std::polar(1.0, sign * k * phi);
  }
  return out;
}

// One exponential-midpoint step: exp(-i dt Vtilde(t + dt/2)) applied to an
// interaction-picture state (order 2; kept as the textbook variant the
// adaptive driver's exact-Omega1 step is measured against).
inline FourierState step_midpoint(const FourierState& state,
                                  const SymbolSpec& spec,
                                  const PotentialModel& pot, double k,
                                  double dt) {
  if (state.picture != Picture::interaction)
    throw std::invalid_argument("step_midpoint: state must be interaction picture");
  if (!(dt > 0.0)) throw std::domain_error("step_midpoint: dt must be > 0");
  const double t = state.time_stamp;
  BandedMatrix vt =
      assemble_vtilde(spec, pot, k, t + 0.5 * dt, -state.n_max, state.n_max);
  FourierState out = state;
  expm_apply(vt, cplx(0.0, -dt), out.coeffs);
  out.time_stamp = t + dt;
  return out;
}

namespace detail {

struct Workspace {
  std::vector<cplx> v;  // full band, interaction picture
  int n_max;
  int win_lo, win_hi;

  void refresh_window(int margin, bool adaptive_window) {
    if (!adaptive_window) {
      win_lo = -n_max;
      win_hi = n_max;
      return;
    }
    double vmax = 0.0;
    for (const auto& c : v) vmax = std::max(vmax, std::abs(c));
    const double thr = 1e-16 * vmax;
    int s_lo = 0, s_hi = 0;
    bool found = false;
    for (int n = -n_max; n <= n_max; ++n) {
      if (std::abs(v[static_cast<std::size_t>(n + n_max)]) > thr) {
        if (!found) s_lo = n;
        s_hi = n;
        found = true;
      }
    }
    if (!found) {
      s_lo = s_hi = 0;
    }
    win_lo = std::max(-n_max, s_lo - margin);
    win_hi = std::min(n_max, s_hi + margin);
  }

  std::vector<cplx> window_slice() const {
    return {v.begin() + (win_lo + n_max), v.begin() + (win_hi + n_max) + 1};
  }
  void write_back(const std::vector<cplx>& w) {
    std::copy(w.begin(), w.end(), v.begin() + (win_lo + n_max));
  }
};

}  // namespace detail

// Adaptive evolution. Steps land exactly on observer times, profile
// breakpoints and gaps projection thresholds. Local error is estimated by
// step doubling (one full vs two half exact-Omega1 steps); accepted when
// <= tol, dt <- 0.9 dt (tol/err)^{1/3}.
inline Trajectory evolve(const FourierState& initial, const SymbolSpec& spec,
                         const PotentialModel& pot, const EvolveConfig& cfg) {
  cfg.validate();
  const int n_max = initial.n_max;

  // Event times the stepper must hit exactly.
  std::vector<double> events;
  for (double t : cfg.observer_times)
    if (t > cfg.t0 && t <= cfg.t1) events.push_back(t);
  for (double b : pot.grid)
    if (b > cfg.t0 && b < cfg.t1) events.push_back(b);
  for (double b : symbol_breakpoints(spec, n_max, cfg.t0, cfg.t1))
    events.push_back(b);
  events.push_back(cfg.t1);
  std::sort(events.begin(), events.end());
  events.erase(std::unique(events.begin(), events.end()), events.end());

  FourierState start = initial;
  start.time_stamp = cfg.t0;
  start = to_picture(start, spec, cfg.k, Picture::interaction);

  detail::Workspace ws;
  ws.v = start.coeffs;
  ws.n_max = n_max;
  const int margin = 2 * pot.l_max + 2;
  ws.refresh_window(margin, cfg.window_adaptive);

  const double norm0 = start.l2_norm();

  Trajectory traj;
  auto emit_state = [&](double t) {
    FourierState s(n_max, Picture::interaction, t);
    s.coeffs = ws.v;
    traj.states.push_back(to_picture(s, spec, cfg.k, cfg.picture));
  };
  auto observe_step = [&](double t) {
    if (!cfg.step_observer) return;
    FourierState s(n_max, Picture::interaction, t);
    s.coeffs = ws.v;
    cfg.step_observer(t, s);
  };

  std::size_t next_obs = 0;
  std::vector<double> obs_sorted = cfg.observer_times;
  std::sort(obs_sorted.begin(), obs_sorted.end());
  auto flush_observers = [&](double t) {
    while (next_obs < obs_sorted.size() && obs_sorted[next_obs] <= t + 1e-12) {
      emit_state(obs_sorted[next_obs]);
      ++next_obs;
    }
  };

  observe_step(cfg.t0);
  flush_observers(cfg.t0);

  double t = cfg.t0;
  double dt = std::min(cfg.dt_init, cfg.t1 - cfg.t0);
  std::size_t next_event = 0;
  const double t_scale = std::max(1.0, std::abs(cfg.t1));
  BandedMatrix half1, half2, full;

  while (t < cfg.t1 - 1e-12 * t_scale) {
    while (next_event < events.size() && events[next_event] <= t + 1e-12 * t_scale)
      ++next_event;
    const double target = events[std::min(next_event, events.size() - 1)];
    double h = std::min(dt, target - t);
    if (h <= 0.0) break;

    detail::reset_shape(half1, ws.win_lo, ws.win_hi, pot.l_max);
    detail::reset_shape(half2, ws.win_lo, ws.win_hi, pot.l_max);
    detail::reset_shape(full, ws.win_lo, ws.win_hi, pot.l_max);
    assemble_omega1_into(spec, pot, cfg.k, t, t + 0.5 * h, n_max, half1);
    assemble_omega1_into(spec, pot, cfg.k, t + 0.5 * h, t + h, n_max, half2);
    full += half1;
    full += half2;

    std::vector<cplx> w = ws.window_slice();
    std::vector<cplx> w_full = w;
    expm_apply(full, cplx(0.0, -1.0), w_full);

    double err = 0.0;
    std::vector<cplx> w_half = std::move(w);
    {
      expm_apply(half1, cplx(0.0, -1.0), w_half);
      expm_apply(half2, cplx(0.0, -1.0), w_half);
      for (std::size_t i = 0; i < w_half.size(); ++i)
        err += std::norm(w_full[i] - w_half[i]);
      err = std::sqrt(err);
    }

    const bool accept = !cfg.adaptive || err <= cfg.tol;
    if (accept) {
      ws.write_back(w_half);
      t = (std::abs(t + h - target) <= 1e-12 * t_scale) ? target : t + h;
      traj.stats.accepted++;
      traj.stats.min_dt = std::min(traj.stats.min_dt, h);
      traj.stats.max_dt = std::max(traj.stats.max_dt, h);
      double nrm = 0.0;
      for (const auto& c : ws.v) nrm += std::norm(c);
      traj.stats.max_norm_drift = std::max(
          traj.stats.max_norm_drift, std::abs(std::sqrt(nrm) - norm0));
      observe_step(t);
      flush_observers(t);
      ws.refresh_window(margin, cfg.window_adaptive);
    } else {
      traj.stats.rejected++;
    }

    if (cfg.adaptive) {
      const double grow =
          (err > 0.0) ? 0.9 * std::cbrt(cfg.tol / err) : 5.0;
      dt = h * std::clamp(grow, 0.1, 5.0);
      if (dt < 1e-12)
        throw IntegrationError("evolve: step size underflow", t, dt, err);
    } else {
      dt = cfg.dt_init;
    }
  }

  flush_observers(cfg.t1 + 1.0);  // emit any observers at exactly t1
  return traj;
}

// Truncated Duhamel expansion in the interaction picture:
//   v = sum_{j<n_terms} term_j,  term_0 = v0,
//   term_j(t) = -i int_{t0}^t Vtilde(tau) term_{j-1}(tau) dtau.
// Each iterated integral is evaluated on a refined composite grid (uniform
// within profile pieces, cumulative Simpson pairs), and the grid is doubled
// until the result is stable; the norm of the last term is the remainder
// proxy.
struct DuhamelResult {
  FourierState state;
  double last_term_norm = 0.0;
};

inline DuhamelResult duhamel_series(const FourierState& initial,
                                    const SymbolSpec& spec,
                                    const PotentialModel& pot,
                                    const EvolveConfig& cfg, int n_terms) {
  cfg.validate();
  if (n_terms < 1) throw std::domain_error("duhamel_series: n_terms >= 1");
  const int n_max = initial.n_max;
  FourierState start = initial;
  start.time_stamp = cfg.t0;
  start = to_picture(start, spec, cfg.k, Picture::interaction);

  auto run = [&](int cells_total) {
    // Chain of points: union of profile pieces, each split uniformly into an
    // even number of sub-cells.
    std::vector<double> pts;
    detail::for_each_linear_chunk(
        spec, pot, n_max, cfg.t0, cfg.t1, [&](double a, double b) {
          int m = std::max(
              2, 2 * static_cast<int>(std::ceil(
                      0.5 * cells_total * (b - a) / (cfg.t1 - cfg.t0))));
          for (int i = 0; i < m; ++i) pts.push_back(a + (b - a) * i / m);
        });
    pts.push_back(cfg.t1);
    const std::size_t P = pts.size();

    std::vector<BandedMatrix> vt(P);
    for (std::size_t i = 0; i < P; ++i)
      vt[i] = assemble_vtilde(spec, pot, cfg.k, pts[i], -n_max, n_max);

    const std::size_t W = start.coeffs.size();
    std::vector<std::vector<cplx>> term(P,
                                        std::vector<cplx>(W, cplx(0.0)));
    std::vector<std::vector<cplx>> sum = term;
    for (std::size_t i = 0; i < P; ++i) {
      term[i] = start.coeffs;
      sum[i] = start.coeffs;
    }
    double last_norm = 0.0;
    std::vector<std::vector<cplx>> f(P, std::vector<cplx>(W));
    for (int j = 1; j < n_terms; ++j) {
      for (std::size_t i = 0; i < P; ++i) vt[i].apply(term[i], f[i]);
      std::vector<std::vector<cplx>> next(P, std::vector<cplx>(W, cplx(0.0)));
      // cumulative integral of f along the chain; Simpson on point pairs,
      // half-cell closure for odd offsets.
      for (std::size_t i = 2; i < P; i += 2) {
        const double h = pts[i] - pts[i - 2];
        for (std::size_t w = 0; w < W; ++w)
          next[i][w] = next[i - 2][w] +
                       h / 6.0 * (f[i - 2][w] + 4.0 * f[i - 1][w] + f[i][w]);
      }
      for (std::size_t i = 1; i < P; i += 2) {
        const std::size_t i2 = std::min(i + 1, P - 1);
        const double h = pts[i2] - pts[i - 1];
        if (i2 == i + 1) {
          for (std::size_t w = 0; w < W; ++w)
            next[i][w] =
                next[i - 1][w] +
                h / 24.0 * (5.0 * f[i - 1][w] + 8.0 * f[i][w] - f[i2][w]);
        } else {
          const double hh = pts[i] - pts[i - 1];
          for (std::size_t w = 0; w < W; ++w)
            next[i][w] =
                next[i - 1][w] + hh * 0.5 * (f[i - 1][w] + f[i][w]);
        }
      }
      const cplx mi(0.0, -1.0);
      last_norm = 0.0;
      for (std::size_t i = 0; i < P; ++i)
        for (std::size_t w = 0; w < W; ++w) {
          term[i][w] = mi * next[i][w];
          sum[i][w] += term[i][w];
        }
      for (std::size_t w = 0; w < W; ++w) last_norm += std::norm(term[P - 1][w]);
      last_norm = std::sqrt(last_norm);
    }
    FourierState out(n_max, Picture::interaction, cfg.t1);
    out.coeffs = sum[P - 1];
    return std::make_pair(out, last_norm);
  };

  int cells = 256;
  auto [state, last_norm] = run(cells);
  for (int iter = 0; iter < 5; ++iter) {
    cells *= 2;
    auto [s2, l2n] = run(cells);
    const double diff = l2_distance(state, s2);
    state = s2;
    last_norm = l2n;
    if (diff < 0.25 * cfg.tol) break;
  }
  DuhamelResult res;
  res.state = to_picture(state, spec, cfg.k, cfg.picture);
  res.last_term_norm = last_norm;
  return res;
}

// Dense interaction-picture monodromy: column n = evolve(e_n). Unitary for
// real V within integrator tolerance.
struct MonodromyMatrix {
  Eigen::MatrixXcd entries;  // (2N+1) x (2N+1), interaction picture
  int N = 0;
  double k = 0.0;
  double t0 = 0.0, t1 = 0.0;

  double unitarity_defect() const {
    const Eigen::MatrixXcd I =
        Eigen::MatrixXcd::Identity(entries.rows(), entries.cols());
    return (entries.adjoint() * entries - I).norm();  // Frobenius
  }
};

inline MonodromyMatrix dense_monodromy(const SymbolSpec& spec,
                                       const PotentialModel& pot, double k,
                                       int N, const EvolveConfig& proto) {
  if (N > 64) throw std::domain_error("dense_monodromy: N > 64 (dense oracle scale)");
  MonodromyMatrix mono;
  mono.N = N;
  mono.k = k;
  mono.t0 = proto.t0;
  mono.t1 = proto.t1;
  const int dim = 2 * N + 1;
  mono.entries.resize(dim, dim);
  EvolveConfig cfg = proto;
  cfg.k = k;
  cfg.picture = Picture::interaction;
  cfg.observer_times = {cfg.t1};
  cfg.step_observer = nullptr;
  for (int n = -N; n <= N; ++n) {
    FourierState e = delta_state(N, n);
    e.picture = Picture::interaction;
    e.time_stamp = cfg.t0;
    Trajectory tr = evolve(e, spec, pot, cfg);
    const FourierState& col = tr.states.back();
    for (int m = -N; m <= N; ++m) mono.entries(m + N, n + N) = col.at(m);
  }
  return mono;
}

// Truncation-convergence scan: sup over observer times of the l2 distance
// between the band-N solution and a reference at twice the largest band.
struct TruncationRow {
  int N;
  double deviation;
};

inline std::vector<TruncationRow> truncation_scan(const SymbolSpec& spec,
                                                  const PotentialModel& pot,
                                                  double k,
                                                  const EvolveConfig& proto,
                                                  const std::vector<int>& N_list,
                                                  const FourierState& initial) {
  if (N_list.empty()) return {};
  for (std::size_t i = 1; i < N_list.size(); ++i)
    if (N_list[i] <= N_list[i - 1])
      throw std::invalid_argument("truncation_scan: N_list must ascend");
  const int N_ref = 2 * N_list.back();
  EvolveConfig cfg = proto;
  cfg.k = k;
  cfg.picture = Picture::lab;

  auto run_at_band = [&](int N) {
    FourierState init_N(N, initial.picture, cfg.t0);
    for (int n = -N; n <= N; ++n) init_N.at(n) = initial.value_or_zero(n);
    return evolve(init_N, spec, pot, cfg);
  };

  Trajectory ref = run_at_band(N_ref);
  std::vector<TruncationRow> rows;
  for (int N : N_list) {
    Trajectory tr = run_at_band(N);
    double dev = 0.0;
    for (std::size_t i = 0; i < tr.states.size(); ++i) {
      double d2 = 0.0;
      const FourierState& a = tr.states[i];
      const FourierState& b = ref.states[i];
      for (int n = -N_ref; n <= N_ref; ++n)
        d2 += std::norm(a.value_or_zero(n) - b.at(n));
      dev = std::max(dev, std::sqrt(d2));
    }
    rows.push_back({N, dev});
  }
  return rows;
}

// Direct lab-picture stepper (frozen-midpoint generator k Lambda + V),
// kept as an independent gauge-consistency oracle.
inline FourierState evolve_lab_frozen(const FourierState& initial,
                                      const SymbolSpec& spec,
                                      const PotentialModel& pot, double k,
                                      double t0, double t1, double dt) {
  FourierState s = initial;
  s.picture = Picture::lab;
  s.time_stamp = t0;
  double t = t0;
  while (t < t1 - 1e-15) {
    const double h = std::min(dt, t1 - t);
    const double tm = t + 0.5 * h;
    BandedMatrix g(-s.n_max, s.n_max, pot.l_max);
    for (int l = -pot.l_max; l <= pot.l_max; ++l) {
      const cplx vl = pot.coeff(l, tm);
      const int m_lo = std::max(-s.n_max, -s.n_max + l);
      const int m_hi = std::min(s.n_max, s.n_max + l);
      for (int m = m_lo; m <= m_hi; ++m) g.entry(m, m - l) = vl;
    }
    for (int n = -s.n_max; n <= s.n_max; ++n)
      g.entry(n, n) += k * symbol_multiplier(spec, n, tm);
    expm_apply(g, cplx(0.0, -h), s.coeffs);
    t += h;
  }
  s.time_stamp = t1;
  return s;
}

}  // namespace speclab
