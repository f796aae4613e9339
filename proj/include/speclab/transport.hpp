#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "speclab/dft.hpp"
#include "speclab/estimators.hpp"
#include "speclab/fourier_state.hpp"
#include "speclab/potential.hpp"
#include "speclab/propagator.hpp"
#include "speclab/symbol.hpp"

namespace speclab {

// Transport solutions along exact characteristics.
//
// Convention note. The code's Fourier multiplier of the drift is +n q(t)
// (matching the gaps symbol n/(t+1)), whose physical-space operator is
// -i k q(t) d_x. The free flow of that operator translates data by
// -k int q, so
//
//   nu(x,s)  = exp(-i int_0^s V(x - (k/T)(s-sigma), t0+sigma) dsigma),
//   G(x,t)   = exp(-i int_0^t V(x - k log((1+t)/(1+tau)), tau) dtau),
//
// and the matching WKB translate of initial data is f(x - k s/T), i.e.
// coefficient phases e^{-inks/T}. (The mirror convention +k s/T describes
// the same family under k -> -k; all reported quantities sweep symmetric
// k-grids.)
//
// Path integrals reduce per mode to the exact prefix integrals
//   nu:  int Vhat_l(tau) e^{ilk tau/T} dtau          (linear phase)
//   G:   int Vhat_l(tau) (1+tau)^{ilk} dtau          (power phase)
// so fields are evaluable exactly at arbitrary (x,t).

namespace detail {

// Exact prefix of int Vhat_l(tau) e^{i omega tau} dtau over [lo, t].
class OscPrefix {
 public:
  OscPrefix() = default;
  OscPrefix(const PotentialModel& pot, int l, double omega, double lo,
            double hi)
      : pot_(&pot), l_(l), omega_(omega) {
    ts_.push_back(lo);
    for (double b : pot.grid)
      if (b > lo && b < hi) ts_.push_back(b);
    ts_.push_back(hi);
    std::sort(ts_.begin(), ts_.end());
    ts_.erase(std::unique(ts_.begin(), ts_.end()), ts_.end());
    prefix_.assign(ts_.size(), cplx(0.0));
    for (std::size_t i = 0; i + 1 < ts_.size(); ++i)
      prefix_[i + 1] =
          prefix_[i] + oscillatory_integral(pot, l, omega, ts_[i], ts_[i + 1]);
  }

  cplx value(double t) const {
    if (t <= ts_.front()) return 0.0;
    if (t >= ts_.back()) return prefix_.back();
    const auto it = std::upper_bound(ts_.begin(), ts_.end(), t);
    const std::size_t c = static_cast<std::size_t>(it - ts_.begin()) - 1;
    return prefix_[c] + oscillatory_integral(*pot_, l_, omega_, ts_[c], t);
  }

 private:
  const PotentialModel* pot_ = nullptr;
  int l_ = 0;
  double omega_ = 0.0;
  std::vector<double> ts_;
  std::vector<cplx> prefix_;
};

// Exact prefix of int Vhat_l(tau) (1+tau)^{i beta} dtau over [lo, t].
class PowPrefix {
 public:
  PowPrefix() = default;
  PowPrefix(const PotentialModel& pot, int l, double beta, double lo,
            double hi)
      : pot_(&pot), l_(l), beta_(beta) {
    lo = std::max(lo, pot.t_begin());
    hi = std::min(hi, pot.t_end());
    if (hi < lo) hi = lo;
    ts_.push_back(lo);
    for (double b : pot.grid)
      if (b > lo && b < hi) ts_.push_back(b);
    if (hi > lo) ts_.push_back(hi);
    std::sort(ts_.begin(), ts_.end());
    ts_.erase(std::unique(ts_.begin(), ts_.end()), ts_.end());
    prefix_.assign(ts_.size(), cplx(0.0));
    for (std::size_t i = 0; i + 1 < ts_.size(); ++i)
      prefix_[i + 1] = prefix_[i] + segment(ts_[i], ts_[i + 1]);
  }

  cplx value(double t) const {
    if (ts_.empty() || t <= ts_.front()) return 0.0;
    if (t >= ts_.back()) return prefix_.back();
    const auto it = std::upper_bound(ts_.begin(), ts_.end(), t);
    const std::size_t c = static_cast<std::size_t>(it - ts_.begin()) - 1;
    return prefix_[c] + segment(ts_[c], t);
  }

 private:
  cplx segment(double a, double b) const {
    if (b <= a) return 0.0;
    const int c = pot_->cell_of(0.5 * (a + b));
    cplx va, sl;
    pot_->cell_coeffs(l_, c, va, sl);
    return power_phase_integral(va, sl,
                                pot_->grid[static_cast<std::size_t>(c)], beta_,
                                a, b);
  }

  const PotentialModel* pot_ = nullptr;
  int l_ = 0;
  double beta_ = 0.0;
  std::vector<double> ts_;
  std::vector<cplx> prefix_;
};

}  // namespace detail

// Solution of i nu_t = -ik nu_x / T + V nu, nu(.,0) = 1, started at absolute
// time t0 (local time s = t - t0 in [0, T]).
class NuTransport {
 public:
  NuTransport(const PotentialModel& pot, double k, double T, double t0)
      : pot_(pot), k_(k), T_(T), t0_(t0) {
    prefixes_.resize(2 * static_cast<std::size_t>(pot.l_max) + 1);
    for (int l = -pot.l_max; l <= pot.l_max; ++l)
      prefixes_[static_cast<std::size_t>(l + pot.l_max)] =
          detail::OscPrefix(pot, l, l * k / T, t0, t0 + T);
  }

  // Accumulated path integral A(x,s) = int_0^s V along the characteristic;
  // nu = exp(-iA). Real-valued for real V.
  cplx exponent(double x, double s) const {
    cplx acc = 0.0;
    for (int l = -pot_.l_max; l <= pot_.l_max; ++l) {
      const cplx P =
          prefixes_[static_cast<std::size_t>(l + pot_.l_max)].value(t0_ + s);
      acc += std::polar(1.0, l * (x - k_ * s / T_ - k_ * t0_ / T_)) * P;
    }
    return acc;
  }

  cplx value(double x, double s) const {
    return std::exp(cplx(0.0, -1.0) * exponent(x, s));
  }

  // Phase field mu with nu = e^{i mu} (real V).
  double phase_mu(double x, double s) const { return -exponent(x, s).real(); }

  std::vector<cplx> field(const std::vector<double>& xs, double s) const {
    std::vector<cplx> out(xs.size());
    std::vector<cplx> cl(2 * static_cast<std::size_t>(pot_.l_max) + 1);
    for (int l = -pot_.l_max; l <= pot_.l_max; ++l)
      cl[static_cast<std::size_t>(l + pot_.l_max)] =
          prefixes_[static_cast<std::size_t>(l + pot_.l_max)].value(t0_ + s) *
          std::polar(1.0, -l * k_ * (s + t0_) / T_);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      cplx acc = 0.0;
      for (int l = -pot_.l_max; l <= pot_.l_max; ++l)
        acc += cl[static_cast<std::size_t>(l + pot_.l_max)] *
               std::polar(1.0, l * xs[i]);
      out[i] = std::exp(cplx(0.0, -1.0) * acc);
    }
    return out;
  }

  double k() const { return k_; }
  double speed_T() const { return T_; }
  double t0() const { return t0_; }

 private:
  const PotentialModel& pot_;
  double k_, T_, t0_;
  std::vector<detail::OscPrefix> prefixes_;
};

// Solution of i G_t = -ik G_x/(1+t) + V G, G(.,0) = 1 (absolute time).
class GTransport {
 public:
  GTransport(const PotentialModel& pot, double k) : pot_(pot), k_(k) {
    prefixes_.resize(2 * static_cast<std::size_t>(pot.l_max) + 1);
    for (int l = -pot.l_max; l <= pot.l_max; ++l)
      prefixes_[static_cast<std::size_t>(l + pot.l_max)] =
          detail::PowPrefix(pot, l, l * k, 0.0, pot.t_end());
  }

  cplx exponent(double x, double t) const {
    cplx acc = 0.0;
    for (int l = -pot_.l_max; l <= pot_.l_max; ++l) {
      const cplx Q = prefixes_[static_cast<std::size_t>(l + pot_.l_max)].value(t);
      acc += std::polar(1.0, l * x) *
             std::pow(cplx(1.0 + t, 0.0), cplx(0.0, -l * k_)) * Q;
    }
    return acc;
  }

  cplx value(double x, double t) const {
    return std::exp(cplx(0.0, -1.0) * exponent(x, t));
  }

  std::vector<cplx> field(const std::vector<double>& xs, double t) const {
    std::vector<cplx> out(xs.size());
    std::vector<cplx> cl(2 * static_cast<std::size_t>(pot_.l_max) + 1);
    for (int l = -pot_.l_max; l <= pot_.l_max; ++l)
      cl[static_cast<std::size_t>(l + pot_.l_max)] =
          prefixes_[static_cast<std::size_t>(l + pot_.l_max)].value(t) *
          std::pow(cplx(1.0 + t, 0.0), cplx(0.0, -l * k_));
    for (std::size_t i = 0; i < xs.size(); ++i) {
      cplx acc = 0.0;
      for (int l = -pot_.l_max; l <= pot_.l_max; ++l)
        acc += cl[static_cast<std::size_t>(l + pot_.l_max)] *
               std::polar(1.0, l * xs[i]);
      out[i] = std::exp(cplx(0.0, -1.0) * acc);
    }
    return out;
  }

 private:
  const PotentialModel& pot_;
  double k_;
  std::vector<detail::PowPrefix> prefixes_;
};

// Piecewise-frozen transport: i nu_t = -ik q(t) nu_x + V nu with
// q(t) = 1/T_j on [T_j, T_{j+1}). Theta(t) = k int q is piecewise linear,
// so the per-mode prefixes stay exact oscillatory integrals.
class ChainedTransport {
 public:
  ChainedTransport(const PotentialModel& pot, double k,
                   std::vector<double> block_edges)
      : pot_(pot), k_(k), edges_(std::move(block_edges)) {
    if (edges_.size() < 2)
      throw std::invalid_argument("ChainedTransport: need >= 1 block");
    theta_.assign(edges_.size(), 0.0);
    for (std::size_t b = 0; b + 1 < edges_.size(); ++b)
      theta_[b + 1] =
          theta_[b] + k_ * (edges_[b + 1] - edges_[b]) / edges_[b];
    const int L = pot.l_max;
    prefixes_.assign(2 * static_cast<std::size_t>(L) + 1, {});
    for (int l = -L; l <= L; ++l) {
      auto& per_block = prefixes_[static_cast<std::size_t>(l + L)];
      per_block.resize(edges_.size() - 1);
      for (std::size_t b = 0; b + 1 < edges_.size(); ++b)
        per_block[b] = detail::OscPrefix(pot, l, l * k_ / edges_[b], edges_[b],
                                         edges_[b + 1]);
    }
  }

  double theta(double t) const {
    const std::size_t b = block_of(t);
    return theta_[b] + k_ * (t - edges_[b]) / edges_[b];
  }

  // R_l(t) = int_{edges_0}^t Vhat_l(tau) e^{il Theta(tau)} dtau
  cplx mode_prefix(int l, double t) const {
    const int L = pot_.l_max;
    const auto& per_block = prefixes_[static_cast<std::size_t>(l + L)];
    cplx acc = 0.0;
    const std::size_t bt = block_of(t);
    for (std::size_t b = 0; b <= bt && b < per_block.size(); ++b) {
      const double hi = std::min(t, edges_[b + 1]);
      // within block b: e^{il Theta} = e^{il(theta_b - k a_b/T_b)} e^{ilk tau/T_b}
      const cplx front =
          std::polar(1.0, l * (theta_[b] - k_ * edges_[b] / edges_[b]));
      acc += front * per_block[b].value(hi);
    }
    return acc;
  }

  cplx exponent(double x, double t) const {
    cplx acc = 0.0;
    const double th = theta(t);
    for (int l = -pot_.l_max; l <= pot_.l_max; ++l)
      acc += std::polar(1.0, l * (x - th)) * mode_prefix(l, t);
    return acc;
  }

  cplx value(double x, double t) const {
    return std::exp(cplx(0.0, -1.0) * exponent(x, t));
  }

  std::vector<cplx> field(const std::vector<double>& xs, double t) const {
    std::vector<cplx> out(xs.size());
    const double th = theta(t);
    std::vector<cplx> cl(2 * static_cast<std::size_t>(pot_.l_max) + 1);
    for (int l = -pot_.l_max; l <= pot_.l_max; ++l)
      cl[static_cast<std::size_t>(l + pot_.l_max)] =
          mode_prefix(l, t) * std::polar(1.0, -l * th);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      cplx acc = 0.0;
      for (int l = -pot_.l_max; l <= pot_.l_max; ++l)
        acc += cl[static_cast<std::size_t>(l + pot_.l_max)] *
               std::polar(1.0, l * xs[i]);
      out[i] = std::exp(cplx(0.0, -1.0) * acc);
    }
    return out;
  }

 private:
  std::size_t block_of(double t) const {
    if (t <= edges_.front()) return 0;
    const auto it = std::upper_bound(edges_.begin(), edges_.end(), t);
    return std::min(edges_.size() - 2,
                    static_cast<std::size_t>(it - edges_.begin()) - 1);
  }

  const PotentialModel& pot_;
  double k_;
  std::vector<double> edges_;
  std::vector<double> theta_;
  std::vector<std::vector<detail::OscPrefix>> prefixes_;
};

inline std::vector<double> x_grid(int M) {
  std::vector<double> xs(static_cast<std::size_t>(M));
  for (int i = 0; i < M; ++i)
    xs[static_cast<std::size_t>(i)] = 2.0 * M_PI * i / M;
  return xs;
}

// Spec ops: sampled complex fields.
inline std::vector<cplx> transport_nu(const PotentialModel& pot, double k,
                                      double T, const std::vector<double>& xs,
                                      double s, double t0 = 0.0) {
  if (s < 0.0 || s > T) throw std::domain_error("transport_nu: s outside [0,T]");
  return NuTransport(pot, k, T, t0).field(xs, s);
}

inline std::vector<cplx> transport_G(const PotentialModel& pot, double k,
                                     double t, const std::vector<double>& xs) {
  return GTransport(pot, k).field(xs, t);
}

// sup_{t<T} ||G(.,t,k)||_{H^{1/2}} on a time grid, with the bound side of
// the energy estimate: 1 + int_0^T (1+t) int_T V^2 dx dt (the leading 1 is
// the constant-mode contribution; the integral controls the homogeneous
// part).
struct HHalfTransportResult {
  double sup_h_half = 0.0;          // inhomogeneous norm
  double sup_h_half_homog_sq = 0.0; // sup of the homogeneous square
  double bound_side = 0.0;
};

inline HHalfTransportResult h_half_norm_of_transport(const PotentialModel& pot,
                                                     double k, double T,
                                                     int x_points = 512,
                                                     int t_samples = 64) {
  GTransport G(pot, k);
  const auto xs = x_grid(x_points);
  HHalfTransportResult out;
  for (int i = 0; i <= t_samples; ++i) {
    const double t = T * i / t_samples;
    const FieldHHalf h = field_h_half(G.field(xs, t));
    out.sup_h_half = std::max(out.sup_h_half, std::sqrt(h.inhomogeneous_sq));
    out.sup_h_half_homog_sq = std::max(out.sup_h_half_homog_sq, h.homogeneous_sq);
  }
  out.bound_side = 1.0 + v_squared_time_integral(pot, 0.0, T, 1.0);
  return out;
}

// ---------------------------------------------------------------------------
// Diadic WKB machinery

struct DiadicParams {
  double gamma = 0.96;
  double alpha_exp = 11.0 * (1.0 - 0.96);   // Fourier cutoff exponent
  double delta_exp = 6.0 * (1.0 - 0.96);
  double beta_exp = 1.5 * (1.0 - 0.96);     // initial-data H^{1/2} exponent
  double omega_beta = 1.25 * (1.0 - 0.96);  // exponent in the Omega_lambda sum
  double A = 2.0;
  double betar_C = 1.0;

  static DiadicParams for_gamma(double gamma) {
    DiadicParams p;
    p.gamma = gamma;
    p.alpha_exp = 11.0 * (1.0 - gamma);
    p.delta_exp = 6.0 * (1.0 - gamma);
    p.beta_exp = 1.5 * (1.0 - gamma);
    p.omega_beta = 1.25 * (1.0 - gamma);
    return p;
  }

  void validate() const {
    if (!(gamma >= 83.0 / 87.0 && gamma < 1.0))
      throw std::domain_error("DiadicParams: gamma must lie in [83/87, 1)");
    if (!(alpha_exp < 0.5))
      throw std::domain_error(
          "DiadicParams: alpha_exp must be < 1/2 (override the default near "
          "gamma = 83/87)");
    if (!(delta_exp < alpha_exp))
      throw std::domain_error("DiadicParams: need delta_exp < alpha_exp");
    if (!(alpha_exp > delta_exp + 4.0 * (1.0 - gamma)))
      throw std::domain_error(
          "DiadicParams: need alpha_exp > delta_exp + 4(1-gamma)");
    if (!(omega_beta > 1.0 - gamma && omega_beta < 1.5 * (1.0 - gamma)))
      throw std::domain_error(
          "DiadicParams: omega_beta must lie in (1-gamma, 1.5(1-gamma))");
    if (!(A > 1.0)) throw std::domain_error("DiadicParams: A must exceed 1");
  }
};

// V1 correction multiplier of the frozen-drift reduction on [T, 2T]:
//   V1(n,t) = k [ n^2/(t+1)^2 + n/(t+1) - n/T ]  for |n| <= T^alpha, else 0.
inline double gaps_rhs_correction(double T, double alpha_exp, double t, int n,
                                  double k) {
  if (t < T || t > 2.0 * T)
    throw std::domain_error("gaps_rhs_correction: t must lie in [T, 2T]");
  const double cutoff = std::pow(T, alpha_exp);
  if (std::abs(n) > cutoff) return 0.0;
  const double nd = static_cast<double>(n);
  return k * (nd * nd / ((t + 1.0) * (t + 1.0)) + nd / (t + 1.0) - nd / T);
}

// sup over the band and t in [T,2T] of |V1|, with both normalizations
// (the quadratic piece scales like T^{2 alpha - 2}, the drift-freeze piece
// like T^{alpha - 1}; the latter dominates and the report carries both).
struct V1SupReport {
  double sup = 0.0;
  double normalized_2am2 = 0.0;  // sup / T^{2 alpha - 2}
  double normalized_am1 = 0.0;   // sup / T^{alpha - 1}
};

inline V1SupReport v1_sup_report(double T, double alpha_exp, double k,
                                 int t_samples = 64) {
  V1SupReport rep;
  const int band = static_cast<int>(std::floor(std::pow(T, alpha_exp)));
  for (int n = -band; n <= band; ++n)
    for (int i = 0; i <= t_samples; ++i) {
      const double t = T + T * i / t_samples;
      rep.sup = std::max(rep.sup,
                         std::abs(gaps_rhs_correction(T, alpha_exp, t, n, k)));
    }
  rep.normalized_2am2 = rep.sup / std::pow(T, 2.0 * alpha_exp - 2.0);
  rep.normalized_am1 = rep.sup / std::pow(T, alpha_exp - 1.0);
  return rep;
}

class BetarViolation : public std::domain_error {
 public:
  explicit BetarViolation(const std::string& msg) : std::domain_error(msg) {}
};

// Initial-data hypotheses: ||u0||_inf <= 1, ||u0||_{H^{1/2}} <= C T^{beta}.
inline void check_betar(const FourierState& u0, double T,
                        const DiadicParams& params, int x_points = 512) {
  double sup = 0.0;
  for (int i = 0; i < x_points; ++i)
    sup = std::max(sup, std::abs(u0.evaluate(2.0 * M_PI * i / x_points)));
  if (sup > 1.0 + 1e-9)
    throw BetarViolation("initial data: sup norm " + std::to_string(sup) +
                         " exceeds 1");
  const double h_half = sobolev_norm(u0, {0.5, false});
  const double cap = params.betar_C * std::pow(T, params.beta_exp);
  if (h_half > cap * (1.0 + 1e-9))
    throw BetarViolation("initial data: H^{1/2} norm " + std::to_string(h_half) +
                         " exceeds " + std::to_string(cap));
}

// One diadic block [T, 2T]: evolve the gaps equation from u0 and compare
// with nu(x, s) u0(x - k s/T) at the observer times (translate = coefficient
// phases e^{-inks/T}).
struct WkbResult {
  double sup_error = 0.0;
  std::vector<double> times;   // absolute
  std::vector<double> errors;  // L2 distances
  double u0_h_half = 0.0;
};

struct WkbOptions {
  int n_obs = 16;
  int x_points = 512;
  double tol = 1e-9;
  bool check_hypotheses = true;
};

inline WkbResult wkb_compare(const PotentialModel& pot,
                             const DiadicParams& params, double T, double k,
                             const FourierState& u0,
                             const WkbOptions& opt = {}) {
  if (opt.check_hypotheses) check_betar(u0, T, params);

  EvolveConfig cfg;
  cfg.k = k;
  cfg.t0 = T;
  cfg.t1 = 2.0 * T;
  cfg.tol = opt.tol;
  cfg.picture = Picture::lab;
  for (int i = 1; i <= opt.n_obs; ++i)
    cfg.observer_times.push_back(T + T * i / opt.n_obs);
  Trajectory tr = evolve(u0, SymbolSpec::gaps(), pot, cfg);

  NuTransport nu(pot, k, T, T);
  const auto xs = x_grid(opt.x_points);

  WkbResult res;
  res.u0_h_half = sobolev_norm(u0, {0.5, false});
  for (std::size_t i = 0; i < tr.states.size(); ++i) {
    const double t = cfg.observer_times[i];
    const double s = t - T;
    // translate u0 by -ks/T
    FourierState shifted = u0;
    for (int n = -u0.n_max; n <= u0.n_max; ++n)
      shifted.at(n) = u0.at(n) * std::polar(1.0, -n * k * s / T);
    const auto nu_field = nu.field(xs, s);
    double err_sq = 0.0;
    for (std::size_t j = 0; j < xs.size(); ++j) {
      const cplx diff = tr.states[i].evaluate(xs[j]) -
                        nu_field[j] * shifted.evaluate(xs[j]);
      err_sq += std::norm(diff);
    }
    const double err = std::sqrt(err_sq / static_cast<double>(xs.size()));
    res.times.push_back(t);
    res.errors.push_back(err);
    res.sup_error = std::max(res.sup_error, err);
  }
  return res;
}

// Zero-mode tracker for the oscillatory class: evolve with the decaying
// Laplacian multiplier n^2/(1+t)^2 and V = Q_x/(t+1) supported on t > T,
// recording sup |1 - u_hat_0| and sup ||1 - u||. The chain
// ||1-u||^2 = |1-u_hat_0|^2 + (1-|u_hat_0|^2) <= 3 |1-u_hat_0| is asserted
// at every sample (uses ||u|| = 1).
struct ZeroModeResult {
  double sup_dev_zero_mode = 0.0;  // sup |1 - u_hat_0|
  double sup_tail_mass = 0.0;      // sup sum_{n != 0} |u_hat_n|^2 = sup (1-|u_hat_0|^2)
  double sup_dev_full = 0.0;       // sup ||1 - u||
  long chain_violations = 0;
  long samples = 0;
};

inline ZeroModeResult zero_mode_deviation(const PotentialModel& pot,
                                          double T_start, double k,
                                          double t_end, int n_max,
                                          double tol = 1e-9) {
  if (pot.kind != PotentialModel::Kind::oscillatory_Q && !pot.is_zero())
    throw std::invalid_argument(
        "zero_mode_deviation: potential must be of the oscillatory kind");
  EvolveConfig cfg;
  cfg.k = k;
  cfg.t0 = T_start;
  cfg.t1 = t_end;
  cfg.tol = tol;
  cfg.picture = Picture::interaction;
  ZeroModeResult res;
  cfg.step_observer = [&](double, const FourierState& v) {
    const double dev0 = std::abs(cplx(1.0) - v.at(0));
    double tail = 0.0;
    for (int n = -v.n_max; n <= v.n_max; ++n)
      if (n != 0) tail += std::norm(v.at(n));
    const double full_sq = std::norm(cplx(1.0) - v.at(0)) + tail;
    res.sup_dev_zero_mode = std::max(res.sup_dev_zero_mode, dev0);
    res.sup_tail_mass = std::max(res.sup_tail_mass, tail);
    res.sup_dev_full = std::max(res.sup_dev_full, std::sqrt(full_sq));
    res.samples++;
    if (full_sq > 3.0 * dev0 + 1e-9) res.chain_violations++;
  };
  FourierState init = constant_one(n_max);
  init.time_stamp = T_start;
  evolve(init, SymbolSpec::decay_laplacian(), pot, cfg);
  return res;
}

// Chain wkb_compare across diadic blocks [T_j, T_{j+1}], re-feeding end
// states; track the Omega_lambda membership sum (homogeneous H^{1/2} of the
// chained frozen transport at the diadic points over T_j^{2 beta}) and the
// distance to the exact log-characteristic transport G.
struct DiadicPerK {
  double k = 0.0;
  bool betar_flagged = false;
  double omega_sum = 0.0;
  double sup_u_minus_G = 0.0;
  std::vector<double> block_wkb_errors;
};

struct DiadicReport {
  std::vector<DiadicPerK> rows;
  std::vector<double> per_j_median_wkb;
  double k_avg_sup_u_minus_G = 0.0;
  double bad_set_fraction = 0.0;
  int j0 = 0, j_max = 0;
};

struct DiadicOptions {
  int n_obs_per_block = 8;
  int x_points = 256;
  double tol = 1e-8;
};

inline DiadicReport diadic_pipeline(const PotentialModel& pot,
                                    const DiadicParams& params,
                                    const std::vector<double>& k_grid, int j0,
                                    int j_max, int n_max,
                                    const DiadicOptions& opt = {}) {
  params.validate();
  if (j_max > 14) throw std::domain_error("diadic_pipeline: j_max > 14");
  if (j_max < j0) throw std::domain_error("diadic_pipeline: j_max < j0");

  std::vector<double> edges;
  for (int j = j0; j <= j_max + 1; ++j) edges.push_back(std::pow(2.0, j));

  DiadicReport report;
  report.j0 = j0;
  report.j_max = j_max;
  std::vector<std::vector<double>> per_j_errors(
      static_cast<std::size_t>(j_max - j0 + 1));
  const auto xs = x_grid(opt.x_points);

  for (double k : k_grid) {
    DiadicPerK row;
    row.k = k;
    GTransport G(pot, k);
    ChainedTransport nu_chain(pot, k, edges);

    FourierState u = constant_one(n_max);
    u.time_stamp = edges.front();

    for (int j = j0; j <= j_max; ++j) {
      const double T = std::pow(2.0, j);
      try {
        check_betar(u, T, params, opt.x_points);
      } catch (const BetarViolation&) {
        row.betar_flagged = true;
      }

      WkbOptions wopt;
      wopt.n_obs = opt.n_obs_per_block;
      wopt.x_points = opt.x_points;
      wopt.tol = opt.tol;
      wopt.check_hypotheses = false;
      const WkbResult wkb = wkb_compare(pot, params, T, k, u, wopt);
      row.block_wkb_errors.push_back(wkb.sup_error);
      per_j_errors[static_cast<std::size_t>(j - j0)].push_back(wkb.sup_error);

      // u - G along this block
      EvolveConfig cfg;
      cfg.k = k;
      cfg.t0 = T;
      cfg.t1 = 2.0 * T;
      cfg.tol = opt.tol;
      cfg.picture = Picture::lab;
      for (int i = 1; i <= opt.n_obs_per_block; ++i)
        cfg.observer_times.push_back(T + T * i / opt.n_obs_per_block);
      Trajectory tr = evolve(u, SymbolSpec::gaps(), pot, cfg);
      for (std::size_t i = 0; i < tr.states.size(); ++i) {
        const auto g_field = G.field(xs, cfg.observer_times[i]);
        double err_sq = 0.0;
        for (std::size_t m = 0; m < xs.size(); ++m)
          err_sq += std::norm(tr.states[i].evaluate(xs[m]) - g_field[m]);
        row.sup_u_minus_G = std::max(
            row.sup_u_minus_G,
            std::sqrt(err_sq / static_cast<double>(xs.size())));
      }
      u = tr.states.back();

      // Omega_lambda sum: chained nu at the diadic endpoint
      const FieldHHalf h = field_h_half(nu_chain.field(xs, 2.0 * T));
      row.omega_sum += h.homogeneous_sq / std::pow(2.0 * T, 2.0 * params.omega_beta);
    }
    report.rows.push_back(std::move(row));
  }

  double acc = 0.0;
  int bad = 0;
  for (const auto& row : report.rows) {
    acc += row.sup_u_minus_G;
    if (row.betar_flagged || row.omega_sum >= 1.0) ++bad;
  }
  if (!report.rows.empty()) {
    report.k_avg_sup_u_minus_G = acc / static_cast<double>(report.rows.size());
    report.bad_set_fraction =
        static_cast<double>(bad) / static_cast<double>(report.rows.size());
  }
  for (auto& errs : per_j_errors) {
    std::sort(errs.begin(), errs.end());
    report.per_j_median_wkb.push_back(
        errs.empty() ? 0.0 : errs[errs.size() / 2]);
  }
  return report;
}

}  // namespace speclab
