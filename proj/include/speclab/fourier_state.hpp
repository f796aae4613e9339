#pragma once

#include <cmath>
#include <complex>
#include <cstdlib>
#include <stdexcept>
#include <vector>

#include "speclab/cell_integrals.hpp"

namespace speclab {

enum class Picture { lab, interaction };

// Band-limited state on the torus: coefficients u_hat_n for n in
// [-n_max, n_max], stored centered (index i = n + n_max). Modes outside the
// band are identically zero. L^2(T) carries the normalized measure dx/2pi,
// so ||u||_{L^2}^2 = sum |u_hat_n|^2 and the constant 1 is delta_0.
struct FourierState {
  int n_max = 0;
  Picture picture = Picture::lab;
  double time_stamp = 0.0;
  std::vector<cplx> coeffs;  // size 2*n_max+1

  FourierState() = default;
  explicit FourierState(int band, Picture pic = Picture::lab, double t = 0.0)
      : n_max(band), picture(pic), time_stamp(t),
        coeffs(2 * static_cast<std::size_t>(band) + 1, cplx(0.0, 0.0)) {
    if (band < 0) throw std::domain_error("FourierState: band must be >= 0");
  }

  int size() const { return 2 * n_max + 1; }

  cplx& at(int n) { return coeffs[static_cast<std::size_t>(n + n_max)]; }
  cplx at(int n) const { return coeffs[static_cast<std::size_t>(n + n_max)]; }

  bool in_band(int n) const { return n >= -n_max && n <= n_max; }

  cplx value_or_zero(int n) const { return in_band(n) ? at(n) : cplx(0.0); }

  bool finite() const {
    for (const auto& c : coeffs)
      if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
    return true;
  }

  double l2_norm_sq() const {
    double s = 0.0;
    for (const auto& c : coeffs) s += std::norm(c);
    return s;
  }
  double l2_norm() const { return std::sqrt(l2_norm_sq()); }

  // Evaluate u(x) = sum u_hat_n e^{inx}.
  cplx evaluate(double x) const {
    cplx sum = 0.0;
    const cplx e = std::polar(1.0, x);
    cplx p = std::polar(1.0, -n_max * x);
    for (int n = -n_max; n <= n_max; ++n) {
      sum += at(n) * p;
      p *= e;
    }
    return sum;
  }
};

inline FourierState delta_state(int n_max, int mode, cplx amp = cplx(1.0)) {
  FourierState s(n_max);
  if (!s.in_band(mode))
    throw std::domain_error("delta_state: mode outside band");
  s.at(mode) = amp;
  return s;
}

// u(x,0) = 1, the standard initial datum.
inline FourierState constant_one(int n_max) { return delta_state(n_max, 0); }

struct SobolevIndex {
  double alpha = 0.0;
  bool homogeneous = false;
};

// ||f||_{H^alpha}^2 = sum_n (1+|n|)^{2 alpha} |f_n|^2; the homogeneous
// variant drops n = 0.
inline double sobolev_norm_sq(const FourierState& s, SobolevIndex idx) {
  double acc = 0.0;
  for (int n = -s.n_max; n <= s.n_max; ++n) {
    if (idx.homogeneous && n == 0) continue;
    acc += std::pow(1.0 + std::abs(n), 2.0 * idx.alpha) * std::norm(s.at(n));
  }
  return acc;
}

inline double sobolev_norm(const FourierState& s, SobolevIndex idx) {
  return std::sqrt(sobolev_norm_sq(s, idx));
}

// sum_{|n| > mu} |u_hat_n|^2
inline double tail_mass(const FourierState& s, int mu) {
  if (mu < 0) throw std::domain_error("tail_mass: mu must be >= 0");
  double acc = 0.0;
  for (int n = -s.n_max; n <= s.n_max; ++n)
    if (std::abs(n) > mu) acc += std::norm(s.at(n));
  return acc;
}

enum class ProjectPart { low, high };

// P_N (keep |n| <= N) / Q_N (keep |n| > N). P_N f + Q_N f = f exactly.
inline FourierState project(const FourierState& s, int N, ProjectPart part) {
  if (N < 0 || N > s.n_max)
    throw std::domain_error("project: N must lie in [0, n_max]");
  FourierState out = s;
  for (int n = -s.n_max; n <= s.n_max; ++n) {
    const bool low = std::abs(n) <= N;
    if ((part == ProjectPart::low) != low) out.at(n) = 0.0;
  }
  return out;
}

inline cplx inner_product(const FourierState& a, const FourierState& b) {
  if (a.n_max != b.n_max)
    throw std::invalid_argument("inner_product: band mismatch");
  cplx acc = 0.0;
  for (int i = 0; i < a.size(); ++i)
    acc += a.coeffs[static_cast<std::size_t>(i)] *
           std::conj(b.coeffs[static_cast<std::size_t>(i)]);
  return acc;
}

inline double l2_distance(const FourierState& a, const FourierState& b) {
  if (a.n_max != b.n_max)
    throw std::invalid_argument("l2_distance: band mismatch");
  double acc = 0.0;
  for (int i = 0; i < a.size(); ++i)
    acc += std::norm(a.coeffs[static_cast<std::size_t>(i)] -
                     b.coeffs[static_cast<std::size_t>(i)]);
  return std::sqrt(acc);
}

}  // namespace speclab
