#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <vector>

namespace speclab {

namespace detail {

template <typename F>
double adaptive_simpson_rec(const F& f, double a, double b, double fa,
                            double fm, double fb, double whole, double tol,
                            int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol,
                              depth - 1) +
         adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol,
                              depth - 1);
}

// Variant that records the accepted leaves (in left-to-right order), so
// prefix values can later be answered from leaf-local work only.
struct QuadLeaf {
  double a, b, integral;
};

template <typename F>
double adaptive_simpson_leaves(const F& f, double a, double b, double fa,
                               double fm, double fb, double whole, double tol,
                               int depth, std::vector<QuadLeaf>& leaves) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    const double value = left + right + delta / 15.0;
    leaves.push_back({a, b, value});
    return value;
  }
  return adaptive_simpson_leaves(f, a, m, fa, flm, fm, left, 0.5 * tol,
                                 depth - 1, leaves) +
         adaptive_simpson_leaves(f, m, b, fm, frm, fb, right, 0.5 * tol,
                                 depth - 1, leaves);
}

}  // namespace detail

// Adaptive Simpson on [a,b]. `tol` is treated as an absolute tolerance for
// the interval; callers wanting relative accuracy scale it by an estimate of
// the integral's magnitude.
template <typename F>
double adaptive_simpson(const F& f, double a, double b, double tol,
                        int max_depth = 40) {
  if (b <= a) return 0.0;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol,
                                      max_depth);
}

// Relative-tolerance driver with breakpoint splitting: integrates each
// subinterval separately (integrands here are smooth between potential
// breakpoints but can have kinks at them).
template <typename F>
double integrate_piecewise(const F& f, const std::vector<double>& breaks,
                           double rel_tol) {
  if (breaks.size() < 2) return 0.0;
  // First pass with a loose absolute tolerance to learn the scale.
  double scale = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i)
    scale += std::abs(adaptive_simpson(f, breaks[i], breaks[i + 1], 1e-6));
  const double tol =
      std::max(rel_tol * std::max(scale, 1e-300), 1e-300) /
      static_cast<double>(breaks.size() - 1);
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i)
    acc += adaptive_simpson(f, breaks[i], breaks[i + 1], tol);
  return acc;
}

// Complex-valued adaptive quadrature (oracle use: cross-checks the exact
// oscillatory cell integrals).
template <typename F>
std::complex<double> adaptive_simpson_complex(const F& f, double a, double b,
                                              double tol) {
  const auto re = [&](double t) { return f(t).real(); };
  const auto im = [&](double t) { return f(t).imag(); };
  return {adaptive_simpson(re, a, b, tol), adaptive_simpson(im, a, b, tol)};
}

}  // namespace speclab
