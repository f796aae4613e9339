#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "speclab/dft.hpp"
#include "speclab/prng.hpp"

namespace speclab {

// Appendix fuzz suites. Both assert the inequalities exactly at the level
// they are stated for vector identities / norm inequalities, on inputs
// constructed to satisfy the hypotheses.

namespace detail {

using cvec = std::vector<std::complex<double>>;

inline std::complex<double> cdot(const cvec& a, const cvec& b) {
  std::complex<double> acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * std::conj(b[i]);
  return acc;
}
inline double cnorm(const cvec& a) { return std::sqrt(std::abs(cdot(a, a))); }
inline void axpy(cvec& y, std::complex<double> s, const cvec& x) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += s * x[i];
}

inline cvec random_cvec(CounterRng& rng, std::size_t dim) {
  cvec v(dim);
  for (auto& c : v) c = {rng.symmetric(), rng.symmetric()};
  return v;
}

}  // namespace detail

// Orthogonal-decomposition inequality: if v = v1 + v2, v1 _|_ v2, a _|_ v2
// and ||v1||^2 + ||v2||^2 = ||a||^2, then ||v - a|| <= 2 sqrt(| ||a||^2 -
// <v1,a> |). Triples are built by orthogonalization and norm matching.
struct OtrivReport {
  long trials = 0;
  long violations = 0;
  double max_ratio = 0.0;  // max LHS/RHS over trials with RHS > 0
  double max_slack = 0.0;  // max LHS - RHS
};

inline OtrivReport fuzz_otriv(long trials, int dim_max, std::uint64_t seed,
                              double tol = 1e-9) {
  if (trials < 1) throw std::domain_error("fuzz_otriv: trials >= 1");
  if (dim_max < 2) throw std::domain_error("fuzz_otriv: dim_max >= 2");
  using detail::cvec;
  CounterRng rng(seed, 0x07121);
  OtrivReport rep;

  auto check = [&](const cvec& v1, const cvec& v2, const cvec& a) {
    cvec v = v1;
    detail::axpy(v, 1.0, v2);
    cvec diff = v;
    detail::axpy(diff, -1.0, a);
    const double lhs = detail::cnorm(diff);
    const double na2 = detail::cnorm(a) * detail::cnorm(a);
    const double rhs = 2.0 * std::sqrt(std::abs(na2 - detail::cdot(v1, a)));
    rep.trials++;
    if (lhs > rhs + tol) rep.violations++;
    if (rhs > tol) rep.max_ratio = std::max(rep.max_ratio, lhs / rhs);
    rep.max_slack = std::max(rep.max_slack, lhs - rhs);
  };

  // deterministic corner cases: equality (v1 = a, v2 = 0) and the
  // orthonormal pair (a = e1, v1 = 0, v2 = e2)
  {
    cvec a = {std::complex<double>(1.0), 0.0};
    check(a, cvec(2, 0.0), a);
    cvec v2 = {0.0, std::complex<double>(1.0)};
    check(cvec(2, 0.0), v2, a);
  }

  while (rep.trials < trials) {
    const std::size_t dim = 2 + rng.next_u64() % static_cast<std::uint64_t>(
                                                      dim_max - 1);
    cvec a = detail::random_cvec(rng, dim);
    const double na = detail::cnorm(a);
    if (na < 1e-6) continue;

    // v2 _|_ a with ||v2|| = r <= ||a||
    cvec v2 = detail::random_cvec(rng, dim);
    detail::axpy(v2, -detail::cdot(v2, a) / (na * na), a);
    const double nv2 = detail::cnorm(v2);
    if (nv2 < 1e-9) continue;
    const double r = rng.next_double() * na;
    for (auto& c : v2) c *= r / nv2;

    // v1 _|_ v2 with ||v1||^2 = ||a||^2 - r^2 (v1 need not be _|_ a)
    cvec v1 = detail::random_cvec(rng, dim);
    if (r > 0.0)
      detail::axpy(v1, -detail::cdot(v1, v2) / (r * r), v2);
    const double nv1 = detail::cnorm(v1);
    if (nv1 < 1e-9) continue;
    const double s = std::sqrt(std::max(0.0, na * na - r * r));
    for (auto& c : v1) c *= s / nv1;

    check(v1, v2, a);
  }
  return rep;
}

// Product bound in H^{1/2}(T): ||fg||_{H^{1/2}} <= C ( ||f||_inf ||g||_{H^{1/2}}
// + ||g||_inf ||f||_{H^{1/2}} ) on random trigonometric polynomials of degree
// <= 32; reports the largest observed ratio (the empirical C).
struct KreinReport {
  long trials = 0;
  double max_ratio = 0.0;
};

namespace detail {

struct TrigPoly {
  int degree = 0;
  std::vector<std::complex<double>> c;  // index n + degree

  std::complex<double> at(int n) const {
    if (std::abs(n) > degree) return 0.0;
    return c[static_cast<std::size_t>(n + degree)];
  }
  double h_half() const {
    double acc = 0.0;
    for (int n = -degree; n <= degree; ++n)
      acc += (1.0 + std::abs(n)) * std::norm(at(n));
    return std::sqrt(acc);
  }
  // sup over an nx-point grid, nx a power of two: one inverse FFT of the
  // zero-padded coefficients evaluates the polynomial on the whole grid.
  double sup_norm(int nx = 4096) const {
    std::vector<std::complex<double>> a(static_cast<std::size_t>(nx), 0.0);
    for (int n = -degree; n <= degree; ++n)
      a[static_cast<std::size_t>((n + nx) % nx)] = at(n);
    fft_pow2(a, true);
    double best = 0.0;
    for (const auto& v : a) best = std::max(best, std::abs(v));
    return best * nx;
  }
};

inline TrigPoly product(const TrigPoly& f, const TrigPoly& g) {
  TrigPoly h;
  h.degree = f.degree + g.degree;
  h.c.assign(2 * static_cast<std::size_t>(h.degree) + 1, 0.0);
  for (int m = -f.degree; m <= f.degree; ++m)
    for (int n = -g.degree; n <= g.degree; ++n)
      h.c[static_cast<std::size_t>(m + n + h.degree)] += f.at(m) * g.at(n);
  return h;
}

inline double krein_ratio(const TrigPoly& f, const TrigPoly& g) {
  const TrigPoly fg = product(f, g);
  const double denom =
      f.sup_norm() * g.h_half() + g.sup_norm() * f.h_half();
  if (denom == 0.0) return 0.0;
  return fg.h_half() / denom;
}

}  // namespace detail

inline KreinReport fuzz_krein(long trials, std::uint64_t seed,
                              int degree_max = 32) {
  CounterRng rng(seed, 0x5216);
  KreinReport rep;
  while (rep.trials < trials) {
    detail::TrigPoly f, g;
    f.degree = static_cast<int>(rng.next_u64() % (degree_max + 1));
    g.degree = static_cast<int>(rng.next_u64() % (degree_max + 1));
    f.c.resize(2 * static_cast<std::size_t>(f.degree) + 1);
    g.c.resize(2 * static_cast<std::size_t>(g.degree) + 1);
    for (int n = -f.degree; n <= f.degree; ++n)
      f.c[static_cast<std::size_t>(n + f.degree)] =
          std::complex<double>(rng.symmetric(), rng.symmetric()) /
          (1.0 + std::abs(n));
    for (int n = -g.degree; n <= g.degree; ++n)
      g.c[static_cast<std::size_t>(n + g.degree)] =
          std::complex<double>(rng.symmetric(), rng.symmetric()) /
          (1.0 + std::abs(n));
    rep.max_ratio = std::max(rep.max_ratio, detail::krein_ratio(f, g));
    rep.trials++;
  }
  return rep;
}

}  // namespace speclab
