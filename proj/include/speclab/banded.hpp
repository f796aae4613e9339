#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "speclab/fourier_state.hpp"

namespace speclab {

// Complex banded operator acting on coefficient vectors indexed by modes
// n in [n_lo, n_hi], with entries only for |m - n| <= band. Diagonal-major
// storage: diag(d)[m - n_lo] holds entry (m, m - d) for d = m - n.
struct BandedMatrix {
  int n_lo = 0, n_hi = 0;
  int band = 0;
  std::vector<std::vector<cplx>> diags;  // [d + band][m - n_lo]

  BandedMatrix() = default;
  BandedMatrix(int lo, int hi, int bw)
      : n_lo(lo), n_hi(hi), band(bw),
        diags(2 * static_cast<std::size_t>(bw) + 1,
              std::vector<cplx>(static_cast<std::size_t>(hi - lo) + 1,
                                cplx(0.0))) {
    if (hi < lo) throw std::invalid_argument("BandedMatrix: empty window");
  }

  int width() const { return n_hi - n_lo + 1; }

  cplx& entry(int m, int n) {
    return diags[static_cast<std::size_t>(m - n + band)]
                [static_cast<std::size_t>(m - n_lo)];
  }
  cplx entry(int m, int n) const {
    const int d = m - n;
    if (d < -band || d > band || m < n_lo || m > n_hi || n < n_lo || n > n_hi)
      return 0.0;
    return diags[static_cast<std::size_t>(d + band)]
                [static_cast<std::size_t>(m - n_lo)];
  }

  // y = A x over the window (x, y sized width()).
  void apply(const std::vector<cplx>& x, std::vector<cplx>& y) const {
    const int w = width();
    y.assign(static_cast<std::size_t>(w), cplx(0.0));
    for (int d = -band; d <= band; ++d) {
      const auto& diag = diags[static_cast<std::size_t>(d + band)];
      // entry (m, m-d): needs m-d in window: max(n_lo, n_lo+d) <= m <= ...
      const int m0 = std::max(0, d);
      const int m1 = std::min(w - 1, w - 1 + d);
      for (int i = m0; i <= m1; ++i)
        y[static_cast<std::size_t>(i)] +=
            diag[static_cast<std::size_t>(i)] *
            x[static_cast<std::size_t>(i - d)];
    }
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& diag : diags)
      for (const auto& v : diag) m = std::max(m, std::abs(v));
    return m;
  }

  // Crude upper bound on the operator norm: band l1 of max entries.
  double norm_bound() const {
    double s = 0.0;
    for (const auto& diag : diags) {
      double m = 0.0;
      for (const auto& v : diag) m = std::max(m, std::abs(v));
      s += m;
    }
    return s;
  }

  BandedMatrix& operator+=(const BandedMatrix& o) {
    for (std::size_t d = 0; d < diags.size(); ++d)
      for (std::size_t i = 0; i < diags[d].size(); ++i)
        diags[d][i] += o.diags[d][i];
    return *this;
  }
  BandedMatrix& operator*=(cplx s) {
    for (auto& diag : diags)
      for (auto& v : diag) v *= s;
    return *this;
  }
};

// y = exp(scale * A) x via Taylor with scaling-and-squaring: substeps keep
// ||scale A|| <= theta so the series converges in a handful of terms; the
// truncation target is 1e-14 relative. For skew-Hermitian scale*A this is
// unitary up to that truncation.
inline void expm_apply(const BandedMatrix& A, cplx scale,
                       std::vector<cplx>& x, double theta = 0.5) {
  const double nb = std::abs(scale) * A.norm_bound();
  int squarings = 0;
  while (nb / std::pow(2.0, squarings) > theta && squarings < 60) ++squarings;
  const cplx sub_scale = scale / std::pow(2.0, squarings);
  const std::size_t w = x.size();
  thread_local std::vector<cplx> term, tmp;
  term.assign(w, cplx(0.0));
  tmp.assign(w, cplx(0.0));
  const int reps = 1 << squarings;
  for (int r = 0; r < reps; ++r) {
    term = x;
    double x_norm = 0.0;
    for (const auto& v : x) x_norm += std::norm(v);
    x_norm = std::sqrt(x_norm);
    for (int j = 1; j <= 64; ++j) {
      A.apply(term, tmp);
      const cplx c = sub_scale / static_cast<double>(j);
      double t_norm = 0.0;
      for (std::size_t i = 0; i < w; ++i) {
        term[i] = c * tmp[i];
        x[i] += term[i];
        t_norm += std::norm(term[i]);
      }
      if (std::sqrt(t_norm) <= 1e-16 * std::max(x_norm, 1e-300)) break;
    }
  }
}

}  // namespace speclab
