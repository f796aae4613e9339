#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "speclab/banded.hpp"
#include "speclab/potential.hpp"
#include "speclab/prng.hpp"
#include "speclab/quadrature.hpp"
#include "speclab/symbol.hpp"

namespace speclab {

// ---------------------------------------------------------------------------
// Time grids

// Sorted breakpoints t_0 < ... < t_G spanning the estimation window. Suprema
// over subintervals are taken over grid endpoints, so every reported value
// is a certified lower bound of the continuum supremum.
struct IntervalGrid {
  std::vector<double> t;

  std::size_t points() const { return t.size(); }
  std::size_t cells() const { return t.empty() ? 0 : t.size() - 1; }

  void validate() const {
    if (t.size() < 2) throw std::invalid_argument("IntervalGrid: need >= 2 points");
    if (t.size() > 4097)
      throw std::invalid_argument("IntervalGrid: more than 4096 cells");
    for (std::size_t i = 1; i < t.size(); ++i)
      if (!(t[i] > t[i - 1]))
        throw std::invalid_argument("IntervalGrid: not strictly increasing");
  }
};

// Uniform grid on [a,b] refined with every potential-profile breakpoint.
inline IntervalGrid make_interval_grid(const PotentialModel& pot, double a,
                                       double b, int cells) {
  IntervalGrid g;
  for (int i = 0; i <= cells; ++i)
    g.t.push_back(a + (b - a) * i / cells);
  for (double x : pot.grid)
    if (x > a && x < b) g.t.push_back(x);
  std::sort(g.t.begin(), g.t.end());
  g.t.erase(std::unique(g.t.begin(), g.t.end()), g.t.end());
  g.validate();
  return g;
}

// ---------------------------------------------------------------------------
// upsilon_1 and the D_1 / D_2 functionals

// upsilon_1(t) = sup_x |V(x,t)| evaluated on an x-grid (default 512 points;
// a lower bound of the true sup, documented with every report).
inline double upsilon1(const PotentialModel& pot, double t, int nx = 512) {
  return sup_norm_on_grid(pot, t, nx);
}

// Cached evaluator: within one profile cell V(x,t) = A(x) + B(x)(t - t_c),
// so the 512-point sup costs O(nx) after a one-time per-cell setup.
class SupNormEvaluator {
 public:
  explicit SupNormEvaluator(const PotentialModel& pot, int nx = 512)
      : pot_(pot), nx_(nx), cache_(static_cast<std::size_t>(pot.n_cells())) {}

  double operator()(double t) const {
    if (t < pot_.t_begin() || t > pot_.t_end()) return 0.0;
    const int c = pot_.cell_of(t);
    const CellTable& tab = table(c);
    const double dt = t - pot_.grid[static_cast<std::size_t>(c)];
    double best = 0.0;
    for (int j = 0; j < nx_; ++j) {
      const cplx v = tab.A[static_cast<std::size_t>(j)] +
                     tab.B[static_cast<std::size_t>(j)] * dt;
      best = std::max(best, std::abs(v));
    }
    return best;
  }

 private:
  struct CellTable {
    std::vector<cplx> A, B;
  };
  const CellTable& table(int c) const {
    auto& slot = cache_[static_cast<std::size_t>(c)];
    if (!slot) {
      CellTable tab;
      tab.A.assign(static_cast<std::size_t>(nx_), cplx(0.0));
      tab.B.assign(static_cast<std::size_t>(nx_), cplx(0.0));
      for (int l = -pot_.l_max; l <= pot_.l_max; ++l) {
        cplx a, b;
        pot_.cell_coeffs(l, c, a, b);
        if (a == cplx(0.0) && b == cplx(0.0)) continue;
        for (int j = 0; j < nx_; ++j) {
          const cplx e = std::polar(1.0, l * 2.0 * M_PI * j / nx_);
          tab.A[static_cast<std::size_t>(j)] += a * e;
          tab.B[static_cast<std::size_t>(j)] += b * e;
        }
      }
      slot = std::move(tab);
    }
    return *slot;
  }

  const PotentialModel& pot_;
  int nx_;
  mutable std::vector<std::optional<CellTable>> cache_;
};

namespace detail {

inline std::vector<double> breaks_in(const PotentialModel& pot, double T) {
  std::vector<double> breaks{0.0, T};
  for (double b : pot.grid)
    if (b > 0.0 && b < T) breaks.push_back(b);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  return breaks;
}

// Prefix integral helper over a piecewise-smooth scalar function: U(tau) =
// int_0^tau f. The adaptive refinement runs once and records its leaves, so
// a query only refines inside the single leaf containing tau.
class PrefixIntegral {
 public:
  PrefixIntegral(std::function<double(double)> f, std::vector<double> breaks,
                 double tol)
      : f_(std::move(f)), tol_(tol) {
    for (std::size_t i = 1; i < breaks.size(); ++i) {
      const double a = breaks[i - 1], b = breaks[i];
      if (!(b > a)) continue;
      const double fa = f_(a), fb = f_(b), fm = f_(0.5 * (a + b));
      const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
      quad_detail_adaptive(a, b, fa, fm, fb, whole);
    }
    prefix_.assign(leaves_.size() + 1, 0.0);
    for (std::size_t i = 0; i < leaves_.size(); ++i)
      prefix_[i + 1] = prefix_[i] + leaves_[i].integral;
  }

  double operator()(double tau) const {
    if (leaves_.empty() || tau <= leaves_.front().a) return 0.0;
    if (tau >= leaves_.back().b) return prefix_.back();
    std::size_t lo = 0, hi = leaves_.size() - 1;
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (leaves_[mid].b < tau)
        lo = mid + 1;
      else
        hi = mid;
    }
    return prefix_[lo] + adaptive_simpson(f_, leaves_[lo].a, tau, tol_, 20);
  }

 private:
  void quad_detail_adaptive(double a, double b, double fa, double fm,
                            double fb, double whole) {
    adaptive_simpson_leaves(f_, a, b, fa, fm, fb, whole, tol_, 40, leaves_);
  }

  std::function<double(double)> f_;
  double tol_;
  std::vector<QuadLeaf> leaves_;
  std::vector<double> prefix_;
};

}  // namespace detail

// D_1(T) = int_0^T u1^2(tau) (1 + int_0^tau u1) dtau
inline double D1(const std::function<double(double)>& u1, double T,
                 const std::vector<double>& breaks, double rel_tol = 1e-8) {
  detail::PrefixIntegral U(u1, breaks, 1e-10 * std::max(T, 1.0));
  const auto f = [&](double tau) {
    const double v = u1(tau);
    return v * v * (1.0 + U(tau));
  };
  return integrate_piecewise(f, breaks, rel_tol);
}

inline double D1(const PotentialModel& pot, double T, double rel_tol = 1e-8) {
  SupNormEvaluator u1(pot);
  return D1([&](double t) { return u1(t); }, T, detail::breaks_in(pot, T),
            rel_tol);
}

// D_2(T) = (int_0^T u1^2 w) (int_0^T u1^2(tau) int_0^tau w^{-1} dtau)
inline double D2(const std::function<double(double)>& u1,
                 const std::function<double(double)>& w, double T,
                 const std::vector<double>& breaks, double rel_tol = 1e-8) {
  const auto winv = [&](double t) {
    const double v = w(t);
    if (!(v > 0.0)) throw std::domain_error("D2: weight must be positive");
    return 1.0 / v;
  };
  detail::PrefixIntegral Winv(winv, breaks, 1e-10 * std::max(T, 1.0));
  const auto f1 = [&](double tau) {
    const double v = u1(tau);
    return v * v * w(tau);
  };
  const auto f2 = [&](double tau) {
    const double v = u1(tau);
    return v * v * Winv(tau);
  };
  return integrate_piecewise(f1, breaks, rel_tol) *
         integrate_piecewise(f2, breaks, rel_tol);
}

inline double D2(const PotentialModel& pot, double T,
                 const std::function<double(double)>& w,
                 double rel_tol = 1e-8) {
  SupNormEvaluator u1(pot);
  return D2([&](double t) { return u1(t); }, w, T, detail::breaks_in(pot, T),
            rel_tol);
}

// ---------------------------------------------------------------------------
// Planar diameter (convex hull + rotating calipers)

namespace detail {

struct P2 {
  double x, y;
};
inline double cross(const P2& o, const P2& a, const P2& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}
inline double dist_sq(const P2& a, const P2& b) {
  const double dx = a.x - b.x, dy = a.y - b.y;
  return dx * dx + dy * dy;
}

inline std::vector<P2> convex_hull(std::vector<P2> pts) {
  std::sort(pts.begin(), pts.end(), [](const P2& a, const P2& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const P2& a, const P2& b) {
                          return a.x == b.x && a.y == b.y;
                        }),
            pts.end());
  const std::size_t n = pts.size();
  if (n <= 2) return pts;
  std::vector<P2> h(2 * n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (k >= 2 && cross(h[k - 2], h[k - 1], pts[i]) <= 0.0) --k;
    h[k++] = pts[i];
  }
  const std::size_t lower = k + 1;
  for (std::size_t i = n - 1; i-- > 0;) {
    while (k >= lower && cross(h[k - 2], h[k - 1], pts[i]) <= 0.0) --k;
    h[k++] = pts[i];
  }
  h.resize(k - 1);
  return h;
}

inline double hull_diameter(const std::vector<P2>& pts) {
  std::vector<P2> h = convex_hull(pts);
  const std::size_t m = h.size();
  if (m <= 1) return 0.0;
  if (m == 2) return std::sqrt(dist_sq(h[0], h[1]));
  if (m <= 64) {
    double best = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = i + 1; j < m; ++j)
        best = std::max(best, dist_sq(h[i], h[j]));
    return std::sqrt(best);
  }
  double best = 0.0;
  std::size_t j = 1;
  std::size_t guard = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t ni = (i + 1) % m;
    while (guard++ < 8 * m) {
      const std::size_t nj = (j + 1) % m;
      const double a1 = std::abs(cross(h[i], h[ni], h[j]));
      const double a2 = std::abs(cross(h[i], h[ni], h[nj]));
      if (a2 > a1)
        j = nj;
      else
        break;
    }
    best = std::max({best, dist_sq(h[i], h[j]), dist_sq(h[ni], h[j])});
  }
  return std::sqrt(best);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Carleson maximal function and Hilbert-Schmidt off-diagonal norms

// q_l(k) over grid subintervals: sup_{[t_i,t_j]} |prefix(t_j) - prefix(t_i)|
// where prefix(t) = int_0^t Vhat_l(tau) e^{ik tau} dtau (exact cells). The
// sup over endpoint pairs is the diameter of the planar prefix curve.
inline double carleson_q(const PotentialModel& pot, int l, double k,
                         const IntervalGrid& grid) {
  grid.validate();
  std::vector<detail::P2> pts;
  pts.reserve(grid.points());
  cplx p(0.0, 0.0);
  pts.push_back({0.0, 0.0});
  for (std::size_t i = 0; i + 1 < grid.t.size(); ++i) {
    p += oscillatory_integral(pot, l, k, grid.t[i], grid.t[i + 1]);
    pts.push_back({p.real(), p.imag()});
  }
  return detail::hull_diameter(pts);
}

namespace detail {

struct OffdiagEntry {
  int m, n;      // |m| <= N < |n|
  double omega;  // k (lambda_m - lambda_n)
};

inline std::vector<OffdiagEntry> offdiag_entries(const SymbolSpec& spec,
                                                 const PotentialModel& pot,
                                                 int N, double k) {
  if (spec.time_dependent())
    throw std::invalid_argument(
        "offdiag entries: static symbol required (phases must be linear)");
  std::vector<OffdiagEntry> out;
  for (int m = -N; m <= N; ++m)
    for (int l = -pot.l_max; l <= pot.l_max; ++l) {
      const int n = m - l;
      if (std::abs(n) <= N) continue;
      const double omega = k * (symbol_multiplier(spec, m, 0.0) -
                                symbol_multiplier(spec, n, 0.0));
      out.push_back({m, n, omega});
    }
  return out;
}

}  // namespace detail

// || P_N Vtilde_S Q_N ||_{S_2} with every entry an exact cell integral; the
// band extends to |n| <= N + l_max, which captures every nonzero entry.
inline double hs_offdiag(const PotentialModel& pot, const SymbolSpec& spec,
                         int N, double s0, double s1, double k) {
  double acc = 0.0;
  for (const auto& e : detail::offdiag_entries(spec, pot, N, k))
    acc += std::norm(oscillatory_integral(pot, e.m - e.n, e.omega, s0, s1));
  return std::sqrt(acc);
}

struct SupHsBounds {
  double lower = 0.0;  // exact joint sup over a coarsened O(G^2) scan
  double upper = 0.0;  // sqrt(sum of per-entry prefix-curve diameters^2)
};

inline SupHsBounds sup_hs_offdiag(const PotentialModel& pot,
                                  const SymbolSpec& spec, int N, double k,
                                  const IntervalGrid& grid,
                                  std::size_t coarse_cap = 257) {
  grid.validate();
  const auto entries = detail::offdiag_entries(spec, pot, N, k);
  const std::size_t G = grid.points();
  std::vector<std::vector<cplx>> prefix(entries.size(),
                                        std::vector<cplx>(G, cplx(0.0)));
  for (std::size_t e = 0; e < entries.size(); ++e) {
    cplx p(0.0);
    for (std::size_t i = 0; i + 1 < G; ++i) {
      p += oscillatory_integral(pot, entries[e].m - entries[e].n,
                                entries[e].omega, grid.t[i], grid.t[i + 1]);
      prefix[e][i + 1] = p;
    }
  }

  SupHsBounds out;
  double upper_sq = 0.0;
  for (std::size_t e = 0; e < entries.size(); ++e) {
    std::vector<detail::P2> pts(G);
    for (std::size_t i = 0; i < G; ++i)
      pts[i] = {prefix[e][i].real(), prefix[e][i].imag()};
    const double d = detail::hull_diameter(pts);
    upper_sq += d * d;
  }
  out.upper = std::sqrt(upper_sq);

  // coarse joint scan (always includes the first and last grid point)
  std::vector<std::size_t> idx;
  const std::size_t stride = std::max<std::size_t>(1, (G - 1) / (coarse_cap - 1));
  for (std::size_t i = 0; i < G; i += stride) idx.push_back(i);
  if (idx.back() != G - 1) idx.push_back(G - 1);
  double best = 0.0;
  for (std::size_t a = 0; a < idx.size(); ++a)
    for (std::size_t b = a + 1; b < idx.size(); ++b) {
      double hs2 = 0.0;
      for (std::size_t e = 0; e < entries.size(); ++e)
        hs2 += std::norm(prefix[e][idx[b]] - prefix[e][idx[a]]);
      best = std::max(best, hs2);
    }
  out.lower = std::sqrt(best);
  return out;
}

// ---------------------------------------------------------------------------
// Weighted operator norms (power iteration)

class PowerIterationError : public std::runtime_error {
 public:
  PowerIterationError(const std::string& msg, double last)
      : std::runtime_error(msg), last_iterate(last) {}
  double last_iterate;
};

inline std::vector<double> sobolev_weights(int n_max, double alpha) {
  std::vector<double> w(2 * static_cast<std::size_t>(n_max) + 1);
  for (int n = -n_max; n <= n_max; ++n)
    w[static_cast<std::size_t>(n + n_max)] =
        std::pow(1.0 + std::abs(n), alpha);
  return w;
}

// Largest singular value of D M D^{-1}, D = diag(weights); power iteration
// on the Gram operator, relative tolerance on the value.
inline double weighted_opnorm(const Eigen::MatrixXcd& M,
                              const std::vector<double>& weights,
                              double rel_tol = 1e-10, int max_iter = 1000) {
  const Eigen::Index dim = M.rows();
  if (M.cols() != dim || dim == 0 ||
      weights.size() != static_cast<std::size_t>(dim))
    throw std::invalid_argument("weighted_opnorm: shape mismatch");
  Eigen::MatrixXcd B = M;
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < dim; ++j)
      B(i, j) *= weights[static_cast<std::size_t>(i)] /
                 weights[static_cast<std::size_t>(j)];

  Eigen::VectorXcd v(dim);
  CounterRng rng(0x5EEDu, 0x0Du);
  for (Eigen::Index i = 0; i < dim; ++i)
    v(i) = cplx(rng.symmetric(), rng.symmetric());
  v.normalize();
  double value = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    Eigen::VectorXcd w = B.adjoint() * (B * v);
    const double lambda = w.norm();
    if (lambda == 0.0) return 0.0;
    v = w / lambda;
    const double sigma = std::sqrt(lambda);
    if (it >= 2 && std::abs(sigma - value) <= rel_tol * sigma) return sigma;
    value = sigma;
  }
  throw PowerIterationError("weighted_opnorm: power iteration did not converge",
                            value);
}

inline double opnorm(const Eigen::MatrixXcd& M, double rel_tol = 1e-10,
                     int max_iter = 1000) {
  return weighted_opnorm(
      M, std::vector<double>(static_cast<std::size_t>(M.rows()), 1.0), rel_tol,
      max_iter);
}

// Power iteration over a banded operator (for prefix-matrix curves).
inline double banded_opnorm(const BandedMatrix& A, double rel_tol = 1e-10,
                            int max_iter = 1000) {
  const std::size_t dim = static_cast<std::size_t>(A.width());
  std::vector<cplx> v(dim), fw(dim), bw(dim);
  CounterRng rng(0x5EEDu, 0x0Du);
  double nrm = 0.0;
  for (auto& c : v) {
    c = cplx(rng.symmetric(), rng.symmetric());
    nrm += std::norm(c);
  }
  nrm = std::sqrt(nrm);
  for (auto& c : v) c /= nrm;

  auto apply_adjoint = [&](const std::vector<cplx>& x, std::vector<cplx>& y) {
    y.assign(dim, cplx(0.0));
    const int w = A.width();
    for (int d = -A.band; d <= A.band; ++d) {
      const auto& diag = A.diags[static_cast<std::size_t>(d + A.band)];
      const int m0 = std::max(0, d), m1 = std::min(w - 1, w - 1 + d);
      for (int i = m0; i <= m1; ++i)
        y[static_cast<std::size_t>(i - d)] +=
            std::conj(diag[static_cast<std::size_t>(i)]) *
            x[static_cast<std::size_t>(i)];
    }
  };

  double value = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    A.apply(v, fw);
    apply_adjoint(fw, bw);
    double lambda = 0.0;
    for (const auto& c : bw) lambda += std::norm(c);
    lambda = std::sqrt(lambda);
    if (lambda == 0.0) return 0.0;
    for (std::size_t i = 0; i < dim; ++i) v[i] = bw[i] / lambda;
    const double sigma = std::sqrt(lambda);
    if (it >= 2 && std::abs(sigma - value) <= rel_tol * sigma) return sigma;
    value = sigma;
  }
  throw PowerIterationError("banded_opnorm: power iteration did not converge",
                            value);
}

// ---------------------------------------------------------------------------
// Commutator increments

// || [Lambda^mu, Vtilde_{[t_i,t_j]}] Lambda^{-mu} ||_{S_2} over the band,
// Lambda = diag((2+|n|)^mu); entry (m,n) of the commutator term carries the
// weight ((2+|m|)^mu - (2+|n|)^mu)/(2+|n|)^mu.
inline double commutator_increment(const PotentialModel& pot,
                                   const SymbolSpec& spec, double mu, double k,
                                   double ti, double tj, int n_max) {
  if (!(mu > 0.5 && mu <= 1.0))
    throw std::domain_error("commutator_increment: mu must lie in (1/2, 1]");
  if (spec.time_dependent())
    throw std::invalid_argument("commutator_increment: static symbol required");
  double acc = 0.0;
  for (int m = -n_max; m <= n_max; ++m)
    for (int l = -pot.l_max; l <= pot.l_max; ++l) {
      const int n = m - l;
      if (l == 0 || std::abs(n) > n_max) continue;
      const double omega = k * (symbol_multiplier(spec, m, 0.0) -
                                symbol_multiplier(spec, n, 0.0));
      const double wm = std::pow(2.0 + std::abs(m), mu);
      const double wn = std::pow(2.0 + std::abs(n), mu);
      const double weight = (wm - wn) / wn;
      acc += std::norm(weight * oscillatory_integral(pot, l, omega, ti, tj));
    }
  return std::sqrt(acc);
}

// ---------------------------------------------------------------------------
// p-variation norms

// Curve increments d(i,j) on grid index pairs; d depends only on the curve
// between t_i and t_j (prefix-difference construction).
struct IncrementCurve {
  std::size_t n_points = 0;  // grid points, indices 0 .. n_points-1
  std::function<double(std::size_t, std::size_t)> d;
  std::string kind;
};

inline IncrementCurve scalar_curve(std::vector<double> samples,
                                   std::string kind = "scalar") {
  IncrementCurve c;
  c.n_points = samples.size();
  c.kind = std::move(kind);
  c.d = [s = std::move(samples)](std::size_t i, std::size_t j) {
    return std::abs(s[j] - s[i]);
  };
  return c;
}

inline IncrementCurve prefix_curve(std::vector<cplx> prefix,
                                   std::string kind = "scalar-prefix") {
  IncrementCurve c;
  c.n_points = prefix.size();
  c.kind = std::move(kind);
  c.d = [p = std::move(prefix)](std::size_t i, std::size_t j) {
    return std::abs(p[j] - p[i]);
  };
  return c;
}

struct VariationResult {
  double value = 0.0;
  std::vector<std::size_t> partition;  // argmax chain of grid indices
};

// sup over partitions with grid breakpoints of (sum d(t_j, t_{j+1})^beta)^{1/beta},
// by interval dynamic programming best(j) = max_{i<j} best(i) + d(i,j)^beta.
inline VariationResult variation_norm(const IncrementCurve& curve,
                                      double beta) {
  if (!(beta >= 1.0 && beta <= 2.0))
    throw std::domain_error("variation_norm: beta must lie in [1,2]");
  const std::size_t G = curve.n_points;
  if (G < 2) return {0.0, {}};
  if (G > 4097)
    throw std::invalid_argument("variation_norm: grid larger than 4096 cells");
  std::vector<double> best(G, 0.0);
  std::vector<std::size_t> from(G, 0);
  for (std::size_t j = 1; j < G; ++j) {
    double bj = -1.0;
    std::size_t arg = 0;
    for (std::size_t i = 0; i < j; ++i) {
      const double cand = best[i] + std::pow(curve.d(i, j), beta);
      if (cand > bj) {
        bj = cand;
        arg = i;
      }
    }
    best[j] = bj;
    from[j] = arg;
  }
  VariationResult res;
  res.value = std::pow(best[G - 1], 1.0 / beta);
  std::size_t at = G - 1;
  while (true) {
    res.partition.push_back(at);
    if (at == 0) break;
    at = from[at];
  }
  std::reverse(res.partition.begin(), res.partition.end());
  return res;
}

// ---------------------------------------------------------------------------
// The V^2(l^{2,mu}) curve of integrated conjugated potentials

// Parameters of the complex-V growth machinery: p in (4/3,2), alpha in (0,1)
// with alpha p < 2(p-1); derived p' = p/(p-1), s0 = alpha p'/2, mu = 2/p'.
struct ComplexVParams {
  double p;
  double alpha;
  double p_prime;
  double s0;
  double mu;

  ComplexVParams(double p_in, double alpha_in) : p(p_in), alpha(alpha_in) {
    if (!(p > 4.0 / 3.0 && p < 2.0))
      throw std::domain_error("ComplexVParams: p must lie in (4/3, 2)");
    if (!(alpha > 0.0 && alpha < 1.0))
      throw std::domain_error("ComplexVParams: alpha must lie in (0,1)");
    if (!(alpha * p < 2.0 * (p - 1.0)))
      throw std::domain_error("ComplexVParams: need alpha p < 2(p-1)");
    p_prime = p / (p - 1.0);
    s0 = alpha * p_prime / 2.0;
    mu = 2.0 / p_prime;
  }
};

// d(i,j) = || Lambda^mu (int_{t_i}^{t_j} Vtilde) Lambda^{-mu} || with exact
// cell-integral entries; prefix matrices make d a pure prefix difference.
inline IncrementCurve build_v2_curve(const PotentialModel& pot,
                                     const SymbolSpec& spec, double k,
                                     double mu, const IntervalGrid& grid,
                                     int n_max) {
  grid.validate();
  if (spec.time_dependent())
    throw std::invalid_argument("build_v2_curve: static symbol required");
  const std::size_t G = grid.points();
  auto prefixes = std::make_shared<std::vector<BandedMatrix>>();
  prefixes->reserve(G);
  prefixes->push_back(BandedMatrix(-n_max, n_max, pot.l_max));
  for (std::size_t i = 0; i + 1 < G; ++i) {
    BandedMatrix m = prefixes->back();
    BandedMatrix inc(-n_max, n_max, pot.l_max);
    for (int mm = -n_max; mm <= n_max; ++mm)
      for (int l = -pot.l_max; l <= pot.l_max; ++l) {
        const int nn = mm - l;
        if (std::abs(nn) > n_max) continue;
        const double omega = k * (symbol_multiplier(spec, mm, 0.0) -
                                  symbol_multiplier(spec, nn, 0.0));
        const double wfac = std::pow(2.0 + std::abs(mm), mu) /
                            std::pow(2.0 + std::abs(nn), mu);
        inc.entry(mm, nn) = wfac * oscillatory_integral(pot, l, omega,
                                                        grid.t[i],
                                                        grid.t[i + 1]);
      }
    m += inc;
    prefixes->push_back(std::move(m));
  }
  IncrementCurve c;
  c.n_points = G;
  c.kind = "opnorm-l2mu";
  c.d = [prefixes](std::size_t i, std::size_t j) {
    BandedMatrix diff = (*prefixes)[j];
    const BandedMatrix& pi = (*prefixes)[i];
    for (std::size_t d = 0; d < diff.diags.size(); ++d)
      for (std::size_t w = 0; w < diff.diags[d].size(); ++w)
        diff.diags[d][w] -= pi.diags[d][w];
    return banded_opnorm(diff);
  };
  return c;
}

}  // namespace speclab
