#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "speclab/fourier_state.hpp"

namespace speclab {

// Radix-2 FFT (power-of-two sizes), used to take Fourier coefficients of
// transport fields sampled on the x-grid.
inline void fft_pow2(std::vector<cplx>& a, bool inverse = false) {
  const std::size_t n = a.size();
  if (n == 0 || (n & (n - 1)) != 0)
    throw std::invalid_argument("fft_pow2: size must be a power of two");
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = 2.0 * M_PI / static_cast<double>(len) * (inverse ? 1 : -1);
    const cplx wl = std::polar(1.0, ang);
    for (std::size_t i = 0; i < n; i += len) {
      cplx w(1.0);
      for (std::size_t j = 0; j < len / 2; ++j) {
        const cplx u = a[i + j];
        const cplx v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wl;
      }
    }
  }
  if (inverse)
    for (auto& v : a) v /= static_cast<double>(n);
}

// Centered Fourier coefficients g_hat_n, n in [-M/2, M/2), of samples
// g(x_j), x_j = 2 pi j / M (convention g = sum g_hat_n e^{inx}).
inline std::vector<cplx> field_coefficients(std::vector<cplx> samples) {
  const std::size_t M = samples.size();
  fft_pow2(samples);  // forward: sum_j g_j e^{-2pi i jn/M}
  std::vector<cplx> out(M);
  const int half = static_cast<int>(M) / 2;
  for (int n = -half; n < half; ++n) {
    const std::size_t idx = static_cast<std::size_t>((n + static_cast<int>(M)) %
                                                     static_cast<int>(M));
    out[static_cast<std::size_t>(n + half)] =
        samples[idx] / static_cast<double>(M);
  }
  return out;
}

// H^{1/2}-type energies of a sampled field: sum (1+|n|)|g_n|^2, and the
// homogeneous variant sum |n| |g_n|^2.
struct FieldHHalf {
  double inhomogeneous_sq = 0.0;
  double homogeneous_sq = 0.0;
  double l2_sq = 0.0;
};

inline FieldHHalf field_h_half(const std::vector<cplx>& samples) {
  const auto coeffs = field_coefficients(samples);
  const int half = static_cast<int>(coeffs.size()) / 2;
  FieldHHalf out;
  for (int n = -half; n < half; ++n) {
    const double a2 = std::norm(coeffs[static_cast<std::size_t>(n + half)]);
    out.l2_sq += a2;
    out.homogeneous_sq += std::abs(n) * a2;
    out.inhomogeneous_sq += (1.0 + std::abs(n)) * a2;
  }
  return out;
}

}  // namespace speclab
