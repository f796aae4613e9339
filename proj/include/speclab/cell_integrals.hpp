#pragma once

#include <cmath>
#include <complex>

namespace speclab {

using cplx = std::complex<double>;

// Exact antiderivatives for the two integrand families the whole code base
// reduces to, written in phi-function form so that small phases never hit
// catastrophic cancellation.
//
//   phi1(z) = (e^z - 1)/z           = sum_{j>=0} z^j/(j+1)!
//   phi2(z) = int_0^1 s e^{zs} ds   = sum_{j>=0} z^j/(j! (j+2))
//
// Series branch for |z| <= 0.5 (16 terms reach ~1e-19), closed form
// otherwise.

inline cplx phi1(cplx z) {
  if (std::abs(z) <= 0.5) {
    cplx sum = 0.0, term = 1.0;
    for (int j = 0; j < 16; ++j) {
      sum += term / static_cast<double>(j + 1);
      term *= z / static_cast<double>(j + 1);
    }
    return sum;
  }
  return (std::exp(z) - 1.0) / z;
}

inline cplx phi2(cplx z) {
  if (std::abs(z) <= 0.5) {
    cplx sum = 0.0, term = 1.0;
    double fact = 1.0;
    for (int j = 0; j < 16; ++j) {
      sum += term / (fact * static_cast<double>(j + 2));
      term *= z;
      fact *= static_cast<double>(j + 1);
    }
    return sum;
  }
  return (std::exp(z) * (z - 1.0) + 1.0) / (z * z);
}

// Exact integral of a linear profile against a linear-phase oscillation:
//
//   int_{t0}^{t1} (a + b (t - t_ref)) e^{i omega t} dt
//
// with a, b the value/slope of the profile relative to t_ref.
// Substituting s = t - t0 and d = t1 - t0:
//
//   e^{i omega t0} [ A d phi1(i omega d) + b d^2 phi2(i omega d) ],
//   A = a + b (t0 - t_ref).
inline cplx linear_phase_integral(cplx a, cplx b, double t_ref, double omega,
                                  double t0, double t1) {
  const double d = t1 - t0;
  if (d == 0.0) return 0.0;
  const cplx A = a + b * (t0 - t_ref);
  const cplx z(0.0, omega * d);
  const cplx front = std::polar(1.0, omega * t0);
  return front * (A * d * phi1(z) + b * d * d * phi2(z));
}

// Variant taking the endpoint phases precomputed (used by the banded
// propagator, where e^{i omega t0} and e^{i omega (t1-t0)} come from
// per-diagonal geometric recurrences instead of std::polar calls).
inline cplx linear_phase_integral_prepped(cplx a, cplx b, double t_ref,
                                          double omega, double t0, double t1,
                                          cplx phase_t0, cplx phase_step) {
  const double d = t1 - t0;
  if (d == 0.0) return 0.0;
  const cplx A = a + b * (t0 - t_ref);
  const cplx z(0.0, omega * d);
  cplx p1, p2;
  if (std::abs(omega * d) <= 0.5) {
    p1 = phi1(z);
    p2 = phi2(z);
  } else {
    p1 = (phase_step - 1.0) / z;
    p2 = (phase_step * (z - 1.0) + 1.0) / (z * z);
  }
  return phase_t0 * (A * d * p1 + b * d * d * p2);
}

// Exact integral of a linear profile against a power-law oscillation:
//
//   int_{t0}^{t1} (a + b (t - t_ref)) (1 + t)^{i beta} dt
//
// which shows up on the logarithmic characteristics of the 1/(1+t)
// transport. With w = 1 + t the integrand is (A' + b w) w^{i beta},
// A' = a - b (1 + t_ref), and
//
//   int w^{p} dw = w1^{p+1} (e^{(p+1) u} - 1)/(p+1),  u = log(w2/w1),
//
// evaluated as w1^{p+1} * u * phi1((p+1) u) to stay stable when the cell
// is narrow relative to w.
inline cplx power_phase_integral(cplx a, cplx b, double t_ref, double beta,
                                 double t0, double t1) {
  if (t1 == t0) return 0.0;
  const double w1 = 1.0 + t0;
  const double w2 = 1.0 + t1;
  const double u = std::log(w2 / w1);
  const cplx Ap = a - b * (1.0 + t_ref);
  const cplx ib(0.0, beta);

  auto power_int = [&](cplx p) {
    // int_{w1}^{w2} w^p dw, stable form
    const cplx q = p + 1.0;
    const cplx w1q = std::pow(cplx(w1, 0.0), q);
    return w1q * u * phi1(q * u);
  };

  return Ap * power_int(ib) + b * power_int(ib + 1.0);
}

}  // namespace speclab
