#pragma once

#include <cmath>
#include <complex>
#include <numbers>

#include "thzrefl/error.hpp"

namespace thzrefl::specfun {

/// Crossover between the power series and the asymptotic expansion of I0.
inline constexpr double kI0SeriesLimit = 15.0;

/// e^{-x} I0(x) for x >= 0, safe for arbitrarily large x.
///
/// Below the crossover the power series sum (x/2)^{2m} / (m!)^2 is
/// accumulated term by term (all terms positive, so no cancellation) and
/// scaled by e^{-x}. Above it the Hankel expansion
///   1/sqrt(2 pi x) * sum_k [(2k-1)!!]^2 / (k! (8x)^k)
/// is used, truncated once terms drop below double resolution or start to
/// grow (the series is divergent; at x = 15 the smallest term is ~1e-13).
inline double bessel_i0_scaled(double x) {
  if (!(x >= 0.0)) {
    throw DomainError("bessel_i0_scaled: x must be non-negative");
  }
  if (x <= kI0SeriesLimit) {
    const double quarter_x2 = 0.25 * x * x;
    double term = 1.0;
    double sum = 1.0;
    for (int m = 1; m < 200; ++m) {
      term *= quarter_x2 / (static_cast<double>(m) * m);
      sum += term;
      if (term < 1e-17 * sum) break;
    }
    return std::exp(-x) * sum;
  }
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 64; ++k) {
    const double odd = 2.0 * k - 1.0;
    const double next = term * odd * odd / (8.0 * x * k);
    if (next >= term) break;  // asymptotic series started diverging
    term = next;
    sum += term;
    if (k >= 8 && term < 1e-17 * sum) break;
  }
  return sum / std::sqrt(2.0 * std::numbers::pi * x);
}

/// Square root on the decaying-wave branch: the principal root, negated when
/// its imaginary part is positive, so Im(result) <= 0.
inline std::complex<double> complex_sqrt_lossy(std::complex<double> z) {
  std::complex<double> s = std::sqrt(z);
  if (s.imag() > 0.0) s = -s;
  return s;
}

}  // namespace thzrefl::specfun
