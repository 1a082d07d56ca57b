#pragma once

#include <cmath>
#include <limits>

#include "robinlab/types.hpp"

// Scalar special functions used by the spectral and trace machinery.
// Gamma/digamma follow the Lanczos approximation (g = 7, 9 terms); the
// exponential integral E1 switches between the power series and a
// continued fraction at the usual x = 1 crossover.

namespace robinlab {

/// log |Gamma(x)| for real x not a non-positive integer.
template <typename Scalar>
Scalar log_gamma(Scalar x) {
  static const double lanczos[9] = {
      0.99999999999980993,      676.5203681218851,     -1259.1392167224028,
      771.32342877765313,      -176.61502916214059,    12.507343278686905,
      -0.13857109526572012,    9.9843695780195716e-6,  1.5056327351493116e-7};
  const Scalar pi = pi_v<Scalar>;
  if (x < Scalar(0.5)) {
    // reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x)
    using std::abs;
    using std::log;
    using std::sin;
    return log(pi / abs(sin(pi * x))) - log_gamma(Scalar(1) - x);
  }
  using std::log;
  Scalar z = x - Scalar(1);
  Scalar acc = Scalar(lanczos[0]);
  for (int i = 1; i < 9; ++i) acc += Scalar(lanczos[i]) / (z + Scalar(i));
  Scalar t = z + Scalar(7.5);
  return Scalar(0.91893853320467274178032973640562) /* log sqrt(2 pi) */
         + (z + Scalar(0.5)) * log(t) - t + log(acc);
}

/// Gamma(x) for real x; handles negative non-integer arguments by reflection.
template <typename Scalar>
Scalar gamma_fn(Scalar x) {
  using std::exp;
  using std::floor;
  using std::sin;
  const Scalar pi = pi_v<Scalar>;
  if (x <= Scalar(0) && x == floor(x))
    return std::numeric_limits<Scalar>::quiet_NaN();
  if (x < Scalar(0.5)) return pi / (sin(pi * x) * gamma_fn(Scalar(1) - x));
  return exp(log_gamma(x));
}

/// digamma(x) = Gamma'(x)/Gamma(x).
template <typename Scalar>
Scalar digamma(Scalar x) {
  using std::log;
  using std::tan;
  const Scalar pi = pi_v<Scalar>;
  if (x <= Scalar(0)) {
    if (x == std::floor(double(x)))
      return std::numeric_limits<Scalar>::quiet_NaN();
    return digamma(Scalar(1) - x) - pi / tan(pi * x);
  }
  Scalar acc = Scalar(0);
  while (x < Scalar(12)) {
    acc -= Scalar(1) / x;
    x += Scalar(1);
  }
  // asymptotic series in 1/x^2
  Scalar inv = Scalar(1) / x, inv2 = inv * inv;
  Scalar series = log(x) - inv / Scalar(2) -
                  inv2 * (Scalar(1) / Scalar(12) -
                          inv2 * (Scalar(1) / Scalar(120) -
                                  inv2 * (Scalar(1) / Scalar(252) -
                                          inv2 * (Scalar(1) / Scalar(240) -
                                                  inv2 / Scalar(132)))));
  return acc + series;
}

/// Exponential integral E1(x) = \int_x^inf e^{-t}/t dt, x > 0.
template <typename Scalar>
Scalar exp_integral_e1(Scalar x) {
  using std::exp;
  using std::log;
  if (!(x > Scalar(0))) return std::numeric_limits<Scalar>::infinity();
  if (x <= Scalar(1)) {
    // E1(x) = -gamma - log x + sum_{k>=1} (-1)^{k+1} x^k / (k k!)
    Scalar sum = Scalar(0), term = Scalar(1);
    for (int k = 1; k <= 40; ++k) {
      term *= -x / Scalar(k);
      Scalar add = -term / Scalar(k);
      sum += add;
      if (std::abs(double(add)) < 1e-18 * (std::abs(double(sum)) + 1e-30))
        break;
    }
    return -euler_gamma_v<Scalar> - log(x) + sum;
  }
  // modified Lentz continued fraction:
  // E1(x) = e^{-x} / (x + 1 - 1/(x + 3 - 4/(x + 5 - 9/(...))))
  const Scalar tiny = Scalar(1e-300);
  Scalar b = x + Scalar(1);
  Scalar c = Scalar(1) / tiny;
  Scalar d = Scalar(1) / b;
  Scalar h = d;
  for (int k = 1; k <= 120; ++k) {
    Scalar a = -Scalar(k) * Scalar(k);
    b += Scalar(2);
    d = Scalar(1) / (a * d + b);
    c = b + a / c;
    Scalar delta = c * d;
    h *= delta;
    if (std::abs(double(delta) - 1.0) < 1e-16) break;
  }
  return h * exp(-x);
}

}  // namespace robinlab
