#pragma once

#include <cmath>

#include "robinlab/errors.hpp"
#include "robinlab/special.hpp"
#include "robinlab/types.hpp"

namespace robinlab {

inline double factorial(int n) {
  if (n < 0 || n > 170) throw Error("factorial: argument out of range");
  double p = 1.0;
  for (int k = 2; k <= n; ++k) p *= k;
  return p;
}

/// Volume of the standard (unit radius) n-sphere, 2 pi^{(n+1)/2} / Gamma((n+1)/2).
template <typename Scalar>
Scalar sphere_volume(int n) {
  using std::exp;
  using std::log;
  if (n < 1) throw UnsupportedDimension("sphere_volume: n must be >= 1");
  const Scalar pi = pi_v<Scalar>;
  return Scalar(2) *
         exp(Scalar(0.5) * Scalar(n + 1) * log(pi) -
             log_gamma(Scalar(0.5) * Scalar(n + 1)));
}

/// Dimensional constants: omega_n (volume of the standard n-sphere) and
/// gamma_n = n! * omega_n.
template <typename Scalar = double>
struct Constants {
  int n = 2;
  Scalar omega_n = Scalar(0);
  Scalar gamma_n = Scalar(0);

  static Constants make(int n) {
    if (n < 2 || n % 2 != 0)
      throw UnsupportedDimension("Constants: n must be even and >= 2");
    Constants c;
    c.n = n;
    c.omega_n = sphere_volume<Scalar>(n);
    c.gamma_n = Scalar(factorial(n)) * c.omega_n;
    return c;
  }
};

}  // namespace robinlab
