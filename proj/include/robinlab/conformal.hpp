#pragma once

#include <cmath>
#include <vector>

#include "robinlab/constants.hpp"
#include "robinlab/errors.hpp"
#include "robinlab/geometry.hpp"
#include "robinlab/spectral.hpp"
#include "robinlab/types.hpp"

// Conformal calculus: the mass transformation law, the trace functional mu
// on the surface and its flat-space analog, and the inequality probes.

namespace robinlab {

template <typename Scalar>
Scalar xlogx(Scalar x) {
  return x > Scalar(0) ? x * std::log(double(x)) : Scalar(0);
}

/// Nonnegative density on a quadrature grid with cached total mass and
/// entropy (0 log 0 = 0).
template <typename Scalar = double>
struct ConformalFactor {
  VectorX<Scalar> samples;
  Scalar total_mass = Scalar(0);   // V_F = int F dV
  Scalar entropy = Scalar(0);      // int F log F dV

  static ConformalFactor from_samples(const QuadratureGrid<Scalar>& grid,
                                      VectorX<Scalar> values) {
    if ((values.array() < Scalar(0)).any())
      throw Error("ConformalFactor: negative sample");
    ConformalFactor f;
    f.samples = std::move(values);
    f.total_mass = grid.weights.dot(f.samples);
    if (!(f.total_mass > Scalar(0)))
      throw ZeroMass("ConformalFactor: total mass must be positive");
    f.entropy = Scalar(0);
    for (Index i = 0; i < f.samples.size(); ++i)
      f.entropy += grid.weights(i) * xlogx(f.samples(i));
    return f;
  }

  /// Multiplicative rescale to a target total mass.
  ConformalFactor normalized(const QuadratureGrid<Scalar>& grid,
                             Scalar target) const {
    return from_samples(grid, samples * (target / total_mass));
  }
};

/// mu value with its per-term breakdown; mu is stored as the exact sum of
/// the three terms.
template <typename Scalar = double>
struct FunctionalReport {
  Scalar mu = Scalar(0);
  Scalar term_mass = Scalar(0);       // int m F dV
  Scalar term_entropy = Scalar(0);    // (2/gamma_n) int F log F dV
  Scalar term_quadratic = Scalar(0);  // -(c_eps / V_F) int F A^{-1-eps} F dV
  Scalar epsilon = Scalar(0);
};

/// Shared evaluator for mu and its epsilon-regularized version; epsilon = 0
/// reproduces mu exactly (the regularizing prefactor is exactly 1).
template <typename Scalar>
FunctionalReport<Scalar> mu_functional(const SpectralModel<Scalar>& model,
                                       const VectorX<Scalar>& mass_field,
                                       const ConformalFactor<Scalar>& f,
                                       Scalar epsilon) {
  if (!(epsilon >= Scalar(0) && epsilon <= Scalar(0.5)))
    throw Error("mu: epsilon must lie in [0, 1/2]");
  if (!(f.total_mass > Scalar(0))) throw ZeroMass("mu: V_F must be positive");
  const Constants<Scalar> c = Constants<Scalar>::make(model.surface().dim);
  FunctionalReport<Scalar> r;
  r.epsilon = epsilon;
  r.term_mass = model.grid().weights.cwiseProduct(mass_field).dot(f.samples);
  r.term_entropy = Scalar(2) / c.gamma_n * f.entropy;
  const Scalar prefactor =
      (Scalar(1) - epsilon) *
      Scalar(std::pow(double(model.lambda_min()), double(epsilon)));
  r.term_quadratic = -(prefactor / f.total_mass) *
                     model.inverse_power_form(Scalar(1) + epsilon, f.samples);
  r.mu = r.term_mass + r.term_entropy + r.term_quadratic;
  return r;
}

template <typename Scalar>
FunctionalReport<Scalar> mu(const SpectralModel<Scalar>& model,
                            const VectorX<Scalar>& mass_field,
                            const ConformalFactor<Scalar>& f) {
  return mu_functional(model, mass_field, f, Scalar(0));
}

/// Robin mass of the metric F^{2/n} g from the mass of g:
/// m + (2 log F)/gamma_n - (2/V_F) A^{-1}F + (1/V_F^2) int F A^{-1}F dV.
template <typename Scalar>
VectorX<Scalar> mass_transform(const SpectralModel<Scalar>& model,
                               const VectorX<Scalar>& mass_field,
                               const ConformalFactor<Scalar>& f) {
  if ((f.samples.array() <= Scalar(0)).any())
    throw NonpositiveF("mass_transform: F must be strictly positive");
  const Constants<Scalar> c = Constants<Scalar>::make(model.surface().dim);
  VectorX<Scalar> logf = f.samples.array().max(Scalar(1e-300)).log();
  VectorX<Scalar> ainv = model.apply_inverse_power(Scalar(1), f.samples);
  const Scalar energy = model.grid().weights.cwiseProduct(f.samples).dot(ainv);
  return mass_field + (Scalar(2) / c.gamma_n) * logf -
         (Scalar(2) / f.total_mass) * ainv +
         VectorX<Scalar>::Constant(mass_field.size(),
                                   energy / (f.total_mass * f.total_mass));
}

template <typename Scalar = double>
struct TraceConformalReport {
  Scalar trace = Scalar(0);   // int m_{F^{2/n}g} F dV
  Scalar mu = Scalar(0);      // mu(M, g, F)
  Scalar defect = Scalar(0);
};

/// trace A_{F^{2/n}g}^{-1} through the transformed mass, checked against mu
/// computed by the direct route.  The two sides are independent code paths;
/// disagreement beyond tol*(1 + |mu|) is an internal identity failure.
template <typename Scalar>
TraceConformalReport<Scalar> trace_conformal(const SpectralModel<Scalar>& model,
                                             const VectorX<Scalar>& mass_field,
                                             const ConformalFactor<Scalar>& f,
                                             Scalar tol = Scalar(1e-8)) {
  VectorX<Scalar> transformed = mass_transform(model, mass_field, f);
  TraceConformalReport<Scalar> r;
  r.trace = model.grid().weights.cwiseProduct(f.samples).dot(transformed);
  r.mu = mu(model, mass_field, f).mu;
  r.defect = std::abs(double(r.trace - r.mu));
  if (!(r.defect <= tol * (Scalar(1) + std::abs(double(r.mu)))))
    throw IdentityCheckFailed("trace_conformal: mass-transform route and mu disagree");
  return r;
}

template <typename Scalar = double>
struct FlatReport {
  Scalar mu = Scalar(0);
  Scalar entropy = Scalar(0);     // int f log f
  Scalar double_log = Scalar(0);  // int int f log|x-y| f
  Scalar total_mass = Scalar(0);
};

/// Exact average of log|x - y| over two copies of a square cell of side h:
/// log h + log2/3 + pi/3 - 25/12.
template <typename Scalar>
Scalar square_cell_log_average(Scalar h) {
  return std::log(double(h)) + std::log(2.0) / Scalar(3) + pi_v<Scalar> / Scalar(3) -
         Scalar(25) / Scalar(12);
}

/// The scale-invariant flat functional
///   mu(R^2, f) = (2/gamma_2) ( int f log f + (2/V_f) int int f log|x-y| f ).
/// f is sampled on a uniform grid of spacing h (supported away from the
/// boundary).  The double integral uses the midpoint rule off the diagonal
/// and the exact cell average of log|x-y| on the diagonal.
template <typename Scalar>
FlatReport<Scalar> mu_flat(const MatrixX<Scalar>& f, Scalar h) {
  const Constants<Scalar> c = Constants<Scalar>::make(2);
  std::vector<std::array<Index, 2>> support;
  for (Index i = 0; i < f.rows(); ++i)
    for (Index j = 0; j < f.cols(); ++j) {
      if (f(i, j) < Scalar(0)) throw Error("mu_flat: negative sample");
      if (f(i, j) > Scalar(0)) support.push_back({i, j});
    }
  FlatReport<Scalar> r;
  const Scalar cell = h * h;
  for (auto [i, j] : support) {
    r.total_mass += cell * f(i, j);
    r.entropy += cell * xlogx(f(i, j));
  }
  if (!(r.total_mass > Scalar(0))) throw ZeroMass("mu_flat: zero total mass");
  const Scalar diag_avg = square_cell_log_average(h);
  const Index ns = Index(support.size());
  for (Index a = 0; a < ns; ++a) {
    const auto [ia, ja] = support[size_t(a)];
    const Scalar fa = f(ia, ja);
    r.double_log += cell * cell * fa * fa * diag_avg;
    for (Index b = a + 1; b < ns; ++b) {
      const auto [ib, jb] = support[size_t(b)];
      const double dx = double(ia - ib) * double(h);
      const double dy = double(ja - jb) * double(h);
      r.double_log += cell * cell * fa * f(ib, jb) *
                      Scalar(std::log(dx * dx + dy * dy));
      // log|x-y| = log(d^2)/2; factor 2 from the symmetric pair
    }
  }
  r.mu = Scalar(2) / c.gamma_n *
         (r.entropy + Scalar(2) / r.total_mass * r.double_log);
  return r;
}

template <typename Scalar = double>
struct PolarizedReport {
  Scalar bilinear = Scalar(0);       // <Q, A^{-1} R>
  Scalar quad_q = Scalar(0);         // <Q, A^{-1} Q>
  Scalar quad_r = Scalar(0);         // <R, A^{-1} R>
  Scalar cs_defect = Scalar(0);      // bilinear - sqrt(quad_q quad_r)
  Scalar chain_lhs = Scalar(0);      // (1/V) <Q, A^{-1} R>
  Scalar chain_rhs = Scalar(0);      // (1/gamma_n)(int Q log Q + int R log R)
};

/// Cauchy-Schwarz defect of the polarized Green energy and the entropy
/// chain values for two densities of equal mass V.
template <typename Scalar>
PolarizedReport<Scalar> polarized_form_check(const SpectralModel<Scalar>& model,
                                             const ConformalFactor<Scalar>& q,
                                             const ConformalFactor<Scalar>& r) {
  const Constants<Scalar> c = Constants<Scalar>::make(model.surface().dim);
  const Scalar v = model.surface().volume;
  PolarizedReport<Scalar> rep;
  rep.bilinear = model.inverse_power_bilinear(Scalar(1), q.samples, r.samples);
  rep.quad_q = model.inverse_power_form(Scalar(1), q.samples);
  rep.quad_r = model.inverse_power_form(Scalar(1), r.samples);
  rep.cs_defect =
      rep.bilinear - std::sqrt(std::max(0.0, double(rep.quad_q * rep.quad_r)));
  rep.chain_lhs = rep.bilinear / v;
  rep.chain_rhs = (q.entropy + r.entropy) / c.gamma_n;
  return rep;
}

template <typename Scalar = double>
struct ProbeReport {
  Scalar min_value = Scalar(0);
  Index argmin = 0;
  std::vector<Scalar> values;
};

/// Weak log-HLS probe: min over an ensemble of
///   (2/gamma_n) int F log F - (1/V) int F A^{-1} F,  V_F = V.
/// The bound's constant is nonconstructive; the empirical minimum is
/// reported, not asserted against a fixed constant.
template <typename Scalar>
ProbeReport<Scalar> weak_hls_probe(const SpectralModel<Scalar>& model,
                                   const std::vector<ConformalFactor<Scalar>>& ensemble) {
  const Constants<Scalar> c = Constants<Scalar>::make(model.surface().dim);
  const Scalar v = model.surface().volume;
  ProbeReport<Scalar> rep;
  rep.min_value = std::numeric_limits<Scalar>::infinity();
  for (size_t i = 0; i < ensemble.size(); ++i) {
    const ConformalFactor<Scalar> f = ensemble[i].normalized(model.grid(), v);
    const Scalar lhs = Scalar(2) / c.gamma_n * f.entropy -
                       model.inverse_power_form(Scalar(1), f.samples) / v;
    rep.values.push_back(lhs);
    if (lhs < rep.min_value) {
      rep.min_value = lhs;
      rep.argmin = Index(i);
    }
  }
  return rep;
}

/// Empirical probe of the simple log-Sobolev bound: reports
///   sup over the ensemble of ||A^{-1}F||_inf - (1+eps)(2/gamma_n) int F log F.
template <typename Scalar>
Scalar linfty_entropy_probe(const SpectralModel<Scalar>& model,
                            const std::vector<ConformalFactor<Scalar>>& ensemble,
                            Scalar eps) {
  const Constants<Scalar> c = Constants<Scalar>::make(model.surface().dim);
  Scalar sup = -std::numeric_limits<Scalar>::infinity();
  for (const ConformalFactor<Scalar>& f : ensemble) {
    VectorX<Scalar> ainv = model.apply_inverse_power(Scalar(1), f.samples);
    const Scalar d = ainv.template lpNorm<Eigen::Infinity>() -
                     (Scalar(1) + eps) * Scalar(2) / c.gamma_n * f.entropy;
    sup = std::max(sup, d);
  }
  return sup;
}

template <typename Scalar = double>
struct NonconcentrationReport {
  Scalar lhs = Scalar(0);
  Scalar ball_fraction = Scalar(0);
  Scalar delta = Scalar(0);
};

/// Improved log-HLS probe for functions that put at most (1-delta) of their
/// mass in any delta-ball:
///   (1-delta)(2/gamma_n) int F log F - (1/V_F) int F A^{-1} F.
template <typename Scalar>
NonconcentrationReport<Scalar> nonconcentration_probe(
    const SpectralModel<Scalar>& model, const ConformalFactor<Scalar>& f,
    Scalar delta) {
  const Constants<Scalar> c = Constants<Scalar>::make(model.surface().dim);
  auto [fraction, at] = max_ball_mass(model.surface(), model.grid(), f.samples, delta);
  (void)at;
  if (fraction > Scalar(1) - delta)
    throw ConcentratedInput("nonconcentration_probe: delta-ball holds more than (1-delta) of the mass");
  NonconcentrationReport<Scalar> rep;
  rep.delta = delta;
  rep.ball_fraction = fraction;
  rep.lhs = (Scalar(1) - delta) * Scalar(2) / c.gamma_n * f.entropy -
            model.inverse_power_form(Scalar(1), f.samples) / f.total_mass;
  return rep;
}

}  // namespace robinlab
