#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "robinlab/conformal.hpp"
#include "robinlab/constants.hpp"
#include "robinlab/errors.hpp"
#include "robinlab/rng.hpp"
#include "robinlab/spectral.hpp"
#include "robinlab/types.hpp"

// Constrained minimization of the (epsilon-regularized) trace functional,
// Euler-Lagrange residuals, concentration diagnostics, and the sharp
// inequality / duality verifiers on the round sphere.

namespace robinlab {

template <typename Scalar>
FunctionalReport<Scalar> mu_eps(const SpectralModel<Scalar>& model,
                                const VectorX<Scalar>& mass_field,
                                const ConformalFactor<Scalar>& f,
                                Scalar epsilon) {
  return mu_functional(model, mass_field, f, epsilon);
}

template <typename Scalar = double>
struct Residual {
  VectorX<Scalar> values;  // centered by the F dV-weighted mean
  Scalar norm = Scalar(0);  // L^2(dV) norm of the centered residual
};

/// Stationarity residual of mu^(eps) at F (V_F = V assumed):
///   r = m + (2/gamma_n) log F - (2/V) (1-eps) lambda_1^eps A^{-1-eps} F,
/// centered by its F dV-weighted mean.  Zero norm is stationarity; the
/// residual integrand is also the first variation of mu^(eps) against
/// mean-zero perturbations.
template <typename Scalar>
Residual<Scalar> el_residual(const SpectralModel<Scalar>& model,
                             const VectorX<Scalar>& mass_field,
                             const ConformalFactor<Scalar>& f, Scalar epsilon) {
  if ((f.samples.array() <= Scalar(0)).any())
    throw NonpositiveF("el_residual: F must be strictly positive");
  const Constants<Scalar> c = Constants<Scalar>::make(model.surface().dim);
  const Scalar v = model.surface().volume;
  const Scalar prefactor =
      (Scalar(1) - epsilon) *
      Scalar(std::pow(double(model.lambda_min()), double(epsilon)));
  VectorX<Scalar> bf =
      prefactor * model.apply_inverse_power(Scalar(1) + epsilon, f.samples);
  VectorX<Scalar> logf = f.samples.array().max(Scalar(1e-300)).log();
  VectorX<Scalar> raw =
      mass_field + (Scalar(2) / c.gamma_n) * logf - (Scalar(2) / v) * bf;
  const Scalar fmean =
      model.grid().weights.cwiseProduct(f.samples).dot(raw) / f.total_mass;
  Residual<Scalar> r;
  r.values = raw.array() - fmean;
  r.norm = std::sqrt(
      double(model.grid().weights.dot(r.values.cwiseProduct(r.values))));
  return r;
}

template <typename Scalar = double>
struct ConcentrationIndex {
  Scalar delta = Scalar(0);
  Scalar fraction = Scalar(0);  // max over centers of ball mass / V_F
  Index argmax = 0;
};

template <typename Scalar>
ConcentrationIndex<Scalar> concentration_index(const SpectralModel<Scalar>& model,
                                               const ConformalFactor<Scalar>& f,
                                               Scalar delta) {
  auto [fraction, at] =
      max_ball_mass(model.surface(), model.grid(), f.samples, delta);
  return {delta, fraction, at};
}

template <typename Scalar = double>
struct IterationRecord {
  int stage = 0;
  Scalar epsilon = Scalar(0);
  int step = 0;
  Scalar mu = Scalar(0);
  Scalar residual_norm = Scalar(0);
  Scalar step_size = Scalar(0);
  Scalar mass_std = std::numeric_limits<Scalar>::quiet_NaN();
  Scalar concentration = std::numeric_limits<Scalar>::quiet_NaN();
};

template <typename Scalar = double>
struct MinimizerState {
  VectorX<Scalar> u;  // log F
  ConformalFactor<Scalar> factor;
  Scalar epsilon = Scalar(0);
  int steps = 0;
  FunctionalReport<Scalar> report;
  Scalar residual_norm = Scalar(0);
  Scalar mass_std = Scalar(0);
  std::vector<ConcentrationIndex<Scalar>> concentration;
  std::string regime = "interior";
  bool converged = false;
  bool budget_exhausted = false;
  std::vector<IterationRecord<Scalar>> history;
};

template <typename Scalar = double>
struct MinimizeOptions {
  Scalar tol = Scalar(1e-6);
  int max_steps_per_stage = 400;
  Scalar eta0 = Scalar(1);
  Scalar armijo = Scalar(1e-4);
  int band_cap = -1;  // default truncation / 2
  bool rich_log = false;  // per-iteration mass_std and concentration
  Scalar log_delta_fraction = Scalar(0.3);  // of the diameter
};

/// Weighted standard deviation of the transformed mass; the stationarity
/// certificate (constant transformed mass at critical points).
template <typename Scalar>
Scalar transformed_mass_std(const SpectralModel<Scalar>& model,
                            const VectorX<Scalar>& mass_field,
                            const ConformalFactor<Scalar>& f) {
  VectorX<Scalar> tm = mass_transform(model, mass_field, f);
  const Scalar v = model.surface().volume;
  const Scalar mean = model.grid().weights.dot(tm) / v;
  VectorX<Scalar> d = (tm.array() - mean).matrix();
  return std::sqrt(double(model.grid().weights.dot(d.cwiseProduct(d)) / v));
}

/// Projected gradient descent in u = log F over a decreasing epsilon
/// schedule with warm starts.  Each step moves along -(gamma_n/2) r,
/// band-limits log F, renormalizes V_F = V, and backtracks on mu^(eps).
template <typename Scalar>
MinimizerState<Scalar> minimize(const SpectralModel<Scalar>& model,
                                const VectorX<Scalar>& mass_field,
                                const std::vector<Scalar>& eps_schedule,
                                const ConformalFactor<Scalar>& start,
                                const MinimizeOptions<Scalar>& opt = {}) {
  if (eps_schedule.empty()) throw Error("minimize: empty epsilon schedule");
  for (size_t i = 1; i < eps_schedule.size(); ++i)
    if (!(eps_schedule[i] < eps_schedule[i - 1]))
      throw Error("minimize: epsilon schedule must be strictly decreasing");
  if (!(eps_schedule.back() >= Scalar(0)))
    throw Error("minimize: epsilon schedule must end at >= 0");
  const Constants<Scalar> c = Constants<Scalar>::make(model.surface().dim);
  const Scalar v = model.surface().volume;
  const int cap = opt.band_cap > 0 ? opt.band_cap : model.truncation() / 2;
  const QuadratureGrid<Scalar>& grid = model.grid();

  auto renormalize = [&](VectorX<Scalar>& u) {
    VectorX<Scalar> f = u.array().exp();
    const Scalar mass = grid.weights.dot(f);
    u.array() -= std::log(double(mass / v));
  };
  auto project = [&](VectorX<Scalar> u) {
    u = model.low_pass(u, cap);
    renormalize(u);
    return u;
  };

  MinimizerState<Scalar> state;
  state.u = project(start.samples.array().max(Scalar(1e-300)).log());
  state.factor =
      ConformalFactor<Scalar>::from_samples(grid, state.u.array().exp());

  for (size_t stage = 0; stage < eps_schedule.size(); ++stage) {
    const Scalar eps = eps_schedule[stage];
    state.epsilon = eps;
    Scalar eta = opt.eta0;
    FunctionalReport<Scalar> cur = mu_eps(model, mass_field, state.factor, eps);
    for (int step = 0; step < opt.max_steps_per_stage; ++step) {
      Residual<Scalar> r = el_residual(model, mass_field, state.factor, eps);
      state.residual_norm = r.norm;
      state.report = cur;
      if (r.norm < opt.tol) break;
      // predicted decrease rate of mu^(eps) along -(gamma_n/2) r in u
      const Scalar decrease =
          c.gamma_n / Scalar(2) *
          grid.weights.cwiseProduct(state.factor.samples)
              .dot(r.values.cwiseProduct(r.values));
      bool accepted = false;
      while (eta > Scalar(1e-14)) {
        VectorX<Scalar> u_try =
            project(state.u - eta * (c.gamma_n / Scalar(2)) * r.values);
        ConformalFactor<Scalar> f_try =
            ConformalFactor<Scalar>::from_samples(grid, u_try.array().exp());
        FunctionalReport<Scalar> rep_try = mu_eps(model, mass_field, f_try, eps);
        if (rep_try.mu <= cur.mu - opt.armijo * eta * decrease) {
          state.u = std::move(u_try);
          state.factor = std::move(f_try);
          cur = rep_try;
          accepted = true;
          break;
        }
        eta /= Scalar(2);
      }
      if (!accepted)
        throw LineSearchFailed("minimize: step size underflow");
      state.steps += 1;
      IterationRecord<Scalar> rec;
      rec.stage = int(stage);
      rec.epsilon = eps;
      rec.step = state.steps;
      rec.mu = cur.mu;
      rec.residual_norm = r.norm;
      rec.step_size = eta;
      if (opt.rich_log) {
        rec.mass_std = transformed_mass_std(model, mass_field, state.factor);
        rec.concentration =
            concentration_index(model, state.factor,
                                opt.log_delta_fraction *
                                    model.surface().diameter())
                .fraction;
      }
      state.history.push_back(rec);
      eta = std::min(eta * Scalar(1.5), Scalar(4) * opt.eta0);
    }
    Residual<Scalar> r_end = el_residual(model, mass_field, state.factor, eps);
    state.residual_norm = r_end.norm;
    state.report = cur;
    if (state.residual_norm >= opt.tol) state.budget_exhausted = true;
  }

  state.converged = state.residual_norm < opt.tol;
  state.mass_std = transformed_mass_std(model, mass_field, state.factor);
  const Scalar diam = model.surface().diameter();
  state.concentration.clear();
  for (Scalar frac : {Scalar(0.1), Scalar(0.3), Scalar(0.5)}) {
    state.concentration.push_back(
        concentration_index(model, state.factor, frac * diam));
  }
  // a tenth-diameter ball holding nearly all the mass marks the
  // concentration regime rather than an interior critical point
  if (state.concentration.front().fraction > Scalar(0.9))
    state.regime = "sphere-limit";
  return state;
}

/// Jacobian of the conformal dilation of S^2 toward `center` with parameter
/// tau (stereographic projection, scale by tau, project back), normalized so
/// the total mass is V.  tau = 1 is the identity; tau > 1 concentrates the
/// density at `center`.
template <typename Scalar>
ConformalFactor<Scalar> mobius_jacobian(const SpectralModel<Scalar>& model,
                                        Scalar tau,
                                        const Vector3<Scalar>& center) {
  if (model.surface().kind != SurfaceKind::Sphere)
    throw Error("mobius_jacobian: sphere surfaces only");
  if (!(tau > Scalar(0))) throw Error("mobius_jacobian: tau must be positive");
  const Vector3<Scalar> e = center.normalized();
  const Index n = model.grid().size();
  VectorX<Scalar> f(n);
  const Scalar t2 = tau * tau;
  for (Index i = 0; i < n; ++i) {
    const Scalar u = model.grid().points.row(i).transpose().dot(e);
    const Scalar denom = (Scalar(1) + u) + t2 * (Scalar(1) - u);
    f(i) = Scalar(4) * t2 / (denom * denom);
  }
  ConformalFactor<Scalar> raw =
      ConformalFactor<Scalar>::from_samples(model.grid(), f);
  return raw.normalized(model.grid(), model.surface().volume);
}

template <typename Scalar = double>
struct SharpHlsReport {
  Scalar trace = Scalar(0);
  Scalar min_gap = Scalar(0);
  Index worst = 0;
  std::vector<Scalar> gaps;
};

/// mu(F) >= trace A^{-1} on the round sphere for every ensemble member;
/// throws InequalityViolated when a gap falls below -tol.
template <typename Scalar>
SharpHlsReport<Scalar> verify_sharp_hls(
    const SpectralModel<Scalar>& model, const VectorX<Scalar>& mass_field,
    const std::vector<ConformalFactor<Scalar>>& ensemble,
    Scalar tol = Scalar(1e-6)) {
  SharpHlsReport<Scalar> rep;
  rep.trace = model.grid().weights.dot(mass_field);
  rep.min_gap = std::numeric_limits<Scalar>::infinity();
  for (size_t i = 0; i < ensemble.size(); ++i) {
    const ConformalFactor<Scalar> f =
        ensemble[i].normalized(model.grid(), model.surface().volume);
    const Scalar gap = mu(model, mass_field, f).mu - rep.trace;
    rep.gaps.push_back(gap);
    if (gap < rep.min_gap) {
      rep.min_gap = gap;
      rep.worst = Index(i);
    }
  }
  if (rep.min_gap < -tol)
    throw InequalityViolated("verify_sharp_hls: mu(F) fell below the sphere trace");
  return rep;
}

/// Gap of the dual (Onofri-type) inequality at a smooth field u on the
/// round sphere with d sigma = dV/V:
///   (V/2gamma_n) int u A u dsigma - log int e^u dsigma + int u dsigma.
template <typename Scalar>
Scalar duality_gap(const SpectralModel<Scalar>& model, const VectorX<Scalar>& u) {
  const Constants<Scalar> c = Constants<Scalar>::make(model.surface().dim);
  const Scalar v = model.surface().volume;
  VectorX<Scalar> coef = model.project(u);
  Scalar quad = Scalar(0);
  for (Index j = 0; j < coef.size(); ++j)
    quad += model.eigenvalue(j) * coef(j) * coef(j);
  const Scalar lhs = quad / (Scalar(2) * c.gamma_n);  // (V/2gamma) * quad/V
  const Scalar log_int =
      std::log(double(model.grid().weights.dot(u.array().exp().matrix()) / v));
  const Scalar mean_u = model.grid().weights.dot(u) / v;
  return lhs - log_int + mean_u;
}

/// Jensen-step defect at the Legendre point F = e^u / int e^u dsigma:
///   int (u - log F) F dsigma - log int e^u dsigma  (identically zero).
template <typename Scalar>
Scalar jensen_defect(const SpectralModel<Scalar>& model, const VectorX<Scalar>& u) {
  const Scalar v = model.surface().volume;
  VectorX<Scalar> eu = u.array().exp();
  const Scalar z = model.grid().weights.dot(eu) / v;
  VectorX<Scalar> f = eu / z;
  VectorX<Scalar> logf = u.array() - std::log(double(z));
  const Scalar lhs =
      model.grid().weights.dot((u - logf).cwiseProduct(f)) / v;
  return lhs - std::log(double(z));
}

/// Equality-case defect of the pairing inequality at F = 1 + B^2 u / beta
/// with B^2 = (V/gamma_n) A and beta = 1:
///   int F (u - mean u) dsigma - (1/2) int F B^{-2} F dsigma - (1/2) int u B^2 u dsigma.
template <typename Scalar>
Scalar legendre_equality_defect(const SpectralModel<Scalar>& model,
                                const VectorX<Scalar>& u) {
  const Constants<Scalar> c = Constants<Scalar>::make(model.surface().dim);
  const Scalar v = model.surface().volume;
  VectorX<Scalar> au = model.apply_forward(u);
  VectorX<Scalar> f = VectorX<Scalar>::Ones(u.size()) + (v / c.gamma_n) * au;
  const Scalar mean_u = model.grid().weights.dot(u) / v;
  VectorX<Scalar> centered_u = (u.array() - mean_u).matrix();
  const Scalar lhs = model.grid().weights.dot(f.cwiseProduct(centered_u)) / v;
  // B^{-2} F = (gamma_n / V) A^{-1} F
  const Scalar fbf = (c.gamma_n / v) *
                     model.inverse_power_form(Scalar(1), f) / v;
  VectorX<Scalar> coef = model.project(u);
  Scalar quad = Scalar(0);
  for (Index j = 0; j < coef.size(); ++j)
    quad += model.eigenvalue(j) * coef(j) * coef(j);
  const Scalar ubu = (v / c.gamma_n) * quad / v;
  return lhs - (fbf + ubu) / Scalar(2);
}

template <typename Scalar = double>
struct DualityReport {
  Scalar min_gap = Scalar(0);
  Index worst = 0;
  Scalar max_jensen_defect = Scalar(0);
  Scalar max_legendre_defect = Scalar(0);
  std::vector<Scalar> gaps;
};

template <typename Scalar>
DualityReport<Scalar> verify_duality(const SpectralModel<Scalar>& model,
                                     const std::vector<VectorX<Scalar>>& fields,
                                     Scalar tol = Scalar(1e-6)) {
  if (model.surface().kind != SurfaceKind::Sphere)
    throw Error("verify_duality: requires a constant-mass extremal metric (round sphere)");
  DualityReport<Scalar> rep;
  rep.min_gap = std::numeric_limits<Scalar>::infinity();
  for (size_t i = 0; i < fields.size(); ++i) {
    const Scalar gap = duality_gap(model, fields[i]);
    rep.gaps.push_back(gap);
    if (gap < rep.min_gap) {
      rep.min_gap = gap;
      rep.worst = Index(i);
    }
    rep.max_jensen_defect = std::max(
        rep.max_jensen_defect, Scalar(std::abs(double(jensen_defect(model, fields[i])))));
    rep.max_legendre_defect =
        std::max(rep.max_legendre_defect,
                 Scalar(std::abs(double(legendre_equality_defect(model, fields[i])))));
  }
  if (rep.min_gap < -tol)
    throw InequalityViolated("verify_duality: dual inequality violated");
  return rep;
}

/// Band-limited Gaussian field with coefficient decay (1 + degree)^{-2}.
template <typename Scalar>
VectorX<Scalar> random_band_limited(const SpectralModel<Scalar>& model,
                                    Xoshiro256pp& rng, int max_degree,
                                    Scalar amplitude) {
  VectorX<Scalar> c(model.num_modes());
  for (Index j = 0; j < c.size(); ++j) {
    const int deg = model.mode_degree(j);
    c(j) = deg <= max_degree
               ? amplitude * Scalar(rng.normal()) /
                     Scalar((1 + deg) * (1 + deg))
               : Scalar(0);
  }
  return model.synthesize(c);
}

/// Log-normal density: F = exp(u) for a random band-limited u, normalized
/// to total mass V.
template <typename Scalar>
ConformalFactor<Scalar> random_lognormal_factor(const SpectralModel<Scalar>& model,
                                                Xoshiro256pp& rng,
                                                int max_degree, Scalar sigma) {
  VectorX<Scalar> u = random_band_limited(model, rng, max_degree, sigma);
  VectorX<Scalar> f = u.array().exp();
  return ConformalFactor<Scalar>::from_samples(model.grid(), f)
      .normalized(model.grid(), model.surface().volume);
}

}  // namespace robinlab
