#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <variant>
#include <vector>

#include "robinlab/constants.hpp"
#include "robinlab/errors.hpp"
#include "robinlab/geometry.hpp"
#include "robinlab/special.hpp"
#include "robinlab/types.hpp"

// Truncated eigenbasis models of operators of type Delta^{n/2}: the GJMS
// operator on the round sphere and the Laplace-Beltrami operator on flat
// tori.  Fractional powers act modewise on the truncated basis.  Forward and
// inverse transforms exploit the product structure of the grids (associated
// Legendre times Fourier on the sphere, Fourier times Fourier on the torus)
// so no dense eigenfunction matrix is ever stored.

namespace robinlab {

/// Eigenvalue of the GJMS operator on degree-k spherical harmonics:
/// k (k+1) ... (k+n-1).
template <typename Scalar = double>
Scalar gjms_eigenvalue(int n, int k) {
  if (n < 2 || n % 2 != 0)
    throw UnsupportedDimension("gjms_eigenvalue: n must be even and >= 2");
  if (k < 0) throw Error("gjms_eigenvalue: k must be >= 0");
  Scalar p = Scalar(1);
  for (int j = 0; j < n; ++j) p *= Scalar(k + j);
  return p;
}

namespace detail {

/// Fully normalized associated Legendre values S_{l,m}(x) for l in
/// [max(m,1), L]; sqrt(4 pi) normalization folded in so the real harmonics
/// S_{l,0} and sqrt(2) S_{l,m} cos/sin(m phi) are orthonormal on the unit
/// sphere.
template <typename Scalar>
std::vector<MatrixX<Scalar>> legendre_tables(int truncation,
                                             const VectorX<Scalar>& x) {
  const int L = truncation;
  const Index nx = x.size();
  std::vector<MatrixX<Scalar>> tables(L + 1);
  const Scalar inv_sqrt4pi = Scalar(1) / std::sqrt(4.0 * double(pi_v<Scalar>));
  VectorX<Scalar> diag_prev = VectorX<Scalar>::Constant(nx, inv_sqrt4pi);
  VectorX<Scalar> sxx = (VectorX<Scalar>::Ones(nx) - x.cwiseProduct(x))
                            .cwiseMax(Scalar(0))
                            .cwiseSqrt();
  for (int m = 0; m <= L; ++m) {
    VectorX<Scalar> smm = diag_prev;
    if (m > 0) {
      smm = -std::sqrt(double(2 * m + 1) / double(2 * m)) *
            sxx.cwiseProduct(diag_prev);
      diag_prev = smm;
    }
    const int lmin = std::max(m, 1);
    MatrixX<Scalar>& tab = tables[m];
    tab.resize(L - lmin + 1, nx);
    VectorX<Scalar> prev2 = smm;  // S_{m,m}
    VectorX<Scalar> prev1 =
        std::sqrt(double(2 * m + 3)) * x.cwiseProduct(smm);  // S_{m+1,m}
    if (m >= 1) tab.row(m - lmin) = prev2.transpose();
    if (m + 1 <= L && m + 1 >= lmin) tab.row(m + 1 - lmin) = prev1.transpose();
    for (int l = m + 2; l <= L; ++l) {
      const Scalar a = std::sqrt(double(4 * l * l - 1) / double(l * l - m * m));
      const Scalar b = std::sqrt(double(2 * l + 1) * double(l - 1 + m) *
                                 double(l - 1 - m) /
                                 (double(2 * l - 3) * double(l * l - m * m)));
      VectorX<Scalar> cur = a * x.cwiseProduct(prev1) - b * prev2;
      tab.row(l - lmin) = cur.transpose();
      prev2 = prev1;
      prev1 = cur;
    }
  }
  return tables;
}

/// Squared norms |M m|^2 over nonzero integer vectors m with value <= qmax.
template <typename Scalar>
std::vector<Scalar> lattice_norms(const Matrix2<Scalar>& m_basis, Scalar qmax) {
  Eigen::JacobiSVD<Matrix2<Scalar>> svd(m_basis);
  const Scalar sigma_min = svd.singularValues()(1);
  const int bound = int(std::ceil(std::sqrt(double(qmax)) / double(sigma_min))) + 1;
  std::vector<Scalar> out;
  for (int a = -bound; a <= bound; ++a)
    for (int b = -bound; b <= bound; ++b) {
      if (a == 0 && b == 0) continue;
      Vector2<Scalar> v = m_basis * Vector2<Scalar>(Scalar(a), Scalar(b));
      Scalar q = v.squaredNorm();
      if (q <= qmax) out.push_back(q);
    }
  std::sort(out.begin(), out.end());
  return out;
}

/// Polynomial extrapolation of (x_i, y_i) to x = 0 by Neville's scheme.
/// Returns the extrapolated value and the last correction as error estimate.
template <typename Scalar>
std::pair<Scalar, Scalar> neville_to_zero(const std::vector<Scalar>& xs,
                                          const std::vector<Scalar>& ys) {
  const int n = int(xs.size());
  std::vector<Scalar> u(ys);
  Scalar last = u[0];
  Scalar correction = Scalar(0);
  for (int level = 1; level < n; ++level) {
    for (int i = 0; i + level < n; ++i)
      u[i] = (xs[i + level] * u[i] - xs[i] * u[i + 1]) / (xs[i + level] - xs[i]);
    correction = u[0] - last;
    last = u[0];
  }
  return {last, std::abs(double(correction))};
}

}  // namespace detail

struct ModeKey {
  // sphere: a = degree l, b = order m, phase = 0 (m=0), 1 (cos), 2 (sin)
  // torus:  a = m1, b = m2, phase = 1 (cos), 2 (sin)
  int a = 0, b = 0, phase = 0;
};

/// A value with an attached numerical error bound.
template <typename Scalar>
struct Bounded {
  Scalar value = Scalar(0);
  Scalar error_bound = Scalar(0);
};

template <typename Scalar = double>
class SpectralModel {
 public:
  static SpectralModel sphere(int n, Scalar volume, int truncation,
                              const QuadratureGrid<Scalar>& unit_grid) {
    if (n != 2)
      throw UnsupportedDimension("sphere model: gridded path supports n = 2");
    if (unit_grid.kind != SurfaceKind::Sphere)
      throw Error("sphere model: grid is not a sphere grid");
    if (unit_grid.resolution < truncation)
      throw TruncationTooLargeForGrid(
          "sphere model: grid resolution must be >= truncation");
    SpectralModel m;
    m.surface_ = SurfaceSpec<Scalar>::sphere(n, volume);
    m.grid_ = unit_grid;
    m.grid_.weights *= volume / sphere_volume<Scalar>(n);
    m.truncation_ = truncation;
    SphereTables t;
    t.legendre = detail::legendre_tables<Scalar>(truncation, unit_grid.cos_theta);
    t.alpha = std::sqrt(4.0 * double(pi_v<Scalar>) / double(volume));
    const int nphi = unit_grid.n_phi;
    t.cos_tab.resize(nphi, truncation + 1);
    t.sin_tab.resize(nphi, truncation + 1);
    for (int k = 0; k < nphi; ++k)
      for (int mm = 0; mm <= truncation; ++mm) {
        const double phi = 2.0 * double(pi_v<Scalar>) * k / nphi;
        t.cos_tab(k, mm) = Scalar(std::cos(mm * phi));
        t.sin_tab(k, mm) = Scalar(std::sin(mm * phi));
      }
    const Scalar scale = sphere_volume<Scalar>(n) / volume;
    for (int l = 1; l <= truncation; ++l) {
      const Scalar lam = scale * gjms_eigenvalue<Scalar>(n, l);
      m.keys_.push_back({l, 0, 0});
      m.lambda_.push_back(lam);
      for (int mm = 1; mm <= l; ++mm) {
        m.keys_.push_back({l, mm, 1});
        m.lambda_.push_back(lam);
        m.keys_.push_back({l, mm, 2});
        m.lambda_.push_back(lam);
      }
    }
    m.tables_ = std::move(t);
    return m;
  }

  static SpectralModel torus(const Matrix2<Scalar>& generators, int truncation,
                             const QuadratureGrid<Scalar>& grid) {
    if (grid.kind != SurfaceKind::Torus)
      throw Error("torus model: grid is not a torus grid");
    if (grid.n_side < 2 * truncation + 1)
      throw TruncationTooLargeForGrid(
          "torus model: grid side must be >= 2L+1 for exact mode products");
    SpectralModel m;
    m.surface_ = SurfaceSpec<Scalar>::torus(generators);
    m.grid_ = grid;
    m.truncation_ = truncation;
    TorusTables t;
    t.n_side = grid.n_side;
    t.beta = std::sqrt(2.0 / double(m.surface_.volume));
    const int N = grid.n_side;
    t.cos_tab.resize(truncation + 1, N);
    t.sin_tab.resize(truncation + 1, N);
    for (int a = 0; a <= truncation; ++a)
      for (int i = 0; i < N; ++i) {
        const double ang = 2.0 * double(pi_v<Scalar>) * a * i / N;
        t.cos_tab(a, i) = Scalar(std::cos(ang));
        t.sin_tab(a, i) = Scalar(std::sin(ang));
      }
    const Matrix2<Scalar> dual = m.surface_.basis.inverse().transpose();
    struct Rep {
      Scalar lam;
      int m1, m2;
    };
    std::vector<Rep> reps;
    for (int m1 = 0; m1 <= truncation; ++m1)
      for (int m2 = -truncation; m2 <= truncation; ++m2) {
        if (m1 == 0 && m2 <= 0) continue;  // half lattice, origin excluded
        Vector2<Scalar> w = dual * Vector2<Scalar>(Scalar(m1), Scalar(m2));
        const Scalar lam = Scalar(4) * pi_v<Scalar> * pi_v<Scalar> * w.squaredNorm();
        reps.push_back({lam, m1, m2});
      }
    std::sort(reps.begin(), reps.end(), [](const Rep& x, const Rep& y) {
      if (x.lam != y.lam) return x.lam < y.lam;
      if (x.m1 != y.m1) return x.m1 < y.m1;
      return x.m2 < y.m2;
    });
    for (const Rep& r : reps) {
      m.keys_.push_back({r.m1, r.m2, 1});
      m.lambda_.push_back(r.lam);
      m.keys_.push_back({r.m1, r.m2, 2});
      m.lambda_.push_back(r.lam);
    }
    m.tables_ = std::move(t);
    return m;
  }

  const SurfaceSpec<Scalar>& surface() const { return surface_; }
  const QuadratureGrid<Scalar>& grid() const { return grid_; }
  int truncation() const { return truncation_; }
  Index num_modes() const { return Index(lambda_.size()); }
  Scalar eigenvalue(Index j) const { return lambda_[size_t(j)]; }
  Scalar lambda_min() const { return lambda_.front(); }
  const ModeKey& mode_key(Index j) const { return keys_[size_t(j)]; }

  /// Band index used for low-pass filtering: harmonic degree on the sphere,
  /// max |lattice index| on the torus.
  int mode_degree(Index j) const {
    const ModeKey& k = keys_[size_t(j)];
    if (std::holds_alternative<SphereTables>(tables_)) return k.a;
    return std::max(std::abs(k.a), std::abs(k.b));
  }

  /// Coefficients <phi_j, f>_{dV} for all retained modes.
  VectorX<Scalar> project(const VectorX<Scalar>& f) const {
    VectorX<Scalar> g = grid_.weights.cwiseProduct(f);
    if (const auto* t = std::get_if<SphereTables>(&tables_))
      return sphere_analysis(*t, g);
    return torus_analysis(std::get<TorusTables>(tables_), g);
  }

  /// Grid samples of sum_j c_j phi_j.
  VectorX<Scalar> synthesize(const VectorX<Scalar>& c) const {
    if (const auto* t = std::get_if<SphereTables>(&tables_))
      return sphere_synthesis(*t, c);
    return torus_synthesis(std::get<TorusTables>(tables_), c);
  }

  /// Grid samples of one eigenfunction.
  VectorX<Scalar> mode(Index j) const {
    VectorX<Scalar> c = VectorX<Scalar>::Zero(num_modes());
    c(j) = Scalar(1);
    return synthesize(c);
  }

  /// A^{-s} f = sum_j lambda_j^{-s} phi_j <phi_j, f>; zero mean by
  /// construction (constants are annihilated).
  VectorX<Scalar> apply_inverse_power(Scalar s, const VectorX<Scalar>& f) const {
    VectorX<Scalar> c = project(f);
    for (Index j = 0; j < c.size(); ++j)
      c(j) *= std::pow(double(lambda_[size_t(j)]), double(-s));
    return synthesize(c);
  }

  /// <f, A^{-s} f>_{dV}.
  Scalar inverse_power_form(Scalar s, const VectorX<Scalar>& f) const {
    VectorX<Scalar> c = project(f);
    Scalar acc = Scalar(0);
    for (Index j = 0; j < c.size(); ++j)
      acc += std::pow(double(lambda_[size_t(j)]), double(-s)) * c(j) * c(j);
    return acc;
  }

  /// <f, A^{-s} h>_{dV}.
  Scalar inverse_power_bilinear(Scalar s, const VectorX<Scalar>& f,
                                const VectorX<Scalar>& h) const {
    VectorX<Scalar> cf = project(f), ch = project(h);
    Scalar acc = Scalar(0);
    for (Index j = 0; j < cf.size(); ++j)
      acc += std::pow(double(lambda_[size_t(j)]), double(-s)) * cf(j) * ch(j);
    return acc;
  }

  /// <f, A f>_{dV} restricted to the truncated basis.
  VectorX<Scalar> apply_forward(const VectorX<Scalar>& f) const {
    VectorX<Scalar> c = project(f);
    for (Index j = 0; j < c.size(); ++j) c(j) *= lambda_[size_t(j)];
    return synthesize(c);
  }

  Scalar mean(const VectorX<Scalar>& f) const {
    return grid_.weights.dot(f) / surface_.volume;
  }

  /// Projection onto constants plus modes of band index <= cap.
  VectorX<Scalar> low_pass(const VectorX<Scalar>& f, int cap) const {
    VectorX<Scalar> c = project(f);
    for (Index j = 0; j < c.size(); ++j)
      if (mode_degree(j) > cap) c(j) = Scalar(0);
    return VectorX<Scalar>::Constant(f.size(), mean(f)) + synthesize(c);
  }

  /// Eigenvalue clusters (value, multiplicity), relative tolerance 1e-9.
  std::vector<std::pair<Scalar, int>> eigenvalue_clusters() const {
    std::vector<std::pair<Scalar, int>> out;
    for (Scalar lam : lambda_) {
      if (!out.empty() &&
          std::abs(double(lam - out.back().first)) <=
              1e-9 * std::abs(double(lam)))
        out.back().second += 1;
      else
        out.push_back({lam, 1});
    }
    return out;
  }

 private:
  struct SphereTables {
    std::vector<MatrixX<Scalar>> legendre;  // per m: (L - max(m,1) + 1) x n_theta
    MatrixX<Scalar> cos_tab, sin_tab;       // n_phi x (L+1)
    Scalar alpha = Scalar(1);               // sqrt(4 pi / V)
  };
  struct TorusTables {
    MatrixX<Scalar> cos_tab, sin_tab;  // (L+1) x N
    Scalar beta = Scalar(1);           // sqrt(2 / Vol)
    int n_side = 0;
  };

  static Index sphere_mode_index(int l, int m, bool is_sin) {
    return Index(l) * l - 1 + (m == 0 ? 0 : 2 * m - 1 + (is_sin ? 1 : 0));
  }

  VectorX<Scalar> sphere_analysis(const SphereTables& t,
                                  const VectorX<Scalar>& weighted) const {
    const int L = truncation_;
    const int nt = grid_.n_theta, np = grid_.n_phi;
    Eigen::Map<const RowMajorX<Scalar>> g(weighted.data(), nt, np);
    MatrixX<Scalar> ac = g * t.cos_tab;  // nt x (L+1)
    MatrixX<Scalar> as = g * t.sin_tab;
    VectorX<Scalar> out(num_modes());
    const Scalar sqrt2 = std::sqrt(2.0);
    for (int m = 0; m <= L; ++m) {
      const int lmin = std::max(m, 1);
      if (lmin > L) continue;
      VectorX<Scalar> vc = t.legendre[m] * ac.col(m);
      if (m == 0) {
        for (int l = lmin; l <= L; ++l)
          out(sphere_mode_index(l, 0, false)) = t.alpha * vc(l - lmin);
      } else {
        VectorX<Scalar> vs = t.legendre[m] * as.col(m);
        for (int l = lmin; l <= L; ++l) {
          out(sphere_mode_index(l, m, false)) = t.alpha * sqrt2 * vc(l - lmin);
          out(sphere_mode_index(l, m, true)) = t.alpha * sqrt2 * vs(l - lmin);
        }
      }
    }
    return out;
  }

  VectorX<Scalar> sphere_synthesis(const SphereTables& t,
                                   const VectorX<Scalar>& c) const {
    const int L = truncation_;
    const int nt = grid_.n_theta, np = grid_.n_phi;
    MatrixX<Scalar> uc = MatrixX<Scalar>::Zero(nt, L + 1);
    MatrixX<Scalar> us = MatrixX<Scalar>::Zero(nt, L + 1);
    const Scalar sqrt2 = std::sqrt(2.0);
    for (int m = 0; m <= L; ++m) {
      const int lmin = std::max(m, 1);
      if (lmin > L) continue;
      VectorX<Scalar> vc(L - lmin + 1);
      if (m == 0) {
        for (int l = lmin; l <= L; ++l)
          vc(l - lmin) = t.alpha * c(sphere_mode_index(l, 0, false));
        uc.col(m) = t.legendre[m].transpose() * vc;
      } else {
        VectorX<Scalar> vs(L - lmin + 1);
        for (int l = lmin; l <= L; ++l) {
          vc(l - lmin) = t.alpha * sqrt2 * c(sphere_mode_index(l, m, false));
          vs(l - lmin) = t.alpha * sqrt2 * c(sphere_mode_index(l, m, true));
        }
        uc.col(m) = t.legendre[m].transpose() * vc;
        us.col(m) = t.legendre[m].transpose() * vs;
      }
    }
    RowMajorX<Scalar> field =
        uc * t.cos_tab.transpose() + us * t.sin_tab.transpose();
    return Eigen::Map<const VectorX<Scalar>>(field.data(), Index(nt) * np);
  }

  VectorX<Scalar> torus_analysis(const TorusTables& t,
                                 const VectorX<Scalar>& weighted) const {
    const int N = t.n_side;
    Eigen::Map<const RowMajorX<Scalar>> g(weighted.data(), N, N);
    MatrixX<Scalar> u = t.cos_tab * g;   // (L+1) x N, cos in the i index
    MatrixX<Scalar> v = t.sin_tab * g;   // sin in the i index
    MatrixX<Scalar> p1 = u * t.cos_tab.transpose();  // cos_a cos_b
    MatrixX<Scalar> p2 = v * t.sin_tab.transpose();  // sin_a sin_b
    MatrixX<Scalar> p3 = u * t.sin_tab.transpose();  // cos_a sin_b
    MatrixX<Scalar> p4 = v * t.cos_tab.transpose();  // sin_a cos_b
    VectorX<Scalar> out(num_modes());
    for (Index j = 0; j < num_modes(); ++j) {
      const ModeKey& k = keys_[size_t(j)];
      const int a = k.a, b = std::abs(k.b);
      const bool neg = k.b < 0;
      Scalar val;
      if (k.phase == 1)
        val = neg ? p1(a, b) + p2(a, b) : p1(a, b) - p2(a, b);
      else
        val = neg ? p4(a, b) - p3(a, b) : p4(a, b) + p3(a, b);
      out(j) = t.beta * val;
    }
    return out;
  }

  VectorX<Scalar> torus_synthesis(const TorusTables& t,
                                  const VectorX<Scalar>& c) const {
    const int L = truncation_;
    const int N = t.n_side;
    MatrixX<Scalar> m1 = MatrixX<Scalar>::Zero(L + 1, L + 1);
    MatrixX<Scalar> m2 = m1, m3 = m1, m4 = m1;
    for (Index j = 0; j < num_modes(); ++j) {
      const Scalar g = t.beta * c(j);
      if (g == Scalar(0)) continue;
      const ModeKey& k = keys_[size_t(j)];
      const int a = k.a, b = std::abs(k.b);
      const bool neg = k.b < 0;
      if (k.phase == 1) {
        m1(a, b) += g;
        m2(a, b) += neg ? g : -g;
      } else {
        m4(a, b) += g;
        m3(a, b) += neg ? -g : g;
      }
    }
    RowMajorX<Scalar> field =
        t.cos_tab.transpose() * (m1 * t.cos_tab + m3 * t.sin_tab) +
        t.sin_tab.transpose() * (m2 * t.sin_tab + m4 * t.cos_tab);
    return Eigen::Map<const VectorX<Scalar>>(field.data(), Index(N) * N);
  }

  SurfaceSpec<Scalar> surface_;
  QuadratureGrid<Scalar> grid_;
  int truncation_ = 0;
  std::vector<Scalar> lambda_;
  std::vector<ModeKey> keys_;
  std::variant<SphereTables, TorusTables> tables_;
};

/// Spectral zeta Z(s) = sum_j lambda_j^{-s} over the full spectrum of the
/// model operator (all degrees, not just the retained truncation), s > 1.
/// Closed eigenvalue laws make the tail summable to near machine precision:
/// the sphere uses the degree sum with an Euler-Maclaurin tail, the torus an
/// incomplete theta-function split of the lattice sum.
template <typename Scalar>
Bounded<Scalar> zeta_partial(const SpectralModel<Scalar>& model, Scalar s) {
  if (!(s > Scalar(1))) throw SBelowOne("zeta_partial: requires s > 1");
  const SurfaceSpec<Scalar>& surf = model.surface();
  if (surf.kind == SurfaceKind::Sphere) {
    const int n = surf.dim;
    const Scalar scale = surf.volume / sphere_volume<Scalar>(n);  // lambda = gjms/scale
    const int K = 20000;
    Scalar sum = Scalar(0);
    for (int k = K; k >= 1; --k) {
      // multiplicity of degree-k harmonics on S^2
      const Scalar mult = Scalar(2 * k + 1);
      sum += mult * Scalar(std::pow(double(k) * double(k + 1), double(-s)));
    }
    const double a = K + 1;
    const double u = a * (a + 1.0);
    const double f = (2 * a + 1) * std::pow(u, double(-s));
    const double fp = 2 * std::pow(u, double(-s)) -
                      double(s) * (2 * a + 1) * (2 * a + 1) *
                          std::pow(u, double(-s - 1));
    const double fppp_scale =
        std::abs(double(s) * (double(s) + 1) * (double(s) + 2)) *
        std::pow(2 * a + 1, 3.0) * std::pow(u, double(-s - 3));
    const Scalar tail =
        Scalar(std::pow(u, double(1 - s)) / (double(s) - 1.0) + f / 2 - fp / 12);
    const Scalar vs = Scalar(std::pow(double(scale), double(s)));
    return {vs * (sum + tail), vs * Scalar(fppp_scale / 720.0 + 1e-15)};
  }

  // Torus: Z(s) = (4 pi^2)^{-s} sum'_{v in dual} |v|^{-2s}, evaluated through
  // the incomplete theta split
  //   pi^{-s} Gamma(s) Z_dual(s) = J(s) + Vol/(s-1) - 1/s,
  //   J(s) = int_1^inf [ t^{s-1} (theta_dual(t)-1) + Vol t^{-s} (theta_lat(t)-1) ] dt.
  const Matrix2<Scalar> lat = surf.basis;
  const Matrix2<Scalar> dual = lat.inverse().transpose();
  const Scalar vol = surf.volume;
  const Scalar pi = pi_v<Scalar>;
  const Scalar qmax = Scalar(46.0) / pi;
  std::vector<Scalar> qd = detail::lattice_norms(dual, qmax);
  std::vector<Scalar> ql = detail::lattice_norms(lat, qmax);
  const Scalar qmin = std::min(qd.front(), ql.front());
  const Scalar t_end = Scalar(46.0) / (pi * qmin);

  auto theta_rem = [&](const std::vector<Scalar>& qs, Scalar t) {
    Scalar acc = Scalar(0);
    for (Scalar q : qs) {
      const double e = double(pi * t * q);
      if (e > 46.0) break;
      acc += Scalar(std::exp(-e));
    }
    return acc;
  };
  auto integrand = [&](Scalar t) {
    return Scalar(std::pow(double(t), double(s) - 1.0)) * theta_rem(qd, t) +
           vol * Scalar(std::pow(double(t), -double(s))) * theta_rem(ql, t);
  };

  static const double gl_x[16] = {
      -0.9894009349916499, -0.9445750230732326, -0.8656312023878318,
      -0.7554044083550030, -0.6178762444026438, -0.4580167776572274,
      -0.2816035507792589, -0.0950125098376374, 0.0950125098376374,
      0.2816035507792589,  0.4580167776572274,  0.6178762444026438,
      0.7554044083550030,  0.8656312023878318,  0.9445750230732326,
      0.9894009349916499};
  static const double gl_w[16] = {
      0.0271524594117541, 0.0622535239386479, 0.0951585116824928,
      0.1246289712555339, 0.1495959888165767, 0.1691565193950025,
      0.1826034150449236, 0.1894506104550685, 0.1894506104550685,
      0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
      0.1246289712555339, 0.0951585116824928, 0.0622535239386479,
      0.0271524594117541};

  Scalar j_int = Scalar(0);
  Scalar lo = Scalar(1);
  while (lo < t_end) {
    Scalar hi = std::min(Scalar(2) * lo, t_end);
    const Scalar mid = (lo + hi) / Scalar(2), half = (hi - lo) / Scalar(2);
    for (int q = 0; q < 16; ++q)
      j_int += half * Scalar(gl_w[q]) * integrand(mid + half * Scalar(gl_x[q]));
    lo = hi;
  }
  const Scalar pole_part = vol / (s - Scalar(1)) - Scalar(1) / s;
  const Scalar z_dual = Scalar(std::pow(double(pi), double(s))) /
                        gamma_fn(s) * (j_int + pole_part);
  const Scalar z = Scalar(std::pow(4.0 * double(pi) * double(pi), -double(s))) *
                   z_dual;
  return {z, Scalar(1e-13) * (std::abs(double(z)) + Scalar(1))};
}

/// Sampled zeta values on an s-grid with the analytic pole residue.
template <typename Scalar>
struct ZetaSample {
  VectorX<Scalar> s;
  VectorX<Scalar> values;
  Scalar residue = Scalar(0);
};

template <typename Scalar>
Scalar zeta_residue(const SpectralModel<Scalar>& model) {
  const Constants<Scalar> c = Constants<Scalar>::make(model.surface().dim);
  return Scalar(2) * model.surface().volume / c.gamma_n;
}

template <typename Scalar>
ZetaSample<Scalar> zeta_sample(const SpectralModel<Scalar>& model,
                               const VectorX<Scalar>& s_values) {
  ZetaSample<Scalar> out;
  out.s = s_values;
  out.values.resize(s_values.size());
  for (Index i = 0; i < s_values.size(); ++i)
    out.values(i) = zeta_partial(model, s_values(i)).value;
  out.residue = zeta_residue(model);
  return out;
}

template <typename Scalar>
struct ZetaTrace {
  Scalar value = Scalar(0);
  Scalar error_estimate = Scalar(0);
  Scalar residue = Scalar(0);
};

/// Finite part of Z(s) at s = 1: evaluates Z(s) - residue/(s-1) on a
/// descending s-grid and Richardson-extrapolates to s = 1.  The residue
/// 2V/gamma_n is analytic, never fitted.
template <typename Scalar>
ZetaTrace<Scalar> zeta_finite_part(const SpectralModel<Scalar>& model,
                                   Scalar stability_tol = Scalar(1e-4)) {
  const Scalar residue = zeta_residue(model);
  std::vector<Scalar> hs, fp;
  Scalar h = Scalar(0.5);
  for (int k = 0; k < 6; ++k) {
    const Scalar s = Scalar(1) + h;
    fp.push_back(zeta_partial(model, s).value - residue / h);
    hs.push_back(h);
    h /= Scalar(2);
  }
  auto [value, correction] = detail::neville_to_zero(hs, fp);
  if (!(correction < stability_tol))
    throw ExtrapolationUnstable(
        "zeta_finite_part: Richardson extrapolants disagree");
  return {value, correction, residue};
}

}  // namespace robinlab
