#pragma once

#include <cmath>
#include <utility>

#include "robinlab/constants.hpp"
#include "robinlab/errors.hpp"
#include "robinlab/types.hpp"

// Model surfaces and their quadrature grids.  Runnable geometries are the
// round 2-sphere (stored as unit vectors in R^3; a target volume V scales
// weights and distances, never the embedding) and flat 2-tori given by a
// lattice basis.  Grids are immutable after construction.

namespace robinlab {

enum class SurfaceKind { Sphere, Torus };

/// Lagrange (Gauss) reduction of a 2d lattice basis: returns a basis of the
/// same lattice with |b1| <= |b2| and |<b1,b2>| <= |b1|^2 / 2.
template <typename Scalar>
Matrix2<Scalar> lagrange_reduce(Matrix2<Scalar> basis) {
  Vector2<Scalar> b1 = basis.col(0), b2 = basis.col(1);
  if (b1.squaredNorm() > b2.squaredNorm()) std::swap(b1, b2);
  for (int iter = 0; iter < 64; ++iter) {
    Scalar r = std::round(double(b2.dot(b1) / b1.squaredNorm()));
    b2 -= r * b1;
    if (b2.squaredNorm() < b1.squaredNorm())
      std::swap(b1, b2);
    else
      break;
  }
  Matrix2<Scalar> out;
  out.col(0) = b1;
  out.col(1) = b2;
  return out;
}

template <typename Scalar = double>
struct SurfaceSpec {
  SurfaceKind kind = SurfaceKind::Sphere;
  int dim = 2;  // n
  Scalar volume = Scalar(0);
  Matrix2<Scalar> basis = Matrix2<Scalar>::Identity();  // torus generators (columns)

  static SurfaceSpec sphere(int n, Scalar volume) {
    if (n < 2 || n % 2 != 0)
      throw UnsupportedDimension("sphere: dimension must be even and >= 2");
    if (!(volume > Scalar(0))) throw Error("sphere: volume must be positive");
    SurfaceSpec s;
    s.kind = SurfaceKind::Sphere;
    s.dim = n;
    s.volume = volume;
    return s;
  }

  /// Torus from lattice generators (matrix columns); the basis is
  /// Lagrange-reduced on ingestion and the volume is |det|.
  static SurfaceSpec torus(const Matrix2<Scalar>& generators) {
    Scalar det = generators.determinant();
    if (std::abs(double(det)) < 1e-14)
      throw SingularLattice("torus: lattice basis is singular");
    SurfaceSpec s;
    s.kind = SurfaceKind::Torus;
    s.dim = 2;
    s.basis = lagrange_reduce(generators);
    s.volume = std::abs(double(det));
    return s;
  }

  /// Radius of the round metric of this volume: (volume / omega_n)^{1/n}.
  Scalar radius() const {
    using std::pow;
    return pow(volume / sphere_volume<Scalar>(dim), Scalar(1) / Scalar(dim));
  }

  /// Grid-free diameter: pi * r for the sphere, covering radius bound for
  /// the torus (half the long diagonal of the reduced cell).
  Scalar diameter() const {
    if (kind == SurfaceKind::Sphere) return pi_v<Scalar> * radius();
    Vector2<Scalar> d1 = basis.col(0) + basis.col(1);
    Vector2<Scalar> d2 = basis.col(0) - basis.col(1);
    return Scalar(0.5) * std::max(d1.norm(), d2.norm());
  }
};

template <typename Scalar = double>
struct QuadratureGrid {
  SurfaceKind kind = SurfaceKind::Sphere;
  MatrixX<Scalar> points;   // N x 3 (sphere, unit vectors) or N x 2 (torus)
  VectorX<Scalar> weights;  // positive, sums to the represented volume
  int resolution = 0;

  // sphere product structure (colatitude x longitude)
  int n_theta = 0, n_phi = 0;
  VectorX<Scalar> cos_theta;     // Gauss-Legendre nodes on [-1,1]
  VectorX<Scalar> theta_weight;  // matching weights (sum 2)

  // torus structure
  int n_side = 0;

  Index size() const { return weights.size(); }
};

/// Gauss-Legendre nodes and weights on [-1,1], Newton iteration on P_n.
template <typename Scalar>
void gauss_legendre(int n, VectorX<Scalar>& nodes, VectorX<Scalar>& weights) {
  nodes.resize(n);
  weights.resize(n);
  const Scalar pi = pi_v<Scalar>;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    Scalar x = std::cos(double(pi * (Scalar(i) + Scalar(0.75)) / (Scalar(n) + Scalar(0.5))));
    Scalar pp = Scalar(0);
    for (int iter = 0; iter < 100; ++iter) {
      Scalar p0 = Scalar(1), p1 = x;
      for (int k = 2; k <= n; ++k) {
        Scalar p2 = ((Scalar(2 * k - 1)) * x * p1 - Scalar(k - 1) * p0) / Scalar(k);
        p0 = p1;
        p1 = p2;
      }
      pp = Scalar(n) * (x * p1 - p0) / (x * x - Scalar(1));
      Scalar dx = p1 / pp;
      x -= dx;
      if (std::abs(double(dx)) < 1e-16) break;
    }
    nodes(i) = x;
    nodes(n - 1 - i) = -x;
    Scalar w = Scalar(2) / ((Scalar(1) - x * x) * pp * pp);
    weights(i) = w;
    weights(n - 1 - i) = w;
  }
  // nodes come out descending in this indexing; order ascending
  nodes.reverseInPlace();
  weights.reverseInPlace();
}

/// Product rule on the unit 2-sphere: Gauss-Legendre in cos(theta) times a
/// uniform longitude grid.  With resolution L the rule integrates every
/// spherical harmonic of degree <= 2L exactly; weights sum to omega_2 = 4 pi.
template <typename Scalar>
QuadratureGrid<Scalar> build_sphere_grid(int n, int resolution) {
  if (n != 2)
    throw UnsupportedDimension(
        "build_sphere_grid: gridded workflows support n = 2 only");
  if (resolution < 1) throw Error("build_sphere_grid: resolution must be >= 1");
  QuadratureGrid<Scalar> g;
  g.kind = SurfaceKind::Sphere;
  g.resolution = resolution;
  g.n_theta = resolution + 1;
  g.n_phi = 2 * resolution + 2;
  gauss_legendre<Scalar>(g.n_theta, g.cos_theta, g.theta_weight);
  const Scalar pi = pi_v<Scalar>;
  const Scalar wphi = Scalar(2) * pi / Scalar(g.n_phi);
  const Index npts = Index(g.n_theta) * Index(g.n_phi);
  g.points.resize(npts, 3);
  g.weights.resize(npts);
  for (int i = 0; i < g.n_theta; ++i) {
    const Scalar c = g.cos_theta(i);
    const Scalar s = std::sqrt(std::max(0.0, double(Scalar(1) - c * c)));
    for (int k = 0; k < g.n_phi; ++k) {
      const Scalar phi = Scalar(2) * pi * Scalar(k) / Scalar(g.n_phi);
      const Index p = Index(i) * g.n_phi + k;
      g.points(p, 0) = s * std::cos(double(phi));
      g.points(p, 1) = s * std::sin(double(phi));
      g.points(p, 2) = c;
      g.weights(p) = g.theta_weight(i) * wphi;
    }
  }
  return g;
}

/// Uniform grid on the fundamental domain of a torus; equal weights summing
/// to |det basis|.  Exact for trigonometric polynomials below Nyquist.
/// The basis is Lagrange-reduced first, so grids and spectral models built
/// from any basis of the same lattice coincide.
template <typename Scalar>
QuadratureGrid<Scalar> build_torus_grid(const Matrix2<Scalar>& basis,
                                        int resolution) {
  Scalar det = basis.determinant();
  if (std::abs(double(det)) < 1e-14)
    throw SingularLattice("build_torus_grid: lattice basis is singular");
  if (resolution < 1) throw Error("build_torus_grid: resolution must be >= 1");
  const Matrix2<Scalar> reduced = lagrange_reduce(basis);
  QuadratureGrid<Scalar> g;
  g.kind = SurfaceKind::Torus;
  g.resolution = resolution;
  g.n_side = resolution;
  const Index n = resolution;
  g.points.resize(n * n, 2);
  g.weights = VectorX<Scalar>::Constant(n * n, std::abs(double(det)) / Scalar(n * n));
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      Vector2<Scalar> f(Scalar(i) / Scalar(n), Scalar(j) / Scalar(n));
      g.points.row(i * n + j) = (reduced * f).transpose();
    }
  return g;
}

/// Minimum-image distance on the torus (reduced basis; 3x3 translate search
/// after wrapping to the centered cell is exact).
template <typename Scalar>
Scalar torus_distance(const Matrix2<Scalar>& basis, const Vector2<Scalar>& p,
                      const Vector2<Scalar>& q) {
  Vector2<Scalar> f = basis.inverse() * (p - q);
  f(0) -= std::round(double(f(0)));
  f(1) -= std::round(double(f(1)));
  Vector2<Scalar> y = basis * f;
  Scalar best = std::numeric_limits<Scalar>::max();
  for (int a = -1; a <= 1; ++a)
    for (int b = -1; b <= 1; ++b) {
      Vector2<Scalar> t{Scalar(a), Scalar(b)};
      best = std::min(best, Scalar((y + basis * t).norm()));
    }
  return best;
}

/// Riemannian distance between surface points (rows of a grid or free
/// vectors).  Sphere points are unit vectors; the round metric of volume V
/// scales arc length by the radius.
template <typename Scalar, typename DerivedP, typename DerivedQ>
Scalar geodesic_distance(const SurfaceSpec<Scalar>& surface,
                         const Eigen::MatrixBase<DerivedP>& p,
                         const Eigen::MatrixBase<DerivedQ>& q) {
  if (surface.kind == SurfaceKind::Sphere) {
    Scalar c = p.dot(q);
    c = std::min(Scalar(1), std::max(Scalar(-1), c));
    return surface.radius() * std::acos(double(c));
  }
  Vector2<Scalar> pp(p(0), p(1)), qq(q(0), q(1));
  return torus_distance(surface.basis, pp, qq);
}

/// Euclidean chord between embedded sphere points.
template <typename DerivedP, typename DerivedQ>
typename DerivedP::Scalar chordal_distance(const Eigen::MatrixBase<DerivedP>& p,
                                           const Eigen::MatrixBase<DerivedQ>& q) {
  return (p - q).norm();
}

/// Largest mass fraction of F dV captured by a geodesic ball of radius
/// delta centered at a grid point; returns {fraction, argmax index}.
template <typename Scalar>
std::pair<Scalar, Index> max_ball_mass(const SurfaceSpec<Scalar>& surface,
                                       const QuadratureGrid<Scalar>& grid,
                                       const VectorX<Scalar>& f, Scalar delta) {
  const Index n = grid.size();
  VectorX<Scalar> fw = grid.weights.cwiseProduct(f);
  const Scalar total = fw.sum();
  Scalar best = Scalar(0);
  Index best_at = 0;
  if (surface.kind == SurfaceKind::Sphere) {
    const Scalar threshold = std::cos(std::min(double(delta / surface.radius()), double(pi_v<Scalar>)));
    const Index block = 256;
    for (Index start = 0; start < n; start += block) {
      const Index rows = std::min(block, n - start);
      MatrixX<Scalar> gram =
          grid.points.middleRows(start, rows) * grid.points.transpose();
      for (Index r = 0; r < rows; ++r) {
        Scalar acc = Scalar(0);
        for (Index qdx = 0; qdx < n; ++qdx)
          if (gram(r, qdx) >= threshold) acc += fw(qdx);
        if (acc > best) {
          best = acc;
          best_at = start + r;
        }
      }
    }
  } else {
    for (Index pdx = 0; pdx < n; ++pdx) {
      Scalar acc = Scalar(0);
      Vector2<Scalar> pp = grid.points.row(pdx).transpose();
      for (Index qdx = 0; qdx < n; ++qdx) {
        Vector2<Scalar> qq = grid.points.row(qdx).transpose();
        if (torus_distance(surface.basis, pp, qq) <= delta) acc += fw(qdx);
      }
      if (acc > best) {
        best = acc;
        best_at = pdx;
      }
    }
  }
  return {best / total, best_at};
}

}  // namespace robinlab
