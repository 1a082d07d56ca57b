#include <doctest.h>

#include <cmath>

#include "robinlab/geometry.hpp"
#include "robinlab/rng.hpp"

using namespace robinlab;

namespace {

// Closed-form real spherical harmonics used as quadrature oracles,
// orthonormal against the solid-angle measure.
double y10(const Eigen::Vector3d& p) { return std::sqrt(3.0 / (4.0 * M_PI)) * p.z(); }
double y21(const Eigen::Vector3d& p) {
  return std::sqrt(15.0 / (4.0 * M_PI)) * p.x() * p.z();
}

Eigen::Vector3d random_unit(Xoshiro256pp& rng) {
  Eigen::Vector3d v(rng.normal(), rng.normal(), rng.normal());
  return v.normalized();
}

}  // namespace

TEST_SUITE("geometry") {
  TEST_CASE("dimensional constants") {
    auto c2 = Constants<double>::make(2);
    CHECK(c2.omega_n == doctest::Approx(4.0 * M_PI).epsilon(1e-14));
    CHECK(c2.gamma_n == 2.0 * c2.omega_n);
    auto c4 = Constants<double>::make(4);
    CHECK(c4.omega_n == doctest::Approx(8.0 * M_PI * M_PI / 3.0).epsilon(1e-13));
    CHECK(c4.gamma_n == 24.0 * c4.omega_n);
    CHECK_THROWS_AS(Constants<double>::make(3), UnsupportedDimension);
  }

  TEST_CASE("sphere grid integrates constants and harmonics") {
    auto g = build_sphere_grid<double>(2, 16);
    CHECK(std::abs(g.weights.sum() - 4.0 * M_PI) <= 1e-12 * 4.0 * M_PI);

    double acc10 = 0.0, acc21 = 0.0;
    for (Index i = 0; i < g.size(); ++i) {
      const Eigen::Vector3d p = g.points.row(i).transpose();
      acc10 += g.weights(i) * y10(p);
      acc21 += g.weights(i) * y21(p) * y21(p);
    }
    CHECK(std::abs(acc10) <= 1e-12);
    CHECK(acc21 == doctest::Approx(1.0).epsilon(1e-10));
  }

  TEST_CASE("sphere grid rejects unsupported dimensions") {
    CHECK_THROWS_AS(build_sphere_grid<double>(4, 8), UnsupportedDimension);
  }

  TEST_CASE("torus grid weights and plane-wave exactness") {
    auto g = build_torus_grid<double>(Eigen::Matrix2d::Identity(), 8);
    CHECK(g.size() == 64);
    CHECK(g.weights(0) == doctest::Approx(1.0 / 64.0).epsilon(1e-15));

    Eigen::Matrix2d stretched;
    stretched << 2.0, 0.0, 0.0, 1.0;
    auto g2 = build_torus_grid<double>(stretched, 8);
    CHECK(std::abs(g2.weights.sum() - 2.0) <= 1e-12 * 2.0);

    double re = 0.0, im = 0.0;
    for (Index i = 0; i < g.size(); ++i) {
      const double phase = 2.0 * M_PI * (g.points(i, 0) + g.points(i, 1));
      re += g.weights(i) * std::cos(phase);
      im += g.weights(i) * std::sin(phase);
    }
    CHECK(std::abs(re) <= 1e-12);
    CHECK(std::abs(im) <= 1e-12);

    CHECK_THROWS_AS(
        build_torus_grid<double>(Eigen::Matrix2d::Zero(), 8), SingularLattice);
  }

  TEST_CASE("geodesic distances on the sphere") {
    auto s = SurfaceSpec<double>::sphere(2, 4.0 * M_PI);
    Eigen::Vector3d n(0, 0, 1), sp(0, 0, -1);
    CHECK(geodesic_distance(s, n, sp) == doctest::Approx(M_PI).epsilon(1e-12));
    CHECK(chordal_distance(n, sp) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(chordal_distance(n, n) == 0.0);
  }

  TEST_CASE("torus wrap-around distances") {
    auto s = SurfaceSpec<double>::torus(Eigen::Matrix2d::Identity());
    Eigen::Vector2d o(0, 0), a(0.5, 0), b(0.9, 0);
    CHECK(geodesic_distance(s, o, a) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(geodesic_distance(s, o, b) == doctest::Approx(0.1).epsilon(1e-12));
  }

  TEST_CASE("distance symmetry and triangle inequality on random samples") {
    Xoshiro256pp rng(3);
    auto sph = SurfaceSpec<double>::sphere(2, 4.0 * M_PI);
    auto tor = SurfaceSpec<double>::torus(Eigen::Matrix2d::Identity());
    for (int i = 0; i < 200; ++i) {
      Eigen::Vector3d p = random_unit(rng), q = random_unit(rng), r = random_unit(rng);
      CHECK(geodesic_distance(sph, p, q) ==
            doctest::Approx(geodesic_distance(sph, q, p)).epsilon(1e-14));
      CHECK(geodesic_distance(sph, p, r) <=
            geodesic_distance(sph, p, q) + geodesic_distance(sph, q, r) + 1e-10);

      Eigen::Vector2d tp(rng.uniform(), rng.uniform());
      Eigen::Vector2d tq(rng.uniform(), rng.uniform());
      Eigen::Vector2d tr(rng.uniform(), rng.uniform());
      CHECK(geodesic_distance(tor, tp, tq) ==
            doctest::Approx(geodesic_distance(tor, tq, tp)).epsilon(1e-14));
      CHECK(geodesic_distance(tor, tp, tr) <=
            geodesic_distance(tor, tp, tq) + geodesic_distance(tor, tq, tr) + 1e-10);
    }
  }

  TEST_CASE("chord versus arc on the unit sphere") {
    auto s = SurfaceSpec<double>::sphere(2, 4.0 * M_PI);
    Xoshiro256pp rng(11);
    for (int i = 0; i < 100; ++i) {
      Eigen::Vector3d p = random_unit(rng), q = random_unit(rng);
      const double arc = geodesic_distance(s, p, q);
      const double chord = chordal_distance(p, q);
      CHECK(chord <= arc + 1e-14);
      CHECK(chord == doctest::Approx(2.0 * std::sin(arc / 2.0)).epsilon(1e-12));
    }
    // short-distance ratio: chord/arc in [1 - 1.01 d^2/24, 1] for d <= 0.1
    for (double d : {0.1, 0.05, 0.01, 0.001}) {
      Eigen::Vector3d p(0, 0, 1);
      Eigen::Vector3d q(std::sin(d), 0.0, std::cos(d));
      const double ratio = chordal_distance(p, q) / geodesic_distance(s, p, q);
      CHECK(ratio <= 1.0 + 1e-12);
      CHECK(ratio >= 1.0 - 1.01 * d * d / 24.0);
    }
  }

  TEST_CASE("lagrange reduction matches brute force shortest translates") {
    Xoshiro256pp rng(19);
    for (int trial = 0; trial < 20; ++trial) {
      Eigen::Matrix2d raw;
      raw << 1.0, 0.0, 17.0 + rng.uniform(), 1.0;  // badly sheared basis
      auto s = SurfaceSpec<double>::torus(raw);
      CHECK(std::abs(s.basis.determinant()) ==
            doctest::Approx(std::abs(raw.determinant())).epsilon(1e-12));
      Eigen::Vector2d p(rng.uniform(), rng.uniform());
      Eigen::Vector2d q(rng.uniform(), rng.uniform());
      // oracle: exhaustive translate search over the raw basis
      double best = 1e300;
      for (int a = -40; a <= 40; ++a)
        for (int b = -40; b <= 40; ++b)
          best = std::min(best,
                          (p - q + raw * Eigen::Vector2d(a, b)).norm());
      CHECK(geodesic_distance(s, p, q) == doctest::Approx(best).epsilon(1e-12));
    }
  }

  TEST_CASE("ball mass of the uniform density matches cap area") {
    auto g = build_sphere_grid<double>(2, 24);
    auto s = SurfaceSpec<double>::sphere(2, 4.0 * M_PI);
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(g.size());
    const double delta = 0.7;
    auto [fraction, at] = max_ball_mass(s, g, ones, delta);
    (void)at;
    // area of a spherical cap of radius delta over the total area
    const double expected = (1.0 - std::cos(delta)) / 2.0;
    CHECK(fraction == doctest::Approx(expected).epsilon(0.02));
  }
}
