#include "mft/forward.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace mft;

namespace {

constexpr double kPi = std::numbers::pi;

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

LambdaGrid span(double lo, double hi, int count) { return LambdaGrid{lo, (hi - lo) / (count - 1), count}; }

}  // namespace

TEST_CASE("zero field projects to zero") {
  const GridSpec grid = GridSpec::cube(2, 16, -1.0, 1.0);
  const Sinogram s = project(field_new(grid, 0.0), EuclideanFamily(2), direction_set_circle(8), span(-1.5, 1.5, 32));
  CHECK(s.values.cwiseAbs().maxCoeff() == 0.0);
  CHECK(s.family_tag == "family=euclidean");
}

TEST_CASE("disc projection matches chord lengths") {
  const GridSpec grid = GridSpec::cube(2, 256, -1.1, 1.1);
  const std::vector<EllipseSpec> disc{EllipseSpec{Eigen::Vector2d(0, 0), Eigen::Vector2d(0.8, 0.8), 0.0, 1.0}};
  const DirectionSet dirs = direction_set_circle(12);
  const LambdaGrid lg = span(-1.2, 1.2, 256);
  // Pointwise values of an unsmoothed indicator alias with the cell lattice; a 3-bin hat averages that out.
  ProjectOptions opt;
  opt.hat_widen = 3;
  const Sinogram s = project(phantom_ellipses(disc, grid), EuclideanFamily(2), dirs, lg, opt);
  for (Eigen::Index j = 0; j < dirs.size(); ++j) {
    for (int k = 0; k < lg.count; ++k) {
      const double l = lg.at(k);
      if (std::abs(l) > 0.72) continue;
      const double chord = 2.0 * std::sqrt(0.64 - l * l);
      CHECK(std::abs(s.values(k, j) - chord) <= 0.03 * chord);
    }
  }
}

TEST_CASE("projection conserves mass") {
  const GridSpec grid = GridSpec::cube(2, 48, -0.9, 0.9);
  PhantomSpec spec;
  spec.gaussians.push_back(GaussianSpec{vec({0.1, -0.2}), 0.12, 1.0});
  spec.ellipses.push_back(EllipseSpec{Eigen::Vector2d(-0.2, 0.1), Eigen::Vector2d(0.3, 0.15), 0.4, 0.5});
  const ScalarField f = phantom(spec, grid);
  for (const auto& family : {make_family(EuclideanHyperplane{}, 2), make_family(HyperbolicGeodesic{}, 2),
                             make_family(SphericalMeansEllipsoid{vec({1.0, 0.8})}, 2)}) {
    CAPTURE(family->tag());
    const LambdaGrid lg = family->make_lambda_grid(grid, 200, 4);
    ProjectReport rep;
    const Sinogram s = project(f, *family, direction_set_circle(16), lg, {}, &rep);
    double mass = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const Vector x = grid.point(i);
      if (family->in_domain(x)) mass += f[i] * family->volume_density(x) * grid.cell_volume();
    }
    CHECK(rep.total_mass == doctest::Approx(mass).epsilon(1e-12));
    CHECK(rep.dropped_mass == 0.0);
    for (Eigen::Index j = 0; j < s.values.cols(); ++j) {
      CHECK(s.values.col(j).sum() * lg.dlambda == doctest::Approx(mass).epsilon(1e-10));
    }
  }
}

TEST_CASE("projection is linear and widening keeps mass") {
  const GridSpec grid = GridSpec::cube(2, 32, -1.0, 1.0);
  const ScalarField a = phantom_gaussians({GaussianSpec{vec({0.2, 0.1}), 0.15, 1.0}}, grid);
  const ScalarField b = phantom_ellipses({EllipseSpec{Eigen::Vector2d(-0.1, 0.0), Eigen::Vector2d(0.4, 0.2), 0.3, 1.0}}, grid);
  ScalarField c = a;
  c.values = 2.0 * a.values - 0.5 * b.values;
  const EuclideanFamily fam(2);
  const DirectionSet dirs = direction_set_circle(10);
  const LambdaGrid lg = span(-1.5, 1.5, 64);
  const Matrix combo = 2.0 * project(a, fam, dirs, lg).values - 0.5 * project(b, fam, dirs, lg).values;
  const Matrix direct = project(c, fam, dirs, lg).values;
  CHECK((combo - direct).norm() <= 1e-12 * direct.norm());

  ProjectOptions wide;
  wide.hat_widen = 3;
  const Sinogram w = project(a, fam, dirs, lg, wide);
  CHECK(w.values.col(0).sum() == doctest::Approx(project(a, fam, dirs, lg).values.col(0).sum()).epsilon(1e-12));
}

TEST_CASE("clipped lambda grid is an error") {
  const GridSpec grid = GridSpec::cube(2, 32, -1.0, 1.0);
  const ScalarField f = field_new(grid, 1.0);
  CHECK_THROWS_AS(project(f, EuclideanFamily(2), direction_set_circle(8), span(-0.5, 0.5, 32)), NumericalError);
}

TEST_CASE("analytic disc sinogram") {
  const std::vector<EllipseSpec> disc{EllipseSpec{}};
  const DirectionSet dirs = direction_set_circle(8);
  const Sinogram s = analytic_sinogram_ellipses(disc, dirs, LambdaGrid{-1.0, 0.25, 9});
  CHECK(s.values(4, 0) == doctest::Approx(2.0));
  CHECK(s.values(8, 3) == 0.0);

  const std::vector<EllipseSpec> left{EllipseSpec{Eigen::Vector2d(-2, 0), Eigen::Vector2d(0.5, 0.5), 0.0, 1.0}};
  const std::vector<EllipseSpec> right{EllipseSpec{Eigen::Vector2d(2, 0.5), Eigen::Vector2d(0.3, 0.7), 1.0, 2.0}};
  std::vector<EllipseSpec> both = left;
  both.push_back(right.front());
  const LambdaGrid lg = span(-3, 3, 61);
  const Matrix sum = analytic_sinogram_ellipses(left, dirs, lg).values + analytic_sinogram_ellipses(right, dirs, lg).values;
  CHECK((analytic_sinogram_ellipses(both, dirs, lg).values - sum).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("analytic gaussian sinogram agrees with its projection") {
  const GaussianSpec g{vec({0.15, -0.1}), 0.2, 1.0};
  const DirectionSet dirs = direction_set_circle(6);
  const LambdaGrid lg = span(-1.5, 1.5, 121);
  const Sinogram exact = analytic_sinogram_gaussians({g}, dirs, lg);
  // Line integral of a 2D Gaussian: s sqrt(2 pi) exp(-(lambda - <omega, c>)^2 / (2 s^2)).
  for (Eigen::Index j = 0; j < dirs.size(); ++j) {
    const double mu = dirs.nodes.col(j).dot(g.center);
    for (int k = 0; k < lg.count; k += 10) {
      const double l = lg.at(k);
      CHECK(exact.values(k, j) ==
            doctest::Approx(0.2 * std::sqrt(2.0 * kPi) * std::exp(-(l - mu) * (l - mu) / 0.08)).epsilon(1e-12));
    }
  }
  // Cells several times finer than dlambda keep the lattice moire below the tolerance.
  const GridSpec grid = GridSpec::cube(2, 400, -1.0, 1.0);
  const Sinogram num = project(phantom_gaussians({g}, grid), EuclideanFamily(2), dirs, lg);
  CHECK((num.values - exact.values).norm() <= 0.01 * exact.values.norm());
}

TEST_CASE("gaussian sphere integral closed form") {
  // G f over the sphere radius r at distance d from an isotropic n=3 Gaussian.
  const GaussianSpec g{vec({0.0, 0.0, 0.0}), 0.3, 1.0};
  for (double r : {0.2, 0.7, 1.3}) {
    for (double d : {0.1, 0.5, 1.0}) {
      const double s2 = 0.09;
      const double oracle =
          2.0 * kPi * r * s2 / d * (std::exp(-(d - r) * (d - r) / (2 * s2)) - std::exp(-(d + r) * (d + r) / (2 * s2)));
      CHECK(gaussian_sphere_integral(g, 3, r, d) == doctest::Approx(oracle).epsilon(1e-12));
    }
  }
  // n = 2 against a direct circle quadrature.
  const GaussianSpec g2{vec({0.0, 0.0}), 0.25, 1.0};
  const double r = 0.6;
  const double d = 0.4;
  double acc = 0.0;
  const int m = 4000;
  for (int i = 0; i < m; ++i) {
    const double phi = 2.0 * kPi * i / m;
    const double q = d * d + r * r + 2.0 * d * r * std::cos(phi);
    acc += std::exp(-q / (2.0 * 0.0625));
  }
  CHECK(gaussian_sphere_integral(g2, 2, r, d) == doctest::Approx(acc * r * 2.0 * kPi / m).epsilon(1e-12));
}

TEST_CASE("spherical means of a gaussian follow M = G / (2 sqrt(lambda))") {
  const EllipsoidFamily fam(3, vec({1.0, 1.0, 1.0}));
  const std::vector<GaussianSpec> g{GaussianSpec{vec({0.0, 0.0, 0.0}), 0.2, 1.0}};
  const DirectionSet dirs = direction_set(3, 4, 8);
  const LambdaGrid lg = span(0.05, 3.0, 40);
  const Sinogram m = analytic_spherical_means(g, fam, dirs, lg);
  const Sinogram gd = analytic_spherical_means(g, fam, dirs, lg, true);
  for (int k = 0; k < lg.count; ++k) {
    const double l = lg.at(k);
    CHECK(m.values(k, 0) == doctest::Approx(gd.values(k, 0) / (2.0 * std::sqrt(l))).epsilon(1e-13));
    // |xi| = 1: G = 2 pi r s^2 / d (e^{-(d-r)^2/2s^2} - e^{-(d+r)^2/2s^2}) with d = 1.
    const double r = std::sqrt(l);
    const double oracle =
        2.0 * kPi * r * 0.04 * (std::exp(-(1 - r) * (1 - r) / 0.08) - std::exp(-(1 + r) * (1 + r) / 0.08));
    CHECK(gd.values(k, 0) == doctest::Approx(oracle).epsilon(1e-12));
  }
}

TEST_CASE("central points") {
  const EllipsoidFamily e(2, vec({2.0, 0.5}));
  const Vector xi = central_point(e, vec({0.6, 0.8}));
  CHECK(xi[0] == doctest::Approx(1.2));
  CHECK(xi[1] == doctest::Approx(0.4));
  const TrigCurveFamily tri(named_curve("tri"));
  const Vector p = central_point(tri, vec({1.0, 0.0}));
  CHECK(p[0] == doctest::Approx(1.0));
  CHECK(p[1] == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("range moments") {
  const DirectionSet dirs = direction_set_circle(64);
  const LambdaGrid lg = span(-1.5, 1.5, 301);
  const Vector x0 = vec({0.3, -0.2});
  const Sinogram s = analytic_sinogram_gaussians({GaussianSpec{x0, 0.05, 1.0}}, dirs, lg);
  const double mass = 2.0 * kPi * 0.0025;
  const Vector mu0 = range_moment(s, 0);
  const Vector mu1 = range_moment(s, 1);
  for (Eigen::Index j = 0; j < dirs.size(); ++j) {
    CHECK(mu0[j] == doctest::Approx(mass).epsilon(1e-6));
    CHECK(mu1[j] == doctest::Approx(dirs.nodes.col(j).dot(x0) * mass).epsilon(1e-5).scale(mass));
  }
  for (int k : {0, 1, 2}) CHECK(range_check(s, k, 1).relative_energy_above <= 1e-10);

  // A sinogram whose mu_1 carries a degree-3 harmonic violates the m = 1 condition.
  Sinogram bad = s;
  for (Eigen::Index j = 0; j < dirs.size(); ++j) {
    const double phi = std::atan2(dirs.nodes(1, j), dirs.nodes(0, j));
    bad.values.col(j) *= 1.0 + 0.3 * std::cos(3.0 * phi);
  }
  CHECK(range_check(bad, 0, 1).relative_energy_above > 1e-3);
}

TEST_CASE("range condition for the ellipsoid family") {
  const EllipsoidFamily fam(2, vec({1.0, 0.8}));
  const DirectionSet dirs = direction_set_circle(64);
  const LambdaGrid lg = span(0.0, 3.5, 400);
  const Sinogram s = analytic_spherical_means({GaussianSpec{vec({0.1, 0.05}), 0.1, 1.0}}, fam, dirs, lg);
  for (int k : {0, 1, 2}) {
    const RangeReport r = range_check(s, k, 2);
    CHECK(r.degree == 2 * k);
    CHECK(r.relative_energy_above <= 1e-6);
  }
}

TEST_CASE("a vanishing moment meets the range condition") {
  // The first moment of a centered disc is zero up to rounding.
  const Sinogram s = analytic_sinogram_ellipses({EllipseSpec{}}, direction_set_circle(90), LambdaGrid{-1.2, 2.4 / 127, 128});
  const RangeReport r = range_check(s, 1, 1);
  CHECK(r.moment.cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(r.relative_energy_above == 0.0);
}
