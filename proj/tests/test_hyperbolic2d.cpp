#include "mft/hyperbolic2d.hpp"

#include <Eigen/Geometry>
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace mft;

namespace {

constexpr double kPi = std::numbers::pi;

TrigCurve rotated(const TrigCurve& c, double alpha) {
  return {c.xi1 * std::cos(alpha) - c.xi2 * std::sin(alpha), c.xi1 * std::sin(alpha) + c.xi2 * std::cos(alpha)};
}

}  // namespace

TEST_CASE("trig polynomial evaluation and algebra") {
  const TrigPolynomial t = TrigPolynomial::constant(0.5) + TrigPolynomial::cos_term(1, 2.0) +
                           TrigPolynomial::sin_term(3, -1.0);
  CHECK(t.degree() == 3);
  CHECK(trig_eval(t, 0.0) == doctest::Approx(2.5));
  CHECK(trig_eval(t, kPi / 2) == doctest::Approx(0.5 + 1.0));
  CHECK(trig_eval(t, kPi) == doctest::Approx(-1.5));

  const TrigPolynomial d = t.derivative();
  for (double phi : {0.3, 1.7, -2.2}) {
    CHECK(d(phi) == doctest::Approx(-2.0 * std::sin(phi) - 3.0 * std::cos(3.0 * phi)));
  }

  // cos^2 = (1 + cos 2 phi) / 2.
  const TrigPolynomial sq = TrigPolynomial::cos_term(1) * TrigPolynomial::cos_term(1);
  CHECK(sq.a[0] == doctest::Approx(0.5));
  CHECK(sq.a[2] == doctest::Approx(0.5));
  CHECK(sq.degree() == 2);

  const TrigPolynomial back = TrigPolynomial::from_laurent(t.laurent());
  CHECK((back.a - t.a).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK((back.b - t.b).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK(TrigPolynomial().is_zero());
}

TEST_CASE("trig polynomial text round trip") {
  const TrigPolynomial t = parse_trig_polynomial("2:1,0,-3;0.5,2");
  CHECK(t.a[2] == -3.0);
  CHECK(t.b[1] == 0.5);
  CHECK(t.b[2] == 2.0);
  const TrigPolynomial u = parse_trig_polynomial(format_trig_polynomial(t));
  CHECK(u.a == t.a);
  CHECK(u.b == t.b);
  CHECK(parse_trig_polynomial("0,1/0,2").b[2] == 2.0);
  CHECK_THROWS_AS(parse_trig_polynomial("1:0,0,3"), ConfigError);
  CHECK_THROWS_AS(parse_trig_polynomial(";1"), ConfigError);

  const TrigCurve tri = named_curve("tri");
  const TrigCurve again = parse_trig_curve(format_trig_curve(tri));
  for (double phi : {0.0, 0.9, 4.0}) CHECK((again(phi) - tri(phi)).norm() <= 1e-14);
  CHECK(parse_trig_curve("circle").degree() == 1);
  CHECK_THROWS_AS(named_curve("hexagon"), ConfigError);
  CHECK_THROWS_AS(parse_trig_curve("3|4"), ConfigError);
}

TEST_CASE("roots on the unit circle") {
  const RootCount c = roots_on_unit_circle(TrigPolynomial::cos_term(1));
  CHECK(c.total == 2);
  CHECK(c.on_circle == 2);
  CHECK(c.worst_circle_distance <= 1e-12);

  const RootCount off = roots_on_unit_circle(TrigPolynomial::cos_term(1) - TrigPolynomial::constant(2.0));
  CHECK(off.total == 2);
  CHECK(off.on_circle == 0);
  // z^2 - 4z + 1: roots 2 -+ sqrt 3.
  CHECK(off.worst_circle_distance == doctest::Approx(1.0 + std::sqrt(3.0)).epsilon(1e-10));

  const RootCount c3 = roots_on_unit_circle(TrigPolynomial::cos_term(3) + TrigPolynomial::sin_term(1, 0.2));
  CHECK(c3.total == 6);

  CHECK(roots_on_unit_circle(TrigPolynomial::constant(1.0)).total == 0);
  CHECK_THROWS_AS(roots_on_unit_circle(TrigPolynomial()), ConfigError);

  // A nominal order above the true degree does not create spurious roots.
  TrigPolynomial padded = TrigPolynomial::sin_term(1);
  padded.resize(4);
  CHECK(roots_on_unit_circle(padded).total == 2);
}

TEST_CASE("line pencil and squared distance polynomials") {
  const TrigCurve circle = named_curve("circle");
  const TrigPolynomial p = line_pencil_poly(circle, Eigen::Vector2d(0.3, 0.0), Eigen::Vector2d(1.0, 0.0));
  for (double phi : {0.0, 1.0, 2.5}) CHECK(p(phi) == doctest::Approx(std::cos(phi) - 0.3));
  const RootCount r = roots_on_unit_circle(p);
  CHECK(r.on_circle == 2);

  const TrigCurve tri = named_curve("tri");
  const Eigen::Vector2d x(0.2, -0.1);
  const Eigen::Vector2d y(-0.3, 0.25);
  const TrigPolynomial d = squared_distance_difference(tri, x, y);
  for (double phi : {0.0, 0.7, 3.3}) {
    const Eigen::Vector2d xi = tri(phi);
    CHECK(d(phi) == doctest::Approx((x - xi).squaredNorm() - (y - xi).squaredNorm()).epsilon(1e-12));
  }
  // Interior pairs of the triangle curve give only real zeros.
  const RootCount rr = roots_on_unit_circle(d, 1e-6);
  CHECK(rr.total == 2 * d.degree());
  CHECK(rr.on_circle == rr.total);
}

TEST_CASE("hyperbolic points") {
  const TrigCurve circle = named_curve("circle");
  CHECK(is_hyperbolic(circle, Eigen::Vector2d(0.0, 0.0)));
  CHECK(is_hyperbolic(circle, Eigen::Vector2d(0.5, -0.6)));
  CHECK_FALSE(is_hyperbolic(circle, Eigen::Vector2d(1.2, 0.0)));
  CHECK(classify_point(circle, Eigen::Vector2d(2.0, 1.0), 90, 1e-7) == PointClass::exterior);
  CHECK(hyperbolicity_margin(circle, Eigen::Vector2d(0.1, 0.2), 90, 1e-7, 1.0) <= 1e-7);

  const TrigCurve tri = named_curve("tri");
  CHECK(is_hyperbolic(tri, Eigen::Vector2d(0.0, 0.0)));
  CHECK_FALSE(is_hyperbolic(tri, Eigen::Vector2d(2.9, 0.0)));
}

TEST_CASE("hyperbolic set of the circle is the disc") {
  const HyperbolicRaster r = raster_hyperbolic_set(named_curve("circle"), Bbox2{-1.5, 1.5, -1.5, 1.5}, 64, 90);
  const double h = 3.0 / 64;
  double area = 0.0;
  for (std::size_t i = 0; i < r.mask.grid.size(); ++i) {
    const double rad = r.mask.grid.point(i).norm();
    if (rad < 1.0 - h) CHECK(r.mask[i] == 1.0);
    if (rad > 1.0 + h) CHECK(r.mask[i] == 0.0);
    area += r.mask[i];
  }
  CHECK(area * h * h == doctest::Approx(kPi).epsilon(0.05));
  CHECK(convexity_check(r.mask, &r.boundary).defect_fraction <= 0.01);
}

TEST_CASE("convexity check") {
  const GridSpec grid = GridSpec::cube(2, 48, -1.0, 1.0);
  const ScalarField disc = field_from(grid, [](const Vector& x) { return x.norm() < 0.8 ? 1.0 : 0.0; });
  const ConvexityReport ok = convexity_check(disc);
  CHECK_FALSE(ok.empty);
  CHECK(ok.defect_fraction <= 0.01);

  const ScalarField ring =
      field_from(grid, [](const Vector& x) { return x.norm() < 0.8 && x.norm() > 0.4 ? 1.0 : 0.0; });
  const ConvexityReport bad = convexity_check(ring);
  CHECK(bad.defect_pixels > 0);
  CHECK(bad.defect_fraction >= 0.2);

  CHECK(convexity_check(field_new(grid, 0.0)).empty);
  CHECK_THROWS_AS(convexity_check(field_new(GridSpec::cube(3, 4, 0.0, 1.0), 0.0)), ConfigError);
}

TEST_CASE("symmetry check") {
  const GridSpec grid = GridSpec::cube(2, 64, -1.0, 1.0);
  const ScalarField disc = field_from(grid, [](const Vector& x) { return x.norm() < 0.7 ? 1.0 : 0.0; });
  CHECK(symmetry_check(disc, 5).interior_mismatches == 0);
  const ScalarField half = field_from(grid, [](const Vector& x) { return x[0] > 0.0 && x.norm() < 0.7 ? 1.0 : 0.0; });
  CHECK(symmetry_check(half, 4).interior_mismatches > 0);
}

TEST_CASE("classification is rotation equivariant") {
  const TrigCurve tri = named_curve("tri");
  const double alpha = 0.7;
  const TrigCurve turned = rotated(tri, alpha);
  const Eigen::Rotation2Dd rot(alpha);
  const Eigen::Rotation2Dd third(2.0 * kPi / 3.0);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  int compared = 0;
  for (int i = 0; i < 200; ++i) {
    const Eigen::Vector2d x(u(rng), u(rng));
    // Keep away from the boundary, where the tolerance band decides.
    const double m = hyperbolicity_margin(tri, x, 180, 1e-7, 1.0);
    if (m > 1e-7 && m < 1e-3) continue;
    ++compared;
    const bool inside = is_hyperbolic(tri, x);
    CHECK(is_hyperbolic(turned, rot * x) == inside);
    CHECK(is_hyperbolic(tri, third * x) == inside);
  }
  CHECK(compared >= 150);
}
