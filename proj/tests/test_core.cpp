#include "mft/core.hpp"

#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

using namespace mft;

namespace {

constexpr double kPi = std::numbers::pi;

GridSpec grid2(int d0, int d1, double h) {
  GridSpec g;
  g.n = 2;
  g.dims = {d0, d1};
  g.origin = Vector::Zero(2);
  g.spacing = Vector::Constant(2, h);
  return g;
}

}  // namespace

TEST_CASE("field_new fills every cell") {
  const ScalarField zero = field_new(grid2(4, 4, 0.1), 0.0);
  CHECK(zero.values.size() == 16);
  CHECK(zero.values.cwiseAbs().maxCoeff() == 0.0);

  const ScalarField c = field_new(grid2(2, 3, 0.1), 1.5);
  REQUIRE(c.values.size() == 6);
  for (Eigen::Index i = 0; i < c.values.size(); ++i) CHECK(c.values[i] == 1.5);
}

TEST_CASE("grid invariants are enforced") {
  CHECK_THROWS_AS(field_new(grid2(4, 4, 0.0), 0.0), ConfigError);
  CHECK_THROWS_AS(field_new(grid2(1, 4, 0.1), 0.0), ConfigError);
  GridSpec g = grid2(4, 4, 0.1);
  g.spacing[1] = -0.1;
  CHECK_THROWS_AS(g.validate(), ConfigError);
}

TEST_CASE("grid layout is row-major and cell-centered") {
  const GridSpec g = GridSpec::box({3, 5}, (Vector(2) << -1.0, 0.0).finished(), (Vector(2) << 2.0, 5.0).finished());
  CHECK(g.size() == 15);
  CHECK(g.cell_volume() == doctest::Approx(1.0));
  CHECK(g.ravel({1, 2}) == 7);
  CHECK(g.unravel(7) == std::vector<int>{1, 2});
  const Vector p = g.point(7);
  CHECK(p[0] == doctest::Approx(0.5));
  CHECK(p[1] == doctest::Approx(2.5));
  const GridSpec c = GridSpec::cube(3, 4, -1.0, 1.0);
  CHECK(c.max_spacing() == doctest::Approx(0.5));
  CHECK(c.point(0)[2] == doctest::Approx(-0.75));
}

TEST_CASE("field_from samples at cell centers") {
  const GridSpec g = GridSpec::cube(2, 4, 0.0, 1.0);
  const ScalarField f = field_from(g, [](const Vector& x) { return x[0] + 10.0 * x[1]; });
  CHECK(f[0] == doctest::Approx(0.125 + 1.25));
  CHECK(f[g.ravel({3, 1})] == doctest::Approx(0.875 + 3.75));
}

TEST_CASE("sphere area matches the closed form") {
  CHECK(sphere_area(2) == doctest::Approx(2.0 * kPi));
  CHECK(sphere_area(3) == doctest::Approx(4.0 * kPi));
  CHECK(sphere_area(4) == doctest::Approx(2.0 * kPi * kPi));
  CHECK(sphere_area(5) == doctest::Approx(8.0 * kPi * kPi / 3.0));
}

TEST_CASE("direction_set_circle") {
  const DirectionSet four = direction_set_circle(4);
  REQUIRE(four.size() == 4);
  const double expected[4][2] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  for (int j = 0; j < 4; ++j) {
    CHECK(four.nodes(0, j) == doctest::Approx(expected[j][0]));
    CHECK(four.nodes(1, j) == doctest::Approx(expected[j][1]));
    CHECK(four.weights[j] == doctest::Approx(kPi / 2.0));
  }
  CHECK(std::abs(direction_set_circle(360).weights.sum() - 2.0 * kPi) <= 1e-12);

  const DirectionSet eight = direction_set_circle(8);
  double second = 0.0;
  for (Eigen::Index j = 0; j < eight.size(); ++j) second += eight.weights[j] * eight.nodes(0, j) * eight.nodes(0, j);
  CHECK(second == doctest::Approx(kPi).epsilon(1e-14));

  CHECK_THROWS_AS(direction_set_circle(3), ConfigError);
}

TEST_CASE("circle rule integrates low harmonics exactly") {
  const int count = 24;
  const DirectionSet d = direction_set_circle(count);
  for (int m = 1; m < count; ++m) {
    std::complex<double> acc = 0.0;
    for (Eigen::Index j = 0; j < d.size(); ++j) {
      acc += d.weights[j] * std::polar(1.0, m * std::atan2(d.nodes(1, j), d.nodes(0, j)));
    }
    CHECK(std::abs(acc) <= 1e-12);
  }
}

TEST_CASE("direction_set_sphere n=3 moments") {
  const DirectionSet d = direction_set_sphere(3, 16, 32);
  CHECK(d.dim() == 3);
  CHECK(std::abs(d.weights.sum() - 4.0 * kPi) <= 1e-10);
  double z2 = 0.0;
  double x1 = 0.0;
  for (Eigen::Index j = 0; j < d.size(); ++j) {
    CHECK(std::abs(d.nodes.col(j).norm() - 1.0) <= 1e-12);
    z2 += d.weights[j] * d.nodes(2, j) * d.nodes(2, j);
    x1 += d.weights[j] * d.nodes(0, j);
  }
  CHECK(std::abs(z2 - 4.0 * kPi / 3.0) <= 1e-10);
  CHECK(std::abs(x1) <= 1e-12);
  CHECK_THROWS_AS(direction_set_sphere(2, 16, 32), ConfigError);
}

TEST_CASE("higher-dimensional product rules") {
  for (int n : {4, 5}) {
    const DirectionSet d = direction_set_sphere(n, 8, 16);
    CHECK(d.dim() == n);
    CHECK(std::abs(d.weights.sum() - sphere_area(n)) <= 1e-9 * sphere_area(n));
    // int omega_1^2 = |S^{n-1}| / n
    double m2 = 0.0;
    double m4 = 0.0;
    for (Eigen::Index j = 0; j < d.size(); ++j) {
      m2 += d.weights[j] * std::pow(d.nodes(n - 1, j), 2);
      m4 += d.weights[j] * std::pow(d.nodes(0, j), 4);
    }
    CHECK(m2 == doctest::Approx(sphere_area(n) / n).epsilon(1e-10));
    // int omega_1^4 = 3 |S^{n-1}| / (n (n + 2))
    CHECK(m4 == doctest::Approx(3.0 * sphere_area(n) / (n * (n + 2))).epsilon(1e-10));
  }
}

TEST_CASE("align_polar_axis maps e_n onto the axis") {
  const DirectionSet d = direction_set_sphere(3, 6, 8);
  const Vector axis = (Vector(3) << 1.0, 2.0, -2.0).finished();
  const DirectionSet r = align_polar_axis(d, axis);
  const Vector u = axis.normalized();
  // Polar cosines relative to the new axis match the old ones relative to e_3.
  for (Eigen::Index j = 0; j < d.size(); ++j) {
    CHECK(r.nodes.col(j).dot(u) == doctest::Approx(d.nodes(2, j)));
    CHECK(r.nodes.col(j).norm() == doctest::Approx(1.0));
  }
  CHECK(r.weights.sum() == doctest::Approx(d.weights.sum()));
}

TEST_CASE("lambda grid and sinogram validation") {
  LambdaGrid lg{-1.0, 0.25, 9};
  CHECK(lg.back() == doctest::Approx(1.0));
  CHECK(lg.samples()[4] == doctest::Approx(0.0));
  CHECK_NOTHROW(lg.validate());
  CHECK_THROWS_AS((LambdaGrid{0.0, 0.1, 7}.validate()), ConfigError);
  CHECK_THROWS_AS((LambdaGrid{0.0, 0.0, 16}.validate()), ConfigError);

  Sinogram s = sinogram_zero("family=euclidean", direction_set_circle(8), lg);
  CHECK(s.values.rows() == 9);
  CHECK(s.values.cols() == 8);
  CHECK_NOTHROW(s.validate());
  s.values(2, 3) = std::nan("");
  CHECK_THROWS(s.validate());
}

TEST_CASE("parallel_for covers the range and rethrows") {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) ++hits[i];
  }, 4);
  for (int h : hits) CHECK(h == 1);
  CHECK_THROWS_AS(parallel_for(10, [](std::size_t, std::size_t) { throw DataError("boom"); }, 3), DataError);
}
