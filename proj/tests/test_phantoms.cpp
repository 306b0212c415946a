#include "mft/phantoms.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace mft;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

}  // namespace

TEST_CASE("ellipse phantoms") {
  const GridSpec grid = GridSpec::cube(2, 200, -1.0, 1.0);
  const ScalarField disc = phantom_ellipses({EllipseSpec{}}, grid);
  double area = 0.0;
  for (Eigen::Index i = 0; i < disc.values.size(); ++i) {
    CHECK((disc.values[i] == 0.0 || disc.values[i] == 1.0));
    area += disc.values[i];
  }
  CHECK(area * grid.cell_volume() == doctest::Approx(std::numbers::pi).epsilon(5e-3));

  const EllipseSpec a{Eigen::Vector2d(0.0, 0.0), Eigen::Vector2d(0.5, 0.3), 0.0, 1.0};
  const EllipseSpec b{Eigen::Vector2d(0.2, 0.0), Eigen::Vector2d(0.4, 0.4), 0.0, 2.0};
  const ScalarField both = phantom_ellipses({a, b}, grid);
  const std::size_t mid = grid.ravel({100, 110});  // x = (0.005, 0.105)
  CHECK(both[mid] == 3.0);
  CHECK(phantom_ellipses({}, grid).values.cwiseAbs().maxCoeff() == 0.0);

  const EllipseSpec rot{Eigen::Vector2d(0.0, 0.0), Eigen::Vector2d(0.5, 0.1), std::numbers::pi / 2, 1.0};
  CHECK(ellipse_contains(rot, Eigen::Vector2d(0.0, 0.45)));
  CHECK_FALSE(ellipse_contains(rot, Eigen::Vector2d(0.45, 0.0)));
}

TEST_CASE("gaussian phantoms") {
  const GaussianSpec g{vec({0.0, 0.0}), 0.1, 2.5};
  CHECK(gaussian_value(g, vec({0.0, 0.0})) == 2.5);
  CHECK(gaussian_value(g, vec({0.3, 0.0})) == doctest::Approx(2.5 * std::exp(-4.5)));
  const GridSpec line = GridSpec::box({2, 64}, vec({-0.01, -1.0}), vec({0.01, 1.0}));
  const ScalarField cut = phantom_gaussians({g}, line);
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line.point(i).norm() > 0.6) CHECK(cut[i] == 0.0);
  }

  for (int n : {2, 3}) {
    const GridSpec grid = GridSpec::cube(n, n == 2 ? 200 : 80, -1.0, 1.0);
    const ScalarField f = phantom_gaussians({GaussianSpec{Vector::Zero(n), 0.15, 1.3}}, grid);
    const double mass = f.values.sum() * grid.cell_volume();
    CHECK(mass == doctest::Approx(1.3 * std::pow(2.0 * std::numbers::pi * 0.0225, 0.5 * n)).epsilon(1e-6));
  }

  // Truncation at 6 s isolates far-separated bumps.
  const GaussianSpec left{vec({-0.7, 0.0}), 0.05, 1.0};
  const GaussianSpec right{vec({0.7, 0.0}), 0.05, 1.0};
  const GridSpec grid = GridSpec::cube(2, 64, -1.0, 1.0);
  const ScalarField both = phantom_gaussians({left, right}, grid);
  const ScalarField only = phantom_gaussians({left}, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid.point(i)[0] < 0.0) CHECK(std::abs(both[i] - only[i]) <= 1e-12);
  }
}

TEST_CASE("phantom_value is the untruncated truth") {
  PhantomSpec spec;
  spec.gaussians.push_back(GaussianSpec{vec({0.0, 0.0}), 0.1, 1.0});
  spec.ellipses.push_back(EllipseSpec{});
  CHECK(phantom_value(spec, vec({0.0, 0.0})) == 2.0);
  CHECK(phantom_value(spec, vec({0.7, 0.0})) == doctest::Approx(1.0 + std::exp(-24.5)));
}

TEST_CASE("phantom spec parsing") {
  const PhantomSpec s = parse_phantom_spec("# comment\nellipse 0.1 0.2 0.5 0.3 0.4 1.5\n\ngaussian 0 0 0.2 2 ; gaussian 0.3 -0.1 0.1 1", 2);
  REQUIRE(s.ellipses.size() == 1);
  REQUIRE(s.gaussians.size() == 2);
  CHECK(s.ellipses[0].center.x() == 0.1);
  CHECK(s.ellipses[0].axes.y() == 0.3);
  CHECK(s.ellipses[0].angle == 0.4);
  CHECK(s.ellipses[0].amplitude == 1.5);
  CHECK(s.gaussians[1].center[1] == -0.1);
  CHECK(s.gaussians[1].width == 0.1);

  const PhantomSpec s3 = parse_phantom_spec("gaussian 0 0 0.1 0.2 1", 3);
  CHECK(s3.gaussians[0].center.size() == 3);
  CHECK_THROWS_AS(parse_phantom_spec("ellipse 0 0 1 1 0 1", 3), ConfigError);
  CHECK_THROWS_AS(parse_phantom_spec("gaussian 0 0 1", 2), ConfigError);
  CHECK_THROWS_AS(parse_phantom_spec("blob 1 2 3", 2), ConfigError);
  CHECK_THROWS_AS(parse_phantom_spec("gaussian 0 0 -0.1 1", 2), ConfigError);
}

TEST_CASE("error metrics") {
  const GridSpec grid = GridSpec::cube(2, 8, 0.0, 1.0);
  const ScalarField g = field_from(grid, [](const Vector& x) { return 1.0 + x[0] * x[1]; });
  const ErrorMetrics same = error_metrics(g, g);
  CHECK(same.rel_l2 == 0.0);
  CHECK(same.max_abs == 0.0);
  CHECK(same.mean == 0.0);

  ScalarField twice = g;
  twice.values *= 2.0;
  CHECK(error_metrics(twice, g).rel_l2 == doctest::Approx(1.0));

  ScalarField shifted = g;
  shifted.values.array() += 0.25;
  ScalarField mask = field_new(grid, 0.0);
  for (std::size_t i = 0; i < grid.size(); i += 2) mask[i] = 1.0;
  const ErrorMetrics m = error_metrics(shifted, g, &mask);
  CHECK(m.mean == doctest::Approx(0.25));
  CHECK(m.count == grid.size() / 2);

  // Symmetric in max_abs; rel_l2 is scale invariant.
  CHECK(error_metrics(g, twice).max_abs == error_metrics(twice, g).max_abs);
  ScalarField g3 = g;
  ScalarField t3 = twice;
  g3.values *= -3.0;
  t3.values *= -3.0;
  CHECK(error_metrics(t3, g3).rel_l2 == doctest::Approx(error_metrics(twice, g).rel_l2));

  const ScalarField other = field_new(GridSpec::cube(2, 4, 0.0, 1.0), 0.0);
  CHECK_THROWS_AS(error_metrics(other, g), ConfigError);
}
