#include "mft/forward.hpp"
#include "mft/inversion.hpp"
#include "mft/io.hpp"

#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

using namespace mft;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("mft_test_" + name)).string();
}

std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

ScalarField random_field(const GridSpec& grid, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  ScalarField f = field_new(grid, 0.0);
  for (Eigen::Index i = 0; i < f.values.size(); ++i) f.values[i] = g(rng) * std::pow(10.0, g(rng));
  return f;
}

bool same_bits(const double* a, const double* b, std::size_t count) {
  return std::memcmp(a, b, count * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("field round trip is bit exact") {
  Vector origin(3);
  origin << -1.0 / 3.0, 0.1, 2e-17;
  Vector spacing(3);
  spacing << 0.1, 1.0 / 7.0, 3.3e5;
  const GridSpec grid{3, {4, 3, 5}, origin, spacing};
  const ScalarField f = random_field(grid, 1);
  std::stringstream ss;
  write_field(f, ss);
  const ScalarField g = read_field(ss);
  CHECK(g.grid.dims == f.grid.dims);
  CHECK(same_bits(g.grid.origin.data(), f.grid.origin.data(), 3));
  CHECK(same_bits(g.grid.spacing.data(), f.grid.spacing.data(), 3));
  CHECK(same_bits(g.values.data(), f.values.data(), f.grid.size()));

  const std::string path = temp_path("field.mff");
  write_field(f, path);
  const ScalarField h = read_field(path);
  CHECK(same_bits(h.values.data(), f.values.data(), f.grid.size()));
  CHECK(read_header_text(path).rfind("MFF1\n3 4 3 5\n", 0) == 0);
  std::filesystem::remove(path);
}

TEST_CASE("sinogram round trip is bit exact") {
  const DirectionSet dirs = direction_set(3, 4, 8);
  Sinogram s = sinogram_zero("family=ellipsoid;a=1,0.8,0.6", dirs, LambdaGrid{-0.3, 1.0 / 30.0, 9});
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  for (Eigen::Index i = 0; i < s.values.size(); ++i) s.values.data()[i] = g(rng);
  std::stringstream ss;
  write_sinogram(s, ss);
  const Sinogram t = read_sinogram(ss);
  CHECK(t.family_tag == s.family_tag);
  CHECK(t.lambdas.count == 9);
  CHECK(t.lambdas.lambda0 == s.lambdas.lambda0);
  CHECK(t.lambdas.dlambda == s.lambdas.dlambda);
  CHECK(same_bits(t.directions.nodes.data(), s.directions.nodes.data(), static_cast<std::size_t>(dirs.nodes.size())));
  CHECK(same_bits(t.directions.weights.data(), s.directions.weights.data(), static_cast<std::size_t>(dirs.size())));
  CHECK(same_bits(t.values.data(), s.values.data(), static_cast<std::size_t>(s.values.size())));
}

TEST_CASE("malformed fields are data errors") {
  const ScalarField f = random_field(GridSpec::cube(2, 4, 0.0, 1.0), 3);
  std::stringstream ss;
  write_field(f, ss);
  const std::string good = ss.str();

  std::istringstream v2("MFF2\n" + good.substr(5));
  CHECK_THROWS_WITH_AS(read_field(v2), doctest::Contains("unsupported MFF version"), DataError);
  std::istringstream wrong("P5\n1 1\n");
  CHECK_THROWS_AS(read_field(wrong), DataError);

  // 16 doubles follow the header; cut the last 3 bytes.
  const std::size_t payload = good.size() - 16 * 8;
  std::istringstream cut(good.substr(0, good.size() - 3));
  const std::string cut_msg = "from offset " + std::to_string(payload);
  CHECK_THROWS_WITH_AS(read_field(cut), doctest::Contains(cut_msg.c_str()), DataError);

  std::istringstream extra(good + "x");
  CHECK_THROWS_AS(read_field(extra), DataError);

  std::string nan = good;
  const double q = std::numeric_limits<double>::quiet_NaN();
  std::memcpy(nan.data() + payload + 5 * 8, &q, 8);
  std::istringstream bad(nan);
  const std::string nan_msg = "offset " + std::to_string(payload + 40);
  CHECK_THROWS_WITH_AS(read_field(bad), doctest::Contains(nan_msg.c_str()), DataError);

  std::istringstream dims("MFF1\n4 2 2 2 2\n0 0 0 0\n1 1 1 1\n");
  CHECK_THROWS_AS(read_field(dims), DataError);

  CHECK_THROWS_AS(read_field(temp_path("does_not_exist.mff")), DataError);
}

TEST_CASE("malformed sinograms are data errors") {
  const Sinogram s = sinogram_zero("family=euclidean", direction_set_circle(4), LambdaGrid{0.0, 0.5, 8});
  std::stringstream ss;
  write_sinogram(s, ss);
  const std::string good = ss.str();
  std::istringstream tag("MFS1\neuclidean\n" + good.substr(good.find('\n', 5) + 1));
  CHECK_THROWS_AS(read_sinogram(tag), DataError);
  std::istringstream cut(good.substr(0, good.size() - 8));
  CHECK_THROWS_AS(read_sinogram(cut), DataError);
  std::istringstream as_field(good);
  CHECK_THROWS_AS(read_field(as_field), DataError);
}

TEST_CASE("pgm export") {
  const GridSpec grid = GridSpec::box({3, 5}, Vector::Zero(2), Vector::Ones(2));
  const std::string path = temp_path("img.pgm");

  const PgmRange flat = export_pgm(field_new(grid, 2.5), path);
  CHECK(flat.min == 2.5);
  CHECK(flat.max == 2.5);
  int w = 0;
  int h = 0;
  for (int level : read_pgm(path, &w, &h)) CHECK(level == 32768);
  CHECK(w == 5);
  CHECK(h == 3);
  CHECK(slurp(path + ".range") == "min 2.5\nmax 2.5\n");

  ScalarField mask = field_new(grid, 0.0);
  mask[grid.ravel({1, 3})] = 1.0;
  export_pgm(mask, path);
  const std::vector<int> levels = read_pgm(path);
  for (std::size_t i = 0; i < levels.size(); ++i) CHECK(levels[i] == (i == grid.ravel({1, 3}) ? 65535 : 0));
  CHECK(slurp(path + ".range") == "min 0\nmax 1\n");

  CHECK_THROWS_AS(export_pgm(field_new(GridSpec::cube(3, 2, 0.0, 1.0), 0.0), path), ConfigError);
  std::filesystem::remove(path);
  std::filesystem::remove(path + ".range");
}

TEST_CASE("csv export") {
  const GridSpec grid = GridSpec::box({2, 3}, Vector::Zero(2), Vector::Ones(2));
  ScalarField f = field_new(grid, 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i) f[i] = 0.5 * static_cast<double>(i);
  const std::string path = temp_path("f.csv");
  export_csv(f, path);
  CHECK(slurp(path) == "0,0.5,1\n1.5,2,2.5\n");
  std::filesystem::remove(path);
}

TEST_CASE("reconstructed disc is visible in the image") {
  const double r = 0.5;
  const Sinogram s = analytic_sinogram_ellipses({EllipseSpec{Eigen::Vector2d(0, 0), Eigen::Vector2d(r, r), 0.0, 1.0}},
                                                direction_set_circle(180), LambdaGrid{-1.5, 3.0 / 255, 256});
  InversionConfig cfg;
  cfg.output_grid = GridSpec::cube(2, 128, -1.0, 1.0);
  const ScalarField rec = invert(s, EuclideanFamily(2), cfg);
  const std::string path = temp_path("disc.pgm");
  export_pgm(rec, path);
  // Threshold at half the sidecar range.
  std::size_t bright = 0;
  for (int level : read_pgm(path)) bright += level > 32767 ? 1 : 0;
  const double h = cfg.output_grid.spacing[0];
  CHECK(static_cast<double>(bright) * h * h == doctest::Approx(std::numbers::pi * r * r).epsilon(0.05));
  std::filesystem::remove(path);
  std::filesystem::remove(path + ".range");
}
