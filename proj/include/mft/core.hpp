#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mft {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using VectorRef = Eigen::Ref<const Eigen::VectorXd>;

/* Error categories map onto the CLI exit codes (1 usage, 2 data, 3 numerical). */
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

constexpr int kMaxDiagnosticDim = 5;
constexpr int kMaxReconstructionDim = 3;

/// Surface area of the unit sphere S^{n-1} in R^n.
double sphere_area(int n);

/// Uniform cell-centered grid over a box. Point i sits at origin + (i + 0.5) * spacing.
struct GridSpec {
  int n = 0;
  std::vector<int> dims;
  Vector origin;
  Vector spacing;

  /// Throws ConfigError when an invariant is violated.
  void validate() const;
  std::size_t size() const;
  double cell_volume() const;
  double max_spacing() const;

  /// Multi-index of the flat (row-major, last axis fastest) index.
  std::vector<int> unravel(std::size_t flat) const;
  std::size_t ravel(const std::vector<int>& index) const;
  Vector point(std::size_t flat) const;
  void point(std::size_t flat, Eigen::Ref<Vector> out) const;

  /// Cube grid: `count` cells per axis covering [lo, hi]^n.
  static GridSpec cube(int n, int count, double lo, double hi);
  /// Per-axis box [lo_i, hi_i] with dims[i] cells.
  static GridSpec box(const std::vector<int>& dims, const Vector& lo, const Vector& hi);

  bool operator==(const GridSpec& other) const;
};

struct ScalarField {
  GridSpec grid;
  Vector values;

  void validate() const;
  double& operator[](std::size_t i) { return values[static_cast<Eigen::Index>(i)]; }
  double operator[](std::size_t i) const { return values[static_cast<Eigen::Index>(i)]; }
};

ScalarField field_new(const GridSpec& grid, double fill);

/// Samples `fn` at every cell center.
ScalarField field_from(const GridSpec& grid, const std::function<double(const Vector&)>& fn);

/// Quadrature rule on the unit sphere: nodes are the columns of an n x N matrix.
struct DirectionSet {
  Matrix nodes;
  Vector weights;

  int dim() const { return static_cast<int>(nodes.rows()); }
  Eigen::Index size() const { return nodes.cols(); }
  void validate() const;
};

/// Uniform rule on S^1: phi_j = 2 pi j / count, equal weights.
DirectionSet direction_set_circle(int count);

/// Product rule on S^{n-1}, n >= 3: Gauss-Gegenbauer in t = <omega, e_n> with weight
/// (1 - t^2)^{(n-3)/2} times the rule on S^{n-2} (uniform azimuth at the bottom).
/// For n = 3 this is Gauss-Legendre in the polar cosine.
DirectionSet direction_set_sphere(int n, int polar_count, int azimuth_count);

/// Circle for n = 2, product rule otherwise.
DirectionSet direction_set(int n, int polar_count, int azimuth_count);

/// Reflects the rule so that its polar axis (e_n) maps onto `axis`.
DirectionSet align_polar_axis(const DirectionSet& dirs, const Vector& axis);

/// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int count, Vector& nodes, Vector& weights);

/// Gauss rule for the weight (1 - t^2)^alpha on [-1, 1] (Golub-Welsch).
void gauss_gegenbauer(int count, double alpha, Vector& nodes, Vector& weights);

/// Lifts a rule on S^{n-2} to S^{n-1} with a polar Gauss-Gegenbauer factor of `polar_count`
/// nodes; the new polar axis is e_n.
DirectionSet direction_set_extend(const DirectionSet& sub, int polar_count);

struct LambdaGrid {
  double lambda0 = 0.0;
  double dlambda = 1.0;
  int count = 0;

  void validate() const;
  double at(int k) const { return lambda0 + dlambda * k; }
  double back() const { return at(count - 1); }
  Vector samples() const;
};

/// Sampled transform values; column j holds the lambda profile of direction j.
struct Sinogram {
  std::string family_tag;
  DirectionSet directions;
  LambdaGrid lambdas;
  Matrix values;

  void validate() const;
  Eigen::Index direction_count() const { return values.cols(); }
};

Sinogram sinogram_zero(std::string tag, DirectionSet dirs, LambdaGrid lambdas);

/// Worker count: MFT_THREADS when set, else the hardware concurrency.
int default_threads();

/// Splits [0, count) into contiguous blocks, one per worker; body(begin, end) runs on each.
/// Exceptions from workers are rethrown on the calling thread.
void parallel_for(std::size_t count, const std::function<void(std::size_t, std::size_t)>& body,
                  int threads = 0);

}  // namespace mft
