#include "mft/core.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

namespace mft {

double sphere_area(int n) {
  if (n < 1) throw ConfigError("sphere_area: dimension must be >= 1");
  return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

// ---------------------------------------------------------------- GridSpec

void GridSpec::validate() const {
  if (n < 1 || n > kMaxDiagnosticDim) {
    throw ConfigError("grid: dimension " + std::to_string(n) + " outside [1, 5]");
  }
  if (static_cast<int>(dims.size()) != n || origin.size() != n || spacing.size() != n) {
    throw ConfigError("grid: dims/origin/spacing must all have length n");
  }
  for (int i = 0; i < n; ++i) {
    if (dims[i] < 2) throw ConfigError("grid: dims[" + std::to_string(i) + "] < 2");
    if (!(spacing[i] > 0.0) || !std::isfinite(spacing[i])) {
      throw ConfigError("grid: spacing[" + std::to_string(i) + "] must be positive");
    }
    if (!std::isfinite(origin[i])) throw ConfigError("grid: non-finite origin");
  }
}

std::size_t GridSpec::size() const {
  std::size_t total = 1;
  for (int d : dims) total *= static_cast<std::size_t>(d);
  return total;
}

double GridSpec::cell_volume() const { return spacing.prod(); }

double GridSpec::max_spacing() const { return spacing.maxCoeff(); }

std::vector<int> GridSpec::unravel(std::size_t flat) const {
  std::vector<int> index(n);
  for (int axis = n - 1; axis >= 0; --axis) {
    index[axis] = static_cast<int>(flat % dims[axis]);
    flat /= dims[axis];
  }
  return index;
}

std::size_t GridSpec::ravel(const std::vector<int>& index) const {
  std::size_t flat = 0;
  for (int axis = 0; axis < n; ++axis) flat = flat * dims[axis] + index[axis];
  return flat;
}

Vector GridSpec::point(std::size_t flat) const {
  Vector x(n);
  point(flat, x);
  return x;
}

void GridSpec::point(std::size_t flat, Eigen::Ref<Vector> out) const {
  for (int axis = n - 1; axis >= 0; --axis) {
    const auto i = static_cast<double>(flat % dims[axis]);
    flat /= dims[axis];
    out[axis] = origin[axis] + (i + 0.5) * spacing[axis];
  }
}

GridSpec GridSpec::cube(int n, int count, double lo, double hi) {
  return box(std::vector<int>(n, count), Vector::Constant(n, lo), Vector::Constant(n, hi));
}

GridSpec GridSpec::box(const std::vector<int>& dims, const Vector& lo, const Vector& hi) {
  GridSpec g;
  g.n = static_cast<int>(dims.size());
  g.dims = dims;
  if (lo.size() != g.n || hi.size() != g.n) throw ConfigError("grid: bounds length mismatch");
  g.origin = lo;
  g.spacing.resize(g.n);
  for (int i = 0; i < g.n; ++i) {
    if (dims[i] < 1) throw ConfigError("grid: non-positive dimension");
    g.spacing[i] = (hi[i] - lo[i]) / dims[i];
  }
  g.validate();
  return g;
}

bool GridSpec::operator==(const GridSpec& other) const {
  return n == other.n && dims == other.dims && origin == other.origin &&
         spacing == other.spacing;
}

// ------------------------------------------------------------- ScalarField

void ScalarField::validate() const {
  grid.validate();
  if (static_cast<std::size_t>(values.size()) != grid.size()) {
    throw DataError("field: value count does not match grid");
  }
  if (!values.allFinite()) throw DataError("field: non-finite values");
}

ScalarField field_new(const GridSpec& grid, double fill) {
  grid.validate();
  return ScalarField{grid, Vector::Constant(static_cast<Eigen::Index>(grid.size()), fill)};
}

ScalarField field_from(const GridSpec& grid, const std::function<double(const Vector&)>& fn) {
  ScalarField f = field_new(grid, 0.0);
  Vector x(grid.n);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid.point(i, x);
    f[i] = fn(x);
  }
  return f;
}

// ------------------------------------------------------------ DirectionSet

void DirectionSet::validate() const {
  const int n = dim();
  if (n < 2 || n > kMaxDiagnosticDim) throw ConfigError("directions: unsupported dimension");
  if (weights.size() != nodes.cols()) throw ConfigError("directions: weight count mismatch");
  for (Eigen::Index j = 0; j < nodes.cols(); ++j) {
    if (std::abs(nodes.col(j).norm() - 1.0) > 1e-12) {
      throw ConfigError("directions: node " + std::to_string(j) + " is not a unit vector");
    }
    if (!(weights[j] > 0.0)) throw ConfigError("directions: non-positive weight");
  }
  const double area = sphere_area(n);
  if (std::abs(weights.sum() - area) > 1e-9 * area) {
    throw ConfigError("directions: weights do not sum to the sphere area");
  }
}

DirectionSet direction_set_circle(int count) {
  if (count < 4) throw ConfigError("direction_set_circle: count must be >= 4");
  DirectionSet d;
  d.nodes.resize(2, count);
  const double step = 2.0 * std::numbers::pi / count;
  for (int j = 0; j < count; ++j) {
    d.nodes(0, j) = std::cos(step * j);
    d.nodes(1, j) = std::sin(step * j);
  }
  d.weights = Vector::Constant(count, step);
  return d;
}

// Golub-Welsch for the symmetric weight (1 - t^2)^alpha on [-1, 1]. Eigenvalues come from
// the tridiagonal solver; weights from the Christoffel function, which avoids eigenvectors.
void gauss_gegenbauer(int count, double alpha, Vector& nodes, Vector& weights) {
  if (count < 1 || !(alpha > -1.0)) throw ConfigError("gauss_gegenbauer: need count >= 1 and alpha > -1");
  Vector diag = Vector::Zero(count);
  Vector sub(std::max(count - 1, 0));
  for (int k = 1; k < count; ++k) {
    const double kk = k;
    sub[k - 1] = std::sqrt(kk * (kk + 2.0 * alpha) / (4.0 * (kk + alpha) * (kk + alpha) - 1.0));
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  nodes = solver.eigenvalues();
  // mu0 = int (1 - t^2)^alpha dt
  const double mu0 = std::sqrt(std::numbers::pi) * std::tgamma(alpha + 1.0) / std::tgamma(alpha + 1.5);
  weights.resize(count);
  for (int i = 0; i < count; ++i) {
    const double t = nodes[i];
    double prev = 0.0;
    double cur = 1.0 / std::sqrt(mu0);
    double sum = cur * cur;
    for (int k = 0; k + 1 < count; ++k) {
      const double next = (t * cur - (k > 0 ? sub[k - 1] * prev : 0.0)) / sub[k];
      prev = cur;
      cur = next;
      sum += cur * cur;
    }
    weights[i] = 1.0 / sum;
  }
}

void gauss_legendre(int count, Vector& nodes, Vector& weights) {
  if (count < 1) throw ConfigError("gauss_legendre: count must be >= 1");
  gauss_gegenbauer(count, 0.0, nodes, weights);
}

DirectionSet direction_set_extend(const DirectionSet& sub, int polar_count) {
  const int n = sub.dim() + 1;
  if (polar_count < 1) throw ConfigError("direction_set_extend: polar_count must be >= 1");
  Vector t, wt;
  gauss_gegenbauer(polar_count, 0.5 * (n - 3), t, wt);
  DirectionSet d;
  const Eigen::Index m = sub.size();
  d.nodes.resize(n, polar_count * m);
  d.weights.resize(polar_count * m);
  for (int i = 0; i < polar_count; ++i) {
    const double s = std::sqrt(std::max(0.0, 1.0 - t[i] * t[i]));
    for (Eigen::Index j = 0; j < m; ++j) {
      const Eigen::Index col = i * m + j;
      d.nodes.col(col).head(n - 1) = s * sub.nodes.col(j);
      d.nodes(n - 1, col) = t[i];
      d.weights[col] = wt[i] * sub.weights[j];
    }
  }
  // Renormalize the rounding drift of sqrt(1 - t^2).
  for (Eigen::Index j = 0; j < d.nodes.cols(); ++j) d.nodes.col(j).normalize();
  return d;
}

DirectionSet direction_set_sphere(int n, int polar_count, int azimuth_count) {
  if (n < 3 || n > kMaxDiagnosticDim) {
    throw ConfigError("direction_set_sphere: unsupported dimension " + std::to_string(n));
  }
  if (polar_count < 4 || azimuth_count < 4) {
    throw ConfigError("direction_set_sphere: counts must be >= 4");
  }
  const DirectionSet sub = n == 3 ? direction_set_circle(azimuth_count)
                                  : direction_set_sphere(n - 1, polar_count, azimuth_count);
  return direction_set_extend(sub, polar_count);
}

DirectionSet direction_set(int n, int polar_count, int azimuth_count) {
  if (n == 2) return direction_set_circle(azimuth_count);
  return direction_set_sphere(n, polar_count, azimuth_count);
}

DirectionSet align_polar_axis(const DirectionSet& dirs, const Vector& axis) {
  const int n = dirs.dim();
  if (axis.size() != n) throw ConfigError("align_polar_axis: axis dimension mismatch");
  const double norm = axis.norm();
  if (!(norm > 0.0)) return dirs;
  Vector u = Vector::Unit(n, n - 1) - axis / norm;
  const double uu = u.squaredNorm();
  if (uu < 1e-30) return dirs;
  DirectionSet out = dirs;
  // Householder reflection I - 2 u u^T / |u|^2 maps e_n onto the normalized axis.
  out.nodes -= (2.0 / uu) * u * (u.transpose() * dirs.nodes);
  return out;
}

// -------------------------------------------------------------- LambdaGrid

void LambdaGrid::validate() const {
  if (!(dlambda > 0.0) || !std::isfinite(dlambda)) throw ConfigError("lambda grid: dlambda must be > 0");
  if (count < 8) throw ConfigError("lambda grid: count must be >= 8");
  if (!std::isfinite(lambda0)) throw ConfigError("lambda grid: non-finite lambda0");
}

Vector LambdaGrid::samples() const {
  return Vector::LinSpaced(count, lambda0, lambda0 + dlambda * (count - 1));
}

// ---------------------------------------------------------------- Sinogram

void Sinogram::validate() const {
  lambdas.validate();
  if (values.rows() != lambdas.count || values.cols() != directions.size()) {
    throw DataError("sinogram: value matrix does not match directions x lambdas");
  }
  if (!values.allFinite()) throw DataError("sinogram: non-finite values");
}

Sinogram sinogram_zero(std::string tag, DirectionSet dirs, LambdaGrid lambdas) {
  lambdas.validate();
  Sinogram s;
  s.family_tag = std::move(tag);
  s.values = Matrix::Zero(lambdas.count, dirs.size());
  s.directions = std::move(dirs);
  s.lambdas = lambdas;
  return s;
}

// ---------------------------------------------------------------- threading

int default_threads() {
  if (const char* env = std::getenv("MFT_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, const std::function<void(std::size_t, std::size_t)>& body, int threads) {
  if (count == 0) return;
  const std::size_t workers =
      std::min<std::size_t>(count, static_cast<std::size_t>(threads > 0 ? threads : default_threads()));
  if (workers <= 1) {
    body(0, count);
    return;
  }
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex guard;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = count * w / workers;
    const std::size_t end = count * (w + 1) / workers;
    pool.emplace_back([&, begin, end] {
      try {
        body(begin, end);
      } catch (...) {
        std::lock_guard<std::mutex> lock(guard);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace mft
