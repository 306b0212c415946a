#pragma once

#include "mft/core.hpp"

#include <complex>
#include <cstddef>
#include <vector>

namespace mft {

/// Finite-difference weights for the d-th derivative at x0 over arbitrary distinct nodes.
Vector fornberg_weights(double x0, const Vector& nodes, int d);

/// d-th lambda-derivative filter on a uniform grid. Central stencils of
/// 2*floor((d+1)/2) + accuracy - 1 points in the interior, shifted one-sided stencils of
/// d + accuracy points near the ends.
class DerivativeFilter {
 public:
  DerivativeFilter(int order, int accuracy = 2);

  int order() const { return order_; }
  int accuracy() const { return accuracy_; }
  int central_width() const { return static_cast<int>(central_.size()); }
  /// Samples on each side that use one-sided stencils.
  int boundary_width() const { return central_width() / 2; }

  Vector apply(const VectorRef& samples, double dlambda) const;
  /// Filters every column of `samples`.
  Matrix apply_columns(const Matrix& samples, double dlambda) const;

 private:
  int order_;
  int accuracy_;
  Vector central_;                   // unit-spacing weights, centered
  std::vector<Vector> left_;         // left_[i]: stencil for sample i from the window start
  int one_sided_width_;
};

Vector derivative_lambda(const VectorRef& samples, const LambdaGrid& grid, int d, int accuracy = 2);

/// PV integral of the piecewise-linear interpolant g of `samples` against 1/(t - lambda) over
/// [lambda0, lambda_end], integrated cell-by-cell in closed form.
double pv_convolve(const VectorRef& samples, const LambdaGrid& grid, double t);

/// Closed-form PV transforms of the unit hat and the left half-hat (unit spacing, pole at s).
double pv_hat(double s);
double pv_left_half_hat(double s);

/// pv_convolve tabulated on a t-grid `oversample` times finer than the lambda grid, spanning
/// [lambda0 - dlambda, lambda_end + dlambda]; lookups interpolate linearly.
class PVTable {
 public:
  PVTable() = default;
  PVTable(const VectorRef& samples, const LambdaGrid& grid, int oversample = 4);

  double operator()(double t) const;
  double t0() const { return t0_; }
  double dt() const { return dt_; }
  const Vector& values() const { return values_; }

  /// Shared kernel of pv_hat at the oversampled offsets; built once per (count, oversample).
  struct Kernel {
    int count = 0;
    int oversample = 0;
    Vector hat;  // hat[q] = pv_hat(q / oversample - offset)
    int offset = 0;
  };
  static Kernel make_kernel(int count, int oversample);
  PVTable(const VectorRef& samples, const LambdaGrid& grid, const Kernel& kernel);

 private:
  double t0_ = 0.0;
  double dt_ = 1.0;
  Vector values_;
};

/// (u - i eps)^(-n) in polar form.
std::complex<double> complex_power_integrand(double u, double eps, int n);

/// Linear interpolation; outside [lambda0, lambda_end] returns 0 and bumps *warnings.
double interp_linear(const VectorRef& samples, const LambdaGrid& grid, double t,
                     std::size_t* warnings = nullptr);

/// Richardson table for values at eps_k = eps0 * 2^-k with error expansion in powers of eps.
template <typename T>
T richardson(const std::vector<T>& values) {
  std::vector<T> row = values;
  double factor = 2.0;
  for (std::size_t level = 1; level < row.size(); ++level) {
    for (std::size_t k = row.size() - 1; k >= level; --k) {
      row[k] = (factor * row[k] - row[k - 1]) / (factor - 1.0);
    }
    factor *= 2.0;
  }
  return row.back();
}

}  // namespace mft
