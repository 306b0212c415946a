#include "mft/quadrature.hpp"

#include <algorithm>
#include <cmath>

namespace mft {

Vector fornberg_weights(double x0, const Vector& nodes, int d) {
  const int count = static_cast<int>(nodes.size());
  if (d < 0 || count <= d) throw ConfigError("fornberg_weights: need more nodes than the derivative order");
  Matrix c = Matrix::Zero(count, d + 1);
  double c1 = 1.0;
  double c4 = nodes[0] - x0;
  c(0, 0) = 1.0;
  for (int i = 1; i < count; ++i) {
    const int mn = std::min(i, d);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = nodes[i] - x0;
    for (int j = 0; j < i; ++j) {
      const double c3 = nodes[i] - nodes[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c(i, k) = c1 * (k * c(i - 1, k - 1) - c5 * c(i - 1, k)) / c2;
        c(i, 0) = -c1 * c5 * c(i - 1, 0) / c2;
      }
      for (int k = mn; k >= 1; --k) c(j, k) = (c4 * c(j, k) - k * c(j, k - 1)) / c3;
      c(j, 0) = c4 * c(j, 0) / c3;
    }
    c1 = c2;
  }
  return c.col(d);
}

// ------------------------------------------------------------ DerivativeFilter

DerivativeFilter::DerivativeFilter(int order, int accuracy) : order_(order), accuracy_(accuracy) {
  if (order < 1) throw ConfigError("derivative filter: order must be >= 1");
  if (accuracy != 2 && accuracy != 4) throw ConfigError("derivative filter: accuracy must be 2 or 4");
  const int width = 2 * ((order + 1) / 2) + accuracy - 1;
  const int half = width / 2;
  central_ = fornberg_weights(0.0, Vector::LinSpaced(width, -half, half), order);
  one_sided_width_ = order + accuracy;
  const Vector window = Vector::LinSpaced(one_sided_width_, 0, one_sided_width_ - 1);
  for (int i = 0; i < half; ++i) left_.push_back(fornberg_weights(i, window, order));
}

Vector DerivativeFilter::apply(const VectorRef& samples, double dlambda) const {
  const int count = static_cast<int>(samples.size());
  const int half = boundary_width();
  if (count < order_ + 4 || count < one_sided_width_ || count < central_width()) {
    throw ConfigError("derivative_lambda: " + std::to_string(count) + " samples are too few for order " +
                      std::to_string(order_));
  }
  if (!samples.allFinite()) throw DataError("derivative_lambda: non-finite samples");
  const double scale = std::pow(dlambda, -order_);
  Vector out(count);
  for (int i = half; i < count - half; ++i) {
    out[i] = central_.dot(samples.segment(i - half, central_width())) * scale;
  }
  const double sign = order_ % 2 == 0 ? 1.0 : -1.0;
  for (int i = 0; i < half; ++i) {
    out[i] = left_[i].dot(samples.head(one_sided_width_)) * scale;
    // Mirror image of the left stencil; odd derivatives flip sign under reflection.
    out[count - 1 - i] = sign * left_[i].dot(samples.tail(one_sided_width_).reverse()) * scale;
  }
  return out;
}

Matrix DerivativeFilter::apply_columns(const Matrix& samples, double dlambda) const {
  Matrix out(samples.rows(), samples.cols());
  for (Eigen::Index j = 0; j < samples.cols(); ++j) out.col(j) = apply(samples.col(j), dlambda);
  return out;
}

Vector derivative_lambda(const VectorRef& samples, const LambdaGrid& grid, int d, int accuracy) {
  grid.validate();
  if (samples.size() != grid.count) throw ConfigError("derivative_lambda: sample count does not match grid");
  return DerivativeFilter(d, accuracy).apply(samples, grid.dlambda);
}

// ------------------------------------------------------------------------ PV

namespace {

double xlogx(double s) { return s == 0.0 ? 0.0 : s * std::log(std::abs(s)); }

}  // namespace

double pv_hat(double s) {
  const double as = std::abs(s);
  if (as >= 16.0) {
    // sum_j 1 / (j (2j - 1) s^(2j - 1))
    const double inv2 = 1.0 / (s * s);
    double power = 1.0 / s;
    double sum = 0.0;
    for (int j = 1; j <= 12; ++j) {
      sum += power / (j * (2.0 * j - 1.0));
      power *= inv2;
    }
    return sum;
  }
  return xlogx(s + 1.0) - 2.0 * xlogx(s) + xlogx(s - 1.0);
}

double pv_left_half_hat(double s) {
  const double as = std::abs(s);
  if (as >= 16.0) {
    // sum_j (-1)^(j+1) / (j (j + 1) s^j)
    double power = 1.0 / s;
    double sum = 0.0;
    for (int j = 1; j <= 14; ++j) {
      sum += (j % 2 == 1 ? 1.0 : -1.0) * power / (j * (j + 1.0));
      power /= s;
    }
    return sum;
  }
  // Finite part at the endpoint pole.
  if (s == 0.0) return -1.0;
  if (s == -1.0) return -1.0;
  return (1.0 + s) * (std::log(std::abs(1.0 + s)) - std::log(as)) - 1.0;
}

double pv_convolve(const VectorRef& samples, const LambdaGrid& grid, double t) {
  if (samples.size() != grid.count) throw ConfigError("pv_convolve: sample count does not match grid");
  if (std::isnan(t)) throw DataError("pv_convolve: NaN evaluation point");
  if (!samples.allFinite()) throw DataError("pv_convolve: non-finite samples");
  const int count = grid.count;
  double sum = 0.0;
  for (int k = 0; k < count; ++k) {
    if (samples[k] != 0.0) sum += samples[k] * pv_hat((t - grid.at(k)) / grid.dlambda);
  }
  const double s0 = (t - grid.lambda0) / grid.dlambda;
  const double sl = (t - grid.back()) / grid.dlambda;
  if (samples[0] != 0.0) sum -= samples[0] * pv_left_half_hat(s0);
  if (samples[count - 1] != 0.0) sum += samples[count - 1] * pv_left_half_hat(-sl);
  return sum;
}

PVTable::Kernel PVTable::make_kernel(int count, int oversample) {
  if (oversample < 1) throw ConfigError("PVTable: oversample must be >= 1");
  Kernel k;
  k.count = count;
  k.oversample = oversample;
  k.offset = oversample * count;
  k.hat.resize(oversample * (2 * count + 1) + 1);
  for (Eigen::Index q = 0; q < k.hat.size(); ++q) {
    k.hat[q] = pv_hat(static_cast<double>(q - k.offset) / oversample);
  }
  return k;
}

PVTable::PVTable(const VectorRef& samples, const LambdaGrid& grid, int oversample)
    : PVTable(samples, grid, make_kernel(grid.count, oversample)) {}

PVTable::PVTable(const VectorRef& samples, const LambdaGrid& grid, const Kernel& kernel) {
  const int count = grid.count;
  if (samples.size() != count || kernel.count != count) throw ConfigError("PVTable: size mismatch");
  if (!samples.allFinite()) throw DataError("PVTable: non-finite samples");
  const int os = kernel.oversample;
  dt_ = grid.dlambda / os;
  t0_ = grid.lambda0 - grid.dlambda;
  const int m_count = os * (count + 1) + 1;
  values_ = Vector::Zero(m_count);
  int first = 0;
  while (first < count && samples[first] == 0.0) ++first;
  int last = count - 1;
  while (last >= first && samples[last] == 0.0) --last;
  const double* hat = kernel.hat.data() + kernel.offset;
  for (int m = 0; m < m_count; ++m) {
    // s = (t_m - lambda_k) / dlambda = (m - os (k + 1)) / os
    double sum = 0.0;
    const int base = m - os;
    for (int k = first; k <= last; ++k) sum += samples[k] * hat[base - os * k];
    const double s0 = static_cast<double>(m - os) / os;
    const double sl = static_cast<double>(m - os * count) / os;
    if (samples[0] != 0.0) sum -= samples[0] * pv_left_half_hat(s0);
    if (samples[count - 1] != 0.0) sum += samples[count - 1] * pv_left_half_hat(-sl);
    values_[m] = sum;
  }
}

double PVTable::operator()(double t) const {
  const double u = (t - t0_) / dt_;
  const auto last = values_.size() - 1;
  if (!(u >= 0.0) || u > static_cast<double>(last)) {
    throw DomainError("PVTable: evaluation point outside the tabulated range");
  }
  const auto i = std::min<Eigen::Index>(static_cast<Eigen::Index>(u), last - 1);
  const double w = u - static_cast<double>(i);
  return (1.0 - w) * values_[i] + w * values_[i + 1];
}

// ------------------------------------------------------------------- helpers

std::complex<double> complex_power_integrand(double u, double eps, int n) {
  if (!(eps > 0.0)) throw ConfigError("complex_power_integrand: eps must be > 0");
  const double r = std::hypot(u, eps);
  const double arg = std::atan2(-eps, u);
  return std::polar(std::pow(r, -n), -n * arg);
}

double interp_linear(const VectorRef& samples, const LambdaGrid& grid, double t, std::size_t* warnings) {
  if (std::isnan(t)) throw DataError("interp_linear: NaN evaluation point");
  const double u = (t - grid.lambda0) / grid.dlambda;
  const int last = grid.count - 1;
  if (u < 0.0 || u > last) {
    if (warnings != nullptr) ++*warnings;
    return 0.0;
  }
  const int i = std::min(static_cast<int>(u), last - 1);
  const double w = u - i;
  return (1.0 - w) * samples[i] + w * samples[i + 1];
}

}  // namespace mft
