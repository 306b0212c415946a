#pragma once

#include "mft/core.hpp"

#include <string>
#include <vector>

namespace mft {

/// Rotated 2D ellipse indicator; `angle` rotates the first half-axis from e_1 (radians).
struct EllipseSpec {
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  Eigen::Vector2d axes = Eigen::Vector2d::Ones();
  double angle = 0.0;
  double amplitude = 1.0;
};

/// amplitude * exp(-|x - c|^2 / (2 s^2)), truncated to 0 beyond 6 s.
struct GaussianSpec {
  Vector center;
  double width = 0.1;
  double amplitude = 1.0;
};

struct PhantomSpec {
  std::vector<EllipseSpec> ellipses;
  std::vector<GaussianSpec> gaussians;
};

constexpr double kGaussianTruncation = 6.0;

bool ellipse_contains(const EllipseSpec& e, const Eigen::Vector2d& x);
double gaussian_value(const GaussianSpec& g, const VectorRef& x);

ScalarField phantom_ellipses(const std::vector<EllipseSpec>& spec, const GridSpec& grid);
ScalarField phantom_gaussians(const std::vector<GaussianSpec>& spec, const GridSpec& grid);
ScalarField phantom(const PhantomSpec& spec, const GridSpec& grid);

/// Pointwise truth of the continuous phantom (no truncation for Gaussians).
double phantom_value(const PhantomSpec& spec, const VectorRef& x);

/// One shape per line (or ';'-separated inline):
///   ellipse cx cy ax ay angle amp
///   gaussian c1 .. cn s amp
/// Blank lines and '#' comments are ignored.
PhantomSpec parse_phantom_spec(const std::string& text, int n);

struct ErrorMetrics {
  double rel_l2 = 0.0;
  double max_abs = 0.0;
  double mean = 0.0;
  std::size_t count = 0;
};

/// Metrics of f - g over cells where mask > 0.5 (all cells when mask is null).
ErrorMetrics error_metrics(const ScalarField& f, const ScalarField& g, const ScalarField* mask = nullptr);

}  // namespace mft
