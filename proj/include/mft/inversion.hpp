#pragma once

#include "mft/core.hpp"
#include "mft/geometry.hpp"

namespace mft {

struct InversionConfig {
  GridSpec output_grid;
  int derivative_accuracy = 2;
  /// Exclusion radius around the central set of spherical-means families; negative selects
  /// 2 * max spacing of the output grid.
  double mask_margin = -1.0;
  /// Even n: oversampling of the tabulated PV integral; 0 evaluates pv_convolve exactly.
  int pv_oversample = 4;
  /// Error threshold on the fraction of (point, direction) evaluations outside the lambda grid.
  double max_coverage_fraction = 1e-2;
  int threads = 0;
};

struct InversionReport {
  ScalarField mask;  // 1 where reconstructed, 0 where masked
  std::size_t masked_points = 0;
  double masked_fraction = 0.0;
  std::size_t coverage_warnings = 0;
  double coverage_fraction = 0.0;
  double dn_min = 0.0;
  double dn_max = 0.0;
  double constant = 0.0;
  bool even = true;
};

/// D_n(x) = (1 / |S^{n-1}|) sum_j w_j / |grad_g theta(x, omega_j)|^n, normalized by sum_j w_j.
double compute_dn(const GeneratingFamily& family, const VectorRef& x, const DirectionSet& dirs);

/// Real constant of the even-n formula: -1 / (2 pi i)^n = -(-1)^{n/2} (2 pi)^{-n}.
double even_constant(int n);
/// Real constant of the odd-n formula: 1 / (2 (2 pi i)^{n-1}).
double odd_constant(int n);

/// f(x) = c_n / D_n(x) * sum_j w_j PV int d^{n-1}_lambda M(lambda, omega_j) / (theta(x, omega_j) - lambda).
ScalarField invert_even(const Sinogram& s, const GeneratingFamily& family, const InversionConfig& cfg,
                        InversionReport* report = nullptr);

/// f(x) = c_n / D_n(x) * sum_j w_j d^{n-1}_lambda M(theta(x, omega_j), omega_j).
ScalarField invert_odd(const Sinogram& s, const GeneratingFamily& family, const InversionConfig& cfg,
                       InversionReport* report = nullptr);

/// Parity dispatch; reconstruction is limited to n <= 3.
ScalarField invert(const Sinogram& s, const GeneratingFamily& family, const InversionConfig& cfg,
                   InversionReport* report = nullptr);

/// Spherical means: M = G / (2 sqrt(lambda)), zero for lambda <= 0.
Sinogram spherical_g_to_m(const Sinogram& g);

/// Equidistant family: |grad_g theta| = sqrt(lambda^2 - p lambda + 1/4) on level sets, so the
/// hyperbolic-metric transform is H f / sqrt(lambda^2 - p lambda + 1/4).
double equidistant_level_weight(double lambda, double p);
Sinogram equidistant_h_to_m(const Sinogram& h, double p);
Sinogram equidistant_m_to_h(const Sinogram& m, double p);
/// f_1 = ((1 - |x|^2) / 2) f and f_2 = ((1 - |x|^2) / 2)^n f on the unit ball (zero outside).
ScalarField equidistant_f1(const ScalarField& f);
ScalarField equidistant_f2(const ScalarField& f);

}  // namespace mft
