#pragma once

#include "mft/core.hpp"
#include "mft/geometry.hpp"
#include "mft/phantoms.hpp"

namespace mft {

struct ProjectOptions {
  /// Hat half-width in lambda bins (integer, >= 1). Widening keeps exact mass.
  int hat_widen = 1;
  /// Error threshold on the fraction of deposited mass falling outside the lambda grid.
  double max_dropped_fraction = 1e-3;
  int threads = 0;
};

struct ProjectReport {
  double total_mass = 0.0;    // integral of f dV_g over the domain cells
  double dropped_mass = 0.0;  // summed over directions, absolute
  double dropped_fraction = 0.0;
  std::size_t domain_cells = 0;
};

/// Splats each cell's mass f * c^n * cell_volume into the lambda bins around theta(x, omega)
/// with a unit-mass linear hat, so that sum_k value(k) * dlambda equals the deposited mass.
Sinogram project(const ScalarField& f, const GeneratingFamily& family, const DirectionSet& dirs,
                 const LambdaGrid& lambdas, const ProjectOptions& options = {},
                 ProjectReport* report = nullptr);

/// Exact Radon transform of a sum of ellipse indicators (Euclidean family, n = 2).
Sinogram analytic_sinogram_ellipses(const std::vector<EllipseSpec>& ellipses, const DirectionSet& dirs,
                                    const LambdaGrid& lambdas);

/// Exact Radon transform of untruncated Gaussians (Euclidean family, any n).
Sinogram analytic_sinogram_gaussians(const std::vector<GaussianSpec>& gaussians, const DirectionSet& dirs,
                                     const LambdaGrid& lambdas);

/// Center xi(omega) of the spheres of a spherical-means family (ellipsoid or trig curve).
Vector central_point(const GeneratingFamily& family, const VectorRef& omega);

/// Exact spherical means of untruncated Gaussians, n = 2 or 3, for the ellipsoid and
/// trig-curve families. With `g_data` the values are the surface integrals G f(lambda, omega)
/// over the sphere of radius sqrt(lambda); otherwise M f = G f / (2 sqrt(lambda)).
Sinogram analytic_spherical_means(const std::vector<GaussianSpec>& gaussians, const GeneratingFamily& family,
                                  const DirectionSet& dirs, const LambdaGrid& lambdas, bool g_data = false);

/// Surface integral of a Gaussian over the sphere of radius r at distance d from its center.
double gaussian_sphere_integral(const GaussianSpec& g, int n, double r, double d);

struct RangeReport {
  int k = 0;
  int degree = 0;           // m * k
  Vector moment;            // mu_k(omega_j)
  double total_energy = 0.0;
  double energy_above = 0.0;
  double relative_energy_above = 0.0;  // 0 when mu_k vanishes to rounding
  bool clipped = false;     // sinogram ends carry mass
};

/// mu_k(omega_j) = sum_i lambda_i^k M(lambda_i, omega_j) dlambda.
Vector range_moment(const Sinogram& s, int k);

/// Weighted least-squares fit of mu_k by polynomials in omega of total degree m * k; the
/// residual energy relative to sum_j w_j mu_k^2 measures the range-condition violation.
RangeReport range_check(const Sinogram& s, int k, int m);

}  // namespace mft
