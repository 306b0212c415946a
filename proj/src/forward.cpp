#include "mft/forward.hpp"

#include <Eigen/QR>

#include <cmath>
#include <numbers>

namespace mft {

Sinogram project(const ScalarField& f, const GeneratingFamily& family, const DirectionSet& dirs,
                 const LambdaGrid& lambdas, const ProjectOptions& options, ProjectReport* report) {
  f.validate();
  dirs.validate();
  lambdas.validate();
  const int n = family.dim();
  if (f.grid.n != n || dirs.dim() != n) throw ConfigError("project: field, family and directions differ in dimension");
  if (options.hat_widen < 1) throw ConfigError("project: hat_widen must be >= 1");

  const GridSpec& grid = f.grid;
  const double cell = grid.cell_volume();
  std::vector<Eigen::Index> cells;
  std::vector<double> masses;
  std::size_t domain_cells = 0;
  Vector x(n);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid.point(i, x);
    if (!family.in_domain(x)) continue;
    ++domain_cells;
    if (f[i] == 0.0) continue;
    cells.push_back(static_cast<Eigen::Index>(i));
    masses.push_back(f[i] * family.volume_density(x) * cell);
  }
  if (domain_cells == 0) throw DomainError("project: no grid cell lies in the family domain");

  const auto count = static_cast<Eigen::Index>(cells.size());
  Matrix points(n, count);
  for (Eigen::Index c = 0; c < count; ++c) grid.point(static_cast<std::size_t>(cells[c]), points.col(c));
  const Eigen::Map<const Vector> mass(masses.data(), count);
  double total_abs = mass.cwiseAbs().sum();

  Sinogram s = sinogram_zero(family.tag(), dirs, lambdas);
  const int widen = options.hat_widen;
  const int bins = lambdas.count;
  const double inv_dl = 1.0 / lambdas.dlambda;
  const double hat_norm = 1.0 / (widen * lambdas.dlambda);

  const auto ndirs = static_cast<std::size_t>(dirs.size());
  std::vector<double> dropped(ndirs, 0.0);
  parallel_for(
      ndirs,
      [&](std::size_t begin, std::size_t end) {
        Vector th(count);
        for (std::size_t j = begin; j < end; ++j) {
          const auto col = static_cast<Eigen::Index>(j);
          family.theta_over_points(points, dirs.nodes.col(col), th);
          double* row = s.values.col(col).data();
          double lost = 0.0;
          for (Eigen::Index c = 0; c < count; ++c) {
            const double u = (th[c] - lambdas.lambda0) * inv_dl;
            const double m = mass[c];
            const auto k0 = static_cast<long>(std::floor(u));
            if (widen == 1) {
              const double w1 = u - static_cast<double>(k0);
              if (k0 >= 0 && k0 < bins) row[k0] += m * (1.0 - w1) * hat_norm; else lost += std::abs(m) * (1.0 - w1);
              if (k0 + 1 >= 0 && k0 + 1 < bins) row[k0 + 1] += m * w1 * hat_norm; else lost += std::abs(m) * w1;
              continue;
            }
            for (long k = k0 - widen + 1; k <= k0 + widen; ++k) {
              const double w = 1.0 - std::abs(u - static_cast<double>(k)) / widen;
              if (w <= 0.0) continue;
              if (k >= 0 && k < bins) {
                row[k] += m * w * hat_norm;
              } else {
                lost += std::abs(m) * w / widen;
              }
            }
          }
          dropped[j] = lost;
        }
      },
      options.threads);

  double dropped_total = 0.0;
  for (double d : dropped) dropped_total += d;
  const double fraction = total_abs > 0.0 ? dropped_total / (total_abs * static_cast<double>(ndirs)) : 0.0;
  if (report != nullptr) {
    report->total_mass = mass.sum();
    report->dropped_mass = dropped_total;
    report->dropped_fraction = fraction;
    report->domain_cells = domain_cells;
  }
  if (fraction > options.max_dropped_fraction) {
    throw NumericalError("project: lambda grid clips " + std::to_string(100.0 * fraction) +
                         "% of the deposited mass; widen the lambda range");
  }
  return s;
}

Sinogram analytic_sinogram_ellipses(const std::vector<EllipseSpec>& ellipses, const DirectionSet& dirs,
                                    const LambdaGrid& lambdas) {
  if (dirs.dim() != 2) throw ConfigError("analytic_sinogram_ellipses: n must be 2");
  Sinogram s = sinogram_zero(format_family_tag(EuclideanHyperplane{}), dirs, lambdas);
  for (const auto& e : ellipses) {
    const Eigen::Vector2d u(std::cos(e.angle), std::sin(e.angle));
    const Eigen::Vector2d v(-u.y(), u.x());
    const double ab = e.axes.x() * e.axes.y();
    for (Eigen::Index j = 0; j < dirs.size(); ++j) {
      const Eigen::Vector2d w = dirs.nodes.col(j);
      const double a2 = std::pow(e.axes.x() * w.dot(u), 2) + std::pow(e.axes.y() * w.dot(v), 2);
      const double shift = w.dot(e.center);
      for (int k = 0; k < lambdas.count; ++k) {
        const double q = lambdas.at(k) - shift;
        if (q * q < a2) s.values(k, j) += e.amplitude * 2.0 * ab * std::sqrt(a2 - q * q) / a2;
      }
    }
  }
  return s;
}

Sinogram analytic_sinogram_gaussians(const std::vector<GaussianSpec>& gaussians, const DirectionSet& dirs,
                                     const LambdaGrid& lambdas) {
  const int n = dirs.dim();
  Sinogram s = sinogram_zero(format_family_tag(EuclideanHyperplane{}), dirs, lambdas);
  for (const auto& g : gaussians) {
    if (g.center.size() != n) throw ConfigError("analytic_sinogram_gaussians: center dimension mismatch");
    const double s2 = g.width * g.width;
    const double scale = g.amplitude * std::pow(2.0 * std::numbers::pi * s2, 0.5 * (n - 1));
    for (Eigen::Index j = 0; j < dirs.size(); ++j) {
      const double shift = dirs.nodes.col(j).dot(g.center);
      for (int k = 0; k < lambdas.count; ++k) {
        const double q = lambdas.at(k) - shift;
        s.values(k, j) += scale * std::exp(-0.5 * q * q / s2);
      }
    }
  }
  return s;
}

Vector central_point(const GeneratingFamily& family, const VectorRef& omega) {
  if (const auto* e = dynamic_cast<const EllipsoidFamily*>(&family)) {
    return e->half_axes().cwiseProduct(omega);
  }
  if (const auto* t = dynamic_cast<const TrigCurveFamily*>(&family)) {
    return t->curve()(std::atan2(omega[1], omega[0]));
  }
  throw ConfigError("central_point: family has no central set");
}

double gaussian_sphere_integral(const GaussianSpec& g, int n, double r, double d) {
  const double s2 = g.width * g.width;
  if (r <= 0.0) return 0.0;
  if (n == 2) {
    // 2 pi A r exp(-(d - r)^2 / 2s^2) [e^{-z} I0(z)], z = r d / s^2
    const double z = r * d / s2;
    double scaled_i0;
    if (z > 500.0) {
      scaled_i0 = (1.0 + 1.0 / (8.0 * z) + 9.0 / (128.0 * z * z)) / std::sqrt(2.0 * std::numbers::pi * z);
    } else {
      scaled_i0 = std::exp(-z) * std::cyl_bessel_i(0.0, z);
    }
    return 2.0 * std::numbers::pi * g.amplitude * r * std::exp(-0.5 * (d - r) * (d - r) / s2) * scaled_i0;
  }
  if (n == 3) {
    if (d < 1e-12) return 4.0 * std::numbers::pi * g.amplitude * r * r * std::exp(-0.5 * r * r / s2);
    return 2.0 * std::numbers::pi * g.amplitude * r * s2 / d *
           (std::exp(-0.5 * (d - r) * (d - r) / s2) - std::exp(-0.5 * (d + r) * (d + r) / s2));
  }
  throw ConfigError("gaussian_sphere_integral: n must be 2 or 3");
}

Sinogram analytic_spherical_means(const std::vector<GaussianSpec>& gaussians, const GeneratingFamily& family,
                                  const DirectionSet& dirs, const LambdaGrid& lambdas, bool g_data) {
  const int n = family.dim();
  if (dirs.dim() != n) throw ConfigError("analytic_spherical_means: direction dimension mismatch");
  Sinogram s = sinogram_zero(family.tag(), dirs, lambdas);
  for (Eigen::Index j = 0; j < dirs.size(); ++j) {
    const Vector xi = central_point(family, dirs.nodes.col(j));
    for (const auto& g : gaussians) {
      if (g.center.size() != n) throw ConfigError("analytic_spherical_means: center dimension mismatch");
      const double d = (xi - g.center).norm();
      for (int k = 0; k < lambdas.count; ++k) {
        const double lambda = lambdas.at(k);
        if (lambda <= 0.0) continue;
        const double r = std::sqrt(lambda);
        const double gv = gaussian_sphere_integral(g, n, r, d);
        s.values(k, j) += g_data ? gv : gv / (2.0 * r);
      }
    }
  }
  return s;
}

Vector range_moment(const Sinogram& s, int k) {
  if (k < 0) throw ConfigError("range_moment: k must be >= 0");
  const Vector lam = s.lambdas.samples();
  const Vector weight = lam.array().pow(k) * s.lambdas.dlambda;
  return s.values.transpose() * weight;
}

namespace {

void monomial_exponents(int n, int degree, std::vector<int>& current, std::vector<std::vector<int>>& out) {
  if (static_cast<int>(current.size()) == n) {
    out.push_back(current);
    return;
  }
  int used = 0;
  for (int e : current) used += e;
  for (int e = 0; e + used <= degree; ++e) {
    current.push_back(e);
    monomial_exponents(n, degree, current, out);
    current.pop_back();
  }
}

}  // namespace

RangeReport range_check(const Sinogram& s, int k, int m) {
  s.validate();
  if (m < 1) throw ConfigError("range_check: m must be >= 1");
  RangeReport rep;
  rep.k = k;
  rep.degree = m * k;
  rep.moment = range_moment(s, k);

  const double peak = s.values.cwiseAbs().maxCoeff();
  const auto last = s.values.rows() - 1;
  rep.clipped = peak > 0.0 && std::max(s.values.row(0).cwiseAbs().maxCoeff(),
                                       s.values.row(last).cwiseAbs().maxCoeff()) > 1e-9 * peak;

  std::vector<std::vector<int>> exps;
  std::vector<int> cur;
  monomial_exponents(s.directions.dim(), rep.degree, cur, exps);
  const Eigen::Index ndirs = s.directions.size();
  Matrix a(ndirs, static_cast<Eigen::Index>(exps.size()));
  const Vector sw = s.directions.weights.cwiseSqrt();
  for (Eigen::Index j = 0; j < ndirs; ++j) {
    for (std::size_t c = 0; c < exps.size(); ++c) {
      double v = 1.0;
      for (std::size_t axis = 0; axis < exps[c].size(); ++axis) {
        v *= std::pow(s.directions.nodes(static_cast<Eigen::Index>(axis), j), exps[c][axis]);
      }
      a(j, static_cast<Eigen::Index>(c)) = v * sw[j];
    }
  }
  const Vector b = rep.moment.cwiseProduct(sw);
  const Vector coef = a.colPivHouseholderQr().solve(b);
  rep.total_energy = b.squaredNorm();
  rep.energy_above = (b - a * coef).squaredNorm();
  // A moment at the rounding level of sum |lambda^k M| dlambda is identically zero.
  Vector abs_moment(ndirs);
  for (Eigen::Index j = 0; j < ndirs; ++j) {
    double acc = 0.0;
    for (int i = 0; i < s.lambdas.count; ++i) acc += std::pow(std::abs(s.lambdas.at(i)), k) * std::abs(s.values(i, j));
    abs_moment[j] = acc * s.lambdas.dlambda;
  }
  const double floor = 1e-24 * abs_moment.cwiseProduct(sw).squaredNorm();
  rep.relative_energy_above = rep.total_energy > floor ? rep.energy_above / rep.total_energy : 0.0;
  return rep;
}

}  // namespace mft
