#include "mft/inversion.hpp"

#include "mft/quadrature.hpp"

#include <algorithm>
#include <atomic>
#include <limits>
#include <cmath>
#include <numbers>

namespace mft {

double compute_dn(const GeneratingFamily& family, const VectorRef& x, const DirectionSet& dirs) {
  const int n = family.dim();
  if (dirs.dim() != n || x.size() != n) throw ConfigError("compute_dn: dimension mismatch");
  if (!family.in_domain(x)) throw DomainError("compute_dn: point outside the family domain");
  Vector g(dirs.size());
  family.grad_norm_g_over_directions(x, dirs.nodes, g);
  if (!(g.minCoeff() > 1e-12)) throw DomainError("compute_dn: |grad_g theta| vanishes; point must be masked");
  return dirs.weights.dot(g.array().pow(-n).matrix()) / dirs.weights.sum();
}

double even_constant(int n) {
  if (n % 2 != 0) throw ConfigError("even_constant: n must be even");
  const double sign = (n / 2) % 2 == 0 ? 1.0 : -1.0;
  return -sign * std::pow(2.0 * std::numbers::pi, -n);
}

double odd_constant(int n) {
  if (n % 2 != 1) throw ConfigError("odd_constant: n must be odd");
  const double sign = ((n - 1) / 2) % 2 == 0 ? 1.0 : -1.0;
  return 1.0 / (2.0 * sign * std::pow(2.0 * std::numbers::pi, n - 1));
}

namespace {

void check_inputs(const Sinogram& s, const GeneratingFamily& family, const InversionConfig& cfg) {
  s.validate();
  s.directions.validate();
  cfg.output_grid.validate();
  const int n = family.dim();
  if (n > kMaxReconstructionDim) {
    throw ConfigError("invert: reconstruction supports n <= 3 (got " + std::to_string(n) + ")");
  }
  if (s.directions.dim() != n || cfg.output_grid.n != n) throw ConfigError("invert: dimension mismatch");
  if (cfg.derivative_accuracy != 2 && cfg.derivative_accuracy != 4) {
    throw ConfigError("invert: derivative accuracy must be 2 or 4");
  }
}

/// Runs the point loop shared by both parities. `eval(j, t, out_of_range)` returns the filtered
/// value of direction j at lambda = t.
template <typename Eval>
ScalarField backproject(const Sinogram& s, const GeneratingFamily& family, const InversionConfig& cfg,
                        double constant, bool even, const Eval& eval, InversionReport* report) {
  const GridSpec& grid = cfg.output_grid;
  const int n = family.dim();
  const DirectionSet& dirs = s.directions;
  const Eigen::Index ndirs = dirs.size();
  const double margin = cfg.mask_margin >= 0.0 ? cfg.mask_margin : 2.0 * grid.max_spacing();
  const double wsum = dirs.weights.sum();

  ScalarField out = field_new(grid, 0.0);
  ScalarField mask = field_new(grid, 0.0);
  std::atomic<std::size_t> coverage{0};
  std::vector<double> dn_lo(grid.size(), std::numeric_limits<double>::infinity());
  std::vector<double> dn_hi(grid.size(), 0.0);

  parallel_for(
      grid.size(),
      [&](std::size_t begin, std::size_t end) {
        Vector x(n);
        Vector th(ndirs);
        Vector gn(ndirs);
        std::size_t local_cov = 0;
        for (std::size_t i = begin; i < end; ++i) {
          grid.point(i, x);
          if (!family.in_domain(x) || !family.in_reconstruction_region(x)) continue;
          if (family.singularity_distance(x, dirs.nodes) < margin) continue;
          family.grad_norm_g_over_directions(x, dirs.nodes, gn);
          if (!(gn.minCoeff() > 1e-12)) continue;
          const double dn = dirs.weights.dot(gn.array().pow(-n).matrix()) / wsum;
          family.theta_over_directions(x, dirs.nodes, th);
          double acc = 0.0;
          std::size_t miss = 0;
          for (Eigen::Index j = 0; j < ndirs; ++j) acc += dirs.weights[j] * eval(j, th[j], miss);
          local_cov += miss;
          out[i] = constant * acc / dn;
          mask[i] = 1.0;
          dn_lo[i] = dn;
          dn_hi[i] = dn;
        }
        coverage += local_cov;
      },
      cfg.threads);

  std::size_t masked = 0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (mask[i] < 0.5) {
      ++masked;
      continue;
    }
    lo = std::min(lo, dn_lo[i]);
    hi = std::max(hi, dn_hi[i]);
  }
  const std::size_t evaluated = (grid.size() - masked) * static_cast<std::size_t>(ndirs);
  const double cov_fraction = evaluated > 0 ? static_cast<double>(coverage.load()) / static_cast<double>(evaluated) : 0.0;
  if (report != nullptr) {
    report->masked_points = masked;
    report->masked_fraction = static_cast<double>(masked) / static_cast<double>(grid.size());
    report->coverage_warnings = coverage.load();
    report->coverage_fraction = cov_fraction;
    report->dn_min = masked == grid.size() ? 0.0 : lo;
    report->dn_max = hi;
    report->constant = constant;
    report->even = even;
    report->mask = std::move(mask);
  }
  if (cov_fraction > cfg.max_coverage_fraction) {
    throw NumericalError("invert: " + std::to_string(100.0 * cov_fraction) +
                         "% of backprojection lookups fall outside the lambda grid");
  }
  return out;
}

}  // namespace

ScalarField invert_even(const Sinogram& s, const GeneratingFamily& family, const InversionConfig& cfg,
                        InversionReport* report) {
  check_inputs(s, family, cfg);
  const int n = family.dim();
  if (n % 2 != 0) throw ConfigError("invert_even: n must be even");
  const Matrix deriv = DerivativeFilter(n - 1, cfg.derivative_accuracy).apply_columns(s.values, s.lambdas.dlambda);
  const LambdaGrid& lg = s.lambdas;
  const double lo = lg.lambda0 - lg.dlambda;
  const double hi = lg.back() + lg.dlambda;

  std::vector<PVTable> tables;
  if (cfg.pv_oversample > 0) {
    tables.resize(static_cast<std::size_t>(deriv.cols()));
    const auto kernel = PVTable::make_kernel(lg.count, cfg.pv_oversample);
    parallel_for(
        tables.size(),
        [&](std::size_t b, std::size_t e) {
          for (std::size_t j = b; j < e; ++j) tables[j] = PVTable(deriv.col(static_cast<Eigen::Index>(j)), lg, kernel);
        },
        cfg.threads);
  }
  auto eval = [&](Eigen::Index j, double t, std::size_t& miss) {
    if (t < lo || t > hi) {
      ++miss;
      return pv_convolve(deriv.col(j), lg, t);
    }
    if (tables.empty()) return pv_convolve(deriv.col(j), lg, t);
    return tables[static_cast<std::size_t>(j)](t);
  };
  return backproject(s, family, cfg, even_constant(n), true, eval, report);
}

ScalarField invert_odd(const Sinogram& s, const GeneratingFamily& family, const InversionConfig& cfg,
                       InversionReport* report) {
  check_inputs(s, family, cfg);
  const int n = family.dim();
  if (n % 2 != 1) throw ConfigError("invert_odd: n must be odd");
  const Matrix deriv = DerivativeFilter(n - 1, cfg.derivative_accuracy).apply_columns(s.values, s.lambdas.dlambda);
  const LambdaGrid& lg = s.lambdas;
  auto eval = [&](Eigen::Index j, double t, std::size_t& miss) {
    return interp_linear(deriv.col(j), lg, t, &miss);
  };
  return backproject(s, family, cfg, odd_constant(n), false, eval, report);
}

ScalarField invert(const Sinogram& s, const GeneratingFamily& family, const InversionConfig& cfg,
                   InversionReport* report) {
  if (family.dim() > kMaxReconstructionDim) {
    throw ConfigError("invert: reconstruction supports n <= 3 (got " + std::to_string(family.dim()) + ")");
  }
  return family.dim() % 2 == 0 ? invert_even(s, family, cfg, report) : invert_odd(s, family, cfg, report);
}

Sinogram spherical_g_to_m(const Sinogram& g) {
  Sinogram m = g;
  for (int k = 0; k < g.lambdas.count; ++k) {
    const double lambda = g.lambdas.at(k);
    if (lambda <= 0.0) {
      m.values.row(k).setZero();
    } else {
      m.values.row(k) /= 2.0 * std::sqrt(lambda);
    }
  }
  return m;
}

double equidistant_level_weight(double lambda, double p) {
  return std::sqrt(std::max(0.0, lambda * lambda - p * lambda + 0.25));
}

Sinogram equidistant_h_to_m(const Sinogram& h, double p) {
  Sinogram m = h;
  for (int k = 0; k < h.lambdas.count; ++k) {
    const double w = equidistant_level_weight(h.lambdas.at(k), p);
    if (w > 0.0) {
      m.values.row(k) /= w;
    } else {
      m.values.row(k).setZero();
    }
  }
  return m;
}

Sinogram equidistant_m_to_h(const Sinogram& m, double p) {
  Sinogram h = m;
  for (int k = 0; k < m.lambdas.count; ++k) h.values.row(k) *= equidistant_level_weight(m.lambdas.at(k), p);
  return h;
}

namespace {

ScalarField ball_weight(const ScalarField& f, int power) {
  ScalarField out = f;
  Vector x(f.grid.n);
  for (std::size_t i = 0; i < f.grid.size(); ++i) {
    f.grid.point(i, x);
    const double q = 1.0 - x.squaredNorm();
    out[i] = q > 0.0 ? std::pow(0.5 * q, power) * f[i] : 0.0;
  }
  return out;
}

}  // namespace

ScalarField equidistant_f1(const ScalarField& f) { return ball_weight(f, 1); }

ScalarField equidistant_f2(const ScalarField& f) { return ball_weight(f, f.grid.n); }

}  // namespace mft
