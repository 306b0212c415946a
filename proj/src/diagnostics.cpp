#include "mft/diagnostics.hpp"

#include "mft/inversion.hpp"
#include "mft/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>

namespace mft {

namespace {

// (d - i eps)^(-power) by repeated multiplication of 1 / (d - i eps).
Complex inverse_power(double d, double eps, int power) {
  const double r2 = d * d + eps * eps;
  const Complex base(d / r2, eps / r2);
  Complex out = base;
  for (int p = 1; p < power; ++p) out *= base;
  return out;
}

Complex weighted_kernel_sum(const Vector& diff, const Vector& weights, double eps, int power) {
  Complex acc = 0.0;
  for (Eigen::Index j = 0; j < diff.size(); ++j) acc += weights[j] * inverse_power(diff[j], eps, power);
  return acc;
}

Vector theta_difference(const GeneratingFamily& family, const VectorRef& x, const VectorRef& y, const Matrix& nodes) {
  Vector tx(nodes.cols());
  Vector ty(nodes.cols());
  family.theta_over_directions(x, nodes, tx);
  family.theta_over_directions(y, nodes, ty);
  return tx - ty;
}

std::string format_vector(const VectorRef& v) {
  std::string s = "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v[i]);
    s += buf;
  }
  return s + ")";
}

}  // namespace

Complex theta_kernel(const GeneratingFamily& family, const VectorRef& x, const VectorRef& y, double eps,
                     const DirectionSet& dirs, int power) {
  if (!(eps > 0.0)) throw ConfigError("theta_kernel: eps must be > 0");
  if ((x - y).norm() == 0.0) throw ConfigError("theta_kernel: the kernel is defined only for x != y");
  if (!family.in_domain(x) || !family.in_domain(y)) throw DomainError("theta_kernel: point outside the domain");
  if (dirs.dim() != family.dim()) throw ConfigError("theta_kernel: direction dimension mismatch");
  return weighted_kernel_sum(theta_difference(family, x, y, dirs.nodes), dirs.weights, eps,
                             power > 0 ? power : family.dim());
}

std::vector<double> eps_sequence(double eps0, int levels) {
  if (!(eps0 > 0.0) || levels < 1) throw ConfigError("eps_sequence: need eps0 > 0 and levels >= 1");
  std::vector<double> eps(static_cast<std::size_t>(levels));
  for (int k = 0; k < levels; ++k) eps[static_cast<std::size_t>(k)] = std::ldexp(eps0, -k);
  return eps;
}

// ------------------------------------------------ flat-family integral

Complex fo_integral(const VectorRef& v, double a, int n, double eps, const DirectionSet& dirs) {
  if (v.size() != dirs.dim()) throw ConfigError("fo_integral: v dimension mismatch");
  if (!(eps > 0.0)) throw ConfigError("fo_integral: eps must be > 0");
  if (n < 1) throw ConfigError("fo_integral: n must be >= 1");
  Vector d = dirs.nodes.transpose() * v;
  d.array() -= a;
  return weighted_kernel_sum(d, dirs.weights, eps, n);
}

FOResult fo_extrapolated(const VectorRef& v, double a, int n, const std::vector<double>& eps,
                         const DirectionSet& dirs) {
  FOResult r;
  r.trusted = std::abs(a) < v.norm();
  for (double e : eps) r.raw.push_back(fo_integral(v, a, n, e, dirs));
  r.value = richardson(r.raw);
  return r;
}

// ------------------------------------------- trigonometric PV integral

TrigPolynomial trig_from_root_pairs(const std::vector<std::pair<double, double>>& pairs) {
  TrigPolynomial t = TrigPolynomial::constant(1.0);
  for (const auto& [a, b] : pairs) {
    const double m = 0.5 * (a + b);
    const double h = 0.5 * (a - b);
    t = t * (TrigPolynomial::constant(std::cos(h)) + TrigPolynomial::cos_term(1, -std::cos(m)) +
             TrigPolynomial::sin_term(1, -std::sin(m)));
  }
  return t;
}

double pv_trig_at(const TrigPolynomial& numer, const TrigPolynomial& denom, int n, double eps, int nodes,
                  double offset) {
  if (nodes < 8) throw ConfigError("pv_trig: need at least 8 nodes");
  const double h = 2.0 * std::numbers::pi / nodes;
  double acc = 0.0;
  for (int i = 0; i < nodes; ++i) {
    const double phi = (i + offset) * h;
    const double s = numer(phi);
    Complex z = inverse_power(denom(phi), eps, n);
    acc += (std::pow(s, n) * z).real();
  }
  return acc * h;
}

PVTrigResult pv_trig(const TrigPolynomial& numer, const TrigPolynomial& denom, int n, double eps0, int levels) {
  if (n < 1) throw ConfigError("pv_trig: n must be >= 1");
  if (denom.is_zero()) throw ConfigError("pv_trig: denominator is identically zero");
  PVTrigResult r;
  const int k = denom.degree();
  r.degree_ok = numer.degree() < k;
  std::vector<double> real_roots;
  if (k == 0) {
    r.real_rooted = false;
  } else {
    const RootCount rc = roots_on_unit_circle(denom, 1e-7);
    r.real_rooted = rc.on_circle == rc.total && !rc.deflated;
    for (const auto& z : rc.roots) {
      if (std::abs(std::abs(z) - 1.0) <= 1e-7) real_roots.push_back(std::arg(z));
    }
  }
  r.eps = eps_sequence(eps0, levels);

  // sigma = min over real roots of |t'(r)| * gap(r): the pole then sits eps * gap(r) * |t'| / |t'(r)|
  // off the axis near root r, so eps is measured in units of the local root spacing.
  const TrigPolynomial dt = denom.derivative();
  double sigma = std::numeric_limits<double>::infinity();
  double nearest = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < real_roots.size(); ++i) {
    double gap = 1.0;
    for (std::size_t j = 0; j < real_roots.size(); ++j) {
      if (i == j) continue;
      gap = std::min(gap, std::abs(std::remainder(real_roots[i] - real_roots[j], 2.0 * std::numbers::pi)));
    }
    const double slope = std::abs(dt(real_roots[i]));
    if (slope > 0.0 && gap > 0.0) {
      sigma = std::min(sigma, slope * gap);
      nearest = std::min(nearest, 1.0 / slope);
    }
  }
  if (!std::isfinite(sigma)) {
    double peak = 0.0;
    for (int i = 0; i < 4096; ++i) peak = std::max(peak, std::abs(denom(2.0 * std::numbers::pi * i / 4096)));
    sigma = peak;
    nearest = 1.0 / std::max(peak, 1e-300);
  }
  r.scale = sigma;

  // ~40 nodes per unit of the smallest pole distance keep the periodic trapezoid rule
  // geometrically convergent.
  const double distance = r.eps.back() * sigma * nearest;
  const double wanted = std::min(40.0 / distance, static_cast<double>(1 << 22));
  r.nodes = std::max(4096, static_cast<int>(std::ceil(wanted / 256.0)) * 256);

  for (double e : r.eps) {
    const double minus = pv_trig_at(numer, denom, n, e * sigma, r.nodes, 0.5);
    const double plus = pv_trig_at(numer, denom, n, -e * sigma, r.nodes, 0.5);
    r.raw.push_back(0.5 * (minus + plus));
    r.sign_gap = std::max(r.sign_gap, std::abs(minus - plus));
  }
  r.value = richardson(r.raw);
  return r;
}

// ------------------------------------------------------------ Kernel reports

std::size_t KernelReport::failures() const {
  return static_cast<std::size_t>(std::count_if(pairs.begin(), pairs.end(), [](const KernelPair& p) { return !p.pass; }));
}

double KernelReport::max_relative_residual() const {
  double worst = 0.0;
  for (const auto& p : pairs) worst = std::max(worst, p.scale > 0.0 ? p.residual / p.scale : p.residual);
  return worst;
}

void KernelReport::write(std::ostream& os) const {
  os << "# " << family_tag << " n=" << n << " tolerance=" << tolerance << " pairs=" << pairs.size()
     << " failures=" << failures() << "\n";
  char buf[256];
  for (const auto& p : pairs) {
    for (std::size_t k = 0; k < p.eps.size(); ++k) {
      std::snprintf(buf, sizeof(buf), " eps=%.6e re=%.9e im=%.9e", p.eps[k], p.values[k].real(), p.values[k].imag());
      os << "x=" << format_vector(p.x) << " y=" << format_vector(p.y) << buf << "\n";
    }
    std::snprintf(buf, sizeof(buf), " eps=0 re=%.9e im=%.9e residual=%.3e scale=%.3e pass=%d", p.extrapolated.real(),
                  p.extrapolated.imag(), p.residual, p.scale, p.pass ? 1 : 0);
    os << "x=" << format_vector(p.x) << " y=" << format_vector(p.y) << buf << "\n";
  }
}

RegionSampler box_sampler(const Vector& lo, const Vector& hi, std::function<bool(const Vector&)> accept) {
  if (lo.size() != hi.size()) throw ConfigError("box_sampler: bound dimension mismatch");
  return [lo, hi, accept](std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int attempt = 0; attempt < 100000; ++attempt) {
      Vector x(lo.size());
      for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = lo[i] + (hi[i] - lo[i]) * u(rng);
      if (!accept || accept(x)) return x;
    }
    throw ConfigError("box_sampler: acceptance region is (nearly) empty");
  };
}

namespace {

// Points omega(p) along one curve of the graded rule.
struct Curve {
  Vector axis;  // n >= 3: meridian pole
  Vector side;  // n >= 3: unit vector orthogonal to axis
  bool circle = false;

  void fill(const std::vector<double>& params, Matrix& out) const {
    const Eigen::Index n = circle ? 2 : axis.size();
    out.resize(n, static_cast<Eigen::Index>(params.size()));
    for (std::size_t i = 0; i < params.size(); ++i) {
      const double c = std::cos(params[i]);
      const double s = std::sin(params[i]);
      if (circle) {
        out(0, static_cast<Eigen::Index>(i)) = c;
        out(1, static_cast<Eigen::Index>(i)) = s;
      } else {
        out.col(static_cast<Eigen::Index>(i)) = c * axis + s * side;
      }
    }
  }
};

std::vector<double> eval_curve(const DirectionFunction& d, const Curve& curve, const std::vector<double>& params) {
  Matrix nodes;
  curve.fill(params, nodes);
  Vector out(nodes.cols());
  d(nodes, out);
  return std::vector<double>(out.data(), out.data() + out.size());
}

// Sign change of d on [l, r] with d(l) = fl.
double bisect_zero(const DirectionFunction& d, const Curve& curve, double l, double r, double fl) {
  for (int it = 0; it < 60 && r - l > 1e-15 * (1.0 + std::abs(l)); ++it) {
    const double m = 0.5 * (l + r);
    const double fm = eval_curve(d, curve, {m})[0];
    if ((fm < 0.0) == (fl < 0.0)) {
      l = m;
      fl = fm;
    } else {
      r = m;
    }
  }
  return 0.5 * (l + r);
}

// min over simple zeros on closed curves of |d'| * min(1, distance to the nearest other zero); infinite if d
// has no zero. Small values mean nearly coalescing zeros, where eps must shrink to resolve the kernel.
double zero_separation(const DirectionFunction& d, const std::vector<Curve>& curves, int scan) {
  const double period = 2.0 * std::numbers::pi;
  const double h = period / scan;
  std::vector<double> params(static_cast<std::size_t>(scan) + 1);
  for (int i = 0; i <= scan; ++i) params[static_cast<std::size_t>(i)] = i * h;
  double sigma = std::numeric_limits<double>::infinity();
  for (const Curve& curve : curves) {
    const std::vector<double> v = eval_curve(d, curve, params);
    std::vector<double> zeros;
    for (int i = 0; i < scan; ++i) {
      const double a = v[static_cast<std::size_t>(i)];
      const double b = v[static_cast<std::size_t>(i) + 1];
      if (a == 0.0) {
        zeros.push_back(params[static_cast<std::size_t>(i)]);
      } else if (a * b < 0.0) {
        zeros.push_back(bisect_zero(d, curve, params[static_cast<std::size_t>(i)], params[static_cast<std::size_t>(i) + 1], a));
      }
    }
    for (std::size_t i = 0; i < zeros.size(); ++i) {
      double gap = 1.0;
      if (zeros.size() > 1) {
        const double next = zeros[(i + 1) % zeros.size()] - zeros[i];
        const double prev = zeros[i] - zeros[(i + zeros.size() - 1) % zeros.size()];
        gap = std::min({gap, std::fmod(next + period, period), std::fmod(prev + period, period)});
      }
      const double step = 1e-6;
      const std::vector<double> f = eval_curve(d, curve, {zeros[i] - step, zeros[i] + step});
      sigma = std::min(sigma, std::abs(f[1] - f[0]) / (2.0 * step) * gap);
    }
  }
  return sigma;
}

// Zeros and near-tangencies of d along [lo, hi], each with the half-width of its finest panel.
std::vector<std::pair<double, double>> grading_centers(const DirectionFunction& d, const Curve& curve, double lo,
                                                       double hi, double eps_min, int scan) {
  const double h = (hi - lo) / scan;
  std::vector<double> params(static_cast<std::size_t>(scan) + 1);
  for (int i = 0; i <= scan; ++i) params[static_cast<std::size_t>(i)] = lo + i * h;
  const std::vector<double> v = eval_curve(d, curve, params);
  double peak = 0.0;
  for (double x : v) peak = std::max(peak, std::abs(x));

  std::vector<double> centers;
  for (int i = 0; i < scan; ++i) {
    const double a = v[static_cast<std::size_t>(i)];
    const double b = v[static_cast<std::size_t>(i) + 1];
    if (a == 0.0) {
      centers.push_back(params[static_cast<std::size_t>(i)]);
    } else if (a * b < 0.0) {
      centers.push_back(bisect_zero(d, curve, params[static_cast<std::size_t>(i)], params[static_cast<std::size_t>(i) + 1], a));
    } else if (i > 0 && std::abs(a) < std::abs(v[static_cast<std::size_t>(i) - 1]) && std::abs(a) <= std::abs(b) &&
               std::abs(a) < 0.05 * peak) {
      centers.push_back(params[static_cast<std::size_t>(i)]);
    }
  }

  std::vector<std::pair<double, double>> out;
  const double step = 1e-4 * (hi - lo);
  for (double c : centers) {
    const std::vector<double> f = eval_curve(d, curve, {c - step, c, c + step});
    const double d1 = std::abs(f[2] - f[0]) / (2.0 * step);
    const double d2 = std::abs(f[2] - 2.0 * f[1] + f[0]) / (step * step);
    double delta = std::numeric_limits<double>::infinity();
    if (d1 > 0.0) delta = std::min(delta, (std::abs(f[1]) + eps_min) / d1);
    if (d2 > 0.0) delta = std::min(delta, std::sqrt(2.0 * (std::abs(f[1]) + eps_min) / d2));
    if (!std::isfinite(delta)) delta = h;
    out.emplace_back(c, std::clamp(0.25 * delta, 1e-13 * (hi - lo), h));
  }
  return out;
}

// Composite Gauss-Legendre rule on [lo, hi] graded toward the centers.
void graded_panels(const std::vector<std::pair<double, double>>& centers, double lo, double hi, int order,
                   const Vector& gl_x, const Vector& gl_w, std::vector<double>& params, std::vector<double>& weights) {
  std::vector<double> cuts{lo, hi};
  for (int j = 1; j < 8; ++j) cuts.push_back(lo + (hi - lo) * j / 8.0);
  for (const auto& [c, delta] : centers) {
    for (double w = delta; w < hi - lo; w *= 2.0) {
      cuts.push_back(c - w);
      cuts.push_back(c + w);
    }
  }
  for (double& c : cuts) c = std::clamp(c, lo, hi);
  std::sort(cuts.begin(), cuts.end());
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i];
    const double b = cuts[i + 1];
    if (b - a <= 1e-15 * (hi - lo)) continue;
    for (int q = 0; q < order; ++q) {
      params.push_back(0.5 * (a + b) + 0.5 * (b - a) * gl_x[q]);
      weights.push_back(0.5 * (b - a) * gl_w[q]);
    }
  }
}

}  // namespace

Complex fo_integral_polar(const VectorRef& v, double a, int n, double eps, double eps_min, int panel_order) {
  if (n < 2 || v.size() != n) throw ConfigError("fo_integral_polar: v must have dimension n >= 2");
  if (!(eps > 0.0) || !(eps_min > 0.0)) throw ConfigError("fo_integral_polar: eps must be > 0");
  const double r = v.norm();
  if (!(r > 0.0)) throw ConfigError("fo_integral_polar: v must be nonzero");
  const double pi = std::numbers::pi;
  Vector gl_x;
  Vector gl_w;
  gauss_legendre(panel_order, gl_x, gl_w);

  // Offsets tau from psi_c; with |a| >= |v| there is no zero and psi_c only fixes the origin.
  const bool crossing = std::abs(a) < r;
  const double psi_c = crossing ? std::acos(a / r) : 0.0;
  const double cos_c = std::cos(psi_c);
  const double sin_c = std::sin(psi_c);
  std::vector<std::pair<double, double>> centers;
  if (crossing) centers.emplace_back(0.0, std::min(0.25 * eps_min / (r * sin_c), 0.1));
  std::vector<double> tau;
  std::vector<double> w;
  graded_panels(centers, -psi_c, pi - psi_c, panel_order, gl_x, gl_w, tau, w);

  const double area = n == 2 ? 2.0 : sphere_area(n - 1);
  Complex acc = 0.0;
  for (std::size_t i = 0; i < tau.size(); ++i) {
    const double t = tau[i];
    const double s = std::sin(0.5 * t);
    // |v| cos(psi_c + tau) - a, written without cancellation when a = |v| cos psi_c.
    const double d = crossing ? -r * (2.0 * cos_c * s * s + sin_c * std::sin(t)) : r * std::cos(psi_c + t) - a;
    acc += w[i] * std::pow(std::sin(psi_c + t), n - 2) * inverse_power(d, eps, n);
  }
  return area * acc;
}

FOResult fo_extrapolated_polar(const VectorRef& v, double a, int n, const std::vector<double>& eps, int panel_order) {
  if (eps.empty()) throw ConfigError("fo_extrapolated_polar: empty eps sequence");
  FOResult r;
  r.trusted = std::abs(a) < v.norm();
  const double eps_min = *std::min_element(eps.begin(), eps.end());
  for (double e : eps) r.raw.push_back(fo_integral_polar(v, a, n, e, eps_min, panel_order));
  r.value = richardson(r.raw);
  return r;
}

DirectionSet graded_rule(const DirectionFunction& d, int n, const Vector& axis, double eps_min,
                         const GradedRuleConfig& cfg) {
  if (n < 2 || n > kMaxDiagnosticDim) throw ConfigError("graded_rule: dimension must be 2..5");
  if (!(eps_min > 0.0)) throw ConfigError("graded_rule: eps_min must be > 0");
  if (cfg.scan_count < 16 || cfg.panel_order < 2) throw ConfigError("graded_rule: scan_count >= 16, panel_order >= 2");
  Vector gl_x;
  Vector gl_w;
  gauss_legendre(cfg.panel_order, gl_x, gl_w);

  std::vector<Vector> cols;
  std::vector<double> wts;
  auto add_curve = [&](const Curve& curve, double lo, double hi, double scale, int sine_power) {
    std::vector<std::pair<double, double>> centers = grading_centers(d, curve, lo, hi, eps_min, cfg.scan_count);
    if (curve.circle) {
      // Periodic: grade across the seam as well.
      const std::size_t count = centers.size();
      for (std::size_t i = 0; i < count; ++i) {
        centers.emplace_back(centers[i].first - (hi - lo), centers[i].second);
        centers.emplace_back(centers[i].first + (hi - lo), centers[i].second);
      }
    }
    std::vector<double> params;
    std::vector<double> weights;
    graded_panels(centers, lo, hi, cfg.panel_order, gl_x, gl_w, params, weights);
    Matrix nodes;
    curve.fill(params, nodes);
    for (std::size_t i = 0; i < params.size(); ++i) {
      cols.emplace_back(nodes.col(static_cast<Eigen::Index>(i)));
      wts.push_back(scale * weights[i] * std::pow(std::sin(params[i]), sine_power));
    }
  };

  if (n == 2) {
    Curve c;
    c.circle = true;
    add_curve(c, 0.0, 2.0 * std::numbers::pi, 1.0, 0);
  } else {
    if (axis.size() != n || !(axis.norm() > 0.0)) throw ConfigError("graded_rule: axis must be a nonzero n-vector");
    const DirectionSet sub = n == 3 ? direction_set_circle(cfg.azimuth_count)
                                    : direction_set(n - 1, cfg.sub_polar_count, cfg.azimuth_count);
    // Lift the complementary rule into the hyperplane orthogonal to the axis.
    DirectionSet lifted;
    lifted.nodes = Matrix::Zero(n, sub.size());
    lifted.nodes.topRows(n - 1) = sub.nodes;
    lifted.weights = sub.weights;
    lifted = align_polar_axis(lifted, axis);
    Curve c;
    c.axis = axis.normalized();
    for (Eigen::Index j = 0; j < sub.size(); ++j) {
      c.side = lifted.nodes.col(j);
      add_curve(c, 0.0, std::numbers::pi, sub.weights[j], n - 2);
    }
  }
  DirectionSet out;
  out.nodes.resize(cols.empty() ? n : cols.front().size(), static_cast<Eigen::Index>(cols.size()));
  out.weights.resize(static_cast<Eigen::Index>(wts.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) {
    out.nodes.col(static_cast<Eigen::Index>(i)) = cols[i];
    out.weights[static_cast<Eigen::Index>(i)] = wts[i];
  }
  return out;
}

DirectionSet fo_rule(const VectorRef& v, double a, double eps_min, const GradedRuleConfig& cfg) {
  const Vector vv = v;
  return graded_rule(
      [&](const Matrix& nodes, Eigen::Ref<Vector> out) { out = (nodes.transpose() * vv).array() - a; },
      static_cast<int>(v.size()), vv, eps_min, cfg);
}

namespace {

// Odd part of d over the coordinate axes; exact for the flat family.
Vector kernel_axis(const GeneratingFamily& family, const VectorRef& x, const VectorRef& y) {
  const int n = family.dim();
  Vector axis = Vector::Unit(n, n - 1);
  if (n >= 3) {
    Matrix axes(n, 2 * n);
    axes.leftCols(n) = Matrix::Identity(n, n);
    axes.rightCols(n) = -Matrix::Identity(n, n);
    const Vector d = theta_difference(family, x, y, axes);
    const Vector v = 0.5 * (d.head(n) - d.tail(n));
    if (v.norm() > 0.0) axis = v;
  }
  return axis;
}

// Great circles through the axis (n >= 3) or the unit circle (n = 2).
std::vector<Curve> probe_circles(int n, const Vector& axis) {
  std::vector<Curve> out;
  if (n == 2) {
    Curve c;
    c.circle = true;
    out.push_back(c);
    return out;
  }
  const DirectionSet sub = n == 3 ? direction_set_circle(8) : direction_set(n - 1, 4, 8);
  DirectionSet lifted;
  lifted.nodes = Matrix::Zero(n, sub.size());
  lifted.nodes.topRows(n - 1) = sub.nodes;
  lifted.weights = sub.weights;
  lifted = align_polar_axis(lifted, axis);
  for (Eigen::Index j = 0; j < sub.size(); ++j) {
    Curve c;
    c.axis = axis.normalized();
    c.side = lifted.nodes.col(j);
    out.push_back(c);
  }
  return out;
}

}  // namespace

DirectionSet kernel_rule(const GeneratingFamily& family, const VectorRef& x, const VectorRef& y, double eps_min,
                         const GradedRuleConfig& cfg) {
  const int n = family.dim();
  const Vector axis = kernel_axis(family, x, y);
  return graded_rule(
      [&](const Matrix& nodes, Eigen::Ref<Vector> out) { out = theta_difference(family, x, y, nodes); }, n, axis,
      eps_min, cfg);
}

KernelPair certify_pair(const GeneratingFamily& family, const VectorRef& x, const VectorRef& y,
                        const CertifyConfig& cfg) {
  const int n = family.dim();
  KernelPair p;
  p.x = x;
  p.y = y;
  const DirectionSet probe = direction_set(n, 16, 32);
  const double pair_scale = theta_difference(family, x, y, probe.nodes).cwiseAbs().maxCoeff();
  if (!(pair_scale > 0.0)) throw NumericalError("certify_pair: theta(x, .) and theta(y, .) coincide");
  const double sigma = zero_separation(
      [&](const Matrix& nodes, Eigen::Ref<Vector> out) { out = theta_difference(family, x, y, nodes); },
      probe_circles(n, kernel_axis(family, x, y)), 4096);
  p.eps = eps_sequence(cfg.eps0 * std::min(pair_scale, sigma), cfg.levels);
  const DirectionSet rule = kernel_rule(family, x, y, p.eps.back(), cfg.rule);
  const Vector diff = theta_difference(family, x, y, rule.nodes);
  for (double e : p.eps) p.values.push_back(weighted_kernel_sum(diff, rule.weights, e, n));
  p.extrapolated = richardson(p.values);
  p.scale = std::abs(p.values.front());
  p.residual = n % 2 == 0 ? std::abs(p.extrapolated.real()) : std::abs(p.extrapolated.imag());
  p.pass = p.residual <= cfg.tolerance * p.scale;
  return p;
}

KernelReport certify_family(const GeneratingFamily& family, const RegionSampler& sampler, const CertifyConfig& cfg) {
  if (cfg.pairs < 1) throw ConfigError("certify_family: pairs must be >= 1");
  KernelReport rep;
  rep.family_tag = family.tag();
  rep.n = family.dim();
  rep.tolerance = cfg.tolerance;
  std::mt19937_64 rng(cfg.seed);
  std::vector<std::pair<Vector, Vector>> pts;
  while (static_cast<int>(pts.size()) < cfg.pairs) {
    Vector x = sampler(rng);
    Vector y = sampler(rng);
    if (x.size() != family.dim() || y.size() != family.dim()) throw ConfigError("certify_family: sampler dimension mismatch");
    if ((x - y).norm() < 1e-6 || !family.in_domain(x) || !family.in_domain(y)) continue;
    pts.emplace_back(std::move(x), std::move(y));
  }
  rep.pairs.resize(pts.size());
  parallel_for(pts.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) rep.pairs[i] = certify_pair(family, pts[i].first, pts[i].second, cfg);
  });
  return rep;
}

// ------------------------------------------------------------ two-form check

Complex power_cell_integral(double alpha, double beta, double l0, double l1, double t, double eps, int n) {
  // lambda = z - u, z = t - i eps: int (P - beta u) u^-n (-du) from u0 to u1 with P = alpha + beta z.
  const Complex z(t, -eps);
  const Complex u0 = z - l0;
  const Complex u1 = z - l1;
  const Complex p = alpha + beta * z;
  auto integral = [&](int m) -> Complex {
    if (m == 0) return u1 - u0;
    if (m == 1) return std::log(u1) - std::log(u0);
    return (std::pow(u1, 1 - m) - std::pow(u0, 1 - m)) / static_cast<double>(1 - m);
  };
  return -(p * integral(n) - beta * integral(n - 1));
}

Complex power_kernel_integral(const VectorRef& samples, const LambdaGrid& grid, double t, double eps, int n) {
  if (samples.size() != grid.count) throw ConfigError("power_kernel_integral: sample count does not match grid");
  Complex acc = 0.0;
  for (int k = 0; k + 1 < grid.count; ++k) {
    const double g0 = samples[k];
    const double g1 = samples[k + 1];
    if (g0 == 0.0 && g1 == 0.0) continue;
    const double l0 = grid.at(k);
    const double l1 = grid.at(k + 1);
    const double beta = (g1 - g0) / grid.dlambda;
    acc += power_cell_integral(g0 - beta * l0, beta, l0, l1, t, eps, n);
  }
  return acc;
}

Eq9Report equivalence_check_eq9(const Sinogram& s, const GeneratingFamily& family, const std::vector<Vector>& points,
                                int levels, double eps0_bins) {
  s.validate();
  const int n = family.dim();
  if (n % 2 != 0) throw ConfigError("equivalence_check_eq9: the two-form identity is the even-n formula");
  if (s.directions.dim() != n) throw ConfigError("equivalence_check_eq9: dimension mismatch");
  const DirectionSet& dirs = s.directions;
  const LambdaGrid& lg = s.lambdas;
  const Matrix deriv = DerivativeFilter(n - 1, 2).apply_columns(s.values, lg.dlambda);
  const std::vector<double> eps = eps_sequence(eps0_bins * lg.dlambda, levels);
  const double c_second = even_constant(n);
  // (n-1)! / (2 pi i)^n: the sign that makes both forms agree after n - 1 partial integrations.
  const double c_first = std::tgamma(static_cast<double>(n)) * -c_second;

  Eq9Report rep;
  rep.points = points;
  rep.first_form.resize(points.size());
  rep.second_form.resize(points.size());
  std::vector<double> gaps(points.size(), 0.0);
  parallel_for(points.size(), [&](std::size_t b, std::size_t e) {
    Vector th(dirs.size());
    for (std::size_t i = b; i < e; ++i) {
      const Vector& x = points[i];
      const double dn = compute_dn(family, x, dirs);
      family.theta_over_directions(x, dirs.nodes, th);
      double second = 0.0;
      std::vector<double> minus(eps.size(), 0.0);
      std::vector<double> plus(eps.size(), 0.0);
      for (Eigen::Index j = 0; j < dirs.size(); ++j) {
        second += dirs.weights[j] * pv_convolve(deriv.col(j), lg, th[j]);
        for (std::size_t k = 0; k < eps.size(); ++k) {
          minus[k] += dirs.weights[j] * power_kernel_integral(s.values.col(j), lg, th[j], eps[k], n).real();
          plus[k] += dirs.weights[j] * power_kernel_integral(s.values.col(j), lg, th[j], -eps[k], n).real();
        }
      }
      std::vector<double> first(eps.size());
      for (std::size_t k = 0; k < eps.size(); ++k) {
        first[k] = 0.5 * (minus[k] + plus[k]);
        gaps[i] = std::max(gaps[i], std::abs(c_first * (minus[k] - plus[k]) / dn));
      }
      rep.second_form[i] = c_second * second / dn;
      rep.first_form[i] = c_first * richardson(first) / dn;
    }
  });

  double ref = 0.0;
  double dev = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    ref = std::max(ref, std::abs(rep.second_form[i]));
    dev = std::max(dev, std::abs(rep.first_form[i] - rep.second_form[i]));
  }
  rep.max_deviation = ref > 0.0 ? dev / ref : dev;
  const double gap = *std::max_element(gaps.begin(), gaps.end());
  rep.sign_gap = ref > 0.0 ? gap / ref : gap;
  double ratio = 0.0;
  int used = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (std::abs(rep.second_form[i]) > 0.1 * ref && ref > 0.0) {
      ratio += -rep.first_form[i] / rep.second_form[i];
      ++used;
    }
  }
  rep.printed_sign_ratio = used > 0 ? ratio / used : 0.0;
  return rep;
}

}  // namespace mft
