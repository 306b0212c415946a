#include "mft/hyperbolic2d.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace mft {

namespace {

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
    } catch (const std::exception&) {
      throw ConfigError("trig polynomial: bad coefficient '" + item + "'");
    }
  }
  return out;
}

std::string join(const TrigPolynomial::Coeffs& v, Eigen::Index from) {
  std::ostringstream os;
  os.precision(17);
  for (Eigen::Index i = from; i < v.size(); ++i) {
    if (i > from) os << ',';
    os << v[i];
  }
  return os.str();
}

}  // namespace

TrigPolynomial parse_trig_polynomial(const std::string& text) {
  std::string body = text;
  int nominal = -1;
  if (const auto colon = body.find(':'); colon != std::string::npos) {
    try {
      nominal = std::stoi(body.substr(0, colon));
    } catch (const std::exception&) {
      throw ConfigError("trig polynomial: bad degree prefix in '" + text + "'");
    }
    body = body.substr(colon + 1);
  }
  std::string cos_part = body;
  std::string sin_part;
  if (const auto semi = body.find_first_of(";/"); semi != std::string::npos) {
    cos_part = body.substr(0, semi);
    sin_part = body.substr(semi + 1);
  }
  const auto a = parse_list(cos_part);
  const auto b = parse_list(sin_part);
  if (a.empty()) throw ConfigError("trig polynomial: missing cosine coefficients");
  TrigPolynomial t;
  t.resize(static_cast<int>(std::max(a.size() - 1, b.size())));
  for (std::size_t j = 0; j < a.size(); ++j) t.a[static_cast<Eigen::Index>(j)] = a[j];
  for (std::size_t j = 0; j < b.size(); ++j) t.b[static_cast<Eigen::Index>(j + 1)] = b[j];
  if (nominal >= 0) {
    if (t.degree() > nominal) throw ConfigError("trig polynomial: coefficients exceed stated degree");
    t.resize(std::max(nominal, t.order()));
  }
  return t;
}

std::string format_trig_polynomial(const TrigPolynomial& t) {
  return std::to_string(t.order()) + ":" + join(t.a, 0) + ";" + join(t.b, 1);
}

void TrigCurve::validate() const {
  if (degree() < 1) throw ConfigError("trig curve: curve map is constant");
}

TrigCurve named_curve(const std::string& name) {
  using T = TrigPolynomial;
  if (name == "circle") return {T::cos_term(1), T::sin_term(1)};
  if (name == "tri") {
    return {T::cos_term(2, 2.0) + T::cos_term(1, -1.0), T::sin_term(2, 2.0) + T::sin_term(1, 1.0)};
  }
  if (name == "square") {
    return {T::cos_term(3, 2.0) + T::cos_term(1, 1.0), T::sin_term(3, 2.0) + T::sin_term(1, -1.0)};
  }
  if (name == "pentagon") {
    return {T::cos_term(4, 5.0) + T::cos_term(1, 4.0), T::sin_term(4, 5.0) + T::sin_term(1, -4.0)};
  }
  throw ConfigError("unknown curve name '" + name + "'");
}

TrigCurve parse_trig_curve(const std::string& text) {
  const auto bar = text.find('|');
  if (bar == std::string::npos) return named_curve(text);
  TrigCurve c{parse_trig_polynomial(text.substr(0, bar)), parse_trig_polynomial(text.substr(bar + 1))};
  c.validate();
  return c;
}

std::string format_trig_curve(const TrigCurve& c) {
  return format_trig_polynomial(c.xi1) + "|" + format_trig_polynomial(c.xi2);
}

double trig_eval(const TrigPolynomial& t, double phi) { return t(phi); }

RootCount roots_on_unit_circle(const TrigPolynomial& t, double tol) {
  RootCount out;
  const int k = t.degree();
  if (t.is_zero()) throw ConfigError("roots_on_unit_circle: polynomial is identically zero");
  if (k == 0) return out;

  TrigPolynomial trimmed = t;
  trimmed.a.conservativeResize(k + 1);
  trimmed.b.conservativeResize(k + 1);
  const auto c = trimmed.laurent();  // coefficient of z^m in z^k t is c[m]

  double scale = 0.0;
  for (const auto& v : c) scale = std::max(scale, std::abs(v));
  int lo = 0;
  int hi = 2 * k;
  while (hi > lo && std::abs(c[hi]) < 1e-14 * scale) --hi;
  while (lo < hi && std::abs(c[lo]) < 1e-14 * scale) ++lo;
  out.total = 2 * k;
  if (lo > 0 || hi < 2 * k) {
    out.deflated = true;
    // Dropped roots sit at z = 0 or z = infinity, far from the circle.
    out.worst_circle_distance = 1.0;
  }

  const int degree = hi - lo;
  if (degree > 0) {
    Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(degree, degree);
    for (int i = 1; i < degree; ++i) companion(i, i - 1) = 1.0;
    for (int i = 0; i < degree; ++i) companion(i, degree - 1) = -c[lo + i] / c[hi];
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(companion, false);
    const auto& ev = solver.eigenvalues();
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
      const double dist = std::abs(std::abs(ev[i]) - 1.0);
      out.roots.push_back(ev[i]);
      out.worst_circle_distance = std::max(out.worst_circle_distance, dist);
      if (dist <= tol) ++out.on_circle;
    }
  }
  return out;
}

TrigPolynomial line_pencil_poly(const TrigCurve& curve, const Eigen::Vector2d& x,
                                const Eigen::Vector2d& normal) {
  return curve.xi1 * normal.x() + curve.xi2 * normal.y() +
         TrigPolynomial::constant(-normal.dot(x));
}

TrigPolynomial squared_distance_difference(const TrigCurve& curve, const Eigen::Vector2d& x,
                                           const Eigen::Vector2d& y) {
  const Eigen::Vector2d d = x - y;
  return TrigPolynomial::constant(x.squaredNorm() - y.squaredNorm()) +
         (curve.xi1 * d.x() + curve.xi2 * d.y()) * -2.0;
}

double hyperbolicity_margin(const TrigCurve& curve, const Eigen::Vector2d& x, int normal_count,
                            double tol, double stop_above) {
  double margin = 0.0;
  for (int j = 0; j < normal_count; ++j) {
    const double angle = std::numbers::pi * j / normal_count;
    const auto rc = roots_on_unit_circle(
        line_pencil_poly(curve, x, {std::cos(angle), std::sin(angle)}), tol);
    margin = std::max(margin, rc.worst_circle_distance);
    if (margin > stop_above) break;
  }
  return margin;
}

PointClass classify_point(const TrigCurve& curve, const Eigen::Vector2d& x, int normal_count,
                          double tol) {
  const double margin = hyperbolicity_margin(curve, x, normal_count, tol, 10.0 * tol);
  if (margin <= tol) return PointClass::hyperbolic;
  if (margin <= 10.0 * tol) return PointClass::boundary;
  return PointClass::exterior;
}

bool is_hyperbolic(const TrigCurve& curve, const Eigen::Vector2d& x, int normal_count, double tol) {
  return hyperbolicity_margin(curve, x, normal_count, tol, tol) <= tol;
}

HyperbolicRaster raster_hyperbolic_set(const TrigCurve& curve, const Bbox2& bbox, int resolution,
                                       int normal_count, double tol) {
  curve.validate();
  if (normal_count < 1) throw ConfigError("raster_hyperbolic_set: normal_count must be positive");
  const GridSpec grid = GridSpec::box({resolution, resolution}, Eigen::Vector2d(bbox.xmin, bbox.ymin),
                                      Eigen::Vector2d(bbox.xmax, bbox.ymax));
  HyperbolicRaster out{field_new(grid, 0.0), field_new(grid, 0.0)};
  Vector x(2);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid.point(i, x);
    switch (classify_point(curve, Eigen::Vector2d(x[0], x[1]), normal_count, tol)) {
      case PointClass::hyperbolic: out.mask[i] = 1.0; break;
      case PointClass::boundary: out.boundary[i] = 1.0; break;
      case PointClass::exterior: break;
    }
  }
  return out;
}

namespace {

using Lattice = Eigen::Vector2i;

long cross(const Lattice& o, const Lattice& a, const Lattice& b) {
  return static_cast<long>(a.x() - o.x()) * (b.y() - o.y()) -
         static_cast<long>(a.y() - o.y()) * (b.x() - o.x());
}

std::vector<Lattice> convex_hull(std::vector<Lattice> pts) {
  std::sort(pts.begin(), pts.end(), [](const Lattice& p, const Lattice& q) {
    return p.x() < q.x() || (p.x() == q.x() && p.y() < q.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  std::vector<Lattice> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

bool in_hull(const std::vector<Lattice>& hull, const Lattice& p) {
  if (hull.size() == 1) return p == hull[0];
  if (hull.size() == 2) {
    if (cross(hull[0], hull[1], p) != 0) return false;
    return p.x() >= std::min(hull[0].x(), hull[1].x()) && p.x() <= std::max(hull[0].x(), hull[1].x()) &&
           p.y() >= std::min(hull[0].y(), hull[1].y()) && p.y() <= std::max(hull[0].y(), hull[1].y());
  }
  for (std::size_t i = 0; i < hull.size(); ++i) {
    if (cross(hull[i], hull[(i + 1) % hull.size()], p) < 0) return false;
  }
  return true;
}

void require_2d(const ScalarField& mask, const char* who) {
  if (mask.grid.n != 2) throw ConfigError(std::string(who) + ": mask must be 2D");
}

}  // namespace

ConvexityReport convexity_check(const ScalarField& mask, const ScalarField* boundary) {
  require_2d(mask, "convexity_check");
  ConvexityReport rep;
  const int nx = mask.grid.dims[0];
  const int ny = mask.grid.dims[1];
  std::vector<Lattice> pts;
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      if (mask[static_cast<std::size_t>(i) * ny + j] > 0.5) pts.emplace_back(i, j);
    }
  }
  rep.mask_pixels = pts.size();
  if (pts.empty()) {
    rep.empty = true;
    return rep;
  }
  const auto hull = convex_hull(pts);
  int x0 = nx, x1 = -1, y0 = ny, y1 = -1;
  for (const auto& p : hull) {
    x0 = std::min(x0, p.x());
    x1 = std::max(x1, p.x());
    y0 = std::min(y0, p.y());
    y1 = std::max(y1, p.y());
  }
  for (int i = x0; i <= x1; ++i) {
    for (int j = y0; j <= y1; ++j) {
      if (!in_hull(hull, Lattice(i, j))) continue;
      ++rep.hull_pixels;
      const std::size_t flat = static_cast<std::size_t>(i) * ny + j;
      if (mask[flat] > 0.5) continue;
      if (boundary != nullptr && (*boundary)[flat] > 0.5) continue;
      ++rep.defect_pixels;
    }
  }
  rep.defect_fraction = static_cast<double>(rep.defect_pixels) / static_cast<double>(rep.mask_pixels);
  return rep;
}

SymmetryReport symmetry_check(const ScalarField& mask, int fold) {
  require_2d(mask, "symmetry_check");
  if (fold < 1) throw ConfigError("symmetry_check: fold must be positive");
  const auto& g = mask.grid;
  const int nx = g.dims[0];
  const int ny = g.dims[1];
  auto label = [&](int i, int j) -> int {
    if (i < 0 || j < 0 || i >= nx || j >= ny) return 0;
    return mask[static_cast<std::size_t>(i) * ny + j] > 0.5 ? 1 : 0;
  };
  auto mixed = [&](int i, int j) {
    const int l = label(i, j);
    for (int di = -1; di <= 1; ++di) {
      for (int dj = -1; dj <= 1; ++dj) {
        if (label(i + di, j + dj) != l) return true;
      }
    }
    return false;
  };
  const double angle = 2.0 * std::numbers::pi / fold;
  const double ca = std::cos(angle);
  const double sa = std::sin(angle);
  SymmetryReport rep;
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      const double x = g.origin[0] + (i + 0.5) * g.spacing[0];
      const double y = g.origin[1] + (j + 0.5) * g.spacing[1];
      const double rx = ca * x - sa * y;
      const double ry = sa * x + ca * y;
      const int ri = static_cast<int>(std::floor((rx - g.origin[0]) / g.spacing[0]));
      const int rj = static_cast<int>(std::floor((ry - g.origin[1]) / g.spacing[1]));
      ++rep.compared;
      if (label(i, j) == label(ri, rj)) continue;
      if (mixed(i, j) || mixed(ri, rj)) {
        ++rep.boundary_mismatches;
      } else {
        ++rep.interior_mismatches;
      }
    }
  }
  return rep;
}

}  // namespace mft
