#include "mft/geometry.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

namespace mft {

namespace {

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& text, const std::string& what) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) throw ConfigError("family tag: bad " + what + " '" + text + "'");
  return v;
}

void require_unit_ball(const VectorRef& x, const char* who) {
  if (!(x.squaredNorm() < 1.0)) throw DomainError(std::string(who) + ": point outside the unit ball");
}

}  // namespace

// ---------------------------------------------------------- GeneratingFamily

void GeneratingFamily::require_point(const VectorRef& x) const {
  if (x.size() != n_) throw ConfigError("family: point dimension mismatch");
}

void GeneratingFamily::require_direction(const VectorRef& omega) const {
  if (omega.size() != n_) throw ConfigError("family: direction dimension mismatch");
}

std::string GeneratingFamily::tag() const { return format_family_tag(params()); }

void GeneratingFamily::theta_over_directions(const VectorRef& x, const Matrix& nodes,
                                             Eigen::Ref<Vector> out) const {
  for (Eigen::Index j = 0; j < nodes.cols(); ++j) out[j] = theta(x, nodes.col(j));
}

void GeneratingFamily::theta_over_points(const Matrix& points, const VectorRef& omega,
                                         Eigen::Ref<Vector> out) const {
  for (Eigen::Index i = 0; i < points.cols(); ++i) out[i] = theta(points.col(i), omega);
}

void GeneratingFamily::grad_norm_g_over_directions(const VectorRef& x, const Matrix& nodes,
                                                   Eigen::Ref<Vector> out) const {
  for (Eigen::Index j = 0; j < nodes.cols(); ++j) out[j] = grad_norm_g(x, nodes.col(j));
}

std::pair<double, double> GeneratingFamily::theta_range(const GridSpec& grid) const {
  grid.validate();
  if (grid.n != n_) throw ConfigError("theta_range: grid dimension does not match family");
  const DirectionSet dirs = n_ == 2 ? direction_set_circle(720) : direction_set(n_, 24, 48);
  const std::size_t total = grid.size();
  const std::size_t stride = std::max<std::size_t>(1, total / 40000);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  Vector x(n_);
  Vector th(dirs.size());
  auto visit = [&](const Vector& p) {
    if (!in_domain(p)) return;
    theta_over_directions(p, dirs.nodes, th);
    lo = std::min(lo, th.minCoeff());
    hi = std::max(hi, th.maxCoeff());
  };
  for (std::size_t i = 0; i < total; i += stride) {
    grid.point(i, x);
    visit(x);
  }
  // Box corners catch the extremes of families that are monotone along rays.
  for (int corner = 0; corner < (1 << n_); ++corner) {
    std::vector<int> idx(n_);
    for (int a = 0; a < n_; ++a) idx[a] = (corner >> a) & 1 ? grid.dims[a] - 1 : 0;
    grid.point(grid.ravel(idx), x);
    visit(x);
  }
  if (!(lo <= hi)) throw DomainError("theta_range: no grid cell lies in the family domain");
  return {lo, hi};
}

LambdaGrid GeneratingFamily::make_lambda_grid(const GridSpec& grid, int count, int stencil_bins) const {
  if (stencil_bins < 0 || count < 2 * stencil_bins + 8) {
    throw ConfigError("make_lambda_grid: count too small for the requested stencil padding");
  }
  auto [lo, hi] = theta_range(grid);
  const double span = std::max(hi - lo, 1e-9);
  lo -= 0.05 * span;
  hi += 0.05 * span;
  const int inner = count - 1 - 2 * stencil_bins;
  LambdaGrid lg;
  lg.dlambda = (hi - lo) / inner;
  lg.lambda0 = lo - stencil_bins * lg.dlambda;
  lg.count = count;
  lg.validate();
  return lg;
}

// ------------------------------------------------------------------ Euclidean

double EuclideanFamily::theta(const VectorRef& x, const VectorRef& omega) const {
  require_point(x);
  require_direction(omega);
  return omega.dot(x);
}

Vector EuclideanFamily::grad_theta(const VectorRef& x, const VectorRef& omega) const {
  require_point(x);
  return omega;
}

void EuclideanFamily::theta_over_directions(const VectorRef& x, const Matrix& nodes,
                                            Eigen::Ref<Vector> out) const {
  out.noalias() = nodes.transpose() * x;
}

void EuclideanFamily::theta_over_points(const Matrix& points, const VectorRef& omega,
                                        Eigen::Ref<Vector> out) const {
  out.noalias() = points.transpose() * omega;
}

void EuclideanFamily::grad_norm_g_over_directions(const VectorRef& /*x*/, const Matrix& /*nodes*/,
                                                  Eigen::Ref<Vector> out) const {
  out.setOnes();
}

// ---------------------------------------------------------- Hyperbolic ball

double HyperbolicGeodesicFamily::theta(const VectorRef& x, const VectorRef& omega) const {
  require_point(x);
  require_unit_ball(x, "hyperbolic theta");
  return -2.0 * omega.dot(x) / (1.0 + x.squaredNorm());
}

Vector HyperbolicGeodesicFamily::grad_theta(const VectorRef& x, const VectorRef& omega) const {
  require_point(x);
  require_unit_ball(x, "hyperbolic grad_theta");
  const double q = 1.0 + x.squaredNorm();
  return -2.0 * omega / q + (4.0 * omega.dot(x) / (q * q)) * x;
}

double HyperbolicGeodesicFamily::conformal_factor(const VectorRef& x) const {
  require_unit_ball(x, "hyperbolic metric");
  return 2.0 / (1.0 - x.squaredNorm());
}

void HyperbolicGeodesicFamily::theta_over_directions(const VectorRef& x, const Matrix& nodes,
                                                     Eigen::Ref<Vector> out) const {
  require_unit_ball(x, "hyperbolic theta");
  out.noalias() = (-2.0 / (1.0 + x.squaredNorm())) * (nodes.transpose() * x);
}

// --------------------------------------------------------------- Equidistant

EquidistantFamily::EquidistantFamily(int n, Equidistant params) : GeneratingFamily(n), params_(params) {
  if (!(params_.p >= 0.0 && params_.p <= 1.0)) throw ConfigError("equidistant: p must lie in [0, 1]");
}

double EquidistantFamily::theta(const VectorRef& x, const VectorRef& omega) const {
  require_point(x);
  require_unit_ball(x, "equidistant theta");
  return (params_.p - omega.dot(x)) / (1.0 - x.squaredNorm());
}

Vector EquidistantFamily::grad_theta(const VectorRef& x, const VectorRef& omega) const {
  const double th = theta(x, omega);
  return (-omega + 2.0 * th * x) / (1.0 - x.squaredNorm());
}

double EquidistantFamily::conformal_factor(const VectorRef& x) const {
  require_unit_ball(x, "equidistant metric");
  return params_.euclidean_metric ? 1.0 : 2.0 / (1.0 - x.squaredNorm());
}

FamilyParams EquidistantFamily::params() const {
  if (params_.p == 1.0 && !params_.euclidean_metric) return Horosphere{};
  return params_;
}

void EquidistantFamily::theta_over_directions(const VectorRef& x, const Matrix& nodes,
                                              Eigen::Ref<Vector> out) const {
  require_unit_ball(x, "equidistant theta");
  const double inv = 1.0 / (1.0 - x.squaredNorm());
  out.noalias() = -inv * (nodes.transpose() * x);
  out.array() += params_.p * inv;
}

void EquidistantFamily::grad_norm_g_over_directions(const VectorRef& x, const Matrix& nodes,
                                                    Eigen::Ref<Vector> out) const {
  // |grad theta| (1 - |x|^2) = sqrt(4 theta^2 - 4 p theta + 1)
  theta_over_directions(x, nodes, out);
  const double q = 1.0 - x.squaredNorm();
  const double scale = 1.0 / (q * conformal_factor(x));
  const double p = params_.p;
  out = (4.0 * out.array().square() - 4.0 * p * out.array() + 1.0).max(0.0).sqrt() * scale;
}

// --------------------------------------------------------------- Hyperboloid

HyperboloidFamily::HyperboloidFamily(int n, double epsilon) : GeneratingFamily(n), epsilon_(epsilon) {
  if (!(epsilon_ > 1.0)) throw ConfigError("hyperboloid: eps must exceed 1");
}

double HyperboloidFamily::theta(const VectorRef& x, const VectorRef& omega) const {
  require_point(x);
  if (!in_domain(x)) throw DomainError("hyperboloid theta: x = 0 is outside the domain");
  return x.norm() + epsilon_ * omega.dot(x);
}

Vector HyperboloidFamily::grad_theta(const VectorRef& x, const VectorRef& omega) const {
  require_point(x);
  if (!in_domain(x)) throw DomainError("hyperboloid grad_theta: x = 0 is outside the domain");
  return x / x.norm() + epsilon_ * omega;
}

void HyperboloidFamily::theta_over_directions(const VectorRef& x, const Matrix& nodes,
                                              Eigen::Ref<Vector> out) const {
  if (!in_domain(x)) throw DomainError("hyperboloid theta: x = 0 is outside the domain");
  out.noalias() = epsilon_ * (nodes.transpose() * x);
  out.array() += x.norm();
}

void HyperboloidFamily::grad_norm_g_over_directions(const VectorRef& x, const Matrix& nodes,
                                                    Eigen::Ref<Vector> out) const {
  if (!in_domain(x)) throw DomainError("hyperboloid grad_theta: x = 0 is outside the domain");
  const Vector unit = x / x.norm();
  out.noalias() = (2.0 * epsilon_) * (nodes.transpose() * unit);
  out = (out.array() + 1.0 + epsilon_ * epsilon_).max(0.0).sqrt();
}

// ----------------------------------------------------------------- Ellipsoid

EllipsoidFamily::EllipsoidFamily(int n, Vector a) : GeneratingFamily(n), a_(std::move(a)) {
  if (a_.size() != n) throw ConfigError("ellipsoid: need one half-axis per dimension");
  if (!(a_.array() > 0.0).all()) throw ConfigError("ellipsoid: half-axes must be positive");
}

double EllipsoidFamily::theta(const VectorRef& x, const VectorRef& omega) const {
  require_point(x);
  require_direction(omega);
  return (x - a_.cwiseProduct(omega)).squaredNorm();
}

Vector EllipsoidFamily::grad_theta(const VectorRef& x, const VectorRef& omega) const {
  require_point(x);
  return 2.0 * (x - a_.cwiseProduct(omega));
}

bool EllipsoidFamily::in_reconstruction_region(const VectorRef& x) const {
  return x.cwiseQuotient(a_).squaredNorm() < 1.0;
}

double EllipsoidFamily::singularity_distance(const VectorRef& x, const Matrix& nodes) const {
  Vector th(nodes.cols());
  theta_over_directions(x, nodes, th);
  return std::sqrt(th.minCoeff());
}

void EllipsoidFamily::theta_over_directions(const VectorRef& x, const Matrix& nodes,
                                            Eigen::Ref<Vector> out) const {
  // |x - a.w|^2 = |x|^2 - 2 <a.x, w> + |a.w|^2
  const Matrix scaled = a_.asDiagonal() * nodes;
  out.noalias() = -2.0 * (scaled.transpose() * x);
  out += scaled.colwise().squaredNorm().transpose();
  out.array() += x.squaredNorm();
}

void EllipsoidFamily::grad_norm_g_over_directions(const VectorRef& x, const Matrix& nodes,
                                                  Eigen::Ref<Vector> out) const {
  theta_over_directions(x, nodes, out);
  out = 2.0 * out.array().max(0.0).sqrt();
}

// ---------------------------------------------------------------- Trig curve

TrigCurveFamily::TrigCurveFamily(TrigCurve curve) : GeneratingFamily(2), curve_(std::move(curve)) {
  curve_.validate();
}

double TrigCurveFamily::theta(const VectorRef& x, const VectorRef& omega) const {
  require_point(x);
  require_direction(omega);
  const Eigen::Vector2d xi = curve_(std::atan2(omega[1], omega[0]));
  return (Eigen::Vector2d(x[0], x[1]) - xi).squaredNorm();
}

Vector TrigCurveFamily::grad_theta(const VectorRef& x, const VectorRef& omega) const {
  require_point(x);
  const Eigen::Vector2d xi = curve_(std::atan2(omega[1], omega[0]));
  return 2.0 * (Eigen::Vector2d(x[0], x[1]) - xi);
}

Bbox2 TrigCurveFamily::curve_bbox() const {
  Bbox2 b{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
          std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (int j = 0; j < 2048; ++j) {
    const Eigen::Vector2d p = curve_(2.0 * std::numbers::pi * j / 2048);
    b.xmin = std::min(b.xmin, p.x());
    b.xmax = std::max(b.xmax, p.x());
    b.ymin = std::min(b.ymin, p.y());
    b.ymax = std::max(b.ymax, p.y());
  }
  const double pad = 0.02 * std::max(b.xmax - b.xmin, b.ymax - b.ymin);
  return {b.xmin - pad, b.xmax + pad, b.ymin - pad, b.ymax + pad};
}

bool TrigCurveFamily::in_reconstruction_region(const VectorRef& x) const {
  std::call_once(raster_once_, [this] { raster_ = raster_hyperbolic_set(curve_, curve_bbox(), 256, 90); });
  const auto& g = raster_->mask.grid;
  const int i = static_cast<int>(std::floor((x[0] - g.origin[0]) / g.spacing[0]));
  const int j = static_cast<int>(std::floor((x[1] - g.origin[1]) / g.spacing[1]));
  if (i < 0 || j < 0 || i >= g.dims[0] || j >= g.dims[1]) return false;
  return raster_->mask[static_cast<std::size_t>(i) * g.dims[1] + j] > 0.5;
}

double TrigCurveFamily::singularity_distance(const VectorRef& x, const Matrix& nodes) const {
  Vector th(nodes.cols());
  theta_over_directions(x, nodes, th);
  return std::sqrt(th.minCoeff());
}

void TrigCurveFamily::grad_norm_g_over_directions(const VectorRef& x, const Matrix& nodes,
                                                  Eigen::Ref<Vector> out) const {
  theta_over_directions(x, nodes, out);
  out = 2.0 * out.array().max(0.0).sqrt();
}

// --------------------------------------------------------------- tags/factory

FamilyPtr make_family(const FamilyParams& params, int n) {
  if (n < 2 || n > kMaxDiagnosticDim) throw ConfigError("make_family: unsupported dimension " + std::to_string(n));
  return std::visit(
      [n](const auto& p) -> FamilyPtr {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, EuclideanHyperplane>) {
          return std::make_shared<EuclideanFamily>(n);
        } else if constexpr (std::is_same_v<T, HyperbolicGeodesic>) {
          return std::make_shared<HyperbolicGeodesicFamily>(n);
        } else if constexpr (std::is_same_v<T, Equidistant>) {
          return std::make_shared<EquidistantFamily>(n, p);
        } else if constexpr (std::is_same_v<T, Horosphere>) {
          return std::make_shared<EquidistantFamily>(n, Equidistant{1.0, false});
        } else if constexpr (std::is_same_v<T, ConfocalHyperboloid>) {
          return std::make_shared<HyperboloidFamily>(n, p.epsilon);
        } else if constexpr (std::is_same_v<T, SphericalMeansEllipsoid>) {
          return std::make_shared<EllipsoidFamily>(n, p.a);
        } else {
          if (n != 2) throw ConfigError("trigcurve family is two-dimensional");
          return std::make_shared<TrigCurveFamily>(p.curve);
        }
      },
      params);
}

FamilyParams parse_family_tag(const std::string& tag) {
  std::map<std::string, std::string> kv;
  std::stringstream ss(tag);
  std::string item;
  while (std::getline(ss, item, ';')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("family tag: expected key=value, got '" + item + "'");
    kv[item.substr(0, eq)] = item.substr(eq + 1);
  }
  const auto it = kv.find("family");
  if (it == kv.end()) throw ConfigError("family tag: missing family=...");
  const std::string& name = it->second;
  auto get = [&](const std::string& key) -> std::optional<std::string> {
    const auto f = kv.find(key);
    if (f == kv.end()) return std::nullopt;
    return f->second;
  };
  if (name == "euclidean") return EuclideanHyperplane{};
  if (name == "hyperbolic") return HyperbolicGeodesic{};
  if (name == "horosphere") return Horosphere{};
  if (name == "equidistant") {
    Equidistant e;
    if (auto p = get("p")) e.p = parse_double(*p, "p");
    if (auto m = get("metric")) {
      if (*m != "euclidean" && *m != "hyperbolic") throw ConfigError("family tag: metric must be euclidean|hyperbolic");
      e.euclidean_metric = *m == "euclidean";
    }
    if (!(e.p >= 0.0 && e.p <= 1.0)) throw ConfigError("family tag: p must lie in [0, 1]");
    return e;
  }
  if (name == "hyperboloid") {
    ConfocalHyperboloid h;
    if (auto e = get("eps")) h.epsilon = parse_double(*e, "eps");
    if (!(h.epsilon > 1.0)) throw ConfigError("family tag: eps must exceed 1");
    return h;
  }
  if (name == "ellipsoid") {
    const auto a = get("a");
    if (!a) throw ConfigError("family tag: ellipsoid needs a=a1,a2[,a3]");
    std::vector<double> axes;
    std::stringstream as(*a);
    std::string v;
    while (std::getline(as, v, ',')) axes.push_back(parse_double(v, "half-axis"));
    SphericalMeansEllipsoid e{Eigen::Map<Vector>(axes.data(), static_cast<Eigen::Index>(axes.size()))};
    if (e.a.size() < 2 || !(e.a.array() > 0.0).all()) throw ConfigError("family tag: half-axes must be positive");
    return e;
  }
  if (name == "trigcurve") {
    const auto c = get("curve");
    if (!c) throw ConfigError("family tag: trigcurve needs curve=...");
    return SphericalMeansTrigCurve{parse_trig_curve(*c)};
  }
  throw ConfigError("family tag: unknown family '" + name + "'");
}

std::string format_family_tag(const FamilyParams& params) {
  return std::visit(
      [](const auto& p) -> std::string {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, EuclideanHyperplane>) {
          return "family=euclidean";
        } else if constexpr (std::is_same_v<T, HyperbolicGeodesic>) {
          return "family=hyperbolic";
        } else if constexpr (std::is_same_v<T, Equidistant>) {
          return "family=equidistant;p=" + format_double(p.p) + (p.euclidean_metric ? ";metric=euclidean" : "");
        } else if constexpr (std::is_same_v<T, Horosphere>) {
          return "family=horosphere";
        } else if constexpr (std::is_same_v<T, ConfocalHyperboloid>) {
          return "family=hyperboloid;eps=" + format_double(p.epsilon);
        } else if constexpr (std::is_same_v<T, SphericalMeansEllipsoid>) {
          std::string s = "family=ellipsoid;a=";
          for (Eigen::Index i = 0; i < p.a.size(); ++i) s += (i ? "," : "") + format_double(p.a[i]);
          return s;
        } else {
          std::string curve = format_trig_curve(p.curve);
          std::replace(curve.begin(), curve.end(), ';', '/');
          return "family=trigcurve;curve=" + curve;
        }
      },
      params);
}

}  // namespace mft
