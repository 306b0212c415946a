#include "mft/phantoms.hpp"

#include <cmath>
#include <sstream>

namespace mft {

bool ellipse_contains(const EllipseSpec& e, const Eigen::Vector2d& x) {
  const Eigen::Vector2d d = x - e.center;
  const double c = std::cos(e.angle);
  const double s = std::sin(e.angle);
  const double u = (c * d.x() + s * d.y()) / e.axes.x();
  const double v = (-s * d.x() + c * d.y()) / e.axes.y();
  return u * u + v * v <= 1.0;
}

double gaussian_value(const GaussianSpec& g, const VectorRef& x) {
  const double r2 = (x - g.center).squaredNorm();
  return g.amplitude * std::exp(-0.5 * r2 / (g.width * g.width));
}

ScalarField phantom_ellipses(const std::vector<EllipseSpec>& spec, const GridSpec& grid) {
  if (!spec.empty() && grid.n != 2) throw ConfigError("phantom_ellipses: ellipses need a 2D grid");
  for (const auto& e : spec) {
    if (!(e.axes.array() > 0.0).all()) throw ConfigError("phantom_ellipses: half-axes must be positive");
  }
  return field_from(grid, [&](const Vector& x) {
    double v = 0.0;
    for (const auto& e : spec) {
      if (ellipse_contains(e, Eigen::Vector2d(x[0], x[1]))) v += e.amplitude;
    }
    return v;
  });
}

ScalarField phantom_gaussians(const std::vector<GaussianSpec>& spec, const GridSpec& grid) {
  for (const auto& g : spec) {
    if (!(g.width > 0.0)) throw ConfigError("phantom_gaussians: widths must be positive");
    if (g.center.size() != grid.n) throw ConfigError("phantom_gaussians: center dimension mismatch");
  }
  return field_from(grid, [&](const Vector& x) {
    double v = 0.0;
    for (const auto& g : spec) {
      const double cut = kGaussianTruncation * g.width;
      if ((x - g.center).squaredNorm() <= cut * cut) v += gaussian_value(g, x);
    }
    return v;
  });
}

ScalarField phantom(const PhantomSpec& spec, const GridSpec& grid) {
  ScalarField f = phantom_gaussians(spec.gaussians, grid);
  if (!spec.ellipses.empty()) f.values += phantom_ellipses(spec.ellipses, grid).values;
  return f;
}

double phantom_value(const PhantomSpec& spec, const VectorRef& x) {
  double v = 0.0;
  for (const auto& e : spec.ellipses) {
    if (ellipse_contains(e, Eigen::Vector2d(x[0], x[1]))) v += e.amplitude;
  }
  for (const auto& g : spec.gaussians) v += gaussian_value(g, x);
  return v;
}

PhantomSpec parse_phantom_spec(const std::string& text, int n) {
  PhantomSpec spec;
  std::string normalized = text;
  for (auto& ch : normalized) {
    if (ch == ';') ch = '\n';
  }
  std::istringstream lines(normalized);
  std::string line;
  int lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream in(line);
    std::string kind;
    if (!(in >> kind)) continue;
    std::vector<double> nums;
    double v;
    while (in >> v) nums.push_back(v);
    if (!in.eof()) throw ConfigError("phantom spec line " + std::to_string(lineno) + ": bad number");
    if (kind == "ellipse") {
      if (n != 2) throw ConfigError("phantom spec: ellipses need n = 2");
      if (nums.size() != 6) throw ConfigError("phantom spec line " + std::to_string(lineno) + ": ellipse needs 6 numbers");
      EllipseSpec e;
      e.center = {nums[0], nums[1]};
      e.axes = {nums[2], nums[3]};
      e.angle = nums[4];
      e.amplitude = nums[5];
      if (!(e.axes.array() > 0.0).all()) throw ConfigError("phantom spec: ellipse half-axes must be positive");
      spec.ellipses.push_back(e);
    } else if (kind == "gaussian") {
      if (static_cast<int>(nums.size()) != n + 2) {
        throw ConfigError("phantom spec line " + std::to_string(lineno) + ": gaussian needs " +
                          std::to_string(n + 2) + " numbers");
      }
      GaussianSpec g;
      g.center = Eigen::Map<Vector>(nums.data(), n);
      g.width = nums[n];
      g.amplitude = nums[n + 1];
      if (!(g.width > 0.0)) throw ConfigError("phantom spec: gaussian width must be positive");
      spec.gaussians.push_back(g);
    } else {
      throw ConfigError("phantom spec line " + std::to_string(lineno) + ": unknown shape '" + kind + "'");
    }
  }
  return spec;
}

ErrorMetrics error_metrics(const ScalarField& f, const ScalarField& g, const ScalarField* mask) {
  if (!(f.grid == g.grid) || (mask != nullptr && !(mask->grid == f.grid))) {
    throw ConfigError("error_metrics: grids differ");
  }
  ErrorMetrics m;
  double diff2 = 0.0;
  double ref2 = 0.0;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < f.values.size(); ++i) {
    if (mask != nullptr && mask->values[i] <= 0.5) continue;
    const double d = f.values[i] - g.values[i];
    diff2 += d * d;
    ref2 += g.values[i] * g.values[i];
    sum += d;
    m.max_abs = std::max(m.max_abs, std::abs(d));
    ++m.count;
  }
  if (m.count > 0) m.mean = sum / static_cast<double>(m.count);
  m.rel_l2 = ref2 > 0.0 ? std::sqrt(diff2 / ref2) : std::sqrt(diff2);
  return m;
}

}  // namespace mft
