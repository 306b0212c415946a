#pragma once

#include "mft/core.hpp"
#include "mft/hyperbolic2d.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <variant>

namespace mft {

struct EuclideanHyperplane {};
struct HyperbolicGeodesic {};
/// Equidistant spheres to a geodesic hyperplane in the ball model; p = 1 is the horosphere.
/// `euclidean_metric` swaps the hyperbolic metric for the flat one (same level sets).
struct Equidistant {
  double p = 0.0;
  bool euclidean_metric = false;
};
struct Horosphere {};
struct ConfocalHyperboloid {
  double epsilon = 2.0;
};
struct SphericalMeansEllipsoid {
  Vector a;
};
struct SphericalMeansTrigCurve {
  TrigCurve curve;
};

using FamilyParams = std::variant<EuclideanHyperplane, HyperbolicGeodesic, Equidistant, Horosphere,
                                  ConfocalHyperboloid, SphericalMeansEllipsoid, SphericalMeansTrigCurve>;

/// Resolved generating function theta(x, omega) - lambda on a domain with conformal metric
/// g = c(x)^2 * euclidean. Implementations are immutable.
class GeneratingFamily {
 public:
  explicit GeneratingFamily(int n) : n_(n) {}
  virtual ~GeneratingFamily() = default;

  int dim() const { return n_; }

  virtual double theta(const VectorRef& x, const VectorRef& omega) const = 0;
  virtual Vector grad_theta(const VectorRef& x, const VectorRef& omega) const = 0;
  virtual double conformal_factor(const VectorRef& /*x*/) const { return 1.0; }
  virtual bool in_domain(const VectorRef& /*x*/) const { return true; }
  /// Where reconstructions are meaningful; defaults to the domain.
  virtual bool in_reconstruction_region(const VectorRef& x) const { return in_domain(x); }
  /// Distance from x to the set where |grad theta| vanishes (infinite when there is none).
  virtual double singularity_distance(const VectorRef& /*x*/, const Matrix& /*nodes*/) const {
    return std::numeric_limits<double>::infinity();
  }
  /// Degree m of theta as a polynomial in omega.
  virtual int trig_degree() const = 0;
  virtual FamilyParams params() const = 0;

  double grad_norm_g(const VectorRef& x, const VectorRef& omega) const {
    return grad_theta(x, omega).norm() / conformal_factor(x);
  }
  double volume_density(const VectorRef& x) const { return std::pow(conformal_factor(x), n_); }
  std::string tag() const;

  /// theta(x, omega_j) for every column of `nodes`.
  virtual void theta_over_directions(const VectorRef& x, const Matrix& nodes, Eigen::Ref<Vector> out) const;
  /// theta(x_i, omega) for every column of `points`.
  virtual void theta_over_points(const Matrix& points, const VectorRef& omega, Eigen::Ref<Vector> out) const;
  /// grad_norm_g(x, omega_j) for every column of `nodes`.
  virtual void grad_norm_g_over_directions(const VectorRef& x, const Matrix& nodes, Eigen::Ref<Vector> out) const;

  /// Exact-ish range of theta over in-domain grid cells and a dense direction rule.
  std::pair<double, double> theta_range(const GridSpec& grid) const;
  /// theta_range padded by 5% plus `stencil_bins` extra samples on each side.
  LambdaGrid make_lambda_grid(const GridSpec& grid, int count, int stencil_bins) const;

 protected:
  void require_point(const VectorRef& x) const;
  void require_direction(const VectorRef& omega) const;

  int n_;
};

using FamilyPtr = std::shared_ptr<const GeneratingFamily>;

FamilyPtr make_family(const FamilyParams& params, int n);

/// "family=<name>[;key=value...]". Trig polynomials inside a tag use '/' between the cosine
/// and sine lists.
FamilyParams parse_family_tag(const std::string& tag);
std::string format_family_tag(const FamilyParams& params);

class EuclideanFamily final : public GeneratingFamily {
 public:
  using GeneratingFamily::GeneratingFamily;
  double theta(const VectorRef& x, const VectorRef& omega) const override;
  Vector grad_theta(const VectorRef& x, const VectorRef& omega) const override;
  int trig_degree() const override { return 1; }
  FamilyParams params() const override { return EuclideanHyperplane{}; }
  void theta_over_directions(const VectorRef& x, const Matrix& nodes, Eigen::Ref<Vector> out) const override;
  void theta_over_points(const Matrix& points, const VectorRef& omega, Eigen::Ref<Vector> out) const override;
  void grad_norm_g_over_directions(const VectorRef& x, const Matrix& nodes, Eigen::Ref<Vector> out) const override;
};

class HyperbolicGeodesicFamily final : public GeneratingFamily {
 public:
  using GeneratingFamily::GeneratingFamily;
  double theta(const VectorRef& x, const VectorRef& omega) const override;
  Vector grad_theta(const VectorRef& x, const VectorRef& omega) const override;
  double conformal_factor(const VectorRef& x) const override;
  bool in_domain(const VectorRef& x) const override { return x.squaredNorm() < 1.0; }
  int trig_degree() const override { return 1; }
  FamilyParams params() const override { return HyperbolicGeodesic{}; }
  void theta_over_directions(const VectorRef& x, const Matrix& nodes, Eigen::Ref<Vector> out) const override;
};

class EquidistantFamily final : public GeneratingFamily {
 public:
  EquidistantFamily(int n, Equidistant params);
  double theta(const VectorRef& x, const VectorRef& omega) const override;
  Vector grad_theta(const VectorRef& x, const VectorRef& omega) const override;
  double conformal_factor(const VectorRef& x) const override;
  bool in_domain(const VectorRef& x) const override { return x.squaredNorm() < 1.0; }
  int trig_degree() const override { return 1; }
  FamilyParams params() const override;
  void theta_over_directions(const VectorRef& x, const Matrix& nodes, Eigen::Ref<Vector> out) const override;
  void grad_norm_g_over_directions(const VectorRef& x, const Matrix& nodes, Eigen::Ref<Vector> out) const override;

  double p() const { return params_.p; }

 private:
  Equidistant params_;
};

class HyperboloidFamily final : public GeneratingFamily {
 public:
  HyperboloidFamily(int n, double epsilon);
  double theta(const VectorRef& x, const VectorRef& omega) const override;
  Vector grad_theta(const VectorRef& x, const VectorRef& omega) const override;
  bool in_domain(const VectorRef& x) const override { return x.norm() > 1e-12; }
  int trig_degree() const override { return 1; }
  FamilyParams params() const override { return ConfocalHyperboloid{epsilon_}; }
  void theta_over_directions(const VectorRef& x, const Matrix& nodes, Eigen::Ref<Vector> out) const override;
  void grad_norm_g_over_directions(const VectorRef& x, const Matrix& nodes, Eigen::Ref<Vector> out) const override;

  double epsilon() const { return epsilon_; }

 private:
  double epsilon_;
};

class EllipsoidFamily final : public GeneratingFamily {
 public:
  EllipsoidFamily(int n, Vector a);
  double theta(const VectorRef& x, const VectorRef& omega) const override;
  Vector grad_theta(const VectorRef& x, const VectorRef& omega) const override;
  /// Strictly inside the ellipsoid sum (x_i / a_i)^2 < 1.
  bool in_reconstruction_region(const VectorRef& x) const override;
  double singularity_distance(const VectorRef& x, const Matrix& nodes) const override;
  int trig_degree() const override { return 2; }
  FamilyParams params() const override { return SphericalMeansEllipsoid{a_}; }
  void theta_over_directions(const VectorRef& x, const Matrix& nodes, Eigen::Ref<Vector> out) const override;
  void grad_norm_g_over_directions(const VectorRef& x, const Matrix& nodes, Eigen::Ref<Vector> out) const override;

  const Vector& half_axes() const { return a_; }

 private:
  Vector a_;
};

class TrigCurveFamily final : public GeneratingFamily {
 public:
  explicit TrigCurveFamily(TrigCurve curve);
  double theta(const VectorRef& x, const VectorRef& omega) const override;
  Vector grad_theta(const VectorRef& x, const VectorRef& omega) const override;
  /// Membership in the hyperbolic set H, looked up in a lazily built raster.
  bool in_reconstruction_region(const VectorRef& x) const override;
  double singularity_distance(const VectorRef& x, const Matrix& nodes) const override;
  int trig_degree() const override { return 2 * curve_.degree(); }
  FamilyParams params() const override { return SphericalMeansTrigCurve{curve_}; }
  void grad_norm_g_over_directions(const VectorRef& x, const Matrix& nodes, Eigen::Ref<Vector> out) const override;

  const TrigCurve& curve() const { return curve_; }
  Bbox2 curve_bbox() const;

 private:
  TrigCurve curve_;
  mutable std::once_flag raster_once_;
  mutable std::optional<HyperbolicRaster> raster_;
};

}  // namespace mft
