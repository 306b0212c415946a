#pragma once

#include "mft/core.hpp"

#include <Eigen/Core>

#include <cmath>
#include <complex>
#include <string>
#include <vector>

namespace mft {

/// Real trigonometric polynomial sum_j a_j cos(j phi) + b_j sin(j phi), j = 0..k.
/// b[0] is carried for symmetry and always zero.
template <typename Scalar>
struct BasicTrigPolynomial {
  using Coeffs = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Coeffs a;
  Coeffs b;

  BasicTrigPolynomial() : a(Coeffs::Zero(1)), b(Coeffs::Zero(1)) {}
  BasicTrigPolynomial(Coeffs cos_coeffs, Coeffs sin_coeffs)
      : a(std::move(cos_coeffs)), b(std::move(sin_coeffs)) {
    const auto len = std::max<Eigen::Index>({a.size(), b.size(), 1});
    const auto na = a.size();
    const auto nb = b.size();
    a.conservativeResize(len);
    b.conservativeResize(len);
    for (auto i = na; i < len; ++i) a[i] = Scalar(0);
    for (auto i = nb; i < len; ++i) b[i] = Scalar(0);
    b[0] = Scalar(0);
  }

  static BasicTrigPolynomial constant(Scalar c) {
    BasicTrigPolynomial t;
    t.a[0] = c;
    return t;
  }
  static BasicTrigPolynomial cos_term(int j, Scalar c = Scalar(1)) {
    BasicTrigPolynomial t;
    t.resize(j);
    t.a[j] = c;
    return t;
  }
  static BasicTrigPolynomial sin_term(int j, Scalar c = Scalar(1)) {
    BasicTrigPolynomial t;
    t.resize(j);
    t.b[j] = c;
    return t;
  }

  /// Nominal length minus one; may exceed degree() when top coefficients vanish.
  int order() const { return static_cast<int>(a.size()) - 1; }

  /// Highest j with a_j != 0 or b_j != 0 (0 for the zero polynomial).
  int degree() const {
    for (int j = order(); j > 0; --j) {
      if (a[j] != Scalar(0) || b[j] != Scalar(0)) return j;
    }
    return 0;
  }

  bool is_zero() const { return degree() == 0 && a[0] == Scalar(0); }

  void resize(int k) {
    const auto old = a.size();
    a.conservativeResize(k + 1);
    b.conservativeResize(k + 1);
    for (auto i = old; i < k + 1; ++i) {
      a[i] = Scalar(0);
      b[i] = Scalar(0);
    }
  }

  template <typename Arg>
  Arg operator()(Arg phi) const {
    using std::cos;
    using std::sin;
    Arg sum = Arg(a[0]);
    for (int j = 1; j <= order(); ++j) {
      sum += Arg(a[j]) * cos(Arg(j) * phi) + Arg(b[j]) * sin(Arg(j) * phi);
    }
    return sum;
  }

  BasicTrigPolynomial derivative() const {
    BasicTrigPolynomial d = *this;
    d.a[0] = Scalar(0);
    for (int j = 1; j <= order(); ++j) {
      d.a[j] = Scalar(j) * b[j];
      d.b[j] = -Scalar(j) * a[j];
    }
    return d;
  }

  /// Laurent coefficients c_{-k..k} of t in z = e^{i phi}, stored at offset k.
  std::vector<std::complex<Scalar>> laurent() const {
    const int k = order();
    std::vector<std::complex<Scalar>> c(2 * k + 1);
    c[k] = a[0];
    for (int j = 1; j <= k; ++j) {
      c[k + j] = std::complex<Scalar>(a[j], -b[j]) / Scalar(2);
      c[k - j] = std::complex<Scalar>(a[j], b[j]) / Scalar(2);
    }
    return c;
  }

  static BasicTrigPolynomial from_laurent(const std::vector<std::complex<Scalar>>& c) {
    const int k = static_cast<int>(c.size() / 2);
    BasicTrigPolynomial t;
    t.resize(k);
    t.a[0] = c[k].real();
    for (int j = 1; j <= k; ++j) {
      t.a[j] = Scalar(2) * c[k + j].real();
      t.b[j] = Scalar(-2) * c[k + j].imag();
    }
    return t;
  }

  friend BasicTrigPolynomial operator+(BasicTrigPolynomial lhs, const BasicTrigPolynomial& rhs) {
    if (rhs.order() > lhs.order()) lhs.resize(rhs.order());
    lhs.a.head(rhs.a.size()) += rhs.a;
    lhs.b.head(rhs.b.size()) += rhs.b;
    return lhs;
  }
  friend BasicTrigPolynomial operator-(BasicTrigPolynomial lhs, const BasicTrigPolynomial& rhs) {
    return lhs + rhs * Scalar(-1);
  }
  friend BasicTrigPolynomial operator*(BasicTrigPolynomial lhs, Scalar s) {
    lhs.a *= s;
    lhs.b *= s;
    return lhs;
  }
  friend BasicTrigPolynomial operator*(Scalar s, BasicTrigPolynomial rhs) { return rhs * s; }
  friend BasicTrigPolynomial operator*(const BasicTrigPolynomial& lhs, const BasicTrigPolynomial& rhs) {
    const auto cl = lhs.laurent();
    const auto cr = rhs.laurent();
    std::vector<std::complex<Scalar>> out(cl.size() + cr.size() - 1);
    for (std::size_t i = 0; i < cl.size(); ++i) {
      for (std::size_t j = 0; j < cr.size(); ++j) out[i + j] += cl[i] * cr[j];
    }
    return from_laurent(out);
  }
};

using TrigPolynomial = BasicTrigPolynomial<double>;

/// Parses "k:a0,a1,..,ak;b1,..,bk" (the "k:" prefix and the sine list are optional).
TrigPolynomial parse_trig_polynomial(const std::string& text);
std::string format_trig_polynomial(const TrigPolynomial& t);

/// Plane curve phi -> (xi1(phi), xi2(phi)).
struct TrigCurve {
  TrigPolynomial xi1;
  TrigPolynomial xi2;

  int degree() const { return std::max(xi1.degree(), xi2.degree()); }
  Eigen::Vector2d operator()(double phi) const { return {xi1(phi), xi2(phi)}; }
  void validate() const;
};

/// Named example curves: "tri" (3-fold), "square" (4-fold), "pentagon" (5-fold), "circle".
TrigCurve named_curve(const std::string& name);
/// Accepts a name or "<poly>|<poly>" in parse_trig_polynomial syntax.
TrigCurve parse_trig_curve(const std::string& text);
std::string format_trig_curve(const TrigCurve& c);

double trig_eval(const TrigPolynomial& t, double phi);

struct RootCount {
  int total = 0;
  int on_circle = 0;
  std::vector<std::complex<double>> roots;
  /// max over roots of ||z| - 1|; zero when there are no roots.
  double worst_circle_distance = 0.0;
  bool deflated = false;
};

/// Counts zeros of t on the real circle via the degree-2k lift z^k t(z) and its
/// companion-matrix eigenvalues; a root counts as real when ||z| - 1| <= tol.
RootCount roots_on_unit_circle(const TrigPolynomial& t, double tol = 1e-7);

/// <normal, xi(phi) - x>: its real roots are the parameters where the line through x with
/// the given normal meets the curve.
TrigPolynomial line_pencil_poly(const TrigCurve& curve, const Eigen::Vector2d& x,
                                const Eigen::Vector2d& normal);

/// theta(x, .) - theta(y, .) for theta(x, phi) = |x - xi(phi)|^2.
TrigPolynomial squared_distance_difference(const TrigCurve& curve, const Eigen::Vector2d& x,
                                           const Eigen::Vector2d& y);

enum class PointClass { exterior = 0, hyperbolic = 1, boundary = 2 };

/// Largest ||z| - 1| over the roots of every line-pencil polynomial through x; the point
/// is hyperbolic when this margin stays within tol. Stops early once the margin exceeds
/// `stop_above`.
double hyperbolicity_margin(const TrigCurve& curve, const Eigen::Vector2d& x, int normal_count,
                            double tol, double stop_above);

PointClass classify_point(const TrigCurve& curve, const Eigen::Vector2d& x, int normal_count,
                          double tol);

bool is_hyperbolic(const TrigCurve& curve, const Eigen::Vector2d& x, int normal_count = 180,
                   double tol = 1e-7);

struct Bbox2 {
  double xmin, xmax, ymin, ymax;
};

struct HyperbolicRaster {
  ScalarField mask;      // 1 where hyperbolic, 0 elsewhere
  ScalarField boundary;  // 1 where the classification is ambiguous within tol band
};

HyperbolicRaster raster_hyperbolic_set(const TrigCurve& curve, const Bbox2& bbox, int resolution,
                                       int normal_count = 180, double tol = 1e-7);

struct ConvexityReport {
  bool empty = false;
  std::size_t mask_pixels = 0;
  std::size_t hull_pixels = 0;
  std::size_t defect_pixels = 0;
  double defect_fraction = 0.0;
};

/// Compares a 2D {0,1} mask against the raster of the convex hull of its own pixels.
/// Pixels flagged in `boundary` (optional) are not counted as defects.
ConvexityReport convexity_check(const ScalarField& mask, const ScalarField* boundary = nullptr);

struct SymmetryReport {
  std::size_t compared = 0;
  std::size_t interior_mismatches = 0;
  std::size_t boundary_mismatches = 0;
};

/// Rotates the mask by 2 pi / fold about the origin and counts label disagreements;
/// disagreements within one pixel layer of the mask boundary are tallied separately.
SymmetryReport symmetry_check(const ScalarField& mask, int fold);

}  // namespace mft
