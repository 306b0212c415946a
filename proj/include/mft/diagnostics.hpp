#pragma once

#include "mft/core.hpp"
#include "mft/geometry.hpp"
#include "mft/hyperbolic2d.hpp"

#include <complex>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

namespace mft {

using Complex = std::complex<double>;

/// sum_j w_j (theta(x, omega_j) - theta(y, omega_j) - i eps)^(-power); power defaults to n.
Complex theta_kernel(const GeneratingFamily& family, const VectorRef& x, const VectorRef& y, double eps,
                     const DirectionSet& dirs, int power = 0);

/// eps_k = eps0 * 2^-k, k < levels.
std::vector<double> eps_sequence(double eps0, int levels);

struct FOResult {
  Complex value;            // extrapolated to eps -> 0
  std::vector<Complex> raw; // per eps level
  bool trusted = true;      // |a| < |v|
};

/// d(omega) evaluated for every column of `nodes`.
using DirectionFunction = std::function<void(const Matrix& nodes, Eigen::Ref<Vector> out)>;

struct GradedRuleConfig {
  int scan_count = 512;   // samples per curve used to locate zeros of d
  int panel_order = 16;   // Gauss-Legendre nodes per panel
  int sub_polar_count = 8;
  int azimuth_count = 32;
};

/// Direction rule resolving the poles of (d(omega) - i eps)^(-n) for eps >= eps_min. For n = 2 the
/// circle; for n >= 3 half great circles from `axis` to -axis through each node of a rule on the
/// complementary S^{n-2}, weighted by sin^{n-2}. Along every curve, composite Gauss-Legendre
/// panels are graded geometrically toward each zero of d down to its pole distance.
DirectionSet graded_rule(const DirectionFunction& d, int n, const Vector& axis, double eps_min,
                         const GradedRuleConfig& cfg = {});

/// graded_rule for d(omega) = <omega, v> - a, with axis v.
DirectionSet fo_rule(const VectorRef& v, double a, double eps_min, const GradedRuleConfig& cfg = {});

/// sum_j w_j (<omega_j, v> - a - i eps)^(-n).
Complex fo_integral(const VectorRef& v, double a, int n, double eps, const DirectionSet& dirs);
FOResult fo_extrapolated(const VectorRef& v, double a, int n, const std::vector<double>& eps,
                         const DirectionSet& dirs);

/// The same integral reduced to the angle psi from v:
/// |S^{n-2}| int_0^pi (|v| cos psi - a - i eps)^(-n) sin^{n-2} psi dpsi, on panels graded toward
/// the zero psi_c with |v| cos psi - a evaluated from the offset psi - psi_c, so node rounding
/// does not move the pole. Panels resolve every eps >= eps_min.
Complex fo_integral_polar(const VectorRef& v, double a, int n, double eps, double eps_min, int panel_order = 16);
FOResult fo_extrapolated_polar(const VectorRef& v, double a, int n, const std::vector<double>& eps,
                               int panel_order = 16);

struct PVTrigResult {
  double value = 0.0;         // extrapolated
  std::vector<double> raw;    // per eps level
  std::vector<double> eps;
  double scale = 0.0;         // sigma = min over real roots of |t'(r)| * min(1, gap to the next root)
  int nodes = 0;
  double sign_gap = 0.0;      // max over eps of |Re I(+eps) - Re I(-eps)|; raw holds their mean
  bool degree_ok = true;      // deg numer < deg denom
  bool real_rooted = true;    // all 2k roots of denom on the circle
  bool flagged() const { return !degree_ok || !real_rooted; }
};

/// Re int_0^{2 pi} (s / (t -+ i eps sigma))^n dphi, averaged over both signs and extrapolated
/// over eps_k = eps0 2^-k.
PVTrigResult pv_trig(const TrigPolynomial& numer, const TrigPolynomial& denom, int n, double eps0 = 0.005,
                     int levels = 4);
/// Single-eps evaluation on `nodes` uniform points offset by `offset` steps.
double pv_trig_at(const TrigPolynomial& numer, const TrigPolynomial& denom, int n, double eps, int nodes,
                  double offset = 0.0);

/// Real-rooted trig polynomial of degree k: product of cos((a-b)/2) - cos(phi - (a+b)/2) over
/// root pairs (a, b); its roots are exactly the given angles.
TrigPolynomial trig_from_root_pairs(const std::vector<std::pair<double, double>>& pairs);

struct KernelPair {
  Vector x;
  Vector y;
  std::vector<double> eps;
  std::vector<Complex> values;
  Complex extrapolated;
  double scale = 0.0;     // |Theta| at the largest eps
  double residual = 0.0;  // |Re| (even n) or |Im| (odd n) of the extrapolation
  bool pass = false;
};

struct KernelReport {
  std::string family_tag;
  int n = 0;
  double tolerance = 1e-3;
  std::vector<KernelPair> pairs;

  std::size_t failures() const;
  double max_relative_residual() const;
  void write(std::ostream& os) const;
};

struct CertifyConfig {
  int pairs = 100;
  double eps0 = 0.05;  // relative to min(max |d|, zero separation of d), d = theta(x, .) - theta(y, .)
  int levels = 4;
  double tolerance = 1e-3;
  GradedRuleConfig rule;
  std::uint64_t seed = 1;
};

using RegionSampler = std::function<Vector(std::mt19937_64&)>;

/// Uniform sampler on a box, rejecting points where `accept` is false.
RegionSampler box_sampler(const Vector& lo, const Vector& hi, std::function<bool(const Vector&)> accept = {});

/// graded_rule for d = theta(x, .) - theta(y, .) at eps_min; the meridian axis is the affine part
/// of d, estimated from antipodal axis samples.
DirectionSet kernel_rule(const GeneratingFamily& family, const VectorRef& x, const VectorRef& y, double eps_min,
                         const GradedRuleConfig& cfg);

KernelPair certify_pair(const GeneratingFamily& family, const VectorRef& x, const VectorRef& y,
                        const CertifyConfig& cfg);
KernelReport certify_family(const GeneratingFamily& family, const RegionSampler& sampler,
                            const CertifyConfig& cfg = {});

struct Eq9Report {
  std::vector<Vector> points;
  std::vector<double> first_form;   // n-th power kernel, eps-regularized and extrapolated
  std::vector<double> second_form;  // derivative then single-pole PV
  double max_deviation = 0.0;       // max |A - B| / max |B|
  double printed_sign_ratio = 0.0;  // mean of A_printed / B with the printed leading sign
  double sign_gap = 0.0;            // max |A(+eps) - A(-eps)| / max |B|; A uses their mean
};

/// int (alpha + beta lambda) / (t - lambda - i eps)^n over [l0, l1], closed form; eps < 0 gives the +i0 side.
Complex power_cell_integral(double alpha, double beta, double l0, double l1, double t, double eps, int n);

/// Re int g(lambda) / (t - lambda - i eps)^n for the piecewise-linear interpolant g.
Complex power_kernel_integral(const VectorRef& samples, const LambdaGrid& grid, double t, double eps, int n);

/// Compares both even-n forms of the reconstruction at the given points.
Eq9Report equivalence_check_eq9(const Sinogram& s, const GeneratingFamily& family, const std::vector<Vector>& points,
                                int levels = 4, double eps0_bins = 0.5);

}  // namespace mft
