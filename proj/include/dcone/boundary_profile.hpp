#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "dcone/errors.hpp"
#include "dcone/geometry.hpp"

namespace dcone {

/// Angle profile beta on the unit circle, stored as a finite trigonometric
/// polynomial
///
///   beta(t) = a_0 + sum_{k=1..K} a_k cos(kt) + b_k sin(kt).
///
/// Derivatives are term-wise exact and 2pi-periodicity is structural, which
/// keeps the admissibility checks and the cone traces free of interpolation
/// error.
class BoundaryProfile {
 public:
  static constexpr int kMaxHarmonic = 32;

  BoundaryProfile() : cos_coeffs_(1, 0.0) {}

  /// cos_coeffs = (a_0 ... a_K), sin_coeffs = (b_1 ... b_K); the two lists may
  /// have different lengths, the shorter one is zero-padded.
  BoundaryProfile(std::vector<double> cos_coeffs, std::vector<double> sin_coeffs)
      : cos_coeffs_(std::move(cos_coeffs)), sin_coeffs_(std::move(sin_coeffs)) {
    if (cos_coeffs_.empty()) cos_coeffs_.push_back(0.0);
    const int k = static_cast<int>(
        std::max(cos_coeffs_.size() - 1, sin_coeffs_.size()));
    if (k > kMaxHarmonic)
      throw InvalidParameter("profile harmonic index " + std::to_string(k) +
                             " exceeds supported maximum " +
                             std::to_string(kMaxHarmonic));
    for (double c : cos_coeffs_)
      if (!std::isfinite(c)) throw InvalidParameter("non-finite cos coefficient");
    for (double c : sin_coeffs_)
      if (!std::isfinite(c)) throw InvalidParameter("non-finite sin coefficient");
  }

  int max_harmonic() const {
    return static_cast<int>(std::max(cos_coeffs_.size() - 1, sin_coeffs_.size()));
  }

  /// beta(t), beta'(t) or beta''(t) by term-wise differentiation.
  double eval(double t, int order = 0) const {
    if (order < 0 || order > 2)
      throw InvalidParameter("derivative order must be 0, 1 or 2");
    double sum = (order == 0) ? cos_coeffs_[0] : 0.0;
    const int k_max = max_harmonic();
    for (int k = 1; k <= k_max; ++k) {
      const double a = k < static_cast<int>(cos_coeffs_.size()) ? cos_coeffs_[k] : 0.0;
      const double b = k <= static_cast<int>(sin_coeffs_.size()) ? sin_coeffs_[k - 1] : 0.0;
      const double c = std::cos(k * t), s = std::sin(k * t);
      switch (order) {
        case 0: sum += a * c + b * s; break;
        case 1: sum += k * (-a * s + b * c); break;
        case 2: sum += -k * k * (a * c + b * s); break;
      }
    }
    return sum;
  }

  const std::vector<double>& cos_coeffs() const { return cos_coeffs_; }
  const std::vector<double>& sin_coeffs() const { return sin_coeffs_; }

  /// Number of angular quadrature nodes that integrates products of this
  /// profile (degree <= 2K) exactly with the periodic trapezoid rule.
  int quadrature_nodes() const { return std::max(256, 16 * max_harmonic()); }

 private:
  std::vector<double> cos_coeffs_;
  std::vector<double> sin_coeffs_;
};

/// The canonical admissible profile beta(t) = sqrt(3/2) + cos(2t).
inline BoundaryProfile paper_default_profile() {
  return BoundaryProfile({std::sqrt(1.5), 0.0, 1.0}, {});
}

struct AdmissibilityReport {
  double condition1;         ///< int (beta^2 - beta'^2) dt, periodic trapezoid
  double condition1_closed;  ///< same integral in closed Parseval form
  double condition2;         ///< int |beta + beta''| dt
  bool admissible;
};

inline constexpr double kAdmissibilityTol = 1e-9;   // |condition1| at most this
inline constexpr double kDegeneracyTol = 1e-6;      // condition2 must exceed this

/// Checks the two boundary-data conditions: the mean-stretch integral must
/// vanish and the profile must not be an affine-in-(cos,sin) degenerate one.
/// condition1 is evaluated both by quadrature and by the Parseval identity
///   2 pi a_0^2 + pi sum_k (1 - k^2)(a_k^2 + b_k^2);
/// the two routes agreeing is itself a correctness check on the quadrature.
inline AdmissibilityReport check_admissibility(const BoundaryProfile& profile) {
  const int n = profile.quadrature_nodes();
  const double w = two_pi / n;
  double c1 = 0.0, c2 = 0.0;
  for (int j = 0; j < n; ++j) {
    const double t = two_pi * j / n;
    const double b = profile.eval(t, 0);
    const double bd = profile.eval(t, 1);
    const double bdd = profile.eval(t, 2);
    c1 += w * (b * b - bd * bd);
    c2 += w * std::abs(b + bdd);
  }
  const auto& a = profile.cos_coeffs();
  const auto& bcoef = profile.sin_coeffs();
  double closed = two_pi * a[0] * a[0];
  for (int k = 1; k <= profile.max_harmonic(); ++k) {
    const double ak = k < static_cast<int>(a.size()) ? a[k] : 0.0;
    const double bk = k <= static_cast<int>(bcoef.size()) ? bcoef[k - 1] : 0.0;
    closed += 0.5 * two_pi * (1.0 - double(k) * k) * (ak * ak + bk * bk);
  }
  AdmissibilityReport rep;
  rep.condition1 = c1;
  rep.condition1_closed = closed;
  rep.condition2 = c2;
  rep.admissible = std::abs(c1) <= kAdmissibilityTol && c2 > kDegeneracyTol;
  return rep;
}

inline AdmissibilityReport require_admissible(const BoundaryProfile& profile) {
  AdmissibilityReport rep = check_admissibility(profile);
  if (!rep.admissible)
    throw AdmissibilityViolation(
        "profile is not admissible: condition1 = " + std::to_string(rep.condition1) +
            (std::abs(rep.condition1) > kAdmissibilityTol
                 ? " (must vanish)"
                 : ", condition2 = " + std::to_string(rep.condition2) +
                       " (must be positive)"),
        rep.condition1, rep.condition2);
  return rep;
}

/// Radial/tangential boundary traces of the conical extension:
///   gamma(t) = -beta^2(t)/2,
///   zeta(t)  = 1/2 int_0^t (beta^2 - beta'^2) ds.
///
/// zeta is stored through the Fourier coefficients of its integrand, so it
/// evaluates at any angle exactly; it closes up over one revolution precisely
/// when condition1 vanishes.
class ConeTrace {
 public:
  static constexpr double kClosureTol = 1e-8;

  static ConeTrace build(const BoundaryProfile& profile,
                         bool enforce_periodicity = true) {
    ConeTrace trace(profile);
    if (enforce_periodicity && std::abs(trace.closure_residual()) > kClosureTol)
      throw NonPeriodicZeta(
          "zeta(2pi) - zeta(0) = " + std::to_string(trace.closure_residual()) +
              " does not close up; profile violates the vanishing-integral "
              "condition",
          trace.closure_residual());
    return trace;
  }

  const BoundaryProfile& profile() const { return profile_; }

  double gamma(double t) const {
    const double b = profile_.eval(t, 0);
    return -0.5 * b * b;
  }
  double gamma_d(double t) const {
    return -profile_.eval(t, 0) * profile_.eval(t, 1);
  }

  double zeta(double t) const {
    double sum = integrand_cos_[0] * t;
    for (std::size_t m = 1; m < integrand_cos_.size(); ++m) {
      sum += (integrand_cos_[m] * std::sin(m * t) -
              integrand_sin_[m] * (std::cos(m * t) - 1.0)) /
             double(m);
    }
    return sum;
  }
  double zeta_d(double t) const {
    const double b = profile_.eval(t, 0);
    const double bd = profile_.eval(t, 1);
    return 0.5 * (b * b - bd * bd);
  }

  /// zeta(2pi) - zeta(0); zero iff zeta is periodic.
  double closure_residual() const { return integrand_cos_[0] * two_pi; }

  /// Cartesian displacement gradient D u_beta, which is 0-homogeneous. In the
  /// polar frame it reads [[gamma, gamma' - zeta], [zeta, gamma + zeta']].
  Mat2 displacement_gradient(double theta) const {
    const double g = gamma(theta), gd = gamma_d(theta);
    const double z = zeta(theta), zd = zeta_d(theta);
    const Vec2 er = unit_radial(theta), et = unit_tangent(theta);
    Mat2 polar;
    polar << g, gd - z, z, g + zd;
    Mat2 rot;
    rot.col(0) = er;
    rot.col(1) = et;
    return rot * polar * rot.transpose();
  }

 private:
  explicit ConeTrace(const BoundaryProfile& profile) : profile_(profile) {
    // Fourier coefficients of the integrand (beta^2 - beta'^2)/2 by discrete
    // projection; exact for trigonometric polynomials at this node count.
    const int n = profile_.quadrature_nodes();
    const int m_max = 2 * profile_.max_harmonic();
    integrand_cos_.assign(m_max + 1, 0.0);
    integrand_sin_.assign(m_max + 1, 0.0);
    std::vector<double> g(n);
    for (int j = 0; j < n; ++j) g[j] = zeta_d(two_pi * j / n);
    for (int m = 0; m <= m_max; ++m) {
      double cs = 0.0, sn = 0.0;
      for (int j = 0; j < n; ++j) {
        const double t = two_pi * j / n;
        cs += g[j] * std::cos(m * t);
        sn += g[j] * std::sin(m * t);
      }
      const double scale = (m == 0 ? 1.0 : 2.0) / n;
      integrand_cos_[m] = scale * cs;
      integrand_sin_[m] = scale * sn;
    }
  }

  BoundaryProfile profile_;
  std::vector<double> integrand_cos_;  // c_0 .. c_{2K}
  std::vector<double> integrand_sin_;  // (index 0 unused)
};

struct ConeFields {
  Vec2 u;
  double v;
  Vec2 dv;
};

/// Exact conical fields at x != 0:
///   u = |x| (gamma e_r + zeta e_t),  v = |x| beta,  Dv = beta e_r + beta' e_t.
inline ConeFields cone_fields(const ConeTrace& trace, const Vec2& x) {
  const double r = x.norm();
  if (!(r > 0.0)) throw OriginUndefined("cone fields are undefined at x = 0");
  const double t = std::atan2(x[1], x[0]);
  const Vec2 er = unit_radial(t), et = unit_tangent(t);
  ConeFields f;
  f.u = r * (trace.gamma(t) * er + trace.zeta(t) * et);
  f.v = r * trace.profile().eval(t, 0);
  f.dv = trace.profile().eval(t, 0) * er + trace.profile().eval(t, 1) * et;
  return f;
}

}  // namespace dcone
