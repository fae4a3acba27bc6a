#pragma once

#include <Eigen/Dense>
#include <cmath>

namespace dcone {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

inline constexpr double two_pi = 6.283185307179586476925286766559;

/// Unit radial direction e_t = (cos t, sin t).
inline Vec2 unit_radial(double t) { return {std::cos(t), std::sin(t)}; }

/// Unit tangential direction e_t^perp = (-sin t, cos t).
inline Vec2 unit_tangent(double t) { return {-std::sin(t), std::cos(t)}; }

inline Mat2 sym(const Mat2& a) { return 0.5 * (a + a.transpose()); }

inline Mat2 outer(const Vec2& a, const Vec2& b) { return a * b.transpose(); }

/// Cofactor matrix of a 2x2 matrix: cof(A) = det(A) A^{-T} entrywise.
inline Mat2 cof(const Mat2& a) {
  Mat2 c;
  c << a(1, 1), -a(1, 0), -a(0, 1), a(0, 0);
  return c;
}

inline double frobenius(const Mat2& a) { return a.norm(); }

/// Assemble a symmetric matrix from components in an orthonormal polar frame
/// {e_r, e_t}: a_rr e_r(x)e_r + a_rt (e_r(x)e_t + e_t(x)e_r) + a_tt e_t(x)e_t.
inline Mat2 from_polar_frame(double theta, double a_rr, double a_rt, double a_tt) {
  const double c = std::cos(theta), s = std::sin(theta);
  Mat2 m;
  m(0, 0) = a_rr * c * c - 2.0 * a_rt * c * s + a_tt * s * s;
  m(0, 1) = a_rr * c * s + a_rt * (c * c - s * s) - a_tt * c * s;
  m(1, 0) = m(0, 1);
  m(1, 1) = a_rr * s * s + 2.0 * a_rt * c * s + a_tt * c * c;
  return m;
}

}  // namespace dcone
