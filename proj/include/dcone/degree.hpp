#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <string>
#include <utility>
#include <vector>

#include "dcone/boundary_profile.hpp"
#include "dcone/cone_ansatz.hpp"
#include "dcone/cutoff.hpp"
#include "dcone/disk_grid.hpp"
#include "dcone/energy_model.hpp"
#include "dcone/errors.hpp"
#include "dcone/geometry.hpp"

namespace dcone {

/// Image of the clamped gradient data: the closed planar curve
/// gamma(t) = beta(t) e_t + beta'(t) e_t^perp, sampled uniformly in t.
struct BoundaryCurve {
  std::vector<Vec2> samples;
  BoundaryProfile profile;
  double max_gap = 0.0;  ///< largest image-space distance between neighbours

  /// Mask half-width: winding sums degrade within one sample gap.
  double exclusion_width() const { return 2.0 * max_gap; }

  double distance_to(const Vec2& z) const {
    double best = std::numeric_limits<double>::infinity();
    const std::size_t m = samples.size();
    for (std::size_t k = 0; k < m; ++k) {
      const Vec2& a = samples[k];
      const Vec2& b = samples[(k + 1) % m];
      const Vec2 ab = b - a;
      const double len2 = ab.squaredNorm();
      double t = len2 > 0.0 ? (z - a).dot(ab) / len2 : 0.0;
      t = std::clamp(t, 0.0, 1.0);
      best = std::min(best, (a + t * ab - z).norm());
    }
    return best;
  }
};

inline BoundaryCurve build_boundary_curve(const BoundaryProfile& profile,
                                          int n_samples = 0) {
  if (n_samples <= 0) n_samples = std::max(2048, 16 * profile.max_harmonic());
  if (n_samples < 16 * profile.max_harmonic())
    throw InvalidParameter("curve undersampled: need at least 16 K samples");
  BoundaryCurve curve;
  curve.profile = profile;
  curve.samples.resize(n_samples);
  for (int k = 0; k < n_samples; ++k) {
    const double t = two_pi * k / n_samples;
    curve.samples[k] =
        profile.eval(t, 0) * unit_radial(t) + profile.eval(t, 1) * unit_tangent(t);
  }
  for (int k = 0; k < n_samples; ++k)
    curve.max_gap = std::max(
        curve.max_gap,
        (curve.samples[(k + 1) % n_samples] - curve.samples[k]).norm());
  return curve;
}

/// Sum of signed angle increments of the sampled curve around z, in turns.
inline double winding_sum(const BoundaryCurve& curve, const Vec2& z) {
  double total = 0.0;
  const std::size_t m = curve.samples.size();
  Vec2 prev = curve.samples[m - 1] - z;
  for (std::size_t k = 0; k < m; ++k) {
    const Vec2 cur = curve.samples[k] - z;
    const double cross = prev[0] * cur[1] - prev[1] * cur[0];
    const double dot = prev.dot(cur);
    total += std::atan2(cross, dot);
    prev = cur;
  }
  return total / two_pi;
}

/// Integer winding number of the curve around z. The rounding residual is a
/// quality signal; a residual past 0.25 means the curve is undersampled at
/// this distance.
inline int winding_number(const BoundaryCurve& curve, const Vec2& z) {
  if (curve.distance_to(z) <= curve.exclusion_width())
    throw TooCloseToCurve("query point within the curve exclusion band");
  const double w = winding_sum(curve, z);
  const double rounded = std::round(w);
  if (std::abs(w - rounded) >= 0.25)
    throw NonIntegerWinding("winding sum " + std::to_string(w) +
                                " does not round cleanly",
                            std::abs(w - rounded));
  return static_cast<int>(rounded);
}

/// Integer degree values deg^d(Dv_beta, S^1, z) on a uniform box; cells inside
/// the exclusion band around the curve (or failing the rounding check) are
/// masked out.
struct DegreeField {
  Vec2 lo, hi;
  int nx = 0, ny = 0;
  std::vector<int> values;     // nx * ny, row-major in x
  std::vector<uint8_t> masked; // 1 = excluded
  std::vector<double> dist;    // distance to curve at cell centers

  double dx() const { return (hi[0] - lo[0]) / nx; }
  double dy() const { return (hi[1] - lo[1]) / ny; }
  double cell_area() const { return dx() * dy(); }
  Vec2 center(int ix, int iy) const {
    return {lo[0] + (ix + 0.5) * dx(), lo[1] + (iy + 0.5) * dy()};
  }
  int index(int ix, int iy) const { return ix * ny + iy; }

  bool has_nonzero() const {
    for (int k = 0; k < nx * ny; ++k)
      if (!masked[k] && values[k] != 0) return true;
    return false;
  }

  /// 4-connected component labels over unmasked cells (-1 elsewhere).
  std::vector<int> component_labels() const {
    std::vector<int> label(nx * ny, -1);
    int next = 0;
    std::deque<std::pair<int, int>> queue;
    for (int ix = 0; ix < nx; ++ix)
      for (int iy = 0; iy < ny; ++iy) {
        const int k = index(ix, iy);
        if (masked[k] || label[k] >= 0) continue;
        label[k] = next;
        queue.push_back({ix, iy});
        while (!queue.empty()) {
          auto [cx, cy] = queue.front();
          queue.pop_front();
          const int moves[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
          for (auto& mv : moves) {
            const int nx2 = cx + mv[0], ny2 = cy + mv[1];
            if (nx2 < 0 || nx2 >= nx || ny2 < 0 || ny2 >= ny) continue;
            const int k2 = index(nx2, ny2);
            if (masked[k2] || label[k2] >= 0) continue;
            label[k2] = next;
            queue.push_back({nx2, ny2});
          }
        }
        ++next;
      }
    return label;
  }
};

struct DegreeBox {
  Vec2 lo, hi;
};

inline DegreeBox default_degree_box(const BoundaryCurve& curve,
                                    double margin_frac = 0.25) {
  Vec2 lo = curve.samples[0], hi = curve.samples[0];
  for (const Vec2& s : curve.samples) {
    lo = lo.cwiseMin(s);
    hi = hi.cwiseMax(s);
  }
  const double extent = std::max(hi[0] - lo[0], hi[1] - lo[1]);
  const double margin = margin_frac * extent + curve.exclusion_width();
  return {lo.array() - margin, hi.array() + margin};
}

inline DegreeField degree_field(const BoundaryCurve& curve, const DegreeBox& box,
                                int resolution) {
  if (resolution < 8) throw InvalidParameter("degree field resolution too small");
  DegreeField field;
  field.lo = box.lo;
  field.hi = box.hi;
  field.nx = field.ny = resolution;
  field.values.assign(resolution * resolution, 0);
  field.masked.assign(resolution * resolution, 0);
  field.dist.assign(resolution * resolution, 0.0);
  for (int ix = 0; ix < field.nx; ++ix)
    for (int iy = 0; iy < field.ny; ++iy) {
      const int k = field.index(ix, iy);
      const Vec2 z = field.center(ix, iy);
      field.dist[k] = curve.distance_to(z);
      if (field.dist[k] <= curve.exclusion_width()) {
        field.masked[k] = 1;
        continue;
      }
      const double w = winding_sum(curve, z);
      const double rounded = std::round(w);
      if (std::abs(w - rounded) >= 0.25) {
        field.masked[k] = 1;
        continue;
      }
      field.values[k] = static_cast<int>(rounded);
    }
  return field;
}

/// C^2 bump phi(z) = amplitude * psi(|z - center| / radius); psi is the
/// complementary quintic of the ansatz cutoff, so the homogeneous W^{2,2}
/// norm has a closed form.
struct TestFunction {
  Vec2 center{0.0, 0.0};
  double radius = 1.0;
  double amplitude = 1.0;

  double value(const Vec2& z) const {
    return amplitude * Cutoff::psi((z - center).norm() / radius);
  }

  Vec2 gradient(const Vec2& z) const {
    const Vec2 d = z - center;
    const double rho = d.norm();
    if (rho == 0.0) return Vec2::Zero();
    return (amplitude * Cutoff::psi_d(rho / radius) / radius) * (d / rho);
  }

  Mat2 hessian(const Vec2& z) const {
    const Vec2 d = z - center;
    const double rho = d.norm();
    if (rho == 0.0 || rho >= radius) return Mat2::Zero();
    const Vec2 n = d / rho;
    const Mat2 nn = outer(n, n);
    const double pdd = Cutoff::psi_dd(rho / radius) / (radius * radius);
    const double pd_over = Cutoff::psi_d(rho / radius) / (radius * rho);
    return amplitude * (pdd * nn + pd_over * (Mat2::Identity() - nn));
  }

  /// Homogeneous W^{2,2}(R^2) norm (second derivatives only).
  double w22_norm() const {
    return std::abs(amplitude) *
           std::sqrt(two_pi * Cutoff::psi_w22_radial_constant) / radius;
  }
};

struct TestFunctionSearch {
  TestFunction phi;
  double integral = 0.0;     ///< int phi * deg dz, midpoint rule on the field grid
  int component_degree = 0;  ///< degree value under the bump's support
};

/// Picks the nonzero-degree cell farthest from the curve, centers the bump
/// there with radius below the curve distance, and signs it so the degree
/// integral is positive.
inline TestFunctionSearch find_test_function(const DegreeField& field) {
  int best = -1;
  for (int k = 0; k < field.nx * field.ny; ++k) {
    if (field.masked[k] || field.values[k] == 0) continue;
    if (best < 0 || field.dist[k] > field.dist[best]) best = k;
  }
  if (best < 0)
    throw NoWitness(
        "degree field is identically zero: no test function witness exists");

  TestFunctionSearch out;
  out.component_degree = field.values[best];
  out.phi.center = field.center(best / field.ny, best % field.ny);
  out.phi.radius = 0.95 * field.dist[best];
  out.phi.amplitude = out.component_degree > 0 ? 1.0 : -1.0;

  // support stays inside one component of the curve complement, so the
  // integrand is phi times the constant component degree
  double mass = 0.0;
  for (int ix = 0; ix < field.nx; ++ix)
    for (int iy = 0; iy < field.ny; ++iy)
      mass += out.phi.value(field.center(ix, iy));
  out.integral = mass * out.component_degree * field.cell_area();
  return out;
}

/// det D^2 v per node, the leading-order Gauss curvature of the graph.
inline MatrixXd gauss_curvature(const FieldState& state) {
  const SymmetricFieldMatrix h = hessian_op(state);
  return h.m11.cwiseProduct(h.m22) - h.m12.cwiseProduct(h.m12);
}

struct PullbackCheck {
  double lhs = 0.0;  ///< int phi(z) deg(z) dz, field-grid quadrature
  double rhs = 0.0;  ///< int_B1 phi(Dv(x)) det D^2 v(x) dx, disk quadrature
  double rel_err = 0.0;
};

/// Change-of-variables consistency of the degree: integrates phi against the
/// winding-number field on the z-plane and against the pulled-back Jacobian
/// det D^2 v of the smoothed cone on the disk. The disk-side integrand is
/// supported on the smoothing annulus [core/2, core]: the cone Hessian is
/// rank one outside it and supp phi avoids the image curve.
///
/// `refine` doubles both quadratures while keeping the same witness.
inline PullbackCheck pullback_identity_check(const SmoothedCone& sc,
                                             const TestFunction& phi,
                                             const DegreeField& field,
                                             int component_degree,
                                             int refine = 0) {
  const int sub = 1 << refine;

  PullbackCheck out;
  // field-grid quadrature of phi * deg; cells under the support all carry the
  // component degree, midpoint rule on the (refined) field grid
  double mass = 0.0;
  const double ddx = field.dx() / sub, ddy = field.dy() / sub;
  const Vec2& c = phi.center;
  const double reach = phi.radius;
  const int ix0 = std::max(0, int((c[0] - reach - field.lo[0]) / field.dx()) - 1);
  const int ix1 = std::min(field.nx, int((c[0] + reach - field.lo[0]) / field.dx()) + 2);
  const int iy0 = std::max(0, int((c[1] - reach - field.lo[1]) / field.dy()) - 1);
  const int iy1 = std::min(field.ny, int((c[1] + reach - field.lo[1]) / field.dy()) + 2);
  for (int ix = ix0; ix < ix1; ++ix)
    for (int iy = iy0; iy < iy1; ++iy)
      for (int sx = 0; sx < sub; ++sx)
        for (int sy = 0; sy < sub; ++sy) {
          const Vec2 z{field.lo[0] + ix * field.dx() + (sx + 0.5) * ddx,
                       field.lo[1] + iy * field.dy() + (sy + 0.5) * ddy};
          mass += phi.value(z);
        }
  out.lhs = mass * component_degree * ddx * ddy;

  // disk-side quadrature over the smoothing annulus
  const double rho = sc.core_radius();
  const int n_rad = 192 * sub, n_ang = 768 * sub;
  const double dtheta = two_pi / n_ang;
  const double dr = (rho - 0.5 * rho) / (n_rad - 1);
  double rhs = 0.0;
  for (int i = 0; i < n_rad; ++i) {
    const double r = 0.5 * rho + i * dr;
    const double wr = (i == 0 || i == n_rad - 1) ? 0.5 * dr : dr;
    for (int j = 0; j < n_ang; ++j) {
      const double theta = dtheta * j;
      const auto pc = sc.polar(r, theta);
      const double mixed = pc.v_rt / r - pc.v_t / (r * r);
      const double hoop = pc.v_r / r + pc.v_tt / (r * r);
      const double det = pc.v_rr * hoop - mixed * mixed;
      if (det == 0.0) continue;
      const Vec2 dv =
          pc.v_r * unit_radial(theta) + (pc.v_t / r) * unit_tangent(theta);
      rhs += wr * r * dtheta * phi.value(dv) * det;
    }
  }
  out.rhs = rhs;
  out.rel_err = std::abs(out.lhs - out.rhs) /
                std::max(std::abs(out.lhs), std::abs(out.rhs));
  return out;
}

namespace detail {

/// Natural cubic spline over fixed knots; evaluates value and first two
/// derivatives.
class Spline {
 public:
  Spline(const VectorXd& x, VectorXd y) : x_(&x), y_(std::move(y)) {
    const int n = static_cast<int>(y_.size());
    m_.setZero(n);
    if (n < 3) return;
    VectorXd a(n), b(n), c(n), d(n);
    a(0) = 0;
    b(0) = 1;
    c(0) = 0;
    d(0) = 0;
    for (int i = 1; i < n - 1; ++i) {
      const double h0 = (*x_)(i) - (*x_)(i - 1);
      const double h1 = (*x_)(i + 1) - (*x_)(i);
      a(i) = h0 / 6.0;
      b(i) = (h0 + h1) / 3.0;
      c(i) = h1 / 6.0;
      d(i) = (y_(i + 1) - y_(i)) / h1 - (y_(i) - y_(i - 1)) / h0;
    }
    a(n - 1) = 0;
    b(n - 1) = 1;
    c(n - 1) = 0;
    d(n - 1) = 0;
    for (int i = 1; i < n; ++i) {  // Thomas elimination
      const double w = a(i) / b(i - 1);
      b(i) -= w * c(i - 1);
      d(i) -= w * d(i - 1);
    }
    m_(n - 1) = d(n - 1) / b(n - 1);
    for (int i = n - 2; i >= 0; --i) m_(i) = (d(i) - c(i) * m_(i + 1)) / b(i);
  }

  void eval(double t, double& v, double& d1, double& d2) const {
    const VectorXd& x = *x_;
    int lo = 0, hi = static_cast<int>(x.size()) - 1;
    while (hi - lo > 1) {
      const int mid = (lo + hi) / 2;
      (x(mid) <= t ? lo : hi) = mid;
    }
    const double h = x(lo + 1) - x(lo);
    const double A = (x(lo + 1) - t) / h, B = (t - x(lo)) / h;
    v = A * y_(lo) + B * y_(lo + 1) +
        ((A * A * A - A) * m_(lo) + (B * B * B - B) * m_(lo + 1)) * h * h / 6.0;
    d1 = (y_(lo + 1) - y_(lo)) / h -
         (3.0 * A * A - 1.0) / 6.0 * h * m_(lo) +
         (3.0 * B * B - 1.0) / 6.0 * h * m_(lo + 1);
    d2 = A * m_(lo) + B * m_(lo + 1);
  }

 private:
  const VectorXd* x_;
  VectorXd y_;
  VectorXd m_;
};

}  // namespace detail

/// Quadrature of det D^2 v * phi(Dv) over an annulus through a smooth
/// reconstruction of the discrete field: trigonometric interpolation in the
/// angle and a C^2 cubic spline in the radius. The integrand concentrates on
/// the thin preimage strip Dv^{-1}(supp phi), far below the mesh width, so
/// plain node quadrature cannot see it; the reconstruction route converges
/// because the degree of the reconstructed gradient is pinned by the
/// boundary trace.
inline double refined_pullback_integral(const FieldState& state,
                                        const TestFunction& phi, double r_lo,
                                        double r_hi, int n_radial = 1200,
                                        int theta_refine = 8) {
  const DiskGrid& g = *state.grid;
  const int n = g.n_theta();
  const int nf = theta_refine * n;

  // periodic interpolation kernel and its first two derivatives, sampled on
  // the refined angles
  MatrixXd kv(nf, n), k1(nf, n), k2(nf, n);
  const int half = n / 2;
  for (int J = 0; J < nf; ++J)
    for (int j = 0; j < n; ++j) {
      const double t = two_pi * J / nf - g.theta(j);
      double v = 1.0, d1 = 0.0, d2 = 0.0;
      for (int k = 1; k < half; ++k) {
        v += 2.0 * std::cos(k * t);
        d1 -= 2.0 * k * std::sin(k * t);
        d2 -= 2.0 * k * k * std::cos(k * t);
      }
      v += std::cos(half * t);
      d1 -= half * std::sin(half * t);
      d2 -= double(half) * half * std::cos(half * t);
      kv(J, j) = v / n;
      k1(J, j) = d1 / n;
      k2(J, j) = d2 / n;
    }

  const MatrixXd vf = state.v * kv.transpose();    // (nr x nf) values
  const MatrixXd vtf = state.v * k1.transpose();   // d/dtheta
  const MatrixXd vttf = state.v * k2.transpose();  // d2/dtheta2

  std::vector<detail::Spline> sp_v, sp_vt, sp_vtt;
  sp_v.reserve(nf);
  sp_vt.reserve(nf);
  sp_vtt.reserve(nf);
  for (int J = 0; J < nf; ++J) {
    sp_v.emplace_back(g.radii(), vf.col(J));
    sp_vt.emplace_back(g.radii(), vtf.col(J));
    sp_vtt.emplace_back(g.radii(), vttf.col(J));
  }

  r_lo = std::max(r_lo, g.radii()(0));
  r_hi = std::min(r_hi, 1.0);
  const double dr = (r_hi - r_lo) / (n_radial - 1);
  const double dtheta = two_pi / nf;

  double total = 0.0;
  for (int i = 0; i < n_radial; ++i) {
    const double r = r_lo + i * dr;
    const double wr = (i == 0 || i == n_radial - 1) ? 0.5 * dr : dr;
    for (int J = 0; J < nf; ++J) {
      double v, v_r, v_rr, v_t, v_rt, unused, v_tt, u1, u2;
      sp_v[J].eval(r, v, v_r, v_rr);
      sp_vt[J].eval(r, v_t, v_rt, unused);
      sp_vtt[J].eval(r, v_tt, u1, u2);
      const double mixed = v_rt / r - v_t / (r * r);
      const double hoop = v_r / r + v_tt / (r * r);
      const double det = v_rr * hoop - mixed * mixed;
      if (det == 0.0) continue;
      const double theta = dtheta * J;
      const Vec2 dv = v_r * unit_radial(theta) + (v_t / r) * unit_tangent(theta);
      const double ph = phi.value(dv);
      if (ph != 0.0) total += wr * r * dtheta * ph * det;
    }
  }
  return total;
}

struct WeakIdentityCheck {
  double lhs = 0.0;  ///< int det D^2 v phi dx
  double rhs = 0.0;  ///< -int (sym Du + 1/2 Dv (x) Dv) : cof D^2 phi dx
  double discrepancy = 0.0;
};

/// Duality form of the very weak Hessian determinant,
///   int det D^2 v phi = -int (sym Du + 1/2 Dv (x) Dv) : cof D^2 phi.
/// Both sides reduce to integrals over the unit disk: the state is extended
/// by the exact cone outside, whose strain and Hessian determinant vanish.
inline WeakIdentityCheck weak_identity_check(const FieldState& state,
                                             const TestFunction& phi) {
  const DiskGrid& g = *state.grid;
  const MatrixXd det = gauss_curvature(state);
  const SymmetricFieldMatrix eps = strain(state);
  WeakIdentityCheck out;
  for (int i = 0; i < g.n_r(); ++i)
    for (int j = 0; j < g.n_theta(); ++j) {
      const double w = g.weight(i, j);
      const Vec2 x = g.position(i, j);
      out.lhs += w * det(i, j) * phi.value(x);
      const Mat2 cof_hess = cof(phi.hessian(x));
      const Mat2 e = eps.at(i, j);
      out.rhs -= w * (e(0, 0) * cof_hess(0, 0) + e(1, 1) * cof_hess(1, 1) +
                      2.0 * e(0, 1) * cof_hess(0, 1));
    }
  out.discrepancy = std::abs(out.lhs - out.rhs);
  return out;
}

struct ExponentTable {
  double p_prime = 0.0;
  double alpha = 0.0;
  double theta = 0.0;
};

/// Exponent bookkeeping of the scaling argument: alpha = 2/(3p-4),
/// theta = 1 - alpha, and the closing identity (6-4 theta)/(3-theta) = p'.
inline ExponentTable exponent_table(double p) {
  if (!(p > 2.0 && p < 8.0 / 3.0))
    throw InvalidParameter("exponent table requires p in (2, 8/3)");
  ExponentTable t;
  t.p_prime = dual_exponent(p);
  t.alpha = 2.0 / (3.0 * p - 4.0);
  t.theta = 1.0 - t.alpha;
  const double closed = (6.0 - 4.0 * t.theta) / (3.0 - t.theta);
  if (std::abs(closed - t.p_prime) > 1e-12)
    throw Error("exponent identity violated: (6-4theta)/(3-theta) = " +
                std::to_string(closed) + " vs p' = " + std::to_string(t.p_prime));
  return t;
}

}  // namespace dcone
