#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "dcone/boundary_profile.hpp"
#include "dcone/errors.hpp"
#include "dcone/geometry.hpp"

namespace dcone {

using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::VectorXd;

/// Polar tensor grid on the unit disk.
///
/// Radii are geometrically graded from r_min to 1 (uniform when ratio = 1),
/// with no node at the origin; the innermost ring couples across the pole to
/// the ring at theta + pi. The outermost ring sits exactly on the boundary
/// circle and a ghost ring at 1 + dr carries the clamped extension data.
///
/// Angular derivatives use the periodic spectral differentiation matrix
/// (exact for trigonometric polynomials below the Nyquist degree); radial
/// derivatives use 3-point stencils that are exact on quadratics in the
/// signed radial coordinate.
class DiskGrid {
 public:
  static std::shared_ptr<const DiskGrid> build(int n_r, int n_theta,
                                               double grading_ratio, double r_min) {
    if (n_r < 8) throw InvalidParameter("need at least 8 radial rings");
    if (n_theta < 16 || n_theta % 2 != 0)
      throw InvalidParameter("angular count must be even and at least 16");
    if (!(r_min > 0.0 && r_min < 1.0))
      throw InvalidParameter("r_min must lie in (0,1)");
    if (!(grading_ratio >= 1.0))
      throw InvalidParameter("grading ratio must be >= 1");
    return std::shared_ptr<const DiskGrid>(
        new DiskGrid(n_r, n_theta, grading_ratio, r_min));
  }

  int n_r() const { return n_r_; }
  int n_theta() const { return n_theta_; }
  double grading_ratio() const { return ratio_; }
  const VectorXd& radii() const { return r_; }
  double theta(int j) const { return two_pi * j / n_theta_; }
  double dtheta() const { return two_pi / n_theta_; }
  double ghost_radius() const { return 1.0 + ghost_dr_; }

  /// Area weight of node (ring i, angle j); the innermost ring also carries
  /// the closure weight of the uncovered central disk. Weights sum to pi.
  double weight(int i, int j) const {
    (void)j;
    return w_(i);
  }
  const VectorXd& ring_weights() const { return w_; }

  Vec2 position(int i, int j) const {
    return r_(i) * unit_radial(theta(j));
  }

  double integrate(const MatrixXd& f) const {
    double total = 0.0;
    for (int i = 0; i < n_r_; ++i) total += w_(i) * f.row(i).sum();
    return total;
  }

  // -- linear derivative operators on (n_r x n_theta) fields -----------------

  /// d/dtheta, spectral.
  MatrixXd deriv_theta(const MatrixXd& f) const { return f * dtheta_mat_.transpose(); }
  MatrixXd deriv_theta_transpose(const MatrixXd& y) const { return y * dtheta_mat_; }
  MatrixXd deriv2_theta(const MatrixXd& f) const { return f * d2theta_mat_.transpose(); }
  MatrixXd deriv2_theta_transpose(const MatrixXd& y) const { return y * d2theta_mat_; }
  RowVectorXd deriv_theta_row(const RowVectorXd& f) const {
    return f * dtheta_mat_.transpose();
  }

  /// d/dr by ring-wise 3-point stencils; `ghost` supplies values on the ring
  /// at 1 + dr.
  MatrixXd deriv_r(const MatrixXd& f, const RowVectorXd& ghost) const {
    return radial_apply(f, ghost, c1_);
  }
  MatrixXd deriv_r_transpose(const MatrixXd& y) const {
    return radial_scatter(y, c1_);
  }
  MatrixXd deriv2_r(const MatrixXd& f, const RowVectorXd& ghost) const {
    return radial_apply(f, ghost, c2_);
  }
  MatrixXd deriv2_r_transpose(const MatrixXd& y) const {
    return radial_scatter(y, c2_);
  }

  /// Row rotated by half a revolution; the innermost radial stencil reads its
  /// inner neighbour through the pole.
  RowVectorXd shift_half(const RowVectorXd& row) const {
    const int n = n_theta_, half = n / 2;
    RowVectorXd out(n);
    out.segment(0, n - half) = row.segment(half, n - half);
    out.segment(n - half, half) = row.segment(0, half);
    return out;
  }

 private:
  DiskGrid(int n_r, int n_theta, double ratio, double r_min)
      : n_r_(n_r), n_theta_(n_theta), ratio_(ratio) {
    r_.resize(n_r);
    r_(0) = r_min;
    const int m = n_r - 1;
    double d0;
    if (ratio == 1.0)
      d0 = (1.0 - r_min) / m;
    else
      d0 = (1.0 - r_min) * (ratio - 1.0) / (std::pow(ratio, m) - 1.0);
    double step = d0;
    for (int i = 1; i < n_r; ++i) {
      r_(i) = r_(i - 1) + step;
      step *= ratio;
    }
    r_(n_r - 1) = 1.0;
    dr_.resize(m);
    for (int i = 0; i < m; ++i) dr_(i) = r_(i + 1) - r_(i);
    ghost_dr_ = dr_(m - 1);

    // trapezoid weights in r times Jacobian r, times dtheta; ring 0 also
    // closes the central disk of radius r_0 at first order
    w_.setZero(n_r);
    for (int i = 0; i < m; ++i) {
      w_(i) += 0.5 * dr_(i) * r_(i);
      w_(i + 1) += 0.5 * dr_(i) * r_(i + 1);
    }
    w_(0) += 0.5 * r_(0) * r_(0);
    w_ *= dtheta();

    build_theta_matrices();
    build_radial_stencils();
  }

  void build_theta_matrices() {
    const int n = n_theta_;
    dtheta_mat_.setZero(n, n);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) {
        if (i == k) continue;
        const int d = i - k;
        const double sgn = (d % 2 == 0) ? 1.0 : -1.0;
        dtheta_mat_(i, k) = 0.5 * sgn / std::tan(0.5 * d * dtheta());
      }
    d2theta_mat_ = dtheta_mat_ * dtheta_mat_;
  }

  void build_radial_stencils() {
    c1_.resize(n_r_, 3);
    c2_.resize(n_r_, 3);
    for (int i = 0; i < n_r_; ++i) {
      double a, b;
      if (i == 0) {
        a = 2.0 * r_(0);        // inner neighbour through the pole
        b = dr_(0);
      } else if (i == n_r_ - 1) {
        a = dr_(n_r_ - 2);
        b = ghost_dr_;
      } else {
        a = dr_(i - 1);
        b = dr_(i);
      }
      c1_(i, 0) = -b / (a * (a + b));
      c1_(i, 1) = (b - a) / (a * b);
      c1_(i, 2) = a / (b * (a + b));
      c2_(i, 0) = 2.0 / (a * (a + b));
      c2_(i, 1) = -2.0 / (a * b);
      c2_(i, 2) = 2.0 / (b * (a + b));
    }
  }

  MatrixXd radial_apply(const MatrixXd& f, const RowVectorXd& ghost,
                        const MatrixXd& c) const {
    MatrixXd out(n_r_, n_theta_);
    out.row(0) = c(0, 0) * shift_half(f.row(0)) + c(0, 1) * f.row(0) + c(0, 2) * f.row(1);
    for (int i = 1; i < n_r_ - 1; ++i)
      out.row(i) = c(i, 0) * f.row(i - 1) + c(i, 1) * f.row(i) + c(i, 2) * f.row(i + 1);
    const int last = n_r_ - 1;
    out.row(last) = c(last, 0) * f.row(last - 1) + c(last, 1) * f.row(last) +
                    c(last, 2) * ghost;
    return out;
  }

  /// Transpose of radial_apply in the node variables; the ghost ring is data,
  /// not a degree of freedom, so its column is dropped.
  MatrixXd radial_scatter(const MatrixXd& y, const MatrixXd& c) const {
    MatrixXd out = MatrixXd::Zero(n_r_, n_theta_);
    out.row(0) += c(0, 1) * y.row(0);
    out.row(0) += c(0, 0) * shift_half(y.row(0));  // shift is its own inverse
    out.row(1) += c(0, 2) * y.row(0);
    for (int i = 1; i < n_r_ - 1; ++i) {
      out.row(i - 1) += c(i, 0) * y.row(i);
      out.row(i) += c(i, 1) * y.row(i);
      out.row(i + 1) += c(i, 2) * y.row(i);
    }
    const int last = n_r_ - 1;
    out.row(last - 1) += c(last, 0) * y.row(last);
    out.row(last) += c(last, 1) * y.row(last);
    return out;
  }

  int n_r_, n_theta_;
  double ratio_;
  VectorXd r_, dr_, w_;
  double ghost_dr_ = 0.0;
  MatrixXd dtheta_mat_, d2theta_mat_, c1_, c2_;
};

/// Clamped boundary data: the outermost ring is pinned to the trace values
/// and a ghost ring at 1 + dr carries the exact extension, which fixes the
/// normal derivative of v as well (the cone is 1-homogeneous, so value and
/// slope are matched by the same data).
struct BoundaryCondition {
  RowVectorXd boundary_u1, boundary_u2, boundary_v;
  RowVectorXd ghost_u1, ghost_u2, ghost_v;

  static BoundaryCondition from_trace(const DiskGrid& grid, const ConeTrace& trace) {
    BoundaryCondition bc = sized(grid);
    for (int j = 0; j < grid.n_theta(); ++j) {
      const double t = grid.theta(j);
      const Vec2 er = unit_radial(t), et = unit_tangent(t);
      const Vec2 dir = trace.gamma(t) * er + trace.zeta(t) * et;
      const double b = trace.profile().eval(t, 0);
      bc.boundary_u1(j) = dir[0];
      bc.boundary_u2(j) = dir[1];
      bc.boundary_v(j) = b;
      const double rg = grid.ghost_radius();
      bc.ghost_u1(j) = rg * dir[0];
      bc.ghost_u2(j) = rg * dir[1];
      bc.ghost_v(j) = rg * b;
    }
    return bc;
  }

  static BoundaryCondition from_functions(
      const DiskGrid& grid, const std::function<Vec2(const Vec2&)>& fu,
      const std::function<double(const Vec2&)>& fv) {
    BoundaryCondition bc = sized(grid);
    for (int j = 0; j < grid.n_theta(); ++j) {
      const Vec2 xb = unit_radial(grid.theta(j));
      const Vec2 xg = grid.ghost_radius() * unit_radial(grid.theta(j));
      const Vec2 ub = fu(xb), ug = fu(xg);
      bc.boundary_u1(j) = ub[0];
      bc.boundary_u2(j) = ub[1];
      bc.boundary_v(j) = fv(xb);
      bc.ghost_u1(j) = ug[0];
      bc.ghost_u2(j) = ug[1];
      bc.ghost_v(j) = fv(xg);
    }
    return bc;
  }

  static BoundaryCondition zero(const DiskGrid& grid) {
    BoundaryCondition bc = sized(grid);
    return bc;
  }

 private:
  static BoundaryCondition sized(const DiskGrid& grid) {
    BoundaryCondition bc;
    const int n = grid.n_theta();
    bc.boundary_u1.setZero(n);
    bc.boundary_u2.setZero(n);
    bc.boundary_v.setZero(n);
    bc.ghost_u1.setZero(n);
    bc.ghost_u2.setZero(n);
    bc.ghost_v.setZero(n);
    return bc;
  }
};

enum class Field { u1, u2, v };

/// Discrete configuration (u1, u2, v) on a disk grid; the optimization
/// variable. The boundary ring always equals the boundary-condition traces.
struct FieldState {
  std::shared_ptr<const DiskGrid> grid;
  BoundaryCondition bc;
  MatrixXd u1, u2, v;

  static FieldState zero(std::shared_ptr<const DiskGrid> grid, BoundaryCondition bc) {
    FieldState s;
    s.u1.setZero(grid->n_r(), grid->n_theta());
    s.u2.setZero(grid->n_r(), grid->n_theta());
    s.v.setZero(grid->n_r(), grid->n_theta());
    s.grid = std::move(grid);
    s.bc = std::move(bc);
    s.apply_pins();
    return s;
  }

  /// Sample closed-form fields onto the grid.
  static FieldState sample(std::shared_ptr<const DiskGrid> grid, BoundaryCondition bc,
                           const std::function<Vec2(const Vec2&)>& fu,
                           const std::function<double(const Vec2&)>& fv) {
    FieldState s = zero(std::move(grid), std::move(bc));
    for (int i = 0; i < s.grid->n_r(); ++i)
      for (int j = 0; j < s.grid->n_theta(); ++j) {
        const Vec2 x = s.grid->position(i, j);
        const Vec2 u = fu(x);
        s.u1(i, j) = u[0];
        s.u2(i, j) = u[1];
        s.v(i, j) = fv(x);
      }
    s.apply_pins();
    return s;
  }

  void apply_pins() {
    const int last = grid->n_r() - 1;
    u1.row(last) = bc.boundary_u1;
    u2.row(last) = bc.boundary_u2;
    v.row(last) = bc.boundary_v;
  }

  bool all_finite() const {
    return u1.allFinite() && u2.allFinite() && v.allFinite();
  }

  const MatrixXd& field(Field f) const {
    switch (f) {
      case Field::u1: return u1;
      case Field::u2: return u2;
      default: return v;
    }
  }
  const RowVectorXd& ghost(Field f) const {
    switch (f) {
      case Field::u1: return bc.ghost_u1;
      case Field::u2: return bc.ghost_u2;
      default: return bc.ghost_v;
    }
  }
};

struct CartesianGradient {
  MatrixXd g1, g2;
};

/// Cartesian gradient of one scalar field: Df = f_r e_r + (f_theta / r) e_t.
inline CartesianGradient gradient_op(const FieldState& state, Field which) {
  const DiskGrid& g = *state.grid;
  const MatrixXd& f = state.field(which);
  const MatrixXd fr = g.deriv_r(f, state.ghost(which));
  const MatrixXd ft = g.deriv_theta(f);
  CartesianGradient out;
  out.g1.resize(g.n_r(), g.n_theta());
  out.g2.resize(g.n_r(), g.n_theta());
  for (int j = 0; j < g.n_theta(); ++j) {
    const double c = std::cos(g.theta(j)), s = std::sin(g.theta(j));
    for (int i = 0; i < g.n_r(); ++i) {
      const double tangential = ft(i, j) / g.radii()(i);
      out.g1(i, j) = fr(i, j) * c - tangential * s;
      out.g2(i, j) = fr(i, j) * s + tangential * c;
    }
  }
  return out;
}

struct SymmetricFieldMatrix {
  MatrixXd m11, m12, m22;

  Mat2 at(int i, int j) const {
    Mat2 m;
    m << m11(i, j), m12(i, j), m12(i, j), m22(i, j);
    return m;
  }
};

/// Cartesian Hessian of v, symmetric by construction:
///   D^2 v = v_rr e_r e_r + (v_rt/r - v_t/r^2) (e_r e_t + e_t e_r)
///         + (v_r/r + v_tt/r^2) e_t e_t.
inline SymmetricFieldMatrix hessian_op(const FieldState& state) {
  const DiskGrid& g = *state.grid;
  const MatrixXd& f = state.v;
  const RowVectorXd& gh = state.bc.ghost_v;
  const MatrixXd fr = g.deriv_r(f, gh);
  const MatrixXd ft = g.deriv_theta(f);
  const MatrixXd frr = g.deriv2_r(f, gh);
  const MatrixXd frt = g.deriv_r(ft, g.deriv_theta_row(gh));
  const MatrixXd ftt = g.deriv2_theta(f);
  SymmetricFieldMatrix out;
  out.m11.resize(g.n_r(), g.n_theta());
  out.m12.resize(g.n_r(), g.n_theta());
  out.m22.resize(g.n_r(), g.n_theta());
  for (int j = 0; j < g.n_theta(); ++j) {
    const double c = std::cos(g.theta(j)), s = std::sin(g.theta(j));
    for (int i = 0; i < g.n_r(); ++i) {
      const double r = g.radii()(i);
      const double mixed = frt(i, j) / r - ft(i, j) / (r * r);
      const double hoop = fr(i, j) / r + ftt(i, j) / (r * r);
      out.m11(i, j) = frr(i, j) * c * c - 2.0 * mixed * c * s + hoop * s * s;
      out.m12(i, j) = frr(i, j) * c * s + mixed * (c * c - s * s) - hoop * c * s;
      out.m22(i, j) = frr(i, j) * s * s + 2.0 * mixed * c * s + hoop * c * c;
    }
  }
  return out;
}

/// Flat CSV snapshot (r, theta, u1, u2, v), row-major over rings then angles.
inline void write_snapshot(std::ostream& os, const FieldState& s) {
  os << "r,theta,u1,u2,v\n";
  char buf[256];
  for (int i = 0; i < s.grid->n_r(); ++i)
    for (int j = 0; j < s.grid->n_theta(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g\n",
                    s.grid->radii()(i), s.grid->theta(j), s.u1(i, j), s.u2(i, j),
                    s.v(i, j));
      os << buf;
    }
}

inline FieldState read_snapshot(std::istream& is,
                                std::shared_ptr<const DiskGrid> grid,
                                BoundaryCondition bc) {
  FieldState s = FieldState::zero(std::move(grid), std::move(bc));
  std::string line;
  if (!std::getline(is, line) || line.rfind("r,theta", 0) != 0)
    throw Error("snapshot: missing header");
  for (int i = 0; i < s.grid->n_r(); ++i)
    for (int j = 0; j < s.grid->n_theta(); ++j) {
      if (!std::getline(is, line)) throw Error("snapshot: truncated file");
      double r, t, a, b, c;
      if (std::sscanf(line.c_str(), "%lg,%lg,%lg,%lg,%lg", &r, &t, &a, &b, &c) != 5)
        throw Error("snapshot: malformed row '" + line + "'");
      if (std::abs(r - s.grid->radii()(i)) > 1e-12 ||
          std::abs(t - s.grid->theta(j)) > 1e-12)
        throw Error("snapshot: grid mismatch");
      s.u1(i, j) = a;
      s.u2(i, j) = b;
      s.v(i, j) = c;
    }
  s.apply_pins();
  return s;
}

}  // namespace dcone
