#pragma once

#include <cmath>
#include <string>

#include "dcone/disk_grid.hpp"
#include "dcone/energy_breakdown.hpp"
#include "dcone/errors.hpp"

namespace dcone {

/// Von Karman strain eps = sym Du + 1/2 Dv (x) Dv per node.
inline SymmetricFieldMatrix strain(const FieldState& state) {
  const CartesianGradient du1 = gradient_op(state, Field::u1);
  const CartesianGradient du2 = gradient_op(state, Field::u2);
  const CartesianGradient dv = gradient_op(state, Field::v);
  SymmetricFieldMatrix eps;
  eps.m11 = du1.g1 + 0.5 * dv.g1.cwiseProduct(dv.g1);
  eps.m22 = du2.g2 + 0.5 * dv.g2.cwiseProduct(dv.g2);
  eps.m12 = 0.5 * (du1.g2 + du2.g1) + 0.5 * dv.g1.cwiseProduct(dv.g2);
  return eps;
}

struct EnergyGradient {
  MatrixXd u1, u2, v;
};

namespace detail {

/// Fused energy / adjoint-gradient evaluation. The bending term couples all
/// nodes through the outer power (.)^{2/p}, so the gradient must chain
/// through the global bending_raw sum; everything else is local.
inline EnergyBreakdown energy_eval(const FieldState& state, double h, double p,
                                   EnergyGradient* grad) {
  if (!(h > 0.0)) throw InvalidParameter("thickness h must be positive");
  if (!(p > 1.0) || !std::isfinite(p))
    throw InvalidParameter("bending exponent p must lie in (1, inf)");
  const DiskGrid& g = *state.grid;
  const int nr = g.n_r(), nt = g.n_theta();

  // polar partials
  const MatrixXd u1_r = g.deriv_r(state.u1, state.bc.ghost_u1);
  const MatrixXd u1_t = g.deriv_theta(state.u1);
  const MatrixXd u2_r = g.deriv_r(state.u2, state.bc.ghost_u2);
  const MatrixXd u2_t = g.deriv_theta(state.u2);
  const MatrixXd v_r = g.deriv_r(state.v, state.bc.ghost_v);
  const MatrixXd v_t = g.deriv_theta(state.v);
  const MatrixXd v_rr = g.deriv2_r(state.v, state.bc.ghost_v);
  const MatrixXd v_rt = g.deriv_r(v_t, g.deriv_theta_row(state.bc.ghost_v));
  const MatrixXd v_tt = g.deriv2_theta(state.v);

  std::vector<double> cth(nt), sth(nt);
  for (int j = 0; j < nt; ++j) {
    cth[j] = std::cos(g.theta(j));
    sth[j] = std::sin(g.theta(j));
  }

  MatrixXd e11(nr, nt), e12(nr, nt), e22(nr, nt);
  MatrixXd h11(nr, nt), h12(nr, nt), h22(nr, nt);
  MatrixXd g1u1(nr, nt), g2u1(nr, nt), g1u2(nr, nt), g2u2(nr, nt), g1v(nr, nt),
      g2v(nr, nt);

  double membrane = 0.0, braw = 0.0;
  for (int j = 0; j < nt; ++j) {
    const double c = cth[j], s = sth[j];
    for (int i = 0; i < nr; ++i) {
      const double r = g.radii()(i);
      const double w = g.weight(i, j);
      const auto cart = [&](double fr, double ft, double& gx, double& gy) {
        gx = fr * c - ft / r * s;
        gy = fr * s + ft / r * c;
      };
      cart(u1_r(i, j), u1_t(i, j), g1u1(i, j), g2u1(i, j));
      cart(u2_r(i, j), u2_t(i, j), g1u2(i, j), g2u2(i, j));
      cart(v_r(i, j), v_t(i, j), g1v(i, j), g2v(i, j));

      e11(i, j) = g1u1(i, j) + 0.5 * g1v(i, j) * g1v(i, j);
      e22(i, j) = g2u2(i, j) + 0.5 * g2v(i, j) * g2v(i, j);
      e12(i, j) = 0.5 * (g2u1(i, j) + g1u2(i, j)) + 0.5 * g1v(i, j) * g2v(i, j);
      membrane += w * (e11(i, j) * e11(i, j) + 2.0 * e12(i, j) * e12(i, j) +
                       e22(i, j) * e22(i, j));

      const double mixed = v_rt(i, j) / r - v_t(i, j) / (r * r);
      const double hoop = v_r(i, j) / r + v_tt(i, j) / (r * r);
      h11(i, j) = v_rr(i, j) * c * c - 2.0 * mixed * c * s + hoop * s * s;
      h12(i, j) = v_rr(i, j) * c * s + mixed * (c * c - s * s) - hoop * c * s;
      h22(i, j) = v_rr(i, j) * s * s + 2.0 * mixed * c * s + hoop * c * c;
      const double frob2 = h11(i, j) * h11(i, j) + 2.0 * h12(i, j) * h12(i, j) +
                           h22(i, j) * h22(i, j);
      if (frob2 > 0.0) braw += w * std::pow(frob2, 0.5 * p);
    }
  }

  EnergyBreakdown out;
  out.h = h;
  out.p = p;
  out.membrane = membrane;
  out.bending_raw = braw;
  out.bending = h * h * std::pow(braw, 2.0 / p);
  out.total = out.membrane + out.bending;
  out.p_outside_model_range = !(p > 2.0 && p < 8.0 / 3.0);
  if (!grad) return out;

  // ---- adjoint sweep -------------------------------------------------------
  // kappa = dE_bend / d bending_raw * p; zero on a flat field, where the
  // outer power 2/p is not differentiable but the gradient limit is 0.
  const double kappa = braw < 1e-300 ? 0.0 : 2.0 * h * h * std::pow(braw, 2.0 / p - 1.0);

  MatrixXd u1_rb(nr, nt), u1_tb(nr, nt), u2_rb(nr, nt), u2_tb(nr, nt);
  MatrixXd v_rb(nr, nt), v_tb(nr, nt), v_rrb(nr, nt), v_rtb(nr, nt), v_ttb(nr, nt);
  for (int j = 0; j < nt; ++j) {
    const double c = cth[j], s = sth[j];
    for (int i = 0; i < nr; ++i) {
      const double r = g.radii()(i);
      const double w = g.weight(i, j);
      const double e11b = 2.0 * w * e11(i, j);
      const double e22b = 2.0 * w * e22(i, j);
      const double e12b = 4.0 * w * e12(i, j);
      const double g1u1b = e11b, g2u2b = e22b;
      const double g2u1b = 0.5 * e12b, g1u2b = 0.5 * e12b;
      const double g1vb = e11b * g1v(i, j) + 0.5 * e12b * g2v(i, j);
      const double g2vb = e22b * g2v(i, j) + 0.5 * e12b * g1v(i, j);

      const double frob2 = h11(i, j) * h11(i, j) + 2.0 * h12(i, j) * h12(i, j) +
                           h22(i, j) * h22(i, j);
      const double fac = frob2 > 0.0 ? kappa * w * std::pow(frob2, 0.5 * p - 1.0) : 0.0;
      const double h11b = fac * h11(i, j);
      const double h12b = 2.0 * fac * h12(i, j);
      const double h22b = fac * h22(i, j);

      // rotate matrix adjoints back to the polar frame
      const double v_rrb_ = h11b * c * c + h12b * c * s + h22b * s * s;
      const double mixedb = -2.0 * h11b * c * s + h12b * (c * c - s * s) +
                            2.0 * h22b * c * s;
      const double hoopb = h11b * s * s - h12b * c * s + h22b * c * c;

      const auto cart_adj = [&](double gxb, double gyb, double& frb, double& ftb) {
        frb = gxb * c + gyb * s;
        ftb = (-gxb * s + gyb * c) / r;
      };
      cart_adj(g1u1b, g2u1b, u1_rb(i, j), u1_tb(i, j));
      cart_adj(g1u2b, g2u2b, u2_rb(i, j), u2_tb(i, j));
      cart_adj(g1vb, g2vb, v_rb(i, j), v_tb(i, j));

      v_rrb(i, j) = v_rrb_;
      v_rtb(i, j) = mixedb / r;
      v_tb(i, j) += -mixedb / (r * r);
      v_rb(i, j) += hoopb / r;
      v_ttb(i, j) = hoopb / (r * r);
    }
  }

  grad->u1 = g.deriv_r_transpose(u1_rb) + g.deriv_theta_transpose(u1_tb);
  grad->u2 = g.deriv_r_transpose(u2_rb) + g.deriv_theta_transpose(u2_tb);
  // v_rt = deriv_r(v_t): its adjoint feeds back into the v_t slot first
  v_tb += g.deriv_r_transpose(v_rtb);
  grad->v = g.deriv_r_transpose(v_rb) + g.deriv_theta_transpose(v_tb) +
            g.deriv2_r_transpose(v_rrb) + g.deriv2_theta_transpose(v_ttb);

  // pinned rows carry no gradient
  const int last = nr - 1;
  grad->u1.row(last).setZero();
  grad->u2.row(last).setZero();
  grad->v.row(last).setZero();
  return out;
}

}  // namespace detail

/// Discrete membrane + bending energy over the grid quadrature.
inline EnergyBreakdown energy(const FieldState& state, double h, double p) {
  return detail::energy_eval(state, h, p, nullptr);
}

/// Exact gradient of the discrete energy with respect to all interior node
/// values; boundary-ring entries are exactly zero.
inline EnergyGradient energy_gradient(const FieldState& state, double h, double p) {
  EnergyGradient grad;
  detail::energy_eval(state, h, p, &grad);
  return grad;
}

inline EnergyBreakdown energy_and_gradient(const FieldState& state, double h,
                                           double p, EnergyGradient& grad) {
  return detail::energy_eval(state, h, p, &grad);
}

}  // namespace dcone
