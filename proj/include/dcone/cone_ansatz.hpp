#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "dcone/boundary_profile.hpp"
#include "dcone/cutoff.hpp"
#include "dcone/energy_breakdown.hpp"
#include "dcone/errors.hpp"
#include "dcone/geometry.hpp"

namespace dcone {

/// Dual Hoelder exponent p' = p/(p-1).
inline double dual_exponent(double p) {
  if (!(p > 1.0))
    throw InvalidParameter("dual exponent requires p > 1, got " + std::to_string(p));
  return p / (p - 1.0);
}

/// The cone v_beta switched off below the scale h^{p'/2}:
///   v(x) = eta(|x|/core_radius) |x| beta(x/|x|),  u(x) = u_beta(x).
/// Fields are smooth across the dead core and coincide with the exact cone
/// outside radius core_radius.
class SmoothedCone {
 public:
  SmoothedCone(ConeTrace trace, double h, double p)
      : trace_(std::move(trace)), h_(h), p_(p) {
    if (!(h > 0.0 && h < 1.0))
      throw InvalidParameter("thickness h must lie in (0,1)");
    if (!(p > 2.0 && p < 8.0 / 3.0))
      throw InvalidParameter("bending exponent p must lie in (2, 8/3)");
    core_radius_ = std::pow(h, dual_exponent(p) / 2.0);
  }

  const ConeTrace& trace() const { return trace_; }
  double h() const { return h_; }
  double p() const { return p_; }
  double core_radius() const { return core_radius_; }

  /// Polar partial derivatives of v at (r, theta); everything the energy
  /// integrands need, without trigonometric rotations.
  struct Polar {
    double v;
    double v_r, v_t;           // dv/dr, dv/dtheta
    double v_rr, v_rt, v_tt;   // second partials
  };

  Polar polar(double r, double theta) const {
    Polar out{};
    if (r <= 0.5 * core_radius_) return out;  // dead core, v identically 0
    const double b = trace_.profile().eval(theta, 0);
    const double bd = trace_.profile().eval(theta, 1);
    const double bdd = trace_.profile().eval(theta, 2);
    const double tau = r / core_radius_;
    const double e = Cutoff::eta(tau);
    const double ed = Cutoff::eta_d(tau);
    const double edd = Cutoff::eta_dd(tau);
    out.v = e * r * b;
    out.v_r = b * (e + tau * ed);
    out.v_t = e * r * bd;
    out.v_rr = (b / core_radius_) * (2.0 * ed + tau * edd);
    out.v_rt = bd * (e + tau * ed);
    out.v_tt = e * r * bdd;
    return out;
  }

 private:
  ConeTrace trace_;
  double h_, p_, core_radius_;
};

struct AnsatzFields {
  Vec2 u;
  double v;
  Vec2 dv;
  Mat2 d2v;
};

/// Cartesian fields of the smoothed configuration. The in-plane displacement
/// is always the exact cone u_beta; only v is cut off.
inline AnsatzFields ansatz_fields(const SmoothedCone& sc, const Vec2& x) {
  AnsatzFields f;
  f.u.setZero();
  f.v = 0.0;
  f.dv.setZero();
  f.d2v.setZero();
  const double r = x.norm();
  if (r == 0.0) return f;  // u_beta(0) = 0 and the cutoff core is flat
  const double theta = std::atan2(x[1], x[0]);
  const Vec2 er = unit_radial(theta), et = unit_tangent(theta);
  f.u = r * (sc.trace().gamma(theta) * er + sc.trace().zeta(theta) * et);
  const auto pc = sc.polar(r, theta);
  f.v = pc.v;
  f.dv = pc.v_r * er + (pc.v_t / r) * et;
  const double mixed = pc.v_rt / r - pc.v_t / (r * r);
  const double hoop = pc.v_r / r + pc.v_tt / (r * r);
  f.d2v = from_polar_frame(theta, pc.v_rr, mixed, hoop);
  return f;
}

/// Radial quadrature nodes for integrands concentrated around the smoothing
/// core: geometric spacing from core_radius/64 out to 1 plus a few midpoint
/// cells covering the central disk, where only the O(1) membrane integrand
/// survives.
struct QuadratureSpec {
  int n_radial = 0;     ///< 0 selects a spacing ratio of 1 + 1/48 automatically
  int n_angular = 512;
  int inner_cells = 4;
};

struct DiskQuadrature {
  std::vector<double> r;
  std::vector<double> w;  // 1-d weights; area element contributes w * r * dtheta
  int n_angular = 0;

  static DiskQuadrature build(double core_radius, const QuadratureSpec& spec) {
    if (!(core_radius > 0.0 && core_radius < 1.0))
      throw InvalidParameter("core radius outside (0,1)");
    const double r0 = core_radius / 64.0;
    int n = spec.n_radial;
    if (n <= 0)
      n = static_cast<int>(std::ceil(std::log(1.0 / r0) / std::log(1.0 + 1.0 / 48.0))) + 1;
    if (n < 2 || spec.n_angular < 16)
      throw InvalidParameter("quadrature spec too coarse");

    DiskQuadrature q;
    q.n_angular = spec.n_angular;
    const int inner = std::max(1, spec.inner_cells);
    for (int i = 0; i < inner; ++i) {
      q.r.push_back((i + 0.5) * r0 / inner);
      q.w.push_back(r0 / inner);
    }
    const double step = std::log(1.0 / r0) / (n - 1);
    std::vector<double> rg(n);
    for (int i = 0; i < n; ++i) rg[i] = r0 * std::exp(step * i);
    rg.back() = 1.0;
    for (int i = 0; i < n; ++i) {
      double w = 0.0;
      if (i > 0) w += 0.5 * (rg[i] - rg[i - 1]);
      if (i + 1 < n) w += 0.5 * (rg[i + 1] - rg[i]);
      q.r.push_back(rg[i]);
      q.w.push_back(w);
    }

    // the spacing around the core must resolve the cutoff transition
    double worst = 0.0;
    for (std::size_t i = 1; i < q.r.size(); ++i) {
      const double mid = 0.5 * (q.r[i] + q.r[i - 1]);
      if (mid >= 0.45 * core_radius && mid <= std::min(1.05 * core_radius, 1.0))
        worst = std::max(worst, q.r[i] - q.r[i - 1]);
    }
    if (worst > core_radius / 32.0)
      throw UnresolvedCore("radial spacing " + std::to_string(worst) +
                           " near the core exceeds core_radius/32");
    return q;
  }
};

/// Energy of the smoothed configuration by quadrature of the closed-form
/// fields. The membrane integrand vanishes identically outside the core.
inline EnergyBreakdown ansatz_energy(const SmoothedCone& sc,
                                     const QuadratureSpec& spec = {}) {
  const DiskQuadrature quad = DiskQuadrature::build(sc.core_radius(), spec);
  const int na = quad.n_angular;
  const double dtheta = two_pi / na;
  const double p = sc.p();
  const ConeTrace& trace = sc.trace();
  const BoundaryProfile& prof = trace.profile();

  // angular samples of the strain of the exact cone, in the polar frame
  std::vector<double> s_rr(na), s_rt(na), s_tt(na), bb(na), bd(na), bdd(na);
  for (int j = 0; j < na; ++j) {
    const double t = dtheta * j;
    const double g = trace.gamma(t), gd = trace.gamma_d(t), zd = trace.zeta_d(t);
    s_rr[j] = g;
    s_rt[j] = 0.5 * gd;
    s_tt[j] = g + zd;
    bb[j] = prof.eval(t, 0);
    bd[j] = prof.eval(t, 1);
    bdd[j] = prof.eval(t, 2);
  }

  double membrane = 0.0, bending_raw = 0.0;
  for (std::size_t i = 0; i < quad.r.size(); ++i) {
    const double r = quad.r[i];
    const double wr = quad.w[i] * r * dtheta;
    const double tau = r / sc.core_radius();
    const double e = Cutoff::eta(tau);
    const double ed = Cutoff::eta_d(tau);
    const double edd = Cutoff::eta_dd(tau);
    for (int j = 0; j < na; ++j) {
      const double vr = bb[j] * (e + tau * ed);
      const double vt_over_r = e * bd[j];
      const double e_rr = s_rr[j] + 0.5 * vr * vr;
      const double e_rt = s_rt[j] + 0.5 * vr * vt_over_r;
      const double e_tt = s_tt[j] + 0.5 * vt_over_r * vt_over_r;
      membrane += wr * (e_rr * e_rr + 2.0 * e_rt * e_rt + e_tt * e_tt);

      const double h_rr = (bb[j] / sc.core_radius()) * (2.0 * ed + tau * edd);
      const double h_rt = bd[j] * (e + tau * ed) / r - e * bd[j] / r;
      const double h_tt = vr / r + e * bdd[j] / r;
      const double frob2 = h_rr * h_rr + 2.0 * h_rt * h_rt + h_tt * h_tt;
      if (frob2 > 0.0) bending_raw += wr * std::pow(frob2, 0.5 * p);
    }
  }

  EnergyBreakdown out;
  out.h = sc.h();
  out.p = p;
  out.membrane = membrane;
  out.bending_raw = bending_raw;
  out.bending = sc.h() * sc.h() * std::pow(bending_raw, 2.0 / p);
  out.total = out.membrane + out.bending;
  return out;
}

}  // namespace dcone
