#pragma once

namespace dcone {

/// C^2 quintic transition profile on [1/2, 1].
///
/// eta(t) = 0 for t <= 1/2 and 1 for t >= 1, with vanishing first and second
/// derivatives at both plateau ends; in between it is the unique quintic with
/// those six conditions, monotone increasing.
struct Cutoff {
  static double eta(double t) {
    if (t <= 0.5) return 0.0;
    if (t >= 1.0) return 1.0;
    const double s = 2.0 * t - 1.0;
    return s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
  }

  static double eta_d(double t) {
    if (t <= 0.5 || t >= 1.0) return 0.0;
    const double s = 2.0 * t - 1.0;
    const double sm = s - 1.0;
    return 2.0 * 30.0 * s * s * sm * sm;
  }

  static double eta_dd(double t) {
    if (t <= 0.5 || t >= 1.0) return 0.0;
    const double s = 2.0 * t - 1.0;
    return 4.0 * 60.0 * s * (s - 1.0) * (2.0 * s - 1.0);
  }

  // Complementary bump psi = 1 - eta: 1 on [0,1/2], 0 beyond 1.
  static double psi(double t) { return 1.0 - eta(t); }
  static double psi_d(double t) { return -eta_d(t); }
  static double psi_dd(double t) { return -eta_dd(t); }

  /// Radial constant of the bump's homogeneous W^{2,2} seminorm:
  /// k = int_0^1 (psi''(s)^2 s + psi'(s)^2 / s) ds. With it,
  /// || A psi(|x-c|/R) ||_{W^{2,2}} = |A| sqrt(2 pi k) / R.
  static constexpr double psi_w22_radial_constant = 106.70617168142125;

  /// int_0^1 psi(s) s ds, so that int phi dx = 2 pi A R^2 * this.
  static constexpr double psi_mass_radial_constant = 2.0 / 7.0;
};

}  // namespace dcone
