#pragma once

namespace dcone {

/// Membrane / bending split of the elastic energy
///   E = ||sym Du + 1/2 Dv (x) Dv||_{L2}^2 + h^2 ||D^2 v||_{Lp}^2.
/// bending_raw is the inner integral int |D^2 v|^p; the bending term closes
/// the p-norm before squaring, bending = h^2 * bending_raw^{2/p}.
struct EnergyBreakdown {
  double membrane = 0.0;
  double bending_raw = 0.0;
  double bending = 0.0;
  double total = 0.0;
  double h = 0.0;
  double p = 0.0;
  bool p_outside_model_range = false;  ///< set when p is not in (2, 8/3)
};

}  // namespace dcone
