#pragma once

namespace wsnlr {

/// First-order radio model: electronics cost per bit on both ends plus a
/// free-space amplifier term on the transmitter.
struct RadioEnergyModel {
  double e_elec = 50e-9;    // J/bit
  double eps_amp = 100e-12; // J/bit/m^2

  double tx(double bits, double distance_m) const { return e_elec * bits + eps_amp * bits * distance_m * distance_m; }
  double rx(double bits) const { return e_elec * bits; }
};

}  // namespace wsnlr
