#pragma once

#include <numbers>
#include <string>

#include "hvdcsim/error.hpp"

namespace hvdcsim {

enum class Side { Onshore, Offshore };

inline const char* to_string(Side side) { return side == Side::Onshore ? "on" : "off"; }

struct Bases {
  double f0 = 50.0;       // Hz
  double omega_b = 2.0 * std::numbers::pi * 50.0;
  double s_base = 1000.0;  // MVA, bookkeeping only

  static Bases from_frequency(double f0, double s_base = 1000.0) {
    if (!(f0 > 0.0)) throw ParameterError("grid.f0 must be > 0");
    return Bases{f0, 2.0 * std::numbers::pi * f0, s_base};
  }
};

/// Equivalent onshore synchronous machine with first-order governor lag.
struct OnshoreGridParams {
  double h_sys = 4.0;
  double d_sys = 0.0;
  double r_droop = 0.05;
  double t_gov = 0.5;
  double e_sys = 1.0;
  double x_eq_on = 0.3;

  void validate() const;
};

/// Per-side MMC. The circulation impedance is always twice the arm impedance;
/// construct through make() or call sync_circulation() after editing the arm.
struct MmcParams {
  double r_arm = 0.005;
  double l_arm = 0.08;
  double r_cir = 0.01;
  double l_cir = 0.16;
  double k_cir = 3.0;
  double w_ref = 1.0;
  double u_ac = 1.0;
  double u_dc_ref = 1.0;

  static MmcParams make(double r_arm, double l_arm, double k_cir, double w_ref, double u_ac,
                        double u_dc_ref) {
    MmcParams p{r_arm, l_arm, 0.0, 0.0, k_cir, w_ref, u_ac, u_dc_ref};
    p.sync_circulation();
    return p;
  }

  void sync_circulation() {
    r_cir = 2.0 * r_arm;
    l_cir = 2.0 * l_arm;
  }

  void validate(Side side) const;
};

/// HVDC pi-section. l_dc / c_dc are per-unit reactance / susceptance at omega_b;
/// half of c_dc sits at each terminal.
struct HvdcLineParams {
  double r_dc = 0.01;
  double l_dc = 0.05;
  double c_dc = 0.2;

  void validate() const;
};

struct OwppParams {
  double h_owpp = 0.0;
  double d_owpp = 20.0;
  double u_owpp = 1.0;
  double x_eq_off = 0.3;
  double p_ref = 0.8;
  /// Inertia substituted when h_owpp == 0, turning the VSG swing into a fast droop lag.
  double h_min = 0.0025;

  double effective_inertia() const { return h_owpp > 0.0 ? h_owpp : h_min; }

  void validate() const;
};

struct SystemParams {
  Bases bases;
  OnshoreGridParams grid;
  MmcParams mmc_on;
  MmcParams mmc_off;
  HvdcLineParams line;
  OwppParams owpp;
  /// Algebraic circulation branch (L_cir -> 0) instead of the two i_cir states.
  bool quasi_static_circulation = false;

  const MmcParams& mmc(Side side) const { return side == Side::Onshore ? mmc_on : mmc_off; }

  void validate() const;
};

}  // namespace hvdcsim
