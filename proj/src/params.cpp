#include "hvdcsim/params.hpp"

#include <cmath>

namespace hvdcsim {
namespace {

void require(bool ok, const std::string& field, const char* rule) {
  if (!ok) throw ParameterError(field + " " + rule);
}

bool finite(double v) { return std::isfinite(v); }

}  // namespace

void OnshoreGridParams::validate() const {
  require(finite(h_sys) && h_sys > 0.0, "grid.h_sys", "must be > 0");
  require(finite(d_sys) && d_sys >= 0.0, "grid.d_sys", "must be >= 0");
  require(finite(r_droop) && r_droop > 0.0, "grid.r_droop", "must be > 0");
  require(finite(t_gov) && t_gov > 0.0, "grid.t_gov", "must be > 0");
  require(finite(e_sys) && e_sys > 0.0, "grid.e_sys", "must be > 0");
  require(finite(x_eq_on) && x_eq_on > 0.0, "grid.x_eq_on", "must be > 0");
}

void MmcParams::validate(Side side) const {
  const std::string prefix = std::string("mmc.") + to_string(side) + ".";
  require(finite(r_arm) && r_arm >= 0.0, prefix + "r_arm", "must be >= 0");
  require(finite(l_arm) && l_arm > 0.0, prefix + "l_arm", "must be > 0");
  require(r_cir == 2.0 * r_arm && l_cir == 2.0 * l_arm, prefix + "r_cir/l_cir",
          "must equal twice the arm impedance");
  require(finite(k_cir) && k_cir > 0.0, prefix + "k_cir", "must be > 0");
  require(finite(w_ref) && w_ref > 0.0, prefix + "w_ref", "must be > 0");
  require(finite(u_ac) && u_ac > 0.0, prefix + "u_ac", "must be > 0");
  require(finite(u_dc_ref) && u_dc_ref > 0.0, prefix + "u_dc_ref", "must be > 0");
}

void HvdcLineParams::validate() const {
  require(finite(r_dc) && r_dc >= 0.0, "line.r_dc", "must be >= 0");
  require(finite(l_dc) && l_dc > 0.0, "line.l_dc", "must be > 0");
  require(finite(c_dc) && c_dc > 0.0, "line.c_dc", "must be > 0");
}

void OwppParams::validate() const {
  require(finite(h_owpp) && h_owpp >= 0.0, "owpp.h_owpp", "must be >= 0");
  require(finite(d_owpp) && d_owpp >= 0.0, "owpp.d_owpp", "must be >= 0");
  require(finite(u_owpp) && u_owpp > 0.0, "owpp.u_owpp", "must be > 0");
  require(finite(x_eq_off) && x_eq_off > 0.0, "owpp.x_eq_off", "must be > 0");
  require(finite(p_ref) && p_ref >= 0.0 && p_ref <= 1.0, "owpp.p_ref", "must be in [0, 1]");
  require(finite(h_min) && h_min > 0.0, "owpp.h_min", "must be > 0");
}

void SystemParams::validate() const {
  require(finite(bases.f0) && bases.f0 > 0.0, "grid.f0", "must be > 0");
  require(bases.omega_b == 2.0 * std::numbers::pi * bases.f0, "bases.omega_b",
          "must equal 2*pi*f0");
  grid.validate();
  mmc_on.validate(Side::Onshore);
  mmc_off.validate(Side::Offshore);
  line.validate();
  owpp.validate();
  if (quasi_static_circulation) {
    require(mmc_on.r_cir > 0.0 && mmc_off.r_cir > 0.0, "mmc.r_arm",
            "must be > 0 with quasi-static circulation");
  }
}

}  // namespace hvdcsim
