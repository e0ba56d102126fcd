#pragma once

// Open-loop dynamics of the HVDC-connected offshore wind plant: onshore swing
// and governor, lossless AC links, MMC energy and circulation branches, the DC
// pi-line and the OWPP virtual synchronous generator.
//
// Sign convention: power flows OWPP -> offshore MMC -> DC line -> onshore MMC
// -> grid; I_dc > 0 flows offshore -> onshore.

#include <cmath>
#include <string>
#include <type_traits>

#include "hvdcsim/error.hpp"
#include "hvdcsim/params.hpp"
#include "hvdcsim/state.hpp"

namespace hvdcsim {

/// Pre-event operating point, produced by init_steady_state.
struct OperatingPoint {
  double u_dc_on0 = 1.0;
  double u_dc_off0 = 1.0;
  double i_dc0 = 0.0;
  double p0 = 0.0;  // OWPP export P_ref
  double p_ac_on0 = 0.0;
  double u_sum0_on0 = 1.0;
  double u_sum0_off0 = 1.0;
  double i_cir_on0 = 0.0;
  double i_cir_off0 = 0.0;
  double delta_on0 = 0.0;   // theta_mmc_on - theta_sys
  double delta_off0 = 0.0;  // theta_owpp - theta_mmc_off
};

/// Commands handed from the controllers to the plant.
template <typename Scalar>
struct PlantCommands {
  Scalar df_on{0};  // formed frequency deviation, onshore MMC
  Scalar df_off{0};
  Scalar u_sum0_on{0};
  Scalar u_sum0_off{0};
};

namespace model {

/// Lossless power over a reactance, from node 1 to node 2.
template <typename Scalar>
Scalar ac_power_transfer(const Scalar& u1, const Scalar& u2, double x, const Scalar& th1,
                         const Scalar& th2) {
  using std::sin;
  if (!(x > 0.0)) throw ParameterError("ac_power_transfer: reactance must be > 0");
  return u1 * u2 * sin(th1 - th2) / x;
}

template <typename Scalar>
struct SwingRates {
  Scalar d_theta_sys;
  Scalar d_df_sys;
  Scalar d_dp_m;
};

/// Onshore equivalent machine. dp_ac_on is the incremental HVDC infeed.
template <typename Scalar>
SwingRates<Scalar> swing_derivatives(const Scalar& df_sys, const Scalar& dp_m,
                                     const Scalar& dp_ac_on, double dp_dstb,
                                     const OnshoreGridParams& grid, const Bases& bases) {
  const Scalar dp_e = dp_dstb - dp_ac_on;
  return {bases.omega_b * df_sys, (dp_m - dp_e - grid.d_sys * df_sys) / (2.0 * grid.h_sys),
          (-df_sys / grid.r_droop - dp_m) / grid.t_gov};
}

/// dW/dt. Onshore: DC in, AC out. Offshore: AC in, DC out.
template <typename Scalar>
Scalar mmc_energy_derivative(const Scalar& p_ac, const Scalar& p_dc, Side side) {
  return side == Side::Onshore ? Scalar(p_dc - p_ac) : Scalar(p_ac - p_dc);
}

template <typename Scalar>
struct DcRates {
  Scalar d_u_dc_on;
  Scalar d_u_dc_off;
  Scalar d_i_dc;
  Scalar d_i_cir_on;
  Scalar d_i_cir_off;
  Scalar i_dc_on;   // withdrawn at the onshore terminal
  Scalar i_dc_off;  // injected at the offshore terminal
};

/// Circulation branches, terminal capacitors and the series R-L of the line.
/// With quasi_static the circulation inductance is dropped and the branch
/// current follows algebraically from the commanded voltage.
template <typename Scalar>
DcRates<Scalar> dc_network_derivatives(const StateVector<Scalar>& x, const Scalar& u_sum0_on,
                                       const Scalar& u_sum0_off, const MmcParams& on,
                                       const MmcParams& off, const HvdcLineParams& line,
                                       const Bases& bases, bool quasi_static = false) {
  const double wb = bases.omega_b;
  const Scalar& u_on = x(kUdcOn);
  const Scalar& u_off = x(kUdcOff);
  const Scalar& i_dc = x(kIdc);

  DcRates<Scalar> r;
  Scalar i_cir_on = x(kIcirOn);
  Scalar i_cir_off = x(kIcirOff);
  if (quasi_static) {
    i_cir_on = (u_on - u_sum0_on) / on.r_cir;
    i_cir_off = (u_sum0_off - u_off) / off.r_cir;
    r.d_i_cir_on = Scalar(0);
    r.d_i_cir_off = Scalar(0);
  } else {
    r.d_i_cir_on = wb / on.l_cir * (u_on - u_sum0_on - on.r_cir * i_cir_on);
    r.d_i_cir_off = wb / off.l_cir * (u_sum0_off - u_off - off.r_cir * i_cir_off);
  }
  r.i_dc_on = on.k_cir * i_cir_on;
  r.i_dc_off = off.k_cir * i_cir_off;

  const double c_half = 0.5 * line.c_dc;
  r.d_u_dc_off = wb / c_half * (r.i_dc_off - i_dc);
  r.d_u_dc_on = wb / c_half * (i_dc - r.i_dc_on);
  r.d_i_dc = wb / line.l_dc * (u_off - u_on - line.r_dc * i_dc);
  return r;
}

template <typename Scalar>
struct VsgRates {
  Scalar d_df_vsg;
  Scalar d_theta_owpp;
};

/// OWPP virtual synchronous generator: 2H df/dt = (P_ref - P_out) - D df.
template <typename Scalar>
VsgRates<Scalar> vsg_derivatives(const Scalar& df_vsg, const Scalar& p_out,
                                 const OwppParams& owpp, const Bases& bases) {
  if (owpp.h_owpp == 0.0 && owpp.d_owpp == 0.0)
    throw ParameterError("owpp: h_owpp and d_owpp cannot both be zero");
  const double h = owpp.effective_inertia();
  return {((owpp.p_ref - p_out) - owpp.d_owpp * df_vsg) / (2.0 * h), bases.omega_b * df_vsg};
}

/// Onshore DC voltage as seen from the offshore terminal through the line
/// resistance only.
template <typename Scalar>
Scalar estimate_onshore_dc_voltage(const Scalar& u_dc_off, const Scalar& i_dc, double r_dc) {
  return u_dc_off - r_dc * i_dc;
}

/// Plant right-hand side for fixed controller commands. Controller-state
/// entries of the result are zero; the controllers own those rates.
template <typename Scalar>
StateVector<Scalar> assemble_derivative(const StateVector<Scalar>& x, double dp_dstb,
                                        const SystemParams& p, const OperatingPoint& op,
                                        const PlantCommands<Scalar>& cmd,
                                        DerivedSignals<Scalar>* out = nullptr) {
  StateVector<Scalar> dx = StateVector<Scalar>::Zero();
  const double wb = p.bases.omega_b;

  const Scalar p_ac_on = ac_power_transfer<Scalar>(Scalar(p.mmc_on.u_ac), Scalar(p.grid.e_sys),
                                                   p.grid.x_eq_on, x(kThetaMmcOn), x(kThetaSys));
  // Same expression serves both ends of the lossless offshore link.
  const Scalar p_ac_off = ac_power_transfer<Scalar>(
      Scalar(p.owpp.u_owpp), Scalar(p.mmc_off.u_ac), p.owpp.x_eq_off, x(kThetaOwpp),
      x(kThetaMmcOff));

  const auto swing = swing_derivatives<Scalar>(x(kDfSys), x(kDpM), p_ac_on - op.p_ac_on0,
                                               dp_dstb, p.grid, p.bases);
  dx(kThetaSys) = swing.d_theta_sys;
  dx(kDfSys) = swing.d_df_sys;
  dx(kDpM) = swing.d_dp_m;

  dx(kThetaMmcOn) = wb * cmd.df_on;
  dx(kThetaMmcOff) = wb * cmd.df_off;

  const auto dc = dc_network_derivatives<Scalar>(x, cmd.u_sum0_on, cmd.u_sum0_off, p.mmc_on,
                                                 p.mmc_off, p.line, p.bases,
                                                 p.quasi_static_circulation);
  const Scalar p_dc_on = cmd.u_sum0_on * dc.i_dc_on;
  const Scalar p_dc_off = cmd.u_sum0_off * dc.i_dc_off;
  dx(kWOn) = mmc_energy_derivative<Scalar>(p_ac_on, p_dc_on, Side::Onshore);
  dx(kWOff) = mmc_energy_derivative<Scalar>(p_ac_off, p_dc_off, Side::Offshore);
  dx(kUdcOn) = dc.d_u_dc_on;
  dx(kUdcOff) = dc.d_u_dc_off;
  dx(kIdc) = dc.d_i_dc;
  dx(kIcirOn) = dc.d_i_cir_on;
  dx(kIcirOff) = dc.d_i_cir_off;

  const auto vsg = vsg_derivatives<Scalar>(x(kDfVsg), p_ac_off, p.owpp, p.bases);
  dx(kDfVsg) = vsg.d_df_vsg;
  dx(kThetaOwpp) = vsg.d_theta_owpp;

  if constexpr (std::is_floating_point_v<Scalar>) {
    for (int i = 0; i < kFirstControllerState; ++i) {
      if (!std::isfinite(dx(i)))
        throw SimulationError(std::string(kStateNames[i]), 0.0,
                              "non-finite derivative of " + std::string(kStateNames[i]));
    }
  }

  if (out != nullptr) {
    out->p_ac_on = p_ac_on;
    out->p_ac_off = p_ac_off;
    out->p_dc_on = p_dc_on;
    out->p_dc_off = p_dc_off;
    out->i_dc_on = dc.i_dc_on;
    out->i_dc_off = dc.i_dc_off;
    out->u_sum0_on = cmd.u_sum0_on;
    out->u_sum0_off = cmd.u_sum0_off;
    out->u_hat_dc_on = estimate_onshore_dc_voltage<Scalar>(x(kUdcOff), x(kIdc), p.line.r_dc);
    out->p_owpp = p_ac_off - p.owpp.p_ref;
    out->df_on = cmd.df_on;
    out->df_off = cmd.df_off;
  }
  return dx;
}

}  // namespace model
}  // namespace hvdcsim
