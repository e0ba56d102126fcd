#include "hvdcsim/control.hpp"

namespace hvdcsim::control {

MmcCommand advance_side(SimState& x, Side side, const ControllerGains& gains,
                        const ControlSetPoints& sp, const SystemParams& p, double dt) {
  if (!(dt > 0.0)) throw ParameterError("controller step: dt must be > 0");
  const SideGains& g = gains.side(side);
  const MmcParams& mmc = p.mmc(side);
  const bool on = side == Side::Onshore;
  const double dw = (on ? x(kWOn) : x(kWOff)) - mmc.w_ref;

  double& xf = x(detail::freq_index(side));
  double& xu = x(detail::udc_index(side));
  double& z = x(detail::pi_index(side));
  xf = pd_advance(g.freq, dw, xf, dt);
  xu = pd_advance(g.udc, dw, xu, dt);

  const double df = pd_output(g.freq, dw, xf);
  const double du_star = pd_output(g.udc, dw, xu);
  const double u_ref = on ? sp.u_ref_on : sp.u_ref_off;
  const double error = u_ref + du_star - detail::feedback_voltage(x, side, gains.mode, p);
  z = pi_advance(error, z, dt);

  MmcCommand cmd;
  cmd.f_star = 1.0 + df;
  cmd.i_dc_ref = detail::dc_current_ref(side, pi_output(g.dc, error, z), sp);
  cmd.u_sum0 = circulation_voltage(side, on ? x(kUdcOn) : x(kUdcOff), on ? x(kIcirOn) : x(kIcirOff),
                                   cmd.i_dc_ref, mmc, gains.tau_cir, p.bases.omega_b,
                                   p.quasi_static_circulation);
  return cmd;
}

MmcCommand energy_balancing_step(SimState& x, Side side, const ControllerGains& gains,
                                 const ControlSetPoints& sp, const SystemParams& p, double dt) {
  detail::require_mode(gains, ControlMode::EnergyBalancing, "energy_balancing_step");
  return advance_side(x, side, gains, sp, p, dt);
}

MmcCommand holistic_step_onshore(SimState& x, const ControllerGains& gains,
                                 const ControlSetPoints& sp, const SystemParams& p, double dt) {
  detail::require_mode(gains, ControlMode::Holistic, "holistic_step_onshore");
  return advance_side(x, Side::Onshore, gains, sp, p, dt);
}

MmcCommand holistic_step_offshore(SimState& x, const ControllerGains& gains,
                                  const ControlSetPoints& sp, const SystemParams& p, double dt) {
  detail::require_mode(gains, ControlMode::Holistic, "holistic_step_offshore");
  return advance_side(x, Side::Offshore, gains, sp, p, dt);
}

}  // namespace hvdcsim::control
