#pragma once

// Dual-port grid-forming MMC controls and the OWPP virtual synchronous
// generator.
//
// Per MMC side the outer loop is
//   dW      = W - W_ref
//   df*     = PD_freq(dW)
//   dU*     = PD_udc(dW)
//   e       = U_ref + dU* - U_fb
//   I_dc*   = I_0 +/- PI(e)
// where U_fb is the terminal voltage under energy balancing and, for the
// offshore station under holistic control, the estimated onshore voltage.
// The DC current reference is tracked by a first-order circulation-current
// loop that produces U_sum0.
//
// Every block has a continuous form (output + state rate, integrated inside
// the RK4 stages) and a backward-Euler form for sampled control.

#include <algorithm>
#include <cmath>
#include <string>

#include "hvdcsim/error.hpp"
#include "hvdcsim/model.hpp"
#include "hvdcsim/params.hpp"
#include "hvdcsim/state.hpp"

namespace hvdcsim {

enum class ControlMode { EnergyBalancing, Holistic };

inline const char* to_string(ControlMode mode) {
  return mode == ControlMode::Holistic ? "holistic" : "energy_balancing";
}

/// p + d*s/(tau_d*s + 1)
struct PdGains {
  double p = 0.0;
  double d = 0.0;
  double tau_d = 0.01;
};

/// kp + ki/s
struct PiGains {
  double kp = 0.0;
  double ki = 0.0;
};

struct SideGains {
  PdGains freq;
  PdGains udc;
  PiGains dc;
};

struct ControllerGains {
  ControlMode mode = ControlMode::Holistic;
  SideGains on{{1.0, 0.025}, {1.0, 0.025}, {11.914, 2382.9}};
  SideGains off{{0.33, 0.0}, {0.33, 0.025}, {11.914, 2382.9}};
  /// Closed-loop time constant of the circulation-current loop (s).
  double tau_cir = 1e-3;

  /// Default tuning; the energy-balancing set reuses the holistic numbers.
  static ControllerGains reference(ControlMode mode) {
    ControllerGains g;
    g.mode = mode;
    return g;
  }

  const SideGains& side(Side s) const { return s == Side::Onshore ? on : off; }
  SideGains& side(Side s) { return s == Side::Onshore ? on : off; }

  /// Steady-state dU_dc,on / df_on.
  double k1() const { return on.udc.p / on.freq.p; }
  /// Steady-state df_off / dU_dc,off.
  double k2() const { return off.freq.p / off.udc.p; }

  /// P2/P1 == P4/P3 within 1e-9 relative: onshore and offshore frequencies
  /// coincide in steady state under holistic control.
  bool sync_condition_holds() const {
    const double lhs = on.udc.p / on.freq.p;
    const double rhs = off.udc.p / off.freq.p;
    return std::abs(lhs - rhs) <= 1e-9 * std::max(std::abs(lhs), std::abs(rhs));
  }

  void validate() const {
    auto check_pd = [](const PdGains& g, const std::string& name) {
      if (!std::isfinite(g.p) || !std::isfinite(g.d) || !std::isfinite(g.tau_d))
        throw ParameterError("control." + name + " must be finite");
      if (g.d != 0.0 && !(g.tau_d > 0.0))
        throw ParameterError("control." + name + ".tau_d must be > 0 when d != 0");
    };
    check_pd(on.freq, "P1/D1");
    check_pd(on.udc, "P2/D2");
    check_pd(off.freq, "P3/D3");
    check_pd(off.udc, "P4/D4");
    if (on.freq.p == 0.0) throw ParameterError("control.P1 must be nonzero");
    if (off.freq.p == 0.0) throw ParameterError("control.P3 must be nonzero");
    if (off.udc.p == 0.0) throw ParameterError("control.P4 must be nonzero");
    if (!(on.dc.ki >= 0.0)) throw ParameterError("control.I1 must be >= 0");
    if (!(off.dc.ki >= 0.0)) throw ParameterError("control.I2 must be >= 0");
    if (!std::isfinite(on.dc.kp) || !std::isfinite(off.dc.kp))
      throw ParameterError("control.P5/P6 must be finite");
    if (!(tau_cir > 0.0)) throw ParameterError("control.tau_cir must be > 0");
  }
};

/// References fixed at initialization.
struct ControlSetPoints {
  double u_ref_on = 1.0;
  double u_ref_off = 1.0;
  double i_dc_on0 = 0.0;
  double i_dc_off0 = 0.0;

  /// Energy balancing regulates each terminal to its own pre-event voltage;
  /// holistic control shares the onshore reference.
  static ControlSetPoints from(const OperatingPoint& op, ControlMode mode) {
    ControlSetPoints sp;
    sp.u_ref_on = op.u_dc_on0;
    sp.u_ref_off = mode == ControlMode::Holistic ? op.u_dc_on0 : op.u_dc_off0;
    sp.i_dc_on0 = op.i_dc0;
    sp.i_dc_off0 = op.i_dc0;
    return sp;
  }
};

namespace control {

template <typename Scalar>
Scalar pd_output(const PdGains& g, const Scalar& u, const Scalar& filt) {
  if (g.d == 0.0) return g.p * u;
  return g.p * u + (g.d / g.tau_d) * (u - filt);
}

template <typename Scalar>
Scalar pd_rate(const PdGains& g, const Scalar& u, const Scalar& filt) {
  return (u - filt) / g.tau_d;
}

/// Backward-Euler update of the derivative filter state.
inline double pd_advance(const PdGains& g, double u, double filt, double dt) {
  const double a = dt / g.tau_d;
  return (filt + a * u) / (1.0 + a);
}

template <typename Scalar>
Scalar pi_output(const PiGains& g, const Scalar& e, const Scalar& integ) {
  return g.kp * e + g.ki * integ;
}

inline double pi_advance(double e, double integ, double dt) { return integ + dt * e; }

/// U_sum0 that drives the circulation current towards i_dc_ref / K_cir with
/// time constant tau_cir.
template <typename Scalar>
Scalar circulation_voltage(Side side, const Scalar& u_dc, const Scalar& i_cir,
                           const Scalar& i_dc_ref, const MmcParams& mmc, double tau_cir,
                           double omega_b, bool quasi_static) {
  const Scalar i_ref = i_dc_ref / mmc.k_cir;
  Scalar drop;
  if (quasi_static) {
    drop = mmc.r_cir * i_ref;
  } else {
    const double k_cc = mmc.l_cir / (omega_b * tau_cir);
    drop = mmc.r_cir * i_cir + k_cc * (i_ref - i_cir);
  }
  return side == Side::Offshore ? Scalar(u_dc + drop) : Scalar(u_dc - drop);
}

template <typename Scalar>
struct SideEvaluation {
  Scalar df{0};
  Scalar du_star{0};
  Scalar error{0};
  Scalar i_dc_ref{0};
  Scalar u_sum0{0};
  Scalar rate_freq{0};
  Scalar rate_udc{0};
  Scalar rate_pi{0};
};

/// Result of one controller step.
struct MmcCommand {
  double f_star = 1.0;  // p.u., nominal = 1
  double u_sum0 = 0.0;
  double i_dc_ref = 0.0;
};

namespace detail {

inline int freq_index(Side s) { return s == Side::Onshore ? kPdFreqOn : kPdFreqOff; }
inline int udc_index(Side s) { return s == Side::Onshore ? kPdUdcOn : kPdUdcOff; }
inline int pi_index(Side s) { return s == Side::Onshore ? kPiOn : kPiOff; }

template <typename Scalar>
Scalar feedback_voltage(const StateVector<Scalar>& x, Side side, ControlMode mode,
                        const SystemParams& p) {
  if (side == Side::Onshore) return x(kUdcOn);
  if (mode == ControlMode::Holistic)
    return model::estimate_onshore_dc_voltage<Scalar>(x(kUdcOff), x(kIdc), p.line.r_dc);
  return x(kUdcOff);
}

template <typename Scalar>
Scalar dc_current_ref(Side side, const Scalar& pi_out, const ControlSetPoints& sp) {
  // Raising the PI output lifts the regulated voltage: more injection offshore,
  // less withdrawal onshore.
  return side == Side::Offshore ? Scalar(sp.i_dc_off0 + pi_out) : Scalar(sp.i_dc_on0 - pi_out);
}

inline void require_mode(const ControllerGains& g, ControlMode expected, const char* op) {
  if (g.mode != expected)
    throw ParameterError(std::string(op) + ": control mode mismatch (gains are " +
                         to_string(g.mode) + ")");
}

}  // namespace detail

/// Continuous-time evaluation of one side from the current state, used inside
/// the integrator stages.
template <typename Scalar>
SideEvaluation<Scalar> evaluate_side(const StateVector<Scalar>& x, Side side,
                                     const ControllerGains& gains, const ControlSetPoints& sp,
                                     const SystemParams& p) {
  const SideGains& g = gains.side(side);
  const MmcParams& mmc = p.mmc(side);
  const Scalar dw = (side == Side::Onshore ? x(kWOn) : x(kWOff)) - mmc.w_ref;
  const Scalar& xf = x(detail::freq_index(side));
  const Scalar& xu = x(detail::udc_index(side));
  const Scalar& z = x(detail::pi_index(side));

  SideEvaluation<Scalar> e;
  e.df = pd_output<Scalar>(g.freq, dw, xf);
  e.du_star = pd_output<Scalar>(g.udc, dw, xu);
  const double u_ref = side == Side::Onshore ? sp.u_ref_on : sp.u_ref_off;
  e.error = u_ref + e.du_star - detail::feedback_voltage<Scalar>(x, side, gains.mode, p);
  e.i_dc_ref = detail::dc_current_ref<Scalar>(side, pi_output<Scalar>(g.dc, e.error, z), sp);
  const bool on = side == Side::Onshore;
  e.u_sum0 = circulation_voltage<Scalar>(side, on ? x(kUdcOn) : x(kUdcOff),
                                         on ? x(kIcirOn) : x(kIcirOff), e.i_dc_ref, mmc,
                                         gains.tau_cir, p.bases.omega_b,
                                         p.quasi_static_circulation);
  e.rate_freq = pd_rate<Scalar>(g.freq, dw, xf);
  e.rate_udc = pd_rate<Scalar>(g.udc, dw, xu);
  e.rate_pi = e.error;
  return e;
}

/// Sampled update of one side over dt: advances the filter and integrator
/// states of x in place (backward Euler) and returns the new command.
MmcCommand advance_side(SimState& x, Side side, const ControllerGains& gains,
                        const ControlSetPoints& sp, const SystemParams& p, double dt);

/// Dual-port control on either station; each side regulates its own terminal.
MmcCommand energy_balancing_step(SimState& x, Side side, const ControllerGains& gains,
                                 const ControlSetPoints& sp, const SystemParams& p, double dt);

/// Holistic onshore station: shared DC reference, regulates U_dc,on.
MmcCommand holistic_step_onshore(SimState& x, const ControllerGains& gains,
                                 const ControlSetPoints& sp, const SystemParams& p, double dt);

/// Holistic offshore station: regulates the estimated onshore voltage.
MmcCommand holistic_step_offshore(SimState& x, const ControllerGains& gains,
                                  const ControlSetPoints& sp, const SystemParams& p, double dt);

/// VSG rates given the power delivered into the offshore link.
inline model::VsgRates<double> vsg_step(const SimState& x, double p_out, const OwppParams& owpp,
                                        const Bases& bases) {
  return model::vsg_derivatives<double>(x(kDfVsg), p_out, owpp, bases);
}

}  // namespace control
}  // namespace hvdcsim
