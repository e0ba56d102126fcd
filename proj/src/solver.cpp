#include "hvdcsim/solver.hpp"

#include <array>
#include <cmath>
#include <sstream>

namespace hvdcsim {
namespace {

constexpr std::array<std::string_view, static_cast<int>(kChannelCount) - kStateSize> kDerivedNames = {
    "f_sys",     "f_on_mmc", "f_off_mmc",  "f_vsg",      "P_ac_on",     "P_ac_off",
    "P_dc_on",   "P_dc_off", "I_dc_on",    "I_dc_off",   "U_sum0_on",   "U_sum0_off",
    "U_hat_dc_on", "P_owpp", "P_m"};

std::string fmt_time(double t) {
  std::ostringstream os;
  os << t;
  return os.str();
}

void check_state(const SimState& x, double t) {
  for (int i = 0; i < kStateSize; ++i) {
    if (!std::isfinite(x(i)))
      throw SimulationError(std::string(kStateNames[i]), t,
                            "non-finite " + std::string(kStateNames[i]) + " at t = " + fmt_time(t));
  }
  for (int i : {kUdcOn, kUdcOff, kWOn, kWOff}) {
    if (!(x(i) > 0.0))
      throw SimulationError(std::string(kStateNames[i]), t,
                            std::string(kStateNames[i]) + " <= 0 at t = " + fmt_time(t));
  }
}

// Outer-loop commands held between controller samples.
struct HeldCommands {
  double df_on = 0.0;
  double df_off = 0.0;
  double i_ref_on = 0.0;
  double i_ref_off = 0.0;
};

SimState sampled_derivative(const SimState& x, double dp, const SystemParams& p,
                            const Equilibrium& eq, const ControllerGains& gains,
                            const HeldCommands& held, DerivedSignals<double>* out) {
  const double wb = p.bases.omega_b;
  PlantCommands<double> cmd;
  cmd.df_on = held.df_on;
  cmd.df_off = held.df_off;
  cmd.u_sum0_on = control::circulation_voltage(Side::Onshore, x(kUdcOn), x(kIcirOn), held.i_ref_on,
                                               p.mmc_on, gains.tau_cir, wb,
                                               p.quasi_static_circulation);
  cmd.u_sum0_off = control::circulation_voltage(Side::Offshore, x(kUdcOff), x(kIcirOff),
                                                held.i_ref_off, p.mmc_off, gains.tau_cir, wb,
                                                p.quasi_static_circulation);
  return model::assemble_derivative<double>(x, dp, p, eq.op, cmd, out);
}

void record(Trajectory& traj, Eigen::Index row, double t, const SimState& x,
            const DerivedSignals<double>& d) {
  traj.time[static_cast<std::size_t>(row)] = t;
  auto r = traj.data.row(row);
  r.head<kStateSize>() = x.transpose();
  r(kChFSys) = 1.0 + x(kDfSys);
  r(kChFOnMmc) = 1.0 + d.df_on;
  r(kChFOffMmc) = 1.0 + d.df_off;
  r(kChFVsg) = 1.0 + x(kDfVsg);
  r(kChPAcOn) = d.p_ac_on;
  r(kChPAcOff) = d.p_ac_off;
  r(kChPDcOn) = d.p_dc_on;
  r(kChPDcOff) = d.p_dc_off;
  r(kChIDcOn) = d.i_dc_on;
  r(kChIDcOff) = d.i_dc_off;
  r(kChUSum0On) = d.u_sum0_on;
  r(kChUSum0Off) = d.u_sum0_off;
  r(kChUHatDcOn) = d.u_hat_dc_on;
  r(kChPOwpp) = d.p_owpp;
  r(kChPM) = x(kDpM);
}

}  // namespace

std::string_view channel_name(int channel) {
  if (channel < 0 || channel >= kChannelCount) throw std::out_of_range("channel index");
  if (channel < kStateSize) return kStateNames[channel];
  return kDerivedNames[channel - kStateSize];
}

int channel_index(std::string_view name) {
  for (int i = 0; i < kChannelCount; ++i)
    if (channel_name(i) == name) return i;
  throw std::out_of_range("unknown channel: " + std::string(name));
}

Scenario Scenario::fcr(ControlMode mode) {
  Scenario s;
  s.kind = ScenarioKind::Fcr;
  s.control_mode = mode;
  s.h_owpp = 0.0;
  s.d_owpp = 20.0;
  s.t_end = 30.0;
  return s;
}

Scenario Scenario::inertia(ControlMode mode) {
  Scenario s;
  s.kind = ScenarioKind::Inertia;
  s.control_mode = mode;
  s.h_owpp = 4.0;
  s.d_owpp = 0.0;
  s.t_end = 60.0;
  return s;
}

void Scenario::validate() const {
  if (!(dt > 0.0 && dt <= 1e-3)) throw ParameterError("scenario.dt must be in (0, 1e-3]");
  if (!(t_dstb >= 0.0)) throw ParameterError("scenario.t_dstb must be >= 0");
  if (!(t_dstb < t_end)) throw ParameterError("scenario.t_dstb must be < scenario.t_end");
  if (!std::isfinite(dp_dstb)) throw ParameterError("scenario.dp_dstb must be finite");
  if (output_decimation < 1) throw ParameterError("scenario.output_decimation must be >= 1");
  if (controller_decimation < 0)
    throw ParameterError("scenario.controller_decimation must be >= 0");
  if (!(h_owpp >= 0.0)) throw ParameterError("scenario.h_owpp must be >= 0");
  if (!(d_owpp >= 0.0)) throw ParameterError("scenario.d_owpp must be >= 0");
  if (h_owpp == 0.0 && d_owpp == 0.0)
    throw ParameterError("scenario: h_owpp and d_owpp cannot both be zero");
}

SystemParams scenario_params(const SystemParams& base, const Scenario& scenario) {
  SystemParams p = base;
  p.owpp.h_owpp = scenario.h_owpp;
  p.owpp.d_owpp = scenario.d_owpp;
  return p;
}

Equilibrium init_steady_state(const SystemParams& p, const ControllerGains& gains) {
  p.validate();
  gains.validate();

  const double p_ref = p.owpp.p_ref;
  const double off_capability = p.owpp.u_owpp * p.mmc_off.u_ac / p.owpp.x_eq_off;
  if (!(std::abs(p_ref) < off_capability))
    throw InitError("P_ref exceeds the offshore AC link transfer capability");

  const double u_on = p.mmc_on.u_dc_ref;
  const double r_dc = p.line.r_dc;
  double i_dc = p_ref / u_on;
  int it = 0;
  for (;; ++it) {
    if (it >= 100) throw InitError("operating point did not converge in 100 iterations");
    const double u_off = u_on + r_dc * i_dc;
    const double u_sum_off = u_off + p.mmc_off.r_cir * i_dc / p.mmc_off.k_cir;
    const double next = p_ref / u_sum_off;
    const double step = std::abs(next - i_dc);
    i_dc = next;
    if (step < 1e-12) break;
  }

  Equilibrium eq;
  eq.iterations = it + 1;
  OperatingPoint& op = eq.op;
  op.p0 = p_ref;
  op.u_dc_on0 = u_on;
  op.i_dc0 = i_dc;
  op.u_dc_off0 = u_on + r_dc * i_dc;
  op.i_cir_on0 = i_dc / p.mmc_on.k_cir;
  op.i_cir_off0 = i_dc / p.mmc_off.k_cir;
  op.u_sum0_off0 = op.u_dc_off0 + p.mmc_off.r_cir * op.i_cir_off0;
  op.u_sum0_on0 = op.u_dc_on0 - p.mmc_on.r_cir * op.i_cir_on0;
  op.p_ac_on0 = op.u_sum0_on0 * p.mmc_on.k_cir * op.i_cir_on0;

  const double s_on = op.p_ac_on0 * p.grid.x_eq_on / (p.mmc_on.u_ac * p.grid.e_sys);
  const double s_off = p_ref * p.owpp.x_eq_off / (p.owpp.u_owpp * p.mmc_off.u_ac);
  if (!(std::abs(s_on) < 1.0))
    throw InitError("onshore AC link cannot carry the dispatched power (|arcsin arg| >= 1)");
  op.delta_on0 = std::asin(s_on);
  op.delta_off0 = std::asin(s_off);

  eq.setpoints = ControlSetPoints::from(op, gains.mode);

  SimState& x = eq.state;
  x.setZero();
  x(kThetaMmcOn) = op.delta_on0;
  x(kThetaOwpp) = op.delta_off0;
  x(kWOn) = p.mmc_on.w_ref;
  x(kWOff) = p.mmc_off.w_ref;
  x(kUdcOn) = op.u_dc_on0;
  x(kUdcOff) = op.u_dc_off0;
  x(kIdc) = op.i_dc0;
  x(kIcirOn) = op.i_cir_on0;
  x(kIcirOff) = op.i_cir_off0;

  const SimState dx = closed_loop_derivative<double>(x, 0.0, p, eq, gains);
  const double residual = dx.lpNorm<Eigen::Infinity>();
  if (!(residual < 1e-9)) {
    std::ostringstream os;
    os << "operating point residual " << residual << " exceeds 1e-9";
    throw InitError(os.str());
  }
  return eq;
}

Trajectory integrate(const Scenario& scenario, const SystemParams& params,
                     const ControllerGains& gains) {
  scenario.validate();
  const SystemParams p = scenario_params(params, scenario);
  ControllerGains g = gains;
  g.mode = scenario.control_mode;
  return integrate_from(scenario, p, g, init_steady_state(p, g));
}

Trajectory integrate_from(const Scenario& sc, const SystemParams& p,
                          const ControllerGains& gains, const Equilibrium& eq) {
  sc.validate();
  const double dt = sc.dt;
  const long long n_steps = std::llround(sc.t_end / dt);
  const long long n_event = static_cast<long long>(std::ceil(sc.t_dstb / dt - 1e-9));
  const long long dec = sc.output_decimation;
  const int ctrl_dec = sc.controller_decimation;

  Trajectory traj;
  const Eigen::Index rows = static_cast<Eigen::Index>(n_steps / dec + 1);
  traj.time.resize(static_cast<std::size_t>(rows));
  traj.data.resize(rows, kChannelCount);

  SimState x = eq.state;
  HeldCommands held;
  if (ctrl_dec > 0) {
    held.i_ref_on = eq.setpoints.i_dc_on0;
    held.i_ref_off = eq.setpoints.i_dc_off0;
  }

  auto rhs = [&](const SimState& s, double dp, DerivedSignals<double>* out) -> SimState {
    if (ctrl_dec == 0) return closed_loop_derivative<double>(s, dp, p, eq, gains, out);
    return sampled_derivative(s, dp, p, eq, gains, held, out);
  };

  Eigen::Index row = 0;
  DerivedSignals<double> sig;
  for (long long n = 0; n <= n_steps; ++n) {
    const double t = static_cast<double>(n) * dt;
    const double dp = n >= n_event ? sc.dp_dstb : 0.0;

    if (ctrl_dec > 0 && n % ctrl_dec == 0 && n < n_steps) {
      const double dtc = dt * ctrl_dec;
      const auto on = control::advance_side(x, Side::Onshore, gains, eq.setpoints, p, dtc);
      const auto off = control::advance_side(x, Side::Offshore, gains, eq.setpoints, p, dtc);
      held = {on.f_star - 1.0, off.f_star - 1.0, on.i_dc_ref, off.i_dc_ref};
    }

    if (n % dec == 0) {
      rhs(x, dp, &sig);
      record(traj, row++, t, x, sig);
    }
    if (n == n_steps) break;

    try {
      const SimState k1 = rhs(x, dp, nullptr);
      const SimState k2 = rhs(x + 0.5 * dt * k1, dp, nullptr);
      const SimState k3 = rhs(x + 0.5 * dt * k2, dp, nullptr);
      const SimState k4 = rhs(x + dt * k3, dp, nullptr);
      x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    } catch (const SimulationError& e) {
      // the right-hand side does not know the time
      throw SimulationError(e.channel(), t, std::string(e.what()) + " at t = " + fmt_time(t));
    }
    check_state(x, t + dt);
  }
  traj.data.conservativeResize(row, Eigen::NoChange);
  traj.time.resize(static_cast<std::size_t>(row));
  return traj;
}

}  // namespace hvdcsim
