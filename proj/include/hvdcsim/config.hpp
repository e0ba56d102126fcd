#pragma once

// TOML run configuration. Every key is optional; unknown keys are rejected.
//
//   [grid]            f0 s_base h_sys d_sys r_droop t_gov e_sys x_eq_on
//   [mmc]             quasi_static_circulation
//   [mmc.on|off]      r_arm l_arm k_cir w_ref u_ac u_dc_ref
//   [line]            r_dc l_dc c_dc
//   [owpp]            u_owpp x_eq_off p_ref h_min
//   [control]         mode tau_cir
//   [control.<mode>]  P1..P6 D1..D4 I1 I2 tau_d      (<mode>: holistic | energy_balancing)
//   [scenario]        kind dp_dstb t_dstb dt output_decimation controller_decimation df_on
//   [scenario.<kind>] h_owpp d_owpp t_end           (<kind>: fcr | inertia)

#include <string>

#include "hvdcsim/control.hpp"
#include "hvdcsim/params.hpp"
#include "hvdcsim/solver.hpp"

namespace hvdcsim {

struct RunConfig {
  SystemParams params;
  ControllerGains holistic = ControllerGains::reference(ControlMode::Holistic);
  ControllerGains energy_balancing = ControllerGains::reference(ControlMode::EnergyBalancing);
  ControlMode mode = ControlMode::Holistic;
  ScenarioKind kind = ScenarioKind::Fcr;
  Scenario fcr = Scenario::fcr(ControlMode::Holistic);
  Scenario inertia = Scenario::inertia(ControlMode::Holistic);
  /// Onshore deviation fed to the steady-state relations.
  double df_on = -0.004;

  const ControllerGains& gains(ControlMode m) const {
    return m == ControlMode::Holistic ? holistic : energy_balancing;
  }
  ControllerGains& gains(ControlMode m) {
    return m == ControlMode::Holistic ? holistic : energy_balancing;
  }
  Scenario& scenario_template(ScenarioKind k) { return k == ScenarioKind::Fcr ? fcr : inertia; }

  /// Scenario of the given kind run under the given control mode.
  Scenario scenario(ScenarioKind k, ControlMode m) const;
  /// Gains with the mode field set.
  ControllerGains gains_for(ControlMode m) const;

  void validate() const;
};

ControlMode parse_control_mode(const std::string& s);
ScenarioKind parse_scenario_kind(const std::string& s);

/// Throws ConfigError on syntax errors, unknown keys or wrong value types.
RunConfig parse_config(const std::string& toml_text, const std::string& source = "<string>");
RunConfig load_config(const std::string& path);

/// Full effective configuration; parse_config(to_toml(c)) reproduces c exactly.
std::string to_toml(const RunConfig& config);

}  // namespace hvdcsim
