#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "hvdcsim/control.hpp"
#include "hvdcsim/model.hpp"
#include "hvdcsim/params.hpp"
#include "hvdcsim/state.hpp"

namespace hvdcsim {

enum class ScenarioKind { Fcr, Inertia };

inline const char* to_string(ScenarioKind kind) {
  return kind == ScenarioKind::Inertia ? "inertia" : "fcr";
}

struct Scenario {
  ScenarioKind kind = ScenarioKind::Fcr;
  ControlMode control_mode = ControlMode::Holistic;
  double dp_dstb = 0.1;  // positive = load increase
  double t_dstb = 1.0;
  double t_end = 30.0;
  double dt = 1e-4;
  double h_owpp = 0.0;
  double d_owpp = 20.0;
  int output_decimation = 10;
  /// 0: controllers evaluated continuously inside the RK4 stages.
  /// N >= 1: outer loops sampled every N steps with backward Euler, held between samples.
  int controller_decimation = 0;

  /// H_OWPP = 0 s, D_OWPP = 20 p.u., 30 s horizon.
  static Scenario fcr(ControlMode mode);
  /// H_OWPP = 4 s, D_OWPP = 0 p.u., 60 s horizon.
  static Scenario inertia(ControlMode mode);

  void validate() const;
};

/// Operating point plus the matching closed-loop state and controller references.
struct Equilibrium {
  SimState state = SimState::Zero();
  OperatingPoint op;
  ControlSetPoints setpoints;
  int iterations = 0;
};

// Output channels: every state entry first, then the derived signals.
enum Channel : int {
  kChFSys = kStateSize,  // absolute p.u. frequencies
  kChFOnMmc,
  kChFOffMmc,
  kChFVsg,
  kChPAcOn,
  kChPAcOff,
  kChPDcOn,
  kChPDcOff,
  kChIDcOn,
  kChIDcOff,
  kChUSum0On,
  kChUSum0Off,
  kChUHatDcOn,
  kChPOwpp,
  kChPM,
  kChannelCount
};

std::string_view channel_name(int channel);
int channel_index(std::string_view name);

struct Trajectory {
  std::vector<double> time;
  Eigen::MatrixXd data;  // rows: samples, cols: Channel

  Eigen::Index samples() const { return data.rows(); }
  Eigen::VectorXd channel(int ch) const { return data.col(ch); }
  Eigen::VectorXd channel(std::string_view name) const { return data.col(channel_index(name)); }
};

/// Closed-loop right-hand side with continuously evaluated controllers.
template <typename Scalar>
StateVector<Scalar> closed_loop_derivative(const StateVector<Scalar>& x, double dp_dstb,
                                           const SystemParams& p, const Equilibrium& eq,
                                           const ControllerGains& gains,
                                           DerivedSignals<Scalar>* out = nullptr) {
  const auto on = control::evaluate_side<Scalar>(x, Side::Onshore, gains, eq.setpoints, p);
  const auto off = control::evaluate_side<Scalar>(x, Side::Offshore, gains, eq.setpoints, p);
  const PlantCommands<Scalar> cmd{on.df, off.df, on.u_sum0, off.u_sum0};
  StateVector<Scalar> dx = model::assemble_derivative<Scalar>(x, dp_dstb, p, eq.op, cmd, out);
  dx(kPdFreqOn) = on.rate_freq;
  dx(kPdUdcOn) = on.rate_udc;
  dx(kPiOn) = on.rate_pi;
  dx(kPdFreqOff) = off.rate_freq;
  dx(kPdUdcOff) = off.rate_udc;
  dx(kPiOff) = off.rate_pi;
  return dx;
}

/// Parameters with the scenario's OWPP response overrides applied.
SystemParams scenario_params(const SystemParams& base, const Scenario& scenario);

/// Pre-event fixed point: DC current from the power balance including
/// circulation losses, angles from the AC link powers, energies at reference.
Equilibrium init_steady_state(const SystemParams& params, const ControllerGains& gains);

/// Fixed-step classical RK4 from the initialized equilibrium.
Trajectory integrate(const Scenario& scenario, const SystemParams& params,
                     const ControllerGains& gains);

/// Same, starting from a caller-supplied equilibrium (params must already carry
/// the scenario overrides).
Trajectory integrate_from(const Scenario& scenario, const SystemParams& params,
                          const ControllerGains& gains, const Equilibrium& eq);

}  // namespace hvdcsim
