#pragma once

#include "hvdcsim/control.hpp"
#include "hvdcsim/model.hpp"
#include "hvdcsim/params.hpp"
#include "hvdcsim/solver.hpp"

namespace hvdcsim::analysis {

/// Inputs of the steady-state offshore frequency relations.
struct ClosedFormInputs {
  double k1 = 1.0;
  double k2 = 1.0;
  double r_dc = 0.01;
  double d_owpp = 20.0;
  double u_dc_on0 = 1.0;
  double u_dc_off0 = 1.01;

  static ClosedFormInputs from(const ControllerGains& gains, const SystemParams& params,
                               const OperatingPoint& op);
};

enum class ResponseKind { Fcr, Inertia };

/// Change of DC power leaving the offshore terminal when the terminal voltages
/// move from the operating point to (u_on_prime, u_off_prime).
double offshore_power_deviation(double u_on_prime, double u_off_prime, const OperatingPoint& op,
                                double r_dc);

/// beta_1 = -K1 df_on + K2 R_dc D_OWPP + 2 U_off0 - U_on0
double beta_fcr(double df_on, const ClosedFormInputs& in);
/// beta_2 = -K1 df_on + 2 U_off0 - U_on0
double beta_inertia(double df_on, const ClosedFormInputs& in);

/// Steady offshore frequency deviation with droop-only OWPP response.
double closed_form_fcr(double df_on, const ClosedFormInputs& in);
/// Steady offshore frequency deviation with inertia-only OWPP response.
double closed_form_inertia(double df_on, const ClosedFormInputs& in);

struct OracleResult {
  double df_off = 0.0;
  double residual = 0.0;
  int iterations = 0;
};

/// Bisection on df_off in [-0.1, 0.1] of the simultaneous voltage-ratio, DC
/// power and OWPP response relations, multiplied through by R_dc so that
/// R_dc = 0 stays well posed.
OracleResult brute_force_steady_state(double df_on, const ClosedFormInputs& in,
                                      ResponseKind kind);

struct Metrics {
  double max_freq_discrepancy_pct = 0.0;
  double steady_state_sync_error_pct = 0.0;
  double power_tracking_error_pct = 0.0;
  double frequency_nadir = 1.0;
  double max_rocof = 0.0;
  double oscillation_envelope = 0.0;
  // tail means (final 10 % of the horizon), deviations from the first sample
  double ss_df_on = 0.0;
  double ss_df_off = 0.0;
  double ss_du_dc_on = 0.0;
  double ss_du_dc_off = 0.0;
  double ss_p_owpp = 0.0;
  /// max |U_hat_dc_on - U_dc_on| over the tail
  double ss_estimator_error = 0.0;
};

inline constexpr double kRocofWindow = 0.1;  // s
inline constexpr double kTailFraction = 0.1;

/// Centered difference over a window (clipped at the ends).
Eigen::VectorXd smoothed_derivative(const std::vector<double>& t, const Eigen::VectorXd& y,
                                    double window = kRocofWindow);

/// OWPP power the onshore frequency asks for: -D df_on - 2H d(df_on)/dt.
Eigen::VectorXd power_requirement(const Trajectory& traj, double h_owpp, double d_owpp);

Metrics compute_metrics(const Trajectory& traj, const Scenario& scenario);

}  // namespace hvdcsim::analysis
