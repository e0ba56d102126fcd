#include "hvdcsim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hvdcsim::analysis {
namespace {

void require_positive_resistance(double r_dc) {
  if (r_dc == 0.0) throw DomainError("closed form singular at R_dc = 0");
  if (!(r_dc > 0.0)) throw DomainError("closed form requires R_dc > 0");
}

double quadratic_root(double beta, double df_on, const ClosedFormInputs& in) {
  const double disc = beta * beta + 4.0 * in.k1 * df_on * in.u_dc_off0;
  if (disc < 0.0) {
    std::ostringstream os;
    os << "negative discriminant " << disc << " (df_on = " << df_on << ", beta = " << beta
       << ", K1 = " << in.k1 << ", U_off0 = " << in.u_dc_off0 << ")";
    throw DomainError(os.str());
  }
  return in.k2 * (-beta + std::sqrt(disc)) / 2.0;
}

// Denominators below this are treated as "nothing happened".
constexpr double kNegligible = 1e-12;

double pct(double num, double den) { return den < kNegligible ? 0.0 : 100.0 * num / den; }

}  // namespace

ClosedFormInputs ClosedFormInputs::from(const ControllerGains& gains, const SystemParams& params,
                                        const OperatingPoint& op) {
  return {gains.k1(), gains.k2(), params.line.r_dc, params.owpp.d_owpp, op.u_dc_on0,
          op.u_dc_off0};
}

double offshore_power_deviation(double u_on_prime, double u_off_prime, const OperatingPoint& op,
                                double r_dc) {
  require_positive_resistance(r_dc);
  return u_off_prime * (u_off_prime - u_on_prime) / r_dc -
         op.u_dc_off0 * (op.u_dc_off0 - op.u_dc_on0) / r_dc;
}

double beta_fcr(double df_on, const ClosedFormInputs& in) {
  return -in.k1 * df_on + in.k2 * in.r_dc * in.d_owpp + 2.0 * in.u_dc_off0 - in.u_dc_on0;
}

double beta_inertia(double df_on, const ClosedFormInputs& in) {
  return -in.k1 * df_on + 2.0 * in.u_dc_off0 - in.u_dc_on0;
}

double closed_form_fcr(double df_on, const ClosedFormInputs& in) {
  require_positive_resistance(in.r_dc);
  if (!(in.d_owpp > 0.0)) throw DomainError("FCR closed form requires D_OWPP > 0");
  return quadratic_root(beta_fcr(df_on, in), df_on, in);
}

double closed_form_inertia(double df_on, const ClosedFormInputs& in) {
  require_positive_resistance(in.r_dc);
  return quadratic_root(beta_inertia(df_on, in), df_on, in);
}

OracleResult brute_force_steady_state(double df_on, const ClosedFormInputs& in,
                                      ResponseKind kind) {
  const double droop = kind == ResponseKind::Fcr ? in.d_owpp : 0.0;
  const double u_on_prime = in.u_dc_on0 + in.k1 * df_on;
  // R_dc * (dP_dc + D df_off) with dP_dc from the terminal voltages and the
  // offshore voltage implied by df_off = K2 dU_off.
  auto residual = [&](double df_off) {
    const double u_off_prime = in.u_dc_off0 + df_off / in.k2;
    return u_off_prime * (u_off_prime - u_on_prime) -
           in.u_dc_off0 * (in.u_dc_off0 - in.u_dc_on0) + in.r_dc * droop * df_off;
  };

  double lo = -0.1;
  double hi = 0.1;
  double f_lo = residual(lo);
  const double f_hi = residual(hi);
  if (!(f_lo * f_hi < 0.0)) {
    if (f_lo == 0.0) return {lo, 0.0, 0};
    if (f_hi == 0.0) return {hi, 0.0, 0};
    throw DomainError("oracle: no sign change of the steady-state residual in [-0.1, 0.1]");
  }

  OracleResult r;
  for (r.iterations = 0; r.iterations < 200; ++r.iterations) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double f_mid = residual(mid);
    if (f_mid == 0.0) {
      lo = hi = mid;
      break;
    }
    if ((f_mid < 0.0) == (f_lo < 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  r.df_off = 0.5 * (lo + hi);
  r.residual = std::abs(residual(r.df_off));
  return r;
}

Eigen::VectorXd smoothed_derivative(const std::vector<double>& t, const Eigen::VectorXd& y,
                                    double window) {
  const Eigen::Index n = y.size();
  Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
  if (n < 2) return d;
  const double h = t[1] - t[0];
  const Eigen::Index half = std::max<Eigen::Index>(1, std::llround(0.5 * window / h));
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index a = std::max<Eigen::Index>(0, i - half);
    const Eigen::Index b = std::min<Eigen::Index>(n - 1, i + half);
    d(i) = (y(b) - y(a)) / (t[static_cast<std::size_t>(b)] - t[static_cast<std::size_t>(a)]);
  }
  return d;
}

Eigen::VectorXd power_requirement(const Trajectory& traj, double h_owpp, double d_owpp) {
  const Eigen::VectorXd df_on = traj.data.col(kDfSys);
  Eigen::VectorXd req = -d_owpp * df_on;
  if (h_owpp != 0.0) req -= 2.0 * h_owpp * smoothed_derivative(traj.time, df_on);
  return req;
}

Metrics compute_metrics(const Trajectory& traj, const Scenario& sc) {
  const Eigen::Index n = traj.samples();
  if (n < 2 || traj.time.back() < sc.t_dstb + 10.0)
    throw ParameterError("compute_metrics: trajectory must cover at least 10 s after the event");

  const Eigen::VectorXd df_on = traj.data.col(kDfSys);
  const Eigen::VectorXd df_off = traj.data.col(kChFOffMmc).array() - 1.0;
  const Eigen::VectorXd p_owpp = traj.data.col(kChPOwpp);
  const Eigen::VectorXd req = power_requirement(traj, sc.h_owpp, sc.d_owpp);
  const Eigen::VectorXd miss = (p_owpp - req).cwiseAbs();

  Metrics m;
  m.max_freq_discrepancy_pct =
      pct((df_on - df_off).cwiseAbs().maxCoeff(), df_on.cwiseAbs().maxCoeff());
  m.power_tracking_error_pct = pct(miss.maxCoeff(), req.cwiseAbs().maxCoeff());
  m.frequency_nadir = traj.data.col(kChFSys).minCoeff();
  m.max_rocof = smoothed_derivative(traj.time, df_on).cwiseAbs().maxCoeff();

  m.oscillation_envelope = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    if (traj.time[static_cast<std::size_t>(i)] > sc.t_dstb + 2.0)
      m.oscillation_envelope = std::max(m.oscillation_envelope, miss(i));

  const double t_tail = traj.time.back() * (1.0 - kTailFraction);
  Eigen::Index first = n - 1;
  while (first > 0 && traj.time[static_cast<std::size_t>(first - 1)] >= t_tail) --first;
  const Eigen::Index len = n - first;
  auto tail_mean = [&](const Eigen::VectorXd& v) { return v.segment(first, len).mean(); };

  m.ss_df_on = tail_mean(df_on);
  m.ss_df_off = tail_mean(df_off);
  m.ss_du_dc_on = tail_mean(traj.data.col(kUdcOn)) - traj.data(0, kUdcOn);
  m.ss_du_dc_off = tail_mean(traj.data.col(kUdcOff)) - traj.data(0, kUdcOff);
  m.ss_p_owpp = tail_mean(p_owpp);
  m.ss_estimator_error = (traj.data.col(kChUHatDcOn) - traj.data.col(kUdcOn))
                             .segment(first, len)
                             .cwiseAbs()
                             .maxCoeff();
  m.steady_state_sync_error_pct = pct(std::abs(m.ss_df_off - m.ss_df_on), std::abs(m.ss_df_on));
  return m;
}

}  // namespace hvdcsim::analysis
