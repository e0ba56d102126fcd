#include <cmath>
#include <random>

#include "doctest.h"
#include "hvdcsim/analysis.hpp"

using namespace hvdcsim;
using namespace hvdcsim::analysis;

namespace {

ClosedFormInputs nominal_inputs() { return {1.0, 1.0, 0.01, 20.0, 1.0, 1.008}; }

// Newton in long double on the unscaled relations:
//   U'_on  = U_on0 + K1 df_on
//   U'_off = U_off0 + df_off / K2
//   dP_dc  = [U'_off (U'_off - U'_on) - U_off0 (U_off0 - U_on0)] / R_dc
//   dP_dc  = -D df_off
long double newton_root(double df_on, const ClosedFormInputs& in, double droop) {
  const long double u_on = in.u_dc_on0 + static_cast<long double>(in.k1) * df_on;
  const long double v = in.u_dc_off0;
  const long double base = v * (v - in.u_dc_on0);
  long double x = 0.0L;
  for (int i = 0; i < 60; ++i) {
    const long double u_off = v + x / in.k2;
    const long double f = (u_off * (u_off - u_on) - base) / in.r_dc + droop * x;
    const long double df = (2.0L * u_off - u_on) / (in.k2 * in.r_dc) + droop;
    x -= f / df;
  }
  return x;
}

Trajectory flat_trajectory(double t_end, double dt) {
  const SystemParams p;
  Scenario s = Scenario::fcr(ControlMode::Holistic);
  s.dp_dstb = 0.0;
  s.t_end = t_end;
  s.dt = dt;
  return integrate(s, p, ControllerGains::reference(ControlMode::Holistic));
}

}  // namespace

TEST_CASE("offshore power deviation") {
  OperatingPoint op;
  op.u_dc_on0 = 1.0;
  op.u_dc_off0 = 1.01;
  CHECK(offshore_power_deviation(1.0, 1.01, op, 0.01) == 0.0);
  CHECK(offshore_power_deviation(1.0, 1.02, op, 0.01) == doctest::Approx(1.03).epsilon(1e-12));

  // second-order symmetric difference vanishes with eps^2
  auto asym = [&](double eps) {
    return offshore_power_deviation(1.0, 1.01 + eps, op, 0.01) +
           offshore_power_deviation(1.0, 1.01 - eps, op, 0.01);
  };
  CHECK(std::abs(asym(1e-3) / asym(5e-4) - 4.0) < 1e-3);
  CHECK_THROWS_WITH_AS(offshore_power_deviation(1.0, 1.0, op, 0.0),
                       "closed form singular at R_dc = 0", DomainError);
}

TEST_CASE("fcr closed form") {
  const auto in = nominal_inputs();
  CHECK(closed_form_fcr(0.0, in) == 0.0);
  const double df_off = closed_form_fcr(-0.004, in);
  CHECK(std::abs(df_off - static_cast<double>(newton_root(-0.004, in, in.d_owpp))) < 1e-12);
  CHECK(std::abs(df_off - brute_force_steady_state(-0.004, in, ResponseKind::Fcr).df_off) < 1e-10);
  CHECK(std::abs(df_off) < 0.004);
  CHECK(df_off < 0.0);
}

TEST_CASE("inertia closed form") {
  const auto in = nominal_inputs();
  CHECK(closed_form_inertia(0.0, in) == 0.0);
  const double df_off = closed_form_inertia(-0.004, in);
  CHECK(std::abs(df_off - static_cast<double>(newton_root(-0.004, in, 0.0))) < 1e-12);
  CHECK(std::abs(df_off - brute_force_steady_state(-0.004, in, ResponseKind::Inertia).df_off) < 1e-10);
}

TEST_CASE("beta identity") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> k(0.2, 5.0), r(1e-4, 0.05), d(0.0, 50.0), u(0.9, 1.1),
      f(-0.01, 0.01);
  for (int i = 0; i < 100; ++i) {
    ClosedFormInputs in{k(rng), k(rng), r(rng), d(rng), u(rng), u(rng)};
    const double df_on = f(rng);
    ClosedFormInputs no_droop = in;
    no_droop.d_owpp = 0.0;
    REQUIRE(beta_inertia(df_on, in) == beta_fcr(df_on, no_droop));
  }
}

TEST_CASE("closed forms agree with the oracle on random inputs") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> k(0.5, 2.0), r(1e-3, 0.05), d(1.0, 40.0), u(0.95, 1.05),
      drop(0.0, 0.02), f(-0.01, 0.01);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    ClosedFormInputs in;
    in.k1 = k(rng);
    in.k2 = k(rng);
    in.r_dc = r(rng);
    in.d_owpp = d(rng);
    in.u_dc_on0 = u(rng);
    in.u_dc_off0 = in.u_dc_on0 + drop(rng);
    const double df_on = f(rng);
    worst = std::max(worst, std::abs(closed_form_fcr(df_on, in) -
                                     brute_force_steady_state(df_on, in, ResponseKind::Fcr).df_off));
    worst = std::max(worst, std::abs(closed_form_inertia(df_on, in) -
                                     brute_force_steady_state(df_on, in, ResponseKind::Inertia).df_off));
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("oracle") {
  const auto in = nominal_inputs();
  CHECK(brute_force_steady_state(0.0, in, ResponseKind::Fcr).df_off == 0.0);

  double prev = -1.0;
  for (int i = 0; i < 20; ++i) {
    const double df_on = -0.01 + 0.02 * i / 19.0;
    const auto o = brute_force_steady_state(df_on, in, ResponseKind::Fcr);
    CHECK(std::abs(o.df_off - closed_form_fcr(df_on, in)) < 1e-10);
    CHECK(o.df_off > prev);
    prev = o.df_off;
  }

  SUBCASE("well posed without line resistance") {
    ClosedFormInputs zero = in;
    zero.r_dc = 0.0;
    zero.u_dc_off0 = zero.u_dc_on0;
    CHECK_THROWS_WITH_AS(closed_form_fcr(-0.004, zero), "closed form singular at R_dc = 0", DomainError);
    CHECK_THROWS_AS(closed_form_inertia(-0.004, zero), DomainError);
    // U'_off = U'_on: the offshore frequency follows K1 K2 df_on
    CHECK(brute_force_steady_state(-0.004, zero, ResponseKind::Fcr).df_off ==
          doctest::Approx(-0.004).epsilon(1e-12));
  }
  SUBCASE("quasi-synchronism as the line resistance vanishes") {
    double last = 1.0;
    for (double r : {1e-2, 1e-3, 1e-4}) {
      ClosedFormInputs c = in;
      c.r_dc = r;
      c.u_dc_off0 = c.u_dc_on0 + r * 0.8;
      const double gap =
          std::abs(brute_force_steady_state(-0.004, c, ResponseKind::Fcr).df_off + 0.004);
      CHECK(gap < last);
      last = gap;
    }
  }
}

TEST_CASE("negative discriminant is a domain error") {
  ClosedFormInputs in = nominal_inputs();
  in.u_dc_on0 = 1.0;
  in.u_dc_off0 = 0.2;
  in.k1 = 1.0;
  CHECK_THROWS_AS(closed_form_inertia(-0.3, in), DomainError);
}

TEST_CASE("smoothed derivative") {
  std::vector<double> t;
  Eigen::VectorXd y(101);
  for (int i = 0; i <= 100; ++i) {
    t.push_back(i * 0.01);
    y(i) = 3.0 * t.back() - 1.0;
  }
  const auto d = smoothed_derivative(t, y);
  for (int i = 0; i <= 100; ++i) CHECK(d(i) == doctest::Approx(3.0));
}

TEST_CASE("metrics at rest") {
  const auto tr = flat_trajectory(12.0, 1e-4);
  Scenario s = Scenario::fcr(ControlMode::Holistic);
  s.dp_dstb = 0.0;
  const auto m = compute_metrics(tr, s);
  CHECK(m.max_freq_discrepancy_pct == 0.0);
  CHECK(m.steady_state_sync_error_pct == 0.0);
  CHECK(m.power_tracking_error_pct == 0.0);
  CHECK(m.frequency_nadir == 1.0);
  CHECK(m.max_rocof == 0.0);
  CHECK(m.oscillation_envelope == 0.0);

  CHECK_THROWS_AS(compute_metrics(flat_trajectory(5.0, 1e-4), s), ParameterError);
}

TEST_CASE("energy balancing fcr steady state matches the closed form") {
  const SystemParams p;
  const auto g = ControllerGains::reference(ControlMode::EnergyBalancing);
  const Scenario s = Scenario::fcr(ControlMode::EnergyBalancing);
  const auto eq = init_steady_state(scenario_params(p, s), g);
  const auto m = compute_metrics(integrate(s, p, g), s);
  CHECK(m.max_freq_discrepancy_pct > 0.0);
  const auto in = ClosedFormInputs::from(g, scenario_params(p, s), eq.op);
  CHECK(m.ss_df_off == doctest::Approx(closed_form_fcr(m.ss_df_on, in)).epsilon(0.01));
  CHECK(m.ss_du_dc_on == doctest::Approx(g.k1() * m.ss_df_on).epsilon(0.005));
  CHECK(m.ss_df_off == doctest::Approx(g.k2() * m.ss_du_dc_off).epsilon(0.005));
  CHECK(std::abs(m.ss_df_off) < std::abs(m.ss_df_on));
}

TEST_CASE("holistic fcr synchronises the frequencies") {
  const SystemParams p;
  const auto g = ControllerGains::reference(ControlMode::Holistic);
  const Scenario s = Scenario::fcr(ControlMode::Holistic);
  const auto m = compute_metrics(integrate(s, p, g), s);
  CHECK(m.steady_state_sync_error_pct < 0.5);
  CHECK(m.ss_estimator_error < 1e-8);
}

TEST_CASE("metrics do not depend on output decimation") {
  const SystemParams p;
  const auto g = ControllerGains::reference(ControlMode::EnergyBalancing);
  Scenario s = Scenario::fcr(ControlMode::EnergyBalancing);
  const auto a = compute_metrics(integrate(s, p, g), s);
  s.output_decimation = 1;
  const auto b = compute_metrics(integrate(s, p, g), s);
  auto close = [](double x, double y) { return std::abs(x - y) <= 1e-3 * std::abs(y); };
  CHECK(close(a.max_freq_discrepancy_pct, b.max_freq_discrepancy_pct));
  CHECK(close(a.steady_state_sync_error_pct, b.steady_state_sync_error_pct));
  CHECK(close(a.power_tracking_error_pct, b.power_tracking_error_pct));
  CHECK(close(a.frequency_nadir, b.frequency_nadir));
  CHECK(close(a.max_rocof, b.max_rocof));
  CHECK(close(a.oscillation_envelope, b.oscillation_envelope));
}
