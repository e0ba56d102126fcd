#include <cmath>

#include "doctest.h"
#include "hvdcsim/analysis.hpp"
#include "hvdcsim/solver.hpp"

using namespace hvdcsim;

namespace {

double tail_mean(const Trajectory& tr, int ch) {
  const Eigen::Index n = tr.samples();
  const Eigen::Index len = n / 10;
  return tr.data.col(ch).tail(len).mean();
}

}  // namespace

TEST_CASE("operating point") {
  SystemParams p;
  const auto g = ControllerGains::reference(ControlMode::Holistic);

  SUBCASE("defaults") {
    const auto eq = init_steady_state(p, g);
    CHECK(eq.op.u_dc_off0 - eq.op.u_dc_on0 == doctest::Approx(p.line.r_dc * eq.op.i_dc0).epsilon(1e-14));
    // DC power at the offshore source equals the OWPP export
    CHECK(eq.op.u_sum0_off0 * eq.op.i_dc0 == doctest::Approx(p.owpp.p_ref).epsilon(1e-12));
    CHECK(std::sin(eq.op.delta_off0) * p.owpp.u_owpp * p.mmc_off.u_ac / p.owpp.x_eq_off ==
          doctest::Approx(p.owpp.p_ref));
    const SimState dx = closed_loop_derivative<double>(eq.state, 0.0, p, eq, g);
    CHECK(dx.lpNorm<Eigen::Infinity>() < 1e-9);
  }
  SUBCASE("no export") {
    p.owpp.p_ref = 0.0;
    const auto eq = init_steady_state(p, g);
    CHECK(eq.op.i_dc0 == 0.0);
    CHECK(eq.op.u_dc_off0 == eq.op.u_dc_on0);
    CHECK(eq.op.delta_on0 == 0.0);
    CHECK(eq.op.delta_off0 == 0.0);
  }
  SUBCASE("infeasible transfer") {
    p.owpp.x_eq_off = 1.5;
    CHECK_THROWS_AS(init_steady_state(p, g), InitError);
  }
  SUBCASE("invalid parameter names the field") {
    p.grid.h_sys = -1.0;
    CHECK_THROWS_WITH_AS(init_steady_state(p, g), "grid.h_sys must be > 0", ParameterError);
  }
}

TEST_CASE("scenario validation") {
  Scenario s = Scenario::fcr(ControlMode::Holistic);
  CHECK_NOTHROW(s.validate());
  s.dt = 2e-3;
  CHECK_THROWS_AS(s.validate(), ParameterError);
  s = Scenario::fcr(ControlMode::Holistic);
  s.t_dstb = s.t_end;
  CHECK_THROWS_AS(s.validate(), ParameterError);
  s = Scenario::fcr(ControlMode::Holistic);
  s.d_owpp = 0.0;
  CHECK_THROWS_AS(s.validate(), ParameterError);
}

TEST_CASE("channels") {
  CHECK(channel_name(kDfSys) == "df_sys");
  CHECK(channel_index("f_off_mmc") == kChFOffMmc);
  CHECK(channel_index("P_owpp") == kChPOwpp);
  CHECK_THROWS_AS(channel_index("nope"), std::out_of_range);
  for (int i = 0; i < kChannelCount; ++i) CHECK(channel_index(channel_name(i)) == i);
}

TEST_CASE("equilibrium is preserved without a disturbance") {
  const SystemParams p;
  for (ControlMode m : {ControlMode::EnergyBalancing, ControlMode::Holistic}) {
    Scenario s = Scenario::inertia(m);
    s.dp_dstb = 0.0;
    s.t_end = 20.0;
    const auto tr = integrate(s, p, ControllerGains::reference(m));
    const Eigen::MatrixXd dev = tr.data.rowwise() - tr.data.row(0);
    CHECK(dev.cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("determinism and event isolation") {
  const SystemParams p;
  const auto g = ControllerGains::reference(ControlMode::Holistic);
  Scenario s = Scenario::fcr(ControlMode::Holistic);
  s.t_end = 3.0;
  const auto a = integrate(s, p, g);
  const auto b = integrate(s, p, g);
  CHECK(a.time == b.time);
  CHECK(a.data.cwiseEqual(b.data).all());

  Scenario big = s;
  big.dp_dstb = 0.2;
  const auto c = integrate(big, p, g);
  Eigen::Index pre = 0;
  while (a.time[static_cast<std::size_t>(pre)] < s.t_dstb) ++pre;
  CHECK(pre > 0);
  CHECK(a.data.topRows(pre).cwiseEqual(c.data.topRows(pre)).all());
  CHECK_FALSE(a.data.row(pre + 5).cwiseEqual(c.data.row(pre + 5)).all());
}

TEST_CASE("output grid") {
  const SystemParams p;
  Scenario s = Scenario::fcr(ControlMode::Holistic);
  s.t_end = 1.0;
  s.t_dstb = 0.5;
  s.output_decimation = 7;
  const auto tr = integrate(s, p, ControllerGains::reference(ControlMode::Holistic));
  CHECK(tr.samples() == 10000 / 7 + 1);
  CHECK(tr.time[1] == doctest::Approx(7e-4));
  CHECK(tr.data.cols() == kChannelCount);
}

TEST_CASE("fcr steady state") {
  const SystemParams p;
  for (ControlMode m : {ControlMode::EnergyBalancing, ControlMode::Holistic}) {
    const Scenario s = Scenario::fcr(m);
    const auto tr = integrate(s, p, ControllerGains::reference(m));
    const double df_on = tail_mean(tr, kDfSys);
    const double df_off = tail_mean(tr, kChFOffMmc) - 1.0;
    const double p_owpp = tail_mean(tr, kChPOwpp);
    const double dp_ac_on = tail_mean(tr, kChPAcOn) - tr.data(0, kChPAcOn);
    CHECK(df_on < 0.0);
    // OWPP droop
    CHECK(p_owpp == doctest::Approx(-s.d_owpp * df_off).epsilon(1e-6));
    // governor droop covers what the HVDC infeed does not
    CHECK(df_on == doctest::Approx(-p.grid.r_droop * (s.dp_dstb - dp_ac_on)).epsilon(1e-6));
    // the three DC currents agree
    CHECK(tail_mean(tr, kChIDcOn) == doctest::Approx(tail_mean(tr, kIdc)).epsilon(1e-8));
    CHECK(tail_mean(tr, kChIDcOff) == doctest::Approx(tail_mean(tr, kIdc)).epsilon(1e-8));
    // DC drop law
    const double drop = tail_mean(tr, kUdcOff) - tail_mean(tr, kUdcOn) - p.line.r_dc * tail_mean(tr, kIdc);
    CHECK(std::abs(drop) < 1e-8);
  }
}

TEST_CASE("inertia response follows the offshore rate of change") {
  const SystemParams p;
  for (ControlMode m : {ControlMode::EnergyBalancing, ControlMode::Holistic}) {
    Scenario s = Scenario::inertia(m);
    s.output_decimation = 1;
    const auto tr = integrate(s, p, ControllerGains::reference(m));
    const Eigen::VectorXd df_off = tr.data.col(kChFOffMmc).array() - 1.0;
    const Eigen::VectorXd rate = analysis::smoothed_derivative(tr.time, df_off, 0.01);
    const Eigen::VectorXd rate_vsg = analysis::smoothed_derivative(tr.time, tr.data.col(kDfVsg), 0.01);
    double miss = 0.0, miss_vsg = 0.0;
    for (Eigen::Index i = 0; i < tr.samples(); ++i) {
      const double t = tr.time[static_cast<std::size_t>(i)];
      const double p_owpp = tr.data(i, kChPOwpp);
      if (t > s.t_dstb + 2.0) miss_vsg = std::max(miss_vsg, std::abs(p_owpp + 2.0 * s.h_owpp * rate_vsg(i)));
      // once the VSG / MMC swing has died out
      if (t > s.t_dstb + 10.0) miss = std::max(miss, std::abs(p_owpp + 2.0 * s.h_owpp * rate(i)));
    }
    const double peak = tr.data.col(kChPOwpp).cwiseAbs().maxCoeff();
    INFO(to_string(m), " miss/peak = ", miss / peak, " vsg ", miss_vsg / peak);
    CHECK(miss < 1e-2 * peak);
    CHECK(miss_vsg < 1e-3 * peak);
    CHECK(std::abs(tail_mean(tr, kChPOwpp)) < 1e-4);
  }
}

TEST_CASE("small substitute inertia does not matter") {
  for (ControlMode m : {ControlMode::EnergyBalancing, ControlMode::Holistic}) {
    const Scenario s = Scenario::fcr(m);
    const auto g = ControllerGains::reference(m);
    SystemParams p;
    const auto a = analysis::compute_metrics(integrate(s, p, g), s);
    p.owpp.h_min *= 0.5;
    const auto b = analysis::compute_metrics(integrate(s, p, g), s);
    auto close = [](double x, double y) {
      return std::abs(x - y) <= 1e-3 * std::max(std::abs(x), std::abs(y)) + 1e-8;
    };
    CHECK(close(a.max_freq_discrepancy_pct, b.max_freq_discrepancy_pct));
    CHECK(close(a.steady_state_sync_error_pct, b.steady_state_sync_error_pct));
    CHECK(close(a.power_tracking_error_pct, b.power_tracking_error_pct));
    CHECK(close(a.frequency_nadir, b.frequency_nadir));
    CHECK(close(a.max_rocof, b.max_rocof));
    CHECK(close(a.oscillation_envelope, b.oscillation_envelope));
  }
}

TEST_CASE("sampled controllers") {
  const SystemParams p;
  const auto g = ControllerGains::reference(ControlMode::Holistic);

  SUBCASE("fine sampling matches the continuous controller") {
    Scenario s = Scenario::fcr(ControlMode::Holistic);
    s.dt = 1e-5;
    s.t_end = 2.0;
    s.output_decimation = 100;
    const auto cont = integrate(s, p, g);
    s.controller_decimation = 1;
    const auto samp = integrate(s, p, g);
    const double diff = (cont.data.col(kDfSys) - samp.data.col(kDfSys)).cwiseAbs().maxCoeff();
    CHECK(diff < 1e-3 * cont.data.col(kDfSys).cwiseAbs().maxCoeff());
  }
  SUBCASE("a hold of 100 us destabilises the DC voltage loop and aborts") {
    Scenario s = Scenario::fcr(ControlMode::Holistic);
    s.controller_decimation = 1;
    s.t_end = 2.0;
    try {
      integrate(s, p, g);
      FAIL("expected an abort");
    } catch (const SimulationError& e) {
      CHECK(e.time() > 0.0);
      CHECK(e.time() < 2.0);
      CHECK_FALSE(e.channel().empty());
    }
  }
}

TEST_CASE("quasi-static circulation approximates the dynamic branch") {
  SystemParams p;
  const auto g = ControllerGains::reference(ControlMode::EnergyBalancing);
  // without the branch inductance the DC voltage loop is much faster
  Scenario s = Scenario::fcr(ControlMode::EnergyBalancing);
  s.dt = 5e-5;
  const auto dyn = integrate(s, p, g);
  p.quasi_static_circulation = true;
  const auto qs = integrate(s, p, g);
  CHECK(tail_mean(qs, kDfSys) == doctest::Approx(tail_mean(dyn, kDfSys)).epsilon(1e-6));
}
