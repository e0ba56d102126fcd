#include "hvdcsim/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

namespace hvdcsim::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// csv column -> trajectory channel
const std::vector<std::pair<std::string, int>>& csv_layout() {
  static const std::vector<std::pair<std::string, int>> layout = {
      {"f_sys", kChFSys},         {"f_off_mmc", kChFOffMmc}, {"f_vsg", kChFVsg},
      {"U_dc_on", kUdcOn},        {"U_dc_off", kUdcOff},     {"U_hat_dc_on", kChUHatDcOn},
      {"I_dc", kIdc},             {"W_on", kWOn},            {"W_off", kWOff},
      {"P_ac_on", kChPAcOn},      {"P_ac_off", kChPAcOff},   {"P_owpp", kChPOwpp},
      {"P_m", kChPM},             {"U_sum0_on", kChUSum0On}, {"U_sum0_off", kChUSum0Off}};
  return layout;
}

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ordered_json metrics_object(const analysis::Metrics& m) {
  ordered_json j;
  j["max_freq_discrepancy_pct"] = m.max_freq_discrepancy_pct;
  j["steady_state_sync_error_pct"] = m.steady_state_sync_error_pct;
  j["power_tracking_error_pct"] = m.power_tracking_error_pct;
  j["frequency_nadir"] = m.frequency_nadir;
  j["max_rocof"] = m.max_rocof;
  j["oscillation_envelope"] = m.oscillation_envelope;
  j["ss_df_on"] = m.ss_df_on;
  j["ss_df_off"] = m.ss_df_off;
  j["ss_du_dc_on"] = m.ss_du_dc_on;
  j["ss_du_dc_off"] = m.ss_du_dc_off;
  j["ss_p_owpp"] = m.ss_p_owpp;
  j["ss_estimator_error"] = m.ss_estimator_error;
  return j;
}

ordered_json scenario_object(const Scenario& sc) {
  ordered_json j;
  j["kind"] = to_string(sc.kind);
  j["control"] = to_string(sc.control_mode);
  j["dp_dstb"] = sc.dp_dstb;
  j["t_dstb"] = sc.t_dstb;
  j["t_end"] = sc.t_end;
  j["dt"] = sc.dt;
  j["h_owpp"] = sc.h_owpp;
  j["d_owpp"] = sc.d_owpp;
  return j;
}

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  body(os);
  os.flush();
  if (!os) throw IoError("write to '" + path.string() + "' failed");
}

void make_out_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir))
    throw IoError("cannot create output directory '" + dir.string() + "'");
}

struct RunResult {
  Trajectory traj;
  analysis::Metrics metrics;
};

RunResult simulate(const RunConfig& cfg, ScenarioKind kind, ControlMode mode) {
  const Scenario sc = cfg.scenario(kind, mode);
  RunResult r;
  r.traj = integrate(sc, cfg.params, cfg.gains_for(mode));
  r.metrics = analysis::compute_metrics(r.traj, sc);
  return r;
}

void write_run(const fs::path& dir, const std::string& stem, const RunResult& r,
               const Scenario& sc) {
  const std::string csv = stem.empty() ? "trajectory.csv" : "trajectory_" + stem + ".csv";
  const std::string json = stem.empty() ? "metrics.json" : "metrics_" + stem + ".json";
  write_file(dir / csv, [&](std::ostream& os) { write_trajectory_csv(os, r.traj); });
  write_file(dir / json, [&](std::ostream& os) {
    auto j = ordered_json::parse(metrics_json(r.metrics, sc));
    j["trajectory"] = csv;
    os << j.dump(2) << "\n";
  });
}

std::string summary_line(const analysis::Metrics& m, const Scenario& sc) {
  std::ostringstream os;
  os << to_string(sc.control_mode) << "/" << to_string(sc.kind)
     << ": discrepancy=" << m.max_freq_discrepancy_pct << "%"
     << " sync=" << m.steady_state_sync_error_pct << "%"
     << " tracking=" << m.power_tracking_error_pct << "%"
     << " nadir=" << m.frequency_nadir << " rocof=" << m.max_rocof
     << " envelope=" << m.oscillation_envelope;
  return os.str();
}

struct Options {
  std::string config;
  std::optional<std::string> control;
  std::optional<std::string> scenario;
  std::string out;
  std::optional<double> df_on;
  std::string param;
  std::string values;
};

RunConfig effective_config(const Options& o) {
  RunConfig cfg = o.config.empty() ? RunConfig{} : load_config(o.config);
  if (o.control) cfg.mode = parse_control_mode(*o.control);
  if (o.scenario) cfg.kind = parse_scenario_kind(*o.scenario);
  if (o.df_on) cfg.df_on = *o.df_on;
  cfg.validate();
  return cfg;
}

int cmd_run(const Options& o, std::ostream& out) {
  const RunConfig cfg = effective_config(o);
  const fs::path dir(o.out);
  make_out_dir(dir);
  const Scenario sc = cfg.scenario(cfg.kind, cfg.mode);
  const RunResult r = simulate(cfg, cfg.kind, cfg.mode);
  write_run(dir, "", r, sc);
  write_file(dir / "config.toml", [&](std::ostream& os) { os << to_toml(cfg); });
  out << summary_line(r.metrics, sc) << "\n";
  return kOk;
}

struct Ordering {
  std::string name;
  bool holds;
};

int cmd_compare(const Options& o, std::ostream& out) {
  const RunConfig cfg = effective_config(o);
  const fs::path dir(o.out);
  make_out_dir(dir);

  struct Cell {
    ControlMode mode;
    ScenarioKind kind;
    std::string stem;
  };
  std::vector<Cell> cells;
  for (ControlMode m : {ControlMode::EnergyBalancing, ControlMode::Holistic})
    for (ScenarioKind k : {ScenarioKind::Fcr, ScenarioKind::Inertia})
      cells.push_back({m, k, std::string(to_string(m)) + "_" + to_string(k)});

  std::vector<RunResult> results(cells.size());
  parallel_for(cells.size(), [&](std::size_t i) {
    results[i] = simulate(cfg, cells[i].kind, cells[i].mode);
    write_run(dir, cells[i].stem, results[i], cfg.scenario(cells[i].kind, cells[i].mode));
  });

  const analysis::Metrics& eb_fcr = results[0].metrics;
  const analysis::Metrics& eb_in = results[1].metrics;
  const analysis::Metrics& ho_fcr = results[2].metrics;
  const analysis::Metrics& ho_in = results[3].metrics;
  const std::vector<Ordering> orderings = {
      {"fcr_sync_error_holistic_below_energy_balancing",
       ho_fcr.steady_state_sync_error_pct < eb_fcr.steady_state_sync_error_pct},
      {"fcr_discrepancy_energy_balancing_above_holistic",
       eb_fcr.max_freq_discrepancy_pct > ho_fcr.max_freq_discrepancy_pct},
      {"fcr_tracking_error_holistic_below_energy_balancing",
       ho_fcr.power_tracking_error_pct < eb_fcr.power_tracking_error_pct},
      {"inertia_discrepancy_below_fcr_energy_balancing",
       eb_in.max_freq_discrepancy_pct < eb_fcr.max_freq_discrepancy_pct &&
           ho_in.max_freq_discrepancy_pct < eb_fcr.max_freq_discrepancy_pct},
      {"inertia_envelope_holistic_not_above_energy_balancing",
       ho_in.oscillation_envelope <= eb_in.oscillation_envelope},
  };

  ordered_json j;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    ordered_json run = metrics_object(results[i].metrics);
    run["scenario"] = scenario_object(cfg.scenario(cells[i].kind, cells[i].mode));
    run["trajectory"] = "trajectory_" + cells[i].stem + ".csv";
    j["runs"][cells[i].stem] = run;
  }
  for (const auto& ord : orderings) j["orderings"][ord.name] = ord.holds;
  write_file(dir / "comparison.json", [&](std::ostream& os) { os << j.dump(2) << "\n"; });
  write_file(dir / "config.toml", [&](std::ostream& os) { os << to_toml(cfg); });

  for (std::size_t i = 0; i < cells.size(); ++i)
    out << summary_line(results[i].metrics, cfg.scenario(cells[i].kind, cells[i].mode)) << "\n";
  for (const auto& ord : orderings)
    out << (ord.holds ? "holds     " : "VIOLATED  ") << ord.name << "\n";
  return kOk;
}

int cmd_steady_state(const Options& o, std::ostream& out) {
  const RunConfig cfg = effective_config(o);
  const ControllerGains g = cfg.gains_for(cfg.mode);
  const Equilibrium eq = init_steady_state(cfg.params, g);
  const auto in = analysis::ClosedFormInputs::from(g, cfg.params, eq.op);

  const double cf_fcr = analysis::closed_form_fcr(cfg.df_on, in);
  const double cf_in = analysis::closed_form_inertia(cfg.df_on, in);
  const auto or_fcr = analysis::brute_force_steady_state(cfg.df_on, in, analysis::ResponseKind::Fcr);
  const auto or_in =
      analysis::brute_force_steady_state(cfg.df_on, in, analysis::ResponseKind::Inertia);

  out << "df_on              " << g17(cfg.df_on) << "\n"
      << "fcr closed_form    " << g17(cf_fcr) << "\n"
      << "fcr oracle         " << g17(or_fcr.df_off) << "\n"
      << "fcr difference     " << g17(cf_fcr - or_fcr.df_off) << "\n"
      << "inertia closed_form " << g17(cf_in) << "\n"
      << "inertia oracle     " << g17(or_in.df_off) << "\n"
      << "inertia difference " << g17(cf_in - or_in.df_off) << "\n";

  if (!o.out.empty()) {
    const fs::path dir(o.out);
    make_out_dir(dir);
    ordered_json j;
    j["df_on"] = cfg.df_on;
    j["fcr"] = {{"closed_form", cf_fcr}, {"oracle", or_fcr.df_off}, {"difference", cf_fcr - or_fcr.df_off}};
    j["inertia"] = {{"closed_form", cf_in}, {"oracle", or_in.df_off}, {"difference", cf_in - or_in.df_off}};
    write_file(dir / "steady_state.json", [&](std::ostream& os) { os << j.dump(2) << "\n"; });
  }
  return kOk;
}

int cmd_sweep(const Options& o, std::ostream& out) {
  const RunConfig cfg = effective_config(o);
  const std::vector<double> values = parse_values(o.values);
  {
    RunConfig probe = cfg;  // rejects unknown names before any output
    apply_sweep_value(probe, o.param, values.front());
  }

  const fs::path dir(o.out);
  make_out_dir(dir);

  std::vector<SweepPoint> points(values.size());
  parallel_for(values.size(), [&](std::size_t i) {
    RunConfig c = cfg;
    apply_sweep_value(c, o.param, values[i]);
    c.validate();
    points[i] = {values[i], simulate(c, c.kind, c.mode).metrics};
  });

  write_file(dir / "sweep.csv", [&](std::ostream& os) {
    os << o.param
       << ",max_freq_discrepancy_pct,steady_state_sync_error_pct,power_tracking_error_pct,"
          "frequency_nadir,max_rocof,oscillation_envelope,ss_df_on,ss_df_off,ss_abs_df_diff,"
          "ss_sync_ratio,ss_du_dc_on,ss_du_dc_off,ss_p_owpp,ss_estimator_error\n";
    for (const auto& pt : points) {
      const auto& m = pt.metrics;
      const double ratio = m.ss_df_on != 0.0 ? m.ss_df_off / m.ss_df_on : 0.0;
      for (double v : {pt.value, m.max_freq_discrepancy_pct, m.steady_state_sync_error_pct,
                       m.power_tracking_error_pct, m.frequency_nadir, m.max_rocof,
                       m.oscillation_envelope, m.ss_df_on, m.ss_df_off,
                       std::abs(m.ss_df_on - m.ss_df_off), ratio, m.ss_du_dc_on, m.ss_du_dc_off,
                       m.ss_p_owpp})
        os << g17(v) << ",";
      os << g17(m.ss_estimator_error) << "\n";
    }
  });
  write_file(dir / "config.toml", [&](std::ostream& os) { os << to_toml(cfg); });
  for (const auto& pt : points)
    out << o.param << "=" << pt.value << "  |df_on - df_off|="
        << std::abs(pt.metrics.ss_df_on - pt.metrics.ss_df_off)
        << "  sync=" << pt.metrics.steady_state_sync_error_pct << "%\n";
  return kOk;
}

}  // namespace

const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols = [] {
    std::vector<std::string> c{"t"};
    for (const auto& [name, ch] : csv_layout()) c.push_back(name);
    return c;
  }();
  return cols;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  const auto& cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << "\n";
  char buf[32];
  for (Eigen::Index r = 0; r < traj.samples(); ++r) {
    std::snprintf(buf, sizeof buf, "%.9g", traj.time[static_cast<std::size_t>(r)]);
    os << buf;
    for (const auto& [name, ch] : csv_layout()) {
      std::snprintf(buf, sizeof buf, ",%.9g", traj.data(r, ch));
      os << buf;
    }
    os << "\n";
  }
}

std::string metrics_json(const analysis::Metrics& m, const Scenario& sc) {
  ordered_json j = metrics_object(m);
  j["scenario"] = scenario_object(sc);
  return j.dump(2);
}

void apply_sweep_value(RunConfig& c, const std::string& param, double value) {
  if (param == "R_dc") {
    c.params.line.r_dc = value;
  } else if (param == "D_OWPP") {
    c.scenario_template(c.kind).d_owpp = value;
  } else if (param == "H_OWPP") {
    c.scenario_template(c.kind).h_owpp = value;
  } else if (param == "P_4") {
    c.gains(c.mode).off.udc.p = value;
  } else {
    throw ConfigError("unknown sweep parameter '" + param + "' (R_dc | D_OWPP | H_OWPP | P_4)");
  }
}

std::vector<double> parse_values(const std::string& list) {
  std::vector<double> v;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto a = item.find_first_not_of(" \t");
    if (a == std::string::npos) continue;
    const auto b = item.find_last_not_of(" \t");
    const std::string tok = item.substr(a, b - a + 1);
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size()) throw ConfigError("--values: cannot parse '" + tok + "'");
    v.push_back(x);
  }
  if (v.empty()) throw ConfigError("--values: empty range");
  return v;
}

unsigned worker_count(std::size_t n) {
  unsigned cap = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("HVDCSIM_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) cap = static_cast<unsigned>(v);
  }
  return static_cast<unsigned>(std::min<std::size_t>(cap, std::max<std::size_t>(n, 1)));
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& job) {
  std::vector<std::exception_ptr> errors(n);
  std::mutex mu;
  std::size_t next = 0;
  auto worker = [&] {
    for (;;) {
      std::size_t i;
      {
        std::lock_guard<std::mutex> lock(mu);
        if (next >= n) return;
        i = next++;
      }
      try {
        job(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned k = worker_count(n);
  if (k <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < k; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"HVDC-connected offshore wind plant frequency-support simulator", "hvdcsim"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub, bool needs_out) {
    sub->add_option("--config", o.config, "TOML configuration file")->check(CLI::ExistingFile);
    sub->add_option("--control", o.control, "holistic | energy_balancing");
    sub->add_option("--scenario", o.scenario, "fcr | inertia");
    auto* opt = sub->add_option("--out", o.out, "output directory");
    if (needs_out) opt->required();
  };
  auto* run_cmd = app.add_subcommand("run", "run one scenario");
  common(run_cmd, true);
  auto* compare_cmd = app.add_subcommand("compare", "both controls on both scenarios");
  common(compare_cmd, true);
  auto* ss_cmd = app.add_subcommand("steady-state", "closed-form and oracle offshore deviation");
  common(ss_cmd, false);
  ss_cmd->add_option("--df-on", o.df_on, "onshore frequency deviation (p.u.)");
  auto* sweep_cmd = app.add_subcommand("sweep", "run one scenario over a parameter grid");
  common(sweep_cmd, true);
  sweep_cmd->add_option("--param", o.param, "R_dc | D_OWPP | H_OWPP | P_4")->required();
  sweep_cmd->add_option("--values", o.values, "comma-separated values")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*run_cmd) return cmd_run(o, out);
    if (*compare_cmd) return cmd_compare(o, out);
    if (*ss_cmd) return cmd_steady_state(o, out);
    return cmd_sweep(o, out);
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kDomainError;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const ParameterError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    return kIoError;
  } catch (const SimulationError& e) {
    err << "simulation aborted: " << e.what() << " (channel " << e.channel() << ")\n";
    return kSimulationAbort;
  } catch (const InitError& e) {
    err << "simulation aborted: initialization failed: " << e.what() << "\n";
    return kSimulationAbort;
  }
}

}  // namespace hvdcsim::cli
