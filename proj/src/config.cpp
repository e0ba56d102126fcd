#include "hvdcsim/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string_view>

#define TOML_ENABLE_FORMATTERS 0
#include "toml.hpp"

namespace hvdcsim {
namespace {

// Binds the keys of one TOML table to fields; anything else is an error.
class TableBinder {
 public:
  TableBinder(const toml::table& table, std::string path) : table_(table), path_(std::move(path)) {}

  TableBinder& num(const char* key, double& field) {
    handlers_[key] = [&field](const toml::node& n, const std::string& name) {
      if (auto v = n.value_exact<double>()) {
        field = *v;
      } else if (auto i = n.value_exact<int64_t>()) {
        field = static_cast<double>(*i);
      } else {
        throw ConfigError(name + ": expected a number");
      }
    };
    return *this;
  }

  TableBinder& integer(const char* key, int& field) {
    handlers_[key] = [&field](const toml::node& n, const std::string& name) {
      auto i = n.value_exact<int64_t>();
      if (!i) throw ConfigError(name + ": expected an integer");
      field = static_cast<int>(*i);
    };
    return *this;
  }

  TableBinder& boolean(const char* key, bool& field) {
    handlers_[key] = [&field](const toml::node& n, const std::string& name) {
      auto b = n.value_exact<bool>();
      if (!b) throw ConfigError(name + ": expected true or false");
      field = *b;
    };
    return *this;
  }

  TableBinder& text(const char* key, std::function<void(const std::string&)> set) {
    handlers_[key] = [set = std::move(set)](const toml::node& n, const std::string& name) {
      auto s = n.value_exact<std::string>();
      if (!s) throw ConfigError(name + ": expected a string");
      try {
        set(*s);
      } catch (const ConfigError& e) {
        throw ConfigError(name + ": " + e.what());
      }
    };
    return *this;
  }

  TableBinder& table(const char* key, std::function<void(const toml::table&, const std::string&)> f) {
    handlers_[key] = [f = std::move(f)](const toml::node& n, const std::string& name) {
      const auto* t = n.as_table();
      if (t == nullptr) throw ConfigError(name + ": expected a table");
      f(*t, name);
    };
    return *this;
  }

  void apply() const {
    for (const auto& [k, node] : table_) {
      const std::string key(k.str());
      const std::string name = path_.empty() ? key : path_ + "." + key;
      auto it = handlers_.find(key);
      if (it == handlers_.end()) throw ConfigError("unknown key '" + name + "'");
      it->second(node, name);
    }
  }

 private:
  const toml::table& table_;
  std::string path_;
  std::map<std::string, std::function<void(const toml::node&, const std::string&)>> handlers_;
};

void bind_mmc(const toml::table& t, const std::string& path, MmcParams& m) {
  TableBinder(t, path)
      .num("r_arm", m.r_arm)
      .num("l_arm", m.l_arm)
      .num("k_cir", m.k_cir)
      .num("w_ref", m.w_ref)
      .num("u_ac", m.u_ac)
      .num("u_dc_ref", m.u_dc_ref)
      .apply();
  m.sync_circulation();
}

void bind_gains(const toml::table& t, const std::string& path, ControllerGains& g) {
  double tau_d = g.on.freq.tau_d;
  TableBinder(t, path)
      .num("P1", g.on.freq.p)
      .num("D1", g.on.freq.d)
      .num("P2", g.on.udc.p)
      .num("D2", g.on.udc.d)
      .num("P3", g.off.freq.p)
      .num("D3", g.off.freq.d)
      .num("P4", g.off.udc.p)
      .num("D4", g.off.udc.d)
      .num("P5", g.on.dc.kp)
      .num("I1", g.on.dc.ki)
      .num("P6", g.off.dc.kp)
      .num("I2", g.off.dc.ki)
      .num("tau_d", tau_d)
      .apply();
  for (PdGains* pd : {&g.on.freq, &g.on.udc, &g.off.freq, &g.off.udc}) pd->tau_d = tau_d;
}

void bind_scenario_kind(const toml::table& t, const std::string& path, Scenario& s) {
  TableBinder(t, path).num("h_owpp", s.h_owpp).num("d_owpp", s.d_owpp).num("t_end", s.t_end).apply();
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s(buf);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

}  // namespace

ControlMode parse_control_mode(const std::string& s) {
  if (s == "holistic") return ControlMode::Holistic;
  if (s == "energy_balancing" || s == "energy-balancing") return ControlMode::EnergyBalancing;
  throw ConfigError("unknown control mode '" + s + "' (holistic | energy_balancing)");
}

ScenarioKind parse_scenario_kind(const std::string& s) {
  if (s == "fcr") return ScenarioKind::Fcr;
  if (s == "inertia") return ScenarioKind::Inertia;
  throw ConfigError("unknown scenario '" + s + "' (fcr | inertia)");
}

Scenario RunConfig::scenario(ScenarioKind k, ControlMode m) const {
  Scenario s = k == ScenarioKind::Fcr ? fcr : inertia;
  s.kind = k;
  s.control_mode = m;
  return s;
}

ControllerGains RunConfig::gains_for(ControlMode m) const {
  ControllerGains g = gains(m);
  g.mode = m;
  return g;
}

void RunConfig::validate() const {
  params.validate();
  holistic.validate();
  energy_balancing.validate();
  fcr.validate();
  inertia.validate();
  if (!std::isfinite(df_on)) throw ParameterError("scenario.df_on must be finite");
}

RunConfig parse_config(const std::string& text, const std::string& source) {
  toml::table root;
  try {
    root = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << source << ":" << e.source().begin.line << ":" << e.source().begin.column << ": "
       << e.description();
    throw ConfigError(os.str());
  }

  RunConfig c;
  SystemParams& p = c.params;
  double f0 = p.bases.f0;
  double s_base = p.bases.s_base;
  // shared scenario keys land in both templates
  Scenario common = c.fcr;

  TableBinder(root, "")
      .table("grid",
             [&](const toml::table& t, const std::string& path) {
               TableBinder(t, path)
                   .num("f0", f0)
                   .num("s_base", s_base)
                   .num("h_sys", p.grid.h_sys)
                   .num("d_sys", p.grid.d_sys)
                   .num("r_droop", p.grid.r_droop)
                   .num("t_gov", p.grid.t_gov)
                   .num("e_sys", p.grid.e_sys)
                   .num("x_eq_on", p.grid.x_eq_on)
                   .apply();
             })
      .table("mmc",
             [&](const toml::table& t, const std::string& path) {
               TableBinder(t, path)
                   .boolean("quasi_static_circulation", p.quasi_static_circulation)
                   .table("on", [&](const toml::table& s, const std::string& q) { bind_mmc(s, q, p.mmc_on); })
                   .table("off", [&](const toml::table& s, const std::string& q) { bind_mmc(s, q, p.mmc_off); })
                   .apply();
             })
      .table("line",
             [&](const toml::table& t, const std::string& path) {
               TableBinder(t, path)
                   .num("r_dc", p.line.r_dc)
                   .num("l_dc", p.line.l_dc)
                   .num("c_dc", p.line.c_dc)
                   .apply();
             })
      .table("owpp",
             [&](const toml::table& t, const std::string& path) {
               TableBinder(t, path)
                   .num("u_owpp", p.owpp.u_owpp)
                   .num("x_eq_off", p.owpp.x_eq_off)
                   .num("p_ref", p.owpp.p_ref)
                   .num("h_min", p.owpp.h_min)
                   .apply();
             })
      .table("control",
             [&](const toml::table& t, const std::string& path) {
               double tau_cir = c.holistic.tau_cir;
               TableBinder(t, path)
                   .text("mode", [&](const std::string& s) { c.mode = parse_control_mode(s); })
                   .num("tau_cir", tau_cir)
                   .table("holistic",
                          [&](const toml::table& s, const std::string& q) { bind_gains(s, q, c.holistic); })
                   .table("energy_balancing",
                          [&](const toml::table& s, const std::string& q) {
                            bind_gains(s, q, c.energy_balancing);
                          })
                   .apply();
               c.holistic.tau_cir = tau_cir;
               c.energy_balancing.tau_cir = tau_cir;
             })
      .table("scenario",
             [&](const toml::table& t, const std::string& path) {
               TableBinder(t, path)
                   .text("kind", [&](const std::string& s) { c.kind = parse_scenario_kind(s); })
                   .num("dp_dstb", common.dp_dstb)
                   .num("t_dstb", common.t_dstb)
                   .num("dt", common.dt)
                   .integer("output_decimation", common.output_decimation)
                   .integer("controller_decimation", common.controller_decimation)
                   .num("df_on", c.df_on)
                   .table("fcr", [&](const toml::table& s, const std::string& q) { bind_scenario_kind(s, q, c.fcr); })
                   .table("inertia",
                          [&](const toml::table& s, const std::string& q) { bind_scenario_kind(s, q, c.inertia); })
                   .apply();
             })
      .apply();

  p.bases = Bases::from_frequency(f0, s_base);
  for (Scenario* s : {&c.fcr, &c.inertia}) {
    s->dp_dstb = common.dp_dstb;
    s->t_dstb = common.t_dstb;
    s->dt = common.dt;
    s->output_decimation = common.output_decimation;
    s->controller_decimation = common.controller_decimation;
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

std::string to_toml(const RunConfig& c) {
  const SystemParams& p = c.params;
  std::ostringstream os;
  os << "[grid]\n"
     << "f0 = " << num(p.bases.f0) << "\n"
     << "s_base = " << num(p.bases.s_base) << "\n"
     << "h_sys = " << num(p.grid.h_sys) << "\n"
     << "d_sys = " << num(p.grid.d_sys) << "\n"
     << "r_droop = " << num(p.grid.r_droop) << "\n"
     << "t_gov = " << num(p.grid.t_gov) << "\n"
     << "e_sys = " << num(p.grid.e_sys) << "\n"
     << "x_eq_on = " << num(p.grid.x_eq_on) << "\n\n";
  os << "[mmc]\nquasi_static_circulation = " << (p.quasi_static_circulation ? "true" : "false")
     << "\n\n";
  for (Side side : {Side::Onshore, Side::Offshore}) {
    const MmcParams& m = p.mmc(side);
    os << "[mmc." << to_string(side) << "]\n"
       << "r_arm = " << num(m.r_arm) << "\n"
       << "l_arm = " << num(m.l_arm) << "\n"
       << "k_cir = " << num(m.k_cir) << "\n"
       << "w_ref = " << num(m.w_ref) << "\n"
       << "u_ac = " << num(m.u_ac) << "\n"
       << "u_dc_ref = " << num(m.u_dc_ref) << "\n\n";
  }
  os << "[line]\n"
     << "r_dc = " << num(p.line.r_dc) << "\n"
     << "l_dc = " << num(p.line.l_dc) << "\n"
     << "c_dc = " << num(p.line.c_dc) << "\n\n";
  os << "[owpp]\n"
     << "u_owpp = " << num(p.owpp.u_owpp) << "\n"
     << "x_eq_off = " << num(p.owpp.x_eq_off) << "\n"
     << "p_ref = " << num(p.owpp.p_ref) << "\n"
     << "h_min = " << num(p.owpp.h_min) << "\n\n";
  os << "[control]\n"
     << "mode = \"" << to_string(c.mode) << "\"\n"
     << "tau_cir = " << num(c.holistic.tau_cir) << "\n\n";
  for (ControlMode m : {ControlMode::Holistic, ControlMode::EnergyBalancing}) {
    const ControllerGains& g = c.gains(m);
    os << "[control." << to_string(m) << "]\n"
       << "P1 = " << num(g.on.freq.p) << "\nD1 = " << num(g.on.freq.d) << "\n"
       << "P2 = " << num(g.on.udc.p) << "\nD2 = " << num(g.on.udc.d) << "\n"
       << "P3 = " << num(g.off.freq.p) << "\nD3 = " << num(g.off.freq.d) << "\n"
       << "P4 = " << num(g.off.udc.p) << "\nD4 = " << num(g.off.udc.d) << "\n"
       << "P5 = " << num(g.on.dc.kp) << "\nI1 = " << num(g.on.dc.ki) << "\n"
       << "P6 = " << num(g.off.dc.kp) << "\nI2 = " << num(g.off.dc.ki) << "\n"
       << "tau_d = " << num(g.on.freq.tau_d) << "\n\n";
  }
  os << "[scenario]\n"
     << "kind = \"" << to_string(c.kind) << "\"\n"
     << "dp_dstb = " << num(c.fcr.dp_dstb) << "\n"
     << "t_dstb = " << num(c.fcr.t_dstb) << "\n"
     << "dt = " << num(c.fcr.dt) << "\n"
     << "output_decimation = " << c.fcr.output_decimation << "\n"
     << "controller_decimation = " << c.fcr.controller_decimation << "\n"
     << "df_on = " << num(c.df_on) << "\n\n";
  for (ScenarioKind k : {ScenarioKind::Fcr, ScenarioKind::Inertia}) {
    const Scenario& s = k == ScenarioKind::Fcr ? c.fcr : c.inertia;
    os << "[scenario." << to_string(k) << "]\n"
       << "h_owpp = " << num(s.h_owpp) << "\n"
       << "d_owpp = " << num(s.d_owpp) << "\n"
       << "t_end = " << num(s.t_end) << "\n\n";
  }
  return os.str();
}

}  // namespace hvdcsim
