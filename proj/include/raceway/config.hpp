#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "raceway/chemistry.hpp"
#include "raceway/sim.hpp"
#include "raceway/synthetic.hpp"
#include "raceway/timeseries.hpp"

// Scenario configuration: a small INI-style format ([section], key = value,
// '#' comments). Every key maps to a documented parameter; unknown keys are
// rejected so typos fail loudly.

namespace raceway {

using ConfigMap = std::map<std::string, std::map<std::string, std::string>>;

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline double to_double(const std::string& section, const std::string& key,
                        const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw invalid_parameter("[" + section + "] " + key + ": not a number: '" + value +
                            "'");
  }
}

inline int to_int(const std::string& section, const std::string& key,
                  const std::string& value) {
  const double v = to_double(section, key, value);
  const int i = static_cast<int>(v);
  if (static_cast<double>(i) != v)
    throw invalid_parameter("[" + section + "] " + key + ": not an integer: '" + value +
                            "'");
  return i;
}

}  // namespace detail

inline ConfigMap parse_config(std::istream& in) {
  ConfigMap out;
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw invalid_parameter("config line " + std::to_string(lineno) +
                                ": unterminated section header");
      section = detail::trim(line.substr(1, line.size() - 2));
      out[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw invalid_parameter("config line " + std::to_string(lineno) +
                              ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty())
      throw invalid_parameter("config line " + std::to_string(lineno) + ": empty key");
    out[section][key] = value;
  }
  return out;
}

inline ConfigMap load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw invalid_parameter("config file not found: " + path);
  return parse_config(in);
}

namespace detail {

using Section = std::map<std::string, std::string>;

inline void apply_model(const Section& s, ModelParams& p) {
  for (const auto& [k, v] : s) {
    const double d = to_double("model", k, v);
    if (k == "area") p.area = d;
    else if (k == "cp") p.cp = d;
    else if (k == "rho") p.rho = d;
    else if (k == "t_dilution") p.t_dilution = d;
    else if (k == "mu_max") p.mu_max = d;
    else if (k == "m_min") p.m_min = d;
    else if (k == "m_max") p.m_max = d;
    else if (k == "ka") p.ka = d;
    else if (k == "i_k") p.i_k = d;
    else if (k == "i_km") p.i_km = d;
    else if (k == "n_form") p.n_form = d;
    else if (k == "n_m") p.n_m = d;
    else if (k == "t_min") p.t_min = d;
    else if (k == "t_max") p.t_max = d;
    else if (k == "t_opt") p.t_opt = d;
    else if (k == "ph_min") p.ph_min = d;
    else if (k == "ph_max") p.ph_max = d;
    else if (k == "ph_opt") p.ph_opt = d;
    else if (k == "do_max") p.do_max = d;
    else if (k == "m_do2") p.m_do2 = d;
    else if (k == "kl_const") p.kl_const = d;
    else if (k == "kl_wind") p.kl_wind = d;
    else if (k == "kl_air") p.kl_air = d;
    else if (k == "eta_solar") p.eta_solar = d;
    else if (k == "h_conv_const") p.h_conv_const = d;
    else if (k == "h_conv_wind") p.h_conv_wind = d;
    else if (k == "h_cond") p.h_cond = d;
    else if (k == "emissivity") p.emissivity = d;
    else if (k == "sky_offset") p.sky_offset = d;
    else throw invalid_parameter("unknown key '" + k + "' in [model]");
  }
}

inline void apply_gas(const Section& s, GasParams& g) {
  for (const auto& [k, v] : s) {
    const double d = to_double("gas", k, v);
    if (k == "kla_o2_const") g.kla_o2_const = d;
    else if (k == "kla_o2_wind") g.kla_o2_wind = d;
    else if (k == "kla_o2_air") g.kla_o2_air = d;
    else if (k == "kla_co2_const") g.kla_co2_const = d;
    else if (k == "kla_co2_wind") g.kla_co2_wind = d;
    else if (k == "kla_co2_air") g.kla_co2_air = d;
    else if (k == "y_o2") g.y_o2 = d;
    else if (k == "y_c") g.y_c = d;
    else if (k == "eta_inj") g.eta_inj = d;
    else if (k == "do_dilution") g.do_dilution = d;
    else if (k == "tic_dilution") g.tic_dilution = d;
    else if (k == "co2_atm_eq") g.co2_atm_eq = d;
    else if (k == "alkalinity") g.alkalinity = d;
    else if (k == "k1") g.k1 = d;
    else if (k == "k2") g.k2 = d;
    else if (k == "kw") g.kw = d;
    else throw invalid_parameter("unknown key '" + k + "' in [gas]");
  }
}

inline void apply_cost(const Section& s, CostParams& c) {
  for (const auto& [k, v] : s) {
    const double d = to_double("cost", k, v);
    if (k == "price_biomass") c.price_biomass = d;
    else if (k == "c_power") c.c_power = d;
    else if (k == "p_blower") c.p_blower = d;
    else if (k == "p_wheel") c.p_wheel = d;
    else if (k == "v_linear") c.v_linear = d;
    else if (k == "c_nutrient") c.c_nutrient = d;
    else if (k == "c_co2") c.c_co2 = d;
    else throw invalid_parameter("unknown key '" + k + "' in [cost]");
  }
}

inline void apply_empc(const Section& s, EmpcConfig& e) {
  for (const auto& [k, v] : s) {
    if (k == "np") { e.np = to_int("empc", k, v); continue; }
    if (k == "nc") { e.nc = to_int("empc", k, v); continue; }
    const double d = to_double("empc", k, v);
    if (k == "ts") e.ts = d;
    else if (k == "w_slack_h") e.w_slack_h = d;
    else if (k == "w_slack_xb") e.w_slack_xb = d;
    else if (k == "slack_h_min") e.slack_h_min = d;
    else if (k == "slack_xb_min") e.slack_xb_min = d;
    else if (k == "activation_irradiance") e.activation_irradiance = d;
    else if (k == "h_min_cm") e.h_min_cm = d;
    else if (k == "default_flow") e.default_flow = d;
    else if (k == "q_air_max") e.bounds.q_air_max = d;
    else if (k == "q_co2_max") e.bounds.q_co2_max = d;
    else if (k == "q_d_max") e.bounds.q_d_max = d;
    else if (k == "q_h_max") e.bounds.q_h_max = d;
    else throw invalid_parameter("unknown key '" + k + "' in [empc]");
  }
}

inline void apply_benchmark(const Section& s, BenchmarkConfig& b) {
  for (const auto& [k, v] : s) {
    const double d = to_double("benchmark", k, v);
    if (k == "dilution_rate") b.dilution_rate = d;
    else if (k == "q_h") b.q_h = d;
    else if (k == "q_d") b.q_d = d;
    else if (k == "q_air") b.q_air = d;
    else if (k == "q_co2") b.q_co2 = d;
    else if (k == "level_threshold") b.level_threshold = d;
    else if (k == "level_hysteresis") b.level_hysteresis = d;
    else if (k == "ph_setpoint") b.ph_setpoint = d;
    else if (k == "ph_band") b.ph_band = d;
    else if (k == "harvest_start_hour") b.harvest_start_hour = d;
    else throw invalid_parameter("unknown key '" + k + "' in [benchmark]");
  }
}

inline void apply_pi(const Section& s, PiConfig& p) {
  for (const auto& [k, v] : s) {
    const double d = to_double("pi", k, v);
    if (k == "kp") p.kp = d;
    else if (k == "ti") p.ti = d;
    else if (k == "tt_clipping") p.tt_clipping = d;
    else if (k == "tt_tracking") p.tt_tracking = d;
    else if (k == "setpoint") p.setpoint = d;
    else if (k == "out_min") p.out_min = d;
    else if (k == "out_max") p.out_max = d;
    else if (k == "meas_delay") p.meas_delay = d;
    else throw invalid_parameter("unknown key '" + k + "' in [pi]");
  }
}

}  // namespace detail

/// Loads a scenario file. The [scenario] section names the simulation window,
/// the weather source (a CSV path relative to the scenario file, or a named
/// synthetic preset), the controller/forecast selection and the initial
/// state; the remaining sections override model/controller parameters.
/// seed_override, when set, replaces the file's weather_seed for synthetic
/// presets.
inline Scenario load_scenario(const std::string& path,
                              std::optional<std::uint32_t> seed_override = {}) {
  const ConfigMap cfg = load_config(path);
  for (const auto& [section, _] : cfg) {
    if (section != "scenario" && section != "model" && section != "gas" &&
        section != "cost" && section != "empc" && section != "benchmark" &&
        section != "pi")
      throw invalid_parameter("unknown config section [" + section + "]");
  }

  Scenario sc;
  if (auto it = cfg.find("model"); it != cfg.end()) detail::apply_model(it->second, sc.model);
  if (auto it = cfg.find("gas"); it != cfg.end()) detail::apply_gas(it->second, sc.gas);
  if (auto it = cfg.find("cost"); it != cfg.end()) detail::apply_cost(it->second, sc.cost);
  if (auto it = cfg.find("empc"); it != cfg.end()) detail::apply_empc(it->second, sc.empc);
  if (auto it = cfg.find("benchmark"); it != cfg.end())
    detail::apply_benchmark(it->second, sc.benchmark);
  if (auto it = cfg.find("pi"); it != cfg.end()) detail::apply_pi(it->second, sc.pi);

  auto sit = cfg.find("scenario");
  if (sit == cfg.end()) throw invalid_parameter("config needs a [scenario] section");
  std::string weather_file, weather_preset_name;
  std::uint32_t weather_seed = 0;
  std::int64_t weather_start = 0;
  bool have_start = false, have_end = false, have_ph = false, have_wstart = false;
  double init_ph = 0.0;
  for (const auto& [k, v] : sit->second) {
    if (k == "name") sc.name = v;
    else if (k == "start") { sc.start = parse_iso8601(v); have_start = true; }
    else if (k == "end") { sc.end = parse_iso8601(v); have_end = true; }
    else if (k == "weather") weather_file = v;
    else if (k == "weather_preset") weather_preset_name = v;
    else if (k == "weather_start") { weather_start = parse_iso8601(v); have_wstart = true; }
    else if (k == "weather_seed")
      weather_seed = static_cast<std::uint32_t>(detail::to_int("scenario", k, v));
    else if (k == "controller") sc.controller = v;
    else if (k == "forecast") sc.forecast = v;
    else if (k == "substep") sc.substep = detail::to_double("scenario", k, v);
    else if (k == "initial_biomass") sc.init.biomass = detail::to_double("scenario", k, v);
    else if (k == "initial_level") sc.init.level = detail::to_double("scenario", k, v);
    else if (k == "initial_temp") sc.init.temp = detail::to_double("scenario", k, v);
    else if (k == "initial_oxygen") sc.init.oxygen = detail::to_double("scenario", k, v);
    else if (k == "initial_tic") sc.init.tic = detail::to_double("scenario", k, v);
    else if (k == "initial_ph") { init_ph = detail::to_double("scenario", k, v); have_ph = true; }
    else throw invalid_parameter("unknown key '" + k + "' in [scenario]");
  }
  if (!have_start || !have_end)
    throw invalid_parameter("[scenario] needs start and end timestamps");
  if (weather_file.empty() == weather_preset_name.empty())
    throw invalid_parameter("[scenario] needs exactly one of weather / weather_preset");
  if (have_ph) sc.init.tic = tic_for_ph(init_ph, sc.gas.alkalinity, sc.gas);

  if (!weather_file.empty()) {
    namespace fs = std::filesystem;
    fs::path wp(weather_file);
    if (wp.is_relative()) wp = fs::path(path).parent_path() / wp;
    sc.weather = load_weather_csv(wp.string());
  } else {
    // synthetic weather starts at weather_start if given (e.g. one day before
    // the window so previous-day forecasts have data), else at the midnight
    // at or before `start`
    const std::int64_t day = static_cast<std::int64_t>(seconds_per_day);
    const std::int64_t first = have_wstart ? weather_start : (sc.start / day) * day;
    sc.weather = synthetic_weather(first, weather_preset(weather_preset_name), 60,
                                   seed_override.value_or(weather_seed));
  }
  return sc;
}

}  // namespace raceway
