#pragma once

#include <cctype>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ntnopt/channel.hpp"
#include "ntnopt/linkmodel.hpp"
#include "ntnopt/orchestrator.hpp"
#include "ntnopt/scenario.hpp"

namespace ntnopt {

/// Configuration error carrying the offending field path, e.g.
/// "[scenario] area_side_km".
struct ConfigError : std::runtime_error {
  ConfigError(std::string field_path, const std::string& message)
      : std::runtime_error("config error at " + field_path + ": " + message),
        field(std::move(field_path)) {}
  std::string field;
};

struct CampaignConfig {
  ScenarioConfig scenario;
  RadioConfig radio;
  ChannelParams channel;
  OrchestratorOptions solver;
  std::vector<Policy> policies{Policy{PolicyKind::kBaselineTnOnly, 0.0},
                               Policy{PolicyKind::kThreegppSplit, 0.0},
                               Policy{PolicyKind::kFrameworkFixedEpsilon, 0.0},
                               Policy{PolicyKind::kFrameworkOptimal, 0.0}};
  std::vector<std::uint64_t> seeds{1};
  std::string output_dir = "out";

  void validate() const {
    auto check = [](const char* section, auto&& fn) {
      try {
        fn();
      } catch (const std::exception& e) {
        throw ConfigError(section, e.what());
      }
    };
    check("[scenario]", [&] { scenario.validate(); });
    check("[radio]", [&] { radio.validate(); });
    check("[channel]", [&] { channel.validate(); });
    if (policies.empty()) throw ConfigError("[campaign] policies", "empty policy list");
    if (seeds.empty()) throw ConfigError("[campaign] seeds", "empty seed list");
    if (solver.outer_rounds < 1)
      throw ConfigError("[solver] outer_rounds", "must be at least 1");
    if (solver.dual.max_iterations < 1)
      throw ConfigError("[solver] max_iterations", "must be at least 1");
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline double parse_number(const std::string& field, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(field, "expected a number, got '" + value + "'");
  }
}

inline int parse_int(const std::string& field, const std::string& value) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing characters");
    return int(v);
  } catch (const std::exception&) {
    throw ConfigError(field, "expected an integer, got '" + value + "'");
  }
}

inline bool parse_on_off(const std::string& field, const std::string& value) {
  if (value == "on" || value == "true" || value == "1") return true;
  if (value == "off" || value == "false" || value == "0") return false;
  throw ConfigError(field, "expected on|off, got '" + value + "'");
}

inline std::vector<std::string> split_list(const std::string& text) {
  // Comma-separated with nesting-aware splitting so policy arguments like
  // fixed_epsilon(0.25) survive.
  std::vector<std::string> out;
  std::string cur;
  int depth = 0;
  for (char c : text) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == ',' && depth == 0) {
      if (!trim(cur).empty()) out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!trim(cur).empty()) out.push_back(trim(cur));
  return out;
}

}  // namespace detail

/// Parse the sectioned key-value campaign format. Unknown sections or keys are
/// rejected with their field path; values are type-checked.
inline CampaignConfig parse_campaign_config(std::istream& in) {
  using detail::parse_int;
  using detail::parse_number;
  using detail::parse_on_off;
  using detail::trim;

  CampaignConfig cfg;
  std::string section;
  std::string line;
  int line_no = 0;

  auto field = [&](const std::string& key) { return "[" + section + "] " + key; };

  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw ConfigError("line " + std::to_string(line_no), "malformed section header");
      section = trim(t.substr(1, t.size() - 2));
      if (section != "scenario" && section != "radio" && section != "channel" &&
          section != "solver" && section != "campaign")
        throw ConfigError("[" + section + "]", "unknown section");
      continue;
    }
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no), "expected 'key = value'");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (section.empty())
      throw ConfigError(key, "key appears before any [section]");

    if (section == "scenario") {
      if (key == "area_side_km") cfg.scenario.area_side_km = parse_number(field(key), value);
      else if (key == "inter_site_distance_m") cfg.scenario.inter_site_distance_m = parse_number(field(key), value);
      else if (key == "ue_density_per_km2") cfg.scenario.ue_density_per_km2 = parse_number(field(key), value);
      else if (key == "hotspot_bs_fraction") cfg.scenario.hotspot_bs_fraction = parse_number(field(key), value);
      else if (key == "hotspot_ue_fraction") cfg.scenario.hotspot_ue_fraction = parse_number(field(key), value);
      else if (key == "hotspot_radius_m") cfg.scenario.hotspot_radius_m = parse_number(field(key), value);
      else if (key == "satellite_altitude_km") cfg.scenario.satellite_altitude_km = parse_number(field(key), value);
      else if (key == "satellite_elevation_deg") cfg.scenario.satellite_elevation_deg = parse_number(field(key), value);
      else if (key == "hex_rings") cfg.scenario.hex_rings = parse_int(field(key), value);
      else throw ConfigError(field(key), "unknown key");
    } else if (section == "radio") {
      if (key == "total_bandwidth_hz") cfg.radio.total_bandwidth_hz = parse_number(field(key), value);
      else if (key == "subcarrier_spacing_hz") cfg.radio.subcarrier_spacing_hz = parse_number(field(key), value);
      else if (key == "noise_density_dbm_per_hz") cfg.radio.noise_density_dbm_per_hz = parse_number(field(key), value);
      else if (key == "coverage_threshold_dbm") cfg.radio.coverage_threshold_dbm = parse_number(field(key), value);
      else if (key == "tn_max_power_per_re_dbm") cfg.radio.tn_max_power_per_re_dbm = parse_number(field(key), value);
      else if (key == "ntn_max_power_per_re_dbm") cfg.radio.ntn_max_power_per_re_dbm = parse_number(field(key), value);
      else throw ConfigError(field(key), "unknown key");
    } else if (section == "channel") {
      if (key == "carrier_freq_ghz") cfg.channel.carrier_freq_ghz = parse_number(field(key), value);
      else if (key == "tn_los_exponent") cfg.channel.tn_pathloss.los_exponent = parse_number(field(key), value);
      else if (key == "tn_nlos_exponent") cfg.channel.tn_pathloss.nlos_exponent = parse_number(field(key), value);
      else if (key == "tn_los_intercept_db") cfg.channel.tn_pathloss.los_intercept_db = parse_number(field(key), value);
      else if (key == "tn_nlos_intercept_db") cfg.channel.tn_pathloss.nlos_intercept_db = parse_number(field(key), value);
      else if (key == "tn_shadow_sigma_los_db") cfg.channel.tn_shadow_sigma_los_db = parse_number(field(key), value);
      else if (key == "tn_shadow_sigma_nlos_db") cfg.channel.tn_shadow_sigma_nlos_db = parse_number(field(key), value);
      else if (key == "ntn_shadow_sigma_los_db") cfg.channel.ntn_shadow_sigma_los_db = parse_number(field(key), value);
      else if (key == "ntn_shadow_sigma_nlos_db") cfg.channel.ntn_shadow_sigma_nlos_db = parse_number(field(key), value);
      else if (key == "clutter_loss_db") cfg.channel.clutter_loss_db = parse_number(field(key), value);
      else if (key == "scintillation_loss_db") cfg.channel.scintillation_loss_db = parse_number(field(key), value);
      else if (key == "tn_antenna_gain_dbi") cfg.channel.tn_antenna_gain_dbi = parse_number(field(key), value);
      else if (key == "ntn_antenna_gain_dbi") cfg.channel.ntn_antenna_gain_dbi = parse_number(field(key), value);
      else if (key == "tn_los_offset_m") cfg.channel.tn_los_offset_m = parse_number(field(key), value);
      else if (key == "tn_los_scale_m") cfg.channel.tn_los_scale_m = parse_number(field(key), value);
      else if (key == "ntn_los_amplitude") cfg.channel.ntn_los_amplitude = parse_number(field(key), value);
      else if (key == "ntn_los_scale_deg") cfg.channel.ntn_los_scale_deg = parse_number(field(key), value);
      else if (key == "reference_distance_m") cfg.channel.reference_distance_m = parse_number(field(key), value);
      else throw ConfigError(field(key), "unknown key");
    } else if (section == "solver") {
      auto& dual = cfg.solver.dual;
      auto& power = cfg.solver.power;
      if (key == "max_iterations") dual.max_iterations = parse_int(field(key), value);
      else if (key == "slt_window") dual.slt_window = parse_int(field(key), value);
      else if (key == "slt_rel_tol") dual.slt_rel_tol = parse_number(field(key), value);
      else if (key == "delta1") dual.delta1 = parse_number(field(key), value);
      else if (key == "delta2") dual.delta2 = parse_number(field(key), value);
      else if (key == "delta3") dual.delta3 = parse_number(field(key), value);
      else if (key == "delta4") dual.delta4 = parse_number(field(key), value);
      else if (key == "epsilon_min") dual.epsilon_min = parse_number(field(key), value);
      else if (key == "rho_update") {
        if (value == "proportional") dual.rho_update = RhoUpdate::kProportional;
        else if (value == "slackness") dual.rho_update = RhoUpdate::kSlackness;
        else throw ConfigError(field(key), "expected proportional|slackness");
      } else if (key == "lambda_update") {
        if (value == "descent") dual.lambda_update = LambdaUpdate::kDescent;
        else if (value == "ascent") dual.lambda_update = LambdaUpdate::kAscent;
        else throw ConfigError(field(key), "expected descent|ascent");
      } else if (key == "lambda_residual_units") {
        if (value == "db") dual.lambda_units = LambdaResidualUnits::kDecibel;
        else if (value == "linear") dual.lambda_units = LambdaResidualUnits::kLinear;
        else throw ConfigError(field(key), "expected db|linear");
      } else if (key == "objective_variant") {
        if (value == "split_weighted") dual.objective = ObjectiveVariant::kSplitWeighted;
        else if (value == "bandwidth_only") dual.objective = ObjectiveVariant::kBandwidthOnly;
        else throw ConfigError(field(key), "expected split_weighted|bandwidth_only");
      }
      else if (key == "outer_rounds") cfg.solver.outer_rounds = parse_int(field(key), value);
      else if (key == "outer_rel_tol") cfg.solver.outer_rel_tol = parse_number(field(key), value);
      else if (key == "power_max_iterations") power.max_iterations = parse_int(field(key), value);
      else if (key == "power_slt_rel_tol") power.slt_rel_tol = parse_number(field(key), value);
      else if (key == "delta5") power.delta5 = parse_number(field(key), value);
      else if (key == "line_search") power.line_search = parse_on_off(field(key), value);
      else if (key == "benchmark_tn_bandwidth_hz") cfg.solver.benchmark_tn_bandwidth_hz = parse_number(field(key), value);
      else if (key == "threegpp_sat_bandwidth_hz") cfg.solver.threegpp_sat_bandwidth_hz = parse_number(field(key), value);
      else throw ConfigError(field(key), "unknown key");
    } else if (section == "campaign") {
      if (key == "policies") {
        cfg.policies.clear();
        for (const std::string& p : detail::split_list(value)) {
          try {
            cfg.policies.push_back(Policy::parse(p));
          } catch (const std::exception& e) {
            throw ConfigError(field(key), e.what());
          }
        }
      } else if (key == "seeds") {
        cfg.seeds.clear();
        for (const std::string& s : detail::split_list(value))
          cfg.seeds.push_back(std::uint64_t(parse_int(field(key), s)));
      } else if (key == "output_dir") {
        cfg.output_dir = value;
      } else {
        throw ConfigError(field(key), "unknown key");
      }
    }
  }

  cfg.validate();
  return cfg;
}

inline CampaignConfig parse_campaign_config(const std::string& text) {
  std::istringstream iss(text);
  return parse_campaign_config(iss);
}

/// Load a config file. Unreadable files are I/O errors (std::runtime_error),
/// malformed content is a ConfigError.
inline CampaignConfig load_campaign_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file: " + path);
  return parse_campaign_config(in);
}

}  // namespace ntnopt
