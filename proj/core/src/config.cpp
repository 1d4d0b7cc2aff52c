#include "ascsense/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace ascsense {

using nlohmann::json;

namespace {

constexpr double kDeg = 180.0 / kPi;

void reject_unknown(const json& j, const std::string& section, const std::set<std::string>& known) {
  if (!j.is_object()) throw Error(Errc::format, "config: '" + section + "' must be an object");
  for (const auto& [k, v] : j.items())
    if (!known.count(k)) throw Error(Errc::format, "config: unknown key '" + section + "." + k + "'");
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& section) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(Errc::format, "config: bad value for '" + section + "." + key + "'");
  }
}

const char* law_name(OffsetLaw l) { return l == OffsetLaw::iid_uniform ? "iid_uniform" : "slow_drift"; }

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(Errc::format, std::string("config: ") + e.what());
  }
  reject_unknown(root, "<root>",
                 {"system", "array", "scenario", "processing", "calibration", "experiment"});
  ExperimentConfig c;

  if (root.contains("system")) {
    const json& s = root["system"];
    reject_unknown(s, "system", {"K", "delta_f", "T", "delta_t", "M", "carrier_freq", "cpi_limit"});
    read(s, "K", c.system.K, "system");
    read(s, "delta_f", c.system.delta_f, "system");
    read(s, "T", c.system.T, "system");
    read(s, "delta_t", c.system.delta_t, "system");
    read(s, "M", c.system.M, "system");
    read(s, "carrier_freq", c.system.carrier_freq, "system");
    read(s, "cpi_limit", c.system.cpi_limit, "system");
  }
  if (root.contains("array")) {
    const json& a = root["array"];
    reject_unknown(a, "array", {"spacing_wavelengths"});
    read(a, "spacing_wavelengths", c.array_spacing, "array");
  }
  if (root.contains("scenario")) {
    const json& s = root["scenario"];
    reject_unknown(s, "scenario",
                   {"n_static", "n_dynamic", "static_mean_range", "dynamic_range_min",
                    "dynamic_range_max", "max_speed", "static_aoa_span_deg", "dynamic_aoa_span_deg",
                    "min_power_range", "offset_law", "drift_to_std", "drift_po_std",
                    "fixed_dynamic_ranges", "fixed_dynamic_aoas_deg"});
    auto& sc = c.scenario;
    read(s, "n_static", sc.n_static, "scenario");
    read(s, "n_dynamic", sc.n_dynamic, "scenario");
    read(s, "static_mean_range", sc.static_mean_range, "scenario");
    read(s, "dynamic_range_min", sc.dynamic_range_min, "scenario");
    read(s, "dynamic_range_max", sc.dynamic_range_max, "scenario");
    read(s, "max_speed", sc.max_speed, "scenario");
    double span = sc.static_aoa_span * kDeg;
    read(s, "static_aoa_span_deg", span, "scenario");
    sc.static_aoa_span = span / kDeg;
    span = sc.dynamic_aoa_span * kDeg;
    read(s, "dynamic_aoa_span_deg", span, "scenario");
    sc.dynamic_aoa_span = span / kDeg;
    read(s, "min_power_range", sc.min_power_range, "scenario");
    std::string law = law_name(sc.offset_law);
    read(s, "offset_law", law, "scenario");
    if (law == "iid_uniform")
      sc.offset_law = OffsetLaw::iid_uniform;
    else if (law == "slow_drift")
      sc.offset_law = OffsetLaw::slow_drift;
    else
      throw Error(Errc::format, "config: offset_law must be iid_uniform or slow_drift");
    read(s, "drift_to_std", sc.drift_to_std, "scenario");
    read(s, "drift_po_std", sc.drift_po_std, "scenario");
    read(s, "fixed_dynamic_ranges", sc.fixed_dynamic_ranges, "scenario");
    std::vector<double> aoas;
    read(s, "fixed_dynamic_aoas_deg", aoas, "scenario");
    sc.fixed_dynamic_aoas.clear();
    for (double a : aoas) sc.fixed_dynamic_aoas.push_back(a / kDeg);
  }
  if (root.contains("processing")) {
    const json& p = root["processing"];
    reject_unknown(p, "processing",
                   {"window", "grid_size", "aoa_min_deg", "aoa_max_deg", "aoa_step_deg",
                    "peak_separation", "mdl_target_count", "delay_tolerance"});
    read(p, "window", c.align.window, "processing");
    read(p, "grid_size", c.align.grid_size, "processing");
    read(p, "aoa_min_deg", c.aoa_min_deg, "processing");
    read(p, "aoa_max_deg", c.aoa_max_deg, "processing");
    read(p, "aoa_step_deg", c.aoa_step_deg, "processing");
    read(p, "peak_separation", c.peak_separation, "processing");
    read(p, "mdl_target_count", c.mdl_target_count, "processing");
    read(p, "delay_tolerance", c.delay_tolerance, "processing");
  }
  if (root.contains("calibration")) {
    const json& k = root["calibration"];
    reject_unknown(k, "calibration",
                   {"T_s", "timestamp_noise_std", "clock_error_span", "clock_jitter", "search_range"});
    read(k, "T_s", c.calibration.T_s, "calibration");
    read(k, "timestamp_noise_std", c.calibration.timestamp_noise_std, "calibration");
    read(k, "clock_error_span", c.calibration.clock_error_span, "calibration");
    read(k, "clock_jitter", c.calibration.clock_jitter, "calibration");
    read(k, "search_range", c.calibration.search_range, "calibration");
  }
  if (root.contains("experiment")) {
    const json& e = root["experiment"];
    reject_unknown(e, "experiment",
                   {"snr_db", "dyn_prop", "tau_sep", "trials", "methods", "seed", "workers"});
    read(e, "snr_db", c.snr_db, "experiment");
    read(e, "dyn_prop", c.dyn_prop, "experiment");
    read(e, "tau_sep", c.tau_sep, "experiment");
    read(e, "trials", c.trials, "experiment");
    read(e, "seed", c.seed, "experiment");
    read(e, "workers", c.workers, "experiment");
    if (e.contains("methods")) {
      std::vector<std::string> names;
      read(e, "methods", names, "experiment");
      c.methods.clear();
      try {
        for (const auto& n : names) c.methods.push_back(parse_method(n));
      } catch (const Error& err) {
        throw Error(Errc::format, std::string("config: ") + err.what());
      }
    }
  }
  try {
    c.validate();
  } catch (const Error& err) {
    throw Error(Errc::format, std::string("config: ") + err.what());
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(Errc::io, path + ": cannot open config");
  std::stringstream ss;
  ss << f.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

std::string config_to_json(const ExperimentConfig& c) {
  json j;
  j["system"] = {{"K", c.system.K},           {"delta_f", c.system.delta_f},
                 {"T", c.system.T},           {"delta_t", c.system.delta_t},
                 {"M", c.system.M},           {"carrier_freq", c.system.carrier_freq},
                 {"cpi_limit", c.system.cpi_limit}};
  j["array"] = {{"spacing_wavelengths", c.array_spacing}};
  const auto& s = c.scenario;
  std::vector<double> aoas;
  for (double a : s.fixed_dynamic_aoas) aoas.push_back(a * kDeg);
  j["scenario"] = {{"n_static", s.n_static},
                   {"n_dynamic", s.n_dynamic},
                   {"static_mean_range", s.static_mean_range},
                   {"dynamic_range_min", s.dynamic_range_min},
                   {"dynamic_range_max", s.dynamic_range_max},
                   {"max_speed", s.max_speed},
                   {"static_aoa_span_deg", s.static_aoa_span * kDeg},
                   {"dynamic_aoa_span_deg", s.dynamic_aoa_span * kDeg},
                   {"min_power_range", s.min_power_range},
                   {"offset_law", law_name(s.offset_law)},
                   {"drift_to_std", s.drift_to_std},
                   {"drift_po_std", s.drift_po_std},
                   {"fixed_dynamic_ranges", s.fixed_dynamic_ranges},
                   {"fixed_dynamic_aoas_deg", aoas}};
  j["processing"] = {{"window", c.align.window},
                     {"grid_size", c.align.grid_size},
                     {"aoa_min_deg", c.aoa_min_deg},
                     {"aoa_max_deg", c.aoa_max_deg},
                     {"aoa_step_deg", c.aoa_step_deg},
                     {"peak_separation", c.peak_separation},
                     {"mdl_target_count", c.mdl_target_count},
                     {"delay_tolerance", c.delay_tolerance}};
  j["calibration"] = {{"T_s", c.calibration.T_s},
                      {"timestamp_noise_std", c.calibration.timestamp_noise_std},
                      {"clock_error_span", c.calibration.clock_error_span},
                      {"clock_jitter", c.calibration.clock_jitter},
                      {"search_range", c.calibration.search_range}};
  std::vector<std::string> methods;
  for (Method m : c.methods) methods.emplace_back(to_string(m));
  j["experiment"] = {{"snr_db", c.snr_db},   {"dyn_prop", c.dyn_prop}, {"tau_sep", c.tau_sep},
                     {"trials", c.trials},   {"methods", methods},     {"seed", c.seed},
                     {"workers", c.workers}};
  return j.dump(2) + "\n";
}

void save_config(const std::string& path, const ExperimentConfig& cfg) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw Error(Errc::io, path + ": cannot open for writing");
  f << config_to_json(cfg);
  if (!f) throw Error(Errc::io, path + ": write failed");
}

}  // namespace ascsense
