#include "tbf/run_config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace tbf {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

const std::map<std::string, std::string>& RunConfig::defaults() {
  static const std::map<std::string, std::string> d = {
      // device
      {"dim", "2"},
      {"fiber_modes", "0"},  // 0: same as dim
      {"spacing_ps", "160"},
      {"delay_span_ps", "0"},  // 0: (fiber_modes - 1) * spacing
      {"mixing_strength", "1"},
      {"fiber_seed", "1"},
      {"center_wavelength_nm", "1550"},
      {"time_resolution_ps", "5"},
      {"freq_samples", "1024"},
      {"min_sep_ps", "0"},  // 0: half the spacing
      {"window_ps", "0"},   // 0: half the spacing
      {"stop_fraction", "0.05"},
      {"pulse_fwhm_ps", "30"},
      // noise
      {"franson_phase_std_rad", "0"},
      {"jitter_fwhm_ps", "0"},
      {"mean_counts", "10000"},
      {"drift_std_rad", "0"},
      {"noise_seed", "0"},
      {"expectation", "false"},
      // experiments
      {"probe_phase_rad", "-1.5707963267948966"},
      {"theta_points", "64"},
      {"trials", "200"},
      {"target_index", "0"},
      {"table_dims", "2,4,11"},
      {"table_max_targets", "0"},  // 0: every non-computational MUB state
      {"threads", "0"},            // 0: hardware concurrency
      {"out", ""},
  };
  return d;
}

RunConfig::RunConfig() : values_(defaults()) {}

RunConfig RunConfig::parse(const std::string& text) {
  RunConfig cfg;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (!seen.insert(key).second)
      throw ConfigError("config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    cfg.set(key, trim(line.substr(eq + 1)));
  }
  return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse(ss.str());
}

bool RunConfig::has_key(const std::string& key) const { return values_.count(key) != 0; }

void RunConfig::set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  it->second = value;
}

std::string RunConfig::get_string(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  return it->second;
}

double RunConfig::get_double(const std::string& key) const {
  const std::string s = get_string(key);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ConfigError("config key '" + key + "': '" + s + "' is not a number");
  return v;
}

std::uint64_t RunConfig::get_uint(const std::string& key) const {
  const std::string s = get_string(key);
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ConfigError("config key '" + key + "': '" + s + "' is not a non-negative integer");
  return v;
}

bool RunConfig::get_bool(const std::string& key) const {
  const std::string s = get_string(key);
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw ConfigError("config key '" + key + "': expected true or false");
}

std::vector<std::size_t> RunConfig::get_uint_list(const std::string& key) const {
  const std::string s = get_string(key);
  std::vector<std::size_t> out;
  std::istringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    std::size_t v = 0;
    const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || res.ec != std::errc() || res.ptr != item.data() + item.size())
      throw ConfigError("config key '" + key + "': bad list entry '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("config key '" + key + "' is empty");
  return out;
}

DeviceConfig device_config(const RunConfig& cfg) {
  DeviceConfig d;
  d.dim = cfg.get_uint("dim");
  d.fiber_modes = cfg.get_uint("fiber_modes");
  d.spacing_s = cfg.get_double("spacing_ps") * 1e-12;
  d.delay_span_s = cfg.get_double("delay_span_ps") * 1e-12;
  d.mixing_strength = cfg.get_double("mixing_strength");
  d.fiber_seed = cfg.get_uint("fiber_seed");
  d.center_wavelength_m = cfg.get_double("center_wavelength_nm") * 1e-9;
  d.time_resolution_s = cfg.get_double("time_resolution_ps") * 1e-12;
  d.freq_samples = cfg.get_uint("freq_samples");
  d.min_sep_s = cfg.get_double("min_sep_ps") * 1e-12;
  d.window_s = cfg.get_double("window_ps") * 1e-12;
  d.stop_fraction = cfg.get_double("stop_fraction");
  d.pulse.fwhm_s = cfg.get_double("pulse_fwhm_ps") * 1e-12;
  if (!(d.spacing_s > 0.0)) throw ConfigError("spacing_ps must be positive");
  if (!(d.center_wavelength_m > 0.0)) throw ConfigError("center_wavelength_nm must be positive");
  if (d.freq_samples < 2) throw ConfigError("freq_samples must be at least 2");
  return d;
}

NoiseSpec noise_spec(const RunConfig& cfg) {
  NoiseSpec n;
  n.franson_phase_std_rad = cfg.get_double("franson_phase_std_rad");
  n.detector_jitter_fwhm_s = cfg.get_double("jitter_fwhm_ps") * 1e-12;
  n.mean_counts_per_setting = cfg.get_double("mean_counts");
  n.drift_std_per_probe_rad = cfg.get_double("drift_std_rad");
  n.rng_seed = cfg.get_uint("noise_seed");
  n.expectation = cfg.get_bool("expectation");
  n.validate();
  return n;
}

}  // namespace tbf
