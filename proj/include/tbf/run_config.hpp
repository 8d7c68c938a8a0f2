#pragma once

// Flat `key = value` run configuration. '#' starts a comment. Every key has
// a documented default; unknown or repeated keys are rejected. Seeds are
// always explicit, nothing is drawn from the clock or the environment.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tbf/interferometer.hpp"
#include "tbf/pipeline.hpp"

namespace tbf {

class ConfigError : public DomainError {
 public:
  using DomainError::DomainError;
};

class RunConfig {
 public:
  RunConfig();  // all defaults

  static RunConfig parse(const std::string& text);
  static RunConfig load(const std::string& path);

  /// Override one key; unknown keys throw ConfigError.
  void set(const std::string& key, const std::string& value);
  bool has_key(const std::string& key) const;

  std::string get_string(const std::string& key) const;
  double get_double(const std::string& key) const;
  std::uint64_t get_uint(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::vector<std::size_t> get_uint_list(const std::string& key) const;

  /// Keys in sorted order with their current values.
  const std::map<std::string, std::string>& values() const { return values_; }

  static const std::map<std::string, std::string>& defaults();

 private:
  std::map<std::string, std::string> values_;
};

DeviceConfig device_config(const RunConfig& cfg);
NoiseSpec noise_spec(const RunConfig& cfg);

}  // namespace tbf
