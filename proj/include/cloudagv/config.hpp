#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "cloudagv/sim.hpp"

namespace cloudagv {

/// Malformed document or schema violation (unknown key, wrong type, bad value).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// The config file does not exist or cannot be read.
class ConfigFileError : public std::runtime_error {
 public:
  explicit ConfigFileError(const std::string& what) : std::runtime_error(what) {}
};

struct OutputSettings {
  std::string dir = "out";
  bool plots = true;
};

struct ExperimentConfig {
  std::string name = "experiment";
  SimConfig sim;
  OutputSettings output;
};

/// Parses and validates a YAML experiment document. Unknown keys are errors.
[[nodiscard]] ExperimentConfig parse_config(std::string_view yaml_text);

[[nodiscard]] ExperimentConfig load_config_file(const std::filesystem::path& path);

/// Fully resolved config as YAML; parse_config(dump_config(c)) reproduces c.
[[nodiscard]] std::string dump_config(const ExperimentConfig& config);

}  // namespace cloudagv
