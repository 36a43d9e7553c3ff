#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mtjsnn/macrospin.hpp"
#include "mtjsnn/network.hpp"
#include "mtjsnn/trainer.hpp"
#include "mtjsnn/xor_bench.hpp"

namespace mtjsnn {

inline constexpr int kSchemaVersion = 1;

// Malformed or invalid configuration. The message names the offending line
// (syntax errors) or key path (everything else).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SweepConfig {
  std::string backend = "tlr";  // tlr | macrospin | calibrated
  std::vector<double> drives;   // drive units (tlr) or gate volts
  TlrParams tlr;
  MacrospinParams macrospin;
  LatencyProbe probe;
  // Gate voltages used by the calibrated backend; defaults to `drives`.
  std::vector<double> calibration_grid;
};

struct ConfigDocument {
  int schema_version = kSchemaVersion;
  SimConfig sim;
  std::optional<Network> network;
  std::optional<std::string> output;  // neuron trained by `train`
  std::vector<Sample> dataset;
  TrainConfig train;
  std::optional<XorArch> xor_arch;
  std::optional<SweepConfig> sweep;
};

ConfigDocument parse_config(const std::string& text, const std::string& origin = "config");
ConfigDocument load_config(const std::filesystem::path& path);

// "start:stop:count" (inclusive, evenly spaced) or a comma-separated list.
std::vector<double> parse_grid(const std::string& text);

}  // namespace mtjsnn
