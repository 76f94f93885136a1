#pragma once

#include "locsme/array_model.hpp"
#include "locsme/beamformers.hpp"

#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace locsme {

class ConfigError : public std::invalid_argument {
 public:
  ConfigError(const std::string& key, const std::string& message)
      : std::invalid_argument(key.empty() ? message : "config key '" + key + "': " + message), key_(key) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

struct SnrGrid {
  double start = -10.0;
  double stop = 30.0;
  double step = 5.0;

  std::vector<double> points() const;
};

struct RunConfig {
  Scenario scenario;
  std::vector<Algorithm> algorithms{Algorithm::Smi, Algorithm::Locsme, Algorithm::LocsmeCg};
  BeamformerConfig beamformer;
  int num_trials = 100;
  int threads = 0;  // 0: LOCSME_THREADS or 1
  std::string output;  // empty: stdout
  SnrGrid snr_grid;
  std::vector<int> snapshot_indices{10, 50, 100, 200, 300};
  std::vector<int> flops_m{12};
  // Per-SNR overrides used by sweep-snr, keyed by the grid value in dB.
  std::map<double, double> eta_by_snr;
  std::map<double, double> lambda_by_snr;

  RunConfig();
  void validate() const;
  BeamformerConfig beamformer_at_snr(double snr_db) const;
};

using KeyValues = std::vector<std::pair<std::string, std::string>>;

/// Reads `key = value` lines. `#` starts a comment; blank lines are ignored.
KeyValues read_key_values(std::istream& in, const std::string& source = "<config>");

/// Applies settings in order onto `config`; later entries win.
void apply_settings(RunConfig& config, const KeyValues& settings);

/// Defaults, then the file, then `overrides`, then validation.
RunConfig parse_config(std::istream& in, const KeyValues& overrides = {});
RunConfig parse_config_file(const std::string& path, const KeyValues& overrides = {});
RunConfig parse_config_string(const std::string& text, const KeyValues& overrides = {});

/// Recognised keys, in documentation order.
const std::vector<std::string>& config_keys();

}  // namespace locsme
