#include "locsme/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <sstream>

namespace locsme {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) parts.push_back(trim(item));
  if (!text.empty() && text.back() == sep) parts.emplace_back();
  return parts;
}

double to_double(const std::string& key, const std::string& text) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (text.empty() || ec != std::errc{} || ptr != end || !std::isfinite(value)) {
    throw ConfigError(key, "expected a finite number, got '" + text + "'");
  }
  return value;
}

long long to_integer(const std::string& key, const std::string& text) {
  long long value = 0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (text.empty() || ec != std::errc{} || ptr != end) {
    throw ConfigError(key, "expected an integer, got '" + text + "'");
  }
  return value;
}

int to_int(const std::string& key, const std::string& text) {
  const long long value = to_integer(key, text);
  if (value < -1000000000LL || value > 1000000000LL) throw ConfigError(key, "integer out of range");
  return static_cast<int>(value);
}

template <class T, class F>
std::vector<T> to_list(const std::string& key, const std::string& text, F convert) {
  std::vector<T> out;
  if (trim(text).empty()) return out;
  for (const std::string& part : split(text, ',')) {
    if (part.empty()) throw ConfigError(key, "empty list element");
    out.push_back(convert(key, part));
  }
  return out;
}

std::map<double, double> to_snr_map(const std::string& key, const std::string& text) {
  std::map<double, double> out;
  if (trim(text).empty()) return out;
  for (const std::string& part : split(text, ',')) {
    const auto colon = part.find(':');
    if (colon == std::string::npos) throw ConfigError(key, "expected snr:value pairs, got '" + part + "'");
    out[to_double(key, trim(part.substr(0, colon)))] = to_double(key, trim(part.substr(colon + 1)));
  }
  return out;
}

template <class F>
auto wrap(const std::string& key, F&& parse) {
  try {
    return parse();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(key, e.what());
  }
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value)>;

const std::vector<std::pair<std::string, Setter>>& setters() {
  static const std::vector<std::pair<std::string, Setter>> table = {
      {"m", [](RunConfig& c, const auto& k, const auto& v) { c.scenario.geometry.num_sensors = to_int(k, v); }},
      {"spacing", [](RunConfig& c, const auto& k, const auto& v) { c.scenario.geometry.spacing = to_double(k, v); }},
      {"desired_doa", [](RunConfig& c, const auto& k, const auto& v) { c.scenario.desired_doa_deg = to_double(k, v); }},
      {"interferer_doas",
       [](RunConfig& c, const auto& k, const auto& v) { c.scenario.interferer_doas_deg = to_list<double>(k, v, to_double); }},
      {"snr_db", [](RunConfig& c, const auto& k, const auto& v) { c.scenario.snr_db = to_double(k, v); }},
      {"sir_db", [](RunConfig& c, const auto& k, const auto& v) { c.scenario.sir_db = to_double(k, v); }},
      {"noise_power", [](RunConfig& c, const auto& k, const auto& v) { c.scenario.noise_power = to_double(k, v); }},
      {"mismatch",
       [](RunConfig& c, const auto& k, const auto& v) {
         c.scenario.mismatch.kind = wrap(k, [&] { return parse_mismatch_kind(v); });
       }},
      {"scatter_paths", [](RunConfig& c, const auto& k, const auto& v) { c.scenario.mismatch.num_paths = to_int(k, v); }},
      {"scatter_angle_mean",
       [](RunConfig& c, const auto& k, const auto& v) { c.scenario.mismatch.angle_mean_deg = to_double(k, v); }},
      {"scatter_angle_std",
       [](RunConfig& c, const auto& k, const auto& v) { c.scenario.mismatch.angle_std_deg = to_double(k, v); }},
      {"scatter_angle_law",
       [](RunConfig& c, const auto& k, const auto& v) {
         if (v == "uniform") {
           c.scenario.mismatch.angle_law = AngleLaw::Uniform;
         } else if (v == "gaussian") {
           c.scenario.mismatch.angle_law = AngleLaw::Gaussian;
         } else {
           throw ConfigError(k, "expected 'uniform' or 'gaussian', got '" + v + "'");
         }
       }},
      {"sector_halfwidth",
       [](RunConfig& c, const auto& k, const auto& v) { c.scenario.sector_halfwidth_deg = to_double(k, v); }},
      {"snapshots", [](RunConfig& c, const auto& k, const auto& v) { c.scenario.num_snapshots = to_int(k, v); }},
      {"seed",
       [](RunConfig& c, const auto& k, const auto& v) {
         const long long s = to_integer(k, v);
         if (s < 0) throw ConfigError(k, "seed must be >= 0");
         c.scenario.seed = static_cast<std::uint64_t>(s);
       }},
      {"algorithms",
       [](RunConfig& c, const auto& k, const auto& v) {
         c.algorithms = to_list<Algorithm>(k, v, [](const std::string& key, const std::string& name) {
           return wrap(key, [&] { return parse_algorithm(name); });
         });
       }},
      {"lambda", [](RunConfig& c, const auto& k, const auto& v) { c.beamformer.forgetting = to_double(k, v); }},
      {"eta", [](RunConfig& c, const auto& k, const auto& v) { c.beamformer.eta = to_double(k, v); }},
      {"subspace_rank", [](RunConfig& c, const auto& k, const auto& v) { c.beamformer.subspace_rank = to_int(k, v); }},
      {"loading", [](RunConfig& c, const auto& k, const auto& v) { c.beamformer.loading = to_double(k, v); }},
      {"smi_loading", [](RunConfig& c, const auto& k, const auto& v) { c.beamformer.smi_loading = to_double(k, v); }},
      {"grid_points", [](RunConfig& c, const auto& k, const auto& v) { c.beamformer.grid_points = to_int(k, v); }},
      {"steering_mode",
       [](RunConfig& c, const auto& k, const auto& v) {
         c.beamformer.steering_mode = wrap(k, [&] { return parse_steering_mode(v); });
       }},
      {"cg_recursion",
       [](RunConfig& c, const auto& k, const auto& v) {
         c.beamformer.cg_recursion = wrap(k, [&] { return parse_cg_recursion(v); });
       }},
      {"trials", [](RunConfig& c, const auto& k, const auto& v) { c.num_trials = to_int(k, v); }},
      {"threads", [](RunConfig& c, const auto& k, const auto& v) { c.threads = to_int(k, v); }},
      {"output", [](RunConfig& c, const auto&, const auto& v) { c.output = v; }},
      {"snr_grid",
       [](RunConfig& c, const auto& k, const auto& v) {
         const auto parts = split(v, ':');
         if (parts.size() != 3) throw ConfigError(k, "expected start:stop:step, got '" + v + "'");
         c.snr_grid = {to_double(k, parts[0]), to_double(k, parts[1]), to_double(k, parts[2])};
       }},
      {"snapshot_indices",
       [](RunConfig& c, const auto& k, const auto& v) { c.snapshot_indices = to_list<int>(k, v, to_int); }},
      {"flops_m", [](RunConfig& c, const auto& k, const auto& v) { c.flops_m = to_list<int>(k, v, to_int); }},
      {"eta_by_snr", [](RunConfig& c, const auto& k, const auto& v) { c.eta_by_snr = to_snr_map(k, v); }},
      {"lambda_by_snr", [](RunConfig& c, const auto& k, const auto& v) { c.lambda_by_snr = to_snr_map(k, v); }},
  };
  return table;
}

}  // namespace

std::vector<double> SnrGrid::points() const {
  std::vector<double> out;
  const auto count = static_cast<long>(std::floor((stop - start) / step + 1e-9)) + 1;
  for (long k = 0; k < count; ++k) out.push_back(start + static_cast<double>(k) * step);
  return out;
}

RunConfig::RunConfig() { scenario.mismatch = MismatchModel::coherent(); }

void RunConfig::validate() const {
  const auto check = [](const char* key, auto&& fn) {
    try {
      fn();
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(key, e.what());
    }
  };
  if (scenario.geometry.num_sensors < 2) throw ConfigError("m", "constraint violated: M >= 2");
  check("scenario", [&] { scenario.validate(); });
  check("beamformer", [&] { beamformer.validate(scenario.num_sensors()); });
  if (algorithms.empty()) throw ConfigError("algorithms", "at least one algorithm is required");
  if (num_trials < 1) throw ConfigError("trials", "constraint violated: trials >= 1");
  if (threads < 0) throw ConfigError("threads", "constraint violated: threads >= 0");
  if (!(snr_grid.step > 0.0)) throw ConfigError("snr_grid", "constraint violated: step > 0");
  if (snr_grid.stop < snr_grid.start) throw ConfigError("snr_grid", "constraint violated: start <= stop");
  if (snapshot_indices.empty()) throw ConfigError("snapshot_indices", "at least one index is required");
  int previous = 0;
  for (int idx : snapshot_indices) {
    if (idx < 1) throw ConfigError("snapshot_indices", "indices are 1-based");
    if (idx <= previous) throw ConfigError("snapshot_indices", "indices must be strictly increasing");
    previous = idx;
  }
  if (flops_m.empty()) throw ConfigError("flops_m", "at least one M is required");
  for (int m : flops_m) {
    if (m < 1) throw ConfigError("flops_m", "constraint violated: M >= 1");
  }
  for (const auto& [snr, eta] : eta_by_snr) {
    if (!(eta >= 0.0 && eta <= 0.5)) throw ConfigError("eta_by_snr", "eta must lie in [0, 0.5]");
  }
  for (const auto& [snr, lambda] : lambda_by_snr) {
    if (!(lambda > 0.0 && lambda <= 1.0)) throw ConfigError("lambda_by_snr", "lambda must lie in (0, 1]");
  }
}

BeamformerConfig RunConfig::beamformer_at_snr(double snr_db) const {
  BeamformerConfig out = beamformer;
  const auto lookup = [snr_db](const std::map<double, double>& table) -> std::optional<double> {
    for (const auto& [key, value] : table) {
      if (std::abs(key - snr_db) < 1e-9) return value;
    }
    return std::nullopt;
  };
  if (auto eta = lookup(eta_by_snr)) out.eta = *eta;
  if (auto lambda = lookup(lambda_by_snr)) out.forgetting = *lambda;
  return out;
}

KeyValues read_key_values(std::istream& in, const std::string& source) {
  KeyValues out;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string text = trim(line);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("", source + ":" + std::to_string(number) + ": expected 'key = value'");
    }
    std::string key = trim(text.substr(0, eq));
    if (key.empty()) throw ConfigError("", source + ":" + std::to_string(number) + ": missing key");
    for (const auto& [seen, unused] : out) {
      if (seen == key) throw ConfigError(key, "duplicate key at " + source + ":" + std::to_string(number));
    }
    out.emplace_back(std::move(key), trim(text.substr(eq + 1)));
  }
  return out;
}

void apply_settings(RunConfig& config, const KeyValues& settings) {
  const auto& table = setters();
  for (const auto& [key, value] : settings) {
    const auto it = std::find_if(table.begin(), table.end(), [&](const auto& entry) { return entry.first == key; });
    if (it == table.end()) throw ConfigError(key, "unknown key");
    it->second(config, key, value);
  }
}

namespace {

bool mentions(const KeyValues& settings, const std::string& key) {
  return std::any_of(settings.begin(), settings.end(), [&](const auto& kv) { return kv.first == key; });
}

}  // namespace

RunConfig parse_config(std::istream& in, const KeyValues& overrides) {
  const KeyValues file = read_key_values(in);
  RunConfig config;
  apply_settings(config, file);
  apply_settings(config, overrides);
  // eta defaults by scattering model unless set explicitly.
  if (!mentions(file, "eta") && !mentions(overrides, "eta")) {
    config.beamformer.eta = config.scenario.mismatch.kind == MismatchModel::Kind::Incoherent ? 0.3 : 0.2;
  }
  config.validate();
  return config;
}

RunConfig parse_config_file(const std::string& path, const KeyValues& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file '" + path + "'");
  return parse_config(in, overrides);
}

RunConfig parse_config_string(const std::string& text, const KeyValues& overrides) {
  std::istringstream in(text);
  return parse_config(in, overrides);
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> out;
    for (const auto& entry : setters()) out.push_back(entry.first);
    return out;
  }();
  return keys;
}

}  // namespace locsme
