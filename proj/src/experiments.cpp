#include "locsme/experiments.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <ostream>

namespace locsme {

namespace {

constexpr double kQuorum = 0.10;

MonteCarloOptions options_for(const RunConfig& config) {
  MonteCarloOptions options;
  options.num_trials = config.num_trials;
  options.threads = config.threads;
  return options;
}

CsvRow point_row(const AlgorithmCurve& curve, std::size_t index, double label) {
  return {std::string(algorithm_name(curve.algorithm)), label, curve.mean_sinr_db[index],
          curve.mean_optimal_sinr_db[index], curve.mean_steering_cosine[index], curve.trials[index]};
}

int emit(const RunConfig& config, std::ostream& out, std::ostream& err,
         const std::function<std::vector<CsvRow>(const RunConfig&)>& produce) {
  std::vector<CsvRow> rows;
  try {
    rows = produce(config);
  } catch (const QuorumError& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  if (config.output.empty()) {
    write_csv(out, rows);
    return out ? 0 : 4;
  }
  std::ofstream file(config.output, std::ios::binary);
  if (!file) {
    err << "error: cannot open output file '" << config.output << "'\n";
    return 4;
  }
  write_csv(file, rows);
  file.close();
  if (!file) {
    err << "error: failed writing '" << config.output << "'\n";
    return 4;
  }
  return 0;
}

}  // namespace

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (value == 0.0) return "0";
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.6g", value);
  // snprintf honours LC_NUMERIC; force the separator in case a caller changed it.
  for (char* c = buffer; *c != '\0'; ++c) {
    if (*c == ',') *c = '.';
  }
  return buffer;
}

std::string format_row(const CsvRow& row) {
  std::string line = row.algorithm + ',' + format_number(row.snapshot_or_snr) + ',';
  if (row.exact_value && std::isfinite(row.mean_sinr_db)) {
    line += std::to_string(std::llround(row.mean_sinr_db));
  } else {
    line += format_number(row.mean_sinr_db);
  }
  for (double v : {row.optimal_sinr_db, row.steering_cosine}) {
    line += ',';
    line += format_number(v);
  }
  line += ',';
  line += std::to_string(row.trials);
  return line;
}

void write_csv(std::ostream& out, const std::vector<CsvRow>& rows) {
  out << kCsvHeader << '\n';
  for (const CsvRow& row : rows) out << format_row(row) << '\n';
  out.flush();
}

void check_quorum(const ExperimentResult& result, const std::string& context) {
  if (result.failure_fraction() > kQuorum) {
    std::string message = context + ": " + std::to_string(result.failures.size()) + " of " +
                          std::to_string(result.num_trials * static_cast<int>(result.curves.size())) +
                          " trial runs failed";
    if (!result.failures.empty()) {
      const TrialFailure& first = result.failures.front();
      message += " (first: trial " + std::to_string(first.trial) + ", " +
                 std::string(algorithm_name(first.algorithm)) + ": " + first.message + ")";
    }
    throw QuorumError(message);
  }
}

std::vector<CsvRow> run_rows(const RunConfig& config) {
  config.validate();
  const ExperimentResult result = monte_carlo(config.scenario, config.algorithms, config.beamformer, options_for(config));
  check_quorum(result, "run");
  std::vector<CsvRow> rows;
  for (const AlgorithmCurve& curve : result.curves) {
    for (std::size_t i = 0; i < curve.mean_sinr_db.size(); ++i) {
      rows.push_back(point_row(curve, i, static_cast<double>(i + 1)));
    }
  }
  return rows;
}

std::vector<CsvRow> sweep_snr_rows(const RunConfig& config) {
  config.validate();
  const std::vector<double> grid = config.snr_grid.points();
  std::vector<std::vector<CsvRow>> per_algorithm(config.algorithms.size());
  for (double snr : grid) {
    Scenario scenario = config.scenario;
    scenario.snr_db = snr;
    const ExperimentResult result =
        monte_carlo(scenario, config.algorithms, config.beamformer_at_snr(snr), options_for(config));
    check_quorum(result, "sweep-snr at " + format_number(snr) + " dB");
    for (std::size_t k = 0; k < result.curves.size(); ++k) {
      const AlgorithmCurve& curve = result.curves[k];
      per_algorithm[k].push_back(point_row(curve, curve.mean_sinr_db.size() - 1, snr));
    }
  }
  std::vector<CsvRow> rows;
  for (auto& block : per_algorithm) rows.insert(rows.end(), block.begin(), block.end());
  return rows;
}

std::vector<CsvRow> sweep_snapshot_rows(const RunConfig& config) {
  config.validate();
  if (config.snapshot_indices.back() > config.scenario.num_snapshots) {
    throw ConfigError("snapshot_indices", "index " + std::to_string(config.snapshot_indices.back()) +
                                              " exceeds snapshots = " + std::to_string(config.scenario.num_snapshots));
  }
  const ExperimentResult result = monte_carlo(config.scenario, config.algorithms, config.beamformer, options_for(config));
  check_quorum(result, "sweep-snapshots");
  std::vector<CsvRow> rows;
  for (const AlgorithmCurve& curve : result.curves) {
    for (int index : config.snapshot_indices) {
      rows.push_back(point_row(curve, static_cast<std::size_t>(index - 1), index));
    }
  }
  return rows;
}

std::vector<CsvRow> flops_rows(const RunConfig& config) {
  std::vector<CsvRow> rows;
  const double nan = std::nan("");
  for (std::string_view name : flop_model_names()) {
    for (int m : config.flops_m) {
      rows.push_back({std::string(name), static_cast<double>(m), static_cast<double>(flop_count(name, m)), nan, nan, 0, true});
    }
  }
  return rows;
}

int cmd_run(const RunConfig& config, std::ostream& out, std::ostream& err) { return emit(config, out, err, run_rows); }

int cmd_sweep_snr(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return emit(config, out, err, sweep_snr_rows);
}

int cmd_sweep_snapshots(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return emit(config, out, err, sweep_snapshot_rows);
}

int cmd_flops(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return emit(config, out, err, flops_rows);
}

}  // namespace locsme
