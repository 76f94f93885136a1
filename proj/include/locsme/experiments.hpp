#pragma once

#include "locsme/config.hpp"
#include "locsme/sim_harness.hpp"

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace locsme {

inline constexpr const char* kCsvHeader =
    "algorithm,snapshot_or_snr,mean_sinr_db,optimal_sinr_db,steering_cosine,trials";

struct CsvRow {
  std::string algorithm;
  double snapshot_or_snr = 0.0;
  double mean_sinr_db = 0.0;  // flop count for flops rows
  double optimal_sinr_db = 0.0;
  double steering_cosine = 0.0;
  int trials = 0;
  bool exact_value = false;  // print mean_sinr_db as an exact integer (flop counts)
};

/// 6 significant digits, "." separator, NaN as "nan", independent of locale.
std::string format_number(double value);
std::string format_row(const CsvRow& row);
void write_csv(std::ostream& out, const std::vector<CsvRow>& rows);

class QuorumError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Throws QuorumError when more than 10% of (trial, algorithm) runs failed.
void check_quorum(const ExperimentResult& result, const std::string& context);

std::vector<CsvRow> run_rows(const RunConfig& config);
std::vector<CsvRow> sweep_snr_rows(const RunConfig& config);
std::vector<CsvRow> sweep_snapshot_rows(const RunConfig& config);
std::vector<CsvRow> flops_rows(const RunConfig& config);

/// Subcommands: write CSV to config.output (or `out` when empty) and return an
/// exit status. Errors go to `err`.
int cmd_run(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_sweep_snr(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_sweep_snapshots(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_flops(const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace locsme
