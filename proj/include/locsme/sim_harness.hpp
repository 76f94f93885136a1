#pragma once

#include "locsme/array_model.hpp"
#include "locsme/beamformers.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace locsme {

/// 10 log10(sigma_1^2 |w^H a1|^2 / (w^H R w))
double output_sinr_db(const ComplexVec& weights, const ComplexVec& desired_steering, const ComplexMat& inc,
                      double desired_power);

/// 10 log10(sigma_1^2 a1^H R^-1 a1), the MVDR upper bound.
double optimal_sinr_db(const ComplexVec& desired_steering, const ComplexMat& inc, double desired_power);

/// |a^H b| / (||a|| ||b||)
double steering_cosine(const ComplexVec& estimate, const ComplexVec& truth);

struct SnapshotRecord {
  double sinr_db = 0.0;
  double optimal_sinr_db = 0.0;
  double steering_cosine = 0.0;
  double weight_norm = 0.0;
  std::uint32_t flags = 0;
  double rho = 0.0;                 // shrinkage coefficient (0 for SMI)
  double convexity_residual = 0.0;  // || d - l - rho (nu 1 - l) ||
  double scv_norm = 0.0;            // || l ||
  double bound_ratio = 0.0;         // NaN when undefined
  bool state_finite = true;
};

struct TrialTrace {
  Algorithm algorithm = Algorithm::Smi;
  std::uint64_t seed = 0;
  std::vector<SnapshotRecord> snapshots;

  std::size_t size() const { return snapshots.size(); }
};

/// Counter-based seed split (splitmix64 of base + index).
std::uint64_t trial_seed(std::uint64_t base_seed, std::uint64_t trial_index);

/// Runs every algorithm on the same snapshot stream.
std::vector<TrialTrace> run_trials(const Scenario& scenario, std::span<const Algorithm> algorithms,
                                   const BeamformerConfig& config, std::uint64_t seed);

TrialTrace run_trial(const Scenario& scenario, Algorithm algorithm, const BeamformerConfig& config,
                     std::uint64_t seed);

struct AlgorithmCurve {
  Algorithm algorithm = Algorithm::Smi;
  std::vector<double> mean_sinr_db;
  std::vector<double> mean_optimal_sinr_db;
  std::vector<double> mean_steering_cosine;
  std::vector<int> trials;
  double mean_bound_ratio = 0.0;  // NaN when never defined
  int bound_samples = 0;
};

struct TrialFailure {
  int trial = 0;
  std::uint64_t seed = 0;
  Algorithm algorithm = Algorithm::Smi;
  std::string message;
};

struct ExperimentResult {
  Scenario scenario;
  BeamformerConfig config;
  int num_trials = 0;
  std::vector<AlgorithmCurve> curves;
  std::vector<TrialFailure> failures;
  // traces[trial][k] follows the order of `curves`; empty unless requested.
  std::vector<std::vector<TrialTrace>> traces;

  const AlgorithmCurve& curve(Algorithm algorithm) const;
  double failure_fraction() const;
};

struct MonteCarloOptions {
  int num_trials = 100;
  int threads = 0;  // 0: default_thread_count()
  bool keep_traces = false;
};

/// Thread count from LOCSME_THREADS, 1 when unset or invalid.
int default_thread_count();

/// Independent-seeded trials (seed = trial_seed(scenario.seed, k)) averaged per
/// snapshot. Aggregation order is fixed by trial index.
ExperimentResult monte_carlo(const Scenario& scenario, std::span<const Algorithm> algorithms,
                             const BeamformerConfig& config, const MonteCarloOptions& options);

/// Analytic per-snapshot flop formulas of the compared beamformers.
std::int64_t flop_count(std::string_view algorithm_name, std::int64_t num_sensors);
std::span<const std::string_view> flop_model_names();

}  // namespace locsme
