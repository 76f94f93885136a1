#include "locsme/sim_harness.hpp"

#include <array>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <stdexcept>
#include <thread>

namespace locsme {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

constexpr std::array<std::string_view, 6> kFlopModels = {"LOCSME", "LOCSME-SG", "SQP", "LOCME", "LCWC", "LOCSME-CG"};

}  // namespace

double output_sinr_db(const ComplexVec& weights, const ComplexVec& desired_steering, const ComplexMat& inc,
                      double desired_power) {
  if (weights.squaredNorm() == 0.0) {
    throw std::invalid_argument("output_sinr: zero weight vector");
  }
  const double denominator = weights.dot(inc * weights).real();
  if (!(denominator > 0.0)) {
    throw std::domain_error("output_sinr: non-positive output interference-plus-noise power");
  }
  const double numerator = desired_power * std::norm(weights.dot(desired_steering));
  return 10.0 * std::log10(numerator / denominator);
}

double optimal_sinr_db(const ComplexVec& desired_steering, const ComplexMat& inc, double desired_power) {
  Eigen::LLT<ComplexMat> llt(inc);
  if (llt.info() != Eigen::Success) {
    throw std::domain_error("optimal_sinr: covariance is not positive definite");
  }
  const double quad = desired_steering.dot(llt.solve(desired_steering)).real();
  return 10.0 * std::log10(desired_power * quad);
}

double steering_cosine(const ComplexVec& estimate, const ComplexVec& truth) {
  const double scale = estimate.norm() * truth.norm();
  return scale > 0.0 ? std::abs(estimate.dot(truth)) / scale : 0.0;
}

std::uint64_t trial_seed(std::uint64_t base_seed, std::uint64_t trial_index) {
  std::uint64_t z = base_seed + (trial_index + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::vector<TrialTrace> run_trials(const Scenario& scenario, std::span<const Algorithm> algorithms,
                                   const BeamformerConfig& config, std::uint64_t seed) {
  scenario.validate();
  config.validate(scenario.num_sensors());
  const SectorProjector projector = build_projector(scenario, config.subspace_rank, config.grid_points);
  const ComplexMat inc = true_inc_matrix(scenario);
  const double desired_power = scenario.desired_power();

  std::vector<std::unique_ptr<Beamformer>> machines;
  std::vector<TrialTrace> traces;
  for (Algorithm algorithm : algorithms) {
    machines.push_back(make_beamformer(algorithm, scenario, config, projector));
    TrialTrace trace;
    trace.algorithm = algorithm;
    trace.seed = seed;
    trace.snapshots.reserve(static_cast<std::size_t>(scenario.num_snapshots));
    traces.push_back(std::move(trace));
  }

  SnapshotSource source(scenario, seed);
  const bool fixed_signature = !source.signature().time_varying();
  double optimal = fixed_signature ? optimal_sinr_db(source.signature().current(), inc, desired_power) : 0.0;

  for (int i = 0; i < scenario.num_snapshots; ++i) {
    const Snapshot& snap = source.next();
    if (!fixed_signature) {
      optimal = optimal_sinr_db(snap.steering, inc, desired_power);
    }
    for (std::size_t k = 0; k < machines.size(); ++k) {
      Beamformer& bf = *machines[k];
      const ComplexVec& w = bf.step(snap.x);
      SnapshotRecord rec;
      rec.sinr_db = output_sinr_db(w, snap.steering, inc, desired_power);
      rec.optimal_sinr_db = optimal;
      rec.steering_cosine = steering_cosine(bf.steering(), snap.steering);
      rec.weight_norm = w.norm();
      rec.flags = bf.flags();
      if (const ShrinkageState* shrink = bf.shrinkage()) {
        rec.rho = shrink->rho();
        rec.convexity_residual = shrink->convexity_residual();
        rec.scv_norm = shrink->scv().norm();
      }
      rec.bound_ratio = kNaN;
      if (const auto* cg = dynamic_cast<const CgBeamformer*>(&bf)) {
        if (cg->bound_ratio_v()) rec.bound_ratio = *cg->bound_ratio_v();
      }
      rec.state_finite = bf.state_finite();
      traces[k].snapshots.push_back(rec);
    }
  }
  return traces;
}

TrialTrace run_trial(const Scenario& scenario, Algorithm algorithm, const BeamformerConfig& config,
                     std::uint64_t seed) {
  const std::array<Algorithm, 1> one{algorithm};
  return std::move(run_trials(scenario, one, config, seed).front());
}

const AlgorithmCurve& ExperimentResult::curve(Algorithm algorithm) const {
  for (const AlgorithmCurve& c : curves) {
    if (c.algorithm == algorithm) return c;
  }
  throw std::out_of_range("experiment has no curve for " + std::string(algorithm_name(algorithm)));
}

double ExperimentResult::failure_fraction() const {
  const double total = static_cast<double>(num_trials) * static_cast<double>(curves.size());
  return total > 0.0 ? static_cast<double>(failures.size()) / total : 0.0;
}

int default_thread_count() {
  if (const char* env = std::getenv("LOCSME_THREADS")) {
    char* end = nullptr;
    const long value = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && value >= 1 && value <= 1024) {
      return static_cast<int>(value);
    }
  }
  return 1;
}

namespace {

// Runs one trial per algorithm independently so a failure only drops that
// algorithm's trace. Streams are seed-determined, so the result equals a
// joint run.
struct TrialOutcome {
  std::vector<TrialTrace> traces;
  std::vector<bool> ok;
  std::vector<std::string> errors;
};

TrialOutcome execute_trial(const Scenario& scenario, std::span<const Algorithm> algorithms,
                           const BeamformerConfig& config, std::uint64_t seed) {
  TrialOutcome out;
  try {
    out.traces = run_trials(scenario, algorithms, config, seed);
    out.ok.assign(algorithms.size(), true);
    out.errors.assign(algorithms.size(), {});
    return out;
  } catch (const std::exception&) {
    // Fall through to per-algorithm isolation.
  }
  for (Algorithm algorithm : algorithms) {
    try {
      out.traces.push_back(run_trial(scenario, algorithm, config, seed));
      out.ok.push_back(true);
      out.errors.emplace_back();
    } catch (const std::exception& e) {
      TrialTrace empty;
      empty.algorithm = algorithm;
      empty.seed = seed;
      out.traces.push_back(std::move(empty));
      out.ok.push_back(false);
      out.errors.emplace_back(e.what());
    }
  }
  return out;
}

}  // namespace

ExperimentResult monte_carlo(const Scenario& scenario, std::span<const Algorithm> algorithms,
                             const BeamformerConfig& config, const MonteCarloOptions& options) {
  if (options.num_trials < 1) {
    throw std::invalid_argument("monte_carlo: num_trials must be >= 1");
  }
  if (algorithms.empty()) {
    throw std::invalid_argument("monte_carlo: no algorithms requested");
  }
  scenario.validate();
  config.validate(scenario.num_sensors());

  const auto trials = static_cast<std::size_t>(options.num_trials);
  std::vector<TrialOutcome> outcomes(trials);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next.fetch_add(1); t < trials; t = next.fetch_add(1)) {
      outcomes[t] = execute_trial(scenario, algorithms, config, trial_seed(scenario.seed, t));
    }
  };
  const int threads = std::max(1, std::min<int>(options.threads > 0 ? options.threads : default_thread_count(),
                                                static_cast<int>(trials)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int k = 0; k < threads; ++k) pool.emplace_back(worker);
  }

  ExperimentResult result;
  result.scenario = scenario;
  result.config = config;
  result.num_trials = options.num_trials;
  const auto snapshots = static_cast<std::size_t>(scenario.num_snapshots);
  for (Algorithm algorithm : algorithms) {
    AlgorithmCurve curve;
    curve.algorithm = algorithm;
    curve.mean_sinr_db.assign(snapshots, 0.0);
    curve.mean_optimal_sinr_db.assign(snapshots, 0.0);
    curve.mean_steering_cosine.assign(snapshots, 0.0);
    curve.trials.assign(snapshots, 0);
    result.curves.push_back(std::move(curve));
  }

  std::vector<double> ratio_sum(algorithms.size(), 0.0);
  for (std::size_t t = 0; t < trials; ++t) {
    const TrialOutcome& outcome = outcomes[t];
    for (std::size_t k = 0; k < algorithms.size(); ++k) {
      if (!outcome.ok[k]) {
        result.failures.push_back({static_cast<int>(t), trial_seed(scenario.seed, t), algorithms[k], outcome.errors[k]});
        continue;
      }
      AlgorithmCurve& curve = result.curves[k];
      const auto& recs = outcome.traces[k].snapshots;
      for (std::size_t i = 0; i < recs.size(); ++i) {
        const SnapshotRecord& r = recs[i];
        if (!std::isfinite(r.sinr_db) || !std::isfinite(r.steering_cosine)) continue;
        curve.mean_sinr_db[i] += r.sinr_db;
        curve.mean_optimal_sinr_db[i] += r.optimal_sinr_db;
        curve.mean_steering_cosine[i] += r.steering_cosine;
        curve.trials[i] += 1;
        if (std::isfinite(r.bound_ratio)) {
          ratio_sum[k] += r.bound_ratio;
          curve.bound_samples += 1;
        }
      }
    }
  }
  for (std::size_t k = 0; k < algorithms.size(); ++k) {
    AlgorithmCurve& curve = result.curves[k];
    for (std::size_t i = 0; i < snapshots; ++i) {
      const int count = curve.trials[i];
      if (count > 0) {
        curve.mean_sinr_db[i] /= count;
        curve.mean_optimal_sinr_db[i] /= count;
        curve.mean_steering_cosine[i] /= count;
      } else {
        curve.mean_sinr_db[i] = kNaN;
        curve.mean_optimal_sinr_db[i] = kNaN;
        curve.mean_steering_cosine[i] = kNaN;
      }
    }
    curve.mean_bound_ratio = curve.bound_samples > 0 ? ratio_sum[k] / curve.bound_samples : kNaN;
  }
  if (options.keep_traces) {
    result.traces.reserve(trials);
    for (TrialOutcome& outcome : outcomes) {
      result.traces.push_back(std::move(outcome.traces));
    }
  }
  return result;
}

std::span<const std::string_view> flop_model_names() { return kFlopModels; }

std::int64_t flop_count(std::string_view name, std::int64_t m) {
  if (m < 1) {
    throw std::invalid_argument("flop_count: M must be >= 1");
  }
  const std::int64_t m2 = m * m;
  const std::int64_t m3 = m2 * m;
  if (name == "LOCSME") return 4 * m3 + 3 * m2 + 20 * m;
  if (name == "LOCSME-SG") return 15 * m2 + 30 * m;
  if (name == "SQP" || name == "SQP[r10]") {
    const double m35 = static_cast<double>(m3) * std::sqrt(static_cast<double>(m));
    return std::llround(m35) + 7 * m3 + 5 * m2 + 3 * m;
  }
  if (name == "LOCME") return 2 * m3 + 4 * m2 + 5 * m;
  if (name == "LCWC") return 100 * m2 + 350 * m;
  if (name == "LOCSME-CG") return 13 * m2 + 77 * m;
  throw std::invalid_argument("flop_count: unknown algorithm '" + std::string(name) + "'");
}

}  // namespace locsme
