#pragma once

#include "locsme/linalg.hpp"

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace locsme {

using Rng = std::mt19937_64;

class ScenarioError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Uniform linear array. Spacing is in wavelengths.
struct ArrayGeometry {
  int num_sensors = 12;
  double spacing = 0.5;

  void validate() const;
};

enum class AngleLaw { Uniform, Gaussian };

/// Local-scattering model of the desired signal's effective steering vector.
///
/// Coherent: a1 = a(theta1) + sum_k exp(j phi_k) a(theta_k), fixed for the trial.
/// Incoherent: a1(i) = s_0(i) a(theta1) + sum_k s_k(i) a(theta_k), redrawn per snapshot.
/// Scattered-path angles are drawn once per trial from `angle_law` with the
/// given mean and standard deviation (uniform: mean +/- sqrt(3) std).
struct MismatchModel {
  enum class Kind { None, Coherent, Incoherent };

  Kind kind = Kind::None;
  int num_paths = 4;
  double angle_mean_deg = 10.0;
  double angle_std_deg = 2.0;
  AngleLaw angle_law = AngleLaw::Uniform;

  static MismatchModel none() { return {}; }
  static MismatchModel coherent(int paths = 4, double mean_deg = 10.0, double std_deg = 2.0) {
    return {Kind::Coherent, paths, mean_deg, std_deg, AngleLaw::Uniform};
  }
  static MismatchModel incoherent(int paths = 4, double mean_deg = 10.0, double std_deg = 2.0) {
    return {Kind::Incoherent, paths, mean_deg, std_deg, AngleLaw::Uniform};
  }

  void validate() const;
};

std::string to_string(MismatchModel::Kind kind);
MismatchModel::Kind parse_mismatch_kind(const std::string& name);

/// Ground truth of one experiment. Powers: sigma_1^2 = noise_power * 10^(snr/10),
/// each interferer at sigma_1^2 / 10^(sir/10).
struct Scenario {
  ArrayGeometry geometry;
  double desired_doa_deg = 10.0;
  std::vector<double> interferer_doas_deg{30.0, 50.0};
  double snr_db = 10.0;
  double sir_db = 0.0;
  double noise_power = 1.0;
  MismatchModel mismatch;
  double sector_halfwidth_deg = 5.0;
  int num_snapshots = 300;
  std::uint64_t seed = 1;

  int num_sensors() const { return geometry.num_sensors; }
  double desired_power() const;
  double interferer_power() const;
  void validate() const;
};

/// Element m (0-indexed) is exp(j 2 pi spacing m sin(theta)). Defined on [-90, 90] degrees.
ComplexVec steering_vector(double theta_deg, const ArrayGeometry& geometry);

/// Interference-plus-noise covariance: sum_k sigma_k^2 a_k a_k^H + sigma_n^2 I.
ComplexMat true_inc_matrix(const Scenario& scenario);

/// Per-trial realization of the desired signal's steering vector.
class DesiredSignature {
 public:
  DesiredSignature(const Scenario& scenario, Rng& rng);

  bool time_varying() const { return kind_ == MismatchModel::Kind::Incoherent; }
  /// Steering vector for the next snapshot; draws path gains when time-varying.
  const ComplexVec& next(Rng& rng);
  const ComplexVec& current() const { return current_; }
  const ComplexVec& direct_path() const { return direct_; }
  const std::vector<double>& path_angles_deg() const { return path_angles_deg_; }

 private:
  MismatchModel::Kind kind_;
  ComplexVec direct_;
  std::vector<ComplexVec> paths_;
  std::vector<double> path_angles_deg_;
  ComplexVec current_;
};

DesiredSignature realize_mismatch(const Scenario& scenario, Rng& rng);

/// Circular complex Gaussian with E|z|^2 = variance.
Complex complex_gaussian(Rng& rng, double variance);

struct Snapshot {
  ComplexVec x;         // received vector x(i)
  ComplexVec desired;   // desired component a1(i) s1(i)
  ComplexVec steering;  // a1(i) used for scoring
};

/// Streams snapshots x(i) = a1(i) s1(i) + sum_k a(theta_k) s_k(i) + n(i).
/// Deterministic for a given (scenario, seed).
class SnapshotSource {
 public:
  SnapshotSource(const Scenario& scenario, std::uint64_t seed);

  const Snapshot& next();
  const Snapshot& current() const { return snapshot_; }
  const DesiredSignature& signature() const { return signature_; }
  int index() const { return index_; }

 private:
  Rng rng_;
  double desired_power_;
  double interferer_power_;
  double noise_power_;
  std::vector<ComplexVec> interferers_;
  DesiredSignature signature_;
  Snapshot snapshot_;
  int index_ = 0;
};

}  // namespace locsme
