#include "locsme/array_model.hpp"

#include <cmath>
#include <numbers>

namespace locsme {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

double draw_angle(const MismatchModel& model, Rng& rng) {
  if (model.angle_std_deg == 0.0) {
    return model.angle_mean_deg;
  }
  if (model.angle_law == AngleLaw::Gaussian) {
    std::normal_distribution<double> dist(model.angle_mean_deg, model.angle_std_deg);
    return dist(rng);
  }
  const double half = std::sqrt(3.0) * model.angle_std_deg;
  std::uniform_real_distribution<double> dist(model.angle_mean_deg - half, model.angle_mean_deg + half);
  return dist(rng);
}

}  // namespace

void ArrayGeometry::validate() const {
  if (num_sensors < 2) {
    throw ScenarioError("num_sensors must be >= 2, got " + std::to_string(num_sensors));
  }
  if (!(spacing > 0.0)) {
    throw ScenarioError("spacing must be > 0");
  }
}

void MismatchModel::validate() const {
  if (num_paths < 0) {
    throw ScenarioError("scatter num_paths must be >= 0");
  }
  if (!(angle_std_deg >= 0.0)) {
    throw ScenarioError("scatter angle std must be >= 0");
  }
}

std::string to_string(MismatchModel::Kind kind) {
  switch (kind) {
    case MismatchModel::Kind::None:
      return "none";
    case MismatchModel::Kind::Coherent:
      return "coherent";
    case MismatchModel::Kind::Incoherent:
      return "incoherent";
  }
  return "none";
}

MismatchModel::Kind parse_mismatch_kind(const std::string& name) {
  if (name == "none") return MismatchModel::Kind::None;
  if (name == "coherent") return MismatchModel::Kind::Coherent;
  if (name == "incoherent") return MismatchModel::Kind::Incoherent;
  throw ScenarioError("unknown mismatch model '" + name + "' (expected none|coherent|incoherent)");
}

double Scenario::desired_power() const { return noise_power * std::pow(10.0, snr_db / 10.0); }

double Scenario::interferer_power() const { return desired_power() / std::pow(10.0, sir_db / 10.0); }

void Scenario::validate() const {
  geometry.validate();
  mismatch.validate();
  auto check_doa = [](double doa, const char* what) {
    if (!(doa > -90.0 && doa < 90.0)) {
      throw ScenarioError(std::string(what) + " must lie in (-90, 90) degrees");
    }
  };
  check_doa(desired_doa_deg, "desired_doa");
  for (double doa : interferer_doas_deg) {
    check_doa(doa, "interferer_doas");
  }
  if (!(sector_halfwidth_deg > 0.0)) {
    throw ScenarioError("sector_halfwidth must be > 0");
  }
  if (num_snapshots < 1) {
    throw ScenarioError("snapshots must be >= 1");
  }
  if (!(noise_power > 0.0)) {
    throw ScenarioError("noise_power must be > 0");
  }
}

ComplexVec steering_vector(double theta_deg, const ArrayGeometry& geometry) {
  if (!(theta_deg >= -90.0 && theta_deg <= 90.0)) {
    throw ScenarioError("steering angle outside [-90, 90] degrees");
  }
  const double phase_step = 2.0 * std::numbers::pi * geometry.spacing * std::sin(theta_deg * kDegToRad);
  ComplexVec a(geometry.num_sensors);
  for (int m = 0; m < geometry.num_sensors; ++m) {
    a(m) = std::polar(1.0, phase_step * m);
  }
  return a;
}

ComplexMat true_inc_matrix(const Scenario& scenario) {
  const int m = scenario.num_sensors();
  ComplexMat r = scenario.noise_power * ComplexMat::Identity(m, m);
  const double power = scenario.interferer_power();
  for (double doa : scenario.interferer_doas_deg) {
    const ComplexVec a = steering_vector(doa, scenario.geometry);
    r += power * a * a.adjoint();
  }
  return r;
}

Complex complex_gaussian(Rng& rng, double variance) {
  std::normal_distribution<double> unit(0.0, 1.0);
  const double scale = std::sqrt(variance / 2.0);
  const double re = unit(rng);
  const double im = unit(rng);
  return {scale * re, scale * im};
}

DesiredSignature::DesiredSignature(const Scenario& scenario, Rng& rng)
    : kind_(scenario.mismatch.kind), direct_(steering_vector(scenario.desired_doa_deg, scenario.geometry)) {
  const MismatchModel& model = scenario.mismatch;
  if (kind_ != MismatchModel::Kind::None) {
    for (int k = 0; k < model.num_paths; ++k) {
      const double angle = draw_angle(model, rng);
      path_angles_deg_.push_back(angle);
      paths_.push_back(steering_vector(angle, scenario.geometry));
    }
  }
  current_ = direct_;
  if (kind_ == MismatchModel::Kind::Coherent) {
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    for (const ComplexVec& b : paths_) {
      current_ += std::polar(1.0, phase(rng)) * b;
    }
  }
}

const ComplexVec& DesiredSignature::next(Rng& rng) {
  if (kind_ != MismatchModel::Kind::Incoherent) {
    return current_;
  }
  const double gain_variance = 1.0 / static_cast<double>(paths_.size() + 1);
  current_ = complex_gaussian(rng, gain_variance) * direct_;
  for (const ComplexVec& b : paths_) {
    current_ += complex_gaussian(rng, gain_variance) * b;
  }
  return current_;
}

DesiredSignature realize_mismatch(const Scenario& scenario, Rng& rng) { return DesiredSignature(scenario, rng); }

SnapshotSource::SnapshotSource(const Scenario& scenario, std::uint64_t seed)
    : rng_(seed),
      desired_power_(scenario.desired_power()),
      interferer_power_(scenario.interferer_power()),
      noise_power_(scenario.noise_power),
      signature_((scenario.validate(), scenario), rng_) {
  for (double doa : scenario.interferer_doas_deg) {
    interferers_.push_back(steering_vector(doa, scenario.geometry));
  }
}

const Snapshot& SnapshotSource::next() {
  const ComplexVec& a1 = signature_.next(rng_);
  const Complex s1 = complex_gaussian(rng_, desired_power_);
  snapshot_.steering = a1;
  snapshot_.desired = s1 * a1;
  snapshot_.x = snapshot_.desired;
  for (const ComplexVec& a : interferers_) {
    snapshot_.x += complex_gaussian(rng_, interferer_power_) * a;
  }
  for (Eigen::Index m = 0; m < snapshot_.x.size(); ++m) {
    snapshot_.x(m) += complex_gaussian(rng_, noise_power_);
  }
  ++index_;
  return snapshot_;
}

}  // namespace locsme
