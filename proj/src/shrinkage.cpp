#include "locsme/shrinkage.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace locsme {

namespace {

constexpr double kGuard = 1e-15;

OpCounter& scratch_counter() {
  thread_local OpCounter counter;
  return counter;
}

}  // namespace

ComplexMat build_sector_matrix(double center_deg, double halfwidth_deg, const ArrayGeometry& geometry,
                               int grid_points) {
  if (!(halfwidth_deg > 0.0)) {
    throw std::invalid_argument("sector halfwidth must be > 0");
  }
  if (grid_points < 2) {
    throw std::invalid_argument("sector quadrature needs at least 2 grid points");
  }
  const double lo = center_deg - halfwidth_deg;
  const double step_deg = 2.0 * halfwidth_deg / (grid_points - 1);
  const double step_rad = step_deg * std::numbers::pi / 180.0;
  const int m = geometry.num_sensors;
  ComplexMat c = ComplexMat::Zero(m, m);
  for (int k = 0; k < grid_points; ++k) {
    const double weight = (k == 0 || k == grid_points - 1) ? 0.5 * step_rad : step_rad;
    const ComplexVec a = steering_vector(lo + k * step_deg, geometry);
    c.noalias() += weight * a * a.adjoint();
  }
  // Symmetrize away rounding.
  return 0.5 * (c + c.adjoint());
}

SectorProjector::SectorProjector(ComplexMat sector_matrix, int rank, double lower_deg, double upper_deg)
    : sector_matrix_(std::move(sector_matrix)), rank_(rank), lower_deg_(lower_deg), upper_deg_(upper_deg) {
  const auto m = static_cast<int>(sector_matrix_.rows());
  if (sector_matrix_.cols() != m) {
    throw std::invalid_argument("sector matrix must be square");
  }
  if (rank < 1 || rank > m) {
    throw std::invalid_argument("projector rank must lie in [1, " + std::to_string(m) + "]");
  }
  Eigen::SelfAdjointEigenSolver<ComplexMat> solver(sector_matrix_);
  if (solver.info() != Eigen::Success) {
    throw EigenError("eigen-decomposition of the sector matrix failed");
  }
  eigenvalues_ = solver.eigenvalues();
  const ComplexMat basis = solver.eigenvectors().rightCols(rank);
  projector_ = basis * basis.adjoint();
}

SectorProjector build_projector(const ComplexMat& sector_matrix, int rank) {
  return SectorProjector(sector_matrix, rank);
}

SectorProjector build_projector(const Scenario& scenario, int rank, int grid_points) {
  const double lo = scenario.desired_doa_deg - scenario.sector_halfwidth_deg;
  const double hi = scenario.desired_doa_deg + scenario.sector_halfwidth_deg;
  return SectorProjector(
      build_sector_matrix(scenario.desired_doa_deg, scenario.sector_halfwidth_deg, scenario.geometry, grid_points),
      rank, lo, hi);
}

double shrinkage_coefficient(const ComplexVec& d_prev, const ComplexVec& l_prev, std::uint64_t i, OpCounter* ops) {
  const double m = static_cast<double>(d_prev.size());
  const double n = static_cast<double>(i);
  if (ops != nullptr) {
    ops->add(8 * static_cast<std::uint64_t>(d_prev.size()) + 2 * static_cast<std::uint64_t>(d_prev.size()) + 16);
  }
  const double cross = d_prev.dot(l_prev).real();
  const double sum_sq = std::norm(d_prev.sum());
  const double num = (1.0 - 2.0 / m) * cross + sum_sq;
  const double den = (n - 2.0 / m) * cross + (1.0 - n / m) * sum_sq;
  if (std::abs(den) < kGuard) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  return num / den;
}

ComplexVec shrink_toward_mean(const ComplexVec& l, double rho) {
  const Complex nu = l.sum() / static_cast<double>(l.size());
  return (1.0 - rho) * l + ComplexVec::Constant(l.size(), rho * nu);
}

ShrinkageState::ShrinkageState(int num_sensors)
    : scv_(ComplexVec::Zero(num_sensors)), scv_prev_(ComplexVec::Zero(num_sensors)), shrunk_(ComplexVec::Zero(num_sensors)) {}

const ComplexVec& ShrinkageState::scv_update(const ComplexVec& x, Complex y) {
  return scv_update(x, y, scratch_counter());
}

const ComplexVec& ShrinkageState::scv_update(const ComplexVec& x, Complex y, OpCounter& ops) {
  ++index_;
  scv_prev_ = scv_;
  const double keep = static_cast<double>(index_ - 1) / static_cast<double>(index_);
  ops.add(10 * static_cast<std::uint64_t>(x.size()));
  scv_ = keep * scv_ + x * (std::conj(y) / static_cast<double>(index_));
  return scv_;
}

ShrinkageState::Result ShrinkageState::shrink() { return shrink(scratch_counter()); }

ShrinkageState::Result ShrinkageState::shrink(OpCounter& ops) {
  Result result;
  const auto m = static_cast<std::uint64_t>(scv_.size());
  ops.add(2 * m);
  mean_ = scv_.sum() / static_cast<double>(scv_.size());
  if (index_ <= 1) {
    rho_ = 0.0;
    shrunk_ = scv_;
    return result;
  }
  const double raw = shrinkage_coefficient(shrunk_, scv_prev_, index_, &ops);
  result.raw_rho = raw;
  if (std::isnan(raw)) {
    result.flagged = true;
    rho_ = 0.0;
  } else {
    rho_ = std::clamp(raw, 0.0, 1.0);
  }
  result.rho = rho_;
  ops.add(6 * m);
  shrunk_ = (1.0 - rho_) * scv_ + ComplexVec::Constant(scv_.size(), rho_ * mean_);
  return result;
}

double ShrinkageState::convexity_residual() const {
  const ComplexVec target = ComplexVec::Constant(scv_.size(), mean_);
  return (shrunk_ - scv_ - rho_ * (target - scv_)).norm();
}

SteeringUpdate estimate_steering(const SectorProjector& projector, const ComplexVec& shrunk,
                                 const ComplexVec& previous) {
  return estimate_steering(projector, shrunk, previous, scratch_counter());
}

SteeringUpdate estimate_steering(const SectorProjector& projector, const ComplexVec& shrunk,
                                 const ComplexVec& previous, OpCounter& ops) {
  ComplexVec projected = projector.apply(shrunk, ops);
  const double norm = std::sqrt(kern::squared_norm(projected, ops));
  if (!(norm >= kGuard)) {
    return {previous, true};
  }
  kern::scale(projected, 1.0 / norm, ops);
  return {std::move(projected), false};
}

double estimate_power_raw(const ComplexVec& steering, const ComplexVec& x, double noise_power) {
  const double gain = steering.squaredNorm();
  return (std::norm(steering.dot(x)) - gain * noise_power) / (gain * gain);
}

double estimate_power(const ComplexVec& steering, const ComplexVec& x, double noise_power) {
  return std::max(0.0, estimate_power_raw(steering, x, noise_power));
}

}  // namespace locsme
