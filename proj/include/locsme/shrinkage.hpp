#pragma once

#include "locsme/array_model.hpp"
#include "locsme/linalg.hpp"

#include <cstdint>
#include <stdexcept>

namespace locsme {

class EigenError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Integral of a(theta) a^H(theta) over [center - halfwidth, center + halfwidth]
/// (theta in radians), composite trapezoid on `grid_points` samples.
ComplexMat build_sector_matrix(double center_deg, double halfwidth_deg, const ArrayGeometry& geometry,
                               int grid_points = 180);

/// Orthogonal projector onto the span of the `rank` principal eigenvectors
/// of a sector matrix.
class SectorProjector {
 public:
  SectorProjector(ComplexMat sector_matrix, int rank, double lower_deg = 0.0, double upper_deg = 0.0);

  const ComplexMat& sector_matrix() const { return sector_matrix_; }
  const ComplexMat& matrix() const { return projector_; }
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  int rank() const { return rank_; }
  int dimension() const { return static_cast<int>(projector_.rows()); }
  double lower_deg() const { return lower_deg_; }
  double upper_deg() const { return upper_deg_; }

  ComplexVec apply(const ComplexVec& v) const { return projector_ * v; }
  ComplexVec apply(const ComplexVec& v, OpCounter& ops) const { return kern::matvec(projector_, v, ops); }

 private:
  ComplexMat sector_matrix_;
  ComplexMat projector_;
  Eigen::VectorXd eigenvalues_;  // ascending, of the sector matrix
  int rank_;
  double lower_deg_;
  double upper_deg_;
};

SectorProjector build_projector(const ComplexMat& sector_matrix, int rank);

/// Sector projector for a scenario's presumed look direction.
SectorProjector build_projector(const Scenario& scenario, int rank, int grid_points = 180);

/// Raw shrinkage coefficient from the previous shrunk vector and SCV, real parts taken:
///   ((1 - 2/M) Re(d^H l) + |sum d|^2) / ((i - 2/M) Re(d^H l) + (1 - i/M) |sum d|^2)
/// Returns NaN when the denominator magnitude is below 1e-15.
double shrinkage_coefficient(const ComplexVec& d_prev, const ComplexVec& l_prev, std::uint64_t i,
                             OpCounter* ops = nullptr);

/// rho * mean(l) * 1 + (1 - rho) * l
ComplexVec shrink_toward_mean(const ComplexVec& l, double rho);

/// Running sample correlation vector between the array data and the beamformer
/// output, and its shrinkage toward the scalar mean.
class ShrinkageState {
 public:
  explicit ShrinkageState(int num_sensors);

  /// l(i) = ((i - 1) l(i-1) + x y^*) / i
  const ComplexVec& scv_update(const ComplexVec& x, Complex y);
  const ComplexVec& scv_update(const ComplexVec& x, Complex y, OpCounter& ops);

  struct Result {
    double rho = 0.0;
    double raw_rho = 0.0;
    bool flagged = false;  // degenerate denominator, rho forced to 0
  };

  /// Computes nu, rho and d(i) from the latest SCV. At i = 1, d = l and rho = 0.
  Result shrink();
  Result shrink(OpCounter& ops);

  std::uint64_t index() const { return index_; }
  const ComplexVec& scv() const { return scv_; }
  const ComplexVec& previous_scv() const { return scv_prev_; }
  const ComplexVec& shrunk() const { return shrunk_; }
  double rho() const { return rho_; }
  Complex mean() const { return mean_; }

  /// || d - l - rho (nu 1 - l) ||
  double convexity_residual() const;

 private:
  ComplexVec scv_;
  ComplexVec scv_prev_;
  ComplexVec shrunk_;
  double rho_ = 0.0;
  Complex mean_{0.0, 0.0};
  std::uint64_t index_ = 0;
};

struct SteeringUpdate {
  ComplexVec steering;
  bool flagged = false;  // ||P d|| below threshold, previous estimate kept
};

/// P d / ||P d||, or `previous` when ||P d|| < 1e-15.
SteeringUpdate estimate_steering(const SectorProjector& projector, const ComplexVec& shrunk,
                                 const ComplexVec& previous);
SteeringUpdate estimate_steering(const SectorProjector& projector, const ComplexVec& shrunk,
                                 const ComplexVec& previous, OpCounter& ops);

/// (|a^H x|^2 - |a^H a| sigma_n^2) / |a^H a|^2, clamped at zero.
double estimate_power(const ComplexVec& steering, const ComplexVec& x, double noise_power);
double estimate_power_raw(const ComplexVec& steering, const ComplexVec& x, double noise_power);

}  // namespace locsme
