#pragma once

#include "locsme/array_model.hpp"
#include "locsme/linalg.hpp"
#include "locsme/shrinkage.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace locsme {

enum class Algorithm { Smi, Locsme, LocsmeCg };

std::string_view algorithm_name(Algorithm algorithm);
Algorithm parse_algorithm(std::string_view name);

/// How LOCSME-CG obtains its steering estimate each snapshot.
///   ScvSv: projection + normalization of the shrunk correlation vector; CG adapts v only.
///   CgSv:  CG step on the steering vector followed by the same projection + normalization.
enum class SteeringMode { ScvSv, CgSv };

/// Form of the v-chain gradient recursion.
///   Consistent: g(i) = (a - H v(i-1)) - alpha H p = a - H v(i), the exact residual of
///               H v = a with H = R + eps I - c a a^H. lambda enters through the step size.
///   Literal:    g(i) = (1 - lambda) a + lambda g(i-1) - alpha (R - s a a^H) p - x x^H v(i-1)
///               and the step size keeps the -lambda p^H a anchor term.
enum class CgRecursion { Consistent, Literal };

std::string_view to_string(SteeringMode mode);
SteeringMode parse_steering_mode(std::string_view name);
std::string_view to_string(CgRecursion recursion);
CgRecursion parse_cg_recursion(std::string_view name);

struct BeamformerConfig {
  // Diagonal loads are relative to the mean diagonal tr(R)/M of the running SCM.
  double loading = 1.0;
  double smi_loading = 1e-3;
  double forgetting = 0.95;
  double eta = 0.2;
  int subspace_rank = 3;
  int grid_points = 180;
  SteeringMode steering_mode = SteeringMode::ScvSv;
  CgRecursion cg_recursion = CgRecursion::Consistent;

  void validate(int num_sensors) const;
};

/// Per-snapshot condition bits.
enum StepFlag : std::uint32_t {
  kFlagNone = 0,
  kFlagRhoDegenerate = 1u << 0,
  kFlagSteeringDegenerate = 1u << 1,
  kFlagAlphaV = 1u << 2,
  kFlagAlphaA = 1u << 3,
  kFlagBetaV = 1u << 4,
  kFlagBetaA = 1u << 5,
  kFlagNormalizer = 1u << 6,
  kFlagLoadingEscalated = 1u << 7,
};

class SolveError : public std::runtime_error {
 public:
  SolveError(const std::string& what, double condition) : std::runtime_error(what), condition_(condition) {}
  double condition() const { return condition_; }

 private:
  double condition_;
};

/// R(i) = ((i - 1) R(i-1) + x x^H) / i
ComplexMat& scm_update(ComplexMat& scm, const ComplexVec& x, std::uint64_t i);

/// R^-1 a / (a^H R^-1 a) through a Cholesky solve. Throws SolveError when R is
/// not positive definite or its estimated condition number exceeds 1e12.
ComplexVec mvdr_weights(const ComplexMat& covariance, const ComplexVec& steering);

struct StepSize {
  Complex value{0.0, 0.0};
  bool flagged = false;
};

/// alpha_v = [lambda (p^H g - p^H a) - eta p^H g] / [p^H (R - s a a^H) p]
StepSize cg_alpha_v(const ComplexVec& direction, const ComplexVec& gradient_prev, const ComplexVec& steering,
                    const ComplexMat& scm, double power, double lambda, double eta);

/// Same step from precomputed inner products. With `anchor` false the
/// -lambda p^H a term is omitted.
StepSize cg_alpha_v_terms(Complex p_dot_g, Complex p_dot_a, double curvature, double lambda, double eta,
                          bool anchor = true);

/// alpha_a = [lambda (p^H v - p^H g) - p^H v + p^H x x^H a + eta p^H g] / [s |p^H v|^2]
StepSize cg_alpha_a(const ComplexVec& direction, const ComplexVec& gradient_prev, const ComplexVec& v,
                    const ComplexVec& x, const ComplexVec& steering, double power, double lambda, double eta);

/// Polak-Ribiere: (g - g_prev)^H g / (g_prev^H g_prev), zero when g_prev ~ 0.
StepSize cg_beta(const ComplexVec& gradient, const ComplexVec& gradient_prev);

/// Re(p^H g(i)) / Re(p^H g(i-1)); empty when the previous product is ~0.
std::optional<double> cg_bound_ratio(const ComplexVec& direction, const ComplexVec& gradient,
                                     const ComplexVec& gradient_prev);

/// Common per-snapshot interface of the weight-producing state machines.
class Beamformer {
 public:
  virtual ~Beamformer() = default;

  virtual Algorithm algorithm() const = 0;
  /// Consumes x(i) and returns w(i).
  virtual const ComplexVec& step(const ComplexVec& x) = 0;
  /// Steering vector the current weights were designed for.
  virtual const ComplexVec& steering() const = 0;
  virtual const ShrinkageState* shrinkage() const { return nullptr; }
  virtual bool state_finite() const;

  const ComplexVec& weights() const { return weights_; }
  std::uint32_t flags() const { return flags_; }
  std::uint64_t index() const { return index_; }

 protected:
  ComplexVec weights_;
  std::uint32_t flags_ = kFlagNone;
  std::uint64_t index_ = 0;
};

/// Sample matrix inversion with the presumed steering vector.
class SmiBeamformer final : public Beamformer {
 public:
  SmiBeamformer(ComplexVec presumed, double loading);

  Algorithm algorithm() const override { return Algorithm::Smi; }
  const ComplexVec& step(const ComplexVec& x) override;
  const ComplexVec& steering() const override { return presumed_; }
  const ComplexMat& scm() const { return scm_; }

 private:
  ComplexVec presumed_;
  ComplexMat scm_;
  double loading_;
};

/// Batch LOCSME: shrinkage steering estimate, power estimate and an MVDR solve
/// against the loaded interference-plus-noise estimate R - s a a^H + eps I.
class LocsmeBeamformer final : public Beamformer {
 public:
  LocsmeBeamformer(ComplexVec presumed, SectorProjector projector, double noise_power, double loading);

  Algorithm algorithm() const override { return Algorithm::Locsme; }
  const ComplexVec& step(const ComplexVec& x) override;
  const ComplexVec& steering() const override { return steering_; }
  const ShrinkageState* shrinkage() const override { return &shrinkage_; }
  bool state_finite() const override;

  const ComplexMat& scm() const { return scm_; }
  const ComplexMat& inc_estimate() const { return inc_; }
  double power() const { return power_; }
  double mean_power() const { return mean_power_; }
  double applied_loading() const { return applied_loading_; }

 private:
  SectorProjector projector_;
  ShrinkageState shrinkage_;
  ComplexMat scm_;
  ComplexMat inc_;
  ComplexVec steering_;
  double noise_power_;
  double loading_;
  double power_ = 0.0;
  double mean_power_ = 0.0;
  double applied_loading_ = 0.0;
};

struct CgSettings {
  double forgetting = 0.95;
  double eta = 0.2;
  double loading = 1.0;
  SteeringMode steering_mode = SteeringMode::ScvSv;
  CgRecursion recursion = CgRecursion::Consistent;
};

/// LOCSME-CG: one conjugate-gradient iteration per snapshot on the weight
/// chain v (and on the steering chain in CgSv mode), w = v / (a^H v).
class CgBeamformer final : public Beamformer {
 public:
  CgBeamformer(ComplexVec presumed, SectorProjector projector, double noise_power, CgSettings settings);

  Algorithm algorithm() const override { return Algorithm::LocsmeCg; }
  const ComplexVec& step(const ComplexVec& x) override;
  const ComplexVec& steering() const override { return steering_; }
  const ShrinkageState* shrinkage() const override { return &shrinkage_; }
  bool state_finite() const override;

  const ComplexVec& v() const { return v_; }
  const ComplexVec& gradient_v() const { return g_v_; }
  const ComplexVec& gradient_a() const { return g_a_; }
  const ComplexVec& direction_v() const { return p_v_; }
  const ComplexVec& direction_a() const { return p_a_; }
  const ComplexMat& scm() const { return scm_; }
  double power() const { return power_; }
  Complex alpha_v() const { return alpha_v_; }
  Complex alpha_a() const { return alpha_a_; }

  /// Convergence-bound ratios of the last snapshot.
  std::optional<double> bound_ratio_v() const { return ratio_v_; }
  std::optional<double> bound_ratio_a() const { return ratio_a_; }

  /// Real flops spent inside step() since construction.
  const OpCounter& ops() const { return ops_; }
  void reset_ops() { ops_.reset(); }

 private:
  ComplexVec apply_curvature(const ComplexVec& u, double deflation, double load);

  SectorProjector projector_;
  CgSettings settings_;
  ShrinkageState shrinkage_;
  ComplexMat scm_;
  ComplexVec steering_;
  ComplexVec v_;
  ComplexVec g_a_;
  ComplexVec g_v_;
  ComplexVec p_a_;
  ComplexVec p_v_;
  double noise_power_;
  double power_ = 0.0;
  double mean_power_ = 0.0;
  Complex alpha_v_{0.0, 0.0};
  Complex alpha_a_{0.0, 0.0};
  std::optional<double> ratio_v_;
  std::optional<double> ratio_a_;
  OpCounter ops_;
};

std::unique_ptr<Beamformer> make_beamformer(Algorithm algorithm, const Scenario& scenario,
                                            const BeamformerConfig& config, const SectorProjector& projector);

}  // namespace locsme
