#include "locsme/beamformers.hpp"

#include <cmath>
#include <limits>

namespace locsme {

namespace {

constexpr double kGuard = 1e-15;
constexpr double kMaxCondition = 1e12;
constexpr int kMaxLoadingEscalations = 3;

double mean_diagonal(const ComplexMat& r) { return r.trace().real() / static_cast<double>(r.rows()); }

bool all_finite(const ComplexVec& v) { return v.allFinite(); }

}  // namespace

std::string_view algorithm_name(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::Smi:
      return "SMI";
    case Algorithm::Locsme:
      return "LOCSME";
    case Algorithm::LocsmeCg:
      return "LOCSME-CG";
  }
  return "SMI";
}

Algorithm parse_algorithm(std::string_view name) {
  if (name == "SMI" || name == "smi") return Algorithm::Smi;
  if (name == "LOCSME" || name == "locsme") return Algorithm::Locsme;
  if (name == "LOCSME-CG" || name == "locsme-cg") return Algorithm::LocsmeCg;
  throw std::invalid_argument("unknown algorithm '" + std::string(name) + "' (expected SMI|LOCSME|LOCSME-CG)");
}

std::string_view to_string(SteeringMode mode) { return mode == SteeringMode::ScvSv ? "scv-sv" : "cg-sv"; }

SteeringMode parse_steering_mode(std::string_view name) {
  if (name == "scv-sv") return SteeringMode::ScvSv;
  if (name == "cg-sv") return SteeringMode::CgSv;
  throw std::invalid_argument("unknown steering mode '" + std::string(name) + "' (expected scv-sv|cg-sv)");
}

std::string_view to_string(CgRecursion recursion) {
  return recursion == CgRecursion::Consistent ? "consistent" : "literal";
}

CgRecursion parse_cg_recursion(std::string_view name) {
  if (name == "consistent") return CgRecursion::Consistent;
  if (name == "literal") return CgRecursion::Literal;
  throw std::invalid_argument("unknown cg recursion '" + std::string(name) + "' (expected consistent|literal)");
}

void BeamformerConfig::validate(int num_sensors) const {
  if (!(loading >= 0.0)) throw std::invalid_argument("loading must be >= 0");
  if (!(smi_loading >= 0.0)) throw std::invalid_argument("smi_loading must be >= 0");
  if (!(forgetting > 0.0 && forgetting <= 1.0)) throw std::invalid_argument("lambda must lie in (0, 1]");
  if (!(eta >= 0.0 && eta <= 0.5)) throw std::invalid_argument("eta must lie in [0, 0.5]");
  if (subspace_rank < 1 || subspace_rank > num_sensors) {
    throw std::invalid_argument("subspace_rank must lie in [1, M]");
  }
  if (grid_points < 2) throw std::invalid_argument("grid_points must be >= 2");
}

ComplexMat& scm_update(ComplexMat& scm, const ComplexVec& x, std::uint64_t i) {
  if (i == 0) {
    throw std::invalid_argument("scm_update: snapshot index starts at 1");
  }
  if (scm.rows() != x.size()) {
    scm = ComplexMat::Zero(x.size(), x.size());
  }
  const double keep = static_cast<double>(i - 1) / static_cast<double>(i);
  scm = keep * scm + (x * x.adjoint()) / static_cast<double>(i);
  return scm;
}

ComplexVec mvdr_weights(const ComplexMat& covariance, const ComplexVec& steering) {
  Eigen::LLT<ComplexMat> llt(covariance);
  if (llt.info() != Eigen::Success) {
    throw SolveError("mvdr: covariance is not positive definite", std::numeric_limits<double>::infinity());
  }
  const double rcond = llt.rcond();
  const double condition = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
  if (!(condition <= kMaxCondition)) {
    throw SolveError("mvdr: covariance condition estimate " + std::to_string(condition) + " exceeds 1e12",
                     condition);
  }
  ComplexVec w = llt.solve(steering);
  const Complex gain = steering.dot(w);
  w /= gain;
  return w;
}

StepSize cg_alpha_v_terms(Complex p_dot_g, Complex p_dot_a, double curvature, double lambda, double eta,
                          bool anchor) {
  if (!(std::abs(curvature) >= kGuard)) {
    return {{0.0, 0.0}, true};
  }
  Complex numerator = (lambda - eta) * p_dot_g;
  if (anchor) {
    numerator -= lambda * p_dot_a;
  }
  return {numerator / curvature, false};
}

StepSize cg_alpha_v(const ComplexVec& direction, const ComplexVec& gradient_prev, const ComplexVec& steering,
                    const ComplexMat& scm, double power, double lambda, double eta) {
  const Complex p_dot_a = direction.dot(steering);
  const double curvature = direction.dot(scm * direction).real() - power * std::norm(p_dot_a);
  return cg_alpha_v_terms(direction.dot(gradient_prev), p_dot_a, curvature, lambda, eta, true);
}

StepSize cg_alpha_a(const ComplexVec& direction, const ComplexVec& gradient_prev, const ComplexVec& v,
                    const ComplexVec& x, const ComplexVec& steering, double power, double lambda, double eta) {
  const Complex p_dot_v = direction.dot(v);
  const double denominator = power * std::norm(p_dot_v);
  if (!(denominator >= kGuard)) {
    return {{0.0, 0.0}, true};
  }
  const Complex p_dot_g = direction.dot(gradient_prev);
  const Complex numerator =
      lambda * (p_dot_v - p_dot_g) - p_dot_v + direction.dot(x) * x.dot(steering) + eta * p_dot_g;
  return {numerator / denominator, false};
}

StepSize cg_beta(const ComplexVec& gradient, const ComplexVec& gradient_prev) {
  const double previous = gradient_prev.squaredNorm();
  if (!(previous >= kGuard)) {
    return {{0.0, 0.0}, true};
  }
  return {(gradient - gradient_prev).dot(gradient) / previous, false};
}

std::optional<double> cg_bound_ratio(const ComplexVec& direction, const ComplexVec& gradient,
                                     const ComplexVec& gradient_prev) {
  const double previous = direction.dot(gradient_prev).real();
  if (!(std::abs(previous) >= kGuard)) {
    return std::nullopt;
  }
  return direction.dot(gradient).real() / previous;
}

bool Beamformer::state_finite() const { return all_finite(weights_); }

// ---------------------------------------------------------------------------

SmiBeamformer::SmiBeamformer(ComplexVec presumed, double loading)
    : presumed_(std::move(presumed)), scm_(ComplexMat::Zero(presumed_.size(), presumed_.size())), loading_(loading) {
  weights_ = presumed_ / presumed_.squaredNorm();
}

const ComplexVec& SmiBeamformer::step(const ComplexVec& x) {
  ++index_;
  flags_ = kFlagNone;
  scm_update(scm_, x, index_);
  const double eps = loading_ * mean_diagonal(scm_);
  ComplexMat loaded = scm_;
  loaded.diagonal().array() += eps;
  weights_ = mvdr_weights(loaded, presumed_);
  return weights_;
}

// ---------------------------------------------------------------------------

LocsmeBeamformer::LocsmeBeamformer(ComplexVec presumed, SectorProjector projector, double noise_power,
                                   double loading)
    : projector_(std::move(projector)),
      shrinkage_(static_cast<int>(presumed.size())),
      scm_(ComplexMat::Zero(presumed.size(), presumed.size())),
      noise_power_(noise_power),
      loading_(loading) {
  steering_ = presumed / std::sqrt(presumed.squaredNorm());
  weights_ = presumed / presumed.squaredNorm();
}

const ComplexVec& LocsmeBeamformer::step(const ComplexVec& x) {
  ++index_;
  flags_ = kFlagNone;
  const Complex y = weights_.dot(x);
  scm_update(scm_, x, index_);

  shrinkage_.scv_update(x, y);
  if (shrinkage_.shrink().flagged) flags_ |= kFlagRhoDegenerate;
  SteeringUpdate update = estimate_steering(projector_, shrinkage_.shrunk(), steering_);
  if (update.flagged) flags_ |= kFlagSteeringDegenerate;
  steering_ = std::move(update.steering);

  power_ = estimate_power(steering_, x, noise_power_);
  const double n = static_cast<double>(index_);
  mean_power_ = ((n - 1.0) * mean_power_ + power_) / n;

  double eps = loading_ * mean_diagonal(scm_);
  inc_ = scm_ - mean_power_ * (steering_ * steering_.adjoint());
  inc_.diagonal().array() += eps;
  for (int attempt = 0;; ++attempt) {
    try {
      weights_ = mvdr_weights(inc_, steering_);
      break;
    } catch (const SolveError&) {
      if (attempt == kMaxLoadingEscalations) {
        throw;
      }
      // eps -> 10 eps, at least a tiny absolute floor so a zero load can escalate.
      const double next = eps > 0.0 ? 10.0 * eps : 1e-12 * std::max(1.0, mean_diagonal(scm_));
      inc_.diagonal().array() += next - eps;
      eps = next;
      flags_ |= kFlagLoadingEscalated;
    }
  }
  applied_loading_ = eps;
  return weights_;
}

bool LocsmeBeamformer::state_finite() const {
  return all_finite(weights_) && all_finite(steering_) && all_finite(shrinkage_.shrunk()) && std::isfinite(power_);
}

// ---------------------------------------------------------------------------

CgBeamformer::CgBeamformer(ComplexVec presumed, SectorProjector projector, double noise_power, CgSettings settings)
    : projector_(std::move(projector)),
      settings_(settings),
      shrinkage_(static_cast<int>(presumed.size())),
      scm_(ComplexMat::Zero(presumed.size(), presumed.size())),
      noise_power_(noise_power) {
  const auto m = presumed.size();
  steering_ = presumed / std::sqrt(presumed.squaredNorm());
  v_ = steering_;
  g_a_ = ComplexVec::Zero(m);
  g_v_ = ComplexVec::Zero(m);
  p_a_ = ComplexVec::Zero(m);
  p_v_ = ComplexVec::Zero(m);
  weights_ = v_ / steering_.dot(v_);
}

ComplexVec CgBeamformer::apply_curvature(const ComplexVec& u, double deflation, double load) {
  ComplexVec out = kern::matvec(scm_, u, ops_);
  if (deflation != 0.0) {
    kern::axpy(-deflation * kern::dot(steering_, u, ops_), steering_, out, ops_);
  }
  if (load != 0.0) {
    kern::axpy(load, u, out, ops_);
  }
  return out;
}

const ComplexVec& CgBeamformer::step(const ComplexVec& x) {
  ++index_;
  flags_ = kFlagNone;
  const bool consistent = settings_.recursion == CgRecursion::Consistent;
  const bool cg_steering = settings_.steering_mode == SteeringMode::CgSv;
  const double lambda = settings_.forgetting;
  const double eta = settings_.eta;
  const auto m = static_cast<std::uint64_t>(x.size());

  // Output with the weights available before this snapshot.
  const Complex y = kern::dot(weights_, x, ops_);
  kern::running_outer_mean(scm_, x, index_, ops_);

  shrinkage_.scv_update(x, y, ops_);
  if (shrinkage_.shrink(ops_).flagged) flags_ |= kFlagRhoDegenerate;

  if (!cg_steering) {
    SteeringUpdate update = estimate_steering(projector_, shrinkage_.shrunk(), steering_, ops_);
    if (update.flagged) flags_ |= kFlagSteeringDegenerate;
    steering_ = std::move(update.steering);
  }

  // Desired power from the steering estimate in force at this point.
  ops_.add(8 * m + 8);
  power_ = estimate_power(steering_, x, noise_power_);
  const double n = static_cast<double>(index_);
  mean_power_ = ((n - 1.0) * mean_power_ + power_) / n;

  StepSize alpha_a;
  if (cg_steering) {
    ops_.add(8 * m * 4 + 8 * m);  // four inner products and x^H a
    alpha_a = cg_alpha_a(p_a_, g_a_, v_, x, steering_, power_, lambda, eta);
    if (alpha_a.flagged) flags_ |= kFlagAlphaA;
    ComplexVec candidate = steering_;
    kern::axpy(alpha_a.value, p_a_, candidate, ops_);
    SteeringUpdate update = estimate_steering(projector_, candidate, steering_, ops_);
    if (update.flagged) flags_ |= kFlagSteeringDegenerate;
    steering_ = std::move(update.steering);
  }
  alpha_a_ = alpha_a.value;

  ops_.add(2 * m);
  const double load = consistent ? settings_.loading * scm_.trace().real() / static_cast<double>(m) : 0.0;
  const double deflation = consistent ? std::min(mean_power_, load) : power_;

  const ComplexVec curvature_dir = apply_curvature(p_v_, deflation, load);
  const double curvature = kern::dot(p_v_, curvature_dir, ops_).real();
  const Complex p_dot_g = kern::dot(p_v_, g_v_, ops_);
  const Complex p_dot_a = consistent ? Complex{} : kern::dot(p_v_, steering_, ops_);
  const StepSize alpha_v = cg_alpha_v_terms(p_dot_g, p_dot_a, curvature, lambda, eta, !consistent);
  if (alpha_v.flagged) flags_ |= kFlagAlphaV;
  alpha_v_ = alpha_v.value;

  const ComplexVec v_prev = v_;
  kern::axpy(alpha_v.value, p_v_, v_, ops_);

  ComplexVec g_v_next;
  if (consistent) {
    // Exact residual of H v = a at the current snapshot; updated below by -alpha H p.
    g_v_next = steering_ - apply_curvature(v_prev, deflation, load);
    ops_.add(2 * m);
  } else {
    g_v_next = (1.0 - lambda) * steering_ + lambda * g_v_;
    ops_.add(6 * m);
    kern::axpy(-kern::dot(x, v_prev, ops_), x, g_v_next, ops_);
  }
  kern::axpy(-alpha_v.value, curvature_dir, g_v_next, ops_);

  if (cg_steering) {
    ComplexVec g_a_next = (1.0 - lambda) * v_ + lambda * g_a_;
    ops_.add(6 * m);
    kern::axpy(power_ * alpha_a.value * kern::dot(v_, p_a_, ops_), v_, g_a_next, ops_);
    kern::axpy(-kern::dot(x, steering_, ops_), x, g_a_next, ops_);
    ratio_a_ = index_ >= 2 ? cg_bound_ratio(p_a_, g_a_next, g_a_) : std::nullopt;
    ops_.add(14 * m);
    const StepSize beta_a = cg_beta(g_a_next, g_a_);
    if (beta_a.flagged) flags_ |= kFlagBetaA;
    p_a_ = g_a_next + beta_a.value * p_a_;
    ops_.add(8 * m);
    g_a_ = std::move(g_a_next);
  } else {
    ratio_a_.reset();
  }

  // The bound ratio is a diagnostic and stays out of the count.
  ratio_v_ = index_ >= 2 ? cg_bound_ratio(p_v_, g_v_next, g_v_) : std::nullopt;
  ops_.add(14 * m);  // Polak-Ribiere: ||g_prev||^2, difference, inner product
  const StepSize beta_v = cg_beta(g_v_next, g_v_);
  if (beta_v.flagged) flags_ |= kFlagBetaV;
  p_v_ = g_v_next + beta_v.value * p_v_;
  ops_.add(8 * m);
  g_v_ = std::move(g_v_next);

  const Complex normalizer = kern::dot(steering_, v_, ops_);
  if (!(std::abs(normalizer) >= kGuard)) {
    flags_ |= kFlagNormalizer;
  } else {
    weights_ = v_;
    kern::scale(weights_, 1.0 / normalizer, ops_);
  }
  return weights_;
}

bool CgBeamformer::state_finite() const {
  return all_finite(weights_) && all_finite(steering_) && all_finite(v_) && all_finite(g_v_) && all_finite(g_a_) &&
         all_finite(p_v_) && all_finite(p_a_) && std::isfinite(power_);
}

// ---------------------------------------------------------------------------

std::unique_ptr<Beamformer> make_beamformer(Algorithm algorithm, const Scenario& scenario,
                                            const BeamformerConfig& config, const SectorProjector& projector) {
  ComplexVec presumed = steering_vector(scenario.desired_doa_deg, scenario.geometry);
  switch (algorithm) {
    case Algorithm::Smi:
      return std::make_unique<SmiBeamformer>(std::move(presumed), config.smi_loading);
    case Algorithm::Locsme:
      return std::make_unique<LocsmeBeamformer>(std::move(presumed), projector, scenario.noise_power,
                                                config.loading);
    case Algorithm::LocsmeCg: {
      CgSettings settings;
      settings.forgetting = config.forgetting;
      settings.eta = config.eta;
      settings.loading = config.loading;
      settings.steering_mode = config.steering_mode;
      settings.recursion = config.cg_recursion;
      return std::make_unique<CgBeamformer>(std::move(presumed), projector, scenario.noise_power, settings);
    }
  }
  throw std::invalid_argument("unknown algorithm");
}

}  // namespace locsme
