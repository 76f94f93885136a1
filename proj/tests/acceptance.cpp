// Acceptance checks. One line per criterion; exit status is nonzero if any fails.

#include "locsme/experiments.hpp"
#include "locsme/shrinkage.hpp"
#include "locsme/sim_harness.hpp"

#include <Eigen/Eigenvalues>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

using namespace locsme;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

ComplexVec random_vec(Rng& rng, int m) {
  ComplexVec v(m);
  for (int k = 0; k < m; ++k) v[k] = complex_gaussian(rng, 1.0);
  return v;
}

// Gaussian elimination with partial pivoting on the augmented system, no Eigen solvers.
std::vector<Complex> brute_force_solve(std::vector<std::vector<Complex>> a, std::vector<Complex> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    }
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const Complex f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<Complex> x(n);
  for (std::size_t k = n; k-- > 0;) {
    Complex s = b[k];
    for (std::size_t c = k + 1; c < n; ++c) s -= a[k][c] * x[c];
    x[k] = s / a[k][k];
  }
  return x;
}

Outcome oracle_equivalence() {
  Rng rng(2024);
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const int m = 4 + t % 13;
    ComplexMat g(m, m);
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < m; ++c) g(r, c) = complex_gaussian(rng, 1.0);
    const ComplexMat r = g * g.adjoint() + 0.1 * ComplexMat::Identity(m, m);
    const ComplexVec a = random_vec(rng, m);

    std::vector<std::vector<Complex>> rows(m, std::vector<Complex>(m));
    std::vector<Complex> rhs(m);
    for (int i = 0; i < m; ++i) {
      rhs[i] = a[i];
      for (int j = 0; j < m; ++j) rows[i][j] = r(i, j);
    }
    const std::vector<Complex> z = brute_force_solve(rows, rhs);
    Complex denom{0.0, 0.0};
    for (int i = 0; i < m; ++i) denom += std::conj(a[i]) * z[i];
    ComplexVec expected(m);
    for (int i = 0; i < m; ++i) expected[i] = z[i] / denom;

    const ComplexVec w = mvdr_weights(r, a);
    worst = std::max(worst, (w - expected).norm() / expected.norm());
  }
  const double elapsed = seconds_since(t0);
  return {worst < 1e-10 && elapsed < 5.0, fmt("max relative error %.2e over 1000 systems, %.2f s", worst, elapsed)};
}

Outcome recursion_matches_batch() {
  Rng rng(7);
  double worst_scv = 0.0;
  double worst_scm = 0.0;
  for (int stream = 0; stream < 20; ++stream) {
    const int m = 4 + stream % 9;
    ShrinkageState st(m);
    ComplexMat scm;
    ComplexVec l_sum = ComplexVec::Zero(m);
    ComplexMat r_sum = ComplexMat::Zero(m, m);
    for (std::uint64_t i = 1; i <= 50; ++i) {
      const ComplexVec x = random_vec(rng, m);
      const Complex y = complex_gaussian(rng, 1.0);
      st.scv_update(x, y);
      scm_update(scm, x, i);
      l_sum += x * std::conj(y);
      r_sum += x * x.adjoint();
    }
    const ComplexVec l = l_sum / 50.0;
    const ComplexMat r = r_sum / 50.0;
    worst_scv = std::max(worst_scv, (st.scv() - l).norm() / l.norm());
    worst_scm = std::max(worst_scm, (scm - r).norm() / r.norm());
  }
  return {worst_scv < 1e-12 && worst_scm < 1e-12,
          fmt("max relative deviation scv %.2e, scm %.2e", worst_scv, worst_scm)};
}

Outcome projector_laws() {
  Scenario s;
  double idem = 0.0;
  double herm = 0.0;
  bool ranks = true;
  for (int p = 2; p <= 6; ++p) {
    const ComplexMat pm = build_projector(s, p).matrix();
    idem = std::max(idem, (pm * pm - pm).norm());
    herm = std::max(herm, (pm - pm.adjoint()).norm());
    Eigen::SelfAdjointEigenSolver<ComplexMat> eig(pm);
    int rank = 0;
    for (int k = 0; k < pm.rows(); ++k) rank += eig.eigenvalues()[k] > 0.5 ? 1 : 0;
    ranks = ranks && rank == p;
  }
  return {idem < 1e-10 && herm < 1e-12 && ranks,
          fmt("max ||P^2-P|| %.2e, max ||P-P^H|| %.2e, ranks ", idem, herm) + (ranks ? "2..6 ok" : "WRONG")};
}

Outcome shrinkage_sanity() {
  const std::array<Algorithm, 2> algs{Algorithm::Locsme, Algorithm::LocsmeCg};
  long checked = 0;
  long rho_bad = 0;
  long convex_bad = 0;
  long non_finite = 0;
  double worst_convex = 0.0;
  for (auto mismatch : {MismatchModel::coherent(), MismatchModel::incoherent()}) {
    for (double snr = -10.0; snr <= 30.0; snr += 5.0) {
      Scenario s;
      s.mismatch = mismatch;
      s.snr_db = snr;
      BeamformerConfig cfg;
      cfg.eta = mismatch.kind == MismatchModel::Kind::Incoherent ? 0.3 : 0.2;
      MonteCarloOptions opt;
      opt.num_trials = 100;
      opt.keep_traces = true;
      const ExperimentResult r = monte_carlo(s, algs, cfg, opt);
      non_finite += static_cast<long>(r.failures.size());
      for (const auto& trial : r.traces) {
        for (const TrialTrace& t : trial) {
          for (const SnapshotRecord& rec : t.snapshots) {
            ++checked;
            if (!(rec.rho >= 0.0 && rec.rho <= 1.0)) ++rho_bad;
            const double tol = 1e-12 * std::max(1.0, rec.scv_norm);
            worst_convex = std::max(worst_convex, rec.convexity_residual / std::max(1.0, rec.scv_norm));
            if (!(rec.convexity_residual <= tol)) ++convex_bad;
            if (!rec.state_finite) ++non_finite;
          }
        }
      }
    }
  }
  return {rho_bad == 0 && convex_bad == 0 && non_finite == 0,
          fmt("%.0f snapshots, rho outside [0,1]: %.0f, convexity violations: %.0f (worst %.2e)", checked, rho_bad,
              convex_bad, worst_convex) +
              fmt(", non-finite/failed: %.0f", non_finite)};
}

const AlgorithmCurve& last_curve(const ExperimentResult& r, Algorithm a) { return r.curve(a); }

Outcome zero_mismatch() {
  Scenario s;
  s.mismatch = MismatchModel::none();
  s.snr_db = 10.0;
  const std::array<Algorithm, 1> algs{Algorithm::LocsmeCg};
  MonteCarloOptions opt;
  opt.num_trials = 100;
  const auto t0 = Clock::now();
  const ExperimentResult r = monte_carlo(s, algs, BeamformerConfig{}, opt);
  const double elapsed = seconds_since(t0);
  const AlgorithmCurve& c = last_curve(r, Algorithm::LocsmeCg);
  const double cosine = c.mean_steering_cosine.back();
  const double gap = c.mean_optimal_sinr_db.back() - c.mean_sinr_db.back();
  return {cosine > 0.99 && gap <= 3.0 && elapsed < 60.0,
          fmt("LOCSME-CG cosine %.5f, %.3f dB below optimum, %.1f s", cosine, gap, elapsed)};
}

ExperimentResult coherent_run(double snr) {
  Scenario s;
  s.mismatch = MismatchModel::coherent();
  s.snr_db = snr;
  BeamformerConfig cfg;
  cfg.forgetting = 0.95;
  cfg.eta = 0.2;
  const std::array<Algorithm, 3> algs{Algorithm::Smi, Algorithm::Locsme, Algorithm::LocsmeCg};
  MonteCarloOptions opt;
  opt.num_trials = 100;
  return monte_carlo(s, algs, cfg, opt);
}

Outcome coherent_ordering() {
  const ExperimentResult r = coherent_run(10.0);
  const double smi = r.curve(Algorithm::Smi).mean_sinr_db.back();
  const double locsme = r.curve(Algorithm::Locsme).mean_sinr_db.back();
  const double cg = r.curve(Algorithm::LocsmeCg).mean_sinr_db.back();
  return {cg - smi >= 2.0 && std::abs(locsme - cg) <= 2.0,
          fmt("SMI %.3f, LOCSME %.3f, LOCSME-CG %.3f dB (CG-SMI %.3f dB)", smi, locsme, cg, cg - smi) +
              fmt(", |LOCSME-CG| %.3f dB", std::abs(locsme - cg))};
}

Outcome high_snr() {
  const ExperimentResult r = coherent_run(30.0);
  const double smi = r.curve(Algorithm::Smi).mean_sinr_db.back();
  const double cg = r.curve(Algorithm::LocsmeCg).mean_sinr_db.back();
  return {cg - smi >= 5.0, fmt("SMI %.3f, LOCSME-CG %.3f dB, margin %.3f dB", smi, cg, cg - smi)};
}

Outcome flop_formulas() {
  int mismatches = 0;
  int checked = 0;
  for (long long m : {1LL, 12LL, 64LL}) {
    const long long m2 = m * m;
    const long long m3 = m2 * m;
    const long long m35 = std::llround(std::pow(static_cast<long double>(m), 3.5L));
    const std::vector<std::pair<const char*, long long>> expected = {
        {"LOCSME", 4 * m3 + 3 * m2 + 20 * m},   {"LOCSME-SG", 15 * m2 + 30 * m},
        {"SQP", m35 + 7 * m3 + 5 * m2 + 3 * m}, {"LOCME", 2 * m3 + 4 * m2 + 5 * m},
        {"LCWC", 100 * m2 + 350 * m},           {"LOCSME-CG", 13 * m2 + 77 * m},
    };
    for (const auto& [name, value] : expected) {
      ++checked;
      if (flop_count(name, m) != value) ++mismatches;
    }
  }
  const bool spot = flop_count("LOCSME-CG", 12) == 2796;
  return {mismatches == 0 && spot, fmt("%.0f of %.0f entries exact, LOCSME-CG(12) = %.0f", checked - mismatches,
                                       checked, static_cast<double>(flop_count("LOCSME-CG", 12)))};
}

std::uint64_t steady_ops(int m) {
  Scenario s;
  s.geometry.num_sensors = m;
  s.mismatch = MismatchModel::coherent();
  const SectorProjector proj = build_projector(s, 3);
  CgBeamformer cg(steering_vector(s.desired_doa_deg, s.geometry), proj, s.noise_power, CgSettings{});
  SnapshotSource src(s, 11);
  for (int i = 0; i < 20; ++i) cg.step(src.next().x);
  cg.reset_ops();
  cg.step(src.next().x);
  return cg.ops().count();
}

Outcome complexity_scaling() {
  const std::uint64_t a = steady_ops(12);
  const std::uint64_t b = steady_ops(24);
  const double ratio = static_cast<double>(b) / static_cast<double>(a);
  const double table = static_cast<double>(flop_count("LOCSME-CG", 24)) / static_cast<double>(flop_count("LOCSME-CG", 12));
  return {ratio >= 3.5 && ratio <= 4.5,
          fmt("ops M=12: %.0f, M=24: %.0f, ratio %.4f (13M^2+77M gives %.4f)", static_cast<double>(a),
              static_cast<double>(b), ratio, table)};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome determinism() {
  const auto dir = std::filesystem::temp_directory_path();
  const std::string tag = std::to_string(::getpid());
  const auto first = dir / ("locsme_accept_" + tag + "_a.csv");
  const auto second = dir / ("locsme_accept_" + tag + "_b.csv");
  int status = 0;
  for (const auto& path : {first, second}) {
    const std::string cmd = std::string(LOCSME_CLI_PATH) + " run --seed 12345 --output " + path.string();
    status |= std::system(cmd.c_str());
  }
  const std::string a = slurp(first);
  const std::string b = slurp(second);
  std::filesystem::remove(first);
  std::filesystem::remove(second);
  const bool same = status == 0 && !a.empty() && a == b;
  return {same, fmt("two runs, %.0f bytes each, identical: ", static_cast<double>(a.size())) + (same ? "yes" : "no")};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"oracle equivalence", oracle_equivalence},
      {"recursion matches batch", recursion_matches_batch},
      {"projector laws", projector_laws},
      {"shrinkage sanity", shrinkage_sanity},
      {"zero-mismatch convergence", zero_mismatch},
      {"coherent ordering", coherent_ordering},
      {"high-SNR robustness", high_snr},
      {"flop formulas", flop_formulas},
      {"complexity scaling", complexity_scaling},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o{false, ""};
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s [%zu] %s: %s\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first, o.detail.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
