#include "locsme/experiments.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

using namespace locsme;

namespace {

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

std::vector<std::string> fields_of(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream in(line);
  std::string f;
  while (std::getline(in, f, ',')) out.push_back(f);
  return out;
}

// Every data row: 6 columns, numeric fields parse fully.
void check_schema(const std::string& csv) {
  const auto lines = lines_of(csv);
  REQUIRE(!lines.empty());
  CHECK(lines.front() == kCsvHeader);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = fields_of(lines[i]);
    REQUIRE(f.size() == 6);
    CHECK_FALSE(f[0].empty());
    for (std::size_t c = 1; c < 6; ++c) {
      char* end = nullptr;
      std::strtod(f[c].c_str(), &end);
      CHECK(*end == '\0');
    }
  }
  CHECK(csv.find('\r') == std::string::npos);
  CHECK(csv.back() == '\n');
}

RunConfig small_config(const std::string& extra = "") {
  return parse_config_string("trials = 3\nsnapshots = 20\n" + extra);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("locsme_test_" + std::to_string(::getpid()) + "_" + name);
}

int run_cli(const std::string& args, const std::filesystem::path& out) {
  const std::string cmd = std::string(LOCSME_CLI_PATH) + " " + args + " > " + out.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("empty config yields the defaults") {
  const RunConfig c = parse_config_string("");
  CHECK(c.scenario.num_sensors() == 12);
  CHECK(c.scenario.geometry.spacing == 0.5);
  CHECK(c.scenario.desired_doa_deg == 10.0);
  CHECK(c.scenario.interferer_doas_deg == std::vector<double>{30.0, 50.0});
  CHECK(c.scenario.sir_db == 0.0);
  CHECK(c.scenario.sector_halfwidth_deg == 5.0);
  CHECK(c.scenario.num_snapshots == 300);
  CHECK(c.scenario.mismatch.kind == MismatchModel::Kind::Coherent);
  CHECK(c.num_trials == 100);
  CHECK(c.beamformer.forgetting == 0.95);
  CHECK(c.beamformer.eta == 0.2);
  CHECK(c.algorithms.size() == 3);
  CHECK(c.snr_grid.points().size() == 9);
}

TEST_CASE("eta default follows the scattering model unless set") {
  CHECK(parse_config_string("mismatch = incoherent").beamformer.eta == 0.3);
  CHECK(parse_config_string("mismatch = none").beamformer.eta == 0.2);
  CHECK(parse_config_string("mismatch = incoherent\neta = 0.1").beamformer.eta == 0.1);
  CHECK(parse_config_string("mismatch = incoherent", {{"eta", "0.25"}}).beamformer.eta == 0.25);
}

TEST_CASE("typed validation error names the key") {
  try {
    parse_config_string("snr_db = abc");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.key() == "snr_db");
    CHECK(std::string(e.what()).find("snr_db") != std::string::npos);
  }
}

TEST_CASE("constraint violation M >= 2") {
  try {
    parse_config_string("m = 1");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.key() == "m");
    CHECK(std::string(e.what()).find("M >= 2") != std::string::npos);
  }
}

TEST_CASE("unknown keys, malformed lines and duplicates are rejected") {
  try {
    parse_config_string("snaphots = 10");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.key() == "snaphots");
    CHECK(std::string(e.what()).find("unknown key") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config_string("just words"), ConfigError);
  CHECK_THROWS_AS(parse_config_string("seed = 1\nseed = 2"), ConfigError);
  CHECK_THROWS_AS(parse_config_string("algorithms = SMI,MUSIC"), ConfigError);
  CHECK_THROWS_AS(parse_config_string("mismatch = partial"), ConfigError);
  CHECK_THROWS_AS(parse_config_string("snr_grid = 0:10"), ConfigError);
  CHECK_THROWS_AS(parse_config_string("snr_grid = 10:0:5"), ConfigError);
  CHECK_THROWS_AS(parse_config_string("trials = 0"), ConfigError);
  CHECK_THROWS_AS(parse_config_string("eta_by_snr = 10"), ConfigError);
  CHECK_THROWS_AS(parse_config_string("lambda = 1.5"), ConfigError);
  CHECK_THROWS_AS(parse_config_string("seed = -3"), ConfigError);
}

TEST_CASE("comments, whitespace and lists parse") {
  const RunConfig c = parse_config_string(
      "# experiment\n"
      "  m = 8   # fewer sensors\n"
      "\n"
      "interferer_doas = -20, 40.5\n"
      "algorithms = LOCSME-CG, SMI\n"
      "snr_grid = 0:20:10\n"
      "eta_by_snr = 20:0.3, 0:0.1\n"
      "lambda_by_snr = 20:0.9\n"
      "scatter_angle_law = gaussian\n"
      "steering_mode = cg-sv\n");
  CHECK(c.scenario.num_sensors() == 8);
  CHECK(c.scenario.interferer_doas_deg == std::vector<double>{-20.0, 40.5});
  CHECK(c.algorithms == std::vector<Algorithm>{Algorithm::LocsmeCg, Algorithm::Smi});
  CHECK(c.snr_grid.points() == std::vector<double>{0.0, 10.0, 20.0});
  CHECK(c.beamformer_at_snr(20.0).eta == 0.3);
  CHECK(c.beamformer_at_snr(20.0).forgetting == 0.9);
  CHECK(c.beamformer_at_snr(10.0).eta == 0.2);
  CHECK(c.beamformer_at_snr(0.0).eta == 0.1);
  CHECK(c.scenario.mismatch.angle_law == AngleLaw::Gaussian);
  CHECK(c.beamformer.steering_mode == SteeringMode::CgSv);
}

TEST_CASE("overrides win over the file") {
  const RunConfig c = parse_config_string("seed = 5\ntrials = 10\n", {{"seed", "9"}});
  CHECK(c.scenario.seed == 9);
  CHECK(c.num_trials == 10);
  CHECK_THROWS_AS(parse_config_string("", {{"nope", "1"}}), ConfigError);
}

TEST_CASE("every documented key is accepted") {
  CHECK(config_keys().size() == 32);
  for (const std::string& k : {"m", "snr_grid", "eta_by_snr", "threads", "cg_recursion", "flops_m"}) {
    CHECK(std::find(config_keys().begin(), config_keys().end(), k) != config_keys().end());
  }
}

TEST_CASE("number formatting") {
  CHECK(format_number(0.0) == "0");
  CHECK(format_number(-0.0) == "0");
  CHECK(format_number(12.0) == "12");
  CHECK(format_number(1.0 / 3.0) == "0.333333");
  CHECK(format_number(-12.3456789) == "-12.3457");
  CHECK(format_number(1234567.0) == "1.23457e+06");
  CHECK(format_number(std::nan("")) == "nan");
  CHECK(format_number(-std::nan("")) == "nan");
}

TEST_CASE("flops command emits the LOCSME-CG row") {
  RunConfig c = parse_config_string("flops_m = 12");
  std::ostringstream out;
  std::ostringstream err;
  REQUIRE(cmd_flops(c, out, err) == 0);
  check_schema(out.str());
  CHECK(out.str().find("\nLOCSME-CG,12,2796,nan,nan,0\n") != std::string::npos);
  CHECK(out.str().find("\nLOCSME,12,7584,") != std::string::npos);
  CHECK(lines_of(out.str()).size() == 7);
  c = parse_config_string("flops_m = 64");
  std::ostringstream big;
  cmd_flops(c, big, err);
  CHECK(big.str().find("\nLOCSME,64,1062144,") != std::string::npos);
}

TEST_CASE("run with one trial and one snapshot gives one row per algorithm") {
  const RunConfig c = parse_config_string("trials = 1\nsnapshots = 1");
  std::ostringstream out;
  std::ostringstream err;
  REQUIRE(cmd_run(c, out, err) == 0);
  check_schema(out.str());
  const auto lines = lines_of(out.str());
  REQUIRE(lines.size() == 4);
  CHECK(lines[1].rfind("SMI,1,", 0) == 0);
  CHECK(lines[2].rfind("LOCSME,1,", 0) == 0);
  CHECK(lines[3].rfind("LOCSME-CG,1,", 0) == 0);
}

TEST_CASE("default SNR sweep has nine points per algorithm") {
  const RunConfig c = small_config();
  const auto rows = sweep_snr_rows(c);
  CHECK(rows.size() == 27);
  CHECK(rows.front().snapshot_or_snr == -10.0);
  CHECK(rows[8].snapshot_or_snr == 30.0);
  CHECK(rows[9].algorithm == "LOCSME");
  std::ostringstream out;
  write_csv(out, rows);
  check_schema(out.str());
}

TEST_CASE("per-SNR parameters reach the beamformers") {
  const RunConfig base = small_config("snr_grid = 10:10:5\nalgorithms = LOCSME-CG\n");
  const RunConfig tuned = small_config("snr_grid = 10:10:5\nalgorithms = LOCSME-CG\neta_by_snr = 10:0.45\n");
  CHECK(sweep_snr_rows(base).front().mean_sinr_db != sweep_snr_rows(tuned).front().mean_sinr_db);
}

TEST_CASE("snapshot sweep reports the requested indices") {
  const RunConfig c = small_config("snapshot_indices = 1, 5, 20\n");
  const auto rows = sweep_snapshot_rows(c);
  REQUIRE(rows.size() == 9);
  CHECK(rows[0].snapshot_or_snr == 1.0);
  CHECK(rows[2].snapshot_or_snr == 20.0);
  // matches the per-snapshot run curve
  const auto run = run_rows(c);
  CHECK(rows[1].mean_sinr_db == run[4].mean_sinr_db);
  CHECK_THROWS_AS(sweep_snapshot_rows(small_config("snapshot_indices = 5, 21\n")), ConfigError);
  CHECK_THROWS_AS(small_config("snapshot_indices = 5, 3\n"), ConfigError);
}

TEST_CASE("repeated runs are byte-identical") {
  const RunConfig c = small_config("seed = 77\n");
  std::ostringstream a;
  std::ostringstream b;
  std::ostringstream err;
  cmd_run(c, a, err);
  cmd_run(c, b, err);
  CHECK(a.str() == b.str());
}

TEST_CASE("failed trial quorum gives a nonzero exit") {
  const RunConfig c = parse_config_string("trials = 2\nsnapshots = 5\nsmi_loading = 0\n");
  std::ostringstream out;
  std::ostringstream err;
  CHECK(cmd_run(c, out, err) == 3);
  CHECK(err.str().find("failed") != std::string::npos);
  CHECK(out.str().empty());
  CHECK_THROWS_AS(run_rows(c), QuorumError);
}

TEST_CASE("output path is honoured") {
  const auto path = temp_path("run.csv");
  RunConfig c = small_config();
  c.output = path.string();
  std::ostringstream out;
  std::ostringstream err;
  REQUIRE(cmd_flops(c, out, err) == 0);
  CHECK(out.str().empty());
  check_schema(slurp(path));
  std::filesystem::remove(path);
}

TEST_CASE("command-line tool: subcommands, flags over config, errors") {
  const auto cfg = temp_path("cli.cfg");
  const auto out = temp_path("cli.out");
  {
    std::ofstream f(cfg);
    f << "trials = 2\nsnapshots = 7\nseed = 3\n";
  }
  CHECK(run_cli("flops --grid 12", out) == 0);
  CHECK(slurp(out).find("LOCSME-CG,12,2796,nan,nan,0") != std::string::npos);

  CHECK(run_cli("run --config " + cfg.string() + " --snapshots 2", out) == 0);
  const std::string run = slurp(out);
  check_schema(run);
  CHECK(lines_of(run).size() == 1 + 3 * 2);
  CHECK(run.find(",2\n") != std::string::npos);  // trials from the file

  CHECK(run_cli("run --config " + cfg.string() + " --set snapshots=3 --snapshots 2", out) == 0);
  CHECK(lines_of(slurp(out)).size() == 1 + 3 * 2);

  CHECK(run_cli("run --set bogus=1", out) != 0);
  CHECK(slurp(out).find("bogus") != std::string::npos);
  CHECK(run_cli("sweep-snr --config " + cfg.string() + " --snr abc", out) != 0);
  CHECK(slurp(out).find("snr_db") != std::string::npos);
  CHECK(run_cli("run --config /nonexistent/file.cfg", out) != 0);

  CHECK(run_cli("sweep-snapshots --config " + cfg.string() + " --indices 1,7", out) == 0);
  CHECK(lines_of(slurp(out)).size() == 1 + 3 * 2);
  std::filesystem::remove(cfg);
  std::filesystem::remove(out);
}
