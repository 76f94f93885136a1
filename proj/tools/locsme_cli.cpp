// Command-line front end: run, sweep-snr, sweep-snapshots, flops.

#include "locsme/experiments.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

struct Overrides {
  std::optional<std::string> config_path;
  std::vector<std::string> settings;  // raw key=value
  // Shorthand flags, mapped onto config keys.
  std::vector<std::pair<std::string, std::string>> flags;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option_function<std::string>("-c,--config", [&o](const std::string& p) { o.config_path = p; },
                                        "key = value config file");
  cmd->add_option("--set", o.settings, "override a config key (key=value), repeatable");
  const auto shorthand = [cmd, &o](const std::string& flag, const std::string& key, const std::string& help) {
    cmd->add_option_function<std::string>(flag, [&o, key](const std::string& v) { o.flags.emplace_back(key, v); },
                                          help);
  };
  shorthand("-o,--output", "output", "CSV output file (default stdout)");
  shorthand("--seed", "seed", "base seed");
  shorthand("--trials", "trials", "Monte-Carlo trials");
  shorthand("--snapshots", "snapshots", "snapshots per trial");
  shorthand("--threads", "threads", "worker threads (default LOCSME_THREADS or 1)");
  shorthand("--m", "m", "number of sensors");
  shorthand("--snr", "snr_db", "input SNR in dB");
  shorthand("--mismatch", "mismatch", "none | coherent | incoherent");
  shorthand("--algorithms", "algorithms", "comma-separated: SMI,LOCSME,LOCSME-CG");
  shorthand("--lambda", "lambda", "forgetting factor");
  shorthand("--eta", "eta", "CG step-size parameter");
  shorthand("--loading", "loading", "relative diagonal loading");
}

locsme::RunConfig resolve(const Overrides& o) {
  locsme::KeyValues overrides;
  for (const std::string& s : o.settings) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw locsme::ConfigError("", "--set expects key=value, got '" + s + "'");
    }
    overrides.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
  // flags after --set so explicit flags win
  overrides.insert(overrides.end(), o.flags.begin(), o.flags.end());
  if (o.config_path) return locsme::parse_config_file(*o.config_path, overrides);
  std::istringstream empty;
  return locsme::parse_config(empty, overrides);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LOCSME / LOCSME-CG beamformer simulator"};
  app.require_subcommand(1);

  Overrides run_o, snr_o, snap_o, flops_o;
  CLI::App* run = app.add_subcommand("run", "per-snapshot mean SINR curves");
  add_common(run, run_o);
  CLI::App* sweep_snr = app.add_subcommand("sweep-snr", "final-snapshot SINR over an SNR grid");
  add_common(sweep_snr, snr_o);
  sweep_snr->add_option_function<std::string>(
      "--grid", [&snr_o](const std::string& v) { snr_o.flags.emplace_back("snr_grid", v); }, "start:stop:step in dB");
  CLI::App* sweep_snap = app.add_subcommand("sweep-snapshots", "SINR at selected snapshot indices");
  add_common(sweep_snap, snap_o);
  sweep_snap->add_option_function<std::string>(
      "--indices", [&snap_o](const std::string& v) { snap_o.flags.emplace_back("snapshot_indices", v); },
      "comma-separated 1-based snapshot indices");
  CLI::App* flops = app.add_subcommand("flops", "analytic per-snapshot flop counts");
  add_common(flops, flops_o);
  flops->add_option_function<std::string>(
      "--grid", [&flops_o](const std::string& v) { flops_o.flags.emplace_back("flops_m", v); },
      "comma-separated sensor counts");
  bool list_keys = false;
  app.add_flag("--list-keys", list_keys, "print recognised config keys and exit");
  app.require_subcommand(0, 1);

  CLI11_PARSE(app, argc, argv);

  if (list_keys) {
    for (const std::string& key : locsme::config_keys()) std::cout << key << '\n';
    return 0;
  }

  try {
    if (run->parsed()) return locsme::cmd_run(resolve(run_o), std::cout, std::cerr);
    if (sweep_snr->parsed()) return locsme::cmd_sweep_snr(resolve(snr_o), std::cout, std::cerr);
    if (sweep_snap->parsed()) return locsme::cmd_sweep_snapshots(resolve(snap_o), std::cout, std::cerr);
    if (flops->parsed()) return locsme::cmd_flops(resolve(flops_o), std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  std::cerr << app.help();
  return 1;
}
