#include "locsme/experiments.hpp"

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace locsme;

namespace {

std::vector<Algorithm> to_algorithms(const std::vector<std::string>& names) {
  std::vector<Algorithm> out;
  for (const auto& n : names) out.push_back(parse_algorithm(n));
  return out;
}

py::dict trace_dict(const TrialTrace& t) {
  const auto n = t.snapshots.size();
  py::array_t<double> sinr(n), optimal(n), cosine(n), rho(n);
  py::array_t<std::uint32_t> flags(n);
  auto s = sinr.mutable_unchecked<1>();
  auto o = optimal.mutable_unchecked<1>();
  auto c = cosine.mutable_unchecked<1>();
  auto r = rho.mutable_unchecked<1>();
  auto f = flags.mutable_unchecked<1>();
  for (std::size_t i = 0; i < n; ++i) {
    const SnapshotRecord& rec = t.snapshots[i];
    s(i) = rec.sinr_db;
    o(i) = rec.optimal_sinr_db;
    c(i) = rec.steering_cosine;
    r(i) = rec.rho;
    f(i) = rec.flags;
  }
  py::dict d;
  d["algorithm"] = std::string(algorithm_name(t.algorithm));
  d["seed"] = t.seed;
  d["sinr_db"] = sinr;
  d["optimal_sinr_db"] = optimal;
  d["steering_cosine"] = cosine;
  d["rho"] = rho;
  d["flags"] = flags;
  return d;
}

std::string csv_for(const std::string& command, const RunConfig& config) {
  std::vector<CsvRow> rows;
  if (command == "run") {
    rows = run_rows(config);
  } else if (command == "sweep-snr") {
    rows = sweep_snr_rows(config);
  } else if (command == "sweep-snapshots") {
    rows = sweep_snapshot_rows(config);
  } else if (command == "flops") {
    rows = flops_rows(config);
  } else {
    throw py::value_error("unknown command '" + command + "'");
  }
  std::ostringstream out;
  write_csv(out, rows);
  return out.str();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "LOCSME and LOCSME-CG robust beamformers";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ScenarioError>(m, "ScenarioError", PyExc_ValueError);
  py::register_exception<SolveError>(m, "SolveError", PyExc_ArithmeticError);
  py::register_exception<QuorumError>(m, "QuorumError", PyExc_RuntimeError);

  py::class_<ArrayGeometry>(m, "ArrayGeometry")
      .def(py::init([](int num_sensors, double spacing) { return ArrayGeometry{num_sensors, spacing}; }),
           py::arg("num_sensors") = 12, py::arg("spacing") = 0.5)
      .def_readwrite("num_sensors", &ArrayGeometry::num_sensors)
      .def_readwrite("spacing", &ArrayGeometry::spacing);

  py::class_<MismatchModel>(m, "MismatchModel")
      .def_static("none", &MismatchModel::none)
      .def_static("coherent", &MismatchModel::coherent, py::arg("paths") = 4, py::arg("mean_deg") = 10.0,
                  py::arg("std_deg") = 2.0)
      .def_static("incoherent", &MismatchModel::incoherent, py::arg("paths") = 4, py::arg("mean_deg") = 10.0,
                  py::arg("std_deg") = 2.0)
      .def_property_readonly("kind", [](const MismatchModel& mm) { return to_string(mm.kind); })
      .def_readwrite("num_paths", &MismatchModel::num_paths)
      .def_readwrite("angle_mean_deg", &MismatchModel::angle_mean_deg)
      .def_readwrite("angle_std_deg", &MismatchModel::angle_std_deg);

  py::class_<Scenario>(m, "Scenario")
      .def(py::init<>())
      .def_readwrite("geometry", &Scenario::geometry)
      .def_readwrite("desired_doa_deg", &Scenario::desired_doa_deg)
      .def_readwrite("interferer_doas_deg", &Scenario::interferer_doas_deg)
      .def_readwrite("snr_db", &Scenario::snr_db)
      .def_readwrite("sir_db", &Scenario::sir_db)
      .def_readwrite("noise_power", &Scenario::noise_power)
      .def_readwrite("mismatch", &Scenario::mismatch)
      .def_readwrite("sector_halfwidth_deg", &Scenario::sector_halfwidth_deg)
      .def_readwrite("num_snapshots", &Scenario::num_snapshots)
      .def_readwrite("seed", &Scenario::seed)
      .def("validate", &Scenario::validate);

  py::class_<BeamformerConfig>(m, "BeamformerConfig")
      .def(py::init<>())
      .def_readwrite("loading", &BeamformerConfig::loading)
      .def_readwrite("smi_loading", &BeamformerConfig::smi_loading)
      .def_readwrite("forgetting", &BeamformerConfig::forgetting)
      .def_readwrite("eta", &BeamformerConfig::eta)
      .def_readwrite("subspace_rank", &BeamformerConfig::subspace_rank)
      .def_readwrite("grid_points", &BeamformerConfig::grid_points);

  m.def("steering_vector", &steering_vector, py::arg("theta_deg"), py::arg("geometry") = ArrayGeometry{});
  m.def("true_inc_matrix", &true_inc_matrix, py::arg("scenario"));
  m.def("mvdr_weights", &mvdr_weights, py::arg("covariance"), py::arg("steering"));
  m.def("build_sector_matrix", &build_sector_matrix, py::arg("center_deg"), py::arg("halfwidth_deg"),
        py::arg("geometry") = ArrayGeometry{}, py::arg("grid_points") = 180);
  m.def(
      "projector", [](const ComplexMat& c, int rank) { return build_projector(c, rank).matrix(); },
      py::arg("sector_matrix"), py::arg("rank"));
  m.def(
      "shrinkage_coefficient",
      [](const ComplexVec& d, const ComplexVec& l, std::uint64_t i) { return shrinkage_coefficient(d, l, i); },
      py::arg("d_prev"), py::arg("l_prev"), py::arg("i"));
  m.def("estimate_power", &estimate_power, py::arg("steering"), py::arg("x"), py::arg("noise_power"));
  m.def("output_sinr_db", &output_sinr_db, py::arg("weights"), py::arg("steering"), py::arg("inc"),
        py::arg("desired_power"));
  m.def("optimal_sinr_db", &optimal_sinr_db, py::arg("steering"), py::arg("inc"), py::arg("desired_power"));
  m.def(
      "flop_count", [](const std::string& name, std::int64_t m_) { return flop_count(name, m_); }, py::arg("name"),
      py::arg("m"));

  m.def(
      "run_trial",
      [](const Scenario& s, const std::string& algorithm, const BeamformerConfig& cfg, std::uint64_t seed) {
        TrialTrace t;
        {
          py::gil_scoped_release release;
          t = run_trial(s, parse_algorithm(algorithm), cfg, seed);
        }
        return trace_dict(t);
      },
      py::arg("scenario"), py::arg("algorithm"), py::arg("config") = BeamformerConfig{}, py::arg("seed") = 1);

  m.def(
      "monte_carlo",
      [](const Scenario& s, const std::vector<std::string>& algorithms, const BeamformerConfig& cfg, int trials,
         int threads) {
        const auto algs = to_algorithms(algorithms);
        MonteCarloOptions opt;
        opt.num_trials = trials;
        opt.threads = threads;
        ExperimentResult r;
        {
          py::gil_scoped_release release;
          r = monte_carlo(s, algs, cfg, opt);
        }
        py::dict out;
        for (const AlgorithmCurve& c : r.curves) {
          py::dict d;
          d["mean_sinr_db"] = py::array_t<double>(c.mean_sinr_db.size(), c.mean_sinr_db.data());
          d["optimal_sinr_db"] = py::array_t<double>(c.mean_optimal_sinr_db.size(), c.mean_optimal_sinr_db.data());
          d["steering_cosine"] = py::array_t<double>(c.mean_steering_cosine.size(), c.mean_steering_cosine.data());
          d["trials"] = py::array_t<int>(c.trials.size(), c.trials.data());
          d["mean_bound_ratio"] = c.mean_bound_ratio;
          out[py::str(std::string(algorithm_name(c.algorithm)))] = d;
        }
        out["failures"] = static_cast<int>(r.failures.size());
        return out;
      },
      py::arg("scenario"), py::arg("algorithms") = std::vector<std::string>{"SMI", "LOCSME", "LOCSME-CG"},
      py::arg("config") = BeamformerConfig{}, py::arg("trials") = 100, py::arg("threads") = 0);

  m.def(
      "csv",
      [](const std::string& command, const std::string& config_text, const std::map<std::string, std::string>& set) {
        const KeyValues overrides(set.begin(), set.end());
        const RunConfig cfg = parse_config_string(config_text, overrides);
        py::gil_scoped_release release;
        return csv_for(command, cfg);
      },
      py::arg("command"), py::arg("config") = "", py::arg("overrides") = std::map<std::string, std::string>{},
      "Run a CLI subcommand (run, sweep-snr, sweep-snapshots, flops) and return its CSV text.");
}
