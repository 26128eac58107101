// lsvqc command-line driver: compile, dynamics, gf, resources.
//
// Exit codes: 0 ok, 1 config error, 2 numerical stall, 3 resource cap exceeded.

#include <CLI11.hpp>
#include <Eigen/Core>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "lsvqc/experiment.hpp"

namespace fs = std::filesystem;
using namespace lsvqc;

namespace {

bool g_verbose = false;

void log(const std::string& msg) {
  if (g_verbose) std::cerr << "[lsvqc] " << msg << '\n';
}

std::string num(double x) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return ec == std::errc{} ? std::string(buf, p) : "nan";
}

struct Csv {
  std::ofstream out;
  Csv(const fs::path& path, const ExperimentConfig& e, const std::vector<std::string>& header) : out(path) {
    if (!out) fail("cannot write " + path.string(), ErrorKind::config);
    out << "# lsvqc " << LSVQC_VERSION << " command=" << e.command << " config_hash=" << e.hash() << " seed=" << e.seed
        << '\n';
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << '\n';
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << '\n';
  }
};

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) fail("cannot write " + path.string(), ErrorKind::config);
  out << j.dump(2) << '\n';
}

json header_json(const ExperimentConfig& e) {
  return {{"version", LSVQC_VERSION}, {"command", e.command}, {"config_hash", e.hash()}, {"seed", e.seed}};
}

int exit_for(const CompilationResult& r) {
  if (!stalled(r)) return 0;
  std::cerr << "lsvqc: optimizer stalled (status " << to_string(r.status) << ", |g| = " << r.grad_norm << ")\n";
  return 2;
}

struct Compiled {
  std::optional<CompileRun> lsvqc, lvqc;
  ParamCircuit circuit;
  std::optional<ParamCircuit> lvqc_circuit;
  int code = 0;
};

// Inline compile, or load V(theta*) from a previous compile result.
Compiled compiled_circuits(const ExperimentConfig& e, const GroupedHamiltonian& h, const PreparedState& st,
                           const fs::path& out, bool timing) {
  Compiled c;
  if (!e.circuit_file.empty()) {
    log("loading circuit " + e.circuit_file);
    c.circuit = load_compiled(e, h);
    return c;
  }
  log("compiling (" + to_string(e.compile.mode) + ", L_tilde=" + std::to_string(e.compile.L_tilde) + ")");
  c.lsvqc = run_compile(e, h, st, false);
  c.circuit = c.lsvqc->circuit;
  json j = compile_json(e, *c.lsvqc);
  if (timing) j["wall_seconds"] = c.lsvqc->result.wall_seconds;
  write_json(out / "compile_result.json", j);
  log("final cost " + num(c.lsvqc->result.final_cost));
  c.code = exit_for(c.lsvqc->result);
  if (e.compile.lvqc_baseline) {
    log("compiling LVQC baseline");
    c.lvqc = run_compile(e, h, st, true);
    c.lvqc_circuit = c.lvqc->circuit;
    json k = compile_json(e, *c.lvqc);
    if (timing) k["wall_seconds"] = c.lvqc->result.wall_seconds;
    write_json(out / "compile_result_lvqc.json", k);
    c.code = std::max(c.code, exit_for(c.lvqc->result));
  }
  return c;
}

json state_json(const ExperimentConfig& e, const PreparedState& st) {
  json j = {{"prep", e.state.prep}};
  if (st.vqe) {
    j["vqe_energy"] = st.vqe->energy;
    j["vqe_initial_energy"] = st.vqe->initial_energy;
    j["vqe_iterations"] = st.vqe->opt.iterations;
    j["vqe_status"] = to_string(st.vqe->opt.status);
  }
  return j;
}

int cmd_compile(const ExperimentConfig& e, const fs::path& out, bool timing) {
  const GroupedHamiltonian h = build_model(e.model, e.model.L);
  const PreparedState st = prepare_state(e, h);
  Compiled c = compiled_circuits(e, h, st, out, timing);
  write_json(out / "circuit.json", circuit_json(freeze(c.lsvqc->problem.ansatz, c.lsvqc->result.theta), {}));
  return c.code;
}

int cmd_dynamics(const ExperimentConfig& e, const fs::path& out, bool timing) {
  const GroupedHamiltonian h = build_model(e.model, e.model.L);
  const PreparedState st = prepare_state(e, h);
  Compiled c = compiled_circuits(e, h, st, out, timing);
  log("running dynamics for " + std::to_string(e.dynamics.n_steps) + " steps");
  const DynamicsResult d = run_dynamics(e, h, st.state, c.circuit, c.lvqc_circuit ? &*c.lvqc_circuit : nullptr);

  std::vector<std::string> header{"t"};
  for (const auto& col : d.columns) header.push_back(col.name);
  Csv csv(out / "dynamics.csv", e, header);
  for (std::size_t n = 0; n < d.t.size(); ++n) {
    std::vector<std::string> row{num(d.t[n])};
    for (const auto& col : d.columns) row.push_back(num(col.v[n]));
    csv.row(row);
  }
  json s = header_json(e);
  s["observable"] = e.dynamics.observable;
  s["reference"] = e.dynamics.reference;
  s["metric"] = d.metric_name;
  s["state"] = state_json(e, st);
  for (const auto& [k, v] : d.metric) s["values"][k] = v;
  if (d.compression)
    s["depth_compression"] = {{"ratio", d.compression->ratio},
                              {"trotter_depth", d.compression->trotter_depth},
                              {"lsvqc_depth", e.compile.depth},
                              {"lower_bound", d.compression->lower_bound},
                              {"worse_than_all", d.compression->worse_than_all},
                              {"monotone", d.compression->monotone}};
  if (d.compression && !d.compression->monotone) std::cerr << "lsvqc: warning: Trotter ladder is not monotone in r\n";
  write_json(out / "dynamics_summary.json", s);
  return c.code;
}

int cmd_gf(const ExperimentConfig& e, const fs::path& out, bool timing) {
  const GroupedHamiltonian h = build_model(e.model, e.model.L);
  log("preparing ground state (" + e.state.prep + ")");
  const PreparedState st = prepare_state(e, h);
  Compiled c = compiled_circuits(e, h, st, out, timing);
  log("computing Green's functions");
  const GfResult g = run_gf(e, h, st, c.circuit, c.lvqc_circuit ? &*c.lvqc_circuit : nullptr);

  for (int m : e.gf.momenta) {
    std::vector<std::string> hdr{"t"};
    for (const auto& p : g.paths) {
      hdr.push_back(p.name + "_re");
      hdr.push_back(p.name + "_im");
    }
    Csv gcsv(out / ("gf_k" + std::to_string(m) + ".csv"), e, hdr);
    const auto& t = g.paths.front().g_k.at(m).t;
    for (std::size_t n = 0; n < t.size(); ++n) {
      std::vector<std::string> row{num(t[n])};
      for (const auto& p : g.paths) {
        row.push_back(num(p.g_k.at(m).v[n].real()));
        row.push_back(num(p.g_k.at(m).v[n].imag()));
      }
      gcsv.row(row);
    }
    std::vector<std::string> shdr{"omega"};
    for (const auto& p : g.paths) shdr.push_back(p.name);
    Csv acsv(out / ("spectrum_k" + std::to_string(m) + ".csv"), e, shdr);
    const auto w = e.gf.grid.omegas();
    for (std::size_t j = 0; j < w.size(); ++j) {
      std::vector<std::string> row{num(w[j])};
      for (const auto& p : g.paths) row.push_back(num(p.a_k.at(m)[j]));
      acsv.row(row);
    }
  }
  std::vector<std::string> dhdr{"omega"};
  for (const auto& p : g.paths) dhdr.push_back(p.name);
  Csv dcsv(out / "dos.csv", e, dhdr);
  const auto w = e.gf.grid.omegas();
  for (std::size_t j = 0; j < w.size(); ++j) {
    std::vector<std::string> row{num(w[j])};
    for (const auto& p : g.paths) row.push_back(num(p.dos[j]));
    dcsv.row(row);
  }

  json s = header_json(e);
  s["state"] = state_json(e, st);
  s["ground_energy"] = g.e0_energy;
  s["equal_time_error"] = g.max_equal_time_error;
  s["dos_weight"] = g.dos_weight;
  for (const auto& [m, v] : g.sum_rule) s["sum_rule"]["k" + std::to_string(m)] = v;
  for (const auto& [name, per_k] : g.mae_a)
    for (const auto& [m, v] : per_k) s["mae_spectral"][name]["k" + std::to_string(m)] = v;
  for (const auto& [name, per_k] : g.mae_g)
    for (const auto& [m, v] : per_k) s["mae_gf_final"][name]["k" + std::to_string(m)] = v;
  write_json(out / "gf_summary.json", s);
  return c.code;
}

int cmd_resources(const ExperimentConfig& e, const fs::path& out) {
  const ResourcesResult r = run_resources(e);
  const auto& devices = e.resources.devices;

  Csv t2(out / "table2.csv", e,
         {"material", "qubits", "method", "scheme", "depth", "cnot", "rz", "p2q_tolerable", "pphys_tolerable",
          "p2q_ref", "pphys_ref", "calibrated"});
  json rows = json::array();
  for (const auto& m : r.materials) {
    const auto& rep = m.report;
    t2.row({rep.label, std::to_string(m.qubits), rep.method, to_string(rep.scheme), std::to_string(rep.depth),
            std::to_string(rep.n_2q), std::to_string(rep.n_rz), num(rep.p2q_tolerable), num(rep.pphys_tolerable),
            m.p2q_ref ? num(*m.p2q_ref) : "", m.pphys_ref ? num(*m.pphys_ref) : "", m.calibrated ? "1" : "0"});
    rows.push_back({{"material", rep.label}, {"qubits", m.qubits}, {"method", rep.method},
                    {"scheme", to_string(rep.scheme)}, {"depth", rep.depth}, {"cnot", rep.n_2q}, {"rz", rep.n_rz},
                    {"p2q_tolerable", rep.p2q_tolerable}, {"pphys_tolerable", rep.pphys_tolerable}});
  }

  std::vector<std::string> hh{"label", "method", "scheme", "depth", "n_1q", "n_2q", "n_rz", "p2q_tolerable",
                              "pphys_tolerable"};
  for (const auto& d : devices) hh.push_back("feasible_" + to_string(d.kind) + "_p" + num(d.p));
  Csv hc(out / "hubbard2d.csv", e, hh);
  json hrows = json::array();
  for (const auto& rep : r.hubbard) {
    std::vector<std::string> row{rep.label, rep.method, to_string(rep.scheme), std::to_string(rep.depth),
                                 std::to_string(rep.n_1q), std::to_string(rep.n_2q), std::to_string(rep.n_rz),
                                 num(rep.p2q_tolerable), num(rep.pphys_tolerable)};
    json jr = {{"label", rep.label}, {"method", rep.method}, {"scheme", to_string(rep.scheme)}, {"depth", rep.depth},
               {"n_2q", rep.n_2q}, {"n_rz", rep.n_rz}, {"p2q_tolerable", rep.p2q_tolerable},
               {"pphys_tolerable", rep.pphys_tolerable}};
    for (const auto& d : devices) {
      const std::int64_t n = d.kind == DeviceModel::Kind::nisq ? rep.n_2q : rep.n_rz;
      const bool ok = feasibility(n, d).feasible;
      row.push_back(ok ? "1" : "0");
      jr["feasible"].push_back(ok);
    }
    hc.row(row);
    hrows.push_back(jr);
  }

  json s = header_json(e);
  s["materials"] = rows;
  s["hubbard2d"] = hrows;
  s["reference_cells"] = r.reference_cells;
  s["reference_matches"] = r.reference_matches;
  write_json(out / "resources.json", s);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Local variational compilation of Trotterized time evolution"};
  app.require_subcommand(1);
  app.set_version_flag("--version", LSVQC_VERSION);

  std::string config_path, out_dir = ".";
  int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::optional<std::uint64_t> seed;
  bool timing = false;
  for (const char* name : {"compile", "dynamics", "gf", "resources"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON config")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "override the config seed");
    sub->add_flag("--verbose", g_verbose, "progress on stderr");
    sub->add_flag("--timing", timing, "record wall time in result files (breaks byte-determinism)");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& ex) {
    const int rc = app.exit(ex);
    return rc == 0 ? 0 : 1;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  Eigen::setNbThreads(threads);

  try {
    ExperimentConfig e = load_experiment(config_path, command);
    if (seed) e.seed = *seed;
    const fs::path out(out_dir);
    fs::create_directories(out);
    log(command + " config " + config_path + " hash " + e.hash());
    const auto t0 = std::chrono::steady_clock::now();
    int rc = 0;
    if (command == "compile") rc = cmd_compile(e, out, timing);
    if (command == "dynamics") rc = cmd_dynamics(e, out, timing);
    if (command == "gf") rc = cmd_gf(e, out, timing);
    if (command == "resources") rc = cmd_resources(e, out);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    log("done in " + num(wall) + " s");
    if (e.wall_budget_s > 0 && wall > e.wall_budget_s)
      std::cerr << "lsvqc: warning: wall time " << wall << " s exceeds the config budget " << e.wall_budget_s << " s\n";
    return rc;
  } catch (const Error& ex) {
    std::cerr << "lsvqc: " << ex.what() << '\n';
    switch (ex.kind()) {
      case ErrorKind::stall: return 2;
      case ErrorKind::cap: return 3;
      default: return 1;
    }
  } catch (const fs::filesystem_error& ex) {
    std::cerr << "lsvqc: " << ex.what() << '\n';
    return 1;
  }
}
