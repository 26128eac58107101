#pragma once

// Experiment pipelines shared by the command-line tool and the acceptance
// runner: JSON configs (unknown keys rejected), model/state construction,
// compilation, dynamics, Green's functions and resource tables.

#include <filesystem>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "compile.hpp"
#include "observables.hpp"
#include "resource.hpp"

namespace lsvqc {

using json = nlohmann::json;

namespace cfg {

inline void check_keys(const json& j, const std::vector<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) fail("'" + where + "' must be a JSON object", ErrorKind::config);
  for (auto it = j.begin(); it != j.end(); ++it)
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
      fail("unknown key '" + where + "." + it.key() + "'", ErrorKind::config);
}

template <class T>
T req(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) fail("missing field '" + where + "." + key + "'", ErrorKind::config);
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    fail("field '" + where + "." + key + "' has the wrong type", ErrorKind::config);
  }
}

template <class T>
T opt(const json& j, const std::string& key, T fallback, const std::string& where) {
  return j.contains(key) ? req<T>(j, key, where) : fallback;
}

inline const json& section(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) fail("missing field '" + where + "." + key + "'", ErrorKind::config);
  return j.at(key);
}

/// FNV-1a over the canonical dump; stable across runs and platforms.
inline std::string hash(const json& j) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : j.dump()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace cfg

// ------------------------------------------------------------------ config types

struct ModelConfig {
  std::string preset = "heisenberg";  // heisenberg | sr2cuo3 | hubbard
  int L = 8;
  Boundary boundary = Boundary::periodic;
  HubbardParams hubbard = sr2cuo3_params();
  bool is_hubbard() const { return preset != "heisenberg"; }
};

struct OptimizerConfig {
  BfgsOptions bfgs;
};

struct StateConfig {
  std::string prep = "neel";  // neel | givens | vqe
  int N_L = 5;                // VQE depth
  OptimizerConfig optimizer;
};

struct CompileConfig {
  double tau = 0.1;
  int target_r = 100;
  int L_tilde = 8;
  CostMode mode = CostMode::subsystem;
  std::string family = "brickwall";
  int depth = 2;
  bool translational_ansatz = true;
  SubspaceSpec::Kind kind = SubspaceSpec::Kind::krylov;
  int N_t = 1;
  double dt = 0.5;
  double phi = 0.4 * std::numbers::pi;
  std::string init = "trotter";
  OptimizerConfig optimizer;
  bool lvqc_baseline = false;
  SizingInputs sizing;
};

struct DynamicsConfig {
  int n_steps = 10;
  std::string observable = "state_infidelity";  // state_infidelity | double_occupation
  std::string reference = "trotter";            // trotter (target_r) | exact
  std::vector<int> trotter_r;
};

struct GfConfig {
  int n_steps = 300;
  std::vector<int> momenta{1};
  std::vector<int> trotter_r{5};
  SpectralGrid grid;
};

struct ResourcesConfig {
  std::vector<std::string> material_files;
  MaterialQuery materials;
  std::vector<std::int64_t> hubbard_L;
  Hubbard2dQuery hubbard;
  std::vector<ErrorScheme::Kind> schemes{ErrorScheme::Kind::average, ErrorScheme::Kind::worst};
  std::vector<DeviceModel> devices;
  json reference;  // printed table entries, optional
};

struct ExperimentConfig {
  std::string command;
  std::string description;
  json raw;
  std::filesystem::path base_dir;
  std::uint64_t seed = 0;
  double wall_budget_s = 0.0;
  std::string circuit_file;
  ModelConfig model;
  StateConfig state;
  CompileConfig compile;
  DynamicsConfig dynamics;
  GfConfig gf;
  ResourcesConfig resources;
  std::string hash() const { return cfg::hash(raw); }
};

// ------------------------------------------------------------------ parsing

namespace detail {

inline OptimizerConfig parse_optimizer(const json& j, const std::string& where) {
  cfg::check_keys(j, {"fd_step", "max_iter", "gtol", "restarts", "restart_threshold", "restart_scale"}, where);
  OptimizerConfig o;
  o.bfgs.fd_step = cfg::opt(j, "fd_step", o.bfgs.fd_step, where);
  o.bfgs.max_iter = cfg::opt(j, "max_iter", o.bfgs.max_iter, where);
  o.bfgs.gtol = cfg::opt(j, "gtol", o.bfgs.gtol, where);
  o.bfgs.restarts = cfg::opt(j, "restarts", o.bfgs.restarts, where);
  o.bfgs.restart_threshold = cfg::opt(j, "restart_threshold", o.bfgs.restart_threshold, where);
  o.bfgs.restart_scale = cfg::opt(j, "restart_scale", o.bfgs.restart_scale, where);
  if (!(o.bfgs.fd_step > 0) || o.bfgs.max_iter < 0 || o.bfgs.gtol < 0 || o.bfgs.restarts < 0)
    fail("'" + where + "' has out-of-range values", ErrorKind::config);
  return o;
}

inline ModelConfig parse_model(const json& j) {
  const std::string w = "model";
  cfg::check_keys(j, {"preset", "L", "boundary", "params"}, w);
  ModelConfig m;
  m.preset = cfg::req<std::string>(j, "preset", w);
  m.L = cfg::req<int>(j, "L", w);
  m.boundary = parse_boundary(cfg::opt<std::string>(j, "boundary", "periodic", w));
  if (m.preset == "heisenberg") {
    if (j.contains("params")) fail("'model.params' applies only to Hubbard presets", ErrorKind::config);
  } else if (m.preset == "sr2cuo3" || m.preset == "hubbard") {
    if (m.boundary != Boundary::periodic) fail("Hubbard chains are built periodic", ErrorKind::config);
    if (m.preset == "hubbard") {
      const json& p = cfg::section(j, "params", w);
      cfg::check_keys(p, {"t1", "t2", "U", "mu"}, "model.params");
      m.hubbard = {cfg::req<double>(p, "t1", "model.params"), cfg::opt(p, "t2", 0.0, "model.params"),
                   cfg::req<double>(p, "U", "model.params"), cfg::opt(p, "mu", 0.0, "model.params")};
    } else if (j.contains("params")) {
      fail("'model.params' is fixed by the sr2cuo3 preset", ErrorKind::config);
    }
  } else {
    fail("unknown model preset '" + m.preset + "' (heisenberg|sr2cuo3|hubbard)", ErrorKind::config);
  }
  if (m.L < 2) fail("'model.L' must be >= 2", ErrorKind::config);
  return m;
}

inline StateConfig parse_state(const json& j) {
  const std::string w = "state";
  cfg::check_keys(j, {"prep", "N_L", "optimizer"}, w);
  StateConfig s;
  s.prep = cfg::req<std::string>(j, "prep", w);
  if (s.prep != "neel" && s.prep != "givens" && s.prep != "vqe")
    fail("unknown state prep '" + s.prep + "' (neel|givens|vqe)", ErrorKind::config);
  s.N_L = cfg::opt(j, "N_L", s.N_L, w);
  if (j.contains("optimizer")) s.optimizer = parse_optimizer(j.at("optimizer"), w + ".optimizer");
  return s;
}

inline CompileConfig parse_compile(const json& j) {
  const std::string w = "compile";
  cfg::check_keys(j, {"tau", "target_r", "L_tilde", "mode", "ansatz", "subspace", "init", "optimizer", "lvqc_baseline",
                      "sizing"},
                  w);
  CompileConfig c;
  c.tau = cfg::req<double>(j, "tau", w);
  c.target_r = cfg::opt(j, "target_r", c.target_r, w);
  c.L_tilde = cfg::req<int>(j, "L_tilde", w);
  c.mode = parse_cost_mode(cfg::opt<std::string>(j, "mode", "subsystem", w));
  const json& a = cfg::section(j, "ansatz", w);
  cfg::check_keys(a, {"family", "depth", "translational"}, "compile.ansatz");
  c.family = cfg::req<std::string>(a, "family", "compile.ansatz");
  c.depth = cfg::req<int>(a, "depth", "compile.ansatz");
  c.translational_ansatz = cfg::opt(a, "translational", true, "compile.ansatz");
  if (c.family != "brickwall" && c.family != "vha")
    fail("unknown ansatz family '" + c.family + "' (brickwall|vha)", ErrorKind::config);
  const json& s = cfg::section(j, "subspace", w);
  cfg::check_keys(s, {"kind", "N_t", "dt", "phi"}, "compile.subspace");
  c.kind = parse_subspace_kind(cfg::req<std::string>(s, "kind", "compile.subspace"));
  c.N_t = cfg::req<int>(s, "N_t", "compile.subspace");
  c.dt = cfg::opt(s, "dt", c.dt, "compile.subspace");
  c.phi = cfg::opt(s, "phi", c.phi, "compile.subspace");
  c.init = cfg::opt<std::string>(j, "init", "trotter", w);
  if (c.init != "trotter" && c.init != "zero") fail("unknown init '" + c.init + "' (trotter|zero)", ErrorKind::config);
  if (j.contains("optimizer")) c.optimizer = parse_optimizer(j.at("optimizer"), w + ".optimizer");
  c.lvqc_baseline = cfg::opt(j, "lvqc_baseline", false, w);
  if (j.contains("sizing")) {
    const json& z = j.at("sizing");
    const std::string ws = "compile.sizing";
    cfg::check_keys(z, {"r_H", "v", "xi", "l0", "d_W", "alpha", "eps"}, ws);
    c.sizing.r_H = cfg::opt(z, "r_H", c.sizing.r_H, ws);
    c.sizing.v = cfg::opt(z, "v", c.sizing.v, ws);
    c.sizing.xi = cfg::opt(z, "xi", c.sizing.xi, ws);
    c.sizing.l0 = cfg::opt(z, "l0", c.sizing.l0, ws);
    c.sizing.d_W = cfg::opt(z, "d_W", c.sizing.d_W, ws);
    c.sizing.alpha = cfg::opt(z, "alpha", c.sizing.alpha, ws);
    c.sizing.eps = cfg::opt(z, "eps", c.sizing.eps, ws);
  }
  if (!(c.tau >= 0) || c.target_r < 1 || c.depth < 0 || c.N_t < 0 || c.L_tilde < 2)
    fail("'compile' has out-of-range values", ErrorKind::config);
  return c;
}

inline std::vector<int> parse_int_list(const json& j, const std::string& key, const std::string& where,
                                       std::vector<int> fallback) {
  auto v = cfg::opt(j, key, fallback, where);
  for (int x : v)
    if (x < 1) fail("'" + where + "." + key + "' entries must be >= 1", ErrorKind::config);
  return v;
}

inline DynamicsConfig parse_dynamics(const json& j) {
  const std::string w = "dynamics";
  cfg::check_keys(j, {"n_steps", "observable", "reference", "trotter_r"}, w);
  DynamicsConfig d;
  d.n_steps = cfg::req<int>(j, "n_steps", w);
  d.observable = cfg::req<std::string>(j, "observable", w);
  if (d.observable != "state_infidelity" && d.observable != "double_occupation")
    fail("unknown observable '" + d.observable + "' (state_infidelity|double_occupation)", ErrorKind::config);
  d.reference = cfg::opt<std::string>(j, "reference", d.observable == "double_occupation" ? "exact" : "trotter", w);
  if (d.reference != "trotter" && d.reference != "exact")
    fail("unknown reference '" + d.reference + "' (trotter|exact)", ErrorKind::config);
  d.trotter_r = parse_int_list(j, "trotter_r", w, {});
  if (d.n_steps < 0) fail("'dynamics.n_steps' must be >= 0", ErrorKind::config);
  return d;
}

inline GfConfig parse_gf(const json& j) {
  const std::string w = "gf";
  cfg::check_keys(j, {"n_steps", "momenta", "trotter_r", "omega0", "n_omega", "eta"}, w);
  GfConfig g;
  g.n_steps = cfg::req<int>(j, "n_steps", w);
  if (g.n_steps < 1) fail("'gf.n_steps' must be >= 1 (empty time grid)", ErrorKind::config);
  g.momenta = cfg::opt(j, "momenta", g.momenta, w);
  g.trotter_r = parse_int_list(j, "trotter_r", w, g.trotter_r);
  g.grid.omega0 = cfg::opt(j, "omega0", g.grid.omega0, w);
  g.grid.n_omega = cfg::opt(j, "n_omega", g.grid.n_omega, w);
  g.grid.eta = cfg::opt(j, "eta", g.grid.eta, w);
  if (!(g.grid.eta > 0) || g.grid.n_omega < 1 || !(g.grid.omega0 > 0))
    fail("'gf' spectral grid needs eta > 0, n_omega >= 1, omega0 > 0", ErrorKind::config);
  return g;
}

inline ResourcesConfig parse_resources(const json& j, const std::filesystem::path& base) {
  const std::string w = "resources";
  cfg::check_keys(j, {"materials", "hubbard2d", "devices", "reference"}, w);
  ResourcesConfig r;
  if (j.contains("materials")) {
    const json& m = j.at("materials");
    const std::string wm = "resources.materials";
    cfg::check_keys(m, {"files", "t", "eps", "n_cells", "R", "rounding"}, wm);
    for (const auto& f : cfg::req<std::vector<std::string>>(m, "files", wm)) {
      const std::filesystem::path p(f);
      r.material_files.push_back((p.is_absolute() ? p : base / p).lexically_normal().string());
    }
    r.materials.t = cfg::opt(m, "t", r.materials.t, wm);
    r.materials.eps = cfg::opt(m, "eps", r.materials.eps, wm);
    r.materials.n_cells = cfg::opt(m, "n_cells", r.materials.n_cells, wm);
    r.materials.R = cfg::opt(m, "R", r.materials.R, wm);
    r.materials.rounding = parse_rounding(cfg::opt<std::string>(m, "rounding", "floor", wm));
  }
  if (j.contains("hubbard2d")) {
    const json& h = j.at("hubbard2d");
    const std::string wh = "resources.hubbard2d";
    cfg::check_keys(h, {"L", "t", "eps", "R", "schemes", "prefactor"}, wh);
    r.hubbard_L = cfg::req<std::vector<std::int64_t>>(h, "L", wh);
    r.hubbard.t = cfg::opt(h, "t", r.hubbard.t, wh);
    r.hubbard.eps = cfg::opt(h, "eps", r.hubbard.eps, wh);
    r.hubbard.R = cfg::opt(h, "R", r.hubbard.R, wh);
    r.hubbard.scheme.prefactor = cfg::opt(h, "prefactor", 1.0, wh);
    if (h.contains("schemes")) {
      r.schemes.clear();
      for (const auto& s : cfg::req<std::vector<std::string>>(h, "schemes", wh)) r.schemes.push_back(parse_error_scheme(s));
    }
  }
  if (j.contains("devices")) {
    for (const auto& d : j.at("devices")) {
      cfg::check_keys(d, {"kind", "p", "budget"}, "resources.devices[]");
      DeviceModel dm;
      dm.kind = parse_device(cfg::req<std::string>(d, "kind", "resources.devices[]"));
      dm.p = cfg::req<double>(d, "p", "resources.devices[]");
      dm.budget = cfg::opt(d, "budget", dm.budget, "resources.devices[]");
      if (!(dm.p > 0 && dm.p < 1)) fail("device error rate must lie in (0, 1)", ErrorKind::config);
      r.devices.push_back(dm);
    }
  }
  r.reference = j.value("reference", json::object());
  return r;
}

}  // namespace detail

/// Validates the whole document before anything runs.
inline ExperimentConfig parse_experiment(const json& j, const std::string& command,
                                         const std::filesystem::path& base_dir = ".") {
  // Simulation commands share one document layout; sections the command does
  // not use are still validated, so one file can drive compile and dynamics.
  const bool sim = command == "compile" || command == "dynamics" || command == "gf";
  if (!sim && command != "resources") fail("unknown command '" + command + "'", ErrorKind::config);
  std::vector<std::string> allowed{"description", "seed", "wall_budget_s"};
  if (sim) {
    for (const char* k : {"model", "state", "compile", "dynamics", "gf", "circuit_file"}) allowed.push_back(k);
  } else {
    allowed.push_back("resources");
  }
  cfg::check_keys(j, allowed, "config");
  ExperimentConfig e;
  e.command = command;
  e.raw = j;
  e.base_dir = base_dir;
  e.description = cfg::opt<std::string>(j, "description", "", "config");
  e.seed = cfg::opt<std::uint64_t>(j, "seed", 0, "config");
  e.wall_budget_s = cfg::opt(j, "wall_budget_s", 0.0, "config");
  if (!sim) {
    e.resources = detail::parse_resources(cfg::section(j, "resources", "config"), base_dir);
    return e;
  }
  e.model = detail::parse_model(cfg::section(j, "model", "config"));
  e.state = detail::parse_state(cfg::section(j, "state", "config"));
  e.compile = detail::parse_compile(cfg::section(j, "compile", "config"));
  if (j.contains("circuit_file") && command != "compile") {
    const auto f = cfg::req<std::string>(j, "circuit_file", "config");
    const std::filesystem::path p(f);
    e.circuit_file = (p.is_absolute() ? p : base_dir / p).lexically_normal().string();
  }
  if (j.contains("dynamics") || command == "dynamics")
    e.dynamics = detail::parse_dynamics(cfg::section(j, "dynamics", "config"));
  if (j.contains("gf") || command == "gf") {
    e.gf = detail::parse_gf(cfg::section(j, "gf", "config"));
    if (!e.model.is_hubbard()) fail("Green's functions need a Hubbard model", ErrorKind::config);
    for (int m : e.gf.momenta)
      if (m < 0 || m >= e.model.L) fail("'gf.momenta' entries must lie in [0, L)", ErrorKind::config);
  }
  if (e.compile.L_tilde > e.model.L) fail("'compile.L_tilde' exceeds 'model.L'", ErrorKind::config);
  if (e.compile.mode == CostMode::full_size && e.compile.L_tilde != e.model.L)
    fail("full_size mode needs L_tilde = L", ErrorKind::config);
  if (e.compile.family == "brickwall" && e.model.is_hubbard())
    fail("the brick-wall ansatz is defined for spin chains only", ErrorKind::config);
  if (e.model.is_hubbard() && e.state.prep == "neel") fail("Neel prep needs the heisenberg preset", ErrorKind::config);
  if (!e.model.is_hubbard() && e.state.prep != "neel") fail("heisenberg runs start from the Neel state", ErrorKind::config);
  return e;
}

inline ExperimentConfig load_experiment(const std::string& path, const std::string& command) {
  std::ifstream in(path);
  if (!in) fail("cannot open config " + path, ErrorKind::config);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& ex) {
    fail("config " + path + " is not valid JSON: " + ex.what(), ErrorKind::config);
  }
  return parse_experiment(j, command, std::filesystem::path(path).parent_path());
}

// ------------------------------------------------------------------ construction

inline GroupedHamiltonian build_model(const ModelConfig& m, int L) {
  if (m.preset == "heisenberg") return build_heisenberg(L, m.boundary);
  return build_hubbard_chain(L, m.preset == "sr2cuo3" ? sr2cuo3_params() : m.hubbard);
}

/// The input state |psi0> as a frozen circuit on an L-site register, and for
/// VQE the optimization record.
struct PreparedState {
  ParamCircuit prep;
  StateVector state;
  std::optional<VqeResult> vqe;
};

inline ParamCircuit givens_free_prep(const ModelConfig& m, const GroupedHamiltonian& h) {
  const int L = h.layout.sites;
  require(L % 2 == 0, "half filling with S_z = 0 needs even L");
  const HubbardParams p = m.preset == "sr2cuo3" ? sr2cuo3_params() : m.hubbard;
  return givens_ground_prep(hubbard_one_body(L, p, L / 2), L / 2, L / 2, h.layout);
}

inline PreparedState prepare_state(const ExperimentConfig& e, const GroupedHamiltonian& h) {
  PreparedState s;
  const int L = h.layout.sites;
  if (e.state.prep == "neel") {
    s.prep = neel_prep(L, h.layout.boundary);
  } else {
    s.prep = givens_free_prep(e.model, h);
    if (e.state.prep == "vqe") {
      BfgsOptions o = e.state.optimizer.bfgs;
      o.seed = e.seed;
      s.vqe = vqe_ground_state(h, e.state.N_L, s.prep, o);
      s.prep = s.vqe->circuit;
    }
  }
  s.state = StateVector(h.n_qubits());
  apply(s.prep, s.state);
  return s;
}

inline ParamCircuit build_ansatz(const CompileConfig& c, const GroupedHamiltonian& h) {
  if (c.family == "vha") return build_vha(h, c.depth);
  return build_brickwall(h.layout.sites, c.depth, c.translational_ansatz, h.layout.boundary);
}

inline SubspaceBasis build_basis(const CompileConfig& c, const GroupedHamiltonian& h, const ParamCircuit& prep) {
  SubspaceSpec s;
  s.kind = c.kind;
  s.N_t = c.N_t;
  s.dt = c.dt;
  s.phi = c.phi;
  s.base_prep = prep;
  return c.kind == SubspaceSpec::Kind::krylov ? krylov_basis(s, h) : gf_basis(s, h);
}

inline CompilationProblem make_problem(const ExperimentConfig& e, const GroupedHamiltonian& h,
                                       const PreparedState& st, bool lvqc) {
  const CompileConfig& c = e.compile;
  CompilationProblem p;
  p.h = h;
  p.tau = c.tau;
  p.target_r = c.target_r;
  p.ansatz = build_ansatz(c, h);
  p.basis = build_basis(c, h, st.prep);
  p.L_tilde = c.L_tilde;
  p.mode = c.mode;
  p.full_space = lvqc;
  if (lvqc && c.mode != CostMode::subsystem) fail("the LVQC baseline runs in subsystem mode", ErrorKind::config);
  if (c.mode == CostMode::translational) {
    if (e.state.prep != "neel") fail("translational mode needs a translation-invariant prep (neel)", ErrorKind::config);
    p.cell_h = build_model(e.model, c.L_tilde);
    p.cell_ansatz = build_ansatz(c, p.cell_h);
    p.cell_basis = build_basis(c, p.cell_h, neel_prep(c.L_tilde, p.cell_h.layout.boundary));
  }
  return p;
}

inline ParamBinding initial_binding(const CompileConfig& c, const CompilationProblem& p) {
  const Params th = c.init == "trotter" ? trotter_equivalent_init(p.ansatz, p.h, p.tau) : Params(p.ansatz.n_slots(), 0.0);
  return binding_of(p.ansatz, th);
}

inline SizingInputs sizing_echo(const CompileConfig& c) {
  SizingInputs s = c.sizing;
  s.d_V = c.depth;
  s.tau = c.tau;
  return s;
}

struct CompileRun {
  CompilationProblem problem;
  CompilationResult result;
  ParamCircuit circuit;  // frozen, fused V(theta*)
};

inline CompileRun run_compile(const ExperimentConfig& e, const GroupedHamiltonian& h, const PreparedState& st,
                              bool lvqc = false) {
  CompileRun r;
  r.problem = make_problem(e, h, st, lvqc);
  BfgsOptions o = e.compile.optimizer.bfgs;
  o.seed = e.seed;
  r.result = optimize(r.problem, initial_binding(e.compile, r.problem), o);
  r.circuit = fuse_pairs(freeze(r.problem.ansatz, r.result.theta));
  return r;
}

/// Numerical stall: iteration cap hit, or the line search gave up far from a
/// stationary point.
inline bool stalled(const CompilationResult& r) {
  if (r.status == OptStatus::max_iter) return true;
  return r.status == OptStatus::line_search && r.grad_norm > 1e-5;
}

// ------------------------------------------------------------------ result files

inline json to_json(const Gate& g, const Params& th) {
  json j;
  if (g.kind == Gate::Kind::pauli_rotation) {
    std::string s;
    for (int q = 0; q < g.generator.n; ++q) {
      const char a = g.generator.axis(q);
      if (a == 'I') continue;
      if (!s.empty()) s += ' ';
      s += a + std::to_string(q);
    }
    j = {{"kind", "rotation"}, {"pauli", s}, {"angle", g.angle(th)}};
  } else {
    const Mat4 u = g.unitary(th);
    json m = json::array();
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) m.push_back({u(r, c).real(), u(r, c).imag()});
    j = {{"kind", "two_qubit"}, {"qubits", {g.qa, g.qb}}, {"matrix", m}};
  }
  return j;
}

inline json circuit_json(const ParamCircuit& c, const Params& th) {
  json gates = json::array();
  for (const auto& g : c.gates) gates.push_back(to_json(g, th));
  return {{"n_qubits", c.n_qubits}, {"family", c.family}, {"depth", c.depth}, {"gates", gates}};
}

inline json compile_json(const ExperimentConfig& e, const CompileRun& r) {
  json theta = json::object();
  for (const auto& [k, v] : r.result.binding) theta[k] = v;
  const SizingInputs s = sizing_echo(e.compile);
  return {{"config_hash", e.hash()},
          {"seed", e.seed},
          {"mode", to_string(e.compile.mode)},
          {"lvqc_baseline", r.problem.full_space},
          {"theta", theta},
          {"initial_cost", r.result.initial_cost},
          {"final_cost", r.result.final_cost},
          {"trace", r.result.trace},
          {"iterations", r.result.iterations},
          {"evaluations", r.result.evaluations},
          {"grad_norm", r.result.grad_norm},
          {"status", to_string(r.result.status)},
          {"sizing",
           {{"inputs", {{"r_H", s.r_H}, {"v", s.v}, {"xi", s.xi}, {"l0", s.l0}, {"d_V", s.d_V}, {"d_W", s.d_W},
                        {"alpha", s.alpha}, {"eps", s.eps}, {"tau", s.tau}}},
            {"restriction_size", restriction_size(s).size},
            {"compilation_size", compilation_size(s).size},
            {"L_tilde_used", e.compile.L_tilde}}}};
}

/// Rebuilds V(theta*) from a compile result file and the compile section.
inline ParamCircuit load_compiled(const ExperimentConfig& e, const GroupedHamiltonian& h) {
  std::ifstream in(e.circuit_file);
  if (!in) fail("cannot open circuit file " + e.circuit_file, ErrorKind::config);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& ex) {
    fail("circuit file " + e.circuit_file + " is not valid JSON: " + ex.what(), ErrorKind::config);
  }
  if (!j.contains("theta")) fail("circuit file " + e.circuit_file + " has no 'theta'", ErrorKind::config);
  ParamBinding b;
  for (auto it = j["theta"].begin(); it != j["theta"].end(); ++it) b[it.key()] = it.value().get<double>();
  const ParamCircuit a = build_ansatz(e.compile, h);
  try {
    return fuse_pairs(freeze(a, bind_params(a, b)));
  } catch (const Error& ex) {
    fail("circuit file does not match the configured ansatz: " + std::string(ex.what()), ErrorKind::config);
  }
}

// ------------------------------------------------------------------ dynamics

struct Column {
  std::string name;
  std::vector<double> v;
};

struct DynamicsResult {
  std::vector<double> t;                 // n tau, n = 1..N
  std::vector<Column> columns;           // exact, lsvqc, [lvqc], trot_r...
  std::map<std::string, double> metric;  // per non-reference column
  std::string metric_name;
  std::optional<CompressionResult> compression;
};

namespace detail {

inline std::vector<StateVector> circuit_sequence(const ParamCircuit& V, const StateVector& psi0, int n) {
  return repeated_dynamics(V, {}, psi0, n);
}

inline SectorPropagator state_sector_propagator(const GroupedHamiltonian& h, const StateVector& psi0) {
  // the sectors psi0 occupies, read off its support
  std::map<std::pair<int, int>, bool> seen;
  const Layout& lay = h.layout;
  for (std::size_t b = 0; b < psi0.dim(); ++b) {
    if (std::norm(psi0[b]) < 1e-24) continue;
    const int ne = std::popcount(static_cast<std::uint64_t>(b));
    const int up = lay.kind == Layout::Kind::hubbard ? count_up(lay, b) : ne;
    seen[{ne, up}] = true;
  }
  std::vector<std::vector<std::uint64_t>> sectors;
  for (const auto& [k, _] : seen) {
    if (lay.kind == Layout::Kind::hubbard) {
      sectors.push_back(hubbard_sector(lay.sites, k.first, 2 * k.second - k.first));
    } else {
      sectors.push_back(popcount_sector(lay.n_qubits(), k.first));
    }
  }
  return SectorPropagator(h, sectors);
}

}  // namespace detail

/// Time series of the configured observable for the reference, the compiled
/// circuit(s) and a Trotter ladder, each applied n = 1..N times.
inline DynamicsResult run_dynamics(const ExperimentConfig& e, const GroupedHamiltonian& h, const StateVector& psi0,
                                   const ParamCircuit& lsvqc, const ParamCircuit* lvqc = nullptr) {
  const DynamicsConfig& d = e.dynamics;
  const double tau = e.compile.tau;
  const int N = d.n_steps;
  DynamicsResult out;
  for (int n = 1; n <= N; ++n) out.t.push_back(n * tau);

  std::vector<StateVector> ref;
  if (d.reference == "exact") {
    const SectorPropagator prop = detail::state_sector_propagator(h, psi0);
    const auto c = prop.decompose(psi0);
    for (int n = 0; n <= N; ++n) ref.push_back(prop.compose(c, n * tau));
  } else {
    ref = detail::circuit_sequence(fuse_pairs(build_trotter1(h, tau, e.compile.target_r)), psi0, N);
  }

  const bool infid = d.observable == "state_infidelity";
  out.metric_name = infid ? "mean_state_infidelity" : "mae_double_occupation";
  auto observe = [&](const std::vector<StateVector>& seq) {
    std::vector<double> v;
    for (int n = 1; n <= N; ++n)
      v.push_back(infid ? state_infidelity(seq[n], ref[n]) : double_occupation(seq[n], h.layout));
    return v;
  };
  out.columns.push_back({"exact", observe(ref)});
  auto add = [&](const std::string& name, const ParamCircuit& V) {
    out.columns.push_back({name, observe(detail::circuit_sequence(V, psi0, N))});
  };
  add("lsvqc", lsvqc);
  if (lvqc) add("lvqc", *lvqc);
  for (int r : d.trotter_r) add("trot_r" + std::to_string(r), fuse_pairs(build_trotter1(h, tau, r)));

  // infidelity: mean over n; doublon: running MAE at the final time
  for (std::size_t c = 1; c < out.columns.size(); ++c) {
    const auto& v = out.columns[c].v;
    double m = 0.0;
    if (N > 0) {
      if (infid) {
        for (double x : v) m += x;
        m /= N;
      } else {
        std::vector<double> a{0.0}, b{0.0};
        a.insert(a.end(), v.begin(), v.end());
        b.insert(b.end(), out.columns[0].v.begin(), out.columns[0].v.end());
        m = running_mae(a, b).back();
      }
    }
    out.metric[out.columns[c].name] = m;
  }
  if (N > 0 && !d.trotter_r.empty()) {
    std::vector<std::pair<double, double>> table;
    for (int r : d.trotter_r) table.emplace_back(r, out.metric.at("trot_r" + std::to_string(r)));
    out.compression = depth_compression(table, out.metric.at("lsvqc"), e.compile.depth);
  }
  return out;
}

// ------------------------------------------------------------------ Green's functions

struct GfPath {
  std::string name;
  SiteGf site;
  std::map<int, TimeSeries> g_k;
  std::map<int, std::vector<double>> a_k;
  std::vector<double> dos;
};

struct GfResult {
  std::vector<GfPath> paths;  // exact first
  double e0_energy = 0.0;
  std::map<std::string, std::map<int, double>> mae_a;  // per path, per momentum
  std::map<std::string, std::map<int, double>> mae_g;  // final running MAE
  double max_equal_time_error = 0.0;                   // max |G_aa(0) + i| on the exact path
  std::map<int, double> sum_rule;                      // exact spectral weight per momentum
  double dos_weight = 0.0;
};

/// Spin-up retarded GF on the exact, compiled and Trotter paths, all from the
/// same prepared ground state.
inline GfResult run_gf(const ExperimentConfig& e, const GroupedHamiltonian& h, const PreparedState& st,
                       const ParamCircuit& lsvqc, const ParamCircuit* lvqc = nullptr) {
  const GfConfig& g = e.gf;
  const int L = h.layout.sites;
  const double tau = e.compile.tau;
  std::vector<int> modes;
  for (int i = 0; i < L; ++i) modes.push_back(h.layout.qubit(i, 0));

  // sectors: (N_up, N_dn) of psi0 plus one up-electron added or removed
  const int n_up = count_up(h.layout, [&] {
    std::size_t best = 0;
    for (std::size_t b = 1; b < st.state.dim(); ++b)
      if (std::norm(st.state[b]) > std::norm(st.state[best])) best = b;
    return static_cast<std::uint64_t>(best);
  }());
  const int n_e = L;  // half filling
  const int n_dn = n_e - n_up;
  std::vector<std::vector<std::uint64_t>> sectors;
  for (int du : {0, 1, -1}) {
    const int u = n_up + du;
    if (u < 0 || u > L) continue;
    sectors.push_back(hubbard_sector(L, u + n_dn, u - n_dn));
  }
  const SectorPropagator prop(h, sectors);

  GfResult out;
  out.e0_energy = st.vqe ? st.vqe->energy : expectation(st.state, h.total());
  auto run_path = [&](const std::string& name, const BatchAdvance& adv) {
    GfPath p;
    p.name = name;
    p.site = retarded_gf(st.state, modes, g.n_steps, tau, adv);
    std::vector<std::vector<double>> all;
    for (int m = 0; m < L; ++m) {
      TimeSeries gk = gf_momentum(p.site, m);
      auto a = spectral_function(gk, g.grid);
      if (std::find(g.momenta.begin(), g.momenta.end(), m) != g.momenta.end()) {
        p.g_k[m] = gk;
        p.a_k[m] = a;
      }
      all.push_back(std::move(a));
    }
    p.dos = dos(all);
    out.paths.push_back(std::move(p));
  };
  run_path("exact", exact_advance(prop, tau));
  run_path("lsvqc", circuit_advance(lsvqc));
  if (lvqc) run_path("lvqc", circuit_advance(*lvqc));
  for (int r : g.trotter_r) run_path("trot_r" + std::to_string(r), circuit_advance(fuse_pairs(build_trotter1(h, tau, r))));

  const GfPath& ex = out.paths.front();
  for (std::size_t a = 0; a < modes.size(); ++a)
    out.max_equal_time_error = std::max(out.max_equal_time_error, std::abs(ex.site.g[a][a][0] - cplx{0, -1}));
  for (const auto& [m, a] : ex.a_k) out.sum_rule[m] = spectral_weight(a, g.grid);
  out.dos_weight = spectral_weight(ex.dos, g.grid);
  for (std::size_t k = 1; k < out.paths.size(); ++k) {
    const auto& p = out.paths[k];
    for (const auto& [m, a] : p.a_k) {
      out.mae_a[p.name][m] = spectral_mae(a, ex.a_k.at(m));
      out.mae_g[p.name][m] = running_mae(p.g_k.at(m).v, ex.g_k.at(m).v).back();
    }
  }
  return out;
}

// ------------------------------------------------------------------ resources

struct MaterialRow {
  ResourceReport report;
  int qubits = 0;
  bool calibrated = false;
  std::optional<double> p2q_ref, pphys_ref;
};

struct ResourcesResult {
  std::vector<MaterialRow> materials;
  std::vector<ResourceReport> hubbard;
  int reference_cells = 0, reference_matches = 0;
};

inline bool same_two_significant(double x, double printed) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1e", x);
  return std::abs(std::stod(buf) - printed) <= 1e-9 * std::abs(printed);
}

inline ResourcesResult run_resources(const ExperimentConfig& e) {
  const ResourcesConfig& rc = e.resources;
  ResourcesResult out;
  for (const auto& f : rc.material_files) {
    const MaterialGateSpec m = load_material(f);
    const std::string key = std::filesystem::path(f).stem().string();
    for (const auto& rep : material_reports(m, rc.materials)) {
      MaterialRow row;
      row.report = rep;
      row.qubits = static_cast<int>(m.qubits(rc.materials.n_cells));
      row.calibrated = m.calibrated;
      if (rc.reference.contains(key)) {
        const json& ref = rc.reference.at(key);
        // order: trotter average, trotter worst, lsvqc average, lsvqc worst
        const int idx = (rep.method == "lsvqc" ? 2 : 0) + (rep.scheme == ErrorScheme::Kind::worst ? 1 : 0);
        row.p2q_ref = ref.at("p2q").at(idx).get<double>();
        row.pphys_ref = ref.at("pphys").at(idx).get<double>();
        out.reference_cells += 2;
        out.reference_matches += same_two_significant(rep.p2q_tolerable, *row.p2q_ref);
        out.reference_matches += same_two_significant(rep.pphys_tolerable, *row.pphys_ref);
      }
      out.materials.push_back(row);
    }
  }
  for (std::int64_t L : rc.hubbard_L)
    for (auto s : rc.schemes) {
      Hubbard2dQuery q = rc.hubbard;
      q.L = L;
      q.scheme.kind = s;
      for (auto& r : hubbard2d_reports(q)) out.hubbard.push_back(r);
    }
  return out;
}

}  // namespace lsvqc
