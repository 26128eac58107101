#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "error.hpp"

namespace lsvqc {

// Product-formula step counts follow r = prefactor * L^s * t^2 / eps with
// s = 1 (worst case, alpha_comm ~ L) or 1/2 (average case, T_1 ~ sqrt(L)).
struct ErrorScheme {
  enum class Kind { worst, average };
  Kind kind = Kind::average;
  double prefactor = 1.0;
};

inline ErrorScheme::Kind parse_error_scheme(const std::string& s) {
  if (s == "worst") return ErrorScheme::Kind::worst;
  if (s == "average") return ErrorScheme::Kind::average;
  fail("unknown error scheme '" + s + "' (worst|average)", ErrorKind::config);
}

inline std::string to_string(ErrorScheme::Kind k) { return k == ErrorScheme::Kind::worst ? "worst" : "average"; }

/// The asymptotic formulas are rounded up by default; the material tables
/// truncate instead.
enum class Rounding { ceil, floor };

inline Rounding parse_rounding(const std::string& s) {
  if (s == "ceil") return Rounding::ceil;
  if (s == "floor") return Rounding::floor;
  fail("unknown rounding '" + s + "' (ceil|floor)", ErrorKind::config);
}

namespace detail {

inline std::int64_t round_count(double x, Rounding r) {
  // absorb representation error so that 500.0000000001 still rounds to 500
  const double snapped = std::abs(x - std::round(x)) < 1e-9 * std::max(1.0, std::abs(x)) ? std::round(x) : x;
  const double v = r == Rounding::ceil ? std::ceil(snapped) : std::floor(snapped);
  require(v < 9e18, "step count overflows");
  return static_cast<std::int64_t>(v);
}

inline std::int64_t isqrt_exact(std::int64_t L) {
  require(L >= 1, "lattice size must be positive");
  auto s = static_cast<std::int64_t>(std::llround(std::sqrt(static_cast<double>(L))));
  if (s * s != L) fail("2D formulas need a square lattice, got L = " + std::to_string(L));
  return s;
}

}  // namespace detail

inline std::int64_t trotter_steps(double L, double t, double eps, const ErrorScheme& s = {},
                                  Rounding rounding = Rounding::ceil) {
  require(eps > 0 && t > 0, "trotter_steps needs t > 0 and eps > 0");
  require(L >= 1, "trotter_steps needs L >= 1");
  require(s.prefactor > 0, "error-scheme prefactor must be positive");
  const double size = s.kind == ErrorScheme::Kind::worst ? L : std::sqrt(L);
  return std::max<std::int64_t>(1, detail::round_count(s.prefactor * size * t * t / eps, rounding));
}

inline std::int64_t lsvqc_layers(std::int64_t r, int R = 10) {
  require(r >= 1, "lsvqc_layers needs r >= 1");
  require(R >= 1, "compression rate must be >= 1");
  return std::max<std::int64_t>(1, r / R);
}

struct GateCounts {
  std::int64_t n_1q = 0, n_2q = 0, n_rz = 0;
};

/// Trotter (or same-depth VHA) circuit for the square-lattice Hubbard model on L sites.
inline GateCounts hubbard2d_gate_counts(std::int64_t L, std::int64_t depth) {
  const std::int64_t s = detail::isqrt_exact(L);
  require(depth >= 0, "depth must be nonnegative");
  GateCounts c;
  c.n_1q = 3 * L * depth;
  c.n_2q = (4 * L * s + 2 * L - 2 * s) * depth;
  c.n_rz = (9 * L - 8 * s) * depth;
  return c;
}

inline std::int64_t hubbard2d_rz_count(std::int64_t L, std::int64_t depth) { return hubbard2d_gate_counts(L, depth).n_rz; }

// ------------------------------------------------------------------ downfolded materials

struct InteractionRow {
  std::string label;
  std::int64_t terms_per_cell = 0;
  std::int64_t cnot_per_term = 0;
  std::int64_t rotation_per_term = 1;
};

struct MaterialGateSpec {
  std::string name;
  std::int64_t qubits_per_cell = 0;
  std::int64_t fswap_cost = 0;
  std::vector<InteractionRow> interactions;
  bool calibrated = false;  // fitted to published totals, not counted from a Hamiltonian

  std::int64_t qubits(std::int64_t n_cells) const { return qubits_per_cell * n_cells; }
  std::int64_t terms_per_cell() const {
    std::int64_t n = 0;
    for (const auto& r : interactions) n += r.terms_per_cell;
    return n;
  }
  void validate() const {
    require(qubits_per_cell >= 0 && fswap_cost >= 0, "material '" + name + "': counts must be nonnegative");
    for (const auto& r : interactions)
      require(r.terms_per_cell >= 0 && r.cnot_per_term >= 0 && r.rotation_per_term >= 0,
              "material '" + name + "': row '" + r.label + "' has a negative count");
  }
};

inline void from_json(const nlohmann::json& j, InteractionRow& r) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (it.key() != "label" && it.key() != "terms_per_cell" && it.key() != "cnot_per_term" &&
        it.key() != "rotation_per_term")
      fail("unknown key '" + it.key() + "' in interaction row", ErrorKind::config);
  r.label = j.value("label", std::string{});
  r.terms_per_cell = j.at("terms_per_cell").get<std::int64_t>();
  r.cnot_per_term = j.at("cnot_per_term").get<std::int64_t>();
  r.rotation_per_term = j.value("rotation_per_term", std::int64_t{1});
}

inline void from_json(const nlohmann::json& j, MaterialGateSpec& m) {
  static const std::vector<std::string> keys{"name", "qubits_per_cell", "fswap_cost", "interactions", "calibrated", "note"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (std::find(keys.begin(), keys.end(), it.key()) == keys.end())
      fail("unknown key '" + it.key() + "' in material spec", ErrorKind::config);
  m.name = j.at("name").get<std::string>();
  m.qubits_per_cell = j.at("qubits_per_cell").get<std::int64_t>();
  m.fswap_cost = j.at("fswap_cost").get<std::int64_t>();
  m.interactions = j.at("interactions").get<std::vector<InteractionRow>>();
  m.calibrated = j.value("calibrated", false);
  m.validate();
}

inline MaterialGateSpec load_material(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open material spec " + path, ErrorKind::config);
  try {
    return nlohmann::json::parse(in).get<MaterialGateSpec>();
  } catch (const nlohmann::json::exception& e) {
    fail("material spec " + path + ": " + e.what(), ErrorKind::config);
  }
}

struct DownfoldedCounts {
  std::int64_t cnot = 0;      // interaction CNOTs plus the FSWAP network
  std::int64_t rotation = 0;  // single-qubit rotations inside the interaction gadgets
  std::int64_t n_rz = 0;      // one analog rotation per Hamiltonian term
};

/// Gate totals for `depth` steps on N_cells unit cells.
inline DownfoldedCounts downfolded_gate_count(const MaterialGateSpec& m, std::int64_t n_cells, std::int64_t depth) {
  m.validate();
  require(n_cells >= 1 && depth >= 0, "downfolded_gate_count needs N_cells >= 1 and depth >= 0");
  DownfoldedCounts step;
  for (const auto& r : m.interactions) {
    step.cnot += r.terms_per_cell * r.cnot_per_term * n_cells;
    step.rotation += r.terms_per_cell * r.rotation_per_term * n_cells;
    step.n_rz += r.terms_per_cell * n_cells;
  }
  const std::int64_t q = m.qubits(n_cells);
  step.cnot += (q * q - 2 * q) / 2 * m.fswap_cost;
  return {step.cnot * depth, step.rotation * depth, step.n_rz * depth};
}

// ------------------------------------------------------------------ feasibility

struct DeviceModel {
  enum class Kind { nisq, star };
  Kind kind = Kind::nisq;
  double p = 1e-3;       // p_2q (nisq) or p_phys (star)
  double budget = 2.0;   // tolerated N * p for error mitigation
};

inline DeviceModel::Kind parse_device(const std::string& s) {
  if (s == "nisq") return DeviceModel::Kind::nisq;
  if (s == "star") return DeviceModel::Kind::star;
  fail("unknown device '" + s + "' (nisq|star)", ErrorKind::config);
}

inline std::string to_string(DeviceModel::Kind k) { return k == DeviceModel::Kind::nisq ? "nisq" : "star"; }

/// Logical error of an analog rotation on STAR for physical rate p.
inline double star_logical_rate(double p_phys) { return 4.0 * p_phys / 15.0; }

struct Feasibility {
  bool feasible = true;
  double tolerable_rate = std::numeric_limits<double>::infinity();
};

/// n is the CNOT count (nisq) or the analog-rotation count (star).
inline Feasibility feasibility(std::int64_t n, const DeviceModel& d) {
  require(d.p > 0 && d.p < 1, "device error rate must lie in (0, 1)");
  require(d.budget > 0, "mitigation budget must be positive");
  require(n >= 0, "gate count must be nonnegative");
  Feasibility f;
  if (n == 0) return f;
  const double p_eff = d.kind == DeviceModel::Kind::nisq ? d.p : star_logical_rate(d.p);
  f.feasible = static_cast<double>(n) * p_eff <= d.budget;
  f.tolerable_rate = d.kind == DeviceModel::Kind::nisq ? d.budget / n : d.budget * 15.0 / (4.0 * n);
  return f;
}

inline double tolerable_rate(std::int64_t n, DeviceModel::Kind k, double budget = 2.0) {
  return feasibility(n, DeviceModel{k, 0.5, budget}).tolerable_rate;
}

// ------------------------------------------------------------------ reports

struct ResourceReport {
  std::string label, method;  // method: trotter | lsvqc
  ErrorScheme::Kind scheme = ErrorScheme::Kind::average;
  std::int64_t depth = 0;
  std::int64_t n_1q = 0, n_2q = 0, n_rz = 0;
  double p2q_tolerable = 0, pphys_tolerable = 0;
};

inline ResourceReport make_report(std::string label, std::string method, ErrorScheme::Kind s, std::int64_t depth,
                                  std::int64_t n_1q, std::int64_t n_2q, std::int64_t n_rz, double budget = 2.0) {
  ResourceReport r{std::move(label), std::move(method), s, depth, n_1q, n_2q, n_rz, 0, 0};
  r.p2q_tolerable = tolerable_rate(n_2q, DeviceModel::Kind::nisq, budget);
  r.pphys_tolerable = tolerable_rate(n_rz, DeviceModel::Kind::star, budget);
  return r;
}

struct Hubbard2dQuery {
  std::int64_t L = 25;
  double t = 1.0, eps = 0.01;
  ErrorScheme scheme{};
  int R = 10;
};

/// Trotter and compressed-LSVQC reports for the square-lattice Hubbard model.
inline std::vector<ResourceReport> hubbard2d_reports(const Hubbard2dQuery& q) {
  detail::isqrt_exact(q.L);
  const std::int64_t r = trotter_steps(static_cast<double>(q.L), q.t, q.eps, q.scheme);
  const std::int64_t nl = lsvqc_layers(r, q.R);
  std::vector<ResourceReport> out;
  for (auto [method, d] : {std::pair<const char*, std::int64_t>{"trotter", r}, {"lsvqc", nl}}) {
    const auto c = hubbard2d_gate_counts(q.L, d);
    out.push_back(make_report("hubbard2d_L" + std::to_string(q.L), method, q.scheme.kind, d, c.n_1q, c.n_2q, c.n_rz));
  }
  return out;
}

struct MaterialQuery {
  double t = 0.1, eps = 0.01;
  std::int64_t n_cells = 10;
  int R = 10;
  Rounding rounding = Rounding::floor;
};

/// Trotter/LSVQC rows for both error schemes; the lattice size entering the
/// step count is the number of spatial orbitals (half the qubits).
inline std::vector<ResourceReport> material_reports(const MaterialGateSpec& m, const MaterialQuery& q) {
  const double L = static_cast<double>(m.qubits(q.n_cells)) / 2.0;
  std::vector<ResourceReport> out;
  for (const auto kind : {ErrorScheme::Kind::average, ErrorScheme::Kind::worst}) {
    const std::int64_t r = trotter_steps(L, q.t, q.eps, ErrorScheme{kind, 1.0}, q.rounding);
    const std::int64_t nl = lsvqc_layers(r, q.R);
    for (auto [method, d] : {std::pair<const char*, std::int64_t>{"trotter", r}, {"lsvqc", nl}}) {
      const auto c = downfolded_gate_count(m, q.n_cells, d);
      out.push_back(make_report(m.name, method, kind, d, c.rotation, c.cnot, c.n_rz));
    }
  }
  return out;
}

}  // namespace lsvqc
