#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "dense.hpp"
#include "optimize.hpp"
#include "subspace.hpp"

namespace lsvqc {

// ------------------------------------------------------------------ echo costs

namespace detail {

inline void check_common_register(const ParamCircuit& U, const ParamCircuit& V, const SubspaceBasis& b) {
  require(U.n_qubits == V.n_qubits, "U and V act on different registers");
  for (const auto& w : b.preps) require(w.n_qubits == V.n_qubits, "basis prep acts on a different register");
  require(b.size() > 0, "empty basis");
}

// W_k^dag V^dag U W_k |0> for every k.
inline std::vector<StateVector> echo_states(const ParamCircuit& U, const Params& thU, const ParamCircuit& V,
                                            const Params& th, const SubspaceBasis& b) {
  check_common_register(U, V, b);
  check_state_cap(V.n_qubits);
  std::vector<StateVector> out;
  for (const auto& w : b.preps) {
    StateVector s(V.n_qubits);
    apply(w, s);
    apply(U, thU, s);
    apply_inverse(V, th, s);
    apply_inverse(w, Params{}, s);
    out.push_back(std::move(s));
  }
  return out;
}

// Probability that qubit q reads 0, summed directly on the amplitudes.
inline double p_zero(const StateVector& s, int q) { return projector_zero_expectation(s, q); }

}  // namespace detail

/// 1 - (1/N) sum_k |<Psi_k| V^dag U |Psi_k>|^2
inline double cost_let(const ParamCircuit& U, const ParamCircuit& V, const Params& th, const SubspaceBasis& b,
                       const Params& thU = {}) {
  const auto st = detail::echo_states(U, thU, V, th, b);
  double acc = 0.0;
  for (const auto& s : st) acc += std::norm(s[0]);
  return std::clamp(1.0 - acc / static_cast<double>(st.size()), 0.0, 1.0);
}

struct LletResult {
  double value = 0.0;
  std::vector<double> per_site;  // C^(j) for each lattice site
};

/// Average over sites of 1 - (1/N) sum_k Tr[Pi_j rho_k]. A site with several
/// qubits (Hubbard) averages over them, so the value is the mean over qubits.
inline LletResult cost_llet(const ParamCircuit& U, const ParamCircuit& V, const Params& th, const SubspaceBasis& b,
                            const Params& thU = {}) {
  const auto st = detail::echo_states(U, thU, V, th, b);
  const Layout& lay = V.layout;
  LletResult r;
  const int sites = lay.sites > 0 ? lay.sites : V.n_qubits;
  for (int j = 0; j < sites; ++j) {
    double acc = 0.0;
    const int norb = lay.sites > 0 ? lay.orbitals() : 1;
    for (int o = 0; o < norb; ++o) {
      const int q = lay.sites > 0 ? lay.qubit(j, o) : j;
      for (const auto& s : st) acc += detail::p_zero(s, q);
    }
    r.per_site.push_back(1.0 - acc / (norb * static_cast<double>(st.size())));
  }
  double tot = 0.0;
  for (double c : r.per_site) tot += c;
  r.value = std::clamp(tot / sites, 0.0, 1.0);
  return r;
}

/// 1 - |Tr(V^dag U)|^2 / d^2 from dense matrices (LVQC-style full-space cost).
inline double full_space_cost(const DenseOperator& U, const DenseOperator& V) {
  require(U.rows() == V.rows() && U.cols() == V.cols(), "U and V have different shapes");
  const double d = static_cast<double>(U.rows());
  const cplx tr = (V.adjoint() * U).trace();
  return std::clamp(1.0 - std::norm(tr) / (d * d), 0.0, 1.0);
}

inline double full_space_cost(const ParamCircuit& U, const ParamCircuit& V, const Params& th, const Params& thU = {}) {
  require(U.n_qubits == V.n_qubits, "U and V act on different registers");
  check_dense_cap(U.n_qubits);
  return full_space_cost(dense_matrix(U, thU, U.n_qubits), dense_matrix(V, th, V.n_qubits));
}

// ------------------------------------------------------------------ sizing

struct SizingInputs {
  double r_H = 1.0;
  double v = 0.0;
  double xi = 0.0;
  double l0 = 0.0;
  double d_V = 0.0;
  double d_W = 0.0;  // max over the basis preps
  int alpha = 0;
  double eps = 0.01;
  double n_steps = 1.0;
  double tau = 0.0;
  double L = 1.0;  // only used when alpha = 1
};

struct SizeEstimate {
  double value = 0.0;
  int size = 0;  // rounded up
};

inline SizeEstimate rounded(double v) { return {v, static_cast<int>(std::ceil(v - 1e-12))}; }

/// L' = 2(l0 + r_H + v tau + 2(d_V + d_W)).
inline SizeEstimate restriction_size(const SizingInputs& in) {
  return rounded(2 * (in.l0 + in.r_H + in.v * in.tau + 2 * (in.d_V + in.d_W)));
}

/// Sufficient window for the causal-cone equality of the local cost:
/// max(L'/2 + 2(d_V + d_W) + 1, L' + 4 d_W).
inline SizeEstimate exact_compilation_size(const SizingInputs& in) {
  const double lp = restriction_size(in).value;
  return rounded(std::max(lp / 2 + 2 * (in.d_V + in.d_W) + 1, lp + 4 * in.d_W));
}

/// Practical estimate xi ln(n^2 L^alpha / eps) + r_H + v tau + 2 d_W + max(2 d_V + 1, r_H + v tau + 2 d_W).
inline SizeEstimate compilation_size(const SizingInputs& in) {
  require(in.eps > 0, "eps must be positive");
  const double vt = in.v * in.tau;
  const double lr = in.xi > 0 ? in.xi * std::log(in.n_steps * in.n_steps * std::pow(in.L, in.alpha) / in.eps) : 0.0;
  return rounded(lr + in.r_H + vt + 2 * in.d_W + std::max(2 * in.d_V + 1, in.r_H + vt + 2 * in.d_W));
}

// ------------------------------------------------------------------ problems

enum class CostMode { subsystem, translational, full_size };

inline CostMode parse_cost_mode(const std::string& s) {
  if (s == "subsystem") return CostMode::subsystem;
  if (s == "translational") return CostMode::translational;
  if (s == "full_size") return CostMode::full_size;
  fail("unknown cost mode '" + s + "'", ErrorKind::config);
}

inline std::string to_string(CostMode m) {
  switch (m) {
    case CostMode::subsystem: return "subsystem";
    case CostMode::translational: return "translational";
    case CostMode::full_size: return "full_size";
  }
  return "?";
}

struct CompilationProblem {
  GroupedHamiltonian h;
  double tau = 0.1;
  int target_r = 100;
  ParamCircuit ansatz;
  SubspaceBasis basis;
  int L_tilde = 0;
  CostMode mode = CostMode::subsystem;
  // translational mode: the same model, ansatz and basis on a periodic L_tilde lattice
  GroupedHamiltonian cell_h;
  ParamCircuit cell_ansatz;
  SubspaceBasis cell_basis;
  // LVQC baseline: full-space cost on each window instead of the subspace echo
  bool full_space = false;

  int L() const { return h.layout.sites; }
};

/// One distinct local register: target states U W_k|0>, the local ansatz and
/// preps, and the qubit groups whose zero-probabilities enter the cost.
struct LocalTerm {
  ParamCircuit V;
  std::vector<ParamCircuit> preps;
  std::vector<StateVector> targets;           // U W_k |0>  (echo) or U|b> (full space)
  std::vector<std::pair<std::vector<int>, double>> measures;  // (qubits, weight)
  double weight = 0.0;                         // full-space mode
};

namespace detail {

inline std::string hamiltonian_signature(const GroupedHamiltonian& h) {
  std::string s;
  char buf[48];
  for (const auto& g : h.groups) {
    std::snprintf(buf, sizeof buf, "%a:", g.c);
    s += g.name + buf;
    for (const auto& p : g.terms.terms) {
      std::snprintf(buf, sizeof buf, "%a,", p.coeff.real());
      s += p.label() + buf;
    }
    s += "|";
  }
  return s;
}

struct WindowPieces {
  GroupedHamiltonian h;
  ParamCircuit V;
  std::vector<ParamCircuit> preps;
  std::vector<int> measured;
};

inline WindowPieces window_pieces(const CompilationProblem& p, int j) {
  const Layout& lay = p.h.layout;
  WindowPieces w;
  const Window win = make_window(lay, j, p.L_tilde);
  if (win.full()) {
    w.h = p.h;
    w.V = p.ansatz;
    w.preps = p.basis.preps;
    for (int o = 0; o < lay.orbitals(); ++o) w.measured.push_back(lay.qubit(j, o));
    return w;
  }
  w.h = relabel(restrict_hamiltonian(p.h, j, p.L_tilde), win);
  w.V = relabel(restrict_circuit(p.ansatz, j, p.L_tilde), win);
  for (const auto& pr : p.basis.preps) w.preps.push_back(relabel(restrict_circuit(pr, j, p.L_tilde), win));
  for (int o = 0; o < lay.orbitals(); ++o) w.measured.push_back(win.local_qubit(lay.qubit(j, o)));
  return w;
}

inline std::vector<StateVector> echo_targets(const GroupedHamiltonian& h, double tau, int r,
                                             const std::vector<ParamCircuit>& preps) {
  const ParamCircuit U = fuse_pairs(build_trotter1(h, tau, r));
  std::vector<StateVector> out;
  for (const auto& w : preps) {
    check_state_cap(w.n_qubits);
    StateVector s(w.n_qubits);
    apply(w, s);
    apply(U, s);
    out.push_back(std::move(s));
  }
  return out;
}

inline std::vector<StateVector> basis_targets(const GroupedHamiltonian& h, double tau, int r) {
  const int n = h.n_qubits();
  check_dense_cap(n);
  const ParamCircuit U = fuse_pairs(build_trotter1(h, tau, r));
  std::vector<StateVector> out;
  for (std::uint64_t b = 0; b < (std::uint64_t{1} << n); ++b) {
    auto s = StateVector::basis(n, b);
    apply(U, s);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace detail

/// Prepared cost: local registers deduplicated, reference states cached.
class CostFunction {
 public:
  explicit CostFunction(const CompilationProblem& p) : n_slots_(p.ansatz.n_slots()), full_space_(p.full_space) {
    require(p.target_r >= 1, "target_r must be >= 1");
    require(!p.full_space || p.mode == CostMode::subsystem, "the full-space baseline runs in subsystem mode");
    switch (p.mode) {
      case CostMode::subsystem: build_subsystem(p); break;
      case CostMode::translational: build_translational(p); break;
      case CostMode::full_size: build_full(p); break;
    }
  }

  double operator()(const Params& th) const {
    require(th.size() == n_slots_, "parameter vector has the wrong length");
    double tot = 0.0;
    for (const auto& t : terms_) tot += full_space_ ? full_space_term(t, th) : echo_term(t, th);
    return std::clamp(tot, 0.0, 1.0);
  }

  /// Adjoint gradient; empty when the ansatz has symmetry-gate slots, which
  /// callers then differentiate numerically.
  std::vector<double> gradient(const Params& th) const {
    require(th.size() == n_slots_, "parameter vector has the wrong length");
    if (!has_gradient()) return {};
    std::vector<double> grad(n_slots_, 0.0);
    for (const auto& t : terms_) full_space_ ? full_space_grad(t, th, grad) : echo_grad(t, th, grad);
    return grad;
  }
  bool has_gradient() const {
    for (const auto& t : terms_)
      for (const auto& g : t.V.gates)
        if (g.sym_slot >= 0) return false;
    return true;
  }

  std::size_t distinct_registers() const { return terms_.size(); }
  const std::vector<LocalTerm>& terms() const { return terms_; }

 private:
  std::size_t n_slots_;
  bool full_space_;
  std::vector<LocalTerm> terms_;

  static double echo_term(const LocalTerm& t, const Params& th) {
    const double nk = static_cast<double>(t.preps.size());
    double tot = 0.0;
    for (std::size_t k = 0; k < t.preps.size(); ++k) {
      StateVector s = t.targets[k];
      apply_inverse(t.V, th, s);
      apply_inverse(t.preps[k], Params{}, s);
      for (const auto& [qs, w] : t.measures) {
        double p0 = 0.0;
        for (int q : qs) p0 += detail::p_zero(s, q);
        tot += w * (1.0 / nk - p0 / (qs.size() * nk));
      }
    }
    return tot;
  }

  static double full_space_term(const LocalTerm& t, const Params& th) {
    cplx tr = 0.0;
    const int n = t.V.n_qubits;
    for (std::size_t b = 0; b < t.targets.size(); ++b) {
      auto s = StateVector::basis(n, b);
      apply(t.V, th, s);
      tr += inner_product(s, t.targets[b]);
    }
    const double d = static_cast<double>(t.targets.size());
    return t.weight * (1.0 - std::norm(tr) / (d * d));
  }

  // cost = const - <x|M|x> with x = V^dag target and M = W D W^dag, D diagonal
  // in the computational basis. Walk V forward from x, carrying M x alongside.
  static void echo_grad(const LocalTerm& t, const Params& th, std::vector<double>& grad) {
    const double nk = static_cast<double>(t.preps.size());
    const std::size_t dim = t.targets.empty() ? 0 : t.targets[0].dim();
    std::vector<double> diag(dim, 0.0);
    for (const auto& [qs, w] : t.measures)
      for (int q : qs) {
        const std::uint64_t m = std::uint64_t{1} << q;
        const double c = w / (qs.size() * nk);
        for (std::size_t i = 0; i < dim; ++i)
          if (!(i & m)) diag[i] += c;
      }
    for (std::size_t k = 0; k < t.preps.size(); ++k) {
      StateVector psi = t.targets[k];
      apply_inverse(t.V, th, psi);
      StateVector lam = psi;
      apply_inverse(t.preps[k], Params{}, lam);
      for (std::size_t i = 0; i < dim; ++i) lam.data()[i] *= diag[i];
      apply(t.preps[k], Params{}, lam);
      for (const auto& g : t.V.gates) {
        if (g.slot >= 0) grad[g.slot] += -2.0 * g.scale * pauli_matrix_element(lam, g.generator, psi).imag();
        detail::apply_gate(psi, g, th, false);
        detail::apply_gate(lam, g, th, false);
      }
    }
  }

  static void full_space_grad(const LocalTerm& t, const Params& th, std::vector<double>& grad) {
    const int n = t.V.n_qubits;
    cplx tr = 0.0;
    std::vector<cplx> dtr(grad.size(), 0.0);
    for (std::size_t b = 0; b < t.targets.size(); ++b) {
      auto psi = StateVector::basis(n, b);
      apply(t.V, th, psi);
      tr += inner_product(psi, t.targets[b]);
      StateVector lam = t.targets[b];
      for (auto it = t.V.gates.rbegin(); it != t.V.gates.rend(); ++it) {
        const Gate& g = *it;
        if (g.slot >= 0) dtr[g.slot] += cplx{0.0, -1.0} * g.scale * std::conj(pauli_matrix_element(lam, g.generator, psi));
        detail::apply_gate(psi, g, th, true);
        detail::apply_gate(lam, g, th, true);
      }
    }
    const double d = static_cast<double>(t.targets.size());
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += -2.0 * t.weight * (std::conj(tr) * dtr[i]).real() / (d * d);
  }

  void build_subsystem(const CompilationProblem& p) {
    const int L = p.L();
    require(p.L_tilde >= 1 && p.L_tilde <= L, "compilation size must satisfy 1 <= L~ <= L");
    std::map<std::string, std::size_t> seen;
    for (int j = 0; j < L; ++j) {
      auto w = detail::window_pieces(p, j);
      std::string key = detail::hamiltonian_signature(w.h) + "#" + signature(w.V);
      if (!full_space_)
        for (const auto& pr : w.preps) key += "#" + signature(pr);
      auto it = seen.find(key);
      if (it == seen.end()) {
        LocalTerm t;
        t.V = std::move(w.V);
        if (full_space_) {
          t.targets = detail::basis_targets(w.h, p.tau, p.target_r);
        } else {
          t.targets = detail::echo_targets(w.h, p.tau, p.target_r, w.preps);
          t.preps = std::move(w.preps);
        }
        it = seen.emplace(key, terms_.size()).first;
        terms_.push_back(std::move(t));
      }
      LocalTerm& t = terms_[it->second];
      t.weight += 1.0 / L;
      // merge identical measurement sets
      bool merged = false;
      for (auto& [qs, wt] : t.measures)
        if (qs == w.measured) {
          wt += 1.0 / L;
          merged = true;
        }
      if (!merged) t.measures.emplace_back(w.measured, 1.0 / L);
    }
  }

  void whole_register(const GroupedHamiltonian& h, const ParamCircuit& V, const SubspaceBasis& b, int target_r,
                      double tau) {
    require(V.n_qubits == h.n_qubits(), "ansatz register does not match the Hamiltonian");
    LocalTerm t;
    t.V = V;
    t.preps = b.preps;
    t.targets = detail::echo_targets(h, tau, target_r, b.preps);
    const Layout& lay = h.layout;
    for (int j = 0; j < lay.sites; ++j) {
      std::vector<int> qs;
      for (int o = 0; o < lay.orbitals(); ++o) qs.push_back(lay.qubit(j, o));
      t.measures.emplace_back(qs, 1.0 / lay.sites);
    }
    t.weight = 1.0;
    terms_.push_back(std::move(t));
  }

  void build_translational(const CompilationProblem& p) {
    require(p.h.layout.periodic() && p.cell_h.layout.periodic(), "translational mode needs periodic boundaries");
    require(p.cell_ansatz.slots == p.ansatz.slots, "cell ansatz slots differ from the full ansatz");
    require(p.cell_h.layout.sites == p.L_tilde, "cell lattice must have L~ sites");
    whole_register(p.cell_h, p.cell_ansatz, p.cell_basis, p.target_r, p.tau);
  }

  void build_full(const CompilationProblem& p) { whole_register(p.h, p.ansatz, p.basis, p.target_r, p.tau); }
};

// ------------------------------------------------------------------ optimize

struct CompilationResult {
  Params theta;
  ParamBinding binding;
  double initial_cost = 0.0;
  double final_cost = 0.0;
  std::vector<double> trace;
  int iterations = 0;
  long evaluations = 0;
  OptStatus status = OptStatus::max_iter;
  double grad_norm = 0.0;
  double wall_seconds = 0.0;
};

inline CompilationResult optimize(const CompilationProblem& p, const ParamBinding& init, const BfgsOptions& o = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  const CostFunction cost(p);
  const Params x0 = bind_params(p.ansatz, init);
  Gradient grad = nullptr;
  if (cost.has_gradient()) grad = [&](const Params& th) { return cost.gradient(th); };
  const auto r = bfgs([&](const Params& th) { return cost(th); }, x0, o, grad);
  CompilationResult out;
  out.theta = r.x;
  out.binding = binding_of(p.ansatz, r.x);
  out.initial_cost = r.trace.front();
  out.final_cost = r.f;
  out.trace = r.trace;
  out.iterations = r.iterations;
  out.evaluations = r.evaluations;
  out.status = r.status;
  out.grad_norm = r.grad_norm;
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

// ------------------------------------------------------------------ full-size check

struct BoundsReport {
  double eps_opt = 0.0;
  double llet_full = 0.0;
  double let_full = 0.0;
  double slack = 0.0;
  bool llet_within = false;  // llet_full <= eps_opt + slack
  bool sandwich = false;     // llet <= let <= n_qubits * llet
};

/// Evaluate the full-size LET/LLET costs at theta, against the r=target_r
/// Trotter reference on all L sites.
inline BoundsReport theorem_bounds_check(const CompilationProblem& p, const Params& th, double eps_opt,
                                         double slack = 0.0) {
  check_state_cap(p.h.n_qubits());
  const ParamCircuit U = fuse_pairs(build_trotter1(p.h, p.tau, p.target_r));
  BoundsReport r;
  r.eps_opt = eps_opt;
  r.slack = slack;
  r.llet_full = cost_llet(U, p.ansatz, th, p.basis).value;
  r.let_full = cost_let(U, p.ansatz, th, p.basis);
  r.llet_within = r.llet_full <= eps_opt + slack;
  const double n = p.h.n_qubits();
  r.sandwich = r.llet_full <= r.let_full + 1e-12 && r.let_full <= n * r.llet_full + 1e-12;
  return r;
}

}  // namespace lsvqc
