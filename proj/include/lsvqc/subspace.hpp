#pragma once

#include <Eigen/Dense>
#include <numbers>
#include <string>
#include <vector>

#include "circuit.hpp"

namespace lsvqc {

struct SubspaceSpec {
  enum class Kind { krylov, gf_krylov };
  Kind kind = Kind::krylov;
  int N_t = 0;
  double dt = 0.0;
  double phi = 0.4 * std::numbers::pi;  // gf_krylov only
  ParamCircuit base_prep;               // W_0, frozen
};

inline SubspaceSpec::Kind parse_subspace_kind(const std::string& s) {
  if (s == "krylov") return SubspaceSpec::Kind::krylov;
  if (s == "gf_krylov") return SubspaceSpec::Kind::gf_krylov;
  fail("unknown subspace kind '" + s + "'", ErrorKind::config);
}

struct SubspaceBasis {
  std::vector<ParamCircuit> preps;
  std::size_t size() const { return preps.size(); }
  int n_qubits() const { return preps.empty() ? 0 : preps.front().n_qubits; }
};

namespace detail {
inline void check_spec(const SubspaceSpec& spec) {
  require(spec.N_t >= 0, "N_t must be nonnegative");
  require(spec.N_t == 0 || spec.dt > 0.0, "dt must be positive when N_t >= 1");
  require(spec.base_prep.n_slots() == 0, "base prep must be frozen (no open slots)");
}

// W then one Trotter step of length t (nothing at t = 0).
inline ParamCircuit then_trotter(ParamCircuit w, const GroupedHamiltonian& h, double t) {
  if (t != 0.0) w.append(build_trotter1(h, t, 1));
  return w;
}
}  // namespace detail

inline SubspaceBasis krylov_basis(const SubspaceSpec& spec, const GroupedHamiltonian& h) {
  require(spec.kind == SubspaceSpec::Kind::krylov, "krylov_basis needs kind = krylov");
  detail::check_spec(spec);
  require(spec.base_prep.n_qubits == h.n_qubits(), "base prep register does not match the Hamiltonian");
  SubspaceBasis b;
  for (int k = 0; k <= spec.N_t; ++k) b.preps.push_back(detail::then_trotter(spec.base_prep, h, k * spec.dt));
  return b;
}

/// Per time step: bare, R_X(phi) on each qubit, R_Y(phi) on each qubit, each
/// followed by one Trotter step at t_n.
inline SubspaceBasis gf_basis(const SubspaceSpec& spec, const GroupedHamiltonian& h) {
  require(spec.kind == SubspaceSpec::Kind::gf_krylov, "gf_basis needs kind = gf_krylov");
  detail::check_spec(spec);
  const int n = h.n_qubits();
  require(spec.base_prep.n_qubits == n, "base prep register does not match the Hamiltonian");
  SubspaceBasis b;
  for (int k = 0; k <= spec.N_t; ++k) {
    const double t = k * spec.dt;
    b.preps.push_back(detail::then_trotter(spec.base_prep, h, t));
    for (char axis : {'X', 'Y'})
      for (int j = 0; j < n; ++j) {
        ParamCircuit w = spec.base_prep;
        w.add(rotation_gate(pauli(n, {{j, axis}}), spec.phi));
        w.end_layer();
        b.preps.push_back(detail::then_trotter(std::move(w), h, t));
      }
  }
  return b;
}

inline std::vector<StateVector> prepare_states(const SubspaceBasis& b) {
  std::vector<StateVector> out;
  out.reserve(b.size());
  for (const auto& w : b.preps) {
    check_state_cap(w.n_qubits);
    StateVector s(w.n_qubits);
    apply(w, s);
    out.push_back(std::move(s));
  }
  return out;
}

struct GramianReport {
  Eigen::MatrixXcd matrix;
  double det_modulus = 0.0;
  int rank = 0;
  double min_eigenvalue = 0.0;
};

inline GramianReport gramian(const std::vector<StateVector>& states, double tol = 1e-8) {
  const auto n = static_cast<Eigen::Index>(states.size());
  GramianReport r;
  r.matrix.resize(n, n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = a; b < n; ++b) {
      r.matrix(a, b) = inner_product(states[a], states[b]);
      r.matrix(b, a) = std::conj(r.matrix(a, b));
    }
  if (n == 0) {
    r.det_modulus = 1.0;
    return r;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(r.matrix, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd ev = es.eigenvalues();
  r.min_eigenvalue = ev.minCoeff();
  // For a PSD matrix the singular values are |eigenvalues|.
  double det = 1.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    det *= std::abs(ev(i));
    if (std::abs(ev(i)) > tol) ++r.rank;
  }
  r.det_modulus = det;
  return r;
}

inline GramianReport gramian(const SubspaceBasis& b, double tol = 1e-8) { return gramian(prepare_states(b), tol); }

}  // namespace lsvqc
