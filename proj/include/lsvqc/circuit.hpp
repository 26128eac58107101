#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <cstdio>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "lsvqc/dense.hpp"
#include "lsvqc/error.hpp"
#include "lsvqc/model.hpp"
#include "lsvqc/pauli.hpp"
#include "lsvqc/state.hpp"

namespace lsvqc {

using Params = std::vector<double>;
using ParamBinding = std::map<std::string, double>;

/// Five-angle number-conserving two-qubit gate, basis {00, 01, 10, 11}.
inline Mat4 symmetry_gate(double eta, double zeta, double chi, double gamma, double phi) {
  const cplx I{0.0, 1.0};
  Mat4 m = Mat4::Zero();
  m(0, 0) = 1.0;
  m(1, 1) = std::exp(-I * (gamma + zeta)) * std::cos(eta);
  m(1, 2) = -I * std::exp(-I * (gamma - chi)) * std::sin(eta);
  m(2, 1) = -I * std::exp(-I * (gamma + chi)) * std::sin(eta);
  m(2, 2) = std::exp(-I * (gamma - zeta)) * std::cos(eta);
  m(3, 3) = std::exp(-I * (2 * gamma + phi));
  return m;
}

inline Mat4 symmetry_gate(const std::array<double, 5>& a) { return symmetry_gate(a[0], a[1], a[2], a[3], a[4]); }

struct Gate {
  enum class Kind { pauli_rotation, two_qubit_dense };
  Kind kind = Kind::pauli_rotation;

  // pauli_rotation: exp(i angle P), angle = fixed + scale * theta[slot] (slot < 0: fixed only)
  PauliString generator;
  int slot = -1;
  double scale = 1.0;
  double fixed = 0.0;

  // two_qubit_dense on the ordered pair (qa, qb). If sym_slot >= 0 the matrix is
  // symmetry_gate(theta[sym_slot .. sym_slot+4]); otherwise `matrix`.
  int qa = -1, qb = -1;
  Mat4 matrix = Mat4::Identity();
  int sym_slot = -1;

  std::uint64_t support() const {
    if (kind == Kind::pauli_rotation) return generator.support();
    return (std::uint64_t{1} << qa) | (std::uint64_t{1} << qb);
  }
  bool parametric() const { return slot >= 0 || sym_slot >= 0; }

  double angle(const Params& th) const { return slot < 0 ? fixed : fixed + scale * th[slot]; }
  Mat4 unitary(const Params& th) const {
    if (sym_slot < 0) return matrix;
    return symmetry_gate(th[sym_slot], th[sym_slot + 1], th[sym_slot + 2], th[sym_slot + 3], th[sym_slot + 4]);
  }
};

inline Gate rotation_gate(PauliString p, double fixed, int slot = -1, double scale = 1.0) {
  Gate g;
  g.kind = Gate::Kind::pauli_rotation;
  g.generator = std::move(p);
  g.fixed = fixed;
  g.slot = slot;
  g.scale = scale;
  return g;
}

inline Gate dense_gate(const Mat4& u, int qa, int qb) {
  if (!is_unitary(u)) fail("two-qubit gate is not unitary within 1e-10");
  Gate g;
  g.kind = Gate::Kind::two_qubit_dense;
  g.matrix = u;
  g.qa = qa;
  g.qb = qb;
  return g;
}

inline Gate symmetry_brick(int qa, int qb, int first_slot) {
  Gate g;
  g.kind = Gate::Kind::two_qubit_dense;
  g.qa = qa;
  g.qb = qb;
  g.sym_slot = first_slot;
  return g;
}

/// Ordered gate list with named parameter slots.
struct ParamCircuit {
  int n_qubits = 0;
  Layout layout;
  std::string family;  // "brickwall", "vha", "trotter", "prep", ...
  int depth = 0;       // declared layer count for ansatz families
  std::vector<Gate> gates;
  std::vector<std::string> slots;
  std::vector<std::size_t> layer_ends;  // gate index after each declared layer

  ParamCircuit() = default;
  explicit ParamCircuit(const Layout& lay) : n_qubits(lay.n_qubits()), layout(lay) {}

  int add_slot(const std::string& name) {
    slots.push_back(name);
    return static_cast<int>(slots.size()) - 1;
  }
  int slot_index(const std::string& name) const {
    for (std::size_t i = 0; i < slots.size(); ++i)
      if (slots[i] == name) return static_cast<int>(i);
    return -1;
  }
  std::size_t n_slots() const { return slots.size(); }

  void add(Gate g) {
    const std::uint64_t s = g.support();
    if (n_qubits < 64 && (s >> n_qubits) != 0) fail("gate support outside the register");
    if (g.kind == Gate::Kind::pauli_rotation && g.generator.n != n_qubits) fail("rotation generator register mismatch");
    if (g.kind == Gate::Kind::two_qubit_dense && g.qa == g.qb) fail("two-qubit gate needs distinct targets");
    gates.push_back(std::move(g));
  }
  void end_layer() { layer_ends.push_back(gates.size()); }

  /// Append another circuit on the same register; its slots are appended too.
  void append(const ParamCircuit& o) {
    require(o.n_qubits == n_qubits, "cannot append circuits on different registers");
    const int off = static_cast<int>(slots.size());
    const std::size_t goff = gates.size();
    slots.insert(slots.end(), o.slots.begin(), o.slots.end());
    for (auto e : o.layer_ends) layer_ends.push_back(e + goff);
    for (Gate g : o.gates) {
      if (g.slot >= 0) g.slot += off;
      if (g.sym_slot >= 0) g.sym_slot += off;
      gates.push_back(std::move(g));
    }
  }
};

/// Slot values in circuit order from a name -> value map; every slot must be bound.
inline Params bind_params(const ParamCircuit& c, const ParamBinding& b) {
  Params p(c.n_slots());
  for (std::size_t i = 0; i < c.n_slots(); ++i) {
    auto it = b.find(c.slots[i]);
    if (it == b.end()) fail("binding leaves slot \"" + c.slots[i] + "\" open");
    p[i] = it->second;
  }
  return p;
}

inline ParamBinding binding_of(const ParamCircuit& c, const Params& p) {
  require(p.size() == c.n_slots(), "parameter vector does not match the slot table");
  ParamBinding b;
  for (std::size_t i = 0; i < p.size(); ++i) b[c.slots[i]] = p[i];
  return b;
}

namespace detail {
// Symmetry gate has six nonzeros; skip the generic 4x4 product.
inline void apply_symmetry_gate(StateVector& s, const Mat4& u, int qa, int qb) {
  const std::uint64_t ma = std::uint64_t{1} << qa, mb = std::uint64_t{1} << qb;
  const cplx m11 = u(1, 1), m12 = u(1, 2), m21 = u(2, 1), m22 = u(2, 2), m33 = u(3, 3);
  cplx* a = s.data();
  const std::size_t d = s.dim();
  const int lo = std::min(qa, qb), hi = std::max(qa, qb);
  for (std::size_t k = 0; k < d / 4; ++k) {
    const std::size_t i = insert_zero(insert_zero(k, lo), hi);
    const std::size_t i1 = i | mb, i2 = i | ma;
    const cplx v1 = a[i1], v2 = a[i2];
    a[i1] = m11 * v1 + m12 * v2;
    a[i2] = m21 * v1 + m22 * v2;
    a[i | ma | mb] *= m33;
  }
}

inline void apply_gate(StateVector& s, const Gate& g, const Params& th, bool inverse) {
  if (g.kind == Gate::Kind::pauli_rotation) {
    const double a = g.angle(th);
    apply_pauli_rotation(s, g.generator, inverse ? -a : a);
    return;
  }
  if (g.qa >= s.n_qubits() || g.qb >= s.n_qubits()) fail("two-qubit gate target out of range");
  const Mat4 u = inverse ? Mat4(g.unitary(th).adjoint()) : g.unitary(th);
  if (g.sym_slot >= 0)
    apply_symmetry_gate(s, u, g.qa, g.qb);
  else
    apply_two_qubit_gate(s, u, g.qa, g.qb, false);
}
}  // namespace detail

inline void check_params(const ParamCircuit& c, const Params& th) {
  if (th.size() != c.n_slots()) fail("parameter vector does not match the slot table");
}

/// psi <- C(theta) psi, in place.
inline void apply(const ParamCircuit& c, const Params& th, StateVector& s) {
  check_params(c, th);
  if (s.n_qubits() != c.n_qubits) fail("circuit acts on a different register size");
  for (const auto& g : c.gates) detail::apply_gate(s, g, th, false);
}

/// psi <- C(theta)^dagger psi, in place.
inline void apply_inverse(const ParamCircuit& c, const Params& th, StateVector& s) {
  check_params(c, th);
  if (s.n_qubits() != c.n_qubits) fail("circuit acts on a different register size");
  for (auto it = c.gates.rbegin(); it != c.gates.rend(); ++it) detail::apply_gate(s, *it, th, true);
}

inline void apply(const ParamCircuit& c, StateVector& s) { apply(c, Params{}, s); }

inline StateVector run(const ParamCircuit& c, const Params& th, StateVector s) {
  apply(c, th, s);
  return s;
}

/// Dense oracle: product of per-gate dense matrices.
inline DenseOperator dense_matrix(const ParamCircuit& c, const Params& th, int n) {
  require(n == c.n_qubits, "dense_matrix register size mismatch");
  check_dense_cap(n);
  check_params(c, th);
  const Eigen::Index d = Eigen::Index{1} << n;
  DenseOperator m = DenseOperator::Identity(d, d);
  for (const auto& g : c.gates) {
    DenseOperator gm;
    if (g.kind == Gate::Kind::pauli_rotation) {
      const double a = g.angle(th);
      gm = std::cos(a) * DenseOperator::Identity(d, d) + cplx{0.0, std::sin(a)} * dense_matrix(g.generator);
    } else {
      gm = embed_two_qubit(g.unitary(th), g.qa, g.qb, n);
    }
    m = gm * m;
  }
  return m;
}

// ---------------------------------------------------------------- builders

/// Brick-wall ansatz of symmetry gates. Each layer applies bricks (i, i+1) for
/// even i, then odd i (including the wrap brick (L-1, 0) when periodic).
inline ParamCircuit build_brickwall(int L, int d_V, bool translational, Boundary boundary) {
  require(L >= 2, "brick-wall needs L >= 2");
  require(d_V >= 0, "depth must be nonnegative");
  if (boundary == Boundary::periodic && L % 2 != 0) fail("periodic brick-wall needs even L");
  ParamCircuit c(spin_chain_layout(L, boundary));
  c.family = "brickwall";
  c.depth = d_V;
  static const char* names[5] = {"eta", "zeta", "chi", "gamma", "phi"};
  auto slot5 = [&](const std::string& prefix) {
    int first = -1;
    for (int k = 0; k < 5; ++k) {
      const int s = c.add_slot(prefix + "." + names[k]);
      if (k == 0) first = s;
    }
    return first;
  };
  for (int l = 0; l < d_V; ++l) {
    for (int parity = 0; parity < 2; ++parity) {
      const std::string sub = "l" + std::to_string(l) + (parity == 0 ? ".A" : ".B");
      const int shared = translational ? slot5(sub) : -1;
      for (int i = parity; i < L; i += 2) {
        if (i + 1 >= L && !(boundary == Boundary::periodic && L > 2)) continue;
        const int j = (i + 1) % L;
        const int first = translational ? shared : slot5(sub + ".b" + std::to_string(i));
        c.add(symmetry_brick(i, j, first));
      }
    }
    c.end_layer();
  }
  return c;
}

/// VHA: N_L layers, each applying exp(-i theta_{l,m} H_m) group by group.
inline ParamCircuit build_vha(const GroupedHamiltonian& h, int N_L) {
  require(N_L >= 1, "VHA needs N_L >= 1");
  ParamCircuit c(h.layout);
  c.family = "vha";
  c.depth = N_L;
  for (int l = 0; l < N_L; ++l) {
    for (std::size_t m = 0; m < h.groups.size(); ++m) {
      const int s = c.add_slot("l" + std::to_string(l) + "." + h.groups[m].name);
      for (const auto& p : h.groups[m].terms.terms) {
        PauliString gen = p;
        gen.coeff = 1.0;
        c.add(rotation_gate(gen, 0.0, s, -p.coeff.real()));
      }
    }
    c.end_layer();
  }
  return c;
}

/// r steps of prod_m exp(-i (t/r) c_m H_m); converges to exp(-itH).
inline ParamCircuit build_trotter1(const GroupedHamiltonian& h, double t, int r) {
  require(r >= 1, "Trotter needs r >= 1");
  ParamCircuit c(h.layout);
  c.family = "trotter";
  c.depth = r;
  const double dt = t / r;
  for (int k = 0; k < r; ++k) {
    for (const auto& g : h.groups)
      for (const auto& p : g.terms.terms) {
        PauliString gen = p;
        gen.coeff = 1.0;
        c.add(rotation_gate(gen, -dt * g.c * p.coeff.real()));
      }
    c.end_layer();
  }
  return c;
}

/// Parameters that make a VHA or brick-wall ansatz equal to the same-depth
/// Trotter circuit (brick-wall: up to a global phase per gate).
inline Params trotter_equivalent_init(const ParamCircuit& ansatz, const GroupedHamiltonian& h, double tau) {
  Params p(ansatz.n_slots(), 0.0);
  if (ansatz.family == "vha") {
    const double dt = tau / ansatz.depth;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const auto dot = ansatz.slots[i].find('.');
      const std::string gname = ansatz.slots[i].substr(dot + 1);
      bool found = false;
      for (const auto& g : h.groups)
        if (g.name == gname) {
          p[i] = dt * g.c;
          found = true;
        }
      if (!found) fail("VHA slot \"" + ansatz.slots[i] + "\" has no matching Hamiltonian group");
    }
    return p;
  }
  if (ansatz.family == "brickwall") {
    if (h.model != "heisenberg") fail("brick-wall Trotter embedding is only known for the Heisenberg chain");
    // exp(-i tau'(XX+YY+ZZ)) = e^{-i tau'} v(2tau', 0, 0, -2tau', 4tau')
    const double tp = ansatz.depth > 0 ? tau / ansatz.depth : 0.0;
    const double vals[5] = {2 * tp, 0.0, 0.0, -2 * tp, 4 * tp};
    for (std::size_t i = 0; i < p.size(); ++i) {
      const std::string& s = ansatz.slots[i];
      const std::string leaf = s.substr(s.rfind('.') + 1);
      static const char* names[5] = {"eta", "zeta", "chi", "gamma", "phi"};
      for (int k = 0; k < 5; ++k)
        if (leaf == names[k]) p[i] = vals[k];
    }
    return p;
  }
  fail("ansatz family \"" + ansatz.family + "\" has no known Trotter embedding");
}

/// |1010...10>: X on odd qubits, realised as exp(i pi/2 X) = iX.
inline ParamCircuit neel_prep(int L, Boundary boundary = Boundary::periodic) {
  require(L >= 2 && L % 2 == 0, "Neel state needs even L");
  ParamCircuit c(spin_chain_layout(L, boundary));
  c.family = "prep";
  for (int q = 1; q < L; q += 2) c.add(rotation_gate(pauli(L, {{q, 'X'}}), std::numbers::pi / 2));
  c.end_layer();
  return c;
}

/// Single-qubit X flips on the given qubits (as exp(i pi/2 X)).
inline ParamCircuit flip_prep(const Layout& lay, const std::vector<int>& qubits) {
  ParamCircuit c(lay);
  c.family = "prep";
  for (int q : qubits) c.add(rotation_gate(pauli(lay.n_qubits(), {{q, 'X'}}), std::numbers::pi / 2));
  return c;
}

namespace detail {
// Givens network for one spin block. Returns the 2x2 mode rotations on
// (p, p+1) in application order.
struct ModeRotation {
  int p;
  double c, s;
};

inline std::vector<ModeRotation> givens_sweep(const Eigen::MatrixXd& h, int n_occ) {
  const int L = static_cast<int>(h.rows());
  std::vector<ModeRotation> out;
  if (n_occ == 0) return out;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  Eigen::MatrixXd Q = es.eigenvectors().leftCols(n_occ).transpose();  // rows = orbitals
  const int N = n_occ;
  auto row_rot = [&](int i, int k, int col) {  // zero Q(i,col) against Q(k,col)
    const double a = Q(k, col), b = Q(i, col);
    const double r = std::hypot(a, b);
    if (r < 1e-300) return;
    const double c = a / r, s = b / r;
    const Eigen::RowVectorXd ri = Q.row(i), rk = Q.row(k);
    Q.row(k) = c * rk + s * ri;
    Q.row(i) = -s * rk + c * ri;
  };
  // Staircase: row i is nonzero only in columns <= L-N+i.
  for (int j = L - 1; j > L - N; --j) {
    const int t = j - (L - N);
    for (int i = 0; i < t; ++i) row_rot(i, i + 1, j);
  }
  std::vector<ModeRotation> gen;
  for (int i = 0; i < N; ++i) {
    for (int c = L - N + i; c > i; --c) {
      const double a = Q(i, c - 1), b = Q(i, c);
      const double r = std::hypot(a, b);
      if (r < 1e-300 || std::abs(b) < 1e-15) continue;
      const double cg = a / r, sg = b / r;
      const Eigen::VectorXd x = Q.col(c - 1), y = Q.col(c);
      Q.col(c - 1) = cg * x + sg * y;
      Q.col(c) = -sg * x + cg * y;
      gen.push_back({c - 1, cg, sg});
    }
  }
  std::reverse(gen.begin(), gen.end());
  return gen;
}
}  // namespace detail

/// Slater determinant of the lowest orbitals of `h`, n_up in the up block and
/// n_dn in the down block, from nearest-neighbour Givens rotations.
/// For a spin_chain layout only the up count is used (spinless modes 0..L-1).
inline ParamCircuit givens_ground_prep(const Eigen::MatrixXd& h, int n_up, int n_dn, const Layout& lay) {
  require(h.rows() == h.cols(), "one-body matrix must be square");
  if ((h - h.transpose()).cwiseAbs().maxCoeff() > 1e-12) fail("one-body matrix is not symmetric");
  require(h.rows() == lay.sites, "one-body matrix size must match the lattice");
  const int L = lay.sites;
  require(n_up >= 0 && n_up <= L && n_dn >= 0 && n_dn <= L, "occupation out of range");
  ParamCircuit c(lay);
  c.family = "prep";
  const int blocks = lay.orbitals();
  for (int orb = 0; orb < blocks; ++orb) {
    const int n = orb == 0 ? n_up : n_dn;
    for (int p = 0; p < n; ++p) c.add(rotation_gate(pauli(lay.n_qubits(), {{lay.qubit(p, orb), 'X'}}), std::numbers::pi / 2));
  }
  for (int orb = 0; orb < blocks; ++orb) {
    const int n = orb == 0 ? n_up : n_dn;
    for (const auto& g : detail::givens_sweep(h, n)) {
      Mat4 m = Mat4::Zero();
      // mode block B = [[c, -s], [s, c]] on (p, p+1); row/col index 2*bit(qa)+bit(qb)
      m(0, 0) = 1.0;
      m(2, 2) = g.c;
      m(2, 1) = -g.s;
      m(1, 2) = g.s;
      m(1, 1) = g.c;
      m(3, 3) = 1.0;
      c.add(dense_gate(m, lay.qubit(g.p, orb), lay.qubit(g.p + 1, orb)));
    }
  }
  return c;
}

inline ParamCircuit givens_ground_prep(const Eigen::MatrixXd& h, int n_e, const Layout& lay) {
  if (lay.kind == Layout::Kind::spin_chain) return givens_ground_prep(h, n_e, 0, lay);
  require(n_e % 2 == 0, "closed-shell Givens prep needs even N_e");
  return givens_ground_prep(h, n_e / 2, n_e / 2, lay);
}

/// Bake slot values into the gates; the result has no open slots.
inline ParamCircuit freeze(const ParamCircuit& c, const Params& th) {
  check_params(c, th);
  ParamCircuit r = c;
  for (auto& g : r.gates) {
    if (g.kind == Gate::Kind::pauli_rotation) {
      g.fixed = g.angle(th);
      g.slot = -1;
    } else if (g.sym_slot >= 0) {
      g.matrix = g.unitary(th);
      g.sym_slot = -1;
    }
  }
  r.slots.clear();
  return r;
}

namespace detail {
// exp(i a P) for a two-qubit P on (qa, qb) in the 2*bit(qa)+bit(qb) basis.
inline Mat4 rotation_matrix4(const PauliString& p, double a, int qa, int qb) {
  Mat4 pm = Mat4::Zero();
  const cplx iy = i_pow(p.n_y());
  for (int col = 0; col < 4; ++col) {
    std::uint64_t b = 0;
    if (col & 2) b |= std::uint64_t{1} << qa;
    if (col & 1) b |= std::uint64_t{1} << qb;
    const std::uint64_t out = b ^ p.x;
    const int row = 2 * static_cast<int>((out >> qa) & 1u) + static_cast<int>((out >> qb) & 1u);
    pm(row, col) = iy * pauli_sign(b, p.z);
  }
  return std::cos(a) * Mat4::Identity() + cplx{0.0, std::sin(a)} * pm;
}
}  // namespace detail

/// Merge runs of fixed gates that act on the same qubit pair into one dense
/// 4x4 gate. Parametric gates are kept as they are.
inline ParamCircuit fuse_pairs(const ParamCircuit& c) {
  ParamCircuit r = c;
  r.gates.clear();
  r.layer_ends.clear();
  std::size_t next_layer = 0;
  auto pair_of = [](const Gate& g, int& qa, int& qb) {
    if (g.parametric()) return false;
    if (g.kind == Gate::Kind::two_qubit_dense) {
      qa = g.qa;
      qb = g.qb;
      return true;
    }
    if (g.generator.weight() != 2) return false;
    const auto q = g.generator.qubits();
    qa = q[0];
    qb = q[1];
    return true;
  };
  auto as_matrix = [](const Gate& g, int qa, int qb) -> Mat4 {
    if (g.kind == Gate::Kind::pauli_rotation) return detail::rotation_matrix4(g.generator, g.fixed, qa, qb);
    if (g.qa == qa) return g.matrix;
    Mat4 sw = Mat4::Zero();
    sw(0, 0) = sw(3, 3) = sw(1, 2) = sw(2, 1) = 1.0;
    return sw * g.matrix * sw;
  };
  std::size_t i = 0;
  while (i < c.gates.size()) {
    int qa = -1, qb = -1;
    if (!pair_of(c.gates[i], qa, qb)) {
      r.gates.push_back(c.gates[i]);
      ++i;
    } else {
      Mat4 m = as_matrix(c.gates[i], qa, qb);
      std::size_t j = i + 1;
      while (j < c.gates.size()) {
        // stop at declared layer boundaries so layer_ends stay meaningful
        bool boundary = false;
        for (auto e : c.layer_ends) boundary = boundary || e == j;
        if (boundary) break;
        int a = -1, b = -1;
        if (!pair_of(c.gates[j], a, b) || !((a == qa && b == qb) || (a == qb && b == qa))) break;
        m = as_matrix(c.gates[j], qa, qb) * m;
        ++j;
      }
      if (j == i + 1)
        r.gates.push_back(c.gates[i]);
      else
        r.gates.push_back(dense_gate(m, qa, qb));
      i = j;
    }
    while (next_layer < c.layer_ends.size() && c.layer_ends[next_layer] <= i) {
      r.layer_ends.push_back(r.gates.size());
      ++next_layer;
    }
  }
  return r;
}

/// Text fingerprint of a circuit; equal strings mean identical action.
inline std::string signature(const ParamCircuit& c) {
  std::string s = std::to_string(c.n_qubits) + "|";
  char buf[64];
  auto num = [&](double x) {
    std::snprintf(buf, sizeof buf, "%a,", x);
    s += buf;
  };
  for (const auto& g : c.gates) {
    if (g.kind == Gate::Kind::pauli_rotation) {
      s += "R" + g.generator.label() + ":" + std::to_string(g.slot) + ",";
      num(g.scale);
      num(g.fixed);
    } else {
      s += "D" + std::to_string(g.qa) + "," + std::to_string(g.qb) + "," + std::to_string(g.sym_slot) + ",";
      if (g.sym_slot < 0)
        for (int k = 0; k < 16; ++k) {
          num(g.matrix(k / 4, k % 4).real());
          num(g.matrix(k / 4, k % 4).imag());
        }
    }
    s += ";";
  }
  return s;
}

// ------------------------------------------------------- locality & depth

inline std::vector<int> gate_sites(const Layout& lay, const Gate& g) { return support_sites(lay, g.support()); }

/// Every gate must fit in a ring arc of at most `max_span` sites.
inline void check_locality(const ParamCircuit& c, int max_span = 3) {
  for (const auto& g : c.gates)
    if (site_span(c.layout, gate_sites(c.layout, g)) > max_span) fail("nonlocal gate encountered during restriction");
}

/// Keep the gates supported inside the window; labels and slots unchanged.
inline ParamCircuit restrict_circuit(const ParamCircuit& c, int center, int size) {
  require(size < c.layout.sites, "restriction size must be smaller than the lattice");
  check_locality(c);
  const Window w = make_window(c.layout, center, size);
  ParamCircuit r = c;
  r.gates.clear();
  r.layer_ends.clear();
  std::size_t next_layer = 0;
  for (std::size_t i = 0; i < c.gates.size(); ++i) {
    if (w.contains(c.gates[i].support())) r.gates.push_back(c.gates[i]);
    while (next_layer < c.layer_ends.size() && c.layer_ends[next_layer] == i + 1) {
      r.layer_ends.push_back(r.gates.size());
      ++next_layer;
    }
  }
  return r;
}

/// Move a circuit whose gates all lie inside the window onto the local register.
inline ParamCircuit relabel(const ParamCircuit& c, const Window& w) {
  require(c.layout == w.parent, "window belongs to a different layout");
  ParamCircuit r = c;
  r.layout = w.local;
  r.n_qubits = w.local.n_qubits();
  for (auto& g : r.gates) {
    if (!w.contains(g.support())) fail("gate leaves the window");
    if (g.kind == Gate::Kind::pauli_rotation) {
      g.generator = relabel(g.generator, w);
    } else {
      g.qa = w.local_qubit(g.qa);
      g.qb = w.local_qubit(g.qb);
    }
  }
  return r;
}

/// Brick-layer depth: multi-qubit gates repeating the previous support are
/// fused, the rest are layered greedily, and two sublayers make one layer.
inline int two_qubit_depth(const ParamCircuit& c) {
  std::vector<int> level(c.n_qubits, 0), last(c.n_qubits, -1);
  std::vector<std::uint64_t> masks;
  int top = 0;
  for (const auto& g : c.gates) {
    const std::uint64_t m = g.support();
    if (std::popcount(m) < 2) continue;
    std::vector<int> qs;
    for (int q = 0; q < c.n_qubits; ++q)
      if ((m >> q) & 1u) qs.push_back(q);
    const int prev = last[qs[0]];
    bool fuse = prev >= 0 && masks[prev] == m;
    for (int q : qs) fuse = fuse && last[q] == prev;
    if (fuse) continue;
    int lv = 0;
    for (int q : qs) lv = std::max(lv, level[q]);
    ++lv;
    const int id = static_cast<int>(masks.size());
    masks.push_back(m);
    for (int q : qs) {
      level[q] = lv;
      last[q] = id;
    }
    top = std::max(top, lv);
  }
  return (top + 1) / 2;
}

}  // namespace lsvqc
