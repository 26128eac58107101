#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "lsvqc/error.hpp"
#include "lsvqc/pauli.hpp"

namespace lsvqc {

enum class Boundary { periodic, open };

inline Boundary parse_boundary(const std::string& s) {
  if (s == "periodic") return Boundary::periodic;
  if (s == "open") return Boundary::open;
  throw Error(ErrorKind::config, "boundary must be \"periodic\" or \"open\", got \"" + s + "\"");
}
inline std::string to_string(Boundary b) { return b == Boundary::periodic ? "periodic" : "open"; }

/// Map between lattice sites and qubits.
///
/// spin_chain: one qubit per site, qubit == site.
/// hubbard: two qubits per site, up spin of site i on qubit i and down spin
/// on qubit 2L-1-i.
struct Layout {
  enum class Kind { spin_chain, hubbard };
  Kind kind = Kind::spin_chain;
  int sites = 0;
  Boundary boundary = Boundary::periodic;

  int orbitals() const { return kind == Kind::hubbard ? 2 : 1; }
  int n_qubits() const { return sites * orbitals(); }
  bool periodic() const { return boundary == Boundary::periodic; }

  int qubit(int site, int orb = 0) const {
    if (orb == 0) return site;
    return 2 * sites - 1 - site;
  }
  int site_of(int q) const { return q < sites ? q : 2 * sites - 1 - q; }
  int orbital_of(int q) const { return q < sites ? 0 : 1; }

  /// Signed site offset b - a, shortest way around the ring when periodic.
  int offset(int a, int b) const {
    int d = b - a;
    if (periodic()) {
      d = ((d % sites) + sites) % sites;
      if (d > sites / 2) d -= sites;
    }
    return d;
  }
  int distance(int a, int b) const { return std::abs(offset(a, b)); }

  bool operator==(const Layout& o) const {
    return kind == o.kind && sites == o.sites && boundary == o.boundary;
  }
};

inline Layout spin_chain_layout(int L, Boundary b) { return Layout{Layout::Kind::spin_chain, L, b}; }
inline Layout hubbard_layout(int L, Boundary b) { return Layout{Layout::Kind::hubbard, L, b}; }

/// Smallest ring arc (in sites) that covers the given sites.
inline int site_span(const Layout& lay, std::vector<int> sites) {
  std::sort(sites.begin(), sites.end());
  sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
  if (sites.size() <= 1) return static_cast<int>(sites.size());
  const int L = lay.sites;
  if (!lay.periodic()) return sites.back() - sites.front() + 1;
  int max_gap = 0;
  for (std::size_t k = 0; k < sites.size(); ++k) {
    const int a = sites[k], b = (k + 1 < sites.size()) ? sites[k + 1] : sites.front() + L;
    max_gap = std::max(max_gap, b - a);
  }
  return L - max_gap + 1;
}

inline std::vector<int> support_sites(const Layout& lay, std::uint64_t qubit_mask) {
  std::vector<int> s;
  for (int q = 0; q < lay.n_qubits(); ++q)
    if ((qubit_mask >> q) & 1u) s.push_back(lay.site_of(q));
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

/// Contiguous window of `size` sites around `center`, and its relabeling
/// onto a fresh open register laid out like the parent.
struct Window {
  Layout parent;
  Layout local;
  int center = 0;
  std::vector<int> sites;        // parent site per window position
  std::vector<int> position;     // window position per parent site, -1 outside
  std::vector<int> qubit_map;    // parent qubit -> local qubit, -1 outside
  std::uint64_t qubit_mask = 0;  // parent qubits inside

  bool contains_site(int s) const { return position[s] >= 0; }
  bool contains(std::uint64_t mask) const { return (mask & ~qubit_mask) == 0; }
  int local_qubit(int q) const { return qubit_map[q]; }
  bool full() const { return static_cast<int>(sites.size()) == parent.sites; }
};

/// Window of exactly `size` sites: {j - floor(size/2), ..., j - floor(size/2) + size - 1}.
/// Open chains clip at the ends. size >= L returns the whole lattice in order.
inline Window make_window(const Layout& lay, int center, int size) {
  require(center >= 0 && center < lay.sites, "window center out of range");
  require(size >= 1, "window size must be positive");
  Window w;
  w.parent = lay;
  w.center = center;
  w.position.assign(lay.sites, -1);
  if (size >= lay.sites) {
    for (int s = 0; s < lay.sites; ++s) w.sites.push_back(s);
  } else {
    const int start = center - size / 2;
    for (int p = 0; p < size; ++p) {
      int s = start + p;
      if (lay.periodic()) {
        s = ((s % lay.sites) + lay.sites) % lay.sites;
      } else if (s < 0 || s >= lay.sites) {
        continue;
      }
      w.sites.push_back(s);
    }
  }
  for (std::size_t p = 0; p < w.sites.size(); ++p) w.position[w.sites[p]] = static_cast<int>(p);
  const bool whole = static_cast<int>(w.sites.size()) == lay.sites;
  w.local = Layout{lay.kind, static_cast<int>(w.sites.size()), whole ? lay.boundary : Boundary::open};
  w.qubit_map.assign(lay.n_qubits(), -1);
  for (int q = 0; q < lay.n_qubits(); ++q) {
    const int p = w.position[lay.site_of(q)];
    if (p < 0) continue;
    w.qubit_map[q] = w.local.qubit(p, lay.orbital_of(q));
    w.qubit_mask |= std::uint64_t{1} << q;
  }
  return w;
}

inline PauliString relabel(const PauliString& p, const Window& w) {
  PauliString r(w.local.n_qubits(), p.coeff);
  require(w.contains(p.support()), "Pauli string leaves the window");
  for (int q = 0; q < p.n; ++q) {
    const char a = p.axis(q);
    if (a != 'I') r.set(w.local_qubit(q), a);
  }
  return r;
}

struct HamiltonianGroup {
  std::string name;
  PauliSum terms;  // unit-coefficient, mutually commuting
  double c = 0.0;
};

struct GroupedHamiltonian {
  std::string model;
  Layout layout;
  std::vector<HamiltonianGroup> groups;

  int n_qubits() const { return layout.n_qubits(); }

  PauliSum total() const {
    PauliSum h(n_qubits());
    for (const auto& g : groups) h.add(g.terms, g.c);
    return h.collected();
  }
  std::size_t term_count() const {
    std::size_t n = 0;
    for (const auto& g : groups) n += g.terms.size();
    return n;
  }
};

/// Sum_j (XX + YY + ZZ) on bonds (j, j+1); odd/even groups in 1-based naming.
inline GroupedHamiltonian build_heisenberg(int L, Boundary boundary) {
  require(L >= 2, "Heisenberg chain needs L >= 2");
  GroupedHamiltonian h;
  h.model = "heisenberg";
  h.layout = spin_chain_layout(L, boundary);
  HamiltonianGroup odd{"odd", PauliSum(L), 1.0}, even{"even", PauliSum(L), 1.0}, wrap{"wrap", PauliSum(L), 1.0};
  const int nb = boundary == Boundary::periodic ? L : L - 1;
  for (int i = 0; i < nb; ++i) {
    const int a = i, b = (i + 1) % L;
    HamiltonianGroup& g = (L % 2 == 1 && i == L - 1) ? wrap : ((i % 2 == 0) ? odd : even);
    for (char ax : {'X', 'Y', 'Z'}) g.terms.add(pauli(L, {{a, ax}, {b, ax}}));
  }
  h.groups.push_back(odd);
  h.groups.push_back(even);
  if (!wrap.terms.empty()) h.groups.push_back(wrap);
  return h;
}

struct HubbardParams {
  double t1 = 0.0;
  double t2 = 0.0;
  double U = 0.0;
  double mu = 0.0;
};

/// Table I downfolding parameters (eV).
inline HubbardParams sr2cuo3_params() { return {0.532, 0.0403, 1.054, 0.159}; }

namespace detail {
inline void add_hop(PauliSum& g, const Layout& lay, int si, int sj, int orb, int smid = -1) {
  const int n = lay.n_qubits();
  const int a = lay.qubit(si, orb), b = lay.qubit(sj, orb);
  for (char ax : {'X', 'Y'}) {
    PauliString p(n);
    p.set(a, ax).set(b, ax);
    if (smid >= 0) p.set(lay.qubit(smid, orb), 'Z');
    g.add(p);
  }
}
}  // namespace detail

/// Extended Hubbard chain in the literal local qubit form; see README for the
/// boundary twist this implies on wrap-around hops.
inline GroupedHamiltonian build_hubbard_chain(int L, const HubbardParams& prm) {
  require(L >= 4 && L % 2 == 0, "Hubbard chain needs even L >= 4");
  for (double v : {prm.t1, prm.t2, prm.U, prm.mu}) require(std::isfinite(v), "Hubbard parameters must be finite");
  GroupedHamiltonian h;
  h.model = "hubbard_chain";
  h.layout = hubbard_layout(L, Boundary::periodic);
  const Layout& lay = h.layout;
  const int n = lay.n_qubits();
  auto md = [L](int s) { return ((s % L) + L) % L; };
  std::vector<HamiltonianGroup> g(6);
  const char* names[6] = {"H1", "H2", "H3", "H4", "H5", "H6"};
  const double c[6] = {-prm.t1 / 2, -prm.t1 / 2, -prm.t2 / 2, -prm.t2 / 2, prm.U / 4, (prm.mu - prm.U / 2) / 2};
  for (int m = 0; m < 6; ++m) g[m] = {names[m], PauliSum(n), c[m]};
  for (int orb = 0; orb < 2; ++orb) {
    for (int i = 0; i < L; i += 2) {
      detail::add_hop(g[0].terms, lay, i, md(i + 1), orb);
      detail::add_hop(g[1].terms, lay, md(i + 1), md(i + 2), orb);
    }
    if (prm.t2 != 0.0) {
      for (int i = 0; i < L; ++i) {
        if (i % 4 != 0 && i % 4 != 1) continue;
        detail::add_hop(g[2].terms, lay, i, md(i + 2), orb, md(i + 1));
        detail::add_hop(g[3].terms, lay, md(i + 2), md(i + 4), orb, md(i + 3));
      }
    }
  }
  for (int i = 0; i < L; ++i) {
    g[4].terms.add(pauli(n, {{lay.qubit(i, 0), 'Z'}, {lay.qubit(i, 1), 'Z'}}));
    for (int orb = 0; orb < 2; ++orb) g[5].terms.add(pauli(n, {{lay.qubit(i, orb), 'Z'}}));
  }
  h.groups = std::move(g);
  return h;
}

/// Hopping-only one-body matrix of the simulated qubit Hamiltonian for one spin
/// block holding n_sigma electrons. Wrap-around hops carry the parity factor
/// (-1)^(n_sigma-1) produced by the local (string-free) qubit form.
inline Eigen::MatrixXd hubbard_one_body(int L, const HubbardParams& prm, int n_sigma) {
  require(L >= 4 && L % 2 == 0, "Hubbard chain needs even L >= 4");
  const double twist = (n_sigma % 2 == 1) ? 1.0 : -1.0;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(L, L);
  auto hop = [&](int i, int d, double t) {
    const int j = (i + d) % L;
    const double s = (i + d >= L) ? twist : 1.0;
    h(i, j) += -t * s;
    h(j, i) += -t * s;
  };
  for (int i = 0; i < L; ++i) hop(i, 1, prm.t1);
  if (prm.t2 != 0.0) {
    // H3 and H4 together emit (i, i+2) once per i in 0..L-1 only when L % 4 == 0;
    // mirror the literal group construction.
    for (int i = 0; i < L; ++i) {
      if (i % 4 != 0 && i % 4 != 1) continue;
      hop(i, 2, prm.t2);
      hop((i + 2) % L, 2, prm.t2);
    }
  }
  return h;
}

/// Jordan-Wigner image of c_a (annihilate) or c_a^dag (create) on n qubits:
/// (X_a +/- iY_a)/2 times Z on every qubit below a.
inline PauliSum jordan_wigner(int a, bool create, int n) {
  require(a >= 0 && a < n, "mode index out of range");
  PauliString x(n, 0.5), y(n, create ? cplx{0.0, -0.5} : cplx{0.0, 0.5});
  for (int q = 0; q < a; ++q) {
    x.set(q, 'Z');
    y.set(q, 'Z');
  }
  x.set(a, 'X');
  y.set(a, 'Y');
  PauliSum s(n);
  s.add(x).add(y);
  return s;
}

/// X_a Z_{a-1}...Z_0 (axis 'X') or Y_a Z_{a-1}...Z_0 (axis 'Y').
inline PauliString jw_string(int a, char axis, int n) {
  PauliString p(n);
  for (int q = 0; q < a; ++q) p.set(q, 'Z');
  p.set(a, axis);
  return p;
}

/// Keep the terms whose support lies inside the window; labels unchanged.
inline GroupedHamiltonian restrict_hamiltonian(const GroupedHamiltonian& h, int center, int size) {
  require(size < h.layout.sites, "restriction size must be smaller than the lattice");
  const Window w = make_window(h.layout, center, size);
  GroupedHamiltonian r = h;
  for (auto& g : r.groups) {
    PauliSum kept(h.n_qubits());
    for (const auto& p : g.terms.terms)
      if (w.contains(p.support())) kept.add(p);
    g.terms = std::move(kept);
  }
  return r;
}

/// Move a (restricted) Hamiltonian onto the window's local register.
inline GroupedHamiltonian relabel(const GroupedHamiltonian& h, const Window& w) {
  require(h.layout == w.parent, "window belongs to a different layout");
  GroupedHamiltonian r;
  r.model = h.model;
  r.layout = w.local;
  for (const auto& g : h.groups) {
    HamiltonianGroup lg{g.name, PauliSum(w.local.n_qubits()), g.c};
    for (const auto& p : g.terms.terms) lg.terms.add(relabel(p, w));
    r.groups.push_back(std::move(lg));
  }
  return r;
}

struct SymmetrySector {
  int n_e = 0;
  int two_sz = 0;
  std::vector<std::uint64_t> indices;
  bool empty() const { return indices.empty(); }
  double sz() const { return two_sz / 2.0; }
};

inline int count_up(const Layout& lay, std::uint64_t b) {
  return std::popcount(b & ((std::uint64_t{1} << lay.sites) - 1));
}

/// Basis states with N_e electrons and S_z = two_sz/2 under the Hubbard layout.
inline SymmetrySector sector_indices(int L, int n_e, int two_sz) {
  require(L >= 1 && 2 * L <= 40, "sector enumeration supports L <= 20");
  require(n_e >= 0 && n_e <= 2 * L, "N_e out of range");
  if (((n_e + two_sz) % 2 + 2) % 2 != 0) fail("N_e and 2 S_z must have equal parity");
  SymmetrySector s{n_e, two_sz, {}};
  const int n_up = (n_e + two_sz) / 2, n_dn = (n_e - two_sz) / 2;
  if (n_up < 0 || n_dn < 0 || n_up > L || n_dn > L) return s;
  // Enumerate by combining per-block masks; down-block bits sit at L..2L-1.
  std::vector<std::uint64_t> ups, dns;
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << L); ++m) {
    const int c = std::popcount(m);
    if (c == n_up) ups.push_back(m);
    if (c == n_dn) dns.push_back(m << L);
  }
  s.indices.reserve(ups.size() * dns.size());
  for (auto d : dns)
    for (auto u : ups) s.indices.push_back(d | u);
  std::sort(s.indices.begin(), s.indices.end());
  return s;
}

inline SymmetrySector sector_indices(int L, int n_e, double s_z) {
  const double t = 2.0 * s_z;
  require(std::abs(t - std::round(t)) < 1e-12, "S_z must be a half-integer");
  return sector_indices(L, n_e, static_cast<int>(std::lround(t)));
}

/// Particle number operator N = sum (1 - Z)/2 over all qubits.
inline PauliSum number_operator(int n) {
  PauliSum s(n);
  s.add(PauliString(n, n / 2.0));
  for (int q = 0; q < n; ++q) s.add(pauli(n, {{q, 'Z'}}, -0.5));
  return s;
}

/// S_z = (N_up - N_down)/2 under the Hubbard layout.
inline PauliSum sz_operator(const Layout& lay) {
  const int n = lay.n_qubits();
  PauliSum s(n);
  for (int i = 0; i < lay.sites; ++i) {
    s.add(pauli(n, {{lay.qubit(i, 0), 'Z'}}, -0.25));
    s.add(pauli(n, {{lay.qubit(i, 1), 'Z'}}, 0.25));
  }
  return s;
}

}  // namespace lsvqc
