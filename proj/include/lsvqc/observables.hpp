#pragma once

#include <lapacke.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "circuit.hpp"
#include "optimize.hpp"

namespace lsvqc {

/// Femtoseconds per hbar/eV time unit.
inline constexpr double kFsPerUnit = 0.658;
inline double to_fs(double t) { return t * kFsPerUnit; }
inline double from_fs(double fs) { return fs / kFsPerUnit; }

struct TimeSeries {
  std::vector<double> t;
  std::vector<cplx> v;
  std::string label;
  std::size_t size() const { return t.size(); }
};

struct SpectralGrid {
  double omega0 = 5.0;
  int n_omega = 250;
  double eta = 0.1;
  double omega(int j) const { return j * omega0 / n_omega; }
  std::vector<double> omegas() const {
    std::vector<double> w;
    for (int j = -n_omega; j <= n_omega; ++j) w.push_back(omega(j));
    return w;
  }
};

// ------------------------------------------------------------------ sector propagator

/// Basis states with a fixed number of set bits (spin-chain magnetization sector).
inline std::vector<std::uint64_t> popcount_sector(int n, int k) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t b = 0; b < (std::uint64_t{1} << n); ++b)
    if (std::popcount(b) == k) out.push_back(b);
  return out;
}

/// exp(-itH) on states supported in a list of symmetry sectors, from the
/// eigendecomposition of each (real symmetric) sector block.
class SectorPropagator {
 public:
  struct Block {
    std::vector<std::uint64_t> indices;  // sorted
    Eigen::VectorXd energies;
    Eigen::MatrixXd vectors;  // columns are eigenvectors
  };

  SectorPropagator(const GroupedHamiltonian& h, const std::vector<std::vector<std::uint64_t>>& sectors)
      : n_qubits_(h.n_qubits()) {
    const PauliSum H = h.total();
    for (const auto& idx : sectors) {
      if (idx.empty()) continue;
      if (static_cast<long>(idx.size()) > sector_cap())
        throw Error(ErrorKind::cap, "sector of dimension " + std::to_string(idx.size()) + " exceeds cap " +
                                        std::to_string(sector_cap()) + " (set LSVQC_SECTOR_CAP)");
      require(std::is_sorted(idx.begin(), idx.end()), "sector indices must be sorted");
      blocks_.push_back(diagonalize(H, idx));
    }
  }

  int n_qubits() const { return n_qubits_; }
  const std::vector<Block>& blocks() const { return blocks_; }

  /// Lowest eigenvalue over all declared sectors, and its state.
  std::pair<double, StateVector> ground_state() const {
    require(!blocks_.empty(), "no sectors declared");
    std::size_t best = 0;
    for (std::size_t i = 1; i < blocks_.size(); ++i)
      if (blocks_[i].energies(0) < blocks_[best].energies(0)) best = i;
    StateVector s(n_qubits_, std::vector<cplx>(std::size_t{1} << n_qubits_, 0.0));
    const auto& b = blocks_[best];
    for (std::size_t i = 0; i < b.indices.size(); ++i) s[b.indices[i]] = b.vectors(static_cast<Eigen::Index>(i), 0);
    return {b.energies(0), s};
  }

  /// Eigen-coordinates of psi per block; fails on leakage outside the sectors.
  std::vector<Eigen::VectorXcd> decompose(const StateVector& psi) const {
    require(psi.n_qubits() == n_qubits_, "state register does not match the propagator");
    std::vector<Eigen::VectorXcd> out;
    double inside = 0.0;
    for (const auto& b : blocks_) {
      const auto n = static_cast<Eigen::Index>(b.indices.size());
      Eigen::VectorXd re(n), im(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        const cplx a = psi[b.indices[i]];
        re(i) = a.real();
        im(i) = a.imag();
        inside += std::norm(a);
      }
      Eigen::VectorXcd c(n);
      c.real() = b.vectors.transpose() * re;
      c.imag() = b.vectors.transpose() * im;
      out.push_back(std::move(c));
    }
    const double tot = psi.norm2();
    if (tot - inside > 1e-9 * std::max(1.0, tot)) fail("state leaks outside the declared symmetry sectors");
    return out;
  }

  StateVector compose(const std::vector<Eigen::VectorXcd>& coeffs, double t) const {
    StateVector s(n_qubits_, std::vector<cplx>(std::size_t{1} << n_qubits_, 0.0));
    for (std::size_t k = 0; k < blocks_.size(); ++k) {
      const auto& b = blocks_[k];
      Eigen::VectorXcd c = coeffs[k];
      for (Eigen::Index i = 0; i < c.size(); ++i) c(i) *= std::polar(1.0, -b.energies(i) * t);
      const Eigen::VectorXd re = b.vectors * c.real();
      const Eigen::VectorXd im = b.vectors * c.imag();
      for (std::size_t i = 0; i < b.indices.size(); ++i)
        s[b.indices[i]] = {re(static_cast<Eigen::Index>(i)), im(static_cast<Eigen::Index>(i))};
    }
    return s;
  }

  /// Evolve several decomposed states to time t in one matrix product per block.
  std::vector<StateVector> compose_many(const std::vector<std::vector<Eigen::VectorXcd>>& coeffs, double t) const {
    const std::size_t m = coeffs.size();
    std::vector<StateVector> out(m, StateVector(n_qubits_, std::vector<cplx>(std::size_t{1} << n_qubits_, 0.0)));
    for (std::size_t k = 0; k < blocks_.size(); ++k) {
      const auto& b = blocks_[k];
      const auto n = b.energies.size();
      Eigen::MatrixXd re(n, m), im(n, m);
      for (std::size_t s = 0; s < m; ++s)
        for (Eigen::Index i = 0; i < n; ++i) {
          const cplx c = coeffs[s][k](i) * std::polar(1.0, -b.energies(i) * t);
          re(i, static_cast<Eigen::Index>(s)) = c.real();
          im(i, static_cast<Eigen::Index>(s)) = c.imag();
        }
      const Eigen::MatrixXd R = b.vectors * re, I = b.vectors * im;
      for (std::size_t s = 0; s < m; ++s)
        for (Eigen::Index i = 0; i < n; ++i)
          out[s][b.indices[static_cast<std::size_t>(i)]] = {R(i, static_cast<Eigen::Index>(s)),
                                                           I(i, static_cast<Eigen::Index>(s))};
    }
    return out;
  }

  StateVector evolve(const StateVector& psi, double t) const { return compose(decompose(psi), t); }

 private:
  int n_qubits_;
  std::vector<Block> blocks_;

  static Block diagonalize(const PauliSum& H, const std::vector<std::uint64_t>& idx) {
    const auto n = static_cast<Eigen::Index>(idx.size());
    Block b;
    b.indices = idx;
    b.vectors = Eigen::MatrixXd::Zero(n, n);
    std::vector<std::pair<std::uint64_t, double>> row;
    for (Eigen::Index col = 0; col < n; ++col) {
      const std::uint64_t in = idx[static_cast<std::size_t>(col)];
      row.clear();
      for (const auto& p : H.terms) {
        const cplx a = p.coeff * i_pow(p.n_y()) * pauli_sign(in, p.z);
        if (std::abs(a.imag()) > 1e-12) fail("sector Hamiltonian block is not real");
        row.emplace_back(in ^ p.x, a.real());
      }
      // single terms may leave the sector (XX alone does); only their sum must not
      std::sort(row.begin(), row.end());
      for (std::size_t k = 0; k < row.size();) {
        double v = 0.0;
        std::size_t e = k;
        for (; e < row.size() && row[e].first == row[k].first; ++e) v += row[e].second;
        auto it = std::lower_bound(idx.begin(), idx.end(), row[k].first);
        if (it == idx.end() || *it != row[k].first) {
          if (std::abs(v) > 1e-12) fail("Hamiltonian does not conserve the declared sector");
        } else {
          b.vectors(it - idx.begin(), col) += v;
        }
        k = e;
      }
    }
    b.energies.resize(n);
    const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'U', static_cast<lapack_int>(n), b.vectors.data(),
                                           static_cast<lapack_int>(n), b.energies.data());
    if (info != 0) fail("dsyevd failed with info " + std::to_string(info));
    return b;
  }
};

/// Hubbard sectors (N_e, 2 S_z) as index lists.
inline std::vector<std::uint64_t> hubbard_sector(int L, int n_e, int two_sz) {
  return sector_indices(L, n_e, two_sz).indices;
}

inline StateVector exact_evolve(const SectorPropagator& prop, const StateVector& psi, double t) {
  return prop.evolve(psi, t);
}

// ------------------------------------------------------------------ dynamics

/// States V^n |psi0> for n = 0..n_steps (index 0 is psi0).
inline std::vector<StateVector> repeated_dynamics(const ParamCircuit& V, const Params& th, StateVector psi0,
                                                  int n_steps) {
  require(n_steps >= 0, "n_steps must be nonnegative");
  std::vector<StateVector> out{psi0};
  for (int n = 1; n <= n_steps; ++n) {
    apply(V, th, psi0);
    out.push_back(psi0);
  }
  return out;
}

/// 1 - |<psi0| (V^dag)^n U^n |psi0>| (unsquared).
inline double state_infidelity(const StateVector& v_n, const StateVector& u_n) {
  return std::max(0.0, 1.0 - std::abs(inner_product(v_n, u_n)));
}

/// 1 - |<psi0| (V^dag)^n U^n |psi0>|^2
inline double state_infidelity_squared(const StateVector& v_n, const StateVector& u_n) {
  return std::max(0.0, 1.0 - std::norm(inner_product(v_n, u_n)));
}

inline double state_infidelity(const ParamCircuit& V, const Params& thV, const ParamCircuit& U, const Params& thU,
                               const StateVector& psi0, int n) {
  StateVector a = psi0, b = psi0;
  for (int k = 0; k < n; ++k) {
    apply(V, thV, a);
    apply(U, thU, b);
  }
  return state_infidelity(a, b);
}

/// (1/L) sum_i <n_up n_dn> on a Hubbard register.
inline double double_occupation(const StateVector& s, const Layout& lay) {
  require(lay.kind == Layout::Kind::hubbard && s.n_qubits() == lay.n_qubits(), "double occupation needs a Hubbard register");
  std::vector<std::uint64_t> pair_mask;
  for (int i = 0; i < lay.sites; ++i)
    pair_mask.push_back((std::uint64_t{1} << lay.qubit(i, 0)) | (std::uint64_t{1} << lay.qubit(i, 1)));
  double d = 0.0;
  for (std::size_t b = 0; b < s.dim(); ++b) {
    const double p = std::norm(s[b]);
    if (p == 0.0) continue;
    int c = 0;
    for (auto m : pair_mask) c += (b & m) == m;
    d += p * c;
  }
  return d / lay.sites;
}

// ------------------------------------------------------------------ Green's functions

/// Site-resolved retarded GF for one spin: g[a][b] over the time grid, with
/// modes a, b the JW modes of that spin.
struct SiteGf {
  std::vector<int> modes;
  std::vector<double> t;
  std::vector<std::vector<std::vector<cplx>>> g;  // g[a][b][n]
};

/// Produces the states at step n from those at step n-1 (or from scratch).
using BatchAdvance = std::function<void(std::vector<StateVector>& batch, int step)>;

/// G_ab(t) = -(i/2) [Re A_XX + Re A_YY + i Re A_YX - i Re A_XY] with
/// A_PQ = <E0| e^{iHt} P_a e^{-iHt} Q_b |E0>, P_a the JW string of mode a.
/// Theta(0) = 1. The batch passed to `advance` is (E0, X_b E0..., Y_b E0...).
inline SiteGf retarded_gf(const StateVector& e0, const std::vector<int>& modes, int n_steps, double dt,
                          const BatchAdvance& advance) {
  const int n = e0.n_qubits();
  const std::size_t m = modes.size();
  std::vector<StateVector> batch{e0};
  for (char axis : {'X', 'Y'})
    for (int b : modes) {
      StateVector s = e0;
      apply_pauli(s, jw_string(b, axis, n));
      batch.push_back(std::move(s));
    }
  SiteGf out;
  out.modes = modes;
  out.g.assign(m, std::vector<std::vector<cplx>>(m, std::vector<cplx>(n_steps + 1)));
  for (int step = 0; step <= n_steps; ++step) {
    if (step > 0) advance(batch, step);
    out.t.push_back(step * dt);
    const StateVector& phi = batch[0];
    for (std::size_t a = 0; a < m; ++a) {
      StateVector xa = phi, ya = phi;
      apply_pauli(xa, jw_string(modes[a], 'X', n));
      apply_pauli(ya, jw_string(modes[a], 'Y', n));
      for (std::size_t b = 0; b < m; ++b) {
        const StateVector& xb = batch[1 + b];
        const StateVector& yb = batch[1 + m + b];
        // <phi| P_a |chi_Q> with P_a Hermitian: <P_a phi | chi_Q>
        const double axx = inner_product(xa, xb).real();
        const double ayy = inner_product(ya, yb).real();
        const double ayx = inner_product(ya, xb).real();
        const double axy = inner_product(xa, yb).real();
        out.g[a][b][step] = cplx{0.0, -0.5} * cplx{axx + ayy, ayx - axy};
      }
    }
  }
  return out;
}

/// Advance by repeated application of a (frozen) circuit.
inline BatchAdvance circuit_advance(const ParamCircuit& V, const Params& th = {}) {
  return [V, th](std::vector<StateVector>& batch, int) {
    for (auto& s : batch) apply(V, th, s);
  };
}

/// Exact advance: every step is recomputed from the initial batch.
inline BatchAdvance exact_advance(const SectorPropagator& prop, double dt) {
  auto init = std::make_shared<std::vector<std::vector<Eigen::VectorXcd>>>();
  return [&prop, dt, init](std::vector<StateVector>& batch, int step) {
    if (init->empty())
      for (const auto& s : batch) init->push_back(prop.decompose(s));
    batch = prop.compose_many(*init, step * dt);
  };
}

/// (1/L) sum_ij e^{-ik(i-j)} G_ij(t) with k = 2 pi m / L.
inline TimeSeries gf_momentum(const SiteGf& g, int m) {
  const int L = static_cast<int>(g.modes.size());
  require(L > 0, "empty site GF");
  require(m >= 0 && m < L, "momentum index off the grid k = 2 pi m / L");
  const double k = 2 * std::numbers::pi * m / L;
  TimeSeries ts;
  ts.t = g.t;
  ts.v.assign(g.t.size(), 0.0);
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j) {
      const cplx ph = std::polar(1.0 / L, -k * (i - j));
      for (std::size_t n = 0; n < g.t.size(); ++n) ts.v[n] += ph * g.g[i][j][n];
    }
  ts.label = "G_k(m=" + std::to_string(m) + ")";
  return ts;
}

/// G_k(t) from the momentum operators directly: -i[<phi|c_k|psi+> + <psi-|c_k|phi>]
/// with psi+ = U c_k^dag E0, psi- = U c_k E0, phi = U E0. Independent check of retarded_gf.
inline TimeSeries gf_momentum_branches(const StateVector& e0, const std::vector<int>& modes, int m, int n_steps,
                                       double dt, const BatchAdvance& advance) {
  const int n = e0.n_qubits();
  const int L = static_cast<int>(modes.size());
  const double k = 2 * std::numbers::pi * m / L;
  PauliSum ck(n), ckd(n);
  for (int i = 0; i < L; ++i) {
    ck.add(jordan_wigner(modes[i], false, n), std::polar(1.0 / std::sqrt(L), -k * i));
    ckd.add(jordan_wigner(modes[i], true, n), std::polar(1.0 / std::sqrt(L), k * i));
  }
  std::vector<StateVector> batch{e0, e0, e0};
  apply_pauli_sum(ckd, e0, batch[1]);
  apply_pauli_sum(ck, e0, batch[2]);
  TimeSeries ts;
  for (int step = 0; step <= n_steps; ++step) {
    if (step > 0) advance(batch, step);
    StateVector a, b;
    apply_pauli_sum(ck, batch[1], a);  // c_k psi+
    apply_pauli_sum(ck, batch[0], b);  // c_k phi
    const cplx v = inner_product(batch[0], a) + inner_product(batch[2], b);
    ts.t.push_back(step * dt);
    ts.v.push_back(cplx{0.0, -1.0} * v);
  }
  return ts;
}

/// A(w) = -(1/pi) Im sum_n w_n dt e^{i(w + i eta) t_n} G(t_n), trapezoid weights.
inline std::vector<double> spectral_function(const TimeSeries& g, const SpectralGrid& grid) {
  require(g.size() >= 2, "spectral function needs at least two time points");
  require(grid.eta > 0, "eta must be positive");
  const double dt = g.t[1] - g.t[0];
  for (std::size_t n = 1; n < g.size(); ++n)
    require(std::abs(g.t[n] - g.t[n - 1] - dt) < 1e-9 * std::max(1.0, dt), "time grid must be uniform");
  std::vector<double> a;
  for (double w : grid.omegas()) {
    cplx acc = 0.0;
    for (std::size_t n = 0; n < g.size(); ++n) {
      const double wt = (n == 0 || n + 1 == g.size()) ? 0.5 : 1.0;
      acc += wt * dt * std::exp(cplx{-grid.eta * g.t[n], w * g.t[n]}) * g.v[n];
    }
    a.push_back(-acc.imag() / std::numbers::pi);
  }
  return a;
}

/// (1/L) sum_k A_k(w).
inline std::vector<double> dos(const std::vector<std::vector<double>>& a_k) {
  require(!a_k.empty(), "no momentum points");
  std::vector<double> d(a_k[0].size(), 0.0);
  for (const auto& a : a_k) {
    require(a.size() == d.size(), "spectra on different grids");
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += a[i] / a_k.size();
  }
  return d;
}

/// sum_j (omega0/N_omega) A(omega_j)
inline double spectral_weight(const std::vector<double>& a, const SpectralGrid& grid) {
  double s = 0.0;
  for (double x : a) s += x;
  return s * grid.omega0 / grid.n_omega;
}

// ------------------------------------------------------------------ error metrics

/// delta(n) = (1/n) sum_{j=1..n} |approx_j - exact_j| for n = 1..N; the t=0 point is skipped.
template <class T>
std::vector<double> running_mae(const std::vector<T>& approx, const std::vector<T>& exact) {
  require(approx.size() == exact.size(), "MAE inputs are on different grids");
  std::vector<double> out;
  double acc = 0.0;
  for (std::size_t j = 1; j < approx.size(); ++j) {
    acc += std::abs(approx[j] - exact[j]);
    out.push_back(acc / j);
  }
  return out;
}

/// Mean of |approx - exact| over the frequency grid.
inline double spectral_mae(const std::vector<double>& approx, const std::vector<double>& exact) {
  require(approx.size() == exact.size() && !approx.empty(), "spectra are on different grids");
  double acc = 0.0;
  for (std::size_t i = 0; i < approx.size(); ++i) acc += std::abs(approx[i] - exact[i]);
  return acc / approx.size();
}

struct CompressionResult {
  double ratio = 0.0;
  double trotter_depth = 0.0;
  bool lower_bound = false;  // LSVQC beats every tabulated r
  bool worse_than_all = false;
  bool monotone = true;  // table was monotone after sorting by r
};

/// R = D_trot(eps) / D_lsvqc with D_trot the (interpolated) smallest r whose
/// error is <= eps.
inline CompressionResult depth_compression(std::vector<std::pair<double, double>> table, double lsvqc_err,
                                           double lsvqc_depth) {
  require(!table.empty() && lsvqc_depth > 0, "depth compression needs a table and a positive depth");
  std::sort(table.begin(), table.end());
  CompressionResult r;
  for (std::size_t i = 1; i < table.size(); ++i) r.monotone = r.monotone && table[i].second <= table[i - 1].second;
  if (table.front().second <= lsvqc_err) {
    r.trotter_depth = table.front().first;
    r.worse_than_all = table.front().second < lsvqc_err;
  } else if (table.back().second > lsvqc_err) {
    r.trotter_depth = table.back().first;
    r.lower_bound = true;
  } else {
    for (std::size_t i = 1; i < table.size(); ++i) {
      const auto [r1, e1] = table[i - 1];
      const auto [r2, e2] = table[i];
      if (e1 > lsvqc_err && e2 <= lsvqc_err) {
        r.trotter_depth = r1 + (lsvqc_err - e1) * (r2 - r1) / (e2 - e1);
        break;
      }
    }
  }
  r.ratio = r.trotter_depth / lsvqc_depth;
  return r;
}

// ------------------------------------------------------------------ VQE

struct VqeResult {
  ParamCircuit circuit;  // init prep followed by the ansatz, frozen at the optimum
  StateVector state;
  double energy = 0.0;
  double initial_energy = 0.0;
  Params theta;
  OptimizeResult opt;
};

/// Energy gradient by the adjoint method for circuits of Pauli rotations.
inline std::vector<double> energy_gradient(const ParamCircuit& c, const Params& th, const StateVector& start,
                                           const PauliSum& H) {
  StateVector psi = start;
  apply(c, th, psi);
  StateVector lam;
  apply_pauli_sum(H, psi, lam);
  std::vector<double> g(c.n_slots(), 0.0);
  for (auto it = c.gates.rbegin(); it != c.gates.rend(); ++it) {
    const Gate& gt = *it;
    if (gt.slot >= 0) {
      require(gt.kind == Gate::Kind::pauli_rotation, "adjoint gradient supports rotation slots only");
      // d/dth <psi|H|psi> = 2 Re <lam| i scale P |psi_g>
      g[gt.slot] += -2.0 * gt.scale * pauli_matrix_element(lam, gt.generator, psi).imag();
    } else {
      require(gt.sym_slot < 0, "adjoint gradient supports rotation slots only");
    }
    detail::apply_gate(psi, gt, th, true);
    detail::apply_gate(lam, gt, th, true);
  }
  return g;
}

inline VqeResult vqe_ground_state(const GroupedHamiltonian& h, int N_L, const ParamCircuit& init_prep,
                                  const BfgsOptions& o = {}) {
  require(init_prep.n_slots() == 0, "VQE init prep must be frozen");
  check_state_cap(h.n_qubits());
  const ParamCircuit ansatz = build_vha(h, N_L);
  const PauliSum H = h.total();
  StateVector start(h.n_qubits());
  apply(init_prep, start);
  auto energy = [&](const Params& th) { return expectation(run(ansatz, th, start), H); };
  // theta = 0 is a stationary point (real state, real H, real generators), so
  // start from a small seeded perturbation of it
  Params x0(ansatz.n_slots());
  std::mt19937_64 rng(o.seed);
  std::normal_distribution<double> nd(0.0, 0.05);
  for (auto& x : x0) x = nd(rng);
  VqeResult r;
  r.opt = bfgs(energy, x0, o,
               [&](const Params& th) { return energy_gradient(ansatz, th, start, H); });
  r.theta = r.opt.x;
  r.energy = r.opt.f;
  r.initial_energy = r.opt.trace.front();
  r.circuit = init_prep;
  r.circuit.append(freeze(ansatz, r.theta));
  r.state = run(ansatz, r.theta, start);
  return r;
}

}  // namespace lsvqc
