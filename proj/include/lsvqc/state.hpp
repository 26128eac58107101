#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "lsvqc/error.hpp"
#include "lsvqc/pauli.hpp"

namespace lsvqc {

using Mat4 = Eigen::Matrix4cd;

/// Pure n-qubit state. Qubit 0 is the least-significant bit of the index.
class StateVector {
 public:
  StateVector() = default;
  explicit StateVector(int n_qubits) : n_(n_qubits) {
    require(n_qubits >= 0 && n_qubits <= 62, "register size out of range");
    check_state_cap(n_qubits);
    amp_.assign(std::size_t{1} << n_qubits, cplx{0.0, 0.0});
    amp_[0] = 1.0;
  }
  StateVector(int n_qubits, std::vector<cplx> amps) : n_(n_qubits), amp_(std::move(amps)) {
    require(amp_.size() == (std::size_t{1} << n_qubits), "amplitude count must be 2^n");
  }

  static StateVector basis(int n_qubits, std::uint64_t index) {
    StateVector s(n_qubits);
    require(index < s.dim(), "basis index out of range");
    s.amp_[0] = 0.0;
    s.amp_[index] = 1.0;
    return s;
  }

  int n_qubits() const { return n_; }
  std::size_t dim() const { return amp_.size(); }
  cplx& operator[](std::size_t i) { return amp_[i]; }
  const cplx& operator[](std::size_t i) const { return amp_[i]; }
  cplx* data() { return amp_.data(); }
  const cplx* data() const { return amp_.data(); }
  std::vector<cplx>& amplitudes() { return amp_; }
  const std::vector<cplx>& amplitudes() const { return amp_; }

  double norm2() const {
    double s = 0;
    for (const auto& a : amp_) s += std::norm(a);
    return s;
  }
  void normalize() {
    const double nn = std::sqrt(norm2());
    require(nn > 0, "cannot normalize the zero vector");
    for (auto& a : amp_) a /= nn;
  }

 private:
  int n_ = 0;
  std::vector<cplx> amp_;
};

inline void check_same_register(const StateVector& a, const StateVector& b) {
  if (a.n_qubits() != b.n_qubits()) fail("register size mismatch");
}

inline void check_register(const StateVector& s, const PauliString& p) {
  if (p.n != s.n_qubits()) fail("Pauli string acts on a different register size");
}

/// k with a zero bit spliced in at position `bit`.
inline std::size_t insert_zero(std::size_t k, int bit) {
  const std::size_t low = (std::size_t{1} << bit) - 1;
  return ((k & ~low) << 1) | (k & low);
}

inline double pauli_sign(std::uint64_t b, std::uint64_t zmask) {
  return (std::popcount(b & zmask) & 1) ? -1.0 : 1.0;
}

/// psi <- P psi, including P's coefficient.
inline void apply_pauli(StateVector& s, const PauliString& p) {
  check_register(s, p);
  const cplx iy = i_pow(p.n_y()) * p.coeff;
  const std::uint64_t f = p.x, zm = p.z;
  cplx* a = s.data();
  const std::size_t d = s.dim();
  if (f == 0) {
    for (std::size_t i = 0; i < d; ++i) a[i] *= iy * pauli_sign(i, zm);
    return;
  }
  const std::uint64_t pivot = f & (~f + 1);
  for (std::size_t i = 0; i < d; ++i) {
    if (i & pivot) continue;
    const std::size_t j = i ^ f;
    const cplx ai = a[i], aj = a[j];
    a[j] = iy * pauli_sign(i, zm) * ai;
    a[i] = iy * pauli_sign(j, zm) * aj;
  }
}

/// psi <- exp(i angle P) psi. P must have unit coefficient.
inline void apply_pauli_rotation(StateVector& s, const PauliString& p, double angle) {
  check_register(s, p);
  if (std::abs(p.coeff - cplx{1.0, 0.0}) > 1e-12) fail("rotation generator must have unit coefficient");
  const double c = std::cos(angle), sn = std::sin(angle);
  const std::uint64_t f = p.x, zm = p.z;
  cplx* a = s.data();
  const std::size_t d = s.dim();
  if (f == 0) {
    const cplx ep{c, sn}, em{c, -sn};
    for (std::size_t i = 0; i < d; ++i) a[i] *= (std::popcount(i & zm) & 1) ? em : ep;
    return;
  }
  // exp(iaP) = cos a + i sin a P; the pair (i, i^f) mixes. i sin a i^{n_y}
  // is (pr + i pi) with one of pr, pi zero, so stay in real arithmetic.
  const cplx isy = cplx{0.0, sn} * i_pow(p.n_y());
  const double pr = isy.real(), pim = isy.imag();
  const int pivot = std::countr_zero(f);
  // sign(j) = sign(i) * sign(f) since j = i ^ f
  const double fs = pauli_sign(f, zm);
  double* ad = reinterpret_cast<double*>(a);
  for (std::size_t k = 0; k < d / 2; ++k) {
    const std::size_t i = insert_zero(k, pivot);
    const std::size_t j = i ^ f;
    const double xr = ad[2 * i], xi = ad[2 * i + 1], yr = ad[2 * j], yi = ad[2 * j + 1];
    const double si = pauli_sign(i, zm), sj = fs * si;
    ad[2 * i] = c * xr + sj * (pr * yr - pim * yi);
    ad[2 * i + 1] = c * xi + sj * (pr * yi + pim * yr);
    ad[2 * j] = c * yr + si * (pr * xr - pim * xi);
    ad[2 * j + 1] = c * yi + si * (pr * xi + pim * xr);
  }
}

inline bool is_unitary(const Mat4& u, double tol = 1e-10) {
  return ((u.adjoint() * u) - Mat4::Identity()).cwiseAbs().maxCoeff() <= tol;
}

/// Apply u on the ordered pair (qa, qb); u's row index is 2*bit(qa) + bit(qb).
inline void apply_two_qubit_gate(StateVector& s, const Mat4& u, int qa, int qb, bool check = true) {
  const int n = s.n_qubits();
  if (qa < 0 || qb < 0 || qa >= n || qb >= n) fail("two-qubit gate target out of range");
  if (qa == qb) fail("two-qubit gate needs distinct targets");
  if (check && !is_unitary(u)) fail("two-qubit gate is not unitary within 1e-10");
  const std::uint64_t ma = std::uint64_t{1} << qa, mb = std::uint64_t{1} << qb;
  cplx m[16];
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) m[4 * r + c] = u(r, c);
  cplx* a = s.data();
  const std::size_t d = s.dim();
  const int lo = std::min(qa, qb), hi = std::max(qa, qb);
  for (std::size_t k = 0; k < d / 4; ++k) {
    const std::size_t i = insert_zero(insert_zero(k, lo), hi);
    const std::size_t i1 = i | mb, i2 = i | ma, i3 = i | ma | mb;
    const cplx v0 = a[i], v1 = a[i1], v2 = a[i2], v3 = a[i3];
    a[i] = m[0] * v0 + m[1] * v1 + m[2] * v2 + m[3] * v3;
    a[i1] = m[4] * v0 + m[5] * v1 + m[6] * v2 + m[7] * v3;
    a[i2] = m[8] * v0 + m[9] * v1 + m[10] * v2 + m[11] * v3;
    a[i3] = m[12] * v0 + m[13] * v1 + m[14] * v2 + m[15] * v3;
  }
}

inline cplx inner_product(const StateVector& a, const StateVector& b) {
  check_same_register(a, b);
  cplx s{0.0, 0.0};
  const cplx* x = a.data();
  const cplx* y = b.data();
  for (std::size_t i = 0; i < a.dim(); ++i) s += std::conj(x[i]) * y[i];
  return s;
}

/// <a| P |b>, coefficient included.
inline cplx pauli_matrix_element(const StateVector& a, const PauliString& p, const StateVector& b) {
  check_same_register(a, b);
  check_register(b, p);
  const cplx iy = i_pow(p.n_y()) * p.coeff;
  const cplx* x = a.data();
  const cplx* y = b.data();
  cplx s{0.0, 0.0};
  for (std::size_t i = 0; i < b.dim(); ++i) s += std::conj(x[i ^ p.x]) * pauli_sign(i, p.z) * y[i];
  return iy * s;
}

inline cplx expectation_complex(const StateVector& s, const PauliSum& obs) {
  if (obs.n != s.n_qubits()) fail("observable acts on a different register size");
  cplx e{0.0, 0.0};
  for (const auto& p : obs.terms) e += pauli_matrix_element(s, p, s);
  return e;
}

/// <psi|obs|psi>; the imaginary part must vanish within 1e-10.
inline double expectation(const StateVector& s, const PauliSum& obs) {
  const cplx e = expectation_complex(s, obs);
  if (std::abs(e.imag()) > 1e-10 * std::max(1.0, obs.one_norm())) fail("expectation value is not real; observable not Hermitian?");
  return e.real();
}

/// Probability that qubit j reads 0.
inline double projector_zero_expectation(const StateVector& s, int qubit) {
  if (qubit < 0 || qubit >= s.n_qubits()) fail("projector qubit out of range");
  const std::uint64_t m = std::uint64_t{1} << qubit;
  double p = 0;
  const cplx* a = s.data();
  for (std::size_t i = 0; i < s.dim(); ++i)
    if (!(i & m)) p += std::norm(a[i]);
  return p;
}

/// out <- H in for a general (non-unitary) sum.
inline void apply_pauli_sum(const PauliSum& h, const StateVector& in, StateVector& out) {
  if (h.n != in.n_qubits()) fail("operator acts on a different register size");
  if (out.n_qubits() != in.n_qubits()) out = StateVector(in.n_qubits());
  std::fill(out.amplitudes().begin(), out.amplitudes().end(), cplx{0.0, 0.0});
  const cplx* a = in.data();
  cplx* o = out.data();
  for (const auto& p : h.terms) {
    const cplx iy = i_pow(p.n_y()) * p.coeff;
    for (std::size_t i = 0; i < in.dim(); ++i) o[i ^ p.x] += iy * pauli_sign(i, p.z) * a[i];
  }
}

}  // namespace lsvqc
