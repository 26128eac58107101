#pragma once

#include <algorithm>
#include <bit>
#include <complex>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "lsvqc/error.hpp"

namespace lsvqc {

using cplx = std::complex<double>;

/// Pauli string on up to 64 qubits, stored in symplectic form.
///
/// The operator is coeff * i^{|x&z|} X^x Z^z, so a qubit with both bits set
/// carries Y. Acting on a basis state, P|b> = i^{nY} (-1)^{|b&z|} |b^x>.
struct PauliString {
  int n = 0;
  std::uint64_t x = 0;
  std::uint64_t z = 0;
  cplx coeff{1.0, 0.0};

  PauliString() = default;
  explicit PauliString(int n_qubits, cplx c = 1.0) : n(n_qubits), coeff(c) {
    require(n_qubits >= 0 && n_qubits <= 64, "PauliString supports at most 64 qubits");
  }

  char axis(int q) const {
    const bool bx = (x >> q) & 1u, bz = (z >> q) & 1u;
    if (bx && bz) return 'Y';
    if (bx) return 'X';
    if (bz) return 'Z';
    return 'I';
  }

  PauliString& set(int q, char a) {
    require(q >= 0 && q < n, "Pauli axis index out of range");
    const std::uint64_t m = std::uint64_t{1} << q;
    x &= ~m;
    z &= ~m;
    switch (a) {
      case 'I': break;
      case 'X': x |= m; break;
      case 'Y': x |= m; z |= m; break;
      case 'Z': z |= m; break;
      default: fail(std::string("unknown Pauli axis '") + a + "'");
    }
    return *this;
  }

  std::uint64_t support() const { return x | z; }
  std::uint64_t flip() const { return x; }
  int n_y() const { return std::popcount(x & z); }
  int weight() const { return std::popcount(support()); }
  bool is_identity() const { return support() == 0; }

  std::vector<int> qubits() const {
    std::vector<int> out;
    for (int q = 0; q < n; ++q)
      if ((support() >> q) & 1u) out.push_back(q);
    return out;
  }

  /// Label with qubit 0 first, e.g. "XIZ" for X_0 Z_2.
  std::string label() const {
    std::string s(n, 'I');
    for (int q = 0; q < n; ++q) s[q] = axis(q);
    return s;
  }

  bool same_axes(const PauliString& o) const { return n == o.n && x == o.x && z == o.z; }
};

/// Build from a compact spec like {{0,'X'},{2,'Z'}}.
inline PauliString pauli(int n, std::initializer_list<std::pair<int, char>> axes, cplx c = 1.0) {
  PauliString p(n, c);
  for (auto [q, a] : axes) p.set(q, a);
  return p;
}

/// Build from a label with qubit 0 first ("XIZ").
inline PauliString pauli_from_label(const std::string& label, cplx c = 1.0) {
  PauliString p(static_cast<int>(label.size()), c);
  for (int q = 0; q < p.n; ++q) p.set(q, label[q]);
  return p;
}

inline bool commutes(const PauliString& a, const PauliString& b) {
  require(a.n == b.n, "Pauli register mismatch");
  return ((std::popcount(a.x & b.z) + std::popcount(a.z & b.x)) & 1) == 0;
}

inline cplx i_pow(int k) {
  switch (((k % 4) + 4) % 4) {
    case 0: return {1, 0};
    case 1: return {0, 1};
    case 2: return {-1, 0};
    default: return {0, -1};
  }
}

inline PauliString operator*(const PauliString& a, const PauliString& b) {
  require(a.n == b.n, "Pauli register mismatch");
  PauliString r(a.n);
  r.x = a.x ^ b.x;
  r.z = a.z ^ b.z;
  const int sign = std::popcount(a.z & b.x) & 1;
  r.coeff = a.coeff * b.coeff * i_pow(a.n_y() + b.n_y() - r.n_y()) * (sign ? -1.0 : 1.0);
  return r;
}

struct PauliSum {
  int n = 0;
  std::vector<PauliString> terms;

  PauliSum() = default;
  explicit PauliSum(int n_qubits) : n(n_qubits) {}

  PauliSum& add(PauliString p) {
    require(p.n == n, "PauliSum register mismatch");
    terms.push_back(std::move(p));
    return *this;
  }
  PauliSum& add(const PauliSum& o, cplx scale = 1.0) {
    require(o.n == n, "PauliSum register mismatch");
    for (auto p : o.terms) {
      p.coeff *= scale;
      terms.push_back(p);
    }
    return *this;
  }
  std::size_t size() const { return terms.size(); }
  bool empty() const { return terms.empty(); }

  bool real_coefficients(double tol = 0.0) const {
    return std::all_of(terms.begin(), terms.end(),
                       [tol](const PauliString& p) { return std::abs(p.coeff.imag()) <= tol; });
  }

  /// Merge equal strings and drop zero coefficients; deterministic order by (x, z).
  PauliSum collected(double tol = 1e-14) const {
    std::map<std::pair<std::uint64_t, std::uint64_t>, cplx> acc;
    for (const auto& p : terms) acc[{p.x, p.z}] += p.coeff;
    PauliSum out(n);
    for (auto& [k, c] : acc) {
      if (std::abs(c) <= tol) continue;
      PauliString p(n, c);
      p.x = k.first;
      p.z = k.second;
      out.terms.push_back(p);
    }
    return out;
  }

  /// Sum of |coeff|, an upper bound on the operator norm.
  double one_norm() const {
    double s = 0;
    for (const auto& p : terms) s += std::abs(p.coeff);
    return s;
  }
};

inline PauliSum operator*(const PauliSum& a, const PauliSum& b) {
  require(a.n == b.n, "PauliSum register mismatch");
  PauliSum out(a.n);
  for (const auto& p : a.terms)
    for (const auto& q : b.terms) out.terms.push_back(p * q);
  return out;
}

inline std::string to_string(const PauliString& p) {
  std::ostringstream os;
  os << "(" << p.coeff.real();
  if (p.coeff.imag() != 0) os << (p.coeff.imag() < 0 ? "-" : "+") << std::abs(p.coeff.imag()) << "i";
  os << ")";
  bool any = false;
  for (int q = 0; q < p.n; ++q) {
    char a = p.axis(q);
    if (a == 'I') continue;
    os << " " << a << q;
    any = true;
  }
  if (!any) os << " I";
  return os.str();
}

}  // namespace lsvqc
