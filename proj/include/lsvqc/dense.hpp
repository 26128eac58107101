#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <complex>

#include "lsvqc/error.hpp"
#include "lsvqc/pauli.hpp"
#include "lsvqc/state.hpp"

namespace lsvqc {

using DenseOperator = Eigen::MatrixXcd;

inline DenseOperator dense_matrix(const PauliString& p) {
  check_dense_cap(p.n);
  const std::size_t d = std::size_t{1} << p.n;
  DenseOperator m = DenseOperator::Zero(d, d);
  const cplx iy = i_pow(p.n_y()) * p.coeff;
  for (std::size_t b = 0; b < d; ++b) m(b ^ p.x, b) = iy * pauli_sign(b, p.z);
  return m;
}

inline DenseOperator dense_matrix(const PauliSum& h) {
  check_dense_cap(h.n);
  const std::size_t d = std::size_t{1} << h.n;
  DenseOperator m = DenseOperator::Zero(d, d);
  for (const auto& p : h.terms) {
    const cplx iy = i_pow(p.n_y()) * p.coeff;
    for (std::size_t b = 0; b < d; ++b) m(b ^ p.x, b) += iy * pauli_sign(b, p.z);
  }
  return m;
}

/// exp(-i t H) for Hermitian H via eigendecomposition.
inline DenseOperator expm_hermitian(const DenseOperator& h, double t) {
  Eigen::SelfAdjointEigenSolver<DenseOperator> es(h);
  const Eigen::VectorXd& e = es.eigenvalues();
  Eigen::VectorXcd ph(e.size());
  for (Eigen::Index k = 0; k < e.size(); ++k) ph(k) = std::exp(cplx{0.0, -t * e(k)});
  return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

/// Embed a 4x4 gate on the ordered pair (qa, qb) of an n-qubit register.
inline DenseOperator embed_two_qubit(const Mat4& u, int qa, int qb, int n) {
  check_dense_cap(n);
  const std::size_t d = std::size_t{1} << n;
  DenseOperator m = DenseOperator::Zero(d, d);
  for (std::size_t col = 0; col < d; ++col) {
    const int ca = (col >> qa) & 1, cb = (col >> qb) & 1;
    const std::size_t base = col & ~((std::size_t{1} << qa) | (std::size_t{1} << qb));
    for (int ra = 0; ra < 2; ++ra)
      for (int rb = 0; rb < 2; ++rb) {
        const std::size_t row = base | (std::size_t(ra) << qa) | (std::size_t(rb) << qb);
        m(row, col) = u(2 * ra + rb, 2 * ca + cb);
      }
  }
  return m;
}

inline Eigen::VectorXcd to_eigen(const StateVector& s) {
  Eigen::VectorXcd v(s.dim());
  for (std::size_t i = 0; i < s.dim(); ++i) v(i) = s[i];
  return v;
}

inline StateVector from_eigen(const Eigen::VectorXcd& v, int n) {
  std::vector<cplx> a(v.data(), v.data() + v.size());
  return StateVector(n, std::move(a));
}

inline double spectral_norm(const DenseOperator& m) {
  Eigen::JacobiSVD<DenseOperator> svd(m);
  return svd.singularValues()(0);
}

}  // namespace lsvqc
