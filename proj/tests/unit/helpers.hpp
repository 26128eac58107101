#pragma once

#include <random>

#include "lsvqc/lsvqc.hpp"

namespace testutil {

using namespace lsvqc;

inline StateVector random_state(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::vector<cplx> a(std::size_t{1} << n);
  for (auto& x : a) x = {g(rng), g(rng)};
  StateVector s(n, std::move(a));
  s.normalize();
  return s;
}

inline PauliString random_pauli(int n, std::mt19937_64& rng, bool allow_identity = false) {
  std::uniform_int_distribution<int> ax(0, 3);
  const char axes[4] = {'I', 'X', 'Y', 'Z'};
  for (;;) {
    PauliString p(n);
    for (int q = 0; q < n; ++q) p.set(q, axes[ax(rng)]);
    if (allow_identity || !p.is_identity()) return p;
  }
}

inline Mat4 random_unitary4(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::Matrix4cd a;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) a(i, j) = {g(rng), g(rng)};
  Eigen::HouseholderQR<Eigen::Matrix4cd> qr(a);
  return qr.householderQ();
}

inline double max_diff(const StateVector& a, const Eigen::VectorXcd& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.dim(); ++i) m = std::max(m, std::abs(a[i] - b(i)));
  return m;
}

inline double max_diff(const StateVector& a, const StateVector& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.dim(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace testutil
