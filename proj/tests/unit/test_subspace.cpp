#include <gtest/gtest.h>

#include <numbers>

#include "helpers.hpp"

using namespace lsvqc;
using namespace testutil;

namespace {

SubspaceSpec krylov_spec(const ParamCircuit& w0, int nt, double dt) {
  SubspaceSpec s;
  s.kind = SubspaceSpec::Kind::krylov;
  s.N_t = nt;
  s.dt = dt;
  s.base_prep = w0;
  return s;
}

ParamCircuit hubbard_ground_prep(const GroupedHamiltonian& h, const HubbardParams& p) {
  const int L = h.layout.sites;
  return givens_ground_prep(hubbard_one_body(L, p, L / 2), L / 2, L / 2, h.layout);
}

}  // namespace

TEST(Krylov, ZeroStepsIsTheBarePrep) {
  const auto h = build_heisenberg(4, Boundary::periodic);
  const auto b = krylov_basis(krylov_spec(neel_prep(4), 0, 0.5), h);
  ASSERT_EQ(b.size(), 1u);
  EXPECT_EQ(signature(b.preps[0]), signature(neel_prep(4)));
}

TEST(Krylov, SecondPrepIsOneTrotterStep) {
  const int L = 4;
  const auto h = build_heisenberg(L, Boundary::periodic);
  const auto b = krylov_basis(krylov_spec(neel_prep(L), 1, 0.5), h);
  ASSERT_EQ(b.size(), 2u);
  StateVector s(L);
  apply(b.preps[1], s);
  // oracle: group exponentials applied to the Neel basis state |0101> -> index 0b1010
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(16);
  v(0b1010) = 1.0;
  for (const auto& g : h.groups) {
    PauliSum hs = g.terms;
    for (auto& p : hs.terms) p.coeff *= g.c;
    v = expm_hermitian(dense_matrix(hs), 0.5) * v;
  }
  EXPECT_LT(std::abs(std::abs(to_eigen(s).dot(v)) - 1.0), 1e-12);
}

TEST(Krylov, DeterminantShrinksWithStep) {
  const auto h = build_heisenberg(6, Boundary::periodic);
  const double small = gramian(krylov_basis(krylov_spec(neel_prep(6), 1, 1e-4), h)).det_modulus;
  const double big = gramian(krylov_basis(krylov_spec(neel_prep(6), 1, 0.5), h)).det_modulus;
  EXPECT_LT(small, big);
  EXPECT_LT(small, 1e-6);
}

TEST(Krylov, RejectsBadSpec) {
  const auto h = build_heisenberg(4, Boundary::periodic);
  EXPECT_THROW(krylov_basis(krylov_spec(neel_prep(4), 1, 0.0), h), Error);
  EXPECT_THROW(krylov_basis(krylov_spec(neel_prep(6), 1, 0.1), h), Error);
}

TEST(Krylov, HeisenbergL8Determinant) {
  const auto h = build_heisenberg(8, Boundary::periodic);
  const auto r = gramian(krylov_basis(krylov_spec(neel_prep(8), 1, 0.5), h));
  EXPECT_GT(r.det_modulus, 0.0);
  EXPECT_LT(r.det_modulus, 1.0);
  EXPECT_EQ(r.rank, 2);
  // 1 - |<Neel|U_1(0.5)|Neel>|^2, recorded as a regression value
  EXPECT_NEAR(r.det_modulus, 1.0 - std::norm(r.matrix(0, 1)), 1e-12);
}

TEST(GfBasis, Counts) {
  SubspaceSpec s;
  s.kind = SubspaceSpec::Kind::gf_krylov;
  s.N_t = 0;
  s.base_prep = neel_prep(2, Boundary::open);
  EXPECT_EQ(gf_basis(s, build_heisenberg(2, Boundary::open)).size(), 5u);

  const auto h = build_hubbard_chain(8, sr2cuo3_params());
  s.N_t = 1;
  s.dt = 0.5;
  s.base_prep = hubbard_ground_prep(h, sr2cuo3_params());
  const auto b = gf_basis(s, h);
  EXPECT_EQ(b.size(), 66u);
  // ordering: bare, X_0..X_15, Y_0..Y_15
  const auto& x3 = b.preps[1 + 3].gates[s.base_prep.gates.size()].generator;
  EXPECT_EQ(x3.axis(3), 'X');
  const auto& y0 = b.preps[1 + 16].gates[s.base_prep.gates.size()].generator;
  EXPECT_EQ(y0.axis(0), 'Y');
}

TEST(GfBasis, ZeroAngleCollapsesRank) {
  const auto p = sr2cuo3_params();
  const auto h = build_hubbard_chain(4, p);
  SubspaceSpec s;
  s.kind = SubspaceSpec::Kind::gf_krylov;
  s.N_t = 0;
  s.phi = 0.0;
  s.base_prep = hubbard_ground_prep(h, p);
  const auto r = gramian(gf_basis(s, h));
  EXPECT_EQ(r.rank, 1);
  s.phi = 0.4 * std::numbers::pi;
  EXPECT_GT(gramian(gf_basis(s, h)).rank, 1);
}

TEST(GfBasis, StatesStayInNeighbouringSectors) {
  const auto p = sr2cuo3_params();
  const int L = 4;
  const auto h = build_hubbard_chain(L, p);
  SubspaceSpec s;
  s.kind = SubspaceSpec::Kind::gf_krylov;
  s.N_t = 1;
  s.dt = 0.5;
  s.base_prep = hubbard_ground_prep(h, p);
  for (const auto& st : prepare_states(gf_basis(s, h))) {
    double inside = 0.0;
    for (std::size_t b = 0; b < st.dim(); ++b) {
      const int ne = std::popcount(b);
      if (ne >= L - 1 && ne <= L + 1) inside += std::norm(st[b]);
    }
    EXPECT_NEAR(inside, 1.0, 1e-9);
  }
}

TEST(Gramian, OrthonormalAndDuplicated) {
  std::vector<StateVector> e;
  for (int b = 0; b < 4; ++b) e.push_back(StateVector::basis(2, b));
  const auto r = gramian(e);
  EXPECT_LT((r.matrix - Eigen::MatrixXcd::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_NEAR(r.det_modulus, 1.0, 1e-15);
  e.push_back(e[2]);
  const auto d = gramian(e);
  EXPECT_LT(d.det_modulus, 1e-14);
  EXPECT_EQ(d.rank, 4);
}

TEST(Gramian, HermitianPsdAndMonotoneRank) {
  std::mt19937_64 rng(31);
  std::vector<StateVector> st;
  int prev = 0;
  for (int k = 0; k < 10; ++k) {
    st.push_back(k % 3 == 2 ? st[k - 1] : random_state(3, rng));
    const auto r = gramian(st);
    EXPECT_LT((r.matrix - r.matrix.adjoint()).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_GE(r.min_eigenvalue, -1e-10);
    EXPECT_GE(r.rank, prev);
    prev = r.rank;
  }
  EXPECT_EQ(prev, 7);  // 8-dim space, but duplicates keep it below
}

TEST(Gramian, PrepsAreLocal) {
  const auto p = sr2cuo3_params();
  const auto h = build_hubbard_chain(8, p);
  SubspaceSpec s;
  s.kind = SubspaceSpec::Kind::gf_krylov;
  s.N_t = 1;
  s.dt = 0.5;
  s.base_prep = hubbard_ground_prep(h, p);
  for (const auto& w : gf_basis(s, h).preps) EXPECT_NO_THROW(restrict_circuit(w, 3, 4));
}
