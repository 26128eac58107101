#include <gtest/gtest.h>

#include "helpers.hpp"

using namespace lsvqc;
using namespace testutil;

namespace {

Eigen::MatrixXcd sector_block(const DenseOperator& h, const SymmetrySector& s) {
  const auto n = static_cast<Eigen::Index>(s.indices.size());
  Eigen::MatrixXcd b(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) b(i, j) = h(s.indices[i], s.indices[j]);
  return b;
}

DenseOperator commutator(const DenseOperator& a, const DenseOperator& b) { return a * b - b * a; }

}  // namespace

TEST(Heisenberg, TermCountsAndGroups) {
  const auto h = build_heisenberg(4, Boundary::periodic);
  EXPECT_EQ(h.term_count(), 12u);
  ASSERT_EQ(h.groups.size(), 2u);
  EXPECT_EQ(h.groups[0].name, "odd");
  // odd group holds bonds (0,1), (2,3)
  for (const auto& p : h.groups[0].terms.terms) {
    const auto q = p.qubits();
    EXPECT_TRUE((q == std::vector<int>{0, 1}) || (q == std::vector<int>{2, 3}));
  }
  for (const auto& g : h.groups)
    for (const auto& a : g.terms.terms)
      for (const auto& b : g.terms.terms) EXPECT_TRUE(commutes(a, b));
}

TEST(Heisenberg, GroundEnergyL4) {
  Eigen::SelfAdjointEigenSolver<DenseOperator> es(dense_matrix(build_heisenberg(4, Boundary::periodic).total()));
  EXPECT_NEAR(es.eigenvalues()(0), -8.0, 1e-9);
}

TEST(Heisenberg, TwoSitePeriodicDoublesTheBond) {
  const auto h = build_heisenberg(2, Boundary::periodic).total();
  ASSERT_EQ(h.size(), 3u);
  for (const auto& p : h.terms) EXPECT_NEAR(p.coeff.real(), 2.0, 1e-15);
  EXPECT_EQ(build_heisenberg(2, Boundary::open).total().terms[0].coeff.real(), 1.0);
}

TEST(Heisenberg, OddPeriodicUsesThirdGroup) {
  const auto h = build_heisenberg(5, Boundary::periodic);
  ASSERT_EQ(h.groups.size(), 3u);
  for (const auto& g : h.groups)
    for (const auto& a : g.terms.terms)
      for (const auto& b : g.terms.terms) EXPECT_TRUE(commutes(a, b));
  EXPECT_EQ(h.term_count(), 15u);
}

TEST(Hubbard, GroupCoefficientsFromTableOne) {
  const auto h = build_hubbard_chain(8, sr2cuo3_params());
  ASSERT_EQ(h.groups.size(), 6u);
  const double want[6] = {-0.266, -0.266, -0.02015, -0.02015, 0.2635, -0.1840};
  for (int m = 0; m < 6; ++m) EXPECT_NEAR(h.groups[m].c, want[m], 5e-5) << m;
}

TEST(Hubbard, Layout) {
  const auto lay = hubbard_layout(8, Boundary::periodic);
  EXPECT_EQ(lay.qubit(0, 0), 0);
  EXPECT_EQ(lay.qubit(7, 0), 7);
  EXPECT_EQ(lay.qubit(0, 1), 15);
  EXPECT_EQ(lay.qubit(7, 1), 8);
  for (int q = 0; q < 16; ++q) EXPECT_EQ(lay.qubit(lay.site_of(q), lay.orbital_of(q)), q);
}

TEST(Hubbard, NoNextNearestGroupsWithoutT2) {
  HubbardParams p{1.0, 0.0, 2.0, 0.3};
  const auto h = build_hubbard_chain(6, p);
  EXPECT_TRUE(h.groups[2].terms.empty());
  EXPECT_TRUE(h.groups[3].terms.empty());
  EXPECT_THROW(build_hubbard_chain(5, p), Error);
}

TEST(Hubbard, GroupsCommuteInternally) {
  const auto h = build_hubbard_chain(8, sr2cuo3_params());
  for (const auto& g : h.groups)
    for (const auto& a : g.terms.terms)
      for (const auto& b : g.terms.terms) EXPECT_TRUE(commutes(a, b)) << g.name;
}

TEST(Hubbard, HermitianAndSymmetric) {
  const auto h = build_hubbard_chain(4, sr2cuo3_params());
  const DenseOperator m = dense_matrix(h.total());
  EXPECT_LT((m - m.adjoint()).cwiseAbs().maxCoeff(), 1e-12);
  const DenseOperator n = dense_matrix(number_operator(8));
  const DenseOperator sz = dense_matrix(sz_operator(h.layout));
  EXPECT_LT(commutator(m, n).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT(commutator(m, sz).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Hubbard, FreeGroundEnergyEqualsBandSum) {
  for (int L : {4}) {
    HubbardParams p{0.532, 0.0403, 0.0, 0.159};
    const auto h = build_hubbard_chain(L, p);
    const auto sec = sector_indices(L, L, 0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(sector_block(dense_matrix(h.total()), sec));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ob(hubbard_one_body(L, p, L / 2));
    const double band = ob.eigenvalues().head(L / 2).sum();
    EXPECT_NEAR(es.eigenvalues()(0), 2 * band, 1e-9) << "L=" << L;
  }
}

TEST(Hubbard, OneBodyMatchesSingleParticleSector) {
  // With one electron per block the twist is +1 (ordinary periodic chain).
  HubbardParams p{0.7, 0.2, 0.0, 0.0};
  const int L = 4;
  const auto h = build_hubbard_chain(L, p);
  const DenseOperator m = dense_matrix(h.total());
  const auto sec = sector_indices(L, 1, 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(sector_block(m, sec));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ob(hubbard_one_body(L, p, 1));
  // Z terms vanish at U=0, mu=0; the N=1 sector energy is the band energy
  for (int k = 0; k < L; ++k) EXPECT_NEAR(es.eigenvalues()(k), ob.eigenvalues()(k), 1e-10);
}

TEST(JordanWigner, Strings) {
  const auto c0 = jordan_wigner(0, false, 4);
  ASSERT_EQ(c0.size(), 2u);
  EXPECT_EQ(c0.terms[0].label(), "XIII");
  EXPECT_EQ(c0.terms[1].label(), "YIII");
  EXPECT_NEAR(c0.terms[1].coeff.imag(), 0.5, 1e-15);
  const auto c2 = jordan_wigner(2, false, 4);
  EXPECT_EQ(c2.terms[0].label(), "ZZXI");
  EXPECT_EQ(c2.terms[1].label(), "ZZYI");
  EXPECT_THROW(jordan_wigner(4, false, 4), Error);
}

TEST(JordanWigner, CanonicalAnticommutation) {
  const int n = 4;
  std::vector<DenseOperator> c, cd;
  for (int a = 0; a < n; ++a) {
    c.push_back(dense_matrix(jordan_wigner(a, false, n)));
    cd.push_back(dense_matrix(jordan_wigner(a, true, n)));
  }
  const DenseOperator id = DenseOperator::Identity(16, 16);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      EXPECT_LT((c[a] * cd[b] + cd[b] * c[a] - (a == b ? id : DenseOperator::Zero(16, 16))).cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_LT((c[a] * c[b] + c[b] * c[a]).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Restriction, HeisenbergWindowKeepsThreeBonds) {
  const auto h = build_heisenberg(8, Boundary::periodic);
  const auto r = restrict_hamiltonian(h, 0, 4);
  EXPECT_EQ(r.term_count(), 9u);
  const auto w = make_window(h.layout, 0, 4);
  EXPECT_EQ(w.sites, (std::vector<int>{6, 7, 0, 1}));
  EXPECT_THROW(restrict_hamiltonian(h, 0, 8), Error);
}

TEST(Restriction, OpenChainDropsOnlyTheExcludedSite) {
  const auto h = build_heisenberg(8, Boundary::open);
  const auto r = restrict_hamiltonian(h, 3, 7);  // window {0..6}
  EXPECT_EQ(r.term_count(), 18u);
  for (const auto& g : r.groups)
    for (const auto& p : g.terms.terms) EXPECT_FALSE((p.support() >> 7) & 1u);
}

TEST(Restriction, SubsetAndNesting) {
  const auto h = build_hubbard_chain(8, sr2cuo3_params());
  for (int j = 0; j < 8; ++j) {
    const auto big = restrict_hamiltonian(h, j, 6);
    const auto small = restrict_hamiltonian(h, j, 3);
    const auto nested = restrict_hamiltonian(big, j, 3);
    for (std::size_t m = 0; m < h.groups.size(); ++m) {
      EXPECT_EQ(big.groups[m].c, h.groups[m].c);
      ASSERT_EQ(nested.groups[m].terms.size(), small.groups[m].terms.size());
      for (std::size_t k = 0; k < small.groups[m].terms.size(); ++k)
        EXPECT_TRUE(nested.groups[m].terms.terms[k].same_axes(small.groups[m].terms.terms[k]));
      for (const auto& p : big.groups[m].terms.terms) {
        bool found = false;
        for (const auto& q : h.groups[m].terms.terms) found = found || (q.same_axes(p) && q.coeff == p.coeff);
        EXPECT_TRUE(found);
      }
    }
  }
}

TEST(Restriction, RelabelMovesOntoWindowRegister) {
  const auto h = build_hubbard_chain(8, sr2cuo3_params());
  const auto w = make_window(h.layout, 0, 4);  // sites {6,7,0,1}
  const auto loc = relabel(restrict_hamiltonian(h, 0, 4), w);
  EXPECT_EQ(loc.n_qubits(), 8);
  // on-site ZZ for global site 0 (qubits 0, 15) sits at local position 2 (qubits 2, 5)
  bool found = false;
  for (const auto& p : loc.groups[4].terms.terms) found = found || p.qubits() == std::vector<int>{2, 5};
  EXPECT_TRUE(found);
  EXPECT_EQ(loc.groups[4].terms.size(), 4u);
}

TEST(Sectors, Counts) {
  EXPECT_EQ(sector_indices(1, 1, 1).indices, (std::vector<std::uint64_t>{1}));
  EXPECT_EQ(sector_indices(4, 4, 0).indices.size(), 36u);
  std::size_t total = 0;
  for (int ne = 0; ne <= 8; ++ne)
    for (int tsz = -ne; tsz <= ne; tsz += 2) total += sector_indices(4, ne, tsz).indices.size();
  EXPECT_EQ(total, 256u);
  EXPECT_TRUE(sector_indices(2, 1, 3).empty());
  EXPECT_THROW(sector_indices(2, 1, 0), Error);
  EXPECT_THROW(sector_indices(2, 5, 1), Error);
}

TEST(Sectors, MembersHaveDeclaredQuantumNumbers) {
  const auto lay = hubbard_layout(4, Boundary::periodic);
  const auto s = sector_indices(4, 5, 1);
  for (auto b : s.indices) {
    EXPECT_EQ(std::popcount(b), 5);
    const int up = count_up(lay, b);
    EXPECT_EQ(up - (5 - up), 1);
  }
  EXPECT_TRUE(std::is_sorted(s.indices.begin(), s.indices.end()));
}
