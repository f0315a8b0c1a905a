#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "hamforge/hamiltonian.hpp"
#include "hamforge/spectrum.hpp"
#include "test_util.hpp"

using namespace hamforge;

TEST_CASE("assemble single ZZ term") {
  Hamiltonian h;
  h.n = 2;
  h.add_pauli({0, 1}, "ZZ", 1.0);
  Mat m = assemble(h).entries;
  Mat expect = Mat::Zero(4, 4);
  expect(0, 0) = 1;
  expect(1, 1) = -1;
  expect(2, 2) = -1;
  expect(3, 3) = 1;
  REQUIRE(max_abs(m - expect) < 1e-14);
}

TEST_CASE("assemble Heisenberg pair spectrum") {
  // brute-force oracle: XX+YY+ZZ on two qubits has eigenvalues {-3, 1, 1, 1}
  Hamiltonian h;
  h.n = 2;
  h.add_pauli({0, 1}, "XX", 1.0);
  h.add_pauli({0, 1}, "YY", 1.0);
  h.add_pauli({0, 1}, "ZZ", 1.0);
  auto s = diagonalize(assemble(h));
  REQUIRE(s.eigenvalues(0) == Catch::Approx(-3.0).margin(1e-12));
  for (int i = 1; i < 4; ++i) REQUIRE(s.eigenvalues(i) == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("assemble empty term list") {
  Hamiltonian h;
  h.n = 3;
  Mat m = assemble(h).entries;
  REQUIRE(m.rows() == 8);
  REQUIRE(max_abs(m) == 0.0);
}

TEST_CASE("assemble matches explicit kron for local terms") {
  std::mt19937 rng(7);
  Hamiltonian h;
  h.n = 3;
  Mat blk = test::random_hermitian(4, rng);
  h.add(LocalTerm({0, 2}, blk, 0.7));
  Mat m = assemble(h).entries;
  // oracle: permute site order so support sites are adjacent, kron directly
  Mat direct = Mat::Zero(8, 8);
  SiteIndexer ix(3, 2);
  for (long r = 0; r < 8; ++r)
    for (long c = 0; c < 8; ++c) {
      if (ix.digit(r, 1) != ix.digit(c, 1)) continue;
      long br = 2 * ix.digit(r, 0) + ix.digit(r, 2);
      long bc = 2 * ix.digit(c, 0) + ix.digit(c, 2);
      direct(r, c) = 0.7 * blk(br, bc);
    }
  REQUIRE(max_abs(m - direct) < 1e-12);
}

TEST_CASE("assemble rejects bad support and dim cap") {
  Hamiltonian h;
  h.n = 2;
  h.add_pauli({0, 1}, "XX", 1.0);
  REQUIRE_THROWS_AS(assemble(h, 2), Error);
  Hamiltonian bad;
  bad.n = 1;
  bad.add_pauli({1}, "X", 1.0);
  REQUIRE_THROWS_AS(assemble(bad), Error);
}

TEST_CASE("pauli_decompose of Heisenberg block") {
  Hamiltonian pair;
  pair.n = 2;
  pair.add_pauli({0, 1}, "XX", 1.0);
  pair.add_pauli({0, 1}, "YY", 1.0);
  pair.add_pauli({0, 1}, "ZZ", 1.0);
  Mat heis = assemble(pair).entries;
  auto terms = pauli_decompose(LocalTerm({0, 1}, heis, 1.0));
  REQUIRE(terms.size() == 3);
  for (const auto& t : terms) {
    REQUIRE(t.letters.size() == 2);
    REQUIRE(t.letters[0] == t.letters[1]);
    REQUIRE(t.weight == Catch::Approx(1.0).margin(1e-12));
  }
}

TEST_CASE("pauli_decompose identity and projector") {
  auto id_terms = pauli_decompose(LocalTerm({0}, identity(2), 1.0));
  REQUIRE(id_terms.size() == 1);
  REQUIRE(id_terms[0].is_identity());
  REQUIRE(id_terms[0].weight == Catch::Approx(1.0));

  Mat p11 = Mat::Zero(2, 2);
  p11(1, 1) = 1.0;
  auto proj_terms = pauli_decompose(LocalTerm({0}, p11, 1.0));
  REQUIRE(proj_terms.size() == 2);
  for (const auto& t : proj_terms) {
    if (t.is_identity())
      REQUIRE(t.weight == Catch::Approx(0.5));
    else {
      REQUIRE(t.letters == "Z");
      REQUIRE(t.weight == Catch::Approx(-0.5));
    }
  }
}

TEST_CASE("pauli decompose round trip on random blocks") {
  std::mt19937 rng(11);
  for (int k = 1; k <= 3; ++k) {
    Hamiltonian h;
    h.n = k;
    std::vector<int> support(k);
    for (int i = 0; i < k; ++i) support[i] = i;
    Mat blk = test::random_hermitian(1L << k, rng);
    LocalTerm lt(support, blk, 1.3);
    auto terms = pauli_decompose(lt);
    Hamiltonian back;
    back.n = k;
    for (auto& t : terms) back.add(t);
    Hamiltonian orig;
    orig.n = k;
    orig.add(lt);
    REQUIRE(max_abs(assemble(back).entries - assemble(orig).entries) < 1e-9);
  }
}

TEST_CASE("diagonalize basics and determinism") {
  Mat d = Mat::Zero(3, 3);
  d(0, 0) = 3;
  d(1, 1) = 1;
  d(2, 2) = 2;
  auto s = diagonalize(DenseOperator{d, true});
  REQUIRE(s.eigenvalues(0) == Catch::Approx(1.0));
  REQUIRE(s.eigenvalues(1) == Catch::Approx(2.0));
  REQUIRE(s.eigenvalues(2) == Catch::Approx(3.0));

  std::mt19937 rng(3);
  Mat m = test::random_hermitian(16, rng);
  auto s1 = diagonalize(DenseOperator{m, true});
  auto s2 = diagonalize(DenseOperator{m, true});
  REQUIRE((s1.eigenvalues - s2.eigenvalues).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(max_abs(s1.eigenvectors - s2.eigenvectors) == 0.0);
}

TEST_CASE("diagonalize XX pair") {
  Hamiltonian h;
  h.n = 2;
  h.add_pauli({0, 1}, "XX", 1.0);
  auto s = diagonalize(assemble(h));
  REQUIRE(s.eigenvalues(0) == Catch::Approx(-1.0));
  REQUIRE(s.eigenvalues(1) == Catch::Approx(-1.0));
  REQUIRE(s.eigenvalues(2) == Catch::Approx(1.0));
  REQUIRE(s.eigenvalues(3) == Catch::Approx(1.0));
}

TEST_CASE("K4 Heisenberg penalty spectrum") {
  // brute-force 16x16 oracle: eigenvalues {0 x2, 4 x9, 12 x5}
  Hamiltonian h;
  h.n = 4;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      for (auto p : {"XX", "YY", "ZZ"}) h.add_pauli({i, j}, p, 1.0);
  h.add_identity(6.0);
  auto s = diagonalize(assemble(h));
  std::vector<std::pair<double, int>> expect = {{0.0, 2}, {4.0, 9}, {12.0, 5}};
  long idx = 0;
  for (auto [val, mult] : expect)
    for (int k = 0; k < mult; ++k, ++idx)
      REQUIRE(s.eigenvalues(idx) == Catch::Approx(val).margin(1e-9));
}

TEST_CASE("eigenpair residuals and trace identity") {
  std::mt19937 rng(5);
  Mat m = test::random_hermitian(32, rng, 2.0);
  auto s = diagonalize(DenseOperator{m, true});
  double norm = s.eigenvalues.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < s.dim(); ++i) {
    double resid = (m * s.eigenvectors.col(i) - s.eigenvalues(i) * s.eigenvectors.col(i)).norm();
    REQUIRE(resid <= 1e-9 * std::max(1.0, norm));
  }
  REQUIRE(s.eigenvalues.sum() == Catch::Approx(m.trace().real()).margin(1e-9 * 32 * norm));
  REQUIRE(max_abs(Mat(s.eigenvectors.adjoint() * s.eigenvectors) - identity(32)) < 1e-10);
}

TEST_CASE("low energy projector") {
  Mat d = Mat::Zero(2, 2);
  d(1, 1) = 5;
  auto s = diagonalize(DenseOperator{d, true});
  Mat p = low_energy_projector(s, 1.0).entries;
  Mat expect = Mat::Zero(2, 2);
  expect(0, 0) = 1;
  REQUIRE(max_abs(p - expect) < 1e-12);

  Mat below = low_energy_projector(s, -1.0).entries;
  REQUIRE(max_abs(below) == 0.0);

  REQUIRE_THROWS_AS(low_energy_projector(s, 5.0 + 1e-10), Error);
}

TEST_CASE("K4 projector rank at cut 2") {
  Hamiltonian h;
  h.n = 4;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      for (auto p : {"XX", "YY", "ZZ"}) h.add_pauli({i, j}, p, 1.0);
  h.add_identity(6.0);
  auto s = diagonalize(assemble(h));
  Mat p = low_energy_projector(s, 2.0).entries;
  REQUIRE(rank_of_projector(p) == 2);
  REQUIRE(max_abs(Mat(p * p) - p) < 1e-10);
}

TEST_CASE("spectrum invariant under site relabeling") {
  std::mt19937 rng(17);
  for (int rep = 0; rep < 4; ++rep) {
    Hamiltonian h;
    h.n = 3;
    h.add(LocalTerm({0, 1}, test::random_hermitian(4, rng), 1.0));
    h.add(LocalTerm({1, 2}, test::random_hermitian(4, rng), 0.5));
    h.add(LocalTerm({0}, test::random_hermitian(2, rng), -0.3));
    std::vector<int> map = {2, 0, 1};
    Hamiltonian r = relabel_sites(h, map, 3);
    auto s1 = diagonalize(assemble(h));
    auto s2 = diagonalize(assemble(r));
    REQUIRE((s1.eigenvalues - s2.eigenvalues).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("partial trace and triviality check") {
  std::mt19937 rng(23);
  Mat a = test::random_hermitian(2, rng);
  Mat b = test::random_hermitian(4, rng);
  Mat m = kron(a, b);  // site 0 = a, sites 1,2 = b
  Mat tr0 = partial_trace(m, 3, 2, {0});
  REQUIRE(max_abs(tr0 - a.trace() * b) < 1e-12);
  Mat id_b = kron(identity(2), b);
  REQUIRE(acts_trivially_on(id_b, 3, 2, 0));
  REQUIRE(!acts_trivially_on(kron(a, b), 3, 2, 0));
}
