#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "hamforge/heisenberg.hpp"
#include "hamforge/simcheck.hpp"
#include "test_util.hpp"

using namespace hamforge;

TEST_CASE("K4 block spectrum and ground space") {
  for (auto f : {PairFamily::heisenberg, PairFamily::xy}) {
    auto h = k4_block_hamiltonian(f);
    auto s = diagonalize(assemble(h));
    REQUIRE(s.eigenvalues(0) == Catch::Approx(0.0).margin(1e-12));
    REQUIRE(s.eigenvalues(1) == Catch::Approx(0.0).margin(1e-12));
    REQUIRE(s.eigenvalues(2) >= 1.0);  // gap at least 1 after normalization
    // ground space = the singlet-pair plane
    Mat basis = k4_logical_basis();
    Mat hm = assemble(h).entries;
    REQUIRE(max_abs(Mat(hm * basis)) < 1e-12);
    REQUIRE(max_abs(Mat(basis.adjoint() * basis) - identity(2)) < 1e-12);
  }
  // Heisenberg multiplicities {2, 9, 5} at {0, 4, 12}
  auto s = diagonalize(assemble(k4_block_hamiltonian(PairFamily::heisenberg)));
  int at0 = 0, at4 = 0, at12 = 0;
  for (long i = 0; i < 16; ++i) {
    if (std::abs(s.eigenvalues(i) - 0.0) < 1e-9) ++at0;
    if (std::abs(s.eigenvalues(i) - 4.0) < 1e-9) ++at4;
    if (std::abs(s.eigenvalues(i) - 12.0) < 1e-9) ++at12;
  }
  REQUIRE(at0 == 2);
  REQUIRE(at4 == 9);
  REQUIRE(at12 == 5);
}

TEST_CASE("single-pair logical forms match the known table") {
  // (i,j) are 0-based versions of the published 1..4 labels
  auto check = [](int i, int j, double cx, double cz, double cid) {
    auto c = one_qubit_coeffs(k4_pair_logical(i, j));
    REQUIRE(c.x == Catch::Approx(cx).margin(1e-9));
    REQUIRE(c.z == Catch::Approx(cz).margin(1e-9));
    REQUIRE(c.id == Catch::Approx(cid).margin(1e-9));
    REQUIRE(c.y == Catch::Approx(0.0).margin(1e-12));
  };
  double r3 = 1.0 / std::sqrt(3.0);
  check(0, 2, 0.0, -2.0 / 3.0, -1.0 / 3.0);
  check(1, 3, 0.0, -2.0 / 3.0, -1.0 / 3.0);
  check(0, 1, -r3, 1.0 / 3.0, -1.0 / 3.0);
  check(2, 3, -r3, 1.0 / 3.0, -1.0 / 3.0);
  check(0, 3, r3, 1.0 / 3.0, -1.0 / 3.0);
  check(1, 2, r3, 1.0 / 3.0, -1.0 / 3.0);
}

TEST_CASE("pauli equality of projected pair interactions") {
  Mat basis = k4_logical_basis();
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      Mat prev;
      for (auto p : {"XX", "YY", "ZZ"}) {
        Hamiltonian h;
        h.n = 4;
        h.add_pauli({i, j}, p, 1.0);
        Mat cur = basis.adjoint() * assemble(h).entries * basis;
        if (prev.size()) REQUIRE(max_abs(cur - prev) < 1e-10);
        prev = cur;
      }
    }
}

TEST_CASE("cross-pauli first-order terms vanish") {
  Mat basis = k4_logical_basis();
  const char letters[] = {'X', 'Y', 'Z'};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      if (i == j) continue;
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
          if (a == b) continue;
          Hamiltonian h;
          h.n = 4;
          h.add(make_pauli({{i, letters[a]}, {j, letters[b]}}, 1.0));
          Mat proj = basis.adjoint() * assemble(h).entries * basis;
          REQUIRE(max_abs(proj) < 1e-10);
        }
    }
}

TEST_CASE("single paulis map the ground space into one eigenspace") {
  for (auto f : {PairFamily::heisenberg, PairFamily::xy}) {
    auto s = diagonalize(assemble(k4_block_hamiltonian(f)));
    Mat basis = k4_logical_basis();
    for (int site = 0; site < 4; ++site) {
      for (char p : {'X', 'Y', 'Z'}) {
        Hamiltonian h;
        h.n = 4;
        h.add_pauli({site}, std::string(1, p), 1.0);
        Mat image = assemble(h).entries * basis;  // 16 x 2
        // the image must lie in exactly one excited eigenspace
        int touched = 0;
        long i = 0;
        while (i < 16) {
          long j = i + 1;
          while (j < 16 && s.eigenvalues(j) - s.eigenvalues(i) < 1e-8) ++j;
          Mat sub = s.eigenvectors.middleCols(i, j - i);
          double overlap = max_abs(Mat(sub.adjoint() * image));
          if (overlap > 1e-9) {
            ++touched;
            if (f == PairFamily::heisenberg)
              REQUIRE(s.eigenvalues(i) == Catch::Approx(4.0).margin(1e-9));
          }
          i = j;
        }
        REQUIRE(touched == 1);
        // full column rank: both logical states reach the excited eigenspace
        Eigen::JacobiSVD<Mat> svd(image);
        REQUIRE(svd.singularValues()(1) > 1e-9);
      }
    }
  }
}

TEST_CASE("second-order oracle matches the closed form") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int rep = 0; rep < 3; ++rep) {
    Eigen::Matrix4d alpha;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) alpha(i, j) = u(rng);
    Mat oracle = k4_second_order_logical(PairFamily::heisenberg, alpha);
    Mat closed = k4_second_order_closed_form(alpha);
    REQUIRE(max_abs(oracle - closed) < 1e-9);
  }
}

TEST_CASE("coupling rows produce the advertised logical pairs") {
  for (auto f : {PairFamily::heisenberg, PairFamily::xy}) {
    for (auto type : {LogicalPair::xx, LogicalPair::xz, LogicalPair::zx, LogicalPair::zz}) {
      for (bool pos : {true, false}) {
        auto cal = calibrate_row(f, type, pos);
        REQUIRE(cal.scale > 0.0);
        REQUIRE(cal.residual_2local <= 1e-8 * cal.scale);
      }
    }
  }
}

TEST_CASE("xy first-order interactions are 2/3 of heisenberg ones") {
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      Mat h = k4_family_pair_logical(PairFamily::heisenberg, i, j);
      Mat x = k4_family_pair_logical(PairFamily::xy, i, j);
      REQUIRE(max_abs(x - Mat((2.0 / 3.0) * h)) < 1e-10);
    }
}

TEST_CASE("first-order solve realizes arbitrary X/Z fields") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  Mat basis = k4_logical_basis();
  for (auto f : {PairFamily::heisenberg, PairFamily::xy}) {
    double wx = u(rng), wz = u(rng);
    auto sol = solve_first_order(f, wx, wz);
    Hamiltonian h1;
    h1.n = 4;
    for (char s : family_letters(f)) {
      h1.add_pauli({0, 3}, std::string(2, s), sol.w_03);
      h1.add_pauli({0, 2}, std::string(2, s), sol.w_02);
    }
    auto c = one_qubit_coeffs(basis.adjoint() * assemble(h1).entries * basis);
    REQUIRE(c.x == Catch::Approx(wx).margin(1e-10));
    REQUIRE(c.z == Catch::Approx(wz).margin(1e-10));
    REQUIRE(c.id == Catch::Approx(sol.ident).margin(1e-10));
  }
}

TEST_CASE("k4 pass effective equals the target exactly") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto f : {PairFamily::heisenberg, PairFamily::xy}) {
    std::vector<K4PairJob> jobs = {{0, 1, LogicalPair::zx, 0.8}};
    std::vector<double> fx = {u(rng), u(rng)};
    std::vector<double> fz = {u(rng), u(rng)};
    auto g = build_k4_pass(2, jobs, fx, fz, 0.25, f);
    Mat eff = effective_hamiltonian(g);
    Mat tgt = assemble(g.target).entries;
    REQUIRE(max_abs(eff - tgt) < 1e-9);
    // simulator family audit: every term is a family pair or identity
    for (const auto& t : g.h0.terms) {
      auto sup = term_support(t);
      REQUIRE((sup.empty() || sup.size() == 2));
    }
  }
}

TEST_CASE("k4 pass certifies a 2-qubit target") {
  std::vector<K4PairJob> jobs = {{0, 1, LogicalPair::zz, 1.0}};
  auto g = build_k4_pass(2, jobs, {0.3, 0.0}, {0.0, -0.4}, 0.0, PairFamily::heisenberg);
  SimulationReport rep;
  double delta = delta_for(g, 0.2, 0.2, kDefaultDeltaCap, kDefaultDimCap, {}, &rep);
  REQUIRE(rep.pass);
  REQUIRE(delta > 0);
  REQUIRE(rep.eig_err_max <= 0.2);
}
