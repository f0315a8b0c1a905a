#include <catch2/catch_amalgamated.hpp>

#include "hamforge/gadgets.hpp"
#include "hamforge/simcheck.hpp"
#include "test_util.hpp"

using namespace hamforge;

namespace {

Mat assembled(const Hamiltonian& h) { return assemble(h).entries; }

}  // namespace

TEST_CASE("subdivision gadget reproduces A x B exactly") {
  PauliTerm a({0}, "Z", 1.0), b({1}, "Z", 1.0);
  auto g = subdivision_gadget(a, b, 2);
  REQUIRE(g.m() == 3);
  Mat eff = effective_hamiltonian(g);
  REQUIRE(max_abs(eff - assembled(g.target)) < 1e-12);

  // weighted, multi-letter operands and negative weight
  PauliTerm a2({0, 1}, "XX", 0.7), b2({2}, "Z", -1.3);
  auto g2 = subdivision_gadget(a2, b2, 3);
  REQUIRE(max_abs(effective_hamiltonian(g2) - assembled(g2.target)) < 1e-12);
  REQUIRE(std::get<PauliTerm>(g2.target.terms[0]).weight == Catch::Approx(-0.91));

  REQUIRE_THROWS_AS(subdivision_gadget(PauliTerm({0}, "Z", 1.0), PauliTerm({0}, "X", 1.0), 2),
                    Error);
}

TEST_CASE("subdivision simulator at large Delta tracks the target spectrum") {
  auto g = subdivision_gadget(PauliTerm({0}, "Z", 1.0), PauliTerm({1}, "Z", 1.0), 2);
  Hamiltonian sim = build_simulator(g, 1e4);
  auto s = diagonalize(assemble(sim));
  // four lowest eigenvalues approach spec(ZZ) = {-1,-1,1,1}
  REQUIRE(s.eigenvalues(0) == Catch::Approx(-1.0).margin(0.05));
  REQUIRE(s.eigenvalues(1) == Catch::Approx(-1.0).margin(0.05));
  REQUIRE(s.eigenvalues(2) == Catch::Approx(1.0).margin(0.05));
  REQUIRE(s.eigenvalues(3) == Catch::Approx(1.0).margin(0.05));
}

TEST_CASE("build_simulator exponent schedules") {
  auto g2 = subdivision_gadget(PauliTerm({0}, "Z", 1.0), PauliTerm({1}, "Z", 1.0), 2);
  Hamiltonian sim2 = build_simulator(g2, 100.0);
  // h0 identity term scaled by Delta, h2 by sqrt(Delta), h1 by 1
  bool saw_h0 = false, saw_h2 = false, saw_h1 = false;
  for (size_t i = 0; i < sim2.terms.size(); ++i) {
    double w = term_weight(sim2.terms[i]);
    if (sim2.term_tags[i] == "h0" && std::abs(std::abs(w) - 50.0) < 1e-9) saw_h0 = true;
    if (sim2.term_tags[i] == "h2") {
      REQUIRE(std::abs(w) == Catch::Approx(10.0 * std::sqrt(0.5)));
      saw_h2 = true;
    }
    if (sim2.term_tags[i] == "h1") {
      REQUIRE(w == Catch::Approx(1.0));
      saw_h1 = true;
    }
  }
  REQUIRE((saw_h0 && saw_h2 && saw_h1));

  auto g3 = three_to_two_gadget(PauliTerm({0}, "Z", 1.0), PauliTerm({1}, "Z", 1.0),
                                PauliTerm({2}, "Z", 1.0), 3);
  Hamiltonian sim3 = build_simulator(g3, 1000.0);
  for (size_t i = 0; i < sim3.terms.size(); ++i) {
    if (sim3.term_tags[i] == "h2" && term_support(sim3.terms[i]).size() == 2 &&
        std::get<PauliTerm>(sim3.terms[i]).letters == "ZX") {
      double alpha = std::cbrt(0.5);
      REQUIRE(std::abs(term_weight(sim3.terms[i])) ==
              Catch::Approx(std::pow(1000.0, 2.0 / 3.0) * alpha));
    }
    if (sim3.term_tags[i] == "h1prime")
      REQUIRE(std::abs(term_weight(sim3.terms[i])) <= std::cbrt(1000.0) * 2.0 * std::cbrt(0.5) *
                                                          std::cbrt(0.5) + 1e-9);
  }
}

TEST_CASE("y elimination gadget") {
  PauliTerm yy({0, 1}, "YY", 1.0);
  auto g = y_elimination_gadget(yy, 2);
  // simulator terms carry no Y letters
  for (const auto& part : {g.h0, g.h1, g.h2})
    for (const auto& t : part.terms)
      if (std::holds_alternative<PauliTerm>(t))
        REQUIRE(std::get<PauliTerm>(t).y_count() == 0);
  Mat eff = effective_hamiltonian(g);
  REQUIRE(max_abs(eff - assembled(g.target)) < 1e-12);

  // negative weight and extra X/Z letters
  PauliTerm t2({0, 1, 2, 3}, "YYXZ", -0.8);
  auto g2 = y_elimination_gadget(t2, 4);
  REQUIRE(max_abs(effective_hamiltonian(g2) - assembled(g2.target)) < 1e-12);

  REQUIRE_THROWS_AS(y_elimination_gadget(PauliTerm({0, 1}, "XX", 1.0), 2), Error);
  REQUIRE_THROWS_AS(y_elimination_gadget(PauliTerm({0, 1}, "YX", 1.0), 2), Error);
}

TEST_CASE("y elimination certifies against the oracle") {
  PauliTerm t({0, 1, 2, 3}, "YYXZ", 1.0);
  auto g = y_elimination_gadget(t, 4);
  SimulationReport rep;
  double delta = delta_for(g, 0.1, 0.1, kDefaultDeltaCap, kDefaultDimCap, {}, &rep);
  REQUIRE(delta <= 1e12);
  REQUIRE(rep.pass);
  REQUIRE(rep.eig_err_max <= 0.1);
}

TEST_CASE("three to two gadget") {
  auto g = three_to_two_gadget(PauliTerm({0}, "Z", 1.0), PauliTerm({1}, "Z", 1.0),
                               PauliTerm({2}, "Z", 1.0), 3);
  REQUIRE(g.order == 3);
  Mat eff = effective_hamiltonian(g);
  REQUIRE(max_abs(eff - assembled(g.target)) < 1e-12);
  for (const auto& part : {g.h0, g.h1, g.h2, g.h1prime})
    for (const auto& t : part.terms)
      if (std::holds_alternative<PauliTerm>(t))
        REQUIRE(std::get<PauliTerm>(t).y_count() == 0);

  // mixed letters and weights
  auto g2 = three_to_two_gadget(PauliTerm({0}, "X", 0.5), PauliTerm({1}, "Z", -1.0),
                                PauliTerm({2}, "X", 2.0), 3);
  REQUIRE(max_abs(effective_hamiltonian(g2) - assembled(g2.target)) < 1e-12);

  // zero weight -> empty effective
  auto g0 = three_to_two_gadget(PauliTerm({0}, "Z", 1.0), PauliTerm({1}, "Z", 1.0),
                                PauliTerm({2}, "Z", 0.0), 3);
  REQUIRE(max_abs(effective_hamiltonian(g0)) < 1e-12);

  REQUIRE_THROWS_AS(three_to_two_gadget(PauliTerm({0}, "Y", 1.0), PauliTerm({1}, "Z", 1.0),
                                        PauliTerm({2}, "Z", 1.0), 3),
                    Error);
}

TEST_CASE("three to two certifies against the oracle") {
  auto g = three_to_two_gadget(PauliTerm({0}, "Z", 1.0), PauliTerm({1}, "Z", 1.0),
                               PauliTerm({2}, "Z", 1.0), 3);
  SimulationReport rep;
  double delta = delta_for(g, 0.1, 0.1, kDefaultDeltaCap, kDefaultDimCap, {}, &rep);
  REQUIRE(rep.pass);
  REQUIRE(delta <= 1e12);
  // four lowest eigenvalues of the simulator match spec(ZZZ) blockwise
  REQUIRE(rep.eig_err_max <= 0.1);
}

TEST_CASE("fork gadget") {
  auto g = fork_gadget(PauliTerm({0}, "X", 1.0), PauliTerm({1}, "X", 1.0),
                       PauliTerm({2}, "X", 1.0), 1.0, 1.0, 3);
  Mat eff = effective_hamiltonian(g);
  REQUIRE(max_abs(eff - assembled(g.target)) < 1e-12);
  // vertex 0 participates in exactly one simulator edge
  int degree0 = 0;
  for (const auto& part : {g.h1, g.h2})
    for (const auto& t : part.terms) {
      auto sup = term_support(t);
      if (sup.size() == 2 && (sup[0] == 0 || sup[1] == 0)) ++degree0;
    }
  REQUIRE(degree0 == 1);
  SimulationReport rep;
  delta_for(g, 0.1, 0.1, kDefaultDeltaCap, kDefaultDimCap, {}, &rep);
  REQUIRE(rep.pass);
}

TEST_CASE("crossing gadget") {
  auto g = crossing_gadget(PauliTerm({0}, "X", 1.0), PauliTerm({2}, "X", 1.0), 1.0,
                           PauliTerm({1}, "X", 1.0), PauliTerm({3}, "X", 1.0), 1.0, 4);
  Mat eff = effective_hamiltonian(g);
  REQUIRE(max_abs(eff - assembled(g.target)) < 1e-12);
  // simulator interaction graph: star on the mediator plus the four sides;
  // the diagonals (0,2) and (1,3) never appear
  for (const auto& part : {g.h1, g.h2})
    for (const auto& t : part.terms) {
      auto sup = term_support(t);
      if (sup.size() != 2) continue;
      bool diag = (sup[0] == 0 && sup[1] == 2) || (sup[0] == 1 && sup[1] == 3);
      REQUIRE(!diag);
    }
  SimulationReport rep;
  delta_for(g, 0.1, 0.1, kDefaultDeltaCap, kDefaultDimCap, {}, &rep);
  REQUIRE(rep.pass);
}

TEST_CASE("order-1 effective is the plain ground projection") {
  // first-order gadget: pin one ancilla, H1 acts on the target sites only
  PerturbativeGadget g;
  g.order = 1;
  g.target.n = 2;
  g.target.add_pauli({0}, "X", 0.5);
  g.target.add_pauli({0, 1}, "ZZ", 1.0);
  g.h0.n = g.h1.n = g.h2.n = 3;
  g.h0.add_identity(0.5);
  g.h0.add_pauli({2}, "Z", -0.5);
  g.h1.add_pauli({0}, "X", 0.5);
  g.h1.add_pauli({0, 1}, "ZZ", 1.0);
  g.enc = mediator_attachment_encoding(2, 3, {{{2}, Vec(Vec::Unit(2, 0))}});
  g.block_sites = {{2}};
  Mat eff = effective_hamiltonian(g);
  REQUIRE(max_abs(eff - assembled(g.target)) < 1e-12);
}

TEST_CASE("parallel merge of disjoint subdivision gadgets") {
  // two subdivisions on a 4-qubit target, mediators at sites 4 and 5
  auto g1 = subdivision_gadget(PauliTerm({0}, "Z", 1.0), PauliTerm({1}, "Z", 1.0), 4, 6, 4);
  auto g2 = subdivision_gadget(PauliTerm({2}, "X", 1.0), PauliTerm({3}, "X", -0.5), 4, 6, 5);
  auto merged = parallel_merge({g1, g2});
  Mat eff = effective_hamiltonian(merged);
  Mat expect = assembled(g1.target) + assembled(g2.target);
  REQUIRE(max_abs(eff - expect) < 1e-12);

  auto standalone = subdivision_gadget(PauliTerm({0}, "Z", 1.0), PauliTerm({1}, "Z", 1.0), 2);
  auto single = parallel_merge({standalone});
  REQUIRE(max_abs(effective_hamiltonian(single) - assembled(standalone.target)) < 1e-12);

  // overlapping mediators rejected
  auto g3 = subdivision_gadget(PauliTerm({2}, "X", 1.0), PauliTerm({3}, "X", 1.0), 4, 6, 4);
  REQUIRE_THROWS_AS(parallel_merge({g1, g3}), Error);
}

TEST_CASE("delta_for terminates and is monotone under tighter eps") {
  auto g = subdivision_gadget(PauliTerm({0}, "Z", 1.0), PauliTerm({1}, "Z", 1.0), 2);
  double d1 = delta_for(g, 0.1, 0.1);
  REQUIRE(d1 <= 1e7);
  double d2 = delta_for(g, 0.05, 0.1);
  REQUIRE(d2 >= d1);
}

TEST_CASE("effective closed forms match a direct oracle computation") {
  // independent oracle: assemble H_sim pieces densely and project by hand
  auto g = subdivision_gadget(PauliTerm({0}, "X", 0.8), PauliTerm({1}, "Z", 1.1), 2);
  Mat h0 = assembled(g.h0), h1 = assembled(g.h1), h2 = assembled(g.h2);
  auto s0 = diagonalize(DenseOperator{h0, true});
  long rank = s0.count_below(0.5);
  Mat ground = s0.eigenvectors.leftCols(rank);
  Mat pi = ground * ground.adjoint();
  Mat excited = s0.eigenvectors.rightCols(s0.dim() - rank);
  Vec inv(s0.dim() - rank);
  for (long i = rank; i < s0.dim(); ++i) inv(i - rank) = 1.0 / s0.eigenvalues(i);
  Mat g_inv = excited * inv.asDiagonal() * excited.adjoint();
  Mat eff_sim = pi * h1 * pi - pi * h2 * g_inv * h2 * pi;
  Mat basis = encoded_subspace_basis(g.enc);
  Mat eff_direct = basis.adjoint() * eff_sim * basis;
  REQUIRE(max_abs(eff_direct - effective_hamiltonian(g)) < 1e-9);
}
