#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "hamforge/simcheck.hpp"
#include "test_util.hpp"

using namespace hamforge;

namespace {

/// Perfect simulation H' = E(H) + Delta' (1 - E(1)) for the local
/// complex-to-real encoding.
struct PerfectPair {
  Mat h;
  Mat hs;
  Encoding enc;
  double delta_prime;
};

PerfectPair perfect_pair(std::mt19937& rng, double delta_prime = 50.0) {
  PerfectPair p;
  p.enc = complex_to_real_sim_enc(2);
  p.h = test::random_hermitian(4, rng);
  Mat e1 = encoded_projector(p.enc);
  p.hs = encode(p.enc, p.h) + delta_prime * (identity(p.enc.dim_out) - e1);
  p.delta_prime = delta_prime;
  return p;
}

}  // namespace

TEST_CASE("align_isometry basics") {
  std::mt19937 rng(1);
  auto e = complex_to_real_sim_enc(2);
  Mat e1 = encoded_projector(e);
  auto aligned = align_isometry(e, e1);
  REQUIRE(aligned.eta < 1e-10);

  // small rotation of the subspace: measured distance obeys the sqrt(2) bound
  Mat gen = test::random_hermitian(e.dim_out, rng, 0.02);
  Mat u = polar_unitary(identity(e.dim_out) + cxd(0, 1) * gen);
  Mat rotated = u * e1 * u.adjoint();
  auto a2 = align_isometry(e, rotated);
  REQUIRE(a2.eta <= a2.bound + 1e-9);
  REQUIRE(max_abs(encoded_projector(a2.enc) - rotated) < 1e-8);

  // rank mismatch rejected
  Mat bigger = e1;
  auto sp = diagonalize(DenseOperator{e1, true});
  bigger += sp.eigenvectors.col(0) * sp.eigenvectors.col(0).adjoint();
  REQUIRE_THROWS_AS(align_isometry(e, bigger), Error);
}

TEST_CASE("perfect simulation verifies with zero errors") {
  std::mt19937 rng(2);
  auto p = perfect_pair(rng);
  auto sim_spec = diagonalize(DenseOperator{p.hs, true});
  double cut = op_norm(p.h) + 1.0;
  auto rep = verify_simulation_dense(p.h, sim_spec, p.enc, cut, 1e-6, 1e-6);
  REQUIRE(rep.pass);
  REQUIRE(rep.eps_measured < 1e-9);
  REQUIRE(rep.eta_measured < 1e-9);
  REQUIRE(rep.eig_err_max < 1e-9);
}

TEST_CASE("qudit embedding verifies as a perfect simulation") {
  std::mt19937 rng(3);
  auto e = qudit_to_qubit_enc(1, 3);
  Mat h = test::random_hermitian(3, rng);
  double delta_prime = 2.0 * op_norm(h) + 10.0;
  Mat pen = identity(4) - e.v * e.v.adjoint();
  Mat hs = encode(e, h) + delta_prime * pen;
  auto sim_spec = diagonalize(DenseOperator{hs, true});
  auto rep = verify_simulation_dense(h, sim_spec, e, op_norm(h) + 0.5, 1e-9, 1e-9);
  REQUIRE(rep.pass);
  REQUIRE(rep.eps_measured <= 1e-9);
}

TEST_CASE("subdivision gadget passes verification at the searched Delta") {
  auto g = subdivision_gadget(PauliTerm({0}, "Z", 1.0), PauliTerm({1}, "Z", 1.0), 2);
  SimulationReport rep;
  double delta = delta_for(g, 0.1, 0.1, kDefaultDeltaCap, kDefaultDimCap, {}, &rep);
  REQUIRE(rep.pass);
  REQUIRE(rep.eps_measured <= 0.1);
  REQUIRE(rep.eta_measured <= 0.1);
  // soundness: blockwise eigenvalue errors within the measured eps
  REQUIRE(rep.eig_err_max <= rep.eps_measured + 1e-12);
  REQUIRE(delta > 0);
}

TEST_CASE("partition function bound") {
  std::mt19937 rng(5);
  auto p = perfect_pair(rng);
  auto sim_spec = diagonalize(DenseOperator{p.hs, true});
  double cut = op_norm(p.h) + 1.0;
  auto rep = verify_simulation_dense(p.h, sim_spec, p.enc, cut, 1e-6, 1e-6);
  for (double beta : {1e-3, 0.5, 1.0}) {
    auto pc = partition_check(p.h, sim_spec, 2, 2, 4, 2, rep, beta);
    REQUIRE(pc.relative_error <= pc.bound + 1e-12);
  }
  // perfect simulation: only the high-energy shell contributes
  auto pc1 = partition_check(p.h, sim_spec, 2, 2, 4, 2, rep, 1.0);
  double shell = std::pow(2.0, 4) * std::exp(-(cut - op_norm(p.h)));
  REQUIRE(pc1.relative_error <= shell);
}

TEST_CASE("time evolution bound") {
  std::mt19937 rng(7);
  auto p = perfect_pair(rng);
  auto sim_spec = diagonalize(DenseOperator{p.hs, true});
  double cut = op_norm(p.h) + 1.0;
  auto rep = verify_simulation_dense(p.h, sim_spec, p.enc, cut, 1e-6, 1e-6);
  Mat rho = test::random_density(4, rng);
  auto pts = time_evolution_check(p.h, sim_spec, p.enc, rep, rho, {0.5, 1.0, 2.0});
  for (const auto& pt : pts) {
    REQUIRE(pt.trace_distance <= pt.bound + 1e-8);
    REQUIRE(pt.f_distance <= pt.bound + 1e-8);
    REQUIRE(pt.trace_distance < 1e-8);  // perfect simulation evolves exactly
  }

  // gadget pair: distances below 2 eps t + 4 eta
  auto g = subdivision_gadget(PauliTerm({0}, "Z", 1.0), PauliTerm({1}, "Z", 1.0), 2);
  SimulationReport grep;
  double delta = delta_for(g, 0.1, 0.1, kDefaultDeltaCap, kDefaultDimCap, {}, &grep);
  Hamiltonian sim = build_simulator(g, delta);
  auto gspec = diagonalize(assemble(sim));
  Mat target = assemble(g.target).entries;
  Mat rho2 = test::random_density(4, rng);
  auto gpts = time_evolution_check(target, gspec, g.enc, grep, rho2, {0.5, 1.0, 2.0});
  for (const auto& pt : gpts) REQUIRE(pt.trace_distance <= pt.bound + 1e-9);
}

TEST_CASE("noise roundtrip: identity channel and local depolarizing") {
  std::mt19937 rng(11);
  auto p = perfect_pair(rng);
  auto sim_spec = diagonalize(DenseOperator{p.hs, true});
  double cut = op_norm(p.h) + 1.0;
  auto rep = verify_simulation_dense(p.h, sim_spec, p.enc, cut, 1e-6, 1e-6);
  Mat rho = test::random_density(4, rng);

  // the sim encoding has rank(P) = 1, so the strong form applies
  std::vector<KrausOp> ident = {{{0}, identity(2)}};
  auto nc = noise_roundtrip(p.h, sim_spec, p.enc, rep, ident, rho, 2, 2);
  REQUIRE(nc.distance < 1e-10);
  REQUIRE(nc.delta_leak < 1e-10);
  REQUIRE(nc.strong_form_dev < 1e-10);
  REQUIRE(nc.max_kraus_support == 0);

  // single-site depolarizing noise on simulator site 1 (system half of site 0)
  double lam = 0.3;
  std::vector<KrausOp> dep;
  dep.push_back({{1}, std::sqrt(1.0 - 3.0 * lam / 4.0) * identity(2)});
  dep.push_back({{1}, std::sqrt(lam / 4.0) * pauli_x()});
  dep.push_back({{1}, std::sqrt(lam / 4.0) * pauli_y()});
  dep.push_back({{1}, std::sqrt(lam / 4.0) * pauli_z()});
  auto nd = noise_roundtrip(p.h, sim_spec, p.enc, rep, dep, rho, 2, 2);
  REQUIRE(nd.max_kraus_support <= 1);
  REQUIRE(nd.strong_form_dev < 1e-9);
  REQUIRE(nd.distance <= nd.bound + 1e-9);
}

TEST_CASE("compose budget") {
  SimulationReport outer;  // A simulates B
  outer.eps_measured = 0.0;
  outer.eta_measured = 0.01;
  outer.delta = 100.0;
  SimulationReport inner;  // B simulates C
  inner.eps_measured = 0.05;
  inner.eta_measured = 0.02;
  inner.delta = 40.0;
  auto b = compose_budget(outer, inner, 2.0);
  REQUIRE(b.eta == Catch::Approx(0.03));
  REQUIRE(b.eps == Catch::Approx(0.05));
  REQUIRE(b.delta == Catch::Approx(40.0));

  outer.eps_measured = 0.1;
  auto b2 = compose_budget(outer, inner, 2.0);
  REQUIRE(b2.eps > 0.15);

  inner.delta = 2.0;  // below ||C|| + 2 eps_A + eps_B
  REQUIRE_THROWS_AS(compose_budget(outer, inner, 2.0), Error);
}

TEST_CASE("under-weighted Delta fails verification") {
  auto g = subdivision_gadget(PauliTerm({0}, "Z", 1.0), PauliTerm({1}, "Z", 1.0), 2);
  Hamiltonian sim = build_simulator(g, 30.0);
  Mat target = assemble(g.target).entries;
  auto spec = diagonalize(assemble(sim));
  bool failed = false;
  try {
    auto rep = verify_simulation_dense(target, spec, g.enc, 15.0, 0.01, 0.01);
    failed = !rep.pass;
  } catch (const Error&) {
    failed = true;  // subspace may not even separate cleanly
  }
  REQUIRE(failed);
}
