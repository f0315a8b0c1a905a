#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "hamforge/encoding.hpp"
#include "hamforge/gadgets.hpp"
#include "hamforge/hamiltonian.hpp"
#include "hamforge/spectrum.hpp"

namespace hamforge {

struct PartitionCheck {
  double beta = 0.0;
  double relative_error = 0.0;
  double bound = 0.0;
};

struct TimeEvolutionPoint {
  double t = 0.0;
  double trace_distance = 0.0;  // simulator evolution vs encoded target evolution
  double f_distance = 0.0;      // same statement through the F map
  double bound = 0.0;           // 2 eps t + 4 eta
};

struct NoiseCheck {
  double delta_leak = 0.0;  // 1 - tr(P_low N'(rho'))
  double distance = 0.0;    // || N'(rho') - E(1) N'(rho') E(1) ||_1
  double bound = 0.0;       // sqrt(delta(4-3delta)) + 8 eta
  double strong_form_dev = 0.0;  // || E(1)N'(estate)E(1) - estate(N(rho)) ||
  int max_kraus_support = 0;
  std::vector<Mat> induced_kraus;
};

/// Certified simulation quality: the definition's (Delta, eta, eps) as
/// measured, plus downstream diagnostics.
struct SimulationReport {
  double delta = 0.0;
  double eta_measured = 0.0;
  double eps_measured = 0.0;  // operator norm || H'_{<=Delta} - tildeE(H) ||
  double eig_err_max = 0.0;   // max blockwise eigenvalue error (<= eps_measured)
  std::vector<double> per_eigenvalue_errors;
  int p = 1, q = 0;
  double requested_eps = std::numeric_limits<double>::quiet_NaN();
  double requested_eta = std::numeric_limits<double>::quiet_NaN();
  bool pass = false;
  std::optional<PartitionCheck> partition;
  std::vector<TimeEvolutionPoint> time_evolution;
  std::optional<NoiseCheck> noise;
};

struct AlignedEncoding {
  Encoding enc;       // tilde encoding with tildeE(1) = p_low
  double eta = 0.0;   // || tildeV - V ||
  double bound = 0.0; // sqrt(2) * || p_low - E(1) ||
};

/// Rotates the encoding isometry so its image becomes exactly the given
/// low-energy subspace. The rotation is the direct (polar) rotation between
/// the two projectors.
inline AlignedEncoding align_isometry(const Encoding& e, const Mat& p_low,
                                      const Tolerances& tol = {}) {
  Mat e1 = encoded_projector(e);
  require(p_low.rows() == e1.rows(), Err::DimMismatch, "projector dim mismatch");
  double dist = op_norm(p_low - e1);
  require(dist < 1.0, Err::TooFar, "subspaces are too far apart to align");
  require(rank_of_projector(p_low) == rank_of_projector(e1), Err::RankMismatch,
          "projector ranks differ");
  Mat rot = p_low * e1 + (identity(e1.rows()) - p_low) * (identity(e1.rows()) - e1);
  Mat u = polar_unitary(rot);
  AlignedEncoding out;
  out.enc = e;
  out.enc.v = u * e.v;
  out.eta = op_norm(out.enc.v - e.v);
  out.bound = std::sqrt(2.0) * dist;
  require(out.eta <= out.bound + tol.eig, Err::TooFar,
          "alignment rotation exceeded the sqrt(2) bound");
  require(max_abs(encoded_projector(out.enc) - p_low) <= 1e-8, Err::TooFar,
          "aligned encoding does not hit the target subspace");
  return out;
}

/// Decides whether `hs` is a (Delta, eta, eps)-simulation of `h` under the
/// local encoding `e`, measuring eta and eps directly.
inline SimulationReport verify_simulation_dense(const Mat& h, const Spectrum& sim_spec,
                                                const Encoding& e, double delta,
                                                double requested_eps = std::numeric_limits<double>::quiet_NaN(),
                                                double requested_eta = std::numeric_limits<double>::quiet_NaN(),
                                                const Tolerances& tol = {}) {
  SimulationReport rep;
  rep.delta = delta;
  rep.p = e.p;
  rep.q = e.q;
  rep.requested_eps = requested_eps;
  rep.requested_eta = requested_eta;
  require(e.dim_in == h.rows(), Err::DimMismatch, "encoding input dim mismatch");
  require(e.dim_out == sim_spec.dim(), Err::DimMismatch, "encoding output dim mismatch");

  Mat p_low = low_energy_projector(sim_spec, delta).entries;
  long low_rank = sim_spec.count_below(delta);
  long want = (e.p + e.q) * h.rows();
  require(low_rank == want, Err::SubspaceMismatch,
          "low-energy rank " + std::to_string(low_rank) + " != (p+q) dim(H) = " +
              std::to_string(want));

  auto aligned = align_isometry(e, p_low, tol);
  rep.eta_measured = aligned.eta;

  // H'_{<=Delta} from the spectrum; compare against the aligned encoding of H
  Mat low = Mat::Zero(sim_spec.dim(), sim_spec.dim());
  for (long i = 0; i < low_rank; ++i)
    low += sim_spec.eigenvalues(i) *
           (sim_spec.eigenvectors.col(i) * sim_spec.eigenvectors.col(i).adjoint());
  Mat encoded = encode(aligned.enc, h);
  rep.eps_measured = op_norm(low - encoded);

  // blockwise eigenvalue errors: the i-th target eigenvalue lines up with the
  // (p+q)-block of simulator eigenvalues below the cutoff
  auto hs_spec_vals = sim_spec.eigenvalues;
  Spectrum target_spec = diagonalize(DenseOperator{h, true}, tol);
  int mult = e.p + e.q;
  rep.per_eigenvalue_errors.resize(h.rows());
  for (long i = 0; i < h.rows(); ++i) {
    double worst = 0.0;
    for (int k = 0; k < mult; ++k)
      worst = std::max(worst, std::abs(target_spec.eigenvalues(i) - hs_spec_vals(i * mult + k)));
    rep.per_eigenvalue_errors[i] = worst;
    rep.eig_err_max = std::max(rep.eig_err_max, worst);
  }
  if (!std::isnan(requested_eps) && !std::isnan(requested_eta))
    rep.pass = rep.eps_measured <= requested_eps && rep.eta_measured <= requested_eta;
  return rep;
}

inline SimulationReport verify_simulation(const Hamiltonian& h, const Hamiltonian& hs,
                                          const Encoding& e, double delta,
                                          double requested_eps = std::numeric_limits<double>::quiet_NaN(),
                                          double requested_eta = std::numeric_limits<double>::quiet_NaN(),
                                          long dim_cap = kDefaultDimCap,
                                          const Tolerances& tol = {}) {
  Mat hm = assemble(h, dim_cap, tol).entries;
  auto sim_spec = diagonalize(assemble(hs, dim_cap, tol), tol);
  return verify_simulation_dense(hm, sim_spec, e, delta, requested_eps, requested_eta, tol);
}

/// Certified Delta search: seeds at 16x the perturbation-order scaling rule
/// and doubles until the built simulator verifies at cutoff Delta/2.
inline double delta_for(const PerturbativeGadget& g, double eps, double eta,
                        double delta_cap = kDefaultDeltaCap, long dim_cap = kDefaultDimCap,
                        const Tolerances& tol = {}, SimulationReport* last = nullptr) {
  require(eps > 0 && eta > 0, Err::BadTerm, "eps and eta must be positive");
  const double c0 = 16.0;
  double lambda = gadget_lambda(g, dim_cap);
  double seed;
  if (g.order == 1)
    seed = c0 * (lambda * lambda / eps + lambda / eta);
  else if (g.order == 2)
    seed = c0 * (std::pow(lambda, 6) / (eps * eps) + lambda * lambda / (eta * eta));
  else
    seed = c0 * (std::pow(lambda, 12) / (eps * eps * eps) +
                 std::pow(lambda, 3) / (eta * eta * eta));
  // the scaling rule is an upper-bound heuristic; when it already exceeds the
  // cap, start the verified search at the cap instead of giving up
  seed = std::max(1.0, std::min(seed, delta_cap / 2.0));
  Mat target = assemble(g.target, dim_cap, tol).entries;
  for (double delta = seed; delta <= delta_cap; delta *= 2.0) {
    Hamiltonian sim = build_simulator(g, delta);
    auto sim_spec = diagonalize(assemble(sim, dim_cap, tol), tol);
    try {
      auto rep = verify_simulation_dense(target, sim_spec, g.enc, delta / 2.0, eps, eta, tol);
      if (rep.pass) {
        if (last) *last = rep;
        return delta;
      }
    } catch (const Error& err) {
      // cut through a cluster or a not-yet-separated subspace: grow Delta
      if (err.code() != Err::DegenerateCut && err.code() != Err::SubspaceMismatch &&
          err.code() != Err::TooFar && err.code() != Err::RankMismatch)
        throw;
    }
  }
  fail(Err::CapExceeded, "no passing Delta below the cap");
}

/// Relative partition-function error at inverse temperature beta, with the
/// a-priori bound it must obey.
inline PartitionCheck partition_check(const Mat& h, const Spectrum& sim_spec, int n, int d, int m,
                                      int dprime, const SimulationReport& rep, double beta) {
  PartitionCheck out;
  out.beta = beta;
  Spectrum hs = diagonalize(DenseOperator{h, true});
  double z = 0.0, zp = 0.0;
  for (long i = 0; i < hs.dim(); ++i) z += std::exp(-beta * hs.eigenvalues(i));
  for (long i = 0; i < sim_spec.dim(); ++i) zp += std::exp(-beta * sim_spec.eigenvalues(i));
  double pq = rep.p + rep.q;
  out.relative_error = std::abs(zp - pq * z) / (pq * z);
  double hnorm = op_norm(h);
  out.bound = std::pow(double(dprime), m) * std::exp(-beta * rep.delta) /
                  (pq * std::pow(double(d), n) * std::exp(-beta * hnorm)) +
              std::expm1(rep.eps_measured * beta);
  (void)n;
  return out;
}

/// Trace-distance check of simulated time evolution against the bound
/// 2 eps t + 4 eta, both for encoded states and through the F map.
inline std::vector<TimeEvolutionPoint> time_evolution_check(const Mat& h, const Spectrum& sim_spec,
                                                            const Encoding& e,
                                                            const SimulationReport& rep,
                                                            const Mat& rho,
                                                            const std::vector<double>& times) {
  std::vector<TimeEvolutionPoint> out;
  Mat sigma = default_ancilla_state(e);
  Mat rho_sim = estate(e, rho, sigma);
  Spectrum hspec = diagonalize(DenseOperator{h, true});
  for (double t : times) {
    TimeEvolutionPoint pt;
    pt.t = t;
    Mat u_sim = evolution(sim_spec, t);
    Mat u_tgt = evolution(hspec, t);
    Mat evolved_sim = u_sim * rho_sim * u_sim.adjoint();
    Mat evolved_tgt = u_tgt * rho * u_tgt.adjoint();
    pt.trace_distance = trace_norm(evolved_sim - estate(e, evolved_tgt, sigma));
    Mat f_evolved = fb_maps(e, evolved_sim).f;
    pt.f_distance = trace_norm(f_evolved - Mat(u_tgt * fb_maps(e, rho_sim).f * u_tgt.adjoint()));
    pt.bound = 2.0 * rep.eps_measured * t + 4.0 * rep.eta_measured;
    out.push_back(pt);
  }
  return out;
}

struct KrausOp {
  std::vector<int> sites;
  Mat block;
};

/// Round-trips local simulator noise through the encoding: builds the induced
/// noise on the original system, verifies its locality, and checks the
/// leakage bound sqrt(delta(4-3delta)) + 8 eta.
inline NoiseCheck noise_roundtrip(const Mat& /*h*/, const Spectrum& sim_spec, const Encoding& e,
                                  const SimulationReport& rep, const std::vector<KrausOp>& kraus,
                                  const Mat& rho, int n_in, int d_in,
                                  const Tolerances& tol = {}) {
  require(e.locality.has_value(), Err::NotLocalEncoding,
          "noise round-trip needs a local encoding");
  const auto& loc = *e.locality;
  // trace preservation of the simulator channel
  Mat acc = Mat::Zero(e.dim_out, e.dim_out);
  std::vector<Mat> embedded;
  size_t max_support = 0;
  for (const auto& k : kraus) {
    Mat full = embed_on_sites(k.block, loc.n_out, loc.d_out, k.sites);
    acc += full.adjoint() * full;
    embedded.push_back(full);
    max_support = std::max(max_support, k.sites.size());
  }
  require(max_abs(acc - identity(e.dim_out)) <= 1e-9, Err::BadTerm,
          "Kraus set is not trace preserving");

  NoiseCheck out;
  require(e.p == 1 && rank_of_projector(e.proj_p) == 1, Err::RankPNotOne,
          "strong form needs rank(P) = 1");
  // P = |psi><psi| on the ancilla
  auto sp = diagonalize(DenseOperator{e.proj_p, true}, tol);
  Vec psi = sp.eigenvectors.col(e.dim_e - 1);
  Mat bra = kron(identity(e.dim_in), Mat(psi.adjoint()));   // dim_in x dim_in*dim_e
  Mat ket = bra.adjoint();

  Mat rho_sim = estate(e, rho, Mat(psi * psi.adjoint()));
  Mat noisy = Mat::Zero(e.dim_out, e.dim_out);
  for (const auto& k : embedded) noisy += k * rho_sim * k.adjoint();

  Mat n_induced_rho = Mat::Zero(e.dim_in, e.dim_in);
  for (const auto& k : embedded) {
    Mat nk = bra * e.v.adjoint() * k * e.v * ket;
    // locality of the induced operator on the original system
    int support = 0;
    for (int s = 0; s < n_in; ++s)
      if (!acts_trivially_on(nk, n_in, d_in, s, 1e-8)) ++support;
    out.max_kraus_support = std::max(out.max_kraus_support, support);
    n_induced_rho += nk * rho * nk.adjoint();
    out.induced_kraus.push_back(std::move(nk));
  }
  require(out.max_kraus_support <= int(max_support), Err::NotLocalEncoding,
          "induced noise acts on more sites than the simulator noise");

  Mat e1 = encoded_projector(e);
  Mat projected = e1 * noisy * e1;
  out.strong_form_dev = max_abs(projected - estate(e, n_induced_rho, Mat(psi * psi.adjoint())));

  Mat p_low = low_energy_projector(sim_spec, rep.delta).entries;
  out.delta_leak = std::max(0.0, 1.0 - (p_low * noisy).trace().real());
  out.distance = trace_norm(noisy - projected);
  out.bound = std::sqrt(out.delta_leak * (4.0 - 3.0 * out.delta_leak)) + 8.0 * rep.eta_measured;
  return out;
}

struct ComposedBudget {
  double delta = 0.0;
  double eta = 0.0;
  double eps = 0.0;
};

/// (Delta, eta, eps) budget for a chained simulation A -> B -> C given the
/// reports for A-simulates-B and B-simulates-C.
inline ComposedBudget compose_budget(const SimulationReport& r_ab, const SimulationReport& r_bc,
                                     double norm_c) {
  const double c1 = 2.0 * std::sqrt(2.0);
  double eps_a = r_ab.eps_measured, eps_b = r_bc.eps_measured;
  require(eps_a <= norm_c && eps_b <= norm_c, Err::BudgetViolation,
          "per-stage errors must not exceed ||C||");
  require(r_bc.delta >= norm_c + 2.0 * eps_a + eps_b, Err::BudgetViolation,
          "inner cutoff too small for composition");
  ComposedBudget out;
  double denom = r_bc.delta - norm_c + eps_b;
  out.delta = r_bc.delta - eps_a;
  out.eta = r_ab.eta_measured + r_bc.eta_measured + c1 * eps_a / denom;
  out.eps = eps_a + eps_b + c1 * eps_a * norm_c / denom;
  return out;
}

}  // namespace hamforge
