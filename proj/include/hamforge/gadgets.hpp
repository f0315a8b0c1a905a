#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "hamforge/encoding.hpp"
#include "hamforge/hamiltonian.hpp"
#include "hamforge/spectrum.hpp"

namespace hamforge {

/// Builds a Pauli term from unsorted (site, letter) pairs.
inline PauliTerm make_pauli(std::vector<std::pair<int, char>> sl, double w) {
  std::sort(sl.begin(), sl.end());
  std::vector<int> sites;
  std::string letters;
  for (auto& [s, l] : sl) {
    sites.push_back(s);
    letters.push_back(l);
  }
  return PauliTerm(std::move(sites), std::move(letters), w);
}

/// (H0, H1, H2, [H1']) bundle whose heavy part pins an ancilla register and
/// whose perturbation generates `target` on the low-energy space.
/// A gadget built on a shared register covers only its own mediators; its
/// encoding is completed by parallel_merge.
struct PerturbativeGadget {
  int order = 2;              // 1, 2 or 3
  Hamiltonian target;         // on the original sites
  Hamiltonian h0, h1, h2, h1prime;  // on the simulator sites
  Encoding enc;               // isometry onto the ground space of h0
  std::vector<std::vector<int>> block_sites;  // h0 block supports (for merging)
  std::vector<std::pair<std::vector<int>, Vec>> attachments;  // mediator states
  // The XY logical-qubit pass cannot make its control terms exactly block
  // diagonal; their off-diagonal part only enters at O(1/Delta) and the
  // verified Delta search absorbs it.
  bool h1_block_diagonal = true;

  int n() const { return target.n; }
  int m() const { return h0.n; }
  bool encoding_complete() const { return enc.dim_in > 0; }
};

/// Mediator-style ground isometry: identity on target sites, fixed states on
/// the ancilla groups. `attachments` lists (sim sites, state) per group.
inline Encoding mediator_attachment_encoding(
    int n_target, int m_total,
    const std::vector<std::pair<std::vector<int>, Vec>>& attachments) {
  Locality loc;
  loc.n_in = n_target;
  loc.d_in = 2;
  loc.n_out = m_total;
  loc.d_out = 2;
  for (int i = 0; i < n_target; ++i) {
    SiteBlock b;
    b.orig_site = i;
    b.dim_site = 2;
    b.sim_sites = {i};
    b.v = identity(2);
    b.pe = Mat::Ones(1, 1);
    b.qe = Mat::Zero(1, 1);
    loc.blocks.push_back(std::move(b));
  }
  for (const auto& [sites, state] : attachments) {
    SiteBlock b;
    b.orig_site = -1;
    b.dim_site = 1;
    b.sim_sites = sites;
    b.v = state;
    b.pe = Mat::Ones(1, 1);
    b.qe = Mat::Zero(1, 1);
    loc.blocks.push_back(std::move(b));
  }
  Encoding e;
  e.dim_in = 1L << n_target;
  e.dim_e = 1;
  e.dim_out = 1L << m_total;
  e.proj_p = Mat::Ones(1, 1);
  e.proj_q = Mat::Zero(1, 1);
  e.p = 1;
  e.q = 0;
  e.locality = loc;
  e.v = global_isometry_from_blocks(loc, e.e_factors);
  return e;
}

namespace detail {

struct GadgetDense {
  Mat h0, h1, h2, h1p;
  Mat pi_minus;  // ground projector of h0
  Mat g_inv;     // inverse of h0 on its excited space
};

inline GadgetDense assemble_gadget(const PerturbativeGadget& g, long dim_cap,
                                   const Tolerances& tol) {
  GadgetDense d;
  d.h0 = assemble(g.h0, dim_cap, tol).entries;
  d.h1 = assemble(g.h1, dim_cap, tol).entries;
  d.h2 = assemble(g.h2, dim_cap, tol).entries;
  d.h1p = g.order == 3 ? assemble(g.h1prime, dim_cap, tol).entries : Mat::Zero(d.h0.rows(), d.h0.cols());
  auto s0 = diagonalize(DenseOperator{d.h0, true}, tol);
  double scale = std::max(1.0, s0.eigenvalues.cwiseAbs().maxCoeff());
  require(std::abs(s0.eigenvalues(0)) <= 1e-9 * scale, Err::BlockViolation,
          "h0 ground energy must be zero");
  long rank = 0;
  while (rank < s0.dim() && s0.eigenvalues(rank) < 0.5) ++rank;
  require(rank < s0.dim() && s0.eigenvalues(rank) >= 1.0 - 1e-9, Err::BlockViolation,
          "h0 excited levels must sit at energy >= 1");
  Mat ground = s0.eigenvectors.leftCols(rank);
  d.pi_minus = ground * ground.adjoint();
  Mat excited = s0.eigenvectors.rightCols(s0.dim() - rank);
  Vec inv(s0.dim() - rank);
  for (long i = rank; i < s0.dim(); ++i) inv(i - rank) = 1.0 / s0.eigenvalues(i);
  d.g_inv = excited * inv.asDiagonal() * excited.adjoint();
  return d;
}

inline void check_gadget_blocks(const PerturbativeGadget& g, const GadgetDense& d,
                                const Tolerances& tol) {
  Mat proj = encoded_projector(g.enc);
  require(max_abs(proj - d.pi_minus) <= 1e-8, Err::BlockViolation,
          "encoding image is not the ground space of h0");
  double scale = std::max(1.0, max_abs(d.h1) + max_abs(d.h2) + max_abs(d.h1p));
  Mat pi_plus = identity(d.h0.rows()) - d.pi_minus;
  if (g.order >= 2)
    require(max_abs(Mat(d.pi_minus * d.h2 * d.pi_minus)) <= tol.assemble * scale,
            Err::BlockViolation, "(H2)-- must vanish");
  if (g.order == 2 && g.h1_block_diagonal)
    require(max_abs(Mat(d.pi_minus * d.h1 * pi_plus)) <= tol.assemble * scale,
            Err::BlockViolation, "H1 must be block diagonal");
  if (g.order == 3) {
    require(max_abs(Mat(d.pi_minus * d.h1 * pi_plus)) <= tol.assemble * scale,
            Err::BlockViolation, "H1 must be block diagonal");
    require(max_abs(Mat(d.pi_minus * d.h1p * pi_plus)) <= tol.assemble * scale,
            Err::BlockViolation, "H1' must be block diagonal");
    Mat second = d.pi_minus * d.h2 * d.g_inv * d.h2 * d.pi_minus;
    require(max_abs(Mat(d.pi_minus * d.h1p * d.pi_minus) - second) <= tol.assemble * scale,
            Err::BlockViolation, "(H1')-- must equal (H2)-+ H0^-1 (H2)+-");
  }
}

}  // namespace detail

/// Norm bound entering the Delta scaling rules.
inline double gadget_lambda(const PerturbativeGadget& g, long dim_cap = kDefaultDimCap) {
  double l = op_norm(assemble(g.h1, dim_cap).entries);
  l = std::max(l, op_norm(assemble(g.h2, dim_cap).entries));
  if (g.order == 3) l = std::max(l, op_norm(assemble(g.h1prime, dim_cap).entries));
  return l;
}

/// Triangle-inequality bound on gadget_lambda; usable at any register size.
inline double gadget_lambda_bound(const PerturbativeGadget& g) {
  auto bound = [](const Hamiltonian& h) {
    double b = 0.0;
    for (const auto& t : h.terms) {
      if (std::holds_alternative<PauliTerm>(t))
        b += std::abs(std::get<PauliTerm>(t).weight);
      else
        b += std::abs(std::get<LocalTerm>(t).weight) * op_norm(std::get<LocalTerm>(t).block);
    }
    return b;
  };
  double l = std::max(bound(g.h1), bound(g.h2));
  if (g.order == 3) l = std::max(l, bound(g.h1prime));
  return l;
}

/// Low-energy effective Hamiltonian predicted by the perturbation order,
/// expressed on the target space through the ground isometry.
inline Mat effective_hamiltonian(const PerturbativeGadget& g, long dim_cap = kDefaultDimCap,
                                 const Tolerances& tol = {}) {
  require(g.encoding_complete(), Err::BlockViolation,
          "gadget covers only part of the ancilla register; merge it first");
  auto d = detail::assemble_gadget(g, dim_cap, tol);
  detail::check_gadget_blocks(g, d, tol);
  Mat eff;
  if (g.order == 1)
    eff = d.pi_minus * d.h1 * d.pi_minus;
  else if (g.order == 2)
    eff = d.pi_minus * d.h1 * d.pi_minus - d.pi_minus * d.h2 * d.g_inv * d.h2 * d.pi_minus;
  else
    eff = d.pi_minus * d.h1 * d.pi_minus +
          d.pi_minus * d.h2 * d.g_inv * d.h2 * d.g_inv * d.h2 * d.pi_minus;
  Mat basis = encoded_subspace_basis(g.enc);
  return basis.adjoint() * eff * basis;
}

/// H_sim assembled with the order's exponent schedule. Terms keep a
/// provenance tag naming the gadget piece they came from.
inline Hamiltonian build_simulator(const PerturbativeGadget& g, double delta) {
  require(delta > 0, Err::BadTerm, "delta must be positive");
  Hamiltonian sim;
  sim.n = g.m();
  sim.d = 2;
  auto push = [&](const Hamiltonian& part, double scale, const char* tag) {
    for (const auto& t : part.terms) {
      Term copy = t;
      if (std::holds_alternative<PauliTerm>(copy))
        std::get<PauliTerm>(copy).weight *= scale;
      else
        std::get<LocalTerm>(copy).weight *= scale;
      sim.terms.push_back(std::move(copy));
      sim.term_tags.push_back(tag);
    }
  };
  push(g.h0, delta, "h0");
  if (g.order == 1) {
    push(g.h1, 1.0, "h1");
  } else if (g.order == 2) {
    push(g.h2, std::sqrt(delta), "h2");
    push(g.h1, 1.0, "h1");
  } else {
    push(g.h2, std::pow(delta, 2.0 / 3.0), "h2");
    push(g.h1prime, std::cbrt(delta), "h1prime");
    push(g.h1, 1.0, "h1");
  }
  return sim;
}

// --- concrete mediator gadgets ----------------------------------------------

namespace detail {

inline std::vector<std::pair<int, char>> term_pairs(const PauliTerm& t) {
  std::vector<std::pair<int, char>> sl;
  for (size_t i = 0; i < t.sites.size(); ++i) sl.push_back({t.sites[i], t.letters[i]});
  return sl;
}

inline Vec qubit_state(int digit) {
  Vec v = Vec::Zero(2);
  v(digit) = 1.0;
  return v;
}

inline void check_disjoint(const PauliTerm& a, const PauliTerm& b) {
  std::set<int> sa(a.sites.begin(), a.sites.end());
  for (int s : b.sites)
    require(!sa.count(s), Err::OverlapViolation, "operand supports must be disjoint");
}

/// Sets the gadget encoding from its attachments when they cover the whole
/// ancilla register; otherwise leaves it for parallel_merge to complete.
inline void finish_gadget_encoding(PerturbativeGadget& g) {
  std::set<int> covered;
  for (const auto& [sites, state] : g.attachments)
    for (int s : sites) covered.insert(s);
  if (int(covered.size()) == g.m() - g.n()) {
    g.enc = mediator_attachment_encoding(g.n(), g.m(), g.attachments);
  } else {
    g.enc = Encoding{};
    g.enc.dim_in = 0;  // incomplete: needs merging
  }
}

}  // namespace detail

/// Second-order mediator gadget producing weight(A)*weight(B) * A x B while
/// halving the interaction arity. Mediator pinned to |0>.
inline PerturbativeGadget subdivision_gadget(const PauliTerm& a, const PauliTerm& b, int n_target,
                                             int m_total = -1, int mediator = -1) {
  require(!a.sites.empty() && !b.sites.empty(), Err::BadOperand, "operands must be non-trivial");
  detail::check_disjoint(a, b);
  if (m_total < 0) m_total = n_target + 1;
  if (mediator < 0) mediator = n_target;
  double w = a.weight * b.weight;
  require(w != 0.0, Err::BadOperand, "zero-weight target");
  double u = std::sqrt(std::abs(w) / 2.0);
  double v = -(w > 0 ? 1.0 : -1.0) * u;

  PerturbativeGadget g;
  g.order = 2;
  g.target.n = n_target;
  auto tp = detail::term_pairs(a);
  for (auto& p : detail::term_pairs(b)) tp.push_back(p);
  g.target.add(make_pauli(tp, w));

  g.h0.n = g.h1.n = g.h2.n = m_total;
  g.h0.add_identity(0.5);
  g.h0.add_pauli({mediator}, "Z", -0.5);

  auto h2a = detail::term_pairs(a);
  h2a.push_back({mediator, 'X'});
  g.h2.add(make_pauli(h2a, u));
  auto h2b = detail::term_pairs(b);
  h2b.push_back({mediator, 'X'});
  g.h2.add(make_pauli(h2b, v));

  g.h1.add_identity(u * u + v * v);

  g.attachments = {{{mediator}, detail::qubit_state(0)}};
  g.block_sites = {{mediator}};
  detail::finish_gadget_encoding(g);
  return g;
}

/// Second-order mediator gadget replacing a Pauli string with 2m Y letters by
/// X/Z-only interactions through one mediator pinned to |1>.
inline PerturbativeGadget y_elimination_gadget(const PauliTerm& t, int n_target, int m_total = -1,
                                               int mediator = -1) {
  int ycount = t.y_count();
  require(ycount > 0 && ycount % 2 == 0, Err::OddYCount,
          "need an even, positive number of Y letters");
  if (m_total < 0) m_total = n_target + 1;
  if (mediator < 0) mediator = n_target;
  const int mm = ycount / 2;
  double w = t.weight;
  require(w != 0.0, Err::BadOperand, "zero-weight target");
  double mu = std::sqrt(std::abs(w) / 2.0);
  double sgn = ((mm + 1) % 2 == 0 ? 1.0 : -1.0) * (w > 0 ? 1.0 : -1.0);

  PerturbativeGadget g;
  g.order = 2;
  g.target.n = n_target;
  g.target.add(t);

  g.h0.n = g.h1.n = g.h2.n = m_total;
  g.h0.add_identity(0.5);
  g.h0.add_pauli({mediator}, "Z", 0.5);  // |0><0|, ground state |1>

  std::vector<std::pair<int, char>> xs = {{mediator, 'X'}};
  std::vector<std::pair<int, char>> za = {{mediator, 'X'}};
  for (size_t i = 0; i < t.sites.size(); ++i) {
    if (t.letters[i] == 'Y') {
      xs.push_back({t.sites[i], 'X'});
      za.push_back({t.sites[i], 'Z'});
    } else {
      za.push_back({t.sites[i], t.letters[i]});
    }
  }
  g.h2.add(make_pauli(xs, mu));
  g.h2.add(make_pauli(za, mu * sgn));
  g.h1.add_identity(2.0 * mu * mu);

  g.attachments = {{{mediator}, detail::qubit_state(1)}};
  g.block_sites = {{mediator}};
  detail::finish_gadget_encoding(g);
  return g;
}

/// Third-order mediator gadget for a three-site product A x B x C of X/Z
/// Paulis, following the A_a X_d / B_b X_d / C_c |1><1|_d pattern.
inline PerturbativeGadget three_to_two_gadget(const PauliTerm& a, const PauliTerm& b,
                                              const PauliTerm& c, int n_target, int m_total = -1,
                                              int mediator = -1) {
  for (const auto* t : {&a, &b, &c}) {
    require(t->sites.size() == 1, Err::BadOperand, "operands must be single-site");
    require(t->letters[0] != 'Y', Err::BadOperand, "operands must be X or Z");
  }
  require(a.sites[0] != b.sites[0] && a.sites[0] != c.sites[0] && b.sites[0] != c.sites[0],
          Err::BadOperand, "operands must sit on distinct sites");
  if (m_total < 0) m_total = n_target + 1;
  if (mediator < 0) mediator = n_target;
  double w = a.weight * b.weight * c.weight;

  PerturbativeGadget g;
  g.order = 3;
  g.target.n = n_target;
  g.target.add(make_pauli(
      {{a.sites[0], a.letters[0]}, {b.sites[0], b.letters[0]}, {c.sites[0], c.letters[0]}}, w));
  g.h0.n = g.h1.n = g.h2.n = g.h1prime.n = m_total;
  if (w == 0.0) {  // degenerate input: empty gadget with pinned mediator
    g.h0.add_identity(0.5);
    g.h0.add_pauli({mediator}, "Z", -0.5);
    g.attachments = {{{mediator}, detail::qubit_state(0)}};
    g.block_sites = {{mediator}};
    detail::finish_gadget_encoding(g);
    return g;
  }
  double tpar = std::cbrt(std::abs(w) / 2.0);
  double alpha = tpar, beta = tpar, gamma = (w > 0 ? 1.0 : -1.0) * tpar;

  g.h0.add_identity(0.5);
  g.h0.add_pauli({mediator}, "Z", -0.5);  // |1><1|, ground state |0>

  g.h2.add(make_pauli({{a.sites[0], a.letters[0]}, {mediator, 'X'}}, alpha));
  g.h2.add(make_pauli({{b.sites[0], b.letters[0]}, {mediator, 'X'}}, beta));
  g.h2.add(make_pauli({{c.sites[0], c.letters[0]}}, gamma / 2.0));
  g.h2.add(make_pauli({{c.sites[0], c.letters[0]}, {mediator, 'Z'}}, -gamma / 2.0));

  g.h1prime.add(make_pauli({{a.sites[0], a.letters[0]}, {b.sites[0], b.letters[0]}},
                           2.0 * alpha * beta));
  g.h1prime.add_identity(alpha * alpha + beta * beta);

  g.h1.add(make_pauli({{c.sites[0], c.letters[0]}}, -gamma * (alpha * alpha + beta * beta)));

  g.attachments = {{{mediator}, detail::qubit_state(0)}};
  g.block_sites = {{mediator}};
  detail::finish_gadget_encoding(g);
  return g;
}

/// Second-order fork: two interactions sharing a vertex become a star on a
/// mediator plus one compensating edge across the outer vertices.
inline PerturbativeGadget fork_gadget(const PauliTerm& shared, const PauliTerm& leg1,
                                      const PauliTerm& leg2, double w1, double w2, int n_target,
                                      int m_total = -1, int mediator = -1) {
  for (const auto* t : {&shared, &leg1, &leg2})
    require(t->sites.size() == 1, Err::BadTopology, "fork vertices must be single-site");
  require(leg1.sites[0] != shared.sites[0] && leg2.sites[0] != shared.sites[0] &&
              leg1.sites[0] != leg2.sites[0],
          Err::BadTopology, "fork requires three distinct vertices");
  require(w1 != 0.0 && w2 != 0.0, Err::BadTopology, "fork edge weights must be nonzero");
  if (m_total < 0) m_total = n_target + 1;
  if (mediator < 0) mediator = n_target;
  double t0 = std::sqrt((std::abs(w1) + std::abs(w2)) / 2.0);
  double db = -w1 / (2.0 * t0);
  double dc = -w2 / (2.0 * t0);

  PerturbativeGadget g;
  g.order = 2;
  g.target.n = n_target;
  g.target.add(make_pauli({{shared.sites[0], shared.letters[0]}, {leg1.sites[0], leg1.letters[0]}},
                          w1));
  g.target.add(make_pauli({{shared.sites[0], shared.letters[0]}, {leg2.sites[0], leg2.letters[0]}},
                          w2));
  g.h0.n = g.h1.n = g.h2.n = m_total;
  g.h0.add_identity(0.5);
  g.h0.add_pauli({mediator}, "Z", -0.5);

  g.h2.add(make_pauli({{shared.sites[0], shared.letters[0]}, {mediator, 'X'}}, t0));
  g.h2.add(make_pauli({{leg1.sites[0], leg1.letters[0]}, {mediator, 'X'}}, db));
  g.h2.add(make_pauli({{leg2.sites[0], leg2.letters[0]}, {mediator, 'X'}}, dc));

  g.h1.add(make_pauli({{leg1.sites[0], leg1.letters[0]}, {leg2.sites[0], leg2.letters[0]}},
                      2.0 * db * dc));
  g.h1.add_identity(t0 * t0 + db * db + dc * dc);

  g.attachments = {{{mediator}, detail::qubit_state(0)}};
  g.block_sites = {{mediator}};
  detail::finish_gadget_encoding(g);
  return g;
}

/// Second-order crossing: the two diagonal interactions of a crossing become
/// a star on a central mediator plus compensating side edges, leaving a
/// planar interaction graph.
inline PerturbativeGadget crossing_gadget(const PauliTerm& a, const PauliTerm& c, double w_ac,
                                          const PauliTerm& b, const PauliTerm& d, double w_bd,
                                          int n_target, int m_total = -1, int mediator = -1) {
  for (const auto* t : {&a, &b, &c, &d})
    require(t->sites.size() == 1, Err::BadTopology, "crossing corners must be single-site");
  std::set<int> corners = {a.sites[0], b.sites[0], c.sites[0], d.sites[0]};
  require(corners.size() == 4, Err::BadTopology, "crossing requires four distinct corners");
  require(w_ac != 0.0 && w_bd != 0.0, Err::BadTopology, "crossing weights must be nonzero");
  if (m_total < 0) m_total = n_target + 1;
  if (mediator < 0) mediator = n_target;
  double t1 = std::sqrt(std::abs(w_ac) / 2.0), t2 = std::sqrt(std::abs(w_bd) / 2.0);
  double wa = t1, wc = -w_ac / (2.0 * t1);
  double wb = t2, wd = -w_bd / (2.0 * t2);

  PerturbativeGadget g;
  g.order = 2;
  g.target.n = n_target;
  g.target.add(make_pauli({{a.sites[0], a.letters[0]}, {c.sites[0], c.letters[0]}}, w_ac));
  g.target.add(make_pauli({{b.sites[0], b.letters[0]}, {d.sites[0], d.letters[0]}}, w_bd));
  g.h0.n = g.h1.n = g.h2.n = m_total;
  g.h0.add_identity(0.5);
  g.h0.add_pauli({mediator}, "Z", -0.5);

  const std::vector<std::pair<const PauliTerm*, double>> star = {
      {&a, wa}, {&b, wb}, {&c, wc}, {&d, wd}};
  for (auto& [t, w] : star)
    g.h2.add(make_pauli({{t->sites[0], t->letters[0]}, {mediator, 'X'}}, w));

  // compensations on the four sides of the square
  auto side = [&](const PauliTerm& u, double wu, const PauliTerm& v, double wv) {
    g.h1.add(make_pauli({{u.sites[0], u.letters[0]}, {v.sites[0], v.letters[0]}}, 2.0 * wu * wv));
  };
  side(a, wa, b, wb);
  side(b, wb, c, wc);
  side(c, wc, d, wd);
  side(d, wd, a, wa);
  g.h1.add_identity(wa * wa + wb * wb + wc * wc + wd * wd);

  g.attachments = {{{mediator}, detail::qubit_state(0)}};
  g.block_sites = {{mediator}};
  detail::finish_gadget_encoding(g);
  return g;
}

// --- parallel application ----------------------------------------------------

/// Merges gadgets applied in parallel on a shared register. The mediator
/// registers must be pairwise disjoint; the merged effective Hamiltonian is
/// the sum of the parts.
inline PerturbativeGadget parallel_merge(const std::vector<PerturbativeGadget>& gs,
                                         long dim_cap = kDefaultDimCap,
                                         const Tolerances& tol = {}) {
  require(!gs.empty(), Err::BadOperand, "nothing to merge");
  if (gs.size() == 1) return gs.front();
  PerturbativeGadget out;
  out.order = gs.front().order;
  out.target.n = gs.front().n();
  out.h0.n = out.h1.n = out.h2.n = out.h1prime.n = gs.front().m();
  for (const auto& g : gs) {
    require(g.order == out.order, Err::BadOperand, "mixed perturbation orders");
    require(g.n() == out.target.n && g.m() == out.h0.n, Err::DimMismatch,
            "gadgets must share the target and simulator registers");
  }
  // mediator registers must be pairwise disjoint
  std::set<int> claimed;
  for (const auto& g : gs) {
    for (const auto& bs : g.block_sites) {
      for (int s : bs)
        require(!claimed.count(s), Err::OverlapViolation, "gadget ancilla registers overlap");
      for (int s : bs) claimed.insert(s);
      out.block_sites.push_back(bs);
    }
    for (const auto& t : g.h0.terms) out.h0.terms.push_back(t);
    for (const auto& t : g.target.terms) out.target.terms.push_back(t);
    for (const auto& t : g.h1.terms) out.h1.terms.push_back(t);
    for (const auto& t : g.h2.terms) out.h2.terms.push_back(t);
    for (const auto& t : g.h1prime.terms) out.h1prime.terms.push_back(t);
  }
  // merged encoding: union of the mediator attachments; overlapping mediator
  // registers were already rejected above. Registers too large for dense work
  // keep the attachment list only.
  for (const auto& g : gs)
    for (const auto& a : g.attachments) out.attachments.push_back(a);
  if ((1L << out.h0.n) <= dim_cap) {
    detail::finish_gadget_encoding(out);
    require(out.encoding_complete(), Err::OverlapViolation,
            "merged gadgets leave part of the ancilla register unpinned");
  } else {
    out.enc = Encoding{};
    out.enc.dim_in = 0;
  }

  // interference precondition: each gadget's perturbation leaves no
  // first-order footprint on the merged ground space
  // (Pi H2 Pi = v (v^dag H2 v) v^dag vanishes iff v^dag H2 v does)
  if (out.encoding_complete()) {
    for (const auto& g : gs) {
      if (g.h2.terms.empty()) continue;
      Mat h2 = assemble(g.h2, dim_cap, tol).entries;
      double scale = std::max(1.0, max_abs(h2));
      Mat reduced = out.enc.v.adjoint() * (h2 * out.enc.v);
      require(max_abs(reduced) <= tol.assemble * scale, Err::OverlapViolation,
              "merged gadgets interfere at first order");
    }
  }
  return out;
}

}  // namespace hamforge
