#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "hamforge/linalg.hpp"
#include "hamforge/spectrum.hpp"
#include "hamforge/types.hpp"

namespace hamforge {

/// Index map of a tensor-factor permutation: entry [source index] gives the
/// target index. perm[k] = source factor occupying target slot k.
inline std::vector<long> factor_permutation_map(const std::vector<long>& src_dims,
                                                const std::vector<int>& perm) {
  long dim = 1;
  for (long d : src_dims) dim *= d;
  const int m = int(src_dims.size());
  std::vector<long> src_stride(m, 1);
  for (int i = m - 2; i >= 0; --i) src_stride[i] = src_stride[i + 1] * src_dims[i + 1];
  std::vector<long> map(dim);
  for (long c = 0; c < dim; ++c) {
    long r = 0;
    for (int k = 0; k < m; ++k) {
      int s = perm[k];
      long digit = (c / src_stride[s]) % src_dims[s];
      r = r * src_dims[s] + digit;
    }
    map[c] = r;
  }
  return map;
}

/// Dense permutation matrix of a tensor-factor permutation.
inline Mat factor_permutation(const std::vector<long>& src_dims, const std::vector<int>& perm) {
  auto map = factor_permutation_map(src_dims, perm);
  Mat out = Mat::Zero(map.size(), map.size());
  for (size_t c = 0; c < map.size(); ++c) out(map[c], c) = 1.0;
  return out;
}

inline Mat ptrace_second(const Mat& m, long dim_a, long dim_b) {
  Mat out = Mat::Zero(dim_a, dim_a);
  for (long i = 0; i < dim_a; ++i)
    for (long j = 0; j < dim_a; ++j) {
      cxd acc = 0.0;
      for (long k = 0; k < dim_b; ++k) acc += m(i * dim_b + k, j * dim_b + k);
      out(i, j) = acc;
    }
  return out;
}

inline Mat ptrace_first(const Mat& m, long dim_a, long dim_b) {
  Mat out = Mat::Zero(dim_b, dim_b);
  for (long i = 0; i < dim_b; ++i)
    for (long j = 0; j < dim_b; ++j) {
      cxd acc = 0.0;
      for (long k = 0; k < dim_a; ++k) acc += m(k * dim_b + i, k * dim_b + j);
      out(i, j) = acc;
    }
  return out;
}

/// Per-site factor of a local encoding: V_i : H_i x E_i -> H'_i.
struct SiteBlock {
  int orig_site = -1;             // -1 marks a pure ancilla attachment
  long dim_site = 1;              // input site dimension (1 when orig_site = -1)
  std::vector<int> sim_sites;     // simulator sites occupied by this block
  std::vector<int> e_factor_idx;  // global ancilla factors forming E_i
  Mat v;                          // dim(H'_i) x (dim_site * dim(E_i))
  Mat pe, qe;                     // ancilla projectors on E_i
  long dim_e() const { return pe.rows(); }
};

struct Locality {
  int n_in = 0;
  int d_in = 2;
  int n_out = 0;
  int d_out = 2;
  std::vector<SiteBlock> blocks;
};

/// The canonical encoding map E(M) = V (M x P + conj(M) x Q) V^dag.
/// The isometry domain is ordered (system, ancilla); `e_factors` records the
/// tensor factorization of the ancilla space.
struct Encoding {
  long dim_in = 1;
  long dim_e = 1;
  long dim_out = 1;
  Mat v;                        // dim_out x (dim_in * dim_e)
  Mat proj_p, proj_q;           // dim_e x dim_e orthogonal projectors
  int p = 1, q = 0;             // ranks of proj_p, proj_q
  std::vector<long> e_factors;  // dims of ancilla tensor factors (product = dim_e)
  std::optional<Locality> locality;

  bool standard() const { return p >= 1; }

  void validate(const Tolerances& tol = {}) const {
    require(p + q >= 1, Err::DegenerateEncoding, "p + q must be >= 1");
    require(v.rows() == dim_out && v.cols() == dim_in * dim_e, Err::DimMismatch,
            "isometry shape mismatch");
    require(max_abs(Mat(v.adjoint() * v) - identity(dim_in * dim_e)) <= tol.orth,
            Err::IsometryViolation, "v is not an isometry");
    Mat pp = proj_p, qq = proj_q;
    require(max_abs(Mat(pp * pp) - pp) <= tol.orth && max_abs(Mat(qq * qq) - qq) <= tol.orth,
            Err::IsometryViolation, "ancilla projectors not idempotent");
    require(max_abs(Mat(pp * qq)) <= tol.orth, Err::IsometryViolation,
            "ancilla projectors not orthogonal");
    require(rank_of_projector(pp) == p && rank_of_projector(qq) == q, Err::RankMismatch,
            "projector ranks disagree with (p, q)");
  }
};

/// Orthonormal columns spanning supp(P) then supp(Q) on the ancilla.
inline Mat ancilla_support_basis(const Encoding& e) {
  Mat k(e.dim_e, e.p + e.q);
  auto sp = diagonalize(DenseOperator{e.proj_p, true});
  auto sq = diagonalize(DenseOperator{e.proj_q, true});
  for (int i = 0; i < e.p; ++i) k.col(i) = sp.eigenvectors.col(e.dim_e - 1 - i);
  for (int i = 0; i < e.q; ++i) k.col(e.p + i) = sq.eigenvectors.col(e.dim_e - 1 - i);
  return k;
}

/// Orthonormal basis of the encoded subspace (range of E(1)).
inline Mat encoded_subspace_basis(const Encoding& e) {
  return e.v * kron(identity(e.dim_in), ancilla_support_basis(e));
}

inline Mat encode(const Encoding& e, const Mat& m) {
  require(m.rows() == e.dim_in && m.cols() == e.dim_in, Err::DimMismatch,
          "operator dim does not match encoding input dim");
  return e.v * (kron(m, e.proj_p) + kron(m.conjugate(), e.proj_q)) * e.v.adjoint();
}

inline DenseOperator encode(const Encoding& e, const DenseOperator& m) {
  return DenseOperator{encode(e, m.entries), m.hermitian};
}

/// E(1): projector onto the encoded subspace.
inline Mat encoded_projector(const Encoding& e) {
  return e.v * kron(identity(e.dim_in), Mat(e.proj_p + e.proj_q)) * e.v.adjoint();
}

inline Encoding identity_encoding(long dim) {
  Encoding e;
  e.dim_in = e.dim_out = dim;
  e.dim_e = 1;
  e.v = identity(dim);
  e.proj_p = Mat::Ones(1, 1);
  e.proj_q = Mat::Zero(1, 1);
  e.p = 1;
  e.q = 0;
  return e;
}

/// Basis rotation sending |0>,|1> to the Y eigenstates.
inline Mat y_basis_rotation() {
  Mat w(2, 2);
  double s = 1.0 / std::sqrt(2.0);
  w << s, s, cxd(0, s), cxd(0, -s);
  return w;
}

/// Complex-to-real encoding on n qubits: one extra control qubit (placed
/// first) selects between H and conj(H); every image has real entries.
inline Encoding complex_to_real_enc(int n) {
  require(n >= 1, Err::DimMismatch, "need at least one qubit");
  long dim = 1L << n;
  Encoding e;
  e.dim_in = dim;
  e.dim_e = 2;
  e.dim_out = 2 * dim;
  e.e_factors = {2};
  // |psi> x |e>  ->  (W|e>) x |psi>
  Mat swap = factor_permutation({dim, 2}, {1, 0});
  e.v = swap * kron(identity(dim), y_basis_rotation());
  e.proj_p = Mat::Zero(2, 2);
  e.proj_p(0, 0) = 1.0;
  e.proj_q = Mat::Zero(2, 2);
  e.proj_q(1, 1) = 1.0;
  e.p = 1;
  e.q = 1;
  return e;
}

namespace detail {

inline long product(const std::vector<long>& v) {
  long r = 1;
  for (long x : v) r *= x;
  return r;
}

}  // namespace detail

/// Rebuilds the global isometry from per-site blocks, reordering tensor
/// factors as needed. Blocks must cover all input sites, ancilla factors and
/// simulator sites exactly once.
inline Mat global_isometry_from_blocks(const Locality& loc, const std::vector<long>& e_factors) {
  // source factor list: input sites then ancilla factors
  std::vector<long> src_dims;
  for (int i = 0; i < loc.n_in; ++i) src_dims.push_back(loc.d_in);
  for (long d : e_factors) src_dims.push_back(d);
  std::vector<int> perm_dom;
  Mat big = Mat::Ones(1, 1);
  for (const auto& b : loc.blocks) {
    if (b.orig_site >= 0) perm_dom.push_back(b.orig_site);
    for (int f : b.e_factor_idx) perm_dom.push_back(loc.n_in + f);
    big = kron(big, b.v);
  }
  require(int(perm_dom.size()) == int(src_dims.size()), Err::NotLocalEncoding,
          "blocks must cover all input sites and ancilla factors");
  auto dom_map = factor_permutation_map(src_dims, perm_dom);

  std::vector<int> concat_sites;
  for (const auto& b : loc.blocks)
    for (int s : b.sim_sites) concat_sites.push_back(s);
  require(int(concat_sites.size()) == loc.n_out, Err::NotLocalEncoding,
          "blocks must cover all simulator sites");
  std::vector<long> out_dims(loc.n_out, loc.d_out);
  std::vector<int> perm_out(loc.n_out);
  std::vector<int> pos_of(loc.n_out, -1);
  for (int k = 0; k < loc.n_out; ++k) {
    require(concat_sites[k] >= 0 && concat_sites[k] < loc.n_out && pos_of[concat_sites[k]] == -1,
            Err::NotLocalEncoding, "duplicate or out-of-range simulator site");
    pos_of[concat_sites[k]] = k;
  }
  for (int s = 0; s < loc.n_out; ++s) perm_out[s] = pos_of[s];
  auto out_map = factor_permutation_map(out_dims, perm_out);
  // p_out * big * p_dom applied through index maps to avoid dim^2 permutation
  // matrices: column c of the result is row-permuted column dom_map[c] of big
  Mat result(big.rows(), big.cols());
  for (long c = 0; c < big.cols(); ++c) {
    const auto src = big.col(dom_map[c]);
    for (long r = 0; r < big.rows(); ++r) result(out_map[r], c) = src(r);
  }
  return result;
}

/// Extends `op` (acting on the listed factors, in listed order) to the full
/// factor space with identity elsewhere.
inline Mat embed_on_factors(const Mat& op, const std::vector<long>& factor_dims,
                            const std::vector<int>& idx) {
  const int m = int(factor_dims.size());
  std::vector<bool> used(m, false);
  std::vector<int> order = idx;  // listed factors first, rest after
  for (int f : idx) used[f] = true;
  long rest_dim = 1;
  for (int f = 0; f < m; ++f)
    if (!used[f]) {
      order.push_back(f);
      rest_dim *= factor_dims[f];
    }
  Mat perm = factor_permutation(factor_dims, order);
  return perm.adjoint() * kron(op, identity(rest_dim)) * perm;
}

/// Checks the per-site factorization invariants of a local encoding.
inline void verify_locality(const Encoding& e, const Tolerances& tol = {}) {
  require(e.locality.has_value(), Err::NotLocalEncoding, "no locality metadata");
  const auto& loc = *e.locality;
  Mat rebuilt = global_isometry_from_blocks(loc, e.e_factors);
  require(max_abs(rebuilt - e.v) <= tol.assemble, Err::NotLocalEncoding,
          "global isometry does not factor into the per-site blocks");
  // locally distinguishable projectors: (P_Ei x 1) P = P and (Q_Ei x 1) Q = Q
  for (const auto& b : loc.blocks) {
    if (b.e_factor_idx.empty()) continue;
    Mat pe_ext = embed_on_factors(b.pe, e.e_factors, b.e_factor_idx);
    Mat qe_ext = embed_on_factors(b.qe, e.e_factors, b.e_factor_idx);
    if (b.orig_site < 0) {
      // pure ancilla attachment: both branches must keep the attached state
      require(max_abs(Mat(pe_ext * e.proj_p) - e.proj_p) <= tol.orth &&
                  (e.q == 0 || max_abs(Mat(pe_ext * e.proj_q) - e.proj_q) <= tol.orth),
              Err::NotLocalEncoding, "attached ancilla state not respected");
      continue;
    }
    require(max_abs(Mat(pe_ext * e.proj_p) - e.proj_p) <= tol.orth, Err::NotLocalEncoding,
            "P not locally distinguishable");
    require(max_abs(Mat(qe_ext * e.proj_q) - e.proj_q) <= tol.orth, Err::NotLocalEncoding,
            "Q not locally distinguishable");
  }
}

/// The per-site simulator operator A'_j with E(A_j x 1) = (A'_j x 1) E(1),
/// embedded on the block's simulator sites.
inline Mat local_encoded_operator(const Encoding& e, int site, const Mat& a) {
  require(e.locality.has_value(), Err::NotLocalEncoding, "no locality metadata");
  const auto& loc = *e.locality;
  for (const auto& b : loc.blocks) {
    if (b.orig_site != site) continue;
    require(a.rows() == b.dim_site, Err::DimMismatch, "operator dim mismatch");
    Mat ap = b.v * (kron(a, b.pe) + kron(a.conjugate(), b.qe)) * b.v.adjoint();
    return embed_on_sites(ap, loc.n_out, loc.d_out, b.sim_sites);
  }
  fail(Err::NotLocalEncoding, "no block declared for site " + std::to_string(site));
}

/// Local complex-to-real simulation encoding: one control ancilla per qubit,
/// P and Q project onto the aligned |+y>^n and |-y>^n ancilla states.
/// Simulator qubit layout: [anc_0, sys_0, anc_1, sys_1, ...].
inline Encoding complex_to_real_sim_enc(int n) {
  require(n >= 1, Err::DimMismatch, "need at least one qubit");
  Encoding e;
  e.dim_in = 1L << n;
  e.dim_e = 1L << n;
  e.dim_out = 1L << (2 * n);
  e.e_factors.assign(n, 2);
  Mat w = y_basis_rotation();
  Locality loc;
  loc.n_in = n;
  loc.d_in = 2;
  loc.n_out = 2 * n;
  loc.d_out = 2;
  // ancilla projectors act before the isometry: W carries |0>,|1> onto the
  // |+y>,|-y> control states
  Mat e0 = Mat::Zero(2, 2), e1 = Mat::Zero(2, 2);
  e0(0, 0) = 1.0;
  e1(1, 1) = 1.0;
  for (int i = 0; i < n; ++i) {
    SiteBlock b;
    b.orig_site = i;
    b.dim_site = 2;
    b.sim_sites = {2 * i, 2 * i + 1};
    b.e_factor_idx = {i};
    b.v = factor_permutation({2, 2}, {1, 0}) * kron(identity(2), w);
    b.pe = e0;
    b.qe = e1;
    loc.blocks.push_back(std::move(b));
  }
  e.v = global_isometry_from_blocks(loc, e.e_factors);
  Mat pp = Mat::Ones(1, 1), qq = Mat::Ones(1, 1);
  for (int i = 0; i < n; ++i) {
    pp = kron(pp, e0);
    qq = kron(qq, e1);
  }
  e.proj_p = pp;
  e.proj_q = qq;
  e.p = 1;
  e.q = 1;
  e.locality = std::move(loc);
  return e;
}

/// Qudit-to-qubit embedding: each d-level site maps onto ceil(log2 d) qubits.
inline Encoding qudit_to_qubit_enc(int n, int d) {
  int qb = 0;
  while ((1 << qb) < d) ++qb;
  long bdim = 1L << qb;
  Mat w = Mat::Zero(bdim, d);
  for (int i = 0; i < d; ++i) w(i, i) = 1.0;
  Encoding e;
  e.dim_in = 1;
  for (int i = 0; i < n; ++i) e.dim_in *= d;
  e.dim_e = 1;
  e.dim_out = 1L << (qb * n);
  Mat v = Mat::Ones(1, 1);
  for (int i = 0; i < n; ++i) v = kron(v, w);
  e.v = v;
  e.proj_p = Mat::Ones(1, 1);
  e.proj_q = Mat::Zero(1, 1);
  e.p = 1;
  e.q = 0;
  return e;
}

namespace detail {

/// Locality metadata of e1 after e2 (outer after inner). Returns nullopt when
/// the structures do not line up.
inline std::optional<Locality> compose_locality(const Locality& l1,
                                                const std::vector<long>& e1_factors,
                                                const Locality& l2, int nf2) {
  if (l1.n_in != l2.n_out || l1.d_in != l2.d_out) return std::nullopt;
  std::vector<int> block1_of_site(l1.n_in, -1);
  for (int bi = 0; bi < int(l1.blocks.size()); ++bi) {
    const auto& b1 = l1.blocks[bi];
    if (b1.orig_site >= 0) {
      if (b1.orig_site >= l1.n_in || block1_of_site[b1.orig_site] != -1) return std::nullopt;
      block1_of_site[b1.orig_site] = bi;
    }
  }
  for (int s = 0; s < l1.n_in; ++s)
    if (block1_of_site[s] < 0) return std::nullopt;

  Locality out;
  out.n_in = l2.n_in;
  out.d_in = l2.d_in;
  out.n_out = l1.n_out;
  out.d_out = l1.d_out;
  for (const auto& b2 : l2.blocks) {
    SiteBlock b;
    b.orig_site = b2.orig_site;
    b.dim_site = b2.dim_site;
    b.e_factor_idx = b2.e_factor_idx;
    // outer blocks consuming this inner block's output sites, in output order
    std::vector<const SiteBlock*> feeds;
    for (int s : b2.sim_sites) feeds.push_back(&l1.blocks[block1_of_site[s]]);
    Mat pe1 = Mat::Ones(1, 1), qe1 = Mat::Ones(1, 1), v1 = Mat::Ones(1, 1);
    std::vector<long> mix_dims;
    for (auto* f : feeds) mix_dims.push_back(long(f->dim_site));
    for (auto* f : feeds) {
      pe1 = kron(pe1, f->pe);
      qe1 = kron(qe1, f->qe);
      v1 = kron(v1, f->v);
      mix_dims.push_back(f->dim_e());
      for (int fi : f->e_factor_idx) b.e_factor_idx.push_back(nf2 + fi);
      for (int s : f->sim_sites) b.sim_sites.push_back(s);
    }
    const int kf = int(feeds.size());
    std::vector<int> mix_perm;  // target ordering (H_1, E_1, H_2, E_2, ...)
    for (int k = 0; k < kf; ++k) {
      mix_perm.push_back(k);
      mix_perm.push_back(kf + k);
    }
    Mat pmix = kf ? factor_permutation(mix_dims, mix_perm) : Mat::Ones(1, 1);
    Mat r1 = identity(pe1.rows()) - pe1 - qe1;
    b.v = v1 * pmix *
          (kron(b2.v, pe1) + kron(b2.v.conjugate(), qe1) + kron(b2.v, r1));
    b.pe = kron(b2.pe, pe1) + kron(b2.qe.conjugate(), qe1);
    b.qe = kron(b2.qe, pe1) + kron(b2.pe.conjugate(), qe1);
    out.blocks.push_back(std::move(b));
  }
  // outer pure-ancilla attachments pass through unchanged
  int nf2_total = nf2;
  (void)nf2_total;
  for (const auto& b1 : l1.blocks) {
    if (b1.orig_site >= 0) continue;
    if (max_abs(b1.qe) > 1e-12) return std::nullopt;
    SiteBlock b = b1;
    for (auto& fi : b.e_factor_idx) fi += nf2;
    out.blocks.push_back(std::move(b));
  }
  (void)e1_factors;
  return out;
}

}  // namespace detail

/// Composition: (compose(e1, e2))(M) = e1(e2(M)).
inline Encoding compose(const Encoding& e1, const Encoding& e2) {
  require(e1.dim_in == e2.dim_out, Err::DimMismatch,
          "outer encoding input dim must equal inner encoding output dim");
  Encoding out;
  out.dim_in = e2.dim_in;
  out.dim_e = e2.dim_e * e1.dim_e;
  out.dim_out = e1.dim_out;
  Mat r1 = identity(e1.dim_e) - e1.proj_p - e1.proj_q;
  out.v = e1.v * (kron(e2.v, e1.proj_p) + kron(e2.v.conjugate(), e1.proj_q) + kron(e2.v, r1));
  out.proj_p = kron(e2.proj_p, e1.proj_p) + kron(e2.proj_q.conjugate(), e1.proj_q);
  out.proj_q = kron(e2.proj_q, e1.proj_p) + kron(e2.proj_p.conjugate(), e1.proj_q);
  out.p = e2.p * e1.p + e2.q * e1.q;
  out.q = e2.q * e1.p + e2.p * e1.q;
  out.e_factors = e2.e_factors;
  for (long f : e1.e_factors) out.e_factors.push_back(f);
  // Locality composes when every outer input site is produced by some inner
  // block. Outer blocks are grouped by the inner block that feeds them; pure
  // ancilla attachments of the outer encoding pass through (requires the
  // outer encoding to keep the attachment in both branches, i.e. qe = 0).
  if (e1.locality && e2.locality) {
    auto composed = detail::compose_locality(*e1.locality, e1.e_factors, *e2.locality,
                                             int(e2.e_factors.size()));
    if (composed) {
      out.locality = std::move(*composed);
      // rebuild the isometry from the blocks so metadata and v agree exactly;
      // this differs from the global formula only off supp(P+Q)
      out.v = global_isometry_from_blocks(*out.locality, out.e_factors);
    }
  }
  return out;
}

// --- state maps -------------------------------------------------------------

/// E_state: attaches the ancilla state sigma inside the encoded subspace.
inline Mat estate(const Encoding& e, const Mat& rho, const Mat& sigma,
                  const Tolerances& tol = {}) {
  require(rho.rows() == e.dim_in, Err::DimMismatch, "estate: state dim mismatch");
  require(sigma.rows() == e.dim_e, Err::DimMismatch, "estate: ancilla dim mismatch");
  const Mat& proj = e.p >= 1 ? e.proj_p : e.proj_q;
  require(max_abs(Mat(proj * sigma) - sigma) <= tol.orth * std::max(1.0, max_abs(sigma)),
          Err::BadAncilla, "sigma not supported on the required ancilla projector");
  if (e.p >= 1) return e.v * kron(rho, sigma) * e.v.adjoint();
  return e.v * kron(rho.conjugate(), sigma) * e.v.adjoint();
}

/// Default ancilla state: maximally mixed on supp(P) (or supp(Q) when p = 0).
inline Mat default_ancilla_state(const Encoding& e) {
  if (e.p >= 1) return e.proj_p / double(e.p);
  return e.proj_q / double(e.q);
}

inline Mat estate(const Encoding& e, const Mat& rho) {
  return estate(e, rho, default_ancilla_state(e));
}

/// The forward/backward decomposition rho = F(rho') + B(rho').
struct FBPair {
  Mat f;
  Mat b;
};

inline FBPair fb_maps(const Encoding& e, const Mat& rho_sim) {
  require(rho_sim.rows() == e.dim_out, Err::DimMismatch, "fb_maps: state dim mismatch");
  Mat pulled = e.v.adjoint() * rho_sim * e.v;
  Mat f = ptrace_second(Mat(kron(identity(e.dim_in), e.proj_p) * pulled), e.dim_in, e.dim_e);
  Mat b = ptrace_second(Mat(kron(identity(e.dim_in), e.proj_q) * pulled), e.dim_in, e.dim_e);
  return {f, b.conjugate()};
}

/// Gibbs-preserving state map: E(rho) / (p+q).
inline Mat estate_gibbs(const Encoding& e, const Mat& rho) {
  require(e.p + e.q >= 1, Err::DegenerateEncoding, "p + q = 0");
  return encode(e, rho) / double(e.p + e.q);
}

/// Measurement map paired with the Gibbs-preserving state map.
inline Mat emeas_gibbs(const Encoding& e, const Mat& a) {
  require(e.p + e.q >= 1, Err::DegenerateEncoding, "p + q = 0");
  if (e.p >= 1)
    return double(e.p + e.q) / double(e.p) * Mat(e.v * kron(a, e.proj_p) * e.v.adjoint());
  return double(e.p + e.q) / double(e.q) * Mat(e.v * kron(a.conjugate(), e.proj_q) * e.v.adjoint());
}

// --- axiom verification ------------------------------------------------------

struct AxiomReport {
  bool pass = true;
  double worst_hermiticity = 0.0;
  double worst_spectrum = 0.0;
  double worst_convexity = 0.0;
  double worst_multiplicativity = 0.0;
  std::vector<std::string> flags;
};

/// Sample-based check of the defining encoding axioms: Hermiticity
/// preservation, spectrum preservation (with p+q multiplicity), convexity,
/// and multiplicativity of the extended map on the encoded subspace.
inline AxiomReport verify_encoding_axioms(const Encoding& e, const std::vector<Mat>& samples,
                                          const Tolerances& tol = {}) {
  AxiomReport rep;
  // structural checks first; failures are reported, not thrown
  double iso = max_abs(Mat(e.v.adjoint() * e.v) - identity(e.dim_in * e.dim_e));
  if (iso > tol.orth) {
    rep.pass = false;
    rep.flags.push_back("IsometryViolation");
  }
  if (max_abs(Mat(e.proj_p * e.proj_q)) > tol.orth) {
    rep.pass = false;
    rep.flags.push_back("ProjectorOverlap");
  }
  Mat basis = encoded_subspace_basis(e);
  for (const auto& a : samples) {
    Mat ea = encode(e, a);
    rep.worst_hermiticity = std::max(rep.worst_hermiticity, herm_residual(ea));
    // spectrum with multiplicity p+q on the encoded subspace
    auto sa = diagonalize(DenseOperator{a, true}, tol);
    Mat restricted = basis.adjoint() * ea * basis;
    auto sr = diagonalize(DenseOperator{0.5 * (restricted + restricted.adjoint()), true}, tol);
    for (long i = 0; i < e.dim_in; ++i)
      for (int k = 0; k < e.p + e.q; ++k)
        rep.worst_spectrum = std::max(
            rep.worst_spectrum,
            std::abs(sa.eigenvalues(i) - sr.eigenvalues(i * (e.p + e.q) + k)));
  }
  for (size_t i = 0; i + 1 < samples.size(); i += 2) {
    const Mat& a = samples[i];
    const Mat& b = samples[i + 1];
    for (double w : {0.0, 0.25, 0.5, 1.0}) {
      Mat lhs = encode(e, Mat(w * a + (1 - w) * b));
      Mat rhs = w * encode(e, a) + (1 - w) * encode(e, b);
      rep.worst_convexity = std::max(rep.worst_convexity, max_abs(lhs - rhs));
    }
    // extended-map multiplicativity restricted to the encoded subspace
    Mat eab = encode(e, Mat(a * b));
    Mat ea_eb = encode(e, a) * encode(e, b);
    rep.worst_multiplicativity =
        std::max(rep.worst_multiplicativity,
                 max_abs(Mat(basis.adjoint() * (eab - ea_eb) * basis)));
  }
  double scale = 1.0;
  for (const auto& a : samples) scale = std::max(scale, max_abs(a));
  if (rep.worst_hermiticity > tol.eig * scale || rep.worst_spectrum > tol.eig * scale ||
      rep.worst_convexity > tol.eig * scale || rep.worst_multiplicativity > tol.eig * scale * scale)
    rep.pass = false;
  return rep;
}

}  // namespace hamforge
