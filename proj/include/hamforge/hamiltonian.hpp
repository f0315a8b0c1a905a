#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "hamforge/linalg.hpp"
#include "hamforge/pauli.hpp"
#include "hamforge/types.hpp"

namespace hamforge {

/// One weighted interaction given as a dense Hermitian block on a site subset.
struct LocalTerm {
  std::vector<int> support;  // sorted site list
  Mat block;                 // dim d^|support|, Hermitian
  double weight = 0.0;

  LocalTerm() = default;
  LocalTerm(std::vector<int> s, Mat b, double w)
      : support(std::move(s)), block(std::move(b)), weight(w) {}

  void validate(int d, double tol_herm) const {
    for (size_t i = 0; i + 1 < support.size(); ++i)
      require(support[i] < support[i + 1], Err::BadTerm, "support must be strictly increasing");
    long dim = 1;
    for (size_t i = 0; i < support.size(); ++i) dim *= d;
    require(block.rows() == dim && block.cols() == dim, Err::BadTerm, "block dimension mismatch");
    require(herm_residual(block) <= tol_herm * std::max(1.0, max_abs(block)), Err::NotHermitian,
            "term block not Hermitian");
    require(std::isfinite(weight), Err::BadTerm, "weight must be finite");
  }
};

using Term = std::variant<PauliTerm, LocalTerm>;

inline const std::vector<int>& term_support(const Term& t) {
  if (std::holds_alternative<PauliTerm>(t)) return std::get<PauliTerm>(t).sites;
  return std::get<LocalTerm>(t).support;
}

inline double term_weight(const Term& t) {
  if (std::holds_alternative<PauliTerm>(t)) return std::get<PauliTerm>(t).weight;
  return std::get<LocalTerm>(t).weight;
}

/// n sites of uniform local dimension d plus a term list; the interaction
/// hypergraph of the system.
struct Hamiltonian {
  int n = 0;
  int d = 2;
  std::vector<Term> terms;
  std::optional<std::string> family_tag;
  std::optional<std::map<int, std::pair<int, int>>> geometry;  // site -> (row, col)
  std::vector<std::string> term_tags;  // optional provenance, aligned with terms

  long dim() const {
    long dim = 1;
    for (int i = 0; i < n; ++i) dim *= d;
    return dim;
  }

  void validate(double tol_herm = 1e-10) const {
    require(n >= 0 && d >= 2, Err::BadTerm, "need n >= 0 and d >= 2");
    for (const auto& t : terms) {
      for (int s : term_support(t))
        require(s >= 0 && s < n, Err::BadSupport, "term references site outside [0, n)");
      if (std::holds_alternative<PauliTerm>(t)) {
        require(d == 2, Err::NotQubit, "Pauli terms require d = 2");
        std::get<PauliTerm>(t).validate();
      } else {
        std::get<LocalTerm>(t).validate(d, tol_herm);
      }
    }
  }

  void add(PauliTerm t) { terms.emplace_back(std::move(t)); }
  void add(LocalTerm t) { terms.emplace_back(std::move(t)); }
  void add_pauli(std::vector<int> sites, std::string letters, double w) {
    terms.emplace_back(PauliTerm(std::move(sites), std::move(letters), w));
  }
  void add_identity(double w) { terms.emplace_back(PauliTerm({}, "", w)); }

  double max_abs_weight() const {
    double m = 0.0;
    for (const auto& t : terms) m = std::max(m, std::abs(term_weight(t)));
    return m;
  }

  int max_locality() const {
    size_t k = 0;
    for (const auto& t : terms) k = std::max(k, term_support(t).size());
    return int(k);
  }
};

struct DenseOperator {
  Mat entries;
  bool hermitian = false;
  long dim() const { return entries.rows(); }
};

namespace detail {

/// Adds weight * (block on `support`, identity elsewhere) into `acc`.
/// Cost O(d^k * dim) per term: each embedded column has d^k nonzero rows.
inline void accumulate_block(Mat& acc, int n, int d, const std::vector<int>& support,
                             const Mat& block, double weight) {
  SiteIndexer ix(n, d);
  const int k = int(support.size());
  long bdim = block.rows();
  std::vector<long> strides(k);
  for (int i = 0; i < k; ++i) strides[i] = ix.stride(support[i]);
  // base = column index with support digits zeroed
  for (long c = 0; c < ix.dim; ++c) {
    long bc = 0;
    long base = c;
    for (int i = 0; i < k; ++i) {
      int dig = int((c / strides[i]) % d);
      bc = bc * d + dig;
      base -= dig * strides[i];
    }
    for (long br = 0; br < bdim; ++br) {
      cxd v = block(br, bc);
      if (v == cxd(0.0)) continue;
      long r = base;
      long rem = br;
      for (int i = k - 1; i >= 0; --i) {
        r += (rem % d) * strides[i];
        rem /= d;
      }
      acc(r, c) += weight * v;
    }
  }
}

inline void accumulate_pauli(Mat& acc, int n, const PauliTerm& t) {
  SiteIndexer ix(n, 2);
  const int k = int(t.sites.size());
  if (k == 0) {
    for (long c = 0; c < ix.dim; ++c) acc(c, c) += t.weight;
    return;
  }
  std::vector<long> strides(k);
  for (int i = 0; i < k; ++i) strides[i] = ix.stride(t.sites[i]);
  for (long c = 0; c < ix.dim; ++c) {
    long r = c;
    cxd phase = 1.0;
    for (int i = 0; i < k; ++i) {
      int dig = int((c / strides[i]) % 2);
      auto [out, ph] = pauli_column_action(t.letters[i], dig);
      phase *= ph;
      r += (out - dig) * strides[i];
    }
    acc(r, c) += t.weight * phase;
  }
}

}  // namespace detail

/// Dense assembly of the full Hamiltonian: sum of tensor-extended terms.
inline DenseOperator assemble(const Hamiltonian& h, long dim_cap = kDefaultDimCap,
                              const Tolerances& tol = {}) {
  h.validate(tol.herm);
  require(h.dim() <= dim_cap, Err::DimensionCap,
          "d^n = " + std::to_string(h.dim()) + " exceeds cap " + std::to_string(dim_cap));
  Mat acc = Mat::Zero(h.dim(), h.dim());
  for (const auto& t : h.terms) {
    if (std::holds_alternative<PauliTerm>(t))
      detail::accumulate_pauli(acc, h.n, std::get<PauliTerm>(t));
    else {
      const auto& lt = std::get<LocalTerm>(t);
      detail::accumulate_block(acc, h.n, h.d, lt.support, lt.block, lt.weight);
    }
  }
  return DenseOperator{std::move(acc), true};
}

/// Expands a dense block on qubits into weighted Pauli strings via trace inner
/// products. The identity component comes back as the empty-sites term.
inline std::vector<PauliTerm> pauli_decompose(const LocalTerm& t, int parent_d = 2,
                                              double drop_below = 1e-12) {
  require(parent_d == 2, Err::NotQubit, "pauli_decompose requires qubits");
  const int k = int(t.support.size());
  long dim = 1L << k;
  require(t.block.rows() == dim, Err::BadTerm, "block dim mismatch");
  std::vector<PauliTerm> out;
  long count = 1;
  for (int i = 0; i < k; ++i) count *= 4;
  for (long idx = 0; idx < count; ++idx) {
    std::string full = pauli_string_for_index(k, idx);
    Mat p = Mat::Ones(1, 1);
    for (char c : full) p = kron(p, pauli(c));
    cxd coeff = (p.adjoint() * t.block).trace() / double(dim);
    require(std::abs(coeff.imag()) <= 1e-9 * std::max(1.0, max_abs(t.block)), Err::NotHermitian,
            "non-real Pauli coefficient");
    double w = coeff.real() * t.weight;
    if (std::abs(w) <= drop_below) continue;
    std::vector<int> sites;
    std::string letters;
    for (int i = 0; i < k; ++i)
      if (full[i] != 'I') {
        sites.push_back(t.support[i]);
        letters.push_back(full[i]);
      }
    out.emplace_back(std::move(sites), std::move(letters), w);
  }
  return out;
}

/// Relabels sites by `map` (old site -> new site) on an n-site register.
inline Hamiltonian relabel_sites(const Hamiltonian& h, const std::vector<int>& map, int new_n) {
  Hamiltonian out;
  out.n = new_n;
  out.d = h.d;
  out.family_tag = h.family_tag;
  for (const auto& t : h.terms) {
    if (std::holds_alternative<PauliTerm>(t)) {
      const auto& pt = std::get<PauliTerm>(t);
      std::vector<std::pair<int, char>> moved;
      for (size_t i = 0; i < pt.sites.size(); ++i) moved.push_back({map[pt.sites[i]], pt.letters[i]});
      std::sort(moved.begin(), moved.end());
      std::vector<int> sites;
      std::string letters;
      for (auto& [s, l] : moved) { sites.push_back(s); letters.push_back(l); }
      out.add_pauli(std::move(sites), std::move(letters), pt.weight);
    } else {
      const auto& lt = std::get<LocalTerm>(t);
      std::vector<std::pair<int, int>> order;  // (new site, old slot)
      for (size_t i = 0; i < lt.support.size(); ++i) order.push_back({map[lt.support[i]], int(i)});
      std::sort(order.begin(), order.end());
      std::vector<int> sites;
      std::vector<int> perm;
      for (auto& [s, slot] : order) { sites.push_back(s); perm.push_back(slot); }
      Mat pm = site_permutation(perm, h.d);
      out.add(LocalTerm(std::move(sites), pm * lt.block * pm.adjoint(), lt.weight));
    }
  }
  return out;
}

}  // namespace hamforge
