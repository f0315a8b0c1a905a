#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "hamforge/types.hpp"

namespace hamforge {

inline Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline Mat identity(long dim) { return Mat::Identity(dim, dim); }

inline bool is_hermitian(const Mat& m, double tol = 1e-10) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

inline double herm_residual(const Mat& m) { return (m - m.adjoint()).cwiseAbs().maxCoeff(); }

/// Largest singular value. For Hermitian input this equals max |eigenvalue|.
inline double op_norm(const Mat& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  if (m.rows() == m.cols() && is_hermitian(m, 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff()))) {
    Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
  }
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues()(0);
}

/// Sum of singular values.
inline double trace_norm(const Mat& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues().sum();
}

inline double max_abs(const Mat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

/// Index helper for a register of sites with uniform local dimension d.
/// Site 0 is the most significant digit (matches kron ordering site0 x site1 x ...).
struct SiteIndexer {
  int n;
  int d;
  long dim;
  SiteIndexer(int n_, int d_) : n(n_), d(d_) {
    dim = 1;
    for (int i = 0; i < n; ++i) dim *= d;
  }
  long stride(int site) const {
    long s = 1;
    for (int i = site + 1; i < n; ++i) s *= d;
    return s;
  }
  int digit(long index, int site) const { return int((index / stride(site)) % d); }
};

/// Permutation matrix that maps basis state with digits x (in `from` order)
/// to the same digits read in `to` order: row = index in `to`-ordered register.
/// `perm[k]` gives, for slot k of the target ordering, the source slot index.
inline Mat site_permutation(const std::vector<int>& perm, int d) {
  int n = int(perm.size());
  SiteIndexer ix(n, d);
  Mat out = Mat::Zero(ix.dim, ix.dim);
  std::vector<int> digits(n);
  for (long c = 0; c < ix.dim; ++c) {
    for (int s = 0; s < n; ++s) digits[s] = ix.digit(c, s);
    long r = 0;
    for (int k = 0; k < n; ++k) r = r * d + digits[perm[k]];
    out(r, c) = 1.0;
  }
  return out;
}

/// Partial trace over the sites listed in `traced` (register of n sites, dim d each).
inline Mat partial_trace(const Mat& m, int n, int d, const std::vector<int>& traced) {
  SiteIndexer ix(n, d);
  require(m.rows() == ix.dim && m.cols() == ix.dim, Err::DimMismatch, "partial_trace dims");
  std::vector<bool> is_traced(n, false);
  for (int s : traced) is_traced[s] = true;
  std::vector<int> kept;
  for (int s = 0; s < n; ++s)
    if (!is_traced[s]) kept.push_back(s);
  long kdim = 1;
  for (size_t i = 0; i < kept.size(); ++i) kdim *= d;
  long tdim = ix.dim / kdim;
  Mat out = Mat::Zero(kdim, kdim);
  std::vector<int> kd(kept.size()), ld(kept.size());
  // enumerate kept-digit pairs and traced digits
  for (long r = 0; r < kdim; ++r) {
    long rr = r;
    for (int i = int(kept.size()) - 1; i >= 0; --i) { kd[i] = int(rr % d); rr /= d; }
    for (long c = 0; c < kdim; ++c) {
      long cc = c;
      for (int i = int(kept.size()) - 1; i >= 0; --i) { ld[i] = int(cc % d); cc /= d; }
      cxd acc = 0.0;
      for (long t = 0; t < tdim; ++t) {
        long tt = t;
        long row = 0, col = 0;
        int ki = 0, ti = 0;
        std::vector<int> tdig(traced.size());
        for (int i = int(traced.size()) - 1; i >= 0; --i) { tdig[i] = int(tt % d); tt /= d; }
        ki = 0; ti = 0;
        for (int s = 0; s < n; ++s) {
          int dr, dc;
          if (is_traced[s]) { dr = dc = tdig[ti]; }
          else { dr = kd[ki]; dc = ld[ki]; }
          if (is_traced[s]) ++ti; else ++ki;
          row = row * d + dr;
          col = col * d + dc;
        }
        acc += m(row, col);
      }
      out(r, c) = acc;
    }
  }
  return out;
}

/// True when m acts as (identity on `site`) tensor (something on the rest).
inline bool acts_trivially_on(const Mat& m, int n, int d, int site, double tol = 1e-9) {
  std::vector<int> others;
  Mat rest = partial_trace(m, n, d, {site}) / double(d);
  // rebuild identity_site ⊗ rest in original ordering and compare
  SiteIndexer ix(n, d);
  Mat rebuilt = Mat::Zero(ix.dim, ix.dim);
  SiteIndexer rx(n - 1, d);
  for (long r = 0; r < ix.dim; ++r) {
    for (long c = 0; c < ix.dim; ++c) {
      if (ix.digit(r, site) != ix.digit(c, site)) continue;
      long rr = 0, cc = 0;
      for (int s = 0; s < n; ++s) {
        if (s == site) continue;
        rr = rr * d + ix.digit(r, s);
        cc = cc * d + ix.digit(c, s);
      }
      rebuilt(r, c) = rest(rr, cc);
    }
  }
  double scale = std::max(1.0, max_abs(m));
  return max_abs(m - rebuilt) <= tol * scale;
}

/// Dense embedding of `block` acting on `sites` of an n-site register.
inline Mat embed_on_sites(const Mat& block, int n, int d, const std::vector<int>& sites) {
  SiteIndexer ix(n, d);
  Mat out = Mat::Zero(ix.dim, ix.dim);
  const int k = int(sites.size());
  std::vector<long> strides(k);
  for (int i = 0; i < k; ++i) strides[i] = ix.stride(sites[i]);
  for (long c = 0; c < ix.dim; ++c) {
    long bc = 0;
    long base = c;
    for (int i = 0; i < k; ++i) {
      int dig = int((c / strides[i]) % d);
      bc = bc * d + dig;
      base -= dig * strides[i];
    }
    for (long br = 0; br < block.rows(); ++br) {
      cxd v = block(br, bc);
      if (v == cxd(0.0)) continue;
      long r = base;
      long rem = br;
      for (int i = k - 1; i >= 0; --i) {
        r += (rem % d) * strides[i];
        rem /= d;
      }
      out(r, c) += v;
    }
  }
  return out;
}

/// Unitary factor of the polar decomposition m = U * sqrt(m^dag m).
inline Mat polar_unitary(const Mat& m) {
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

inline long rank_of_projector(const Mat& p, double tol = 1e-6) {
  Eigen::SelfAdjointEigenSolver<Mat> es(p, Eigen::EigenvaluesOnly);
  long r = 0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()(i) > 0.5) ++r;
  (void)tol;
  return r;
}

}  // namespace hamforge
