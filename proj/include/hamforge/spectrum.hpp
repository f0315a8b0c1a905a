#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Eigenvalues>

#include "hamforge/hamiltonian.hpp"
#include "hamforge/linalg.hpp"
#include "hamforge/types.hpp"

namespace hamforge {

/// Eigen-decomposition with a fixed ordering and phase convention so repeated
/// runs produce identical output.
struct Spectrum {
  RVec eigenvalues;   // ascending
  Mat eigenvectors;   // orthonormal columns, matching order
  double degeneracy_tol = 1e-8;

  long dim() const { return eigenvalues.size(); }

  /// Count of eigenvalues <= cut.
  long count_below(double cut) const {
    long c = 0;
    for (Eigen::Index i = 0; i < eigenvalues.size(); ++i)
      if (eigenvalues(i) <= cut) ++c;
    return c;
  }
};

namespace detail {

inline void fix_phase(Mat& vectors, double tol_phase) {
  for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
    for (Eigen::Index r = 0; r < vectors.rows(); ++r) {
      cxd v = vectors(r, c);
      if (std::abs(v) > tol_phase) {
        vectors.col(c) *= std::conj(v) / std::abs(v);
        break;
      }
    }
  }
}

inline bool lex_less(const Vec& a, const Vec& b) {
  // rounded comparison keeps the order stable under eigensolver noise
  constexpr double scale = 1e6;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    long ar = std::lround(a(i).real() * scale), br = std::lround(b(i).real() * scale);
    if (ar != br) return ar < br;
    long ai = std::lround(a(i).imag() * scale), bi = std::lround(b(i).imag() * scale);
    if (ai != bi) return ai < bi;
  }
  return false;
}

}  // namespace detail

inline Spectrum diagonalize(const DenseOperator& a, const Tolerances& tol = {}) {
  require(a.hermitian, Err::NotHermitian, "diagonalize needs a Hermitian operator");
  require(herm_residual(a.entries) <= tol.herm * std::max(1.0, max_abs(a.entries)),
          Err::NotHermitian, "matrix fails Hermiticity check");
  Eigen::SelfAdjointEigenSolver<Mat> es(a.entries);
  require(es.info() == Eigen::Success, Err::NotHermitian, "eigensolver failed");
  Spectrum s;
  s.eigenvalues = es.eigenvalues();
  s.eigenvectors = es.eigenvectors();
  s.degeneracy_tol = tol.degeneracy;
  detail::fix_phase(s.eigenvectors, tol.phase);
  // deterministic order inside degenerate groups
  Eigen::Index i = 0;
  while (i < s.eigenvalues.size()) {
    Eigen::Index j = i + 1;
    while (j < s.eigenvalues.size() && s.eigenvalues(j) - s.eigenvalues(i) < tol.degeneracy) ++j;
    if (j - i > 1) {
      std::vector<Eigen::Index> order(j - i);
      for (Eigen::Index k = 0; k < j - i; ++k) order[k] = i + k;
      std::sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) {
        return detail::lex_less(s.eigenvectors.col(x), s.eigenvectors.col(y));
      });
      Mat tmp(s.eigenvectors.rows(), j - i);
      RVec vals(j - i);
      for (Eigen::Index k = 0; k < j - i; ++k) {
        tmp.col(k) = s.eigenvectors.col(order[k]);
        vals(k) = s.eigenvalues(order[k]);
      }
      s.eigenvectors.middleCols(i, j - i) = tmp;
      s.eigenvalues.segment(i, j - i) = vals;
    }
    i = j;
  }
  return s;
}

inline Spectrum diagonalize(const Mat& m, const Tolerances& tol = {}) {
  return diagonalize(DenseOperator{m, true}, tol);
}

/// Projector onto the span of eigenvectors with eigenvalue <= cut.
/// Rejects cuts that fall inside a degenerate cluster.
inline DenseOperator low_energy_projector(const Spectrum& s, double cut) {
  for (Eigen::Index i = 0; i < s.eigenvalues.size(); ++i)
    require(std::abs(s.eigenvalues(i) - cut) >= s.degeneracy_tol, Err::DegenerateCut,
            "cutoff too close to an eigenvalue; shift the cut");
  long r = s.count_below(cut);
  if (r == 0) return DenseOperator{Mat::Zero(s.dim(), s.dim()), true};
  Mat basis = s.eigenvectors.leftCols(r);
  return DenseOperator{basis * basis.adjoint(), true};
}

/// f(H) for Hermitian H via the spectral decomposition.
inline Mat matrix_function(const Spectrum& s, const std::function<cxd(double)>& f) {
  Vec fe(s.dim());
  for (Eigen::Index i = 0; i < s.dim(); ++i) fe(i) = f(s.eigenvalues(i));
  return s.eigenvectors * fe.asDiagonal() * s.eigenvectors.adjoint();
}

inline Mat expm_herm(const Spectrum& s, cxd scale) {
  return matrix_function(s, [scale](double x) { return std::exp(scale * x); });
}

/// exp(-i H t) for Hermitian H.
inline Mat evolution(const Spectrum& s, double t) { return expm_herm(s, cxd(0.0, -t)); }

}  // namespace hamforge
