#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "hamforge/linalg.hpp"
#include "hamforge/pauli.hpp"

namespace hamforge {

/// A fixed set of 1- and 2-qubit interactions to classify.
struct Interaction {
  int arity = 2;  // 1 or 2
  Mat matrix;     // 2x2 or 4x4 Hermitian
};

struct InteractionSet {
  std::vector<Interaction> interactions;
  std::string label;
};

enum class SimClass { classical, stoquastic, universal };

inline const char* sim_class_name(SimClass c) {
  switch (c) {
    case SimClass::classical: return "classical";
    case SimClass::stoquastic: return "stoquastic";
    case SimClass::universal: return "universal";
  }
  return "";
}

namespace detail {

/// 3x3 Pauli coefficient matrix of the 2-local part, plus the two 1-local
/// coefficient vectors.
struct PauliData {
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  Eigen::Vector3d left = Eigen::Vector3d::Zero();
  Eigen::Vector3d right = Eigen::Vector3d::Zero();
};

inline PauliData pauli_data(const Mat& h) {
  PauliData d;
  const Mat sig[3] = {pauli_x(), pauli_y(), pauli_z()};
  for (int s = 0; s < 3; ++s) {
    for (int t = 0; t < 3; ++t)
      d.m(s, t) = 0.25 * (kron(sig[s], sig[t]) * h).trace().real();
    d.left(s) = 0.25 * (kron(sig[s], identity(2)) * h).trace().real();
    d.right(s) = 0.25 * (kron(identity(2), sig[s]) * h).trace().real();
  }
  return d;
}

inline Eigen::Vector3d one_local_vector(const Mat& h) {
  const Mat sig[3] = {pauli_x(), pauli_y(), pauli_z()};
  Eigen::Vector3d v;
  for (int s = 0; s < 3; ++s) v(s) = 0.5 * (sig[s] * h).trace().real();
  return v;
}

inline bool parallel(const Eigen::Vector3d& a, const Eigen::Vector3d& b, double tol) {
  // treats near-zero vectors as parallel to anything
  double na = a.norm(), nb = b.norm();
  if (na <= tol || nb <= tol) return true;
  return a.cross(b).norm() <= tol * na * nb;
}

}  // namespace detail

/// Classifies the simulation power of a fixed interaction set:
///  - classical: some single-qubit rotation diagonalises every interaction;
///  - stoquastic: some rotation brings every 2-local part to a ZZ multiple
///    with free 1-local parts;
///  - universal: everything else.
inline SimClass classify(const InteractionSet& s, double tol = 1e-8) {
  bool has_2local = false;
  std::vector<detail::PauliData> datas;
  std::vector<Eigen::Vector3d> singles;
  for (const auto& in : s.interactions) {
    if (in.arity == 2) {
      require(in.matrix.rows() == 4, Err::DimMismatch, "2-qubit interaction must be 4x4");
      require(herm_residual(in.matrix) <= 1e-9 * std::max(1.0, max_abs(in.matrix)),
              Err::NotHermitian, "interaction not Hermitian");
      auto d = detail::pauli_data(in.matrix);
      if (d.m.cwiseAbs().maxCoeff() > tol) has_2local = true;
      datas.push_back(d);
    } else {
      require(in.matrix.rows() == 2, Err::DimMismatch, "1-qubit interaction must be 2x2");
      singles.push_back(detail::one_local_vector(in.matrix));
    }
  }
  require(has_2local, Err::Only1Local, "classification needs a non-1-local interaction");

  // any antisymmetric 2-local part rules out the ZZ canonical form
  for (const auto& d : datas) {
    Eigen::Matrix3d anti = 0.5 * (d.m - d.m.transpose());
    if (anti.cwiseAbs().maxCoeff() > tol) return SimClass::universal;
  }
  // every symmetric part must be rank <= 1 with one common principal axis
  Eigen::Vector3d axis = Eigen::Vector3d::Zero();
  bool have_axis = false;
  for (const auto& d : datas) {
    Eigen::Matrix3d sym = 0.5 * (d.m + d.m.transpose());
    if (sym.cwiseAbs().maxCoeff() <= tol) continue;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(sym);
    int rank = 0;
    int principal = -1;
    for (int i = 0; i < 3; ++i)
      if (std::abs(es.eigenvalues()(i)) > tol * sym.cwiseAbs().maxCoeff()) {
        ++rank;
        principal = i;
      }
    if (rank > 1) return SimClass::universal;
    Eigen::Vector3d v = es.eigenvectors().col(principal);
    if (!have_axis) {
      axis = v;
      have_axis = true;
    } else if (!detail::parallel(axis, v, tol)) {
      return SimClass::universal;
    }
  }
  // stoquastic at least; classical additionally needs all 1-local parts
  // diagonal in the axis basis
  bool classical = true;
  for (const auto& d : datas)
    if (!detail::parallel(axis, d.left, tol) || !detail::parallel(axis, d.right, tol))
      classical = false;
  for (const auto& v : singles)
    if (!detail::parallel(axis, v, tol)) classical = false;
  return classical ? SimClass::classical : SimClass::stoquastic;
}

/// Conjugates every interaction by U (x) U (and 1-local ones by U).
inline InteractionSet conjugate_set(const InteractionSet& s, const Mat& u) {
  InteractionSet out;
  out.label = s.label;
  for (const auto& in : s.interactions) {
    Interaction c = in;
    Mat uu = in.arity == 2 ? kron(u, u) : u;
    c.matrix = uu * in.matrix * uu.adjoint();
    out.interactions.push_back(std::move(c));
  }
  return out;
}

}  // namespace hamforge
