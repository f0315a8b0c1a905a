#pragma once

#include <array>
#include <cmath>
#include <map>
#include <vector>

#include "hamforge/gadgets.hpp"

namespace hamforge {

enum class PairFamily { heisenberg, xy };

inline const char* family_name(PairFamily f) {
  return f == PairFamily::heisenberg ? "heisenberg" : "xy";
}

/// Letters of the family interaction: XX+YY+ZZ or XX+YY.
inline std::vector<char> family_letters(PairFamily f) {
  if (f == PairFamily::heisenberg) return {'X', 'Y', 'Z'};
  return {'X', 'Y'};
}

/// Identity shift putting the K4 block ground energy at zero.
inline double k4_shift(PairFamily f) { return f == PairFamily::heisenberg ? 6.0 : 4.0; }

/// Adds the heavy K4 block on sites base..base+3: all six pair interactions
/// plus the identity shift.
inline void add_k4_block(Hamiltonian& h, PairFamily f, int base) {
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      for (char s : family_letters(f))
        h.add_pauli({base + i, base + j}, std::string(2, s), 1.0);
  h.add_identity(k4_shift(f));
}

inline Hamiltonian k4_block_hamiltonian(PairFamily f) {
  Hamiltonian h;
  h.n = 4;
  add_k4_block(h, f, 0);
  return h;
}

/// Singlet pairing |psi-> on (a,b) x |psi-> on (c,d) as a 16-dim vector.
inline Vec singlet_pair_state(int a, int b, int c, int d) {
  Vec v = Vec::Zero(16);
  // (|01> - |10>)/sqrt(2) on (a,b) tensored with the same on (c,d)
  for (auto [da, db, s1] : {std::tuple{0, 1, 1.0}, std::tuple{1, 0, -1.0}})
    for (auto [dc, dd, s2] : {std::tuple{0, 1, 1.0}, std::tuple{1, 0, -1.0}}) {
      std::array<int, 4> dig{};
      dig[a] = da;
      dig[b] = db;
      dig[c] = dc;
      dig[d] = dd;
      v(dig[0] * 8 + dig[1] * 4 + dig[2] * 2 + dig[3]) += 0.5 * s1 * s2;
    }
  return v;
}

/// Logical basis of the K4 ground space: |0L> = |psi->_13 |psi->_24 and
/// |1L> orthogonal to it inside the singlet-pair plane.
inline Mat k4_logical_basis() {
  Vec s13_24 = singlet_pair_state(0, 2, 1, 3);
  Vec s12_34 = singlet_pair_state(0, 1, 2, 3);
  Mat basis(16, 2);
  basis.col(0) = s13_24;
  basis.col(1) = (2.0 / std::sqrt(3.0)) * s12_34 - (1.0 / std::sqrt(3.0)) * s13_24;
  return basis;
}

/// Encoding of n logical qubits into n K4 blocks of four physical qubits.
inline Encoding k4_encoding(int n_logical) {
  Mat basis = k4_logical_basis();
  Locality loc;
  loc.n_in = n_logical;
  loc.d_in = 2;
  loc.n_out = 4 * n_logical;
  loc.d_out = 2;
  for (int i = 0; i < n_logical; ++i) {
    SiteBlock b;
    b.orig_site = i;
    b.dim_site = 2;
    b.sim_sites = {4 * i, 4 * i + 1, 4 * i + 2, 4 * i + 3};
    b.v = basis;
    b.pe = Mat::Ones(1, 1);
    b.qe = Mat::Zero(1, 1);
    loc.blocks.push_back(std::move(b));
  }
  Encoding e;
  e.dim_in = 1L << n_logical;
  e.dim_e = 1;
  e.dim_out = 1L << (4 * n_logical);
  e.proj_p = Mat::Ones(1, 1);
  e.proj_q = Mat::Zero(1, 1);
  e.p = 1;
  e.q = 0;
  e.locality = loc;
  e.v = global_isometry_from_blocks(loc, e.e_factors);
  return e;
}

/// Logical form of Pi_- X_i X_j Pi_- for a pair inside one block (0-based).
inline Mat k4_pair_logical(int i, int j) {
  require(i != j && i >= 0 && i < 4 && j >= 0 && j < 4, Err::BadPair, "need two distinct sites");
  Mat basis = k4_logical_basis();
  Hamiltonian h;
  h.n = 4;
  h.add_pauli({std::min(i, j), std::max(i, j)}, "XX", 1.0);
  return basis.adjoint() * assemble(h).entries * basis;
}

/// Logical form of the projected family interaction Pi_- H_ij Pi_-.
inline Mat k4_family_pair_logical(PairFamily f, int i, int j) {
  require(i != j && i >= 0 && i < 4 && j >= 0 && j < 4, Err::BadPair, "need two distinct sites");
  Mat basis = k4_logical_basis();
  Hamiltonian h;
  h.n = 4;
  for (char s : family_letters(f))
    h.add_pauli({std::min(i, j), std::max(i, j)}, std::string(2, s), 1.0);
  return basis.adjoint() * assemble(h).entries * basis;
}

/// Coefficients of a 2x2 Hermitian operator in the {1, X, Y, Z} basis.
struct OneQubitCoeffs {
  double id = 0, x = 0, y = 0, z = 0;
};

inline OneQubitCoeffs one_qubit_coeffs(const Mat& m) {
  OneQubitCoeffs c;
  c.id = 0.5 * m.trace().real();
  c.x = 0.5 * (pauli_x() * m).trace().real();
  c.y = 0.5 * (pauli_y() * m).trace().real();
  c.z = 0.5 * (pauli_z() * m).trace().real();
  return c;
}

/// Effective logical two-qubit operator from cross-block couplings
/// H2 = sum_ij alpha_ij H_{i,j'}, computed exactly on the 8-qubit register.
inline Mat k4_second_order_logical(PairFamily f, const Eigen::Matrix4d& alpha) {
  Hamiltonian h0;
  h0.n = 8;
  add_k4_block(h0, f, 0);
  add_k4_block(h0, f, 4);
  Mat h0m = assemble(h0).entries;
  auto s0 = diagonalize(DenseOperator{h0m, true});
  long rank = s0.count_below(0.5);
  require(rank == 4, Err::BlockViolation, "two K4 blocks must have a 4-dim ground space");
  Mat excited = s0.eigenvectors.rightCols(s0.dim() - rank);
  Vec inv(s0.dim() - rank);
  for (long i = rank; i < s0.dim(); ++i) inv(i - rank) = 1.0 / s0.eigenvalues(i);
  Mat g_inv = excited * inv.asDiagonal() * excited.adjoint();

  Hamiltonian h2;
  h2.n = 8;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      if (alpha(i, j) == 0.0) continue;
      for (char s : family_letters(f)) h2.add_pauli({i, 4 + j}, std::string(2, s), alpha(i, j));
    }
  Mat h2m = assemble(h2).entries;
  Mat basis = kron(k4_logical_basis(), k4_logical_basis());
  return -(basis.adjoint() * h2m * g_inv * h2m * basis);
}

/// Closed form -(3/8) sum alpha_ij alpha_kl T_ik x T_jl for the Heisenberg
/// family, with T_ii = identity.
inline Mat k4_second_order_closed_form(const Eigen::Matrix4d& alpha) {
  auto t = [&](int i, int k) -> Mat {
    if (i == k) return identity(2);
    return k4_pair_logical(i, k);
  };
  Mat out = Mat::Zero(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k)
        for (int l = 0; l < 4; ++l) {
          double c = alpha(i, j) * alpha(k, l);
          if (c == 0.0) continue;
          out -= (3.0 / 8.0) * c * kron(t(i, k), t(j, l));
        }
  return out;
}

// --- two-block coupling rows -------------------------------------------------

enum class LogicalPair { xx, xz, zx, zz };

inline const char* logical_pair_name(LogicalPair p) {
  switch (p) {
    case LogicalPair::xx: return "XX";
    case LogicalPair::xz: return "XZ";
    case LogicalPair::zx: return "ZX";
    case LogicalPair::zz: return "ZZ";
  }
  return "";
}

/// Cross-block weight pattern whose second-order effective interaction is
/// proportional to the requested logical Pauli pair with the requested sign.
inline Eigen::Matrix4d coupling_row(LogicalPair type, bool positive) {
  Eigen::Matrix4d a = Eigen::Matrix4d::Zero();
  switch (type) {
    case LogicalPair::zz:
      a(0, 0) = 1.0;
      a(2, 2) = positive ? -1.0 : 1.0;
      break;
    case LogicalPair::zx:
      a(0, 2) = 1.0;
      a(0, 0) = -1.0;
      a(2, 1) = positive ? 1.0 : -1.0;
      break;
    case LogicalPair::xz: {
      Eigen::Matrix4d zx = coupling_row(LogicalPair::zx, positive);
      a = zx.transpose();
      break;
    }
    case LogicalPair::xx:
      if (positive) {
        a(0, 0) = 1.0;
        a(1, 1) = -2.0;
        a(2, 2) = 1.0;
      } else {
        a(0, 0) = 35.0;
        a(1, 1) = 5.0;
        a(2, 2) = -3.0;
        a(3, 3) = 5.0;
      }
      break;
  }
  return a;
}

/// Oracle-calibrated row data: the scale in front of the target logical pair
/// and the leftover 1-local/identity pieces that first-order terms cancel.
struct RowCalibration {
  Eigen::Matrix4d alpha;
  double scale = 0.0;          // coefficient of the target pair, > 0
  double residual_2local = 0.0;  // off-target 2-local leakage (should be ~0)
  OneQubitCoeffs local_a;      // 1-local leftover on the first block
  OneQubitCoeffs local_b;      // 1-local leftover on the second block
  double ident = 0.0;          // identity leftover
};

inline RowCalibration calibrate_row(PairFamily f, LogicalPair type, bool positive) {
  static std::map<std::tuple<PairFamily, LogicalPair, bool>, RowCalibration> cache;
  auto key = std::make_tuple(f, type, positive);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  RowCalibration cal;
  cal.alpha = coupling_row(type, positive);
  Mat eff = k4_second_order_logical(f, cal.alpha);
  LocalTerm lt({0, 1}, eff, 1.0);
  auto terms = pauli_decompose(lt, 2, 0.0);
  std::string want = logical_pair_name(type);
  double target_coeff = 0.0;
  for (const auto& t : terms) {
    if (t.sites.size() == 2) {
      if (t.letters == want)
        target_coeff = t.weight;
      else
        cal.residual_2local = std::max(cal.residual_2local, std::abs(t.weight));
    } else if (t.sites.size() == 1) {
      auto& loc = t.sites[0] == 0 ? cal.local_a : cal.local_b;
      if (t.letters == "X") loc.x = t.weight;
      if (t.letters == "Y") loc.y = t.weight;
      if (t.letters == "Z") loc.z = t.weight;
    } else {
      cal.ident = t.weight;
    }
  }
  double sgn = positive ? 1.0 : -1.0;
  require(sgn * target_coeff > 0, Err::BadPair, "coupling row produced the wrong sign");
  require(cal.residual_2local <= 1e-8 * std::abs(target_coeff), Err::BadPair,
          "coupling row leaks onto other logical pairs");
  cal.scale = std::abs(target_coeff);
  cache[key] = cal;
  return cal;
}

// --- full logical-qubit pass --------------------------------------------------

/// Coefficients of the first-order control interactions inside one block:
/// pairs (0,3) and (0,2) span {X_L, Z_L} on the logical qubit.
struct FirstOrderSolve {
  double w_03 = 0.0;  // weight on the (0,3) family interaction
  double w_02 = 0.0;  // weight on the (0,2) family interaction
  double ident = 0.0; // identity produced alongside
};

inline FirstOrderSolve solve_first_order(PairFamily f, double want_x, double want_z) {
  Mat f03 = k4_family_pair_logical(f, 0, 3);
  Mat f02 = k4_family_pair_logical(f, 0, 2);
  auto c03 = one_qubit_coeffs(f03);
  auto c02 = one_qubit_coeffs(f02);
  require(std::abs(c03.x) > 1e-12 && std::abs(c02.z) > 1e-12, Err::BlockViolation,
          "control pairs must span X and Z");
  FirstOrderSolve s;
  s.w_03 = want_x / c03.x;
  s.w_02 = (want_z - s.w_03 * c03.z) / c02.z;
  s.ident = s.w_03 * c03.id + s.w_02 * c02.id;
  return s;
}

/// One 2-local target term of the logical-qubit pass.
struct K4PairJob {
  int i = 0, j = 0;  // logical qubits, i < j
  LogicalPair type = LogicalPair::zz;
  double weight = 0.0;
};

/// Builds the second-order subspace-encoding pass: each logical qubit lives
/// in a K4 block, 2-local terms come from calibrated cross-block couplings,
/// and 1-local targets plus coupling residues are handled at first order.
inline PerturbativeGadget build_k4_pass(int n_logical, const std::vector<K4PairJob>& pairs,
                                        const std::vector<double>& field_x,
                                        const std::vector<double>& field_z, double ident_target,
                                        PairFamily f) {
  require(int(field_x.size()) == n_logical && int(field_z.size()) == n_logical, Err::DimMismatch,
          "field vectors must cover every logical qubit");
  PerturbativeGadget g;
  g.order = 2;
  g.target.n = n_logical;
  g.target.family_tag = "real_2local_with_fields";
  g.h0.n = g.h1.n = g.h2.n = 4 * n_logical;
  g.h1_block_diagonal = (f == PairFamily::heisenberg);

  for (int i = 0; i < n_logical; ++i) {
    add_k4_block(g.h0, f, 4 * i);
    g.block_sites.push_back({4 * i, 4 * i + 1, 4 * i + 2, 4 * i + 3});
  }

  std::vector<double> res_x(n_logical, 0.0), res_z(n_logical, 0.0);
  double res_ident = 0.0;
  for (const auto& job : pairs) {
    require(job.i < job.j && job.j < n_logical, Err::BadPair, "bad logical pair");
    if (job.weight == 0.0) continue;
    std::string letters = logical_pair_name(job.type);
    g.target.add_pauli({job.i, job.j}, letters, job.weight);
    auto cal = calibrate_row(f, job.type, job.weight > 0);
    double mu = std::sqrt(std::abs(job.weight) / cal.scale);
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        if (cal.alpha(a, b) == 0.0) continue;
        for (char s : family_letters(f))
          g.h2.add_pauli({4 * job.i + a, 4 * job.j + b}, std::string(2, s),
                         mu * cal.alpha(a, b));
      }
    double mu2 = mu * mu;
    res_x[job.i] += mu2 * cal.local_a.x;
    res_z[job.i] += mu2 * cal.local_a.z;
    res_x[job.j] += mu2 * cal.local_b.x;
    res_z[job.j] += mu2 * cal.local_b.z;
    res_ident += mu2 * cal.ident;
  }

  double first_order_ident = 0.0;
  for (int i = 0; i < n_logical; ++i) {
    if (field_x[i] != 0.0) g.target.add_pauli({i}, "X", field_x[i]);
    if (field_z[i] != 0.0) g.target.add_pauli({i}, "Z", field_z[i]);
    auto sol = solve_first_order(f, field_x[i] - res_x[i], field_z[i] - res_z[i]);
    for (char s : family_letters(f)) {
      if (sol.w_03 != 0.0)
        g.h1.add_pauli({4 * i + 0, 4 * i + 3}, std::string(2, s), sol.w_03);
      if (sol.w_02 != 0.0)
        g.h1.add_pauli({4 * i + 0, 4 * i + 2}, std::string(2, s), sol.w_02);
    }
    first_order_ident += sol.ident;
  }
  if (ident_target != 0.0) g.target.add_identity(ident_target);
  double ident_fix = ident_target - res_ident - first_order_ident;
  if (ident_fix != 0.0) g.h1.add_identity(ident_fix);

  g.enc = k4_encoding(n_logical);
  return g;
}

}  // namespace hamforge
