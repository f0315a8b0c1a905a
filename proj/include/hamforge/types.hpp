#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace hamforge {

using cxd = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

/// Failure codes raised by library operations.
enum class Err {
  DimensionCap,
  BadSupport,
  BadTerm,
  NotQubit,
  NotHermitian,
  DegenerateCut,
  DimMismatch,
  BadAncilla,
  DegenerateEncoding,
  IsometryViolation,
  BlockViolation,
  CapExceeded,
  OverlapViolation,
  OddYCount,
  BadOperand,
  BadPair,
  BadForm,
  BadKind,
  BadTopology,
  RankMismatch,
  TooFar,
  SubspaceMismatch,
  BudgetViolation,
  NotLocalEncoding,
  RankPNotOne,
  Only1Local,
  UnsupportedFamily,
  RoutingFailure,
  ParseError,
};

inline const char* err_name(Err e) {
  switch (e) {
    case Err::DimensionCap: return "DimensionCap";
    case Err::BadSupport: return "BadSupport";
    case Err::BadTerm: return "BadTerm";
    case Err::NotQubit: return "NotQubit";
    case Err::NotHermitian: return "NotHermitian";
    case Err::DegenerateCut: return "DegenerateCut";
    case Err::DimMismatch: return "DimMismatch";
    case Err::BadAncilla: return "BadAncilla";
    case Err::DegenerateEncoding: return "DegenerateEncoding";
    case Err::IsometryViolation: return "IsometryViolation";
    case Err::BlockViolation: return "BlockViolation";
    case Err::CapExceeded: return "CapExceeded";
    case Err::OverlapViolation: return "OverlapViolation";
    case Err::OddYCount: return "OddYCount";
    case Err::BadOperand: return "BadOperand";
    case Err::BadPair: return "BadPair";
    case Err::BadForm: return "BadForm";
    case Err::BadKind: return "BadKind";
    case Err::BadTopology: return "BadTopology";
    case Err::RankMismatch: return "RankMismatch";
    case Err::TooFar: return "TooFar";
    case Err::SubspaceMismatch: return "SubspaceMismatch";
    case Err::BudgetViolation: return "BudgetViolation";
    case Err::NotLocalEncoding: return "NotLocalEncoding";
    case Err::RankPNotOne: return "RankPNotOne";
    case Err::Only1Local: return "Only1Local";
    case Err::UnsupportedFamily: return "UnsupportedFamily";
    case Err::RoutingFailure: return "RoutingFailure";
    case Err::ParseError: return "ParseError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Err code, const std::string& msg)
      : std::runtime_error(std::string(err_name(code)) + ": " + msg), code_(code) {}
  Err code() const { return code_; }

 private:
  Err code_;
};

[[noreturn]] inline void fail(Err code, const std::string& msg) { throw Error(code, msg); }

inline void require(bool cond, Err code, const std::string& msg) {
  if (!cond) fail(code, msg);
}

/// Numerical tolerances. Defaults are tuned for dense double-precision
/// eigensolvers up to dim 2^14.
struct Tolerances {
  double herm = 1e-10;      // Hermiticity residual
  double orth = 1e-10;      // isometry / projector residual
  double eig = 1e-9;        // eigenpair residual, spectrum comparisons
  double assemble = 1e-9;   // term reassembly residual
  double degeneracy = 1e-8; // eigenvalue tie detection
  double phase = 1e-8;      // leading-component threshold for phase fixing
};

constexpr long kDefaultDimCap = 1 << 14;
constexpr double kDefaultDeltaCap = 1e12;

}  // namespace hamforge
