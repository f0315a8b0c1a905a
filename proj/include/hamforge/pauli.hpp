#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "hamforge/linalg.hpp"
#include "hamforge/types.hpp"

namespace hamforge {

inline Mat pauli_x() {
  Mat m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

inline Mat pauli_y() {
  Mat m(2, 2);
  m << 0, cxd(0, -1), cxd(0, 1), 0;
  return m;
}

inline Mat pauli_z() {
  Mat m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

inline Mat pauli(char letter) {
  switch (letter) {
    case 'I': return identity(2);
    case 'X': return pauli_x();
    case 'Y': return pauli_y();
    case 'Z': return pauli_z();
  }
  fail(Err::BadTerm, std::string("unknown Pauli letter '") + letter + "'");
}

/// One weighted Pauli string: letters[k] acts on sites[k], identity elsewhere.
/// The empty term (no sites) is the identity term.
struct PauliTerm {
  std::vector<int> sites;
  std::string letters;
  double weight = 0.0;

  PauliTerm() = default;
  PauliTerm(std::vector<int> s, std::string l, double w)
      : sites(std::move(s)), letters(std::move(l)), weight(w) {
    validate();
  }

  void validate() const {
    require(sites.size() == letters.size(), Err::BadTerm, "sites/letters length mismatch");
    for (size_t i = 0; i + 1 < sites.size(); ++i)
      require(sites[i] < sites[i + 1], Err::BadTerm, "sites must be strictly increasing");
    for (char c : letters)
      require(c == 'X' || c == 'Y' || c == 'Z', Err::BadTerm, "letters must be X, Y or Z");
    require(std::isfinite(weight), Err::BadTerm, "weight must be finite");
  }

  int y_count() const {
    int c = 0;
    for (char l : letters)
      if (l == 'Y') ++c;
    return c;
  }

  bool is_identity() const { return sites.empty(); }

  /// Dense matrix of the string on its own support (weight excluded).
  Mat block() const {
    Mat m = Mat::Ones(1, 1);
    for (char l : letters) m = kron(m, pauli(l));
    return m;
  }
};

/// Single-site Pauli action: returns (out_digit, phase) for column digit `c`.
inline std::pair<int, cxd> pauli_column_action(char letter, int c) {
  switch (letter) {
    case 'X': return {1 - c, 1.0};
    case 'Y': return {1 - c, c == 0 ? cxd(0, 1) : cxd(0, -1)};
    case 'Z': return {c, c == 0 ? 1.0 : -1.0};
  }
  fail(Err::BadTerm, "bad letter");
}

/// All Pauli strings (including identity letters) on k qubits, index-ordered
/// with letters from "IXYZ". Used by pauli_decompose.
inline std::string pauli_string_for_index(int k, long idx) {
  static const char* abc = "IXYZ";
  std::string s(k, 'I');
  for (int i = k - 1; i >= 0; --i) {
    s[i] = abc[idx % 4];
    idx /= 4;
  }
  return s;
}

}  // namespace hamforge
