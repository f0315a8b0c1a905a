#pragma once

#include <random>

#include "hamforge/hamiltonian.hpp"
#include "hamforge/linalg.hpp"

namespace hamforge::test {

inline Mat random_hermitian(long dim, std::mt19937& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Mat m(dim, dim);
  for (long i = 0; i < dim; ++i)
    for (long j = 0; j < dim; ++j) m(i, j) = cxd(g(rng), g(rng));
  return 0.5 * (m + Mat(m.adjoint()));
}

inline Mat random_density(long dim, std::mt19937& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Mat m(dim, dim);
  for (long i = 0; i < dim; ++i)
    for (long j = 0; j < dim; ++j) m(i, j) = cxd(g(rng), g(rng));
  Mat rho = m * m.adjoint();
  return rho / rho.trace().real();
}

inline Vec random_state(long dim, std::mt19937& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vec v(dim);
  for (long i = 0; i < dim; ++i) v(i) = cxd(g(rng), g(rng));
  return v / v.norm();
}

}  // namespace hamforge::test
