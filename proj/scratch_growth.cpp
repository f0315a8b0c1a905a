#include "hamforge/lattice.hpp"

#include <iostream>

using namespace hamforge;

int main() {
  for (int n = 4; n <= 9; ++n) {
    Hamiltonian h;
    h.n = n;
    std::map<int, std::pair<int, int>> geo;
    for (int i = 0; i < n; ++i) geo[i] = {0, i};
    h.geometry = geo;
    for (int i = 0; i + 1 < n; ++i) h.add_pauli({i, i + 1}, "XX", 1.0);
    auto res = layout_square_lattice(h, 0.2, 0.2, false);
    std::cout << "P" << n << ": rounds " << res.rounds << " lambda "
              << res.routed.max_abs_weight() << std::endl;
  }
  return 0;
}
