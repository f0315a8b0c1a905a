#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hamforge/simcheck.hpp"

namespace hamforge {

struct LatticeEdge {
  int u = 0, v = 0;
  char lu = 'X', lv = 'X';
  double weight = 0.0;
};

struct LatticeParse {
  std::vector<LatticeEdge> edges;
  std::vector<PauliTerm> locals;  // 1-local passthrough terms
  double ident = 0.0;
};

inline LatticeParse parse_lattice_input(const Hamiltonian& h) {
  require(h.d == 2, Err::NotQubit, "routing needs qubits");
  LatticeParse out;
  for (const auto& t : h.terms) {
    require(std::holds_alternative<PauliTerm>(t), Err::BadForm,
            "routing needs Pauli-term input");
    const auto& p = std::get<PauliTerm>(t);
    if (p.is_identity()) {
      out.ident += p.weight;
    } else if (p.sites.size() == 1) {
      out.locals.push_back(p);
    } else if (p.sites.size() == 2) {
      out.edges.push_back({p.sites[0], p.sites[1], p.letters[0], p.letters[1], p.weight});
    } else {
      fail(Err::BadForm, "routing input must be at most 2-local");
    }
  }
  return out;
}

struct RoutedSite {
  int x = 0, y = 0;
  std::string kind;  // site | chain | edge_hub | fork_hub | cross_center | cross_corner
  int round = 0;
};

struct LayoutResult {
  Hamiltonian routed;            // with geometry attached
  std::vector<RoutedSite> sites;
  int rounds = 0;
  double lambda_sim_log10 = 0.0;
  bool certified = false;
  bool weights_exact = true;     // false when log-scale weights were clamped
  std::optional<SimulationReport> report;
  Encoding encoding;             // meaningful for the certified sparse path
  std::vector<std::string> warnings;
};

namespace detail_lattice {

inline double clamp_weight(double log10w, bool& exact) {
  if (std::abs(log10w) > 300.0) {
    exact = false;
    return std::copysign(300.0, log10w);
  }
  return log10w;
}

}  // namespace detail_lattice

/// True when the input already comes with grid coordinates and only couples
/// grid neighbours: the spatially sparse regime with O(1) routing rounds.
inline bool lattice_input_is_sparse(const Hamiltonian& h, const LatticeParse& parse) {
  if (!h.geometry) return false;
  for (int s = 0; s < h.n; ++s)
    if (!h.geometry->count(s)) return false;
  for (const auto& e : parse.edges) {
    auto [r1, c1] = h.geometry->at(e.u);
    auto [r2, c2] = h.geometry->at(e.v);
    if (std::abs(r1 - r2) + std::abs(c1 - c2) != 1) return false;
  }
  return true;
}

/// Sparse routing: double the lattice spacing and subdivide every edge once
/// through a mediator at the midpoint. One perturbative round; certifiable at
/// desk scale.
inline LayoutResult route_sparse(const Hamiltonian& h, const LatticeParse& parse, double eps,
                                 double eta, bool certify, double delta_cap, long dim_cap) {
  LayoutResult res;
  res.rounds = 1;
  int n = h.n;
  int m_total = n + int(parse.edges.size());
  std::vector<PerturbativeGadget> gadgets;
  int next = n;
  for (const auto& e : parse.edges) {
    PauliTerm a({e.u}, std::string(1, e.lu), e.weight);
    PauliTerm b({e.v}, std::string(1, e.lv), 1.0);
    gadgets.push_back(subdivision_gadget(a, b, n, m_total, next++));
  }
  require(!gadgets.empty(), Err::BadForm, "nothing to route");
  auto merged = parallel_merge(gadgets);
  for (const auto& p : parse.locals) {
    merged.target.add(p);
    merged.h1.add(p);
  }
  if (parse.ident != 0.0) {
    merged.target.add_identity(parse.ident);
    merged.h1.add_identity(parse.ident);
  }

  double delta;
  if (certify) {
    SimulationReport rep;
    delta = delta_for(merged, eps, eta, delta_cap, dim_cap, {}, &rep);
    res.report = rep;
    res.certified = true;
  } else {
    double lambda = 0.0;
    for (const auto& g : gadgets) lambda = std::max(lambda, gadget_lambda_bound(g));
    double target_norm = 0.0;
    for (const auto& t : merged.target.terms) target_norm += std::abs(term_weight(t));
    delta = 16.0 * (std::pow(lambda, 6) / (eps * eps) + lambda * lambda / (eta * eta)) +
            2.0 * target_norm + 1.0;
    res.warnings.push_back("uncertified: Delta from the per-gadget scaling rule");
  }
  res.routed = build_simulator(merged, delta);
  res.encoding = merged.enc;

  std::map<int, std::pair<int, int>> geo;
  for (int s = 0; s < n; ++s) {
    auto [r, c] = h.geometry->at(s);
    geo[s] = {2 * r, 2 * c};
    res.sites.push_back({2 * r, 2 * c, "site", 0});
  }
  for (size_t e = 0; e < parse.edges.size(); ++e) {
    auto [r1, c1] = h.geometry->at(parse.edges[e].u);
    auto [r2, c2] = h.geometry->at(parse.edges[e].v);
    geo[n + int(e)] = {r1 + r2, c1 + c2};
    res.sites.push_back({r1 + r2, c1 + c2, "chain", 1});
  }
  res.routed.geometry = geo;
  res.lambda_sim_log10 = std::log10(std::max(1.0, res.routed.max_abs_weight()));
  return res;
}

// --- general routing ----------------------------------------------------------

namespace detail_lattice {

struct AbsEdge {
  int a = 0, b = 0;
  char la = 'X', lb = 'X';
  double logw = 0.0;  // log10 |weight|
  double sign = 1.0;
};

struct AbsNode {
  std::string kind;  // site | edge_hub | fork_hub
  int round = 0;
};

struct Cell {
  int x = 0, y = 0;
  bool operator<(const Cell& o) const { return std::tie(x, y) < std::tie(o.x, o.y); }
};

}  // namespace detail_lattice

/// General routing for arbitrary interaction graphs: subdivide every edge
/// through a hub, fork high-degree vertices down to one connection per
/// interaction letter, lay everything on one row, route each connection on
/// its own track, and resolve intersections with crossing gadgets. Weights
/// follow the per-round scaling rule in log scale; they grow exponentially
/// with the round count, so the emitted instance is structural and the plan
/// carries the weight magnitudes.
inline LayoutResult route_general(const Hamiltonian& h, const LatticeParse& parse, double eps,
                                  double eta) {
  using namespace detail_lattice;
  LayoutResult res;
  res.warnings.push_back("general routing is structural: weights follow the scaling rule and "
                         "certification is out of desk-scale reach");

  // abstract nodes: original sites first
  std::vector<AbsNode> nodes(h.n);
  for (int i = 0; i < h.n; ++i) nodes[i] = {"site", 0};
  std::vector<AbsEdge> edges;
  int round = 1;

  // round 1: edge hubs
  double log_l0 = 0.0;
  for (const auto& e : parse.edges)
    log_l0 = std::max(log_l0, std::log10(std::max(1.0, std::abs(e.weight))));
  double log_delta1 =
      std::log10(16.0) +
      std::max(6.0 * log_l0 - 2.0 * std::log10(eps), 2.0 * log_l0 - 2.0 * std::log10(eta));
  for (const auto& e : parse.edges) {
    int hub = int(nodes.size());
    nodes.push_back({"edge_hub", round});
    double lw = std::log10(std::max(1e-300, std::abs(e.weight)));
    // subdivision halves: sqrt(Delta * w / 2) per side
    double side = 0.5 * (log_delta1 + lw - std::log10(2.0));
    edges.push_back({e.u, hub, e.lu, 'X', side, e.weight >= 0 ? 1.0 : -1.0});
    edges.push_back({hub, e.v, 'X', e.lv, side, 1.0});
  }

  // fork rounds: reduce every vertex to one connection per letter
  auto vertex_letter_degree = [&](int v, char l) {
    int d = 0;
    for (const auto& e : edges)
      if ((e.a == v && e.la == l) || (e.b == v && e.lb == l)) ++d;
    return d;
  };
  bool more = true;
  while (more) {
    more = false;
    for (int v = 0; v < h.n; ++v)
      for (char l : {'X', 'Y', 'Z'})
        if (vertex_letter_degree(v, l) > 1) more = true;
    if (!more) break;
    ++round;
    double log_lk = 0.0;
    for (const auto& e : edges) log_lk = std::max(log_lk, e.logw);
    double log_dk =
        std::log10(16.0) +
        std::max(6.0 * log_lk - 2.0 * std::log10(eps), 2.0 * log_lk - 2.0 * std::log10(eta));
    std::vector<AbsEdge> next_edges;
    std::vector<bool> consumed(edges.size(), false);
    for (int v = 0; v < h.n; ++v) {
      for (char l : {'X', 'Y', 'Z'}) {
        std::vector<size_t> inc;
        for (size_t i = 0; i < edges.size(); ++i) {
          if (consumed[i]) continue;
          if ((edges[i].a == v && edges[i].la == l) || (edges[i].b == v && edges[i].lb == l))
            inc.push_back(i);
        }
        // pair them off through fork hubs
        for (size_t k = 0; k + 1 < inc.size(); k += 2) {
          const AbsEdge& e1 = edges[inc[k]];
          const AbsEdge& e2 = edges[inc[k + 1]];
          consumed[inc[k]] = consumed[inc[k + 1]] = true;
          int o1 = e1.a == v ? e1.b : e1.a;
          char lo1 = e1.a == v ? e1.lb : e1.la;
          int o2 = e2.a == v ? e2.b : e2.a;
          char lo2 = e2.a == v ? e2.lb : e2.la;
          int f = int(nodes.size());
          nodes.push_back({"fork_hub", round});
          double lt = 0.5 * (std::max(e1.logw, e2.logw) + std::log10(2.0));
          // shared-vertex edge, two legs, sibling compensation
          next_edges.push_back({v, f, l, 'X', 0.5 * log_dk + lt, 1.0});
          next_edges.push_back({f, o1, 'X', lo1, 0.5 * log_dk + e1.logw - lt, e1.sign});
          next_edges.push_back({f, o2, 'X', lo2, 0.5 * log_dk + e2.logw - lt, e2.sign});
          next_edges.push_back({o1, o2, lo1, lo2, e1.logw + e2.logw - 2.0 * lt, e1.sign * e2.sign});
        }
      }
    }
    for (size_t i = 0; i < edges.size(); ++i)
      if (!consumed[i]) next_edges.push_back(edges[i]);
    edges = std::move(next_edges);
  }

  // degree audit before embedding
  std::vector<int> degree(nodes.size(), 0);
  for (const auto& e : edges) {
    ++degree[e.a];
    ++degree[e.b];
  }
  for (size_t i = 0; i < nodes.size(); ++i)
    require(degree[i] <= 4, Err::RoutingFailure,
            "node degree exceeds 4 after forking; cannot embed");

  // chain subdivision rounds and the crossing round are counted against the
  // track layout below
  const int kSpacing = 20;
  std::vector<int> base_x(nodes.size());
  for (size_t i = 0; i < nodes.size(); ++i) base_x[i] = kSpacing * int(i);
  const int port_dx[4] = {0, 4, -4, 8};

  // assign ports
  std::map<std::pair<int, int>, int> port_of;  // (node, edge idx) -> port
  {
    std::vector<int> used(nodes.size(), 0);
    for (size_t ei = 0; ei < edges.size(); ++ei) {
      port_of[{edges[ei].a, int(ei)}] = used[edges[ei].a]++;
      port_of[{edges[ei].b, int(ei)}] = used[edges[ei].b]++;
    }
  }

  // build cell paths per edge
  struct Path {
    std::vector<Cell> cells;  // from endpoint a to endpoint b inclusive
    int riser_a_col = 0, riser_b_col = 0, track_row = 0;
  };
  std::vector<Path> paths(edges.size());
  auto connector = [&](int node, int port, std::vector<Cell>& cells) {
    int x = base_x[node];
    switch (port) {
      case 0:
        break;  // straight up from the vertex cell
      case 1:
        for (int dx = 1; dx <= 4; ++dx) cells.push_back({x + dx, 0});
        break;
      case 2:
        for (int dx = 1; dx <= 4; ++dx) cells.push_back({x - dx, 0});
        break;
      case 3:
        cells.push_back({x, -1});
        for (int dx = 1; dx <= 8; ++dx) cells.push_back({x + dx, -1});
        cells.push_back({x + 8, 0});
        break;
    }
  };
  for (size_t ei = 0; ei < edges.size(); ++ei) {
    const auto& e = edges[ei];
    int pa = port_of[{e.a, int(ei)}];
    int pb = port_of[{e.b, int(ei)}];
    int ca = base_x[e.a] + port_dx[pa];
    int cb = base_x[e.b] + port_dx[pb];
    int row = 4 * (int(ei) + 1);
    Path p;
    p.riser_a_col = ca;
    p.riser_b_col = cb;
    p.track_row = row;
    p.cells.push_back({base_x[e.a], 0});
    connector(e.a, pa, p.cells);
    for (int y = 1; y <= row; ++y) p.cells.push_back({ca, y});
    int step = ca < cb ? 1 : -1;
    for (int x = ca + step; x != cb; x += step) p.cells.push_back({x, row});
    for (int y = row; y >= 1; --y) p.cells.push_back({cb, y});
    {
      std::vector<Cell> back;
      connector(e.b, pb, back);
      std::reverse(back.begin(), back.end());
      for (auto& c : back) p.cells.push_back(c);
    }
    p.cells.push_back({base_x[e.b], 0});
    paths[ei] = std::move(p);
  }

  // locate crossings: a non-endpoint cell shared by two different paths
  std::set<Cell> node_cells;
  for (size_t i = 0; i < nodes.size(); ++i) node_cells.insert({base_x[int(i)], 0});
  std::map<Cell, std::vector<int>> users;
  for (size_t ei = 0; ei < edges.size(); ++ei)
    for (const auto& c : paths[ei].cells)
      if (!node_cells.count(c)) users[c].push_back(int(ei));
  std::set<Cell> crossings;
  for (auto& [cell, who] : users) {
    if (who.size() == 1) continue;
    require(who.size() == 2, Err::RoutingFailure, "more than two chains meet at one cell");
    crossings.insert(cell);
  }

  // rounds: chain subdivisions (log2 of the longest path) plus one crossing
  // round when needed
  size_t longest = 1;
  for (const auto& p : paths) longest = std::max(longest, p.cells.size());
  int chain_rounds = int(std::ceil(std::log2(double(longest))));
  int fork_rounds_end = round;
  round += chain_rounds;
  if (!crossings.empty()) ++round;
  res.rounds = round;

  // per-round heavy scale, in log10: rounds 1..fork_rounds_end were computed
  // on the fly; replay the same recursion for the remaining rounds
  std::vector<double> round_log_delta(round + 1, 0.0);
  {
    double log_lk = log_l0;
    for (int k = 1; k <= round; ++k) {
      round_log_delta[k] =
          std::log10(16.0) + std::max(6.0 * log_lk - 2.0 * std::log10(eps),
                                      2.0 * log_lk - 2.0 * std::log10(eta));
      log_lk = 0.5 * (round_log_delta[k] + log_lk);
    }
  }
  double log_delta_chain = round_log_delta[round];
  res.lambda_sim_log10 = log_delta_chain;

  // materialize sites
  std::map<Cell, int> site_at;
  Hamiltonian routed;
  std::map<int, std::pair<int, int>> geo;
  auto site_id = [&](const Cell& c, const std::string& kind, int rnd) {
    auto it = site_at.find(c);
    if (it != site_at.end()) return it->second;
    int id = int(res.sites.size());
    site_at[c] = id;
    res.sites.push_back({c.x, c.y, kind, rnd});
    geo[id] = {c.y, c.x};  // (row, col)
    return id;
  };
  std::set<Cell> vertex_cells;
  for (size_t i = 0; i < nodes.size(); ++i) {
    site_id({base_x[int(i)], 0}, nodes[i].kind, nodes[i].round);
    vertex_cells.insert({base_x[int(i)], 0});
  }

  bool exact = true;
  auto add_pair = [&](int s1, char l1, int s2, char l2, double logw, double sign) {
    double w = sign * std::pow(10.0, clamp_weight(logw, exact));
    if (s1 > s2) {
      std::swap(s1, s2);
      std::swap(l1, l2);
    }
    routed.add_pauli({s1, s2}, std::string{l1, l2}, w);
  };
  auto add_heavy = [&](int s, double log_delta) {
    double w = std::pow(10.0, clamp_weight(log_delta, exact));
    routed.add_identity(0.5 * w);
    routed.add_pauli({s}, "Z", -0.5 * w);
  };

  // heavy terms for the abstract hubs (their creation round sets the scale)
  for (size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].kind != "site")
      add_heavy(site_at.at({base_x[int(i)], 0}), round_log_delta[nodes[i].round]);

  std::set<int> heavy_done;
  for (size_t ei = 0; ei < edges.size(); ++ei) {
    const auto& p = paths[ei];
    const auto& e = edges[ei];
    double chain_logw = 0.5 * (log_delta_chain + e.logw);
    for (size_t k = 0; k + 1 < p.cells.size(); ++k) {
      Cell c1 = p.cells[k], c2 = p.cells[k + 1];
      bool cross1 = crossings.count(c1), cross2 = crossings.count(c2);
      char l1 = k == 0 ? e.la : 'X';
      char l2 = k + 1 == p.cells.size() - 1 ? e.lb : 'X';
      int s1 = site_id(c1, cross1 ? "cross_center" : "chain", round);
      int s2 = site_id(c2, cross2 ? "cross_center" : "chain", round);
      add_pair(s1, l1, s2, l2, chain_logw, k == 0 ? e.sign : 1.0);
      if (!cross1 && !vertex_cells.count(c1) && k > 0 && heavy_done.insert(s1).second)
        add_heavy(s1, log_delta_chain);
    }
  }
  // crossing boxes: center heavy term plus corner compensation mediators
  for (const auto& c : crossings) {
    int center = site_at.at(c);
    if (heavy_done.insert(center).second) add_heavy(center, log_delta_chain);
    Cell u{c.x - 1, c.y}, v{c.x + 1, c.y}, w{c.x, c.y + 1}, z{c.x, c.y - 1};
    for (auto [p1, p2] : {std::pair{u, w}, {w, v}, {v, z}, {z, u}}) {
      Cell corner{p1.x == c.x ? p2.x : p1.x, p1.y == c.y ? p2.y : p1.y};
      int cid = site_id(corner, "cross_corner", round);
      if (heavy_done.insert(cid).second) add_heavy(cid, log_delta_chain);
      add_pair(site_at.at(p1), 'X', cid, 'X', 0.5 * log_delta_chain, 1.0);
      add_pair(cid, 'X', site_at.at(p2), 'X', 0.5 * log_delta_chain, 1.0);
    }
  }
  for (const auto& p : parse.locals) {
    int s = site_at.at({base_x[p.sites[0]], 0});
    routed.add_pauli({s}, p.letters, p.weight);
  }
  if (parse.ident != 0.0) routed.add_identity(parse.ident);

  routed.n = int(res.sites.size());
  // shift coordinates to be non-negative
  int min_y = 0, min_x = 0;
  for (const auto& s : res.sites) {
    min_y = std::min(min_y, s.y);
    min_x = std::min(min_x, s.x);
  }
  for (auto& s : res.sites) {
    s.y -= min_y;
    s.x -= min_x;
  }
  for (auto& [id, rc] : geo) {
    rc.first -= min_y;
    rc.second -= min_x;
  }
  routed.geometry = geo;
  res.routed = std::move(routed);
  res.weights_exact = exact;
  if (!exact)
    res.warnings.push_back("weights exceeded the floating-point range and were clamped; "
                           "magnitudes are recorded in the plan");
  return res;
}

/// Entry point: picks the sparse or general routing strategy.
inline LayoutResult layout_square_lattice(const Hamiltonian& h, double eps, double eta,
                                          bool certify = true,
                                          double delta_cap = kDefaultDeltaCap,
                                          long dim_cap = kDefaultDimCap) {
  auto parse = parse_lattice_input(h);
  require(!parse.edges.empty(), Err::BadForm, "routing needs at least one 2-local term");
  if (lattice_input_is_sparse(h, parse))
    return route_sparse(h, parse, eps, eta, certify, delta_cap, dim_cap);
  return route_general(h, parse, eps, eta);
}

/// Pure graph check: every 2-local term couples grid-adjacent sites.
inline bool interaction_graph_on_grid(const Hamiltonian& h) {
  if (!h.geometry) return false;
  for (const auto& t : h.terms) {
    auto sup = term_support(t);
    if (sup.size() != 2) continue;
    auto [r1, c1] = h.geometry->at(sup[0]);
    auto [r2, c2] = h.geometry->at(sup[1]);
    if (std::abs(r1 - r2) + std::abs(c1 - c2) != 1) return false;
  }
  return true;
}

}  // namespace hamforge
