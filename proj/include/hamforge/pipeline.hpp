#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <optional>
#include <string>
#include <vector>

#include "hamforge/classify.hpp"
#include "hamforge/heisenberg.hpp"
#include "hamforge/simcheck.hpp"

namespace hamforge {

struct PassRecord {
  std::string name;
  double delta = 0.0;
  double eps_budget = 0.0, eta_budget = 0.0;
  double eps_measured = 0.0, eta_measured = 0.0;
  int sites_before = 0, sites_after = 0;
  int gadget_count = 0;
  bool perfect = false;
  bool certified = false;
};

struct CompilationPlan {
  std::vector<PassRecord> passes;
  std::vector<std::vector<int>> site_map;  // original site -> simulator sites
  double requested_eps = 0.0, requested_eta = 0.0;
  std::string final_family;
  double lambda_sim = 0.0;      // largest |weight| in the final simulator
  int rounds = 0;               // perturbative rounds
  bool certified = false;
  double composed_delta = 0.0, composed_eta = 0.0, composed_eps = 0.0;
  std::vector<std::string> warnings;
};

struct CompileResult {
  Hamiltonian simulator;
  Encoding encoding;
  CompilationPlan plan;
};

/// Geometric per-stage error split: stage i of `count` receives
/// eps / 2^(count-i+1), so the outermost (last) stage gets the largest share
/// and the chained total stays within the request.
inline std::vector<std::pair<double, double>> budget_split(double eps, double eta, int count) {
  require(eps > 0 && eta > 0, Err::BadTerm, "eps and eta must be positive");
  std::vector<std::pair<double, double>> out;
  for (int i = 1; i <= count; ++i) {
    double f = std::pow(2.0, count - i + 1);
    out.push_back({eps / f, eta / f});
  }
  return out;
}

namespace detail {

/// Rewrites every term of a qubit Hamiltonian as Pauli terms.
inline Hamiltonian to_pauli_form(const Hamiltonian& h) {
  require(h.d == 2, Err::NotQubit, "Pauli form requires qubits");
  Hamiltonian out;
  out.n = h.n;
  out.family_tag = h.family_tag;
  out.geometry = h.geometry;
  std::map<std::pair<std::vector<int>, std::string>, double> merged;
  double ident = 0.0;
  for (const auto& t : h.terms) {
    std::vector<PauliTerm> parts;
    if (std::holds_alternative<PauliTerm>(t))
      parts.push_back(std::get<PauliTerm>(t));
    else
      parts = pauli_decompose(std::get<LocalTerm>(t));
    for (auto& p : parts) {
      if (p.is_identity())
        ident += p.weight;
      else
        merged[{p.sites, p.letters}] += p.weight;
    }
  }
  for (auto& [key, w] : merged)
    if (w != 0.0) out.add_pauli(key.first, key.second, w);
  if (ident != 0.0) out.add_identity(ident);
  return out;
}

inline bool has_odd_y(const Hamiltonian& h) {
  for (const auto& t : h.terms)
    if (std::holds_alternative<PauliTerm>(t) && std::get<PauliTerm>(t).y_count() % 2 == 1)
      return true;
  return false;
}

inline bool has_any_y(const Hamiltonian& h) {
  for (const auto& t : h.terms)
    if (std::holds_alternative<PauliTerm>(t) && std::get<PauliTerm>(t).y_count() > 0) return true;
  return false;
}

/// Cheap upper bound on the operator norm: sum of term norms.
inline double norm_bound(const Hamiltonian& h) {
  double b = 0.0;
  for (const auto& t : h.terms) {
    if (std::holds_alternative<PauliTerm>(t))
      b += std::abs(std::get<PauliTerm>(t).weight);
    else
      b += std::abs(std::get<LocalTerm>(t).weight) * op_norm(std::get<LocalTerm>(t).block);
  }
  return b;
}

/// One stage of the compile chain: either a perturbative gadget or a perfect
/// (penalty-based) simulation.
struct Stage {
  std::string name;
  bool perfect = false;
  PerturbativeGadget gadget;   // perturbative stages
  Hamiltonian perfect_sim;     // perfect stages
  Encoding perfect_enc;
  double perfect_cutoff = 0.0;
  int gadget_count = 1;
};

// --- individual passes, each producing the next Hamiltonian ------------------

inline Stage stage_qudit_to_qubit(const Hamiltonian& h) {
  int qb = 0;
  while ((1 << qb) < h.d) ++qb;
  long bdim = 1L << qb;
  Mat w = Mat::Zero(bdim, h.d);
  for (int i = 0; i < h.d; ++i) w(i, i) = 1.0;

  Stage st;
  st.name = "qudit_to_qubit";
  st.perfect = true;
  double cutoff = norm_bound(h) + 1.0;
  double penalty = 2.0 * cutoff;
  st.perfect_cutoff = cutoff;

  Hamiltonian out;
  out.n = h.n * qb;
  out.d = 2;
  for (const auto& t : h.terms) {
    if (std::holds_alternative<PauliTerm>(t)) {
      fail(Err::NotQubit, "Pauli terms on qudits are not representable");
    }
    const auto& lt = std::get<LocalTerm>(t);
    Mat wk = Mat::Ones(1, 1);
    for (size_t i = 0; i < lt.support.size(); ++i) wk = kron(wk, w);
    std::vector<int> sites;
    for (int s : lt.support)
      for (int b = 0; b < qb; ++b) sites.push_back(s * qb + b);
    out.add(LocalTerm(sites, Mat(wk * lt.block * wk.adjoint()), lt.weight));
  }
  Mat pen = identity(bdim) - w * w.adjoint();
  if (max_abs(pen) > 0.5) {
    for (int s = 0; s < h.n; ++s) {
      std::vector<int> sites;
      for (int b = 0; b < qb; ++b) sites.push_back(s * qb + b);
      out.add(LocalTerm(sites, pen, penalty));
    }
  }
  st.perfect_sim = std::move(out);

  Encoding e = qudit_to_qubit_enc(h.n, h.d);
  Locality loc;
  loc.n_in = h.n;
  loc.d_in = h.d;
  loc.n_out = h.n * qb;
  loc.d_out = 2;
  for (int s = 0; s < h.n; ++s) {
    SiteBlock b;
    b.orig_site = s;
    b.dim_site = h.d;
    for (int k = 0; k < qb; ++k) b.sim_sites.push_back(s * qb + k);
    b.v = w;
    b.pe = Mat::Ones(1, 1);
    b.qe = Mat::Zero(1, 1);
    loc.blocks.push_back(std::move(b));
  }
  e.locality = std::move(loc);
  st.perfect_enc = std::move(e);
  return st;
}

inline Stage stage_complex_to_real(const Hamiltonian& h) {
  Stage st;
  st.name = "complex_to_real";
  st.perfect = true;
  double cutoff = 2.0 * norm_bound(h) + 1.0;
  double penalty = 2.0 * cutoff;
  st.perfect_cutoff = cutoff;

  Hamiltonian out;
  out.n = 2 * h.n;
  for (const auto& t : h.terms) {
    const auto& p = std::get<PauliTerm>(t);
    std::vector<std::pair<int, char>> sl;
    for (size_t i = 0; i < p.sites.size(); ++i) {
      int sys = 2 * p.sites[i] + 1;
      if (p.letters[i] == 'Y') {
        sl.push_back({sys, 'Y'});
        sl.push_back({2 * p.sites[i], 'Y'});  // control ancilla picks up Y too
      } else {
        sl.push_back({sys, p.letters[i]});
      }
    }
    out.add(make_pauli(sl, p.weight));
  }
  // ancilla alignment penalty: sum_i (1 - Y_i' Y_(i+1)')
  for (int i = 0; i + 1 < h.n; ++i) {
    out.add_identity(penalty);
    out.add_pauli({2 * i, 2 * (i + 1)}, "YY", -penalty);
  }
  st.perfect_sim = std::move(out);
  st.perfect_enc = complex_to_real_sim_enc(h.n);
  return st;
}

inline Stage stage_y_elimination(const Hamiltonian& h) {
  Stage st;
  st.name = "y_elimination";
  std::vector<PerturbativeGadget> gadgets;
  Hamiltonian passthrough;
  int next = h.n;
  std::vector<const PauliTerm*> jobs;
  for (const auto& t : h.terms) {
    const auto& p = std::get<PauliTerm>(t);
    if (p.y_count() > 0)
      jobs.push_back(&p);
    else
      passthrough.add(p);
  }
  int m_total = h.n + int(jobs.size());
  for (const auto* p : jobs) {
    require(p->y_count() % 2 == 0, Err::OddYCount, "odd Y count survived the chain");
    gadgets.push_back(y_elimination_gadget(*p, h.n, m_total, next++));
  }
  require(!gadgets.empty(), Err::BadTerm, "nothing to eliminate");
  auto merged = parallel_merge(gadgets);
  for (const auto& t : passthrough.terms) {
    merged.target.terms.push_back(t);
    merged.h1.terms.push_back(t);
  }
  st.gadget_count = int(gadgets.size());
  st.gadget = std::move(merged);
  return st;
}

/// One subdivision round: every Pauli term on more than three sites is cut in
/// half through a fresh mediator.
inline Stage stage_subdivision_round(const Hamiltonian& h) {
  Stage st;
  st.name = "subdivision";
  std::vector<PerturbativeGadget> gadgets;
  Hamiltonian passthrough;
  std::vector<const PauliTerm*> jobs;
  for (const auto& t : h.terms) {
    const auto& p = std::get<PauliTerm>(t);
    if (p.sites.size() > 3)
      jobs.push_back(&p);
    else
      passthrough.add(p);
  }
  int m_total = h.n + int(jobs.size());
  int next = h.n;
  for (const auto* p : jobs) {
    size_t half = (p->sites.size() + 1) / 2;
    PauliTerm a(std::vector<int>(p->sites.begin(), p->sites.begin() + half),
                p->letters.substr(0, half), p->weight);
    PauliTerm b(std::vector<int>(p->sites.begin() + half, p->sites.end()),
                p->letters.substr(half), 1.0);
    gadgets.push_back(subdivision_gadget(a, b, h.n, m_total, next++));
  }
  auto merged = parallel_merge(gadgets);
  for (const auto& t : passthrough.terms) {
    merged.target.terms.push_back(t);
    merged.h1.terms.push_back(t);
  }
  st.gadget_count = int(gadgets.size());
  st.gadget = std::move(merged);
  return st;
}

/// One third-order round replacing every 3-local term with two-body pieces.
inline Stage stage_three_to_two_round(const Hamiltonian& h) {
  Stage st;
  st.name = "three_to_two";
  std::vector<PerturbativeGadget> gadgets;
  Hamiltonian passthrough;
  std::vector<const PauliTerm*> jobs;
  for (const auto& t : h.terms) {
    const auto& p = std::get<PauliTerm>(t);
    if (p.sites.size() == 3)
      jobs.push_back(&p);
    else
      passthrough.add(p);
  }
  int m_total = h.n + int(jobs.size());
  int next = h.n;
  for (const auto* p : jobs) {
    PauliTerm a({p->sites[0]}, p->letters.substr(0, 1), p->weight);
    PauliTerm b({p->sites[1]}, p->letters.substr(1, 1), 1.0);
    PauliTerm c({p->sites[2]}, p->letters.substr(2, 1), 1.0);
    gadgets.push_back(three_to_two_gadget(a, b, c, h.n, m_total, next++));
  }
  auto merged = parallel_merge(gadgets);
  for (const auto& t : passthrough.terms) {
    merged.target.terms.push_back(t);
    merged.h1.terms.push_back(t);
  }
  st.gadget_count = int(gadgets.size());
  st.gadget = std::move(merged);
  return st;
}

/// One dedup round: every pair carrying more than one interaction type keeps
/// the first and subdivides the rest onto fresh mediators.
inline Stage stage_pair_dedup_round(const Hamiltonian& h, const std::vector<const PauliTerm*>& dups) {
  Stage st;
  st.name = "pair_dedup";
  std::vector<PerturbativeGadget> gadgets;
  Hamiltonian passthrough;
  std::set<const PauliTerm*> dup_set(dups.begin(), dups.end());
  for (const auto& t : h.terms) {
    const auto& p = std::get<PauliTerm>(t);
    if (!dup_set.count(&p)) passthrough.add(p);
  }
  int m_total = h.n + int(dups.size());
  int next = h.n;
  for (const auto* p : dups) {
    PauliTerm a({p->sites[0]}, p->letters.substr(0, 1), p->weight);
    PauliTerm b({p->sites[1]}, p->letters.substr(1, 1), 1.0);
    gadgets.push_back(subdivision_gadget(a, b, h.n, m_total, next++));
  }
  auto merged = parallel_merge(gadgets);
  for (const auto& t : passthrough.terms) {
    merged.target.terms.push_back(t);
    merged.h1.terms.push_back(t);
  }
  st.gadget_count = int(gadgets.size());
  st.gadget = std::move(merged);
  return st;
}

/// Terms on pairs already carrying a different interaction type.
inline std::vector<const PauliTerm*> find_pair_duplicates(const Hamiltonian& h) {
  std::map<std::pair<int, int>, const PauliTerm*> first;
  std::vector<const PauliTerm*> dups;
  for (const auto& t : h.terms) {
    const auto& p = std::get<PauliTerm>(t);
    if (p.sites.size() != 2) continue;
    auto key = std::make_pair(p.sites[0], p.sites[1]);
    auto it = first.find(key);
    if (it == first.end())
      first[key] = &p;
    else
      dups.push_back(&p);
  }
  return dups;
}

inline Stage stage_logical_qubits(const Hamiltonian& h, PairFamily fam) {
  std::vector<K4PairJob> jobs;
  std::vector<double> fx(h.n, 0.0), fz(h.n, 0.0);
  double ident = 0.0;
  for (const auto& t : h.terms) {
    const auto& p = std::get<PauliTerm>(t);
    if (p.is_identity()) {
      ident += p.weight;
    } else if (p.sites.size() == 1) {
      require(p.letters[0] != 'Y', Err::UnsupportedFamily, "1-local Y cannot reach this pass");
      (p.letters[0] == 'X' ? fx : fz)[p.sites[0]] += p.weight;
    } else if (p.sites.size() == 2) {
      K4PairJob job;
      job.i = p.sites[0];
      job.j = p.sites[1];
      job.weight = p.weight;
      if (p.letters == "XX")
        job.type = LogicalPair::xx;
      else if (p.letters == "XZ")
        job.type = LogicalPair::xz;
      else if (p.letters == "ZX")
        job.type = LogicalPair::zx;
      else if (p.letters == "ZZ")
        job.type = LogicalPair::zz;
      else
        fail(Err::UnsupportedFamily, "2-local term " + p.letters + " cannot reach this pass");
      jobs.push_back(job);
    } else {
      fail(Err::UnsupportedFamily, "term locality too high for the logical-qubit pass");
    }
  }
  Stage st;
  st.name = std::string("logical_qubits_") + family_name(fam);
  st.gadget = build_k4_pass(h.n, jobs, fx, fz, ident, fam);
  st.gadget_count = int(jobs.size());
  return st;
}

/// Builds the full stage chain for the requested family. Weights entering
/// later stages depend on earlier Deltas, so the chain is rebuilt when the
/// budgets change; the stage structure itself is weight-independent.
inline std::vector<Stage> build_stage_chain(const Hamiltonian& input, const std::string& family,
                                            const std::vector<std::pair<double, double>>& budgets,
                                            bool certified, double delta_cap, long dim_cap,
                                            std::vector<SimulationReport>* reports,
                                            std::vector<Hamiltonian>* outputs) {
  std::vector<Stage> stages;
  Hamiltonian cur = input;
  size_t stage_idx = 0;
  auto stage_budget = [&]() -> std::pair<double, double> {
    if (budgets.empty()) return {0.05, 0.05};  // structural dry run
    require(stage_idx < budgets.size(), Err::BadTerm, "budget list too short");
    return budgets[stage_idx];
  };
  auto advance = [&](Stage st) {
    auto [eps_i, eta_i] = stage_budget();
    ++stage_idx;
    if (st.perfect) {
      cur = st.perfect_sim;
      if (reports) {
        SimulationReport rep;
        rep.delta = st.perfect_cutoff;
        rep.p = st.perfect_enc.p;
        rep.q = st.perfect_enc.q;
        rep.pass = true;
        reports->push_back(rep);
      }
    } else {
      double delta;
      if (certified) {
        SimulationReport rep;
        delta = delta_for(st.gadget, eps_i, eta_i, delta_cap, dim_cap, {}, &rep);
        if (reports) reports->push_back(rep);
      } else {
        double lambda = gadget_lambda_bound(st.gadget);
        double c0 = 16.0;
        if (st.gadget.order == 1)
          delta = c0 * (lambda * lambda / eps_i + lambda / eta_i);
        else if (st.gadget.order == 2)
          delta = c0 * (std::pow(lambda, 6) / (eps_i * eps_i) +
                        lambda * lambda / (eta_i * eta_i));
        else
          delta = c0 * (std::pow(lambda, 12) / (eps_i * eps_i * eps_i) +
                        std::pow(lambda, 3) / (eta_i * eta_i * eta_i));
        if (reports) {
          SimulationReport rep;
          rep.delta = delta / 2.0;
          rep.p = 1;
          rep.q = 0;
          reports->push_back(rep);
        }
      }
      st.perfect_cutoff = 0.0;
      cur = build_simulator(st.gadget, delta);
    }
    if (outputs) outputs->push_back(cur);
    stages.push_back(std::move(st));
  };

  // 1. qudits to qubits
  if (cur.d > 2) advance(stage_qudit_to_qubit(cur));
  cur = to_pauli_form(cur);
  // 2. complex to real
  if (has_odd_y(cur)) {
    advance(stage_complex_to_real(cur));
    cur = to_pauli_form(cur);
  }
  if (family == "qubit_pauli") return stages;
  // 3. Y elimination
  if (has_any_y(cur)) {
    advance(stage_y_elimination(cur));
    cur = to_pauli_form(cur);
  }
  if (family == "no_y_pauli") return stages;
  // 4. locality reduction to the 2-local no-Y form
  while (cur.max_locality() > 3) {
    advance(stage_subdivision_round(cur));
    cur = to_pauli_form(cur);
  }
  bool has_3local = false;
  for (const auto& t : cur.terms) has_3local |= term_support(t).size() == 3;
  if (has_3local) {
    advance(stage_three_to_two_round(cur));
    cur = to_pauli_form(cur);
  }
  auto dups = find_pair_duplicates(cur);
  if (!dups.empty()) {
    advance(stage_pair_dedup_round(cur, dups));
    cur = to_pauli_form(cur);
  }
  if (family == "real_2local_with_fields") return stages;
  // 5. logical-qubit pass
  if (family == "heisenberg" || family == "xy") {
    PairFamily fam = family == "heisenberg" ? PairFamily::heisenberg : PairFamily::xy;
    advance(stage_logical_qubits(cur, fam));
    return stages;
  }
  fail(Err::UnsupportedFamily, "unknown target family '" + family + "'");
}

}  // namespace detail

/// Grouped per-pair audit of a family-tagged Hamiltonian: every pair total
/// must be a real multiple of the family interaction, 1-local parts must be
/// absent (identity terms are free).
inline bool audit_family(const Hamiltonian& h, const std::string& family) {
  if (family != "heisenberg" && family != "xy") return true;
  std::map<std::pair<int, int>, std::map<std::string, double>> pairs;
  for (const auto& t : h.terms) {
    if (!std::holds_alternative<PauliTerm>(t)) return false;
    const auto& p = std::get<PauliTerm>(t);
    if (p.is_identity()) continue;
    if (p.sites.size() != 2) return false;
    pairs[{p.sites[0], p.sites[1]}][p.letters] += p.weight;
  }
  bool heis = family == "heisenberg";
  for (auto& [key, letters] : pairs) {
    double xx = letters.count("XX") ? letters["XX"] : 0.0;
    double yy = letters.count("YY") ? letters["YY"] : 0.0;
    double zz = letters.count("ZZ") ? letters["ZZ"] : 0.0;
    for (auto& [l, w] : letters)
      if (l != "XX" && l != "YY" && l != "ZZ" && std::abs(w) > 1e-12) return false;
    if (std::abs(xx - yy) > 1e-9) return false;
    if (heis && std::abs(xx - zz) > 1e-9) return false;
    if (!heis && std::abs(zz) > 1e-12) return false;
  }
  return true;
}

/// Full compile: chains the applicable passes, certifies each stage when
/// requested, and composes the per-stage encodings and budgets.
inline CompileResult compile(const Hamiltonian& input, const std::string& family, double eps,
                             double eta, bool certify = true, double delta_cap = kDefaultDeltaCap,
                             long dim_cap = kDefaultDimCap) {
  require(eps > 0 && eta > 0, Err::BadTerm, "eps and eta must be positive");
  input.validate();
  static const std::set<std::string> kFamilies = {"qubit_pauli", "no_y_pauli",
                                                  "real_2local_with_fields", "heisenberg", "xy"};
  require(kFamilies.count(family), Err::UnsupportedFamily,
          "unknown target family '" + family + "'");

  CompileResult res;
  res.plan.requested_eps = eps;
  res.plan.requested_eta = eta;
  res.plan.final_family = family;
  res.plan.certified = certify;

  // structural dry run to count stages
  auto dry = detail::build_stage_chain(input, family, {}, false, delta_cap, dim_cap, nullptr,
                                       nullptr);
  int count = int(dry.size());
  if (count == 0) {
    // already in the target family: identity plan
    res.simulator = input;
    res.simulator.family_tag = family;
    res.encoding = identity_encoding(input.dim());
    res.plan.composed_eps = 0.0;
    res.plan.composed_eta = 0.0;
    res.plan.composed_delta = std::numeric_limits<double>::infinity();
    res.plan.lambda_sim = input.max_abs_weight();
    for (int s = 0; s < input.n; ++s) res.plan.site_map.push_back({s});
    return res;
  }
  auto budgets = budget_split(eps, eta, count);

  std::vector<SimulationReport> reports;
  std::vector<Hamiltonian> outputs;
  auto stages = detail::build_stage_chain(input, family, budgets, certify, delta_cap, dim_cap,
                                          &reports, &outputs);
  require(int(stages.size()) == count, Err::BadTerm, "stage count changed between runs");

  // compose encodings (innermost first) and budgets
  Encoding total;
  bool first = true;
  bool enc_ok = true;
  double norm_c = certify ? op_norm(assemble(input, dim_cap).entries) : detail::norm_bound(input);
  SimulationReport composed;
  for (int i = 0; i < count; ++i) {
    const auto& st = stages[i];
    const Encoding& enc = st.perfect ? st.perfect_enc : st.gadget.enc;
    if (enc.dim_in == 0 || !enc_ok) {
      enc_ok = false;
    } else {
      total = first ? enc : compose(enc, total);
    }
    PassRecord rec;
    rec.name = st.name;
    rec.perfect = st.perfect;
    rec.eps_budget = budgets[i].first;
    rec.eta_budget = budgets[i].second;
    rec.delta = reports[i].delta;
    rec.eps_measured = reports[i].eps_measured;
    rec.eta_measured = reports[i].eta_measured;
    rec.gadget_count = st.gadget_count;
    rec.sites_before = i == 0 ? input.n : outputs[i - 1].n;
    rec.sites_after = outputs[i].n;
    rec.certified = certify;
    res.plan.passes.push_back(rec);
    if (!st.perfect) ++res.plan.rounds;
    if (first) {
      composed = reports[i];
      first = false;
    } else {
      auto b = compose_budget(reports[i], composed, norm_c);
      composed.delta = b.delta;
      composed.eps_measured = b.eps;
      composed.eta_measured = b.eta;
    }
  }
  res.plan.composed_delta = composed.delta;
  res.plan.composed_eps = composed.eps_measured;
  res.plan.composed_eta = composed.eta_measured;
  res.simulator = outputs.back();
  res.simulator.family_tag = family;
  if (!enc_ok) {
    res.plan.warnings.push_back("register too large for a dense encoding; composition skipped");
    total = Encoding{};
    total.dim_in = 0;
  }
  res.encoding = total;
  res.plan.lambda_sim = res.simulator.max_abs_weight();
  if (enc_ok && res.encoding.locality) {
    const auto& loc = *res.encoding.locality;
    res.plan.site_map.assign(input.n, {});
    for (const auto& b : loc.blocks)
      if (b.orig_site >= 0) res.plan.site_map[b.orig_site] = b.sim_sites;
  }
  if (!certify)
    res.plan.warnings.push_back("compile-only mode: Delta values are formula seeds, uncertified");
  return res;
}

}  // namespace hamforge
