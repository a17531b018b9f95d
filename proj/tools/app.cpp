#include "app.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "ccwb/bell.hpp"
#include "record.hpp"

namespace ccwb::app {

const char* to_string(Status s) {
  switch (s) {
    case Status::Ok: return "ok";
    case Status::Infeasible: return "infeasible";
    case Status::NotFound: return "not_found";
  }
  return "unknown";
}

namespace {

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

std::string fmt(const geo::Interval& i) { return "(" + fmt(i.lo) + ", " + fmt(i.hi) + ")"; }

std::string fmt(const geo::NullBox& b) { return "u in " + fmt(b.u) + ", v in " + fmt(b.v); }

std::string fmt(const geo::IntervalSet& s) {
  if (s.empty()) return "empty";
  std::string out;
  for (const auto& p : s.parts()) out += (out.empty() ? "" : " u ") + fmt(p);
  return out;
}

void require_kind(const Scenario& s, std::initializer_list<ScenarioKind> allowed, const std::string& command) {
  for (ScenarioKind k : allowed)
    if (s.kind == k) return;
  throw PreconditionError(command + ": not available for " + to_string(s.kind) + " scenarios");
}

struct QuantumInputs {
  std::optional<TensorSplit> split;
  DensityState phi;
};

QuantumInputs quantum_inputs(const Scenario& s) {
  const Field p(s.payload, "payload");
  auto split = split_from(p);
  DensityState phi = state_from(p.at("state"), s.seed, s.tol);
  if (split && split->total_dim() != phi.dim()) p.at("split").fail("split does not match the state dimension");
  return {std::move(split), std::move(phi)};
}

std::pair<Projection, Projection> projection_pair(const Scenario& s, const QuantumInputs& in) {
  const Field p(s.payload, "payload");
  Projection a = projection_from(p.at("a"), in.split, s.tol);
  Projection b = projection_from(p.at("b"), in.split, s.tol);
  if (a.dim() != in.phi.dim()) p.at("a").fail("dimension does not match the state");
  if (b.dim() != in.phi.dim()) p.at("b").fail("dimension does not match the state");
  return {std::move(a), std::move(b)};
}

std::pair<MatrixAlgebra, MatrixAlgebra> algebra_pair(const Scenario& s, const QuantumInputs& in) {
  const Field p(s.payload, "payload");
  const int dim = in.phi.dim();
  if (p.has("n1") || p.has("n2"))
    return {algebra_from(p.at("n1"), dim, in.split, s.tol), algebra_from(p.at("n2"), dim, in.split, s.tol)};
  if (!in.split || in.split->dims.size() != 2)
    throw PreconditionError("payload needs n1 and n2, or a two-factor split");
  return {MatrixAlgebra::factor(*in.split, {0}), MatrixAlgebra::factor(*in.split, {1})};
}

std::string cert_line(const CommonCauseCertificate& c) {
  return "weight " + fmt(c.weight) + ", screening residuals " + fmt(c.residual_screen_c) + " / " +
         fmt(c.residual_screen_cperp) + ", margins " + fmt(c.margin_a) + " / " + fmt(c.margin_b) +
         (c.verified ? ", verified" : ", NOT verified") + (c.is_strong ? ", strong" : "") +
         (c.is_genuine ? ", genuine" : "");
}

// ---------------------------------------------------------------------------

Report analyze_classical(const Scenario& s) {
  const Field p(s.payload, "payload");
  const ClassicalSpace space(p.at("weights").numbers());
  const Event a = space.event(p.at("a").integers());
  const Event b = space.event(p.at("b").integers());
  Report r;
  const double pa = space.prob(a), pb = space.prob(b), pab = space.prob(a & b);
  r.result = {{"p_a", pa}, {"p_b", pb}, {"p_ab", pab}, {"correlation", pab - pa * pb}};
  r.lines.push_back("p(A) = " + fmt(pa) + ", p(B) = " + fmt(pb) + ", p(AB) = " + fmt(pab));
  r.lines.push_back("correlation = " + fmt(pab - pa * pb));
  if (p.has("c")) {
    const Event c = space.event(p.at("c").integers());
    const auto cert = classical_verify_cc(space, a, b, c, s.tol);
    r.result["certificate"] = to_json(cert);
    r.lines.push_back("candidate cause: " + cert_line(cert));
  }
  return r;
}

Report analyze(const Scenario& s) {
  require_kind(s, {ScenarioKind::Quantum, ScenarioKind::Bell, ScenarioKind::Classical}, "analyze");
  if (s.kind == ScenarioKind::Classical) return analyze_classical(s);
  const QuantumInputs in = quantum_inputs(s);
  const Field p(s.payload, "payload");
  Report r;
  r.result["faithful"] = in.phi.faithful();
  r.result["min_eigenvalue"] = in.phi.min_eigenvalue();
  r.lines.push_back("state: dim " + std::to_string(in.phi.dim()) + (in.phi.faithful() ? ", faithful" : ", not faithful"));

  if (p.has("a")) {
    const auto [a, b] = projection_pair(s, in);
    const bool commuting = commute(a.matrix(), b.matrix(), s.tol.comm_tol);
    r.result["commuting"] = commuting;
    if (!commuting) throw PreconditionError("analyze: projections A and B do not commute");
    const double corr = correlation(in.phi, a, b, s.tol);
    r.result["correlation"] = corr;
    r.result["meet_rank"] = lattice_meet(a, b, s.tol).rank();
    r.lines.push_back("correlation phi(AB) - phi(A)phi(B) = " + fmt(corr) + ", meet rank " +
                      std::to_string(r.result["meet_rank"].get<int>()));
    if (corr > s.tol.cc_tol) {
      const RValue rv = reichenbach_r(in.phi, a, b, s.tol);
      r.result["r_value"] = to_json(rv);
      r.lines.push_back("r = " + fmt(rv.r) + " (phi(A^B) = " + fmt(rv.phi_ab) + ", 1 - phi(AvB) = " +
                        fmt(1 - rv.phi_avb) + ")");
    }
    if (p.has("c")) {
      const Projection c = projection_from(p.at("c"), in.split, s.tol);
      const auto cert = quantum_verify_cc(in.phi, a, b, c, s.tol);
      r.result["certificate"] = to_json(cert);
      r.lines.push_back("candidate cause: " + cert_line(cert));
    }
    return r;
  }

  const auto [n1, n2] = algebra_pair(s, in);
  const bool product = is_product_state(in.phi, n1, n2, s.tol);
  r.result["product_state"] = product;
  const auto pair = find_correlated_pair(in.phi, n1, n2, s.tol);
  if (!pair) {
    r.result["correlated_pair"] = nullptr;
    r.lines.push_back(std::string("no correlated pair of projections") + (product ? " (product state)" : ""));
    return r;
  }
  const double corr = correlation(in.phi, pair->first, pair->second, s.tol);
  r.result["correlated_pair"] = {{"a", to_json(pair->first.matrix())},
                                 {"b", to_json(pair->second.matrix())},
                                 {"correlation", corr}};
  r.lines.push_back("correlated pair found: correlation " + fmt(corr) + ", ranks " +
                    std::to_string(pair->first.rank()) + " and " + std::to_string(pair->second.rank()));
  return r;
}

Report find_cc(const Scenario& s) {
  require_kind(s, {ScenarioKind::Quantum, ScenarioKind::Classical}, "find-cc");
  const Field p(s.payload, "payload");
  Report r;
  if (s.kind == ScenarioKind::Classical) {
    const ClassicalSpace space(p.at("weights").numbers());
    const bool exclude = p.has("exclude_trivial") ? p.at("exclude_trivial").value().get<bool>() : true;
    const auto found = classical_find_cc(space, space.event(p.at("a").integers()), space.event(p.at("b").integers()),
                                         exclude, s.tol);
    json causes = json::array();
    for (const auto& c : found) {
      causes.push_back(to_json(c));
      std::string atoms;
      for (int i = 0; i < space.size(); ++i)
        if (*c.classical_cause >> i & 1) atoms += (atoms.empty() ? "" : ",") + std::to_string(i + 1);
      r.lines.push_back("cause {" + atoms + "}: " + cert_line(c));
    }
    r.result["causes"] = std::move(causes);
    if (found.empty()) {
      r.status = Status::NotFound;
      r.lines.push_back("no Reichenbachian common cause among the events of the space");
    }
    return r;
  }

  const QuantumInputs in = quantum_inputs(s);
  const auto [a, b] = projection_pair(s, in);
  const int count = p.has("count") ? p.at("count").integer() : 1;
  if (count < 1) p.at("count").fail("count must be positive");
  if (count == 1) {
    try {
      const auto cert = find_strong_cc(in.phi, a, b, s.tol);
      r.result["certificate"] = to_json(cert);
      r.lines.push_back("strong common cause: " + cert_line(cert));
    } catch (const InfeasibleError& e) {
      r.status = Status::Infeasible;
      r.result["reason"] = e.what();
      r.lines.push_back(std::string("infeasible: ") + e.what());
    }
    return r;
  }
  const auto many = find_multiple_strong_cc(in.phi, a, b, count, s.seed, s.tol);
  json causes = json::array();
  for (const auto& c : many.causes) {
    causes.push_back(to_json(c));
    r.lines.push_back("cause " + std::to_string(causes.size()) + ": " + cert_line(c));
  }
  double separation = geo::inf;
  for (std::size_t i = 0; i < many.causes.size(); ++i)
    for (std::size_t k = i + 1; k < many.causes.size(); ++k)
      separation = std::min(separation, operator_norm(many.causes[i].cause->matrix() - many.causes[k].cause->matrix()));
  r.result["causes"] = std::move(causes);
  r.result["requested"] = count;
  r.result["min_separation"] = many.causes.size() > 1 ? separation : 0.0;
  r.result["shortfall"] = many.shortfall;
  if (many.infeasible) {
    r.status = Status::Infeasible;
    r.lines.push_back("infeasible: no strict subprojection of the meet carries the required weight");
  } else if (many.shortfall) {
    r.status = Status::NotFound;
    r.lines.push_back("found " + std::to_string(many.causes.size()) + " of " + std::to_string(count) + " causes");
  } else {
    r.lines.push_back("minimum pairwise operator-norm separation " + fmt(separation));
  }
  return r;
}

Report genuine_cc(const Scenario& s) {
  require_kind(s, {ScenarioKind::Quantum}, "genuine-cc");
  const Field p(s.payload, "payload");
  const QuantumInputs in = quantum_inputs(s);
  const auto [a, b] = projection_pair(s, in);
  const int budget = p.has("budget") ? p.at("budget").integer() : 50;
  Report r;
  r.result["budget"] = budget;
  const auto cert = search_genuine_cc(in.phi, a, b, budget, s.seed, s.tol);
  if (!cert) {
    r.status = Status::NotFound;
    r.result["certificate"] = nullptr;
    r.lines.push_back("no genuine common cause found within the budget (not a proof of absence)");
    return r;
  }
  r.result["certificate"] = to_json(*cert);
  r.lines.push_back("genuine common cause: " + cert_line(*cert));
  return r;
}

BellOptions bell_options(const Field& p) {
  BellOptions o;
  if (p.has("restarts")) o.restarts = p.at("restarts").integer();
  if (p.has("max_iterations")) o.max_iterations = p.at("max_iterations").integer();
  return o;
}

Report bell(const Scenario& s) {
  require_kind(s, {ScenarioKind::Bell, ScenarioKind::Quantum}, "bell");
  const Field p(s.payload, "payload");
  const QuantumInputs in = quantum_inputs(s);
  const auto [n1, n2] = algebra_pair(s, in);
  const BellReport rep = bell_correlation(in.phi, n1, n2, s.seed, bell_options(p), s.tol);
  Report r;
  json ops = json::array();
  for (const auto& op : rep.optimizers) ops.push_back(to_json(op.matrix()));
  r.result = {{"beta", rep.beta},
              {"bell_correlated", rep.beta > 1.0 + s.tol.bell_tol},
              {"iterations", rep.iterations},
              {"converged", rep.converged},
              {"best_restart", rep.best_restart},
              {"optimizers", std::move(ops)}};
  r.lines.push_back("beta = " + fmt(rep.beta) + (rep.beta > 1.0 + s.tol.bell_tol ? " (Bell correlated)" : ""));
  if (in.split && in.split->dims == std::vector<int>{2, 2} && !p.has("n1")) {
    const double oracle = two_qubit_chsh_oracle(in.phi);
    r.result["two_qubit_oracle"] = oracle;
    r.lines.push_back("two-qubit closed form = " + fmt(oracle));
  }
  return r;
}

Report sample_bell(const Scenario& s) {
  require_kind(s, {ScenarioKind::Bell}, "sample-bell");
  const Field p(s.payload, "payload");
  const std::vector<int> split = p.at("split").integers();
  const Ensemble ensemble = parse_ensemble(p.at("ensemble").text());
  const int n = p.at("n").integer();
  const BellSample sample = sample_bell_fraction(split, ensemble, n, s.seed, bell_options(p), s.tol);
  Report r;
  r.result = {{"n", sample.n},
              {"correlated", sample.correlated},
              {"fraction", sample.fraction},
              {"max_beta", sample.max_beta},
              {"betas", sample.betas}};
  r.lines.push_back(std::to_string(sample.correlated) + " of " + std::to_string(sample.n) + " " +
                    to_string(ensemble) + " states are Bell correlated (fraction " + fmt(sample.fraction) +
                    "), max beta " + fmt(sample.max_beta));
  return r;
}

json region_summary(const geo::Region& v, std::vector<std::string>& lines, const std::string& label) {
  json out = to_json(v);
  lines.push_back(label + ": " + v.kind() + ", null hull " + fmt(v.null_hull()));
  const auto comps = geo::component_completions(v);
  json completions = json::array();
  for (const auto& c : comps) completions.push_back(to_json(c));
  out["component_completions"] = std::move(completions);
  if (comps.size() == 1 && v.bounded()) {
    lines.push_back("  completion: " + fmt(std::get<geo::NullBox>(comps.front().shape())));
    const geo::Region comp = geo::causal_complement(v);
    out["complement"] = to_json(comp);
    std::string wedges;
    for (const auto& w : comp.components()) wedges += (wedges.empty() ? "" : " | ") + fmt(w.null_hull());
    lines.push_back("  complement: " + (wedges.empty() ? std::string("empty") : wedges));
  } else if (comps.size() > 1) {
    lines.push_back("  " + std::to_string(comps.size()) + " components; completions listed per component");
  }
  out["blc"] = to_json(geo::blc(v));
  out["min_time"] = geo::min_time(v);
  return out;
}

Report geometry(const Scenario& s) {
  require_kind(s, {ScenarioKind::Geometry}, "geometry");
  const Field p(s.payload, "payload");
  Report r;
  if (p.has("points")) {
    const Field pts = p.at("points");
    json rel = json::array();
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const auto pq = pts.at(i).numbers();
      if (pq.size() != 4) pts.at(i).fail("expected [t1, x1, t2, x2]");
      const auto c = geo::causal_relation({pq[0], pq[1]}, {pq[2], pq[3]}, s.tol.geo_tol);
      rel.push_back({{"points", pq}, {"relation", geo::to_string(c)}});
      r.lines.push_back("(" + fmt(pq[0]) + ", " + fmt(pq[1]) + ") vs (" + fmt(pq[2]) + ", " + fmt(pq[3]) +
                        "): " + geo::to_string(c));
    }
    r.result["relations"] = std::move(rel);
  }
  if (!p.has("v1")) return r;

  const geo::Region v1 = region_from(p.at("v1"));
  r.result["v1"] = region_summary(v1, r.lines, "V1");
  if (p.has("slice_times")) {
    json slices = json::object();
    for (double t : p.at("slice_times").numbers()) {
      const geo::IntervalSet sl = geo::blc(v1).slice(t);
      slices[fmt(t)] = to_json(sl);
      r.lines.push_back("  BLC(V1) at t = " + fmt(t) + ": " + fmt(sl));
    }
    r.result["v1"]["blc_slices"] = std::move(slices);
  }
  if (!p.has("v2")) return r;

  const geo::Region v2 = region_from(p.at("v2"));
  r.result["v2"] = region_summary(v2, r.lines, "V2");
  const bool spacelike = geo::spacelike_separated(v1, v2, s.tol.geo_tol);
  r.result["spacelike_separated"] = spacelike;
  r.lines.push_back(std::string("V1 and V2 are ") + (spacelike ? "" : "not ") + "spacelike separated");
  if (v1.components().size() == 1 && v2.components().size() == 1) {
    const bool shadow = geo::causal_shadow_check(v1, v2, s.tol.geo_tol);
    r.result["v1_in_shadow_of_v2"] = shadow;
    r.lines.push_back(std::string("V1 is ") + (shadow ? "" : "not ") + "in the causal shadow of V2");
  }
  if (!spacelike) return r;

  const double margin = p.has("margin") ? p.at("margin").number() : 0.5;
  std::optional<double> top;
  if (p.has("top")) top = p.at("top").number();
  const geo::WeakCauseRegion w = geo::weak_cc_region(v1, v2, margin, top, s.tol.geo_tol);
  r.result["weak_cause_region"] = {{"region", to_json(w.region)},
                                   {"completion", to_json(w.completion)},
                                   {"overlap_time", w.overlap_time},
                                   {"inside_pasts", w.inside_pasts},
                                   {"completion_covers", w.completion_covers},
                                   {"disjoint", w.disjoint}};
  const geo::Rect slab = std::get<geo::Rect>(w.region.shape());
  r.lines.push_back("weak common cause region: t in " + fmt(slab.t) + ", x in " + fmt(slab.x));
  r.lines.push_back("  completion: " + fmt(w.completion.null_hull()));
  r.lines.push_back("  checks: inside pasts " + std::string(w.inside_pasts ? "yes" : "no") + ", covers V1 u V2 " +
                    (w.completion_covers ? "yes" : "no") + ", disjoint " + (w.disjoint ? "yes" : "no"));

  const geo::Region v = p.has("v") ? region_from(p.at("v")) : w.region;
  const geo::TildeRegions tilde = geo::tilde_regions(v1, v2, v);
  const double probe = p.has("tilde_time") ? p.at("tilde_time").number() : 0.5 * (slab.t.lo + slab.t.hi);
  r.result["tilde"] = {{"time", probe},
                       {"first", to_json(tilde.first.slice(probe))},
                       {"second", to_json(tilde.second.slice(probe))},
                       {"common", to_json(tilde.common.slice(probe))}};
  r.lines.push_back("  tilde slices at t = " + fmt(probe) + ": first " + fmt(tilde.first.slice(probe)) +
                    ", second " + fmt(tilde.second.slice(probe)) + ", common " + fmt(tilde.common.slice(probe)));
  return r;
}

Report classical_audit(const Scenario& s) {
  require_kind(s, {ScenarioKind::Classical}, "classical-audit");
  const Field p(s.payload, "payload");
  const ClassicalSpace space(p.at("weights").numbers());
  const int cap = p.has("cap") ? p.at("cap").integer() : 12;
  const ClosednessReport rep = classical_closedness_audit(space, cap, s.tol);
  Report r;
  auto labels = [&](Event e) {
    json out = json::array();
    for (int i = 0; i < space.size(); ++i)
      if (e >> i & 1) out.push_back(i + 1);
    return out;
  };
  json uncovered = json::array();
  for (const auto& [a, b] : rep.uncovered) {
    uncovered.push_back({{"a", labels(a)}, {"b", labels(b)}});
    r.lines.push_back("uncovered correlated pair A = " + labels(a).dump() + ", B = " + labels(b).dump());
  }
  r.result = {{"atoms", rep.atoms},
              {"events", 1LL << rep.atoms},
              {"correlated_pairs", rep.correlated_pairs},
              {"covered", rep.covered},
              {"uncovered", std::move(uncovered)},
              {"closed", rep.closed()}};
  r.lines.insert(r.lines.begin(), std::to_string(rep.correlated_pairs) + " correlated pairs, " +
                                      std::to_string(rep.covered) + " with a common cause; space is " +
                                      (rep.closed() ? "" : "not ") + "common cause closed");
  return r;
}

Report toynet_demo(const Scenario& s) {
  require_kind(s, {ScenarioKind::Toynet}, "toynet-demo");
  const Field p(s.payload, "payload");
  const int n = p.at("n_sites").integer();
  const toynet::GateKind gates = toynet::parse_gate_kind(p.has("gates") ? p.at("gates").text() : "swap");
  const int steps = p.has("steps") ? p.at("steps").integer() : 4;
  std::optional<Matrix> given;
  if (gates == toynet::GateKind::Given) given = p.at("gate").matrix();
  const toynet::NetModel net = toynet::build_net(n, gates, s.seed, steps, given);
  const toynet::LatticeRegion d1 = lattice_region_from(p.at("d1")), d2 = lattice_region_from(p.at("d2"));

  DensityState phi = [&] {
    if (p.has("state")) {
      const Field st = p.at("state");
      const std::uint64_t seed = st.has("seed") ? static_cast<std::uint64_t>(st.at("seed").integer()) : s.seed;
      const double mix = st.has("mix") ? st.at("mix").number() : 0.05;
      return toynet::demo_state(n, seed, mix);
    }
    return toynet::demo_state(n, s.seed);
  }();

  Report r;
  const int pairs = p.has("axiom_pairs") ? p.at("axiom_pairs").integer() : 100;
  const toynet::AxiomReport axioms = toynet::check_axioms(net, pairs, derive_seed(s.seed, 1));
  r.result["axioms"] = {{"pairs", axioms.pairs},
                        {"isotony_checked", axioms.isotony_checked},
                        {"einstein_checked", axioms.einstein_checked},
                        {"primitive_checked", axioms.primitive_checked},
                        {"max_isotony_defect", axioms.max_isotony_defect},
                        {"max_einstein_defect", axioms.max_einstein_defect},
                        {"violations", axioms.violations}};
  r.lines.push_back("axioms over " + std::to_string(axioms.pairs) + " region pairs: " +
                    std::to_string(axioms.violations.size()) + " violations (isotony " +
                    std::to_string(axioms.isotony_checked) + ", Einstein causality " +
                    std::to_string(axioms.einstein_checked) + ", primitive causality " +
                    std::to_string(axioms.primitive_checked) + " checks)");

  toynet::DemoOptions options;
  if (p.has("top")) options.top = p.at("top").number();
  const toynet::DemoReport demo = toynet::weak_rccp_demo(net, phi, d1, d2, s.seed, options, s.tol);
  json d{{"outcome", toynet::to_string(demo.outcome)},
         {"d1", to_json(demo.d1)},
         {"d2", to_json(demo.d2)},
         {"d1_hull", to_json(demo.d1_hull)},
         {"d2_hull", to_json(demo.d2_hull)},
         {"snapped_inside_pasts", demo.snapped_inside_pasts},
         {"snapped_disjoint", demo.snapped_disjoint},
         {"algebra_covers", demo.algebra_covers},
         {"meet_in_v", demo.meet_in_v},
         {"cause_in_v", demo.cause_in_v},
         {"independently_verified", demo.independently_verified},
         {"attempts", demo.attempts},
         {"note", demo.note}};
  r.lines.push_back("D1 = " + toynet::describe(d1) + " (" + fmt(demo.d1_hull) + "), D2 = " + toynet::describe(d2) +
                    " (" + fmt(demo.d2_hull) + ")");
  if (demo.slab) {
    d["slab"] = {{"region", to_json(demo.slab->region)},
                 {"completion", to_json(demo.slab->completion)},
                 {"inside_pasts", demo.slab->inside_pasts},
                 {"completion_covers", demo.slab->completion_covers},
                 {"disjoint", demo.slab->disjoint}};
    const geo::Rect slab = std::get<geo::Rect>(demo.slab->region.shape());
    r.lines.push_back("slab V: t in " + fmt(slab.t) + ", x in " + fmt(slab.x) + "; completion " +
                      fmt(demo.slab->completion.null_hull()));
  }
  if (demo.cause_row) {
    d["cause_row"] = to_json(*demo.cause_row);
    r.lines.push_back("lattice snap: " + toynet::describe(*demo.cause_row));
  }
  if (demo.tilde && demo.cause_row) {
    const double t = demo.cause_row->step * net.cell_size;
    d["tilde"] = {{"time", t},
                  {"first", to_json(demo.tilde->first.slice(t))},
                  {"second", to_json(demo.tilde->second.slice(t))},
                  {"common", to_json(demo.tilde->common.slice(t))}};
  }
  if (demo.a) {
    d["a_local"] = to_json(demo.a_local);
    d["b_local"] = to_json(demo.b_local);
    d["a_rank"] = demo.a->rank();
    d["b_rank"] = demo.b->rank();
    d["correlation"] = correlation(phi, *demo.a, *demo.b, s.tol);
  }
  if (demo.certificate) {
    d["certificate"] = to_json(*demo.certificate);
    r.lines.push_back("certificate: " + cert_line(*demo.certificate));
    r.lines.push_back("localized in " + *demo.certificate->localization);
  }
  r.lines.push_back(std::string("outcome: ") + toynet::to_string(demo.outcome) +
                    (demo.note.empty() ? "" : " (" + demo.note + ")"));
  r.result["demo"] = std::move(d);
  if (demo.outcome == toynet::DemoOutcome::NoCorrelatedPair) r.status = Status::NotFound;
  if (demo.outcome == toynet::DemoOutcome::Infeasible) r.status = Status::Infeasible;
  return r;
}

const std::map<std::string, std::function<Report(const Scenario&)>>& commands() {
  static const std::map<std::string, std::function<Report(const Scenario&)>> table{
      {"analyze", analyze},         {"find-cc", find_cc},         {"genuine-cc", genuine_cc},
      {"bell", bell},               {"sample-bell", sample_bell}, {"geometry", geometry},
      {"classical-audit", classical_audit}, {"toynet-demo", toynet_demo}};
  return table;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, _] : commands()) out.push_back(name);
    return out;
  }();
  return names;
}

Report run_command(const std::string& command, const Scenario& scenario) {
  const auto it = commands().find(command);
  if (it == commands().end()) throw ParseError("unknown command '" + command + "'");
  return it->second(scenario);
}

json make_record(const std::string& command, const Scenario& scenario, const Report& report) {
  json tolerances = json::object();
  for (const auto& [k, v] : scenario.tol.as_map()) tolerances[k] = v;
  return {{"command", command},
          {"kind", to_string(scenario.kind)},
          {"name", scenario.name},
          {"seed", scenario.seed},
          {"status", to_string(report.status)},
          {"exit_code", report.status == Status::Ok ? 0 : 1},
          {"tolerances", std::move(tolerances)},
          {"tolerance_overrides", scenario.overrides},
          {"inputs", scenario.payload},
          {"result", report.result}};
}

std::string render_text(const std::string& command, const Scenario& scenario, const Report& report) {
  std::ostringstream os;
  os << "ccwb " << command;
  if (!scenario.name.empty()) os << " -- " << scenario.name;
  os << "\nkind: " << to_string(scenario.kind) << ", seed: " << scenario.seed << "\n";
  for (const auto& line : report.lines) os << line << "\n";
  os << "status: " << to_string(report.status) << "\n";
  return os.str();
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Common-cause workbench: quantum probability, Bell correlations, causal geometry", "ccwb"};
  app.require_subcommand(1);
  std::string scenario_path, out_path, format = "text";
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
  for (const auto& name : command_names()) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--scenario", scenario_path, "scenario file (JSON)")->required();
    sub->add_option("--seed", seed, "override the scenario seed");
    sub->add_option("--out", out_path, "write the report here instead of stdout");
    sub->add_option("--format", format, "text or record")->check(CLI::IsMember({"text", "record"}));
    sub->add_option("--tol-override", overrides, "KEY=VAL tolerance override (repeatable)");
  }

  std::vector<std::string> argv_store{"ccwb"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error (parse): " << e.what() << "\n";
    return exit_code_for(ErrorKind::Parse);
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    Scenario scenario = load_scenario(scenario_path);
    if (seed) scenario.seed = *seed;
    for (const auto& o : overrides) {
      const auto eq = o.find('=');
      if (eq == std::string::npos) throw ParseError("--tol-override expects KEY=VAL, got '" + o + "'");
      double value = 0;
      try {
        value = std::stod(o.substr(eq + 1));
      } catch (const std::exception&) {
        throw ParseError("--tol-override: '" + o.substr(eq + 1) + "' is not a number");
      }
      scenario.tol.set(o.substr(0, eq), value);
      scenario.overrides[o.substr(0, eq)] = value;
    }
    const Report report = run_command(command, scenario);
    const std::string body =
        format == "record" ? dump_record(make_record(command, scenario, report)) : render_text(command, scenario, report);
    if (out_path.empty()) {
      out << body;
    } else {
      std::ofstream f(out_path, std::ios::binary);
      if (!f) throw ParseError("cannot write " + out_path);
      f << body;
    }
    return report.status == Status::Ok ? 0 : 1;
  } catch (const Error& e) {
    err << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error (internal): " << e.what() << "\n";
    return exit_code_for(ErrorKind::Internal);
  }
}

}  // namespace ccwb::app
