#include "corewhile/report.hpp"

#include <chrono>
#include <sstream>

namespace corewhile {

using nlohmann::json;

json Report::to_json(bool with_timing) const {
  json j;
  j["schema"] = "corewhile-report-v1";
  j["query"] = query;
  j["command"] = command;
  j["verdict"] = pass ? "pass" : "fail";
  j["exit"] = exit_code;
  j["details"] = details;
  if (with_timing) j["timing_ms"] = timing_ms;
  return j;
}

json computation_json(const SpacePtr& space, const Computation& c) {
  json steps = json::array();
  for (size_t i = 0; i < c.configs.size(); ++i) {
    json e;
    e["term"] = term_str(c.configs[i].term);
    e["state"] = space->state_at(c.configs[i].state).str();
    if (i + 1 < c.configs.size())
      e["next_step"] = c.kinds[i] == StepKind::Program ? "program" : "env";
    steps.push_back(e);
  }
  return steps;
}

json lasso_json(const SpacePtr& space, const CodeMap& rho, const Lasso& l) {
  auto part = [&](const Computation& c) {
    json steps = json::array();
    for (size_t i = 0; i < c.configs.size(); ++i) {
      json e;
      e["term"] = term_str(c.configs[i].term);
      e["state"] = space->state_at(c.configs[i].state).str();
      if (i + 1 < c.configs.size()) {
        if (c.kinds[i] == StepKind::Program) {
          e["next_step"] = "program";
          e["fired"] = position_str(fired_position(space, rho, c.configs[i], c.configs[i + 1]));
        } else {
          e["next_step"] = "env";
        }
      }
      steps.push_back(e);
    }
    return steps;
  };
  json j;
  j["stem"] = part(l.stem);
  j["cycle"] = part(l.cycle);
  return j;
}

namespace {

void run_check_triple(const Model& m, const Query& q, const Budget& budget, Report& r) {
  const Triple& t = m.triples.at(q.triple);
  CheckResult res = t.kind == TripleKind::Predicate ? check_triple(t, budget)
                                                    : check_triple_rel(t, budget);
  r.pass = res.pass;
  r.exit_code = res.pass ? 0 : 1;
  r.details["triple"] = t.str();
  r.details["graph_nodes"] = res.graph_nodes;
  r.details["graph_edges"] = res.graph_edges;
  std::ostringstream os;
  os << (res.pass ? "PASS" : "FAIL") << " " << q.triple << " (" << res.graph_nodes << " nodes, "
     << res.graph_edges << " edges)";
  if (!res.pass) {
    r.details["failure"] = res.what;
    os << "\n  " << res.what;
    if (res.counterexample) {
      r.details["counterexample"] = computation_json(m.space, *res.counterexample);
      os << "\n  counterexample: " << computation_str(m.space, *res.counterexample);
    }
    if (res.failing_start)
      r.details["failing_start"] = m.space->state_at(*res.failing_start).str();
  }
  r.human = os.str();
}

void run_derive(const Model& m, const Query& q, const Budget& budget, Report& r, bool seq) {
  const Triple& goal = m.triples.at(q.triple);
  const RuleScript& script = m.scripts.at(q.script);
  Derivation d = seq ? derive_seq(goal, script, budget) : derive(goal, script, budget);
  r.details["derivation"] = d.str();
  r.details["complete"] = d.complete;
  std::ostringstream os;
  if (!d.complete) {
    r.pass = false;
    r.exit_code = 1;
    r.details["failure"] = d.first_failure();
    os << "FAIL " << q.triple << ": " << d.first_failure();
  } else {
    CheckResult audit = soundness_audit(d, budget, false);
    r.details["audit"] = audit.pass ? "pass" : "fail";
    r.pass = audit.pass;
    r.exit_code = audit.pass ? 0 : 1;
    os << (audit.pass ? "PASS " : "AUDIT-FAIL ") << q.triple << " (derivation complete, audit "
       << (audit.pass ? "agrees" : "disagrees") << ")";
  }
  r.human = os.str();
}

void run_corr(const Model& m, const Query& q, const Budget& budget, Report& r, bool mutual) {
  Rel rel = cached_rel(m.space, q.rel);
  TermPtr a = m.terms.at(q.term_a), b = m.terms.at(q.term_b);
  std::ostringstream os;
  if (mutual) {
    bool ok = mutually_corresponds(m.space, m.rho, a, m.rho, b, rel, budget);
    r.pass = ok;
    r.exit_code = ok ? 0 : 1;
    os << (ok ? "PASS" : "FAIL") << " " << q.term_a << " mutually corresponds to " << q.term_b;
  } else {
    auto w = corresponds(m.space, m.rho, a, m.rho, b, rel, budget);
    r.pass = w.has_value();
    r.exit_code = w ? 0 : 1;
    if (w) {
      json pairs = json::array();
      for (auto& [u, v] : w->pairs)
        pairs.push_back(json::array({term_str(u), term_str(v)}));
      r.details["witness_pairs"] = pairs;
      r.details["witness_size"] = w->pairs.size();
    }
    os << (w ? "PASS" : "FAIL") << " " << q.term_a << " corresponds to " << q.term_b << " ("
       << (w ? w->pairs.size() : 0) << " witness pairs)";
  }
  r.human = os.str();
}

void run_lower(const Model& m, const Query& q, Report& r) {
  LoweredProgram lp = lower_program(m.space, Program{m.rho, m.terms.at(q.term_a)});
  std::ostringstream os;
  json listings = json::array();
  for (size_t i = 0; i < lp.listings.size(); ++i) {
    std::string text = lp.listings[i].text();
    listings.push_back(text);
    if (lp.listings.size() > 1) os << "component " << (i + 1) << ":\n";
    os << text;
  }
  r.details["listings"] = listings;
  r.details["lowered_term"] = term_str(lp.program.root);
  json labels = json::object();
  for (auto& [i, t] : lp.program.rho.entries()) labels[std::to_string(i)] = term_str(t);
  r.details["code_map"] = labels;
  r.human = os.str();
}

void run_termination(const Model& m, const Query& q, const Budget& budget, Report& r) {
  Pred pre(m.space, q.pre);
  std::optional<Pred> avoid;
  if (q.avoid) avoid.emplace(m.space, q.avoid);
  auto l = find_nonterminating(m.space, m.rho, m.terms.at(q.term_a), pre,
                               q.fair ? SearchMode::FairOnly : SearchMode::Any, budget,
                               avoid ? &*avoid : nullptr);
  std::ostringstream os;
  r.pass = !l.has_value();
  r.exit_code = l ? 1 : 0;
  r.details["mode"] = q.fair ? "fair" : "any";
  if (l) {
    r.details["lasso"] = lasso_json(m.space, m.rho, *l);
    FairVerdict fv = is_fair_lasso(m.space, m.rho, *l);
    r.details["lasso_fair"] = fv.fair;
    if (!fv.fair) {
      r.details["starved_position"] = position_str(fv.position);
      r.details["starved_subterm"] = fv.starved_subterm;
    }
    os << "FAIL " << q.term_a << ": non-terminating lasso found ("
       << (fv.fair ? "fair" : "unfair, starves " + fv.starved_subterm + " at " +
                                  position_str(fv.position))
       << ")";
  } else {
    os << "PASS " << q.term_a << ": no " << (q.fair ? "fair " : "")
       << "non-terminating lasso exists";
  }
  r.human = os.str();
}

void run_enumerate(const Model& m, const Query& q, const Budget& budget, Report& r) {
  Pred pre(m.space, q.pre);
  Rel rely = cached_rel(m.space, q.rely);
  TermPtr t = m.terms.at(q.term_a);
  auto comps = enumerate_computations(m.space, m.rho, t, pre, rely, q.depth, budget);
  size_t maximal = 0, max_psteps = 0;
  StepCache cache;
  json arr = json::array();
  for (auto& c : comps) {
    bool is_max = program_steps(m.space, m.rho, c.configs.back(), &cache).empty() &&
                  rely.row(c.configs.back().state).none();
    maximal += is_max;
    max_psteps = std::max(max_psteps, c.program_step_count());
    if (arr.size() < 100) {
      json e;
      e["steps"] = computation_json(m.space, c);
      e["maximal"] = is_max;
      arr.push_back(e);
    }
  }
  r.details["count"] = comps.size();
  r.details["maximal"] = maximal;
  r.details["max_program_steps"] = max_psteps;
  r.details["computations"] = arr;
  std::ostringstream os;
  os << comps.size() << " computations to depth " << q.depth << " (" << maximal
     << " maximal, longest program-step count " << max_psteps << ")";
  r.human = os.str();
}

void run_classify(const Model& m, const Query& q, Report& r) {
  TermPtr t = m.terms.at(q.term_a);
  Classification c = classify(m.space, m.rho, t);
  WellFormedness wf = is_well_formed(m.rho, t);
  r.details["jump_free"] = c.jump_free;
  r.details["locally_sequential"] = c.locally_sequential;
  r.details["sequential"] = c.sequential;
  r.details["locally_non_blocking"] = c.locally_non_blocking;
  r.details["non_blocking"] = c.non_blocking;
  r.details["well_formed"] = wf.well_formed;
  r.details["jumps_closure"] = wf.closure;
  r.details["closure_escapes"] = wf.escapes;
  std::ostringstream os;
  os << q.term_a << ": jump_free=" << c.jump_free
     << " locally_sequential=" << c.locally_sequential << " sequential=" << c.sequential
     << " locally_non_blocking=" << c.locally_non_blocking << " non_blocking=" << c.non_blocking;
  if (!wf.escapes.empty()) {
    os << "\n  note: jump closure escapes the stored code map at labels";
    for (int i : wf.escapes) os << ' ' << i;
  }
  r.human = os.str();
}

void run_graph_stats(const Model& m, const Query& q, const Budget& budget, Report& r) {
  Pred pre(m.space, q.pre);
  Rel rely = cached_rel(m.space, q.rely);
  ConfigGraph g = reachable_graph(m.space, m.rho, m.terms.at(q.term_a), pre, rely, budget);
  size_t skip_nodes = 0, program_edges = 0;
  for (auto& n : g.nodes) skip_nodes += is_skip(n.term);
  for (auto& succ : g.succ)
    for (auto& [v, k] : succ) {
      (void)v;
      program_edges += k == StepKind::Program;
    }
  r.details["nodes"] = g.nodes.size();
  r.details["edges"] = g.edge_count;
  r.details["program_edges"] = program_edges;
  r.details["skip_nodes"] = skip_nodes;
  r.details["initial"] = g.initial.size();
  std::ostringstream os;
  os << g.nodes.size() << " nodes, " << g.edge_count << " edges (" << program_edges
     << " program), " << skip_nodes << " skip nodes, " << g.initial.size() << " initial";
  r.human = os.str();
}

}  // namespace

Report run_query(const Model& m, const Query& q, const Budget& budget) {
  Report r;
  r.query = q.name;
  r.command = q.command;
  auto start = std::chrono::steady_clock::now();
  if (q.command == "check-triple" || q.command == "check-triple-rel")
    run_check_triple(m, q, budget, r);
  else if (q.command == "derive")
    run_derive(m, q, budget, r, false);
  else if (q.command == "derive-seq")
    run_derive(m, q, budget, r, true);
  else if (q.command == "check-corr")
    run_corr(m, q, budget, r, false);
  else if (q.command == "check-mutual")
    run_corr(m, q, budget, r, true);
  else if (q.command == "lower")
    run_lower(m, q, r);
  else if (q.command == "check-termination")
    run_termination(m, q, budget, r);
  else if (q.command == "enumerate")
    run_enumerate(m, q, budget, r);
  else if (q.command == "classify")
    run_classify(m, q, r);
  else if (q.command == "graph-stats")
    run_graph_stats(m, q, budget, r);
  else
    throw ArgError("unknown command '" + q.command + "'");
  r.timing_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
                    .count();
  return r;
}

}  // namespace corewhile
