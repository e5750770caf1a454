// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Runs everything in one process so engine caches are shared.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "../support/random_gen.hpp"
#include "corewhile/corpus.hpp"
#include "corewhile/liveness.hpp"
#include "corewhile/model.hpp"
#include "corewhile/report.hpp"

using namespace corewhile;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void criterion(int n, const std::string& name, const std::function<std::string()>& body) {
  auto start = Clock::now();
  std::string detail;
  bool ok = true;
  try {
    detail = body();
  } catch (const std::exception& e) {
    ok = false;
    detail = std::string("exception: ") + e.what();
  }
  if (!ok || detail.rfind("FAIL", 0) == 0) {
    ++failures;
    ok = false;
  }
  double secs = std::chrono::duration<double>(Clock::now() - start).count();
  std::printf("%s criterion %d (%s): %s [%.2fs]\n", ok ? "PASS" : "FAIL", n, name.c_str(),
              detail.c_str(), secs);
  std::fflush(stdout);
}

std::string expect(bool cond, const std::string& ok_msg, const std::string& fail_msg) {
  return cond ? ok_msg : "FAIL: " + fail_msg;
}

Model load(const std::string& name) { return parse_model(corpus_entry(name).text); }

// Fire the first successor whose fired position lies in the given parallel
// component (1-based).
Config step_component(const SpacePtr& sp, const CodeMap& rho, const Config& c, int comp) {
  for (const Config& s : program_steps(sp, rho, c)) {
    Position x = fired_position(sp, rho, c, s);
    if (!x.empty() && x[0] == comp) return s;
  }
  throw ArgError("component " + std::to_string(comp) + " cannot step");
}

}  // namespace

int main() {
  Budget budget;

  criterion(1, "parallel increment under the empty rely", [] {
    Model m = load("parallel_inc");
    Pred pre(m.space, m.queries.at("runs").pre);
    Rel bot(m.space, m.queries.at("runs").rely);
    auto comps = enumerate_computations(m.space, m.rho, m.term("parallel_inc"), pre, bot, 4,
                                        Budget{});
    size_t maximal = 0, skip_x2 = 0, max_psteps = 0;
    for (auto& c : comps) {
      max_psteps = std::max(max_psteps, c.program_step_count());
      if (program_steps(m.space, m.rho, c.configs.back()).empty() &&
          bot.row(c.configs.back().state).none()) {
        ++maximal;
        if (is_skip(c.configs.back().term) &&
            m.space->state_at(c.configs.back().state).get("x").as_int() == 2)
          ++skip_x2;
      }
    }
    CheckResult safety = check_triple(m.triples.at("pinc"), Budget{});
    std::string fails;
    if (comps.size() != 7) fails += " enumeration=" + std::to_string(comps.size()) + " (want 7)";
    if (max_psteps != 3) fails += " longest-program-steps=" + std::to_string(max_psteps);
    if (maximal != 2 || skip_x2 != 2) fails += " maximal computations do not all end at skip,x=2";
    if (!safety.pass) fails += " triple check failed";
    return expect(fails.empty(), "7 computations, up to 3 program steps, triple holds", fails);
  });

  criterion(2, "sequencing without stability refuted by the three-step run", [] {
    Model m = load("seq_skip");
    CheckResult r = check_triple(m.triples.at("bad"), Budget{});
    if (r.pass) return std::string("FAIL: the unsound triple passed");
    if (!r.counterexample) return std::string("FAIL: no counterexample returned");
    const Computation& cex = *r.counterexample;
    bool shape = cex.length() == 4 && cex.kinds[0] == StepKind::Program &&
                 cex.kinds[1] == StepKind::Env && cex.kinds[2] == StepKind::Program;
    bool states = m.space->state_at(cex.configs[1].state).get("b").as_int() == 1 &&
                  m.space->state_at(cex.configs[3].state).get("b").as_int() != 1 &&
                  is_skip(cex.configs[3].term);
    return expect(shape && states,
                  "refuted by the program-env-program run losing b=1 to the environment",
                  "counterexample shape mismatch: " + computation_str(m.space, cex));
  });

  criterion(3, "transformation schema equivalences on a two-boolean space", [] {
    auto sp = testgen::bool_space({"a", "b"});
    CodeMap rho0;
    Rel id = Rel::identity(sp);
    Budget b;
    Pred c(sp, e_var("a"));
    TermPtr pa = t_basic(Transformer(sp, {{"a", e_bool(false)}}));
    TermPtr pb = t_basic(Transformer(sp, {{"b", e_bool(true)}}));
    TermPtr q = t_basic(Transformer(sp, {{"b", e_bool(false)}}));
    std::string fails;
    auto need = [&](bool ok, const char* what) {
      if (!ok) fails += std::string(" ") + what;
    };
    // cond-norm1
    need(mutually_corresponds(sp, rho0, t_seq(t_ite(c, pa, pb), q), rho0,
                              t_ite(c, t_seq(pa, q), t_seq(pb, q)), id, b),
         "cond-norm1");
    // while-norm1
    need(mutually_corresponds(sp, rho0, t_seq(t_while(c, pa, pb), q), rho0,
                              t_while(c, pa, t_seq(pb, q)), id, b),
         "while-norm1");
    // cond-norm2: if C then p else (code j)  ~  cjump !C j p
    CodeMap rho_j = CodeMap().with(3, pb);
    need(mutually_corresponds(sp, rho_j, t_ite(c, pa, rho_j.get(3)), rho_j,
                              t_cjump(!c, 3, pa), id, b),
         "cond-norm2");
    // while-norm2: the two-label loop form
    {
      CodeMap rho_w;
      TermPtr loop = t_cjump(!c, 8, t_seq(pa, t_jump(sp, 7)));
      rho_w = rho_w.with(7, loop).with(8, pb);
      need(mutually_corresponds(sp, rho_w, t_while(c, pa, pb), rho_w, loop, id, b),
           "while-norm2");
    }
    // seq-assoc
    need(mutually_corresponds(sp, rho0, t_seq(pa, t_seq(pb, q)), rho0,
                              t_seq(t_seq(pa, pb), q), id, b),
         "seq-assoc");
    // pcomm
    need(mutually_corresponds(sp, rho0, t_parallel({pa, pb}), rho0, t_parallel({pb, pa}), id, b),
         "pcomm");
    return expect(fails.empty(), "all six schemas mutually correspond in both directions", fails);
  });

  criterion(4, "lowering round-trips on the corpus's sequential components", [] {
    std::string fails;
    auto roundtrip = [&](const Model& m, const std::string& term_name) {
      TermPtr t = m.term(term_name);
      LoweredProgram lp = lower_program(m.space, Program{m.rho, t});
      bool ok = mutually_corresponds(m.space, m.rho, t, lp.program.rho, lp.program.root,
                                     Rel::identity(m.space), Budget{});
      if (!ok) fails += " " + term_name;
    };
    Model peterson = load("peterson");
    for (const char* t : {"cs0", "cs1", "thread0", "thread1", "thread_aux0", "thread_aux1"})
      roundtrip(peterson, t);
    Model inc = load("inc_twice");
    roundtrip(inc, "inc_twice");
    Model sec8 = load("sec8_intro");
    roundtrip(sec8, "p1");
    Model wts = load("while_true_skip");
    roundtrip(wts, "loop");
    return expect(fails.empty(), "every lowered component mutually corresponds to its source",
                  "components failed:" + fails);
  });

  criterion(5, "Peterson safety on the 2048-state space", [] {
    Model m = load("peterson");
    Pred pre(m.space, e_and(e_not(e_var("turn_aux0")), e_not(e_var("turn_aux1"))));
    ConfigGraph g = reachable_graph(m.space, m.rho, m.term("mutex_aux"), pre,
                                    Rel::identity(m.space), Budget{});
    Pred bad = m.pred("cond0") && m.pred("cond1") && Pred(m.space, e_var("turn_aux0")) &&
               Pred(m.space, e_var("turn_aux1"));
    size_t hits = 0;
    for (auto& n : g.nodes) hits += bad.eval(n.state);
    CheckResult triple = check_triple(m.triples.at("peterson_safety"), Budget{});
    std::ostringstream os;
    os << g.nodes.size() << " reachable configurations, no mutual-exclusion violation";
    return expect(hits == 0 && triple.pass && m.space->state_count() == 2048, os.str(),
                  "violations=" + std::to_string(hits));
  });

  criterion(6, "mutex functional triples: semantics, derivations, audits", [] {
    Model m = load("peterson");
    Budget b;
    std::string fails;
    CheckResult goal = check_triple(m.triples.at("mutex_goal"), b);
    if (!goal.pass) fails += " 5.4-goal-semantic";
    CheckResult rgoal = check_triple_rel(m.triples.at("mutex_rgoal"), b);
    if (!rgoal.pass) fails += " relational-goal-semantic";
    Derivation d1 = derive(m.triples.at("mutex_goal"), m.scripts.at("s_mutex"), b);
    if (!d1.complete) fails += " 5.4-derivation(" + d1.first_failure() + ")";
    else if (!soundness_audit(d1, b, false).pass) fails += " 5.4-audit";
    Derivation d2 = derive(m.triples.at("mutex_rgoal"), m.scripts.at("s_mutex_r"), b);
    if (!d2.complete) fails += " relational-derivation(" + d2.first_failure() + ")";
    else if (!soundness_audit(d2, b, false).pass) fails += " relational-audit";
    return expect(fails.empty(),
                  "goal and strengthened relational triple hold, derivations audit clean", fails);
  });

  criterion(7, "Peterson liveness: fair termination, unfair starvation", [] {
    Model m = load("peterson");
    TermPtr mutex = m.term("mutex");
    std::string fails;
    auto fair = find_nonterminating(m.space, m.rho, mutex, Pred::top(m.space),
                                    SearchMode::FairOnly, Budget{});
    if (fair) fails += " a fair non-terminating lasso was found";
    auto any = find_nonterminating(m.space, m.rho, mutex, Pred::top(m.space), SearchMode::Any,
                                   Budget{});
    if (!any) {
      fails += " no unfair lasso found";
    } else if (is_fair_lasso(m.space, m.rho, *any).fair) {
      fails += " the search's witness is fair";
    }
    // The classic starvation scenario: thread0 spins in its busy-wait loop while
    // thread1 stands at turn := false, available and never fired.
    {
      StateIdx s0 = 0;  // all flags false, all sets empty
      Config c{mutex, s0};
      for (int i = 0; i < 4; ++i) c = step_component(m.space, m.rho, c, 1);  // thread0 to its loop
      for (int i = 0; i < 2; ++i) c = step_component(m.space, m.rho, c, 2);  // thread1 to turn:=false
      Lasso l;
      l.stem.configs = {c};
      l.cycle.configs = {c};
      for (int i = 0; i < 3; ++i) {
        Config n = step_component(m.space, m.rho, l.cycle.configs.back(), 1);
        l.cycle.configs.push_back(n);
        l.cycle.kinds.push_back(StepKind::Program);
      }
      if (!(l.cycle.configs.back() == c)) {
        fails += " busy-wait cycle does not close";
      } else {
        FairVerdict v = is_fair_lasso(m.space, m.rho, l);
        bool starved_turn = !v.fair && !v.position.empty() && v.position[0] == 2 &&
                            v.starved_subterm.find("turn := false") != std::string::npos;
        if (!starved_turn)
          fails += " busy-wait lasso verdict mismatch (" +
                   (v.fair ? std::string("fair") : v.starved_subterm) + ")";
      }
    }
    return expect(fails.empty(),
                  "no fair lasso; unfair lassos exist, the busy-wait one starves turn := false",
                  fails);
  });

  criterion(8, "spin-release fairness example", [] {
    Model m = load("sec8_intro");
    TermPtr both = m.term("both");
    Pred start(m.space, e_and(e_eq(e_var("a"), e_int(1)), e_not(e_var("b"))));
    Pred b_true(m.space, e_var("b"));
    std::string fails;
    // every fair computation reaches b: refute the N-condition and the
    // T-condition with invariant !b
    auto n_lasso = find_nonterminating(m.space, m.rho, both, start, SearchMode::FairOnly,
                                       Budget{}, &b_true);
    if (n_lasso) fails += " a fair b-avoiding lasso exists";
    auto t_trace = find_terminating_avoiding(m.space, m.rho, both, start, b_true, Budget{});
    if (t_trace) fails += " a terminating b-avoiding run exists";
    auto unfair = find_nonterminating(m.space, m.rho, both, start, SearchMode::Any, Budget{},
                                      &b_true);
    if (!unfair) fails += " no unfair b-invariant lasso found";
    else if (is_fair_lasso(m.space, m.rho, *unfair).fair) fails += " the b-invariant lasso is fair";
    return expect(fails.empty(), "every fair lasso reaches b; an unfair b-invariant lasso exists",
                  fails);
  });

  criterion(9, "randomized property suites (>= 200 cases each)", [] {
    using namespace corewhile::testgen;
    Rng rng(424242);
    auto sp = bool_space({"a", "b"});
    Budget b;
    std::string fails;
    auto need = [&](bool ok, const char* what) {
      if (!ok) fails += std::string(" ") + what;
    };

    {  // rpos-pstep equivalence
      int done = 0;
      bool ok = true;
      for (int t = 0; t < 4000 && done < 200; ++t) {
        TermPtr p = random_term(rng, sp, 2, true, true);
        CodeMap rho = random_rho(rng, sp, false);
        StateIdx s = static_cast<StateIdx>(pick(rng, 4));
        auto direct = program_steps(sp, rho, {p, s});
        std::vector<Config> via;
        for (const Position& x : positions(p))
          for (const Config& inner : program_steps(sp, rho, {lookup(p, x), s}))
            via.push_back({substitute(p, inner.term, x), inner.state});
        auto contains = [](const std::vector<Config>& v, const Config& c) {
          for (auto& e : v)
            if (e == c) return true;
          return false;
        };
        for (auto& cc : direct) ok = ok && contains(via, cc);
        for (auto& cc : via) ok = ok && contains(direct, cc);
        ++done;
      }
      need(ok && done >= 200, "rpos-pstep");
    }
    {  // rho independence for jump-free terms
      int done = 0;
      bool ok = true;
      for (int t = 0; t < 6000 && done < 200; ++t) {
        TermPtr p = random_term(rng, sp, 2, true, false);
        if (!classify(sp, CodeMap(), p).jump_free) continue;
        CodeMap r1 = random_rho(rng, sp, false), r2 = random_rho(rng, sp, false);
        for (StateIdx s = 0; s < 4; ++s) {
          auto a = program_steps(sp, r1, {p, s});
          auto bb = program_steps(sp, r2, {p, s});
          ok = ok && a.size() == bb.size();
          for (size_t i = 0; ok && i < a.size(); ++i) ok = a[i] == bb[i];
        }
        ++done;
      }
      need(ok && done >= 200, "rho-independence");
    }
    {  // sequentiality preservation
      int done = 0;
      bool ok = true;
      for (int t = 0; t < 8000 && done < 200; ++t) {
        TermPtr p = random_term(rng, sp, 2, false, true);
        CodeMap rho = random_rho(rng, sp, true);
        if (!classify(sp, rho, p).sequential) continue;
        for (StateIdx s = 0; s < 4; ++s)
          for (const Config& succ : program_steps(sp, rho, {p, s}))
            ok = ok && classify(sp, rho, succ.term).sequential;
        ++done;
      }
      need(ok && done >= 200, "sequentiality-preservation");
    }
    {  // pcorr_steps replay up to length 6
      int done = 0;
      bool ok = true;
      CodeMap rho;
      Rel id = Rel::identity(sp), bot = Rel::bottom(sp);
      for (int t = 0; t < 3000 && done < 200; ++t) {
        auto [p, q] = related_pair(rng, sp);
        auto w = corresponds(sp, rho, p, rho, q, id, b);
        if (!w) continue;
        for (const Computation& sq :
             enumerate_computations(sp, rho, q, Pred::top(sp), bot, 6, b)) {
          Computation left = replay(*w, sq.configs[0].state, sq, bot, bot);
          ok = ok && left.length() == sq.length();
          for (size_t i = 0; ok && i < sq.length(); ++i)
            ok = left.configs[i].state == sq.configs[i].state;
          ++done;
        }
      }
      need(ok && done >= 200, "pcorr-steps-replay");
    }
    {  // closure rules as implications
      int done = 0;
      bool ok = true;
      CodeMap rho;
      Rel id = Rel::identity(sp);
      for (int t = 0; t < 4000 && done < 200; ++t) {
        Rel r = pick(rng, 3) ? id : Rel(sp, e_and(e_identity(*sp), random_bool_expr(rng, sp)));
        auto [p1, q1] = related_pair(rng, sp);
        auto [p2, q2] = related_pair(rng, sp);
        if (!corresponds(sp, rho, p1, rho, q1, r, b) || !corresponds(sp, rho, p2, rho, q2, r, b))
          continue;
        Pred c(sp, random_bool_expr(rng, sp));
        ok = ok && corresponds(sp, rho, t_seq(p1, p2), rho, t_seq(q1, q2), r, b).has_value();
        ok = ok && corresponds(sp, rho, t_parallel({p1, p2}), rho, t_parallel({q1, q2}), r, b)
                       .has_value();
        ok = ok && corresponds(sp, rho, t_ite(c, p1, p2), rho, t_ite(c, q1, q2), r, b).has_value();
        ok = ok &&
             corresponds(sp, rho, t_while(c, p1, p2), rho, t_while(c, q1, q2), r, b).has_value();
        ok = ok && corresponds(sp, rho, t_await(c, p1), rho, t_await(c, q1), r, b).has_value();
        ++done;
      }
      need(ok && done >= 200, "closure-rules");
    }
    {  // pcondF
      int done = 0;
      bool ok = true;
      CodeMap rho;
      for (int t = 0; t < 1200 && done < 200; ++t) {
        TermPtr p = random_term(rng, sp, 2, true, false);
        Pred pre = random_pred(rng, sp), post = random_pred(rng, sp);
        Rel rely = pick(rng, 2) ? Rel::identity(sp) : random_rel(rng, sp, 20);
        Rel guar = pick(rng, 2) ? Rel::top(sp) : random_rel(rng, sp, 85);
        bool whole =
            check_triple(Triple::predicate(sp, rho, rely, pre, p, post, guar), b).pass;
        bool each = true;
        pre.extension().for_each([&](size_t s) {
          Bitset one(sp->state_count());
          one.set(s);
          each = each && check_triple(Triple::predicate(sp, rho, rely, Pred::from_states(sp, one),
                                                        p, post, guar),
                                      b)
                             .pass;
        });
        ok = ok && whole == each;
        ++done;
      }
      need(ok && done >= 200, "pcondF");
    }
    {  // conjunction / disjunction lemma
      int done = 0;
      bool ok = true;
      CodeMap rho;
      for (int t = 0; t < 8000 && done < 200; ++t) {
        TermPtr p = random_term(rng, sp, 2, true, false);
        Rel r1 = pick(rng, 2) ? Rel::identity(sp) : random_rel(rng, sp, 15);
        Rel r2 = pick(rng, 2) ? Rel::identity(sp) : random_rel(rng, sp, 15);
        Rel g1 = random_rel(rng, sp, 90), g2 = random_rel(rng, sp, 90);
        Pred p1 = random_pred(rng, sp), p2 = random_pred(rng, sp);
        Pred q1 = random_pred(rng, sp), q2 = random_pred(rng, sp);
        if (!check_triple(Triple::predicate(sp, rho, r1, p1, p, q1, g1), b).pass) continue;
        if (!check_triple(Triple::predicate(sp, rho, r2, p2, p, q2, g2), b).pass) continue;
        Rel meet = r1.intersect(r2);
        ok = ok && check_triple(Triple::predicate(sp, rho, meet, p1 && p2, p, q1 && q2,
                                                  g1.intersect(g2)),
                                b)
                       .pass;
        ok = ok && check_triple(Triple::predicate(sp, rho, meet, p1 || p2, p, q1 || q2,
                                                  g1.unite(g2)),
                                b)
                       .pass;
        ++done;
      }
      need(ok && done >= 200, "conj-disj");
    }
    {  // split lemma consequence
      int done = 0;
      bool ok = true;
      CodeMap rho;
      for (int t = 0; t < 30000 && done < 200; ++t) {
        Transformer f = random_transformer(rng, sp);
        Transformer g = random_transformer(rng, sp);
        Rel rely = pick(rng, 2) ? Rel::identity(sp) : random_rel(rng, sp, 15);
        Rel guar =
            pick(rng, 2) ? Rel::top(sp) : random_rel(rng, sp, 80).unite(Rel::identity(sp));
        if (!check_split_basic(f, g, rely, guar).pass) continue;
        Pred pre = random_pred(rng, sp), post = random_pred(rng, sp);
        if (!check_triple(Triple::predicate(sp, rho, rely, pre,
                                            t_basic(Transformer::composed(f, g)), post, guar),
                          b)
                 .pass)
          continue;
        ok = ok && check_triple(Triple::predicate(sp, rho, rely, pre,
                                                  t_seq(t_basic(f), t_basic(g)), post, guar),
                                b)
                       .pass;
        ++done;
      }
      need(ok && done >= 200, "split-lemma");
    }
    return expect(fails.empty(), "all eight suites green at 200+ cases", fails);
  });

  if (failures == 0) {
    std::printf("acceptance: all criteria PASS\n");
    return 0;
  }
  std::printf("acceptance: %d criteria FAILED\n", failures);
  return 1;
}
