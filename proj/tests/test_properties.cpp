#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "corewhile/liveness.hpp"
#include "support/random_gen.hpp"

using namespace corewhile;

namespace {

constexpr uint32_t kSeed = 20240809;
constexpr int kCases = 200;

using namespace corewhile::testgen;
using corewhile::testgen::Rng;

}  // namespace

TEST_CASE("rpos-pstep: steps coincide with position-driven substitution") {
  Rng rng(kSeed);
  auto sp = bool_space({"a", "b"});
  int done = 0;
  for (int trial = 0; trial < 4000 && done < kCases; ++trial) {
    TermPtr p = random_term(rng, sp, 2, true, true);
    CodeMap rho = random_rho(rng, sp, false);
    StateIdx s = static_cast<StateIdx>(pick(rng, 4));
    auto direct = program_steps(sp, rho, {p, s});
    std::vector<Config> via_positions;
    for (const Position& x : positions(p)) {
      TermPtr sub = lookup(p, x);
      for (const Config& inner : program_steps(sp, rho, {sub, s}))
        via_positions.push_back({substitute(p, inner.term, x), inner.state});
    }
    auto contains = [](const std::vector<Config>& v, const Config& c) {
      for (auto& e : v)
        if (e == c) return true;
      return false;
    };
    for (auto& c : direct) CHECK(contains(via_positions, c));
    for (auto& c : via_positions) CHECK(contains(direct, c));
    ++done;
  }
  CHECK(done >= kCases);
}

TEST_CASE("jump-free terms step independently of the code map") {
  Rng rng(kSeed + 1);
  auto sp = bool_space({"a", "b"});
  int done = 0;
  for (int trial = 0; trial < 4000 && done < kCases; ++trial) {
    TermPtr p = random_term(rng, sp, 2, true, false);
    if (!classify(sp, CodeMap(), p).jump_free) continue;
    CodeMap r1 = random_rho(rng, sp, false);
    CodeMap r2 = random_rho(rng, sp, false);
    for (StateIdx s = 0; s < 4; ++s) {
      auto a = program_steps(sp, r1, {p, s});
      auto b = program_steps(sp, r2, {p, s});
      REQUIRE(a.size() == b.size());
      for (size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
    }
    ++done;
  }
  CHECK(done >= kCases);
}

TEST_CASE("code maps agreeing on the jump closure induce the same steps") {
  Rng rng(kSeed + 7);
  auto sp = bool_space({"a", "b"});
  int done = 0;
  for (int trial = 0; trial < 8000 && done < kCases; ++trial) {
    TermPtr p = random_term(rng, sp, 2, true, true);
    CodeMap r1 = random_rho(rng, sp, false);
    auto closure = jumps_closure(r1, p);
    // alter r1 outside the closure
    CodeMap r2 = r1;
    int outside = 17;
    r2 = r2.with(outside, random_term(rng, sp, 1, true, true));
    if (closure.count(outside)) continue;
    for (StateIdx s = 0; s < 4; ++s) {
      auto a = program_steps(sp, r1, {p, s});
      auto b = program_steps(sp, r2, {p, s});
      REQUIRE(a.size() == b.size());
      for (size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
    }
    ++done;
  }
  CHECK(done >= kCases);
}

TEST_CASE("program steps preserve sequentiality") {
  Rng rng(kSeed + 2);
  auto sp = bool_space({"a", "b"});
  int done = 0;
  for (int trial = 0; trial < 8000 && done < kCases; ++trial) {
    TermPtr p = random_term(rng, sp, 2, false, true);
    CodeMap rho = random_rho(rng, sp, true);
    if (!classify(sp, rho, p).sequential) continue;
    for (StateIdx s = 0; s < 4; ++s)
      for (const Config& succ : program_steps(sp, rho, {p, s}))
        CHECK(classify(sp, rho, succ.term).sequential);
    ++done;
  }
  CHECK(done >= kCases);
}

TEST_CASE("determinism: only parallel and await introduce branching") {
  Rng rng(kSeed + 3);
  auto sp = bool_space({"a", "b"});
  int done = 0;
  for (int trial = 0; trial < 4000 && done < kCases; ++trial) {
    TermPtr p = random_term(rng, sp, 2, false, true);
    CodeMap rho = random_rho(rng, sp, true);
    for (StateIdx s = 0; s < 4; ++s) CHECK(program_steps(sp, rho, {p, s}).size() <= 1);
    ++done;
  }
  CHECK(done >= kCases);
}

TEST_CASE("closure rules: seq, parallel, ite, while, await, basic as implications") {
  Rng rng(kSeed + 4);
  auto sp = bool_space({"a", "b"});
  CodeMap rho;
  Rel id = Rel::identity(sp);
  Budget budget;
  int done_seq = 0, done_par = 0, done_ite = 0, done_while = 0, done_await = 0, done_basic = 0;
  for (int trial = 0; trial < 6000 &&
                      (done_seq < kCases || done_par < kCases || done_ite < kCases ||
                       done_while < kCases || done_await < kCases || done_basic < kCases);
       ++trial) {
    // id plus an occasional coreflexive restriction
    Rel r = pick(rng, 3) ? id : Rel(sp, e_and(e_identity(*sp), random_bool_expr(rng, sp)));
    auto [p1, q1] = related_pair(rng, sp);
    auto [p2, q2] = related_pair(rng, sp);
    bool c1 = corresponds(sp, rho, p1, rho, q1, r, budget).has_value();
    bool c2 = corresponds(sp, rho, p2, rho, q2, r, budget).has_value();
    if (!c1 || !c2) continue;

    if (done_seq < kCases) {
      CHECK(corresponds(sp, rho, t_seq(p1, p2), rho, t_seq(q1, q2), r, budget).has_value());
      ++done_seq;
    }
    if (done_par < kCases) {
      CHECK(corresponds(sp, rho, t_parallel({p1, p2}), rho, t_parallel({q1, q2}), r, budget)
                .has_value());
      ++done_par;
    }
    Pred c(sp, random_bool_expr(rng, sp));
    // with sub-identity relations the same condition works on both sides
    if (done_ite < kCases) {
      CHECK(corresponds(sp, rho, t_ite(c, p1, p2), rho, t_ite(c, q1, q2), r, budget).has_value());
      ++done_ite;
    }
    if (done_while < kCases) {
      CHECK(corresponds(sp, rho, t_while(c, p1, p2), rho, t_while(c, q1, q2), r, budget)
                .has_value());
      ++done_while;
    }
    if (done_await < kCases) {
      CHECK(corresponds(sp, rho, t_await(c, p1), rho, t_await(c, q1), r, budget).has_value());
      ++done_await;
    }
    if (done_basic < kCases) {
      Transformer f = random_transformer(rng, sp);
      // basic-corr premise: (f s1, f s2) related for related (s1, s2)
      bool premise = true;
      for (StateIdx a = 0; a < 4 && premise; ++a)
        for (StateIdx b = 0; b < 4 && premise; ++b)
          if (r.eval(a, b)) premise = r.eval(f.apply(a), f.apply(b));
      if (premise) {
        CHECK(corresponds(sp, rho, t_basic(f), rho, t_basic(f), r, budget).has_value());
        ++done_basic;
      }
    }
  }
  CHECK(done_seq >= kCases);
  CHECK(done_par >= kCases);
  CHECK(done_ite >= kCases);
  CHECK(done_while >= kCases);
  CHECK(done_await >= kCases);
  CHECK(done_basic >= kCases);
}

TEST_CASE("atomic sections of terminating bodies correspond to their fused basic") {
  Rng rng(kSeed + 5);
  auto sp = bool_space({"a", "b"});
  CodeMap rho;
  Rel id = Rel::identity(sp);
  int done = 0;
  for (int trial = 0; trial < 2000 && done < kCases; ++trial) {
    TermPtr b1 = t_basic(random_transformer(rng, sp));
    TermPtr b2 = t_basic(random_transformer(rng, sp));
    TermPtr atom = t_atomic(sp, t_seq(b1, b2));
    TermPtr fused = fuse_atomic_basics(atom);
    REQUIRE(fused->kind == TermKind::Basic);
    CHECK(mutually_corresponds(sp, rho, atom, rho, fused, id, Budget{}));
    ++done;
  }
  CHECK(done >= kCases);
}

TEST_CASE("pcorr_steps: right computations replay along witnesses up to length 6") {
  Rng rng(kSeed + 6);
  auto sp = bool_space({"a", "b"});
  CodeMap rho;
  Rel id = Rel::identity(sp);
  Rel bottom = Rel::bottom(sp);
  int done = 0;
  for (int trial = 0; trial < 3000 && done < kCases; ++trial) {
    auto [p, q] = related_pair(rng, sp);
    auto w = corresponds(sp, rho, p, rho, q, id, Budget{});
    if (!w) continue;
    auto comps = enumerate_computations(sp, rho, q, Pred::top(sp), bottom, 6, Budget{});
    for (const Computation& sq : comps) {
      Computation left = replay(*w, sq.configs[0].state, sq, bottom, bottom);
      REQUIRE(left.length() == sq.length());
      for (size_t i = 0; i < sq.length(); ++i) CHECK(left.configs[i].state == sq.configs[i].state);
      ++done;
    }
  }
  CHECK(done >= kCases);
}

TEST_CASE("pcondF: a triple is its family of singleton-precondition triples") {
  Rng rng(kSeed + 8);
  auto sp = bool_space({"a", "b"});
  CodeMap rho;
  Budget budget;
  int done = 0;
  for (int trial = 0; trial < 1500 && done < kCases; ++trial) {
    TermPtr p = random_term(rng, sp, 2, true, false);
    Pred pre = random_pred(rng, sp);
    Pred post = random_pred(rng, sp);
    Rel rely = pick(rng, 2) ? Rel::identity(sp) : random_rel(rng, sp, 20);
    Rel guar = pick(rng, 2) ? Rel::top(sp) : random_rel(rng, sp, 85);
    Triple t = Triple::predicate(sp, rho, rely, pre, p, post, guar);
    bool whole = check_triple(t, budget).pass;
    bool each = true;
    pre.extension().for_each([&](size_t s) {
      Bitset one(sp->state_count());
      one.set(s);
      Triple single = Triple::predicate(sp, rho, rely, Pred::from_states(sp, one), p, post, guar);
      each = each && check_triple(single, budget).pass;
    });
    CHECK(whole == each);
    ++done;
  }
  CHECK(done >= kCases);
}

TEST_CASE("conjunction and disjunction of valid triples stay valid") {
  Rng rng(kSeed + 9);
  auto sp = bool_space({"a", "b"});
  CodeMap rho;
  Budget budget;
  int done = 0;
  for (int trial = 0; trial < 6000 && done < kCases; ++trial) {
    TermPtr p = random_term(rng, sp, 2, true, false);
    Rel r1 = pick(rng, 2) ? Rel::identity(sp) : random_rel(rng, sp, 15);
    Rel r2 = pick(rng, 2) ? Rel::identity(sp) : random_rel(rng, sp, 15);
    Rel g1 = random_rel(rng, sp, 90);
    Rel g2 = random_rel(rng, sp, 90);
    Pred p1 = random_pred(rng, sp), p2 = random_pred(rng, sp);
    Pred q1 = random_pred(rng, sp), q2 = random_pred(rng, sp);
    Triple t1 = Triple::predicate(sp, rho, r1, p1, p, q1, g1);
    Triple t2 = Triple::predicate(sp, rho, r2, p2, p, q2, g2);
    if (!check_triple(t1, budget).pass || !check_triple(t2, budget).pass) continue;
    Rel meet = r1.intersect(r2);
    Triple conj = Triple::predicate(sp, rho, meet, p1 && p2, p, q1 && q2, g1.intersect(g2));
    Triple disj = Triple::predicate(sp, rho, meet, p1 || p2, p, q1 || q2, g1.unite(g2));
    CHECK(check_triple(conj, budget).pass);
    CHECK(check_triple(disj, budget).pass);
    ++done;
  }
  CHECK(done >= kCases);
}

TEST_CASE("split lemma consequence: valid fused triples stay valid after the split") {
  Rng rng(kSeed + 10);
  auto sp = bool_space({"a", "b"});
  CodeMap rho;
  Budget budget;
  int done = 0;
  for (int trial = 0; trial < 20000 && done < kCases; ++trial) {
    Transformer f = random_transformer(rng, sp);
    Transformer g = random_transformer(rng, sp);
    Rel rely = pick(rng, 2) ? Rel::identity(sp) : random_rel(rng, sp, 15);
    // The lemma's sequencing context assumes a reflexive guarantee.
    Rel guar = pick(rng, 2) ? Rel::top(sp) : random_rel(rng, sp, 80).unite(Rel::identity(sp));
    if (!check_split_basic(f, g, rely, guar).pass) continue;
    Pred pre = random_pred(rng, sp);
    Pred post = random_pred(rng, sp);
    Triple fused = Triple::predicate(sp, rho, rely, pre, t_basic(Transformer::composed(f, g)),
                                     post, guar);
    if (!check_triple(fused, budget).pass) continue;
    Triple split = Triple::predicate(sp, rho, rely, pre, t_seq(t_basic(f), t_basic(g)), post,
                                     guar);
    CHECK(check_triple(split, budget).pass);
    ++done;
  }
  CHECK(done >= kCases);
}

TEST_CASE("monotonicity: weaker relies and stronger posts preserve validity") {
  Rng rng(kSeed + 11);
  auto sp = bool_space({"a", "b"});
  CodeMap rho;
  Budget budget;
  int done = 0;
  for (int trial = 0; trial < 4000 && done < kCases; ++trial) {
    TermPtr p = random_term(rng, sp, 2, true, false);
    Rel rely = random_rel(rng, sp, 25);
    Rel guar = random_rel(rng, sp, 85);
    Pred pre = random_pred(rng, sp);
    Pred post = random_pred(rng, sp);
    Triple t = Triple::predicate(sp, rho, rely, pre, p, post, guar);
    if (!check_triple(t, budget).pass) continue;
    // shrink the rely and the pre, grow the post and the guarantee
    Rel rely2 = rely.intersect(random_rel(rng, sp, 60));
    Pred pre2 = pre && random_pred(rng, sp);
    Pred post2 = post || random_pred(rng, sp);
    Rel guar2 = guar.unite(random_rel(rng, sp, 20));
    Triple weaker = Triple::predicate(sp, rho, rely2, pre2, p, post2, guar2);
    CHECK(check_triple(weaker, budget).pass);
    ++done;
  }
  CHECK(done >= kCases);
}

TEST_CASE("relational checker on id pre agrees with the predicate embedding") {
  Rng rng(kSeed + 12);
  auto sp = bool_space({"a", "b"});
  CodeMap rho;
  Budget budget;
  int done = 0;
  for (int trial = 0; trial < 1200 && done < kCases; ++trial) {
    TermPtr p = random_term(rng, sp, 2, true, false);
    Rel rely = pick(rng, 2) ? Rel::identity(sp) : random_rel(rng, sp, 20);
    Rel guar = pick(rng, 2) ? Rel::top(sp) : random_rel(rng, sp, 85);
    Pred post = random_pred(rng, sp);
    // relational post ignoring the start: T x post
    uint64_t n = sp->state_count();
    std::vector<Bitset> rows(n, post.extension());
    Rel post_rel = Rel::from_rows(sp, std::move(rows));
    Triple rel_t = Triple::relational(sp, rho, rely, Rel::identity(sp), p, post_rel, guar);
    Triple pred_t = Triple::predicate(sp, rho, rely, Pred::top(sp), p, post, guar);
    CHECK(check_triple_rel(rel_t, budget).pass == check_triple(pred_t, budget).pass);
    ++done;
  }
  CHECK(done >= kCases);
}

TEST_CASE("chunked relational checking agrees with the naive per-start loop") {
  Rng rng(kSeed + 13);
  auto sp = bool_space({"a", "b"});
  CodeMap rho;
  Budget budget;
  int done = 0;
  for (int trial = 0; trial < 1200 && done < kCases; ++trial) {
    TermPtr p = random_term(rng, sp, 2, true, false);
    Rel rely = pick(rng, 2) ? Rel::identity(sp) : random_rel(rng, sp, 20);
    Rel guar = pick(rng, 2) ? Rel::top(sp) : random_rel(rng, sp, 85);
    Rel pre = random_rel(rng, sp, 40);
    Rel post = random_rel(rng, sp, 70);
    Triple t = Triple::relational(sp, rho, rely, pre, p, post, guar);
    bool chunked = check_triple_rel(t, budget).pass;
    bool naive = true;
    for (StateIdx s0 = 0; s0 < sp->state_count() && naive; ++s0) {
      Triple inst = Triple::predicate(sp, rho, rely, Pred::from_states(sp, pre.row(s0)), p,
                                      Pred::from_states(sp, post.row(s0)), guar);
      naive = check_triple(inst, budget).pass;
    }
    CHECK(chunked == naive);
    ++done;
  }
  CHECK(done >= kCases);
}

TEST_CASE("fairness verdicts are invariant under stem extension of the same lasso") {
  Rng rng(kSeed + 14);
  auto sp = bool_space({"a", "b"});
  int done = 0;
  for (int trial = 0; trial < 3000 && done < kCases; ++trial) {
    TermPtr p = random_term(rng, sp, 2, true, false);
    CodeMap rho;
    Pred pre = random_pred(rng, sp);
    if (pre.is_bottom()) continue;
    auto mode = pick(rng, 2) ? SearchMode::FairOnly : SearchMode::Any;
    std::optional<Lasso> l;
    try {
      l = find_nonterminating(sp, rho, p, pre, mode, Budget{});
    } catch (const ResourceError&) {
      continue;
    }
    if (!l) continue;
    FairVerdict base = is_fair_lasso(sp, rho, *l);
    // unrolling more cycles into the stem denotes the same computation
    Lasso extended;
    extended.stem = lasso_window(*l, 3);
    extended.cycle = l->cycle;
    FairVerdict ext = is_fair_lasso(sp, rho, extended);
    CHECK(base.fair == ext.fair);
    ++done;
  }
  CHECK(done >= kCases);
}
