#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "corewhile/correspondence.hpp"
#include "corewhile/transform.hpp"

using namespace corewhile;

namespace {

SpacePtr bool_space(std::vector<std::string> names) {
  std::vector<std::pair<std::string, Domain>> vars;
  for (auto& n : names) vars.emplace_back(n, Domain::boolean());
  return std::make_shared<StateSpace>(std::move(vars));
}

TermPtr flip(const SpacePtr& sp, const std::string& v) {
  return t_basic(Transformer(sp, {{v, e_not(e_var(v))}}));
}

bool mutual_id(const SpacePtr& sp, const CodeMap& r1, const TermPtr& a, const CodeMap& r2,
               const TermPtr& b) {
  return mutually_corresponds(sp, r1, a, r2, b, Rel::identity(sp), Budget{});
}

}  // namespace

TEST_CASE("conditional-sequence normalization distributes the continuation") {
  auto sp = bool_space({"a", "b"});
  Pred c(sp, e_var("a"));
  TermPtr x = flip(sp, "a"), y = flip(sp, "b"), q = flip(sp, "b");
  TermPtr before = t_seq(t_ite(c, x, y), q);
  TermPtr after = normalize_cond_seq(before);
  CHECK(term_eq(after, t_ite(c, t_seq(x, q), t_seq(y, q))));
  CHECK(term_eq(normalize_cond_seq(t_skip()), t_skip()));
  // two rewrite passes for the doubly guarded form
  TermPtr twice = t_seq(t_seq(t_ite(c, x, y), q), q);
  TermPtr exp = t_ite(c, t_seq(t_seq(x, q), q), t_seq(t_seq(y, q), q));
  CHECK(term_eq(normalize_cond_seq(twice), exp));
  // and the rewrite preserves mutual correspondence
  CodeMap rho;
  CHECK(mutual_id(sp, rho, before, rho, after));
}

TEST_CASE("while-sequence normalization pushes the continuation into the else") {
  auto sp = bool_space({"a", "b"});
  Pred c(sp, e_var("a"));
  TermPtr x = flip(sp, "b"), y = flip(sp, "a"), q = flip(sp, "b");
  TermPtr before = t_seq(t_while(c, x, y), q);
  TermPtr after = normalize_while_seq(before);
  CHECK(term_eq(after, t_while(c, x, t_seq(y, q))));
  CHECK(term_eq(normalize_while_seq(t_while(c, x, y)), t_while(c, x, y)));
  TermPtr twice = t_seq(t_seq(t_while(c, x, y), q), q);
  CHECK(term_eq(normalize_while_seq(twice), t_while(c, x, t_seq(t_seq(y, q), q))));
  CodeMap rho;
  CHECK(mutual_id(sp, rho, before, rho, after));
}

TEST_CASE("atomic fusion composes straight-line bodies into one basic") {
  auto sp = bool_space({"a", "b"});
  TermPtr body = t_seq(flip(sp, "a"), flip(sp, "b"));
  TermPtr atom = t_atomic(sp, body);
  TermPtr fused = fuse_atomic_basics(atom);
  REQUIRE(fused->kind == TermKind::Basic);
  CodeMap rho;
  CHECK(mutual_id(sp, rho, atom, rho, fused));
  // guarded awaits and non-straight-line bodies stay put
  TermPtr guarded = t_await(Pred(sp, e_var("a")), body);
  CHECK(term_eq(fuse_atomic_basics(guarded), guarded));
  TermPtr looping = t_atomic(sp, t_while(Pred(sp, e_var("a")), t_skip(), t_skip()));
  CHECK(term_eq(fuse_atomic_basics(looping), looping));
}

TEST_CASE("lower_ite emits a jump over the else branch with a fresh label") {
  auto sp = bool_space({"a", "b"});
  Pred c(sp, e_var("a"));
  TermPtr x = flip(sp, "a"), y = flip(sp, "b");
  TermPtr ite = t_ite(c, x, y);
  CodeMap rho;
  FreshLabels fresh(0);
  auto [lowered, rho2] = lower_ite(ite, rho, fresh);
  REQUIRE(lowered->kind == TermKind::CJump);
  CHECK(lowered->label == 0);
  CHECK(term_eq(lowered->a, x));
  CHECK(term_eq(rho2.get(0), y));
  CHECK(mutually_corresponds(sp, rho2, ite, rho2, lowered, Rel::identity(sp), Budget{}));
  // nested conditionals get distinct labels
  TermPtr nested = t_ite(c, t_ite(c, x, y), y);
  FreshLabels fresh2(0);
  auto [low2, rhoN] = lower_ite(nested, rho, fresh2);
  CHECK(rhoN.entries().size() == 2);
}

TEST_CASE("lower_while emits the two-label loop form") {
  auto sp = bool_space({"a", "b"});
  Pred c(sp, e_var("a"));
  TermPtr body = flip(sp, "a");
  TermPtr els = flip(sp, "b");
  TermPtr w = t_while(c, body, els);
  CodeMap rho;
  FreshLabels fresh(5);
  auto [lowered, rho2] = lower_while(w, rho, fresh);
  REQUIRE(lowered->kind == TermKind::CJump);
  CHECK(term_eq(rho2.get(5), lowered));  // the loop label binds the jump form itself
  CHECK(term_eq(rho2.get(6), els));
  CHECK(mutually_corresponds(sp, rho2, w, rho2, lowered, Rel::identity(sp), Budget{}));
}

TEST_CASE("lower_program produces corresponding output and a flat listing") {
  auto sp = bool_space({"a", "b"});
  Pred c(sp, e_var("a"));
  TermPtr prog = t_seq(flip(sp, "b"), t_seq(t_while(c, t_skip(), t_skip()), flip(sp, "a")));
  LoweredProgram lp = lower_program(sp, Program{CodeMap(), prog});
  REQUIRE(lp.listings.size() == 1);
  CHECK(mutually_corresponds(sp, CodeMap(), prog, lp.program.rho, lp.program.root,
                             Rel::identity(sp), Budget{}));
  std::string text = lp.listings[0].text();
  CHECK(text.find("cjump") != std::string::npos);
  CHECK(text.find("halt") != std::string::npos);
  // basic f alone lowers to [basic f, halt]
  LoweredProgram single = lower_program(sp, Program{CodeMap(), flip(sp, "a")});
  REQUIRE(single.listings.size() == 1);
  CHECK(single.listings[0].entry.size() == 2);
  CHECK(single.listings[0].entry[0].kind == FlatInstr::Kind::Basic);
  CHECK(single.listings[0].entry[1].kind == FlatInstr::Kind::Halt);
  // parallel roots lower per component
  TermPtr par = t_parallel({flip(sp, "a"), flip(sp, "b")});
  CHECK(lower_program(sp, Program{CodeMap(), par}).listings.size() == 2);
}

TEST_CASE("fresh labels never collide with the closure of the input") {
  auto sp = bool_space({"a"});
  CodeMap rho = CodeMap().with(4, t_jump(sp, 9)).with(9, t_skip());
  Pred c(sp, e_var("a"));
  // A jump in tail position flattens: the branches inherit it.
  TermPtr prog = t_seq(t_ite(c, t_skip(), t_skip()), t_jump(sp, 4));
  LoweredProgram lp = lower_program(sp, Program{rho, prog});
  for (auto& [label, t] : lp.program.rho.entries()) {
    (void)t;
    if (!rho.stores(label)) CHECK(label >= 10);
  }
  CHECK(mutually_corresponds(sp, rho, prog, lp.program.rho, lp.program.root, Rel::identity(sp),
                             Budget{}));
  // A jump followed by code cannot be read as a flat list.
  TermPtr bad = t_seq(t_jump(sp, 4), flip(sp, "a"));
  CHECK_THROWS_AS(lower_program(sp, Program{rho, bad}), ArgError);
}

TEST_CASE("subst_fragment replaces maximal occurrences, not inside awaits") {
  auto sp = bool_space({"a", "b"});
  TermPtr f = flip(sp, "a");
  TermPtr g = flip(sp, "b");
  CHECK(term_eq(subst_fragment(f, f, g), g));
  TermPtr seq = t_seq(f, t_seq(f, g));
  TermPtr out = subst_fragment(seq, f, g);
  CHECK(term_eq(out, t_seq(g, t_seq(g, g))));
  TermPtr atom = t_atomic(sp, f);
  CHECK(term_eq(subst_fragment(atom, f, g), atom));        // no descent
  CHECK(term_eq(subst_fragment(atom, atom, g), g));        // unless the await itself matches
}

TEST_CASE("check_split_basic verifies the guarantee and commutation conditions") {
  auto sp = std::make_shared<StateSpace>(
      std::vector<std::pair<std::string, Domain>>{{"x", Domain::int_range(0, 7)}});
  Transformer inc(sp, {{"x", e_cond(e_bin(ExprOp::Lt, e_var("x"), e_int(7)),
                                    e_bin(ExprOp::Add, e_var("x"), e_int(1)), e_var("x"))}});
  SUBCASE("top guarantee and id rely pass") {
    CHECK(check_split_basic(inc, inc, Rel::identity(sp), Rel::top(sp)).pass);
  }
  SUBCASE("monotone guarantee passes") {
    Rel mono(sp, e_bin(ExprOp::Le, e_var("x"), e_var("x", true)));
    CHECK(check_split_basic(inc, inc, Rel::identity(sp), mono).pass);
  }
  SUBCASE("exact two-step guarantee fails with a witness") {
    Rel exact(sp, e_bin(ExprOp::Eq, e_var("x", true), e_bin(ExprOp::Add, e_var("x"), e_int(2))));
    SplitVerdict v = check_split_basic(inc, inc, Rel::identity(sp), exact);
    CHECK(!v.pass);
    CHECK(v.failed_condition == "guarantee-split");
    CHECK(v.witness_state.has_value());
  }
  SUBCASE("non-commuting rely fails") {
    // environment forces x to 0; gr(inc);R reaches 0 from f-images, but
    // R;gr(inc) lands at inc(0)=1.
    Rel reset(sp, e_eq(e_var("x", true), e_int(0)));
    SplitVerdict v = check_split_basic(inc, inc, reset, Rel::top(sp));
    CHECK(!v.pass);
    CHECK(v.failed_condition == "rely-commutation");
  }
}

#include "corewhile/corpus.hpp"
#include "corewhile/model.hpp"

TEST_CASE("normalization preserves mutual correspondence on corpus terms") {
  for (const char* entry : {"parallel_inc", "seq_skip", "sec8_intro", "while_true_skip"}) {
    Model m = parse_model(corpus_entry(entry).text);
    for (auto& [name, t] : m.terms) {
      CAPTURE(entry);
      CAPTURE(name);
      TermPtr n1 = normalize_cond_seq(t);
      TermPtr n2 = normalize_while_seq(t);
      TermPtr n3 = pipeline_normalize(t);
      Rel id = Rel::identity(m.space);
      CHECK(mutually_corresponds(m.space, m.rho, t, m.rho, n1, id, Budget{}));
      CHECK(mutually_corresponds(m.space, m.rho, t, m.rho, n2, id, Budget{}));
      CHECK(mutually_corresponds(m.space, m.rho, t, m.rho, n3, id, Budget{}));
    }
  }
}

TEST_CASE("guarded awaits make a component unflattenable") {
  auto sp = bool_space({"a"});
  TermPtr guarded = t_seq(t_await(Pred(sp, e_var("a")), t_skip()), flip(sp, "a"));
  CHECK_THROWS_AS(lower_program(sp, Program{CodeMap(), guarded}), ArgError);
}
