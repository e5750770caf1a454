#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "corewhile/correspondence.hpp"

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

}  // namespace

TEST_CASE("the singleton skip pair is a simulation for any state relation") {
  auto sp = bool_space({"a"});
  SimRelation x{sp, CodeMap(), CodeMap(), Rel::top(sp), t_skip(), t_skip(),
                {{t_skip(), t_skip()}}};
  CHECK(check_simulation(x).ok);
}

TEST_CASE("skip pairs only with skip") {
  auto sp = bool_space({"a"});
  TermPtr f = flip(sp, "a");
  SimRelation bad{sp, CodeMap(), CodeMap(), Rel::identity(sp), t_skip(), f,
                  {{t_skip(), f}}};
  SimCheck r = check_simulation(bad);
  CHECK(!r.ok);
  CHECK(r.failure->clause == "skip-left");
  CHECK(!corresponds(sp, CodeMap(), t_skip(), CodeMap(), f, Rel::identity(sp), Budget{}));
  CHECK(!corresponds(sp, CodeMap(), f, CodeMap(), t_skip(), Rel::identity(sp), Budget{}));
}

TEST_CASE("correspondence is reflexive and the witness passes check_simulation") {
  auto sp = bool_space({"a", "b"});
  CodeMap rho;
  Pred c(sp, e_var("a"));
  TermPtr p = t_seq(flip(sp, "a"), t_ite(c, flip(sp, "b"), t_skip()));
  auto w = corresponds(sp, rho, p, rho, p, Rel::identity(sp), Budget{});
  REQUIRE(w.has_value());
  CHECK(term_eq(w->root_left, p));
  CHECK(check_simulation(*w).ok);
}

TEST_CASE("sequential composition is associative up to mutual correspondence") {
  auto sp = bool_space({"a", "b"});
  CodeMap rho;
  TermPtr p1 = flip(sp, "a"), p2 = flip(sp, "b"), p3 = flip(sp, "a");
  TermPtr left = t_seq(p1, t_seq(p2, p3));
  TermPtr right = t_seq(t_seq(p1, p2), p3);
  CHECK(mutually_corresponds(sp, rho, left, rho, right, Rel::identity(sp), Budget{}));
}

TEST_CASE("parallel components commute") {
  auto sp = bool_space({"a", "b"});
  CodeMap rho;
  TermPtr p = t_parallel({flip(sp, "a"), flip(sp, "b")});
  TermPtr q = t_parallel({flip(sp, "b"), flip(sp, "a")});
  CHECK(mutually_corresponds(sp, rho, p, rho, q, Rel::identity(sp), Budget{}));
}

TEST_CASE("basic terms with different effects do not correspond under id") {
  auto sp = bool_space({"a", "b"});
  CodeMap rho;
  CHECK(!corresponds(sp, rho, flip(sp, "a"), rho, flip(sp, "b"), Rel::identity(sp), Budget{}));
}

TEST_CASE("witness composition witnesses the composed relation") {
  auto sp = bool_space({"a", "b"});
  CodeMap rho;
  TermPtr p = t_seq(flip(sp, "a"), flip(sp, "b"));
  Rel id = Rel::identity(sp);
  auto w1 = corresponds(sp, rho, p, rho, p, id, Budget{});
  auto w2 = corresponds(sp, rho, p, rho, p, id, Budget{});
  REQUIRE(w1.has_value());
  REQUIRE(w2.has_value());
  SimRelation comp = compose_correspondence(*w1, *w2);
  CHECK(check_simulation(comp).ok);
  CHECK(comp.contains(p, p));
}

TEST_CASE("replay reconstructs a same-length statewise-related computation") {
  auto sp = bool_space({"a", "b"});
  CodeMap rho;
  Pred c(sp, e_var("a"));
  TermPtr q = t_ite(c, flip(sp, "b"), t_skip());
  // cond-norm2-style pair: the structured form against its jump form
  CodeMap rho2 = CodeMap().with(3, t_skip());
  TermPtr jumped = t_cjump(!c, 3, flip(sp, "b"));
  auto w = corresponds(sp, rho, q, rho2, jumped, Rel::identity(sp), Budget{});
  REQUIRE(w.has_value());

  // build a 3-step right computation: env, program, program
  StateIdx a1 = 2;  // a=true, b=false
  Computation sq;
  sq.configs.push_back({jumped, 0});
  sq.kinds.push_back(StepKind::Env);
  sq.configs.push_back({jumped, a1});
  auto steps = program_steps(sp, rho2, {jumped, a1});
  REQUIRE(!steps.empty());
  sq.kinds.push_back(StepKind::Program);
  sq.configs.push_back(steps[0]);
  auto more = program_steps(sp, rho2, steps[0]);
  REQUIRE(!more.empty());
  sq.kinds.push_back(StepKind::Program);
  sq.configs.push_back(more[0]);

  Rel top = Rel::top(sp);
  Computation left = replay(*w, 0, sq, top, top);
  REQUIRE(left.length() == sq.length());
  for (size_t i = 0; i < left.length(); ++i) {
    CHECK(left.configs[i].state == sq.configs[i].state);  // id relation
    if (i + 1 < left.length()) CHECK(left.kinds[i] == sq.kinds[i]);
  }
  CHECK(term_eq(left.configs[0].term, q));

  // rely inclusion precondition: r;R' inside R;r fails for R = bottom
  CHECK_THROWS_AS(replay(*w, 0, sq, Rel::bottom(sp), top), ArgError);
}

TEST_CASE("componentwise correspondence demands shape, sequentiality and non-blocking") {
  auto sp = bool_space({"a", "b"});
  CodeMap rho;
  TermPtr p = t_parallel({flip(sp, "a"), flip(sp, "b")});
  Rel id = Rel::identity(sp);
  auto ok = componentwise(sp, 2, id, rho, rho, p, p, Budget{});
  CHECK(ok.ok);
  CHECK(ok.witnesses.size() == 2);

  CHECK(!componentwise(sp, 1, id, rho, rho, p, p, Budget{}).ok);  // m > 1 required

  TermPtr blocked = t_parallel({flip(sp, "a"), t_await(Pred(sp, e_var("a")), t_skip())});
  auto bad = componentwise(sp, 2, id, rho, rho, p, blocked, Budget{});
  CHECK(!bad.ok);
  CHECK(bad.failing_clause.find("non-blocking") != std::string::npos);
}

TEST_CASE("coreflexive relations restrict correspondence to invariant regions") {
  auto sp = bool_space({"a", "b"});
  CodeMap rho;
  // r: identity restricted to a
  Rel r(sp, e_and(e_identity(*sp), e_var("a")));
  TermPtr keeps = flip(sp, "b");   // preserves a
  TermPtr breaks = flip(sp, "a");  // leaves the region
  CHECK(corresponds(sp, rho, keeps, rho, keeps, r, Budget{}).has_value());
  CHECK(!corresponds(sp, rho, breaks, rho, breaks, r, Budget{}).has_value());
}
