#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "corewhile/corpus.hpp"
#include "corewhile/model.hpp"
#include "corewhile/report.hpp"

using namespace corewhile;

TEST_CASE("a minimal model parses") {
  Model m = parse_model("var x : bool;\nterm t = skip;\n");
  CHECK(m.space->state_count() == 2);
  CHECK(is_skip(m.term("t")));
}

TEST_CASE("syntax errors carry line and column") {
  try {
    parse_model("var x : bool\nterm t = skip;\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line == 2);
  }
}

TEST_CASE("resolution errors are reported") {
  CHECK_THROWS_AS(parse_model("var x : bool;\nterm t = nosuch;\n"), ParseError);
  CHECK_THROWS_AS(parse_model("var x : bool;\npred p = y == 0;\n"), ParseError);
}

TEST_CASE("the self-jump restriction is a load error") {
  std::string text = "var x : bool;\nlabel 0 = cjump (true) 0 else skip;\n";
  CHECK_THROWS_AS(parse_model(text), ConfigError);
}

TEST_CASE("term sugar: jump, atomic, if/while without else") {
  Model m = parse_model(
      "var a : bool;\n"
      "term j = jump 3;\n"
      "term at = atomic skip;\n"
      "term w = while (a) skip;\n"
      "term i = if (a) skip;\n");
  int label = -1;
  CHECK(is_jump(m.term("j"), &label));
  CHECK(label == 3);
  CHECK(m.term("at")->kind == TermKind::Await);
  CHECK(m.term("at")->cond->is_top());
  CHECK(is_skip(m.term("w")->b));
  CHECK(is_skip(m.term("i")->b));
}

TEST_CASE("primed predicate references prime their variables") {
  Model m = parse_model(
      "var a : bool;\nvar b : bool;\n"
      "pred p = a && !b;\n"
      "rel r = p' && a;\n");
  Rel r = m.rel("r");
  // r relates s to s' iff s'.a && !s'.b && s.a
  auto idx = [&](bool a, bool b) {
    return static_cast<StateIdx>((a ? 2 : 0) + (b ? 1 : 0));
  };
  CHECK(r.eval(idx(true, true), idx(true, false)));
  CHECK(!r.eval(idx(false, true), idx(true, false)));
  CHECK(!r.eval(idx(true, true), idx(true, true)));
}

TEST_CASE("parse-print-parse is a fixpoint on every corpus entry") {
  for (const CorpusEntry& e : load_corpus()) {
    CAPTURE(e.name);
    Model m1 = parse_model(e.text);
    std::string printed = print_model(m1);
    Model m2 = parse_model(printed);
    std::string printed2 = print_model(m2);
    CHECK(printed == printed2);

    // semantic agreement spot checks
    CHECK(m1.space->state_count() == m2.space->state_count());
    for (auto& [name, t] : m1.terms) CHECK(term_eq(t, m2.terms.at(name)));
    for (auto& [name, _] : m1.pred_exprs)
      CHECK(m1.pred(name).same_extension(m2.pred(name)));
    CHECK(m1.queries.size() == m2.queries.size());
    CHECK(m1.triples.size() == m2.triples.size());
  }
}

TEST_CASE("corpus expectations name real queries") {
  for (const CorpusEntry& e : load_corpus()) {
    CAPTURE(e.name);
    Model m = parse_model(e.text);
    for (const CorpusExpectation& exp : e.expectations) {
      CAPTURE(exp.query);
      CHECK(m.queries.count(exp.query) == 1);
    }
  }
}

TEST_CASE("reports are deterministic across runs") {
  const CorpusEntry& e = corpus_entry("parallel_inc");
  Model m = parse_model(e.text);
  Report r1 = run_query(m, m.queries.at("runs"), Budget{});
  Report r2 = run_query(m, m.queries.at("runs"), Budget{});
  CHECK(r1.to_json(false).dump() == r2.to_json(false).dump());
  CHECK(r1.exit_code == 0);
}

TEST_CASE("failure reports carry a replayable witness") {
  const CorpusEntry& e = corpus_entry("seq_skip");
  Model m = parse_model(e.text);
  Report r = run_query(m, m.queries.at("q"), Budget{});
  CHECK(r.exit_code == 1);
  CHECK(r.details.contains("counterexample"));
  CHECK(r.details["counterexample"].size() == 4);  // the three-step run
}

TEST_CASE("explicit cjump terms roundtrip through the printer") {
  std::string text =
      "var a : bool;\n"
      "term t = cjump (!a) 5 else basic { a := true; };\n"
      "label 5 = basic { a := false; };\n"
      "term u = t ; jump 5;\n";
  Model m1 = parse_model(text);
  Model m2 = parse_model(print_model(m1));
  CHECK(term_eq(m1.term("t"), m2.term("t")));
  CHECK(term_eq(m1.term("u"), m2.term("u")));
  CHECK(term_eq(m1.rho.get(5), m2.rho.get(5)));
}

TEST_CASE("named transformers roundtrip through the printer") {
  std::string text =
      "var a : bool;\n"
      "transformer flip { a := !a; };\n"
      "term t = basic flip;\n";
  Model m1 = parse_model(text);
  Model m2 = parse_model(print_model(m1));
  CHECK(term_eq(m1.term("t"), m2.term("t")));
  CHECK(m1.transformers.at("flip") == m2.transformers.at("flip"));
}

TEST_CASE("malformed inputs raise parse errors, never crash") {
  std::mt19937 rng(99);
  const char* tokens[] = {"var",  "term", "query", "pred",  "rel",   "triple", "(",    ")",
                          "{",    "}",    "[",     "]",     ";",     ":=",     "bool", "int",
                          "skip", "par",  "while", "await", "basic", "x",      "0",    "..",
                          "&&",   "'",    "==",    "->",    "=",     ","};
  for (int trial = 0; trial < 500; ++trial) {
    std::string text = "var x : bool;\n";
    int len = 1 + static_cast<int>(rng() % 20);
    for (int i = 0; i < len; ++i) {
      text += tokens[rng() % (sizeof(tokens) / sizeof(tokens[0]))];
      text += ' ';
    }
    try {
      parse_model(text);
    } catch (const ParseError&) {
    } catch (const ConfigError&) {
    } catch (const ArgError&) {
    }
  }
  CHECK(true);  // survived without crashing
}
