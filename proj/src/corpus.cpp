#include "corewhile/corpus.hpp"

#include <map>

#include "corewhile/basics.hpp"

namespace corewhile {

namespace {

const std::map<std::string, const char*>& texts() {
  static const std::map<std::string, const char*> t = {
#include "corpus_data.inc"
  };
  return t;
}

std::vector<CorpusEntry> build() {
  std::vector<CorpusEntry> out;
  auto add = [&](const std::string& name, std::vector<CorpusExpectation> exp) {
    CorpusEntry e;
    e.name = name;
    e.text = texts().at(name);
    e.expectations = std::move(exp);
    out.push_back(std::move(e));
  };

  add("parallel_inc",
      {{"safety", true, "outC(x=2) holds for the seven computations under the empty rely"},
       {"runs", true, "exactly 7 computations, up to three program steps"},
       {"direct_attempt", false, "the parallel rule cannot conclude x=2 without auxiliaries"}});

  add("seq_skip",
      {{"q", false, "environment strikes between the assignment and the trailing skip"}});

  add("inc_twice",
      {{"inc_sem", true, ""},
       {"inc2_sem", true, ""},
       {"twice_sem", true, ""},
       {"inc_derived", true, ""},
       {"inc2_derived", true, "left division against the reusable increment spec"},
       {"twice_derived", true, ""}});

  add("peterson",
      {{"safety", true, "cond0 and cond1 never both true once both auxiliaries hold"},
       {"global_guarantee", true, "program steps respect the global auxiliary/turn guarantee"},
       {"cs0_sem", true, ""},
       {"thread0_sem", true, ""},
       {"mutex_aux_sem", true, ""},
       {"mutex_sem", true, "the 5.4 goal: both elements end up in the shared set"},
       {"cs0_derived", true, ""},
       {"thread0_derived", true, ""},
       {"thread1_derived", true, ""},
       {"mutex_aux_derived", true, "parallel composition rule with R0/R1 contracts"},
       {"mutex_derived", true, "auxiliaries removed through the correspondence rule"},
       {"cs0_rsem", true, ""},
       {"mutex_rsem", true, "canonical relational form: shared only grows"},
       {"cs0_rderived", true, ""},
       {"cs1_rderived", true, ""},
       {"mutex_rderived", true, ""},
       {"aux_refines", true, "mutex_aux corresponds to mutex w.r.t. r_eqv"},
       {"thread0_classify", true, ""},
       {"thread0_lower", true, ""},
       {"thread_aux0_lower", true, ""},
       {"terminates_fair", true, "no fair non-terminating lasso exists"},
       {"lasso_any", false, "an unfair spinning lasso exists"}});

  add("while_true_skip",
      {{"t_any", false, "diverges"}, {"t_fair", false, "diverges fairly"}, {"cls", true, ""}});

  add("jump_ladder", {{"cls", true, "closure {0,1,2,3} with label 3 escaping the stored map"},
                      {"stats", true, ""}});

  add("sec8_intro",
      {{"fair_reaches_b", true, "every fair lasso leaves the !b region"},
       {"unfair_b_invariant", false, "an unfair lasso keeps b false forever"}});

  return out;
}

}  // namespace

const std::vector<CorpusEntry>& load_corpus() {
  static const std::vector<CorpusEntry> corpus = build();
  return corpus;
}

const CorpusEntry& corpus_entry(const std::string& name) {
  for (const CorpusEntry& e : load_corpus())
    if (e.name == name) return e;
  throw ArgError("no corpus entry named '" + name + "'");
}

}  // namespace corewhile
