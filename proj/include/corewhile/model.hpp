#ifndef COREWHILE_MODEL_HPP
#define COREWHILE_MODEL_HPP

#include <map>
#include <string>
#include <vector>

#include "corewhile/liveness.hpp"
#include "corewhile/rg.hpp"
#include "corewhile/transform.hpp"

namespace corewhile {

struct Query {
  std::string name;
  std::string command;  // check-triple check-triple-rel derive derive-seq check-corr
                        // check-mutual lower check-termination enumerate classify graph-stats
  std::string triple;
  std::string script;
  std::string term_a, term_b;
  ExprPtr rel;
  ExprPtr pre;
  ExprPtr rely;
  ExprPtr avoid;
  size_t depth = 0;
  bool fair = false;
};

// One declaration, remembered in order for printing.
struct Decl {
  enum class Kind { Var, Pred, Rel, Transformer, Term, Label, Triple, Script, Query } kind;
  std::string name;
  int label = 0;
};

struct Model {
  SpacePtr space;
  std::map<std::string, ExprPtr> pred_exprs;
  std::map<std::string, ExprPtr> rel_exprs;
  std::map<std::string, Transformer> transformers;
  std::map<std::string, TermPtr> terms;
  CodeMap rho;
  std::map<std::string, Triple> triples;
  std::map<std::string, RuleScript> scripts;
  std::map<std::string, Query> queries;
  std::vector<Decl> decls;

  Pred pred(const std::string& name) const;
  Rel rel(const std::string& name) const;
  TermPtr term(const std::string& name) const;
};

Model parse_model(const std::string& text);
std::string print_model(const Model& m);
std::string print_script(const RuleScript& s);

}  // namespace corewhile

#endif
