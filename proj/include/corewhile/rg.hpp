#ifndef COREWHILE_RG_HPP
#define COREWHILE_RG_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "corewhile/correspondence.hpp"

namespace corewhile {

enum class TripleKind { Predicate, Relational };

// Extended Hoare triple: rely, pre, body, post, guarantee over one space and
// code map. Pre and post are both predicates or both relations.
struct Triple {
  SpacePtr space;
  CodeMap rho;
  TripleKind kind = TripleKind::Predicate;
  Rel rely;
  std::optional<Pred> pre_p, post_p;
  std::optional<Rel> pre_r, post_r;
  TermPtr body;
  Rel guar;
  std::string name;

  static Triple predicate(SpacePtr space, CodeMap rho, Rel rely, Pred pre, TermPtr body, Pred post,
                          Rel guar);
  static Triple relational(SpacePtr space, CodeMap rho, Rel rely, Rel pre, TermPtr body, Rel post,
                           Rel guar);
  std::string str() const;
};

struct CheckResult {
  bool pass = true;
  std::string what;                        // human summary of a failure
  std::optional<Computation> counterexample;
  std::optional<StateIdx> failing_start;   // relational checks: the initial state
  size_t graph_nodes = 0;
  size_t graph_edges = 0;
};

// Semantic check of a predicate triple: builds the reachable graph under the
// rely and verifies the first-skip output condition and the per-program-step
// guarantee condition.
CheckResult check_triple(const Triple& t, const Budget& budget);

// Relational form: for every initial state s0, the predicate check with
// pre = pre_r[{s0}] and post = post_r[{s0}] must pass.
CheckResult check_triple_rel(const Triple& t, const Budget& budget);

// ---------------------------------------------------------------------------
// Syntax-driven derivations with machine-discharged side conditions.

struct SideCondition {
  std::string name;
  bool passed = false;
  std::string witness;  // empty when passed
};

struct Derivation {
  std::string rule;
  Triple goal;
  std::vector<SideCondition> conditions;
  std::vector<Derivation> children;
  bool complete = false;

  std::string first_failure() const;
  std::string str(int indent = 0) const;
};

// One node of a user-supplied rule script.
struct RuleScript {
  std::string rule;                        // skip basic seq while ite await parallel
                                           // conseq corr conj disj ldiv splitbasic
  std::map<std::string, ExprPtr> exprs;    // mid / rely / pre / post / guar / rel
  std::vector<std::map<std::string, ExprPtr>> contracts;  // parallel components
  TermPtr via;                             // corr: the already-verified source term
  std::string via_name;                    // the model name of `via`, for printing
  std::string flavor;                      // conj/disj: "and" | "or"
  std::vector<RuleScript> children;
};

Derivation derive(const Triple& goal, const RuleScript& script, const Budget& budget);

// Restricted rule set of sequential derivations: no parallel rule and no
// correspondence/consequence rule.
Derivation derive_seq(const Triple& goal, const RuleScript& script, const Budget& budget);

// Re-checks a complete derivation's goals against the semantic checker.
CheckResult soundness_audit(const Derivation& d, const Budget& budget, bool every_node = false);

}  // namespace corewhile

#endif
