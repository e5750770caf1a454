#ifndef COREWHILE_TRANSFORM_HPP
#define COREWHILE_TRANSFORM_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "corewhile/structure.hpp"

namespace corewhile {

// Distributes continuations over conditional branches:
// (if C then p1 else p2); q  ~>  if C then p1;q else p2;q, bottom-up.
TermPtr normalize_cond_seq(const TermPtr& p);

// (while C p1 p2); q  ~>  while C p1 (p2; q), bottom-up.
TermPtr normalize_while_seq(const TermPtr& p);

// Fixpoint of both rewrites plus sequence re-association (a;b);c ~> a;(b;c),
// which exposes branch redexes hidden in nested sequence heads. Used by the
// lowering pipeline.
TermPtr pipeline_normalize(const TermPtr& p);

// await true { straight-line basics }  ~>  one basic with the composed
// transformer. Enables flat emission of components with atomic sections.
TermPtr fuse_atomic_basics(const TermPtr& p);

class FreshLabels {
 public:
  explicit FreshLabels(int first) : next_(first) {}
  static FreshLabels for_program(const Program& prog);
  int alloc() { return next_++; }

 private:
  int next_;
};

// Replaces every conditional by a jump over the else branch. Conditionals
// followed by sequences must have been normalized away.
std::pair<TermPtr, CodeMap> lower_ite(const TermPtr& p, const CodeMap& rho, FreshLabels& fresh);

// Replaces every while by its two-label jump form.
std::pair<TermPtr, CodeMap> lower_while(const TermPtr& p, const CodeMap& rho, FreshLabels& fresh);

struct FlatInstr {
  enum class Kind { Basic, CJump, Halt };
  Kind kind;
  std::optional<Transformer> f;
  std::optional<Pred> cond;
  int label = -1;
};

struct FlatListing {
  std::vector<FlatInstr> entry;
  std::map<int, std::vector<FlatInstr>> blocks;

  std::string text() const;
};

struct LoweredProgram {
  Program program;                  // lowered root and extended code map
  std::vector<FlatListing> listings;  // one per parallel component
};

LoweredProgram lower_program(const SpacePtr& space, const Program& prog);

// p with maximal occurrences of q replaced by q2, never descending into an
// await body (unless the await itself is q).
TermPtr subst_fragment(const TermPtr& p, const TermPtr& q, const TermPtr& q2);

struct SplitVerdict {
  bool pass = true;
  std::string failed_condition;      // "guarantee-split" or "rely-commutation"
  std::optional<StateIdx> witness_state;
  std::optional<std::pair<StateIdx, StateIdx>> witness_pair;
};

// Conditions under which basic(g o f) may be divided into basic f; basic g:
// (1) (s, g(f s)) in G implies (s, f s) in G and (f s, g(f s)) in G;
// (2) gr(f); R is contained in R; gr(f).
SplitVerdict check_split_basic(const Transformer& f, const Transformer& g, const Rel& rely,
                               const Rel& guar);

}  // namespace corewhile

#endif
