#ifndef COREWHILE_LIVENESS_HPP
#define COREWHILE_LIVENESS_HPP

#include <optional>
#include <string>
#include <vector>

#include "corewhile/correspondence.hpp"

namespace corewhile {

// Finite representation of an ultimately periodic computation: the denoted
// computation is stem followed by infinitely many cycle repetitions. The
// stem's last configuration equals the cycle's first, and the cycle returns
// to it.
struct Lasso {
  Computation stem;
  Computation cycle;
};

void validate_lasso(const SpacePtr& space, const CodeMap& rho, const Lasso& l);

// stem + k cycle unrollings of the denoted computation.
Computation lasso_window(const Lasso& l, size_t unrollings);

// The suffix of the denoted computation at `start` (an index into the
// stem-plus-cycle view), itself in lasso form.
Lasso lasso_suffix(const Lasso& l, size_t start);

struct FairVerdict {
  bool fair = true;
  // Unfair witness: the denoted computation's index and the always-available
  // position that never gets its turn from there on.
  size_t index = 0;
  Position position;
  std::string starved_subterm;
};

FairVerdict is_fair_lasso(const SpacePtr& space, const CodeMap& rho, const Lasso& l);

enum class SearchMode { Any, FairOnly };

// Searches for a lasso under a stuttering environment that avoids
// skip-configurations and states satisfying `avoid` (when given). FairOnly
// additionally requires the denoted computation to be fair; absence then
// certifies that every fair computation from pre leaves the avoided region
// or terminates.
std::optional<Lasso> find_nonterminating(const SpacePtr& space, const CodeMap& rho, const TermPtr& p,
                                         const Pred& pre, SearchMode mode, const Budget& budget,
                                         const Pred* avoid = nullptr);

// Finite counterpart: a computation from pre to a skip-configuration whose
// states all avoid `avoid`. Absence together with the fair-lasso absence
// certifies that every fair computation reaches the avoided region.
std::optional<Computation> find_terminating_avoiding(const SpacePtr& space, const CodeMap& rho,
                                                     const TermPtr& p, const Pred& pre,
                                                     const Pred& avoid, const Budget& budget);

enum class Shape { Seq, Ite, Parallel2, While, Await, Basic, Skip };

struct DecomposedPart {
  std::string role;        // "head", "tail", "left", "right", "branch", "body", "iteration k"
  std::string condition;   // "N", "T", "refuted"
  std::optional<Lasso> lasso;
  std::optional<Computation> trace;  // T parts: up to their first skip
  size_t t_index = 0;                // T parts: the first-skip index
  bool verified = false;
  std::string note;
};

struct Decomposition {
  Shape shape;
  std::string case_name;
  std::vector<DecomposedPart> parts;
  std::vector<size_t> phi;  // while case (1): loop-head firing indices in the window
  bool ok = false;
  std::string note;
};

// Reconstructs the component computations of the refutational liveness
// lemmas for the given root shape. The input either denotes a fair
// non-terminating computation (lasso) or a terminating one (finite trace
// whose last configuration is its first skip). `avoid` is the predicate the
// input claims to avoid.
Decomposition decompose(const SpacePtr& space, const CodeMap& rho, const Lasso* lasso,
                        const Computation* trace, Shape shape, const Pred& avoid);

// Replays a fair lasso of the right program along a componentwise
// correspondence, yielding a lasso of the left parallel composition whose
// fired positions agree componentwise. Right env steps must be stuttering.
Lasso replay_componentwise(const SpacePtr& space, const std::vector<SimRelation>& witnesses,
                           StateIdx start, const Lasso& right, const Budget& budget);

}  // namespace corewhile

#endif
