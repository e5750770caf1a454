#ifndef COREWHILE_CORRESPONDENCE_HPP
#define COREWHILE_CORRESPONDENCE_HPP

#include <optional>
#include <string>
#include <vector>

#include "corewhile/structure.hpp"

namespace corewhile {

// A relation on terms witnessing that the left program simulates the right
// one w.r.t. a state relation: every r-related step of the right is matched
// by a left step staying in the relation, and skip pairs only with skip.
struct SimRelation {
  SpacePtr space;
  CodeMap rho_left, rho_right;
  Rel r;
  TermPtr root_left, root_right;
  std::vector<std::pair<TermPtr, TermPtr>> pairs;

  bool contains(const TermPtr& u, const TermPtr& v) const;
};

struct SimFailure {
  std::string clause;  // "step-match", "skip-left", "skip-right", "root-missing"
  TermPtr left, right;
  StateIdx s1 = 0, s2 = 0;
  TermPtr right_succ;
  StateIdx s2p = 0;
  std::string describe(const SpacePtr& space) const;
};

struct SimCheck {
  bool ok = true;
  std::optional<SimFailure> failure;
};

SimCheck check_simulation(const SimRelation& x);

std::optional<SimRelation> corresponds(const SpacePtr& space, const CodeMap& rho_left,
                                       const TermPtr& p, const CodeMap& rho_right, const TermPtr& q,
                                       const Rel& r, const Budget& budget);

bool mutually_corresponds(const SpacePtr& space, const CodeMap& rho_left, const TermPtr& p,
                          const CodeMap& rho_right, const TermPtr& q, const Rel& r,
                          const Budget& budget);

// Relational composition of two witnesses sharing the middle code map; the
// result witnesses correspondence w.r.t. r1 ; r2.
SimRelation compose_correspondence(const SimRelation& w1, const SimRelation& w2);

// Replays a computation of the right program as one of the left, same
// length, statewise r-related, step kinds aligned. The right computation's
// env steps must lie in rely_right, and r ; rely_right must be contained in
// rely_left ; r.
Computation replay(const SimRelation& w, StateIdx start, const Computation& sq_q,
                   const Rel& rely_left, const Rel& rely_right);

struct ComponentwiseResult {
  bool ok = false;
  std::string failing_clause;
  std::vector<SimRelation> witnesses;  // one per component when ok
};

// Componentwise correspondence of two parallel compositions: pairwise
// correspondence, sequential left components, non-blocking right components.
ComponentwiseResult componentwise(const SpacePtr& space, size_t m, const Rel& r,
                                  const CodeMap& rho_left, const CodeMap& rho_right,
                                  const TermPtr& p, const TermPtr& q, const Budget& budget);

}  // namespace corewhile

#endif
