#ifndef COREWHILE_STRUCTURE_HPP
#define COREWHILE_STRUCTURE_HPP

#include <set>
#include <string>
#include <vector>

#include "corewhile/semantics.hpp"

namespace corewhile {

// Redex path: 0 descends into a sequence head (or designates the whole
// term), i in 1..m selects a parallel component.
using Position = std::vector<int>;

std::string position_str(const Position& x);
Position position_parse(const std::string& s);

std::vector<Position> positions(const TermPtr& p);
TermPtr lookup(const TermPtr& p, const Position& x);
TermPtr substitute(const TermPtr& p, const TermPtr& sub, const Position& x);

// The unique position whose subterm fired the program step c -> c2. Requires
// the code map to satisfy the self-jump restriction.
Position fired_position(const SpacePtr& space, const CodeMap& rho, const Config& c, const Config& c2);

std::set<int> jumps_local(const TermPtr& p);
std::set<int> jumps_closure(const CodeMap& rho, const TermPtr& p);

struct WellFormedness {
  bool well_formed;            // closure finite (always, for stored maps)
  std::vector<int> closure;
  std::vector<int> escapes;    // closure labels without a stored binding
};
WellFormedness is_well_formed(const CodeMap& rho, const TermPtr& p);

bool always_available(const SpacePtr& space, const CodeMap& rho, const TermPtr& p, const Position& x);

struct Classification {
  bool jump_free;
  bool locally_sequential;
  bool sequential;
  bool locally_non_blocking;
  bool non_blocking;
};
Classification classify(const SpacePtr& space, const CodeMap& rho, const TermPtr& p);

}  // namespace corewhile

#endif
