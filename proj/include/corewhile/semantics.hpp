#ifndef COREWHILE_SEMANTICS_HPP
#define COREWHILE_SEMANTICS_HPP

#include <unordered_map>
#include <vector>

#include "corewhile/term.hpp"

namespace corewhile {

struct Config {
  TermPtr term;
  StateIdx state;

  bool operator==(const Config& o) const { return state == o.state && term_eq(term, o.term); }
};

struct ConfigHash {
  size_t operator()(const Config& c) const { return hash_combine(c.term->hash, c.state); }
};

enum class StepKind { Program, Env };

// Finite potential computation: configurations plus the kind of each
// transition between consecutive ones.
struct Computation {
  std::vector<Config> configs;
  std::vector<StepKind> kinds;

  size_t length() const { return configs.size(); }
  size_t program_step_count() const {
    size_t n = 0;
    for (auto k : kinds) n += k == StepKind::Program;
    return n;
  }
};

std::string computation_str(const SpacePtr& space, const Computation& c);

// Memo for program-step successor sets. Interned terms make the raw pointer
// a sound key; one cache is only valid for a fixed code map.
class StepCache {
 public:
  // Reference stays valid until the cache is destroyed.
  const std::vector<Config>& steps(const SpacePtr& space, const CodeMap& rho, const TermPtr& t,
                                   StateIdx s);

 private:
  struct KeyHash {
    size_t operator()(const std::pair<const Term*, StateIdx>& k) const {
      return hash_combine(reinterpret_cast<size_t>(k.first), k.second);
    }
  };
  std::unordered_map<std::pair<const Term*, StateIdx>, std::unique_ptr<std::vector<Config>>, KeyHash>
      map_;
};

// Exactly the successors derivable by the structural step rules, in canonical
// order: parallel components left to right, await results by state index.
std::vector<Config> program_steps(const SpacePtr& space, const CodeMap& rho, const Config& c,
                                  StepCache* cache = nullptr);

// All states reachable from (body, s) by program steps alone that carry the
// term to skip. Empty when the body blocks or diverges.
std::vector<StateIdx> await_closure(const SpacePtr& space, const CodeMap& rho, const TermPtr& body,
                                    StateIdx s, size_t node_budget = 1000000);

std::vector<Config> env_steps(const Config& c, const Rel& rely);

using NodeId = uint32_t;

struct ConfigGraph {
  SpacePtr space;
  std::vector<Config> nodes;                                    // id -> config
  std::unordered_map<Config, NodeId, ConfigHash> index;
  std::vector<std::vector<std::pair<NodeId, StepKind>>> succ;   // program edges first
  std::vector<NodeId> initial;
  std::vector<NodeId> parent;                                   // BFS tree, nodes[i] discovered from parent[i]
  std::vector<StepKind> parent_kind;
  size_t edge_count = 0;
};

ConfigGraph reachable_graph(const SpacePtr& space, const CodeMap& rho, const TermPtr& p,
                            const Pred& pre, const Rel& rely, const Budget& budget);

// All computations of length <= max_len from (p, s in pre) whose env steps
// lie in the rely, ordered by (length, choice order). Choice order: program
// steps before env steps, both in canonical successor order.
std::vector<Computation> enumerate_computations(const SpacePtr& space, const CodeMap& rho,
                                                const TermPtr& p, const Pred& pre, const Rel& rely,
                                                size_t max_len, const Budget& budget);

Computation comp_prefix(size_t n, const Computation& sq);
Computation comp_suffix(size_t m, const Computation& sq);
Computation comp_compose(const Computation& sq, const Computation& sq2);

}  // namespace corewhile

#endif
