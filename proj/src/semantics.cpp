#include "corewhile/semantics.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <sstream>
#include <unordered_set>

namespace corewhile {

std::string computation_str(const SpacePtr& space, const Computation& c) {
  std::ostringstream os;
  for (size_t i = 0; i < c.configs.size(); ++i) {
    if (i) os << (c.kinds[i - 1] == StepKind::Program ? "  -P->  " : "  -E->  ");
    os << "(" << term_str(c.configs[i].term) << ", " << space->state_at(c.configs[i].state).str() << ")";
  }
  return os.str();
}

namespace {

std::vector<Config> compute_steps(const SpacePtr& space, const CodeMap& rho, const Config& c,
                                  StepCache* cache);

std::vector<Config> steps_of(const SpacePtr& space, const CodeMap& rho, const Config& c,
                             StepCache* cache) {
  if (cache) return cache->steps(space, rho, c.term, c.state);
  return compute_steps(space, rho, c, cache);
}

std::vector<Config> compute_steps(const SpacePtr& space, const CodeMap& rho, const Config& c,
                                  StepCache* cache) {
  const Term& t = *c.term;
  std::vector<Config> out;
  switch (t.kind) {
    case TermKind::Skip:
      break;
    case TermKind::Basic:
      out.push_back({t_skip(), t.f->apply(c.state)});
      break;
    case TermKind::CJump:
      if (t.cond->eval(c.state))
        out.push_back({rho.get(t.label), c.state});
      else
        out.push_back({t.a, c.state});
      break;
    case TermKind::Await:
      if (t.cond->eval(c.state))
        for (StateIdx s : await_closure(space, rho, t.a, c.state))
          out.push_back({t_skip(), s});
      break;
    case TermKind::Ite:
      out.push_back({t.cond->eval(c.state) ? t.a : t.b, c.state});
      break;
    case TermKind::While:
      if (t.cond->eval(c.state))
        out.push_back({t_seq(t.a, t_seq(t_skip(), c.term)), c.state});
      else
        out.push_back({t.b, c.state});
      break;
    case TermKind::Seq:
      if (is_skip(t.a)) {
        out.push_back({t.b, c.state});
      } else {
        for (const Config& s : steps_of(space, rho, {t.a, c.state}, cache))
          out.push_back({t_seq(s.term, t.b), s.state});
      }
      break;
    case TermKind::Parallel: {
      bool all_skip = true;
      for (auto& comp : t.comps) all_skip = all_skip && is_skip(comp);
      if (all_skip) {
        out.push_back({t_skip(), c.state});
        break;
      }
      for (size_t i = 0; i < t.comps.size(); ++i) {
        for (const Config& s : steps_of(space, rho, {t.comps[i], c.state}, cache)) {
          auto comps = t.comps;
          comps[i] = s.term;
          out.push_back({t_parallel(std::move(comps)), s.state});
        }
      }
      break;
    }
  }
  return out;
}

}  // namespace

const std::vector<Config>& StepCache::steps(const SpacePtr& space, const CodeMap& rho,
                                            const TermPtr& t, StateIdx s) {
  auto key = std::make_pair(t.get(), s);
  auto it = map_.find(key);
  if (it != map_.end()) return *it->second;
  auto computed =
      std::make_unique<std::vector<Config>>(compute_steps(space, rho, Config{t, s}, this));
  return *map_.emplace(key, std::move(computed)).first->second;
}

std::vector<Config> program_steps(const SpacePtr& space, const CodeMap& rho, const Config& c,
                                  StepCache* cache) {
  return steps_of(space, rho, c, cache);
}

std::vector<StateIdx> await_closure(const SpacePtr& space, const CodeMap& rho, const TermPtr& body,
                                    StateIdx s, size_t node_budget) {
  std::unordered_set<Config, ConfigHash> seen;
  std::deque<Config> queue;
  Config start{body, s};
  seen.insert(start);
  queue.push_back(start);
  std::vector<StateIdx> result;
  while (!queue.empty()) {
    Config c = queue.front();
    queue.pop_front();
    if (is_skip(c.term)) {
      result.push_back(c.state);
      continue;
    }
    for (const Config& n : program_steps(space, rho, c)) {
      if (seen.insert(n).second) {
        if (seen.size() > node_budget)
          throw ResourceError("await body exceeded the node budget");
        queue.push_back(n);
      }
    }
  }
  std::sort(result.begin(), result.end());
  return result;
}

std::vector<Config> env_steps(const Config& c, const Rel& rely) {
  std::vector<Config> out;
  rely.row(c.state).for_each([&](size_t b) { out.push_back({c.term, static_cast<StateIdx>(b)}); });
  return out;
}

ConfigGraph reachable_graph(const SpacePtr& space, const CodeMap& rho, const TermPtr& p,
                            const Pred& pre, const Rel& rely, const Budget& budget) {
  ConfigGraph g;
  g.space = space;
  StepCache cache;
  std::unordered_map<StateIdx, Bitset> env_rows;  // local per-state rely rows

  auto intern = [&](const Config& c, NodeId from, StepKind k) -> NodeId {
    auto it = g.index.find(c);
    if (it != g.index.end()) return it->second;
    if (g.nodes.size() >= budget.max_nodes)
      throw ResourceError("configuration graph exceeded the node budget (" +
                          std::to_string(budget.max_nodes) + " nodes); partial graph had " +
                          std::to_string(g.nodes.size()) + " nodes / " +
                          std::to_string(g.edge_count) + " edges");
    NodeId id = static_cast<NodeId>(g.nodes.size());
    g.nodes.push_back(c);
    g.succ.emplace_back();
    g.parent.push_back(from);
    g.parent_kind.push_back(k);
    g.index.emplace(c, id);
    return id;
  };

  std::deque<NodeId> queue;
  pre.extension().for_each([&](size_t s) {
    Config c{p, static_cast<StateIdx>(s)};
    size_t before = g.nodes.size();
    NodeId id = intern(c, 0, StepKind::Env);
    if (g.nodes.size() > before) {
      g.parent[id] = id;  // root
      g.initial.push_back(id);
      queue.push_back(id);
    }
  });

  while (!queue.empty()) {
    NodeId id = queue.front();
    queue.pop_front();
    Config c = g.nodes[id];
    for (const Config& n : program_steps(space, rho, c, &cache)) {
      size_t before = g.nodes.size();
      NodeId nid = intern(n, id, StepKind::Program);
      g.succ[id].push_back({nid, StepKind::Program});
      ++g.edge_count;
      if (g.nodes.size() > before) queue.push_back(nid);
    }
    auto rowit = env_rows.find(c.state);
    if (rowit == env_rows.end())
      rowit = env_rows.emplace(c.state, rely.row(c.state)).first;
    rowit->second.for_each([&](size_t b) {
      Config n{c.term, static_cast<StateIdx>(b)};
      size_t before = g.nodes.size();
      NodeId nid = intern(n, id, StepKind::Env);
      g.succ[id].push_back({nid, StepKind::Env});
      ++g.edge_count;
      if (g.nodes.size() > before) queue.push_back(nid);
    });
  }
  return g;
}

std::vector<Computation> enumerate_computations(const SpacePtr& space, const CodeMap& rho,
                                                const TermPtr& p, const Pred& pre, const Rel& rely,
                                                size_t max_len, const Budget& budget) {
  if (max_len == 0) throw ArgError("max_len must be positive");
  std::vector<Computation> out;
  StepCache cache;
  Computation cur;

  auto emit = [&] {
    if (out.size() >= budget.max_nodes)
      throw ResourceError("enumeration exceeded the budget");
    out.push_back(cur);
  };

  std::function<void()> extend = [&] {
    emit();
    if (cur.length() >= max_len) return;
    Config c = cur.configs.back();
    for (const Config& n : program_steps(space, rho, c, &cache)) {
      cur.configs.push_back(n);
      cur.kinds.push_back(StepKind::Program);
      extend();
      cur.configs.pop_back();
      cur.kinds.pop_back();
    }
    rely.row(c.state).for_each([&](size_t b) {
      cur.configs.push_back({c.term, static_cast<StateIdx>(b)});
      cur.kinds.push_back(StepKind::Env);
      extend();
      cur.configs.pop_back();
      cur.kinds.pop_back();
    });
  };

  pre.extension().for_each([&](size_t s) {
    cur.configs = {{p, static_cast<StateIdx>(s)}};
    cur.kinds.clear();
    extend();
  });

  std::stable_sort(out.begin(), out.end(),
                   [](const Computation& a, const Computation& b) { return a.length() < b.length(); });
  return out;
}

Computation comp_prefix(size_t n, const Computation& sq) {
  if (n == 0 || n > sq.length()) throw ArgError("prefix length out of range");
  Computation r;
  r.configs.assign(sq.configs.begin(), sq.configs.begin() + n);
  r.kinds.assign(sq.kinds.begin(), sq.kinds.begin() + (n - 1));
  return r;
}

Computation comp_suffix(size_t m, const Computation& sq) {
  if (m >= sq.length()) throw ArgError("suffix start out of range");
  Computation r;
  r.configs.assign(sq.configs.begin() + m, sq.configs.end());
  r.kinds.assign(sq.kinds.begin() + m, sq.kinds.end());
  return r;
}

Computation comp_compose(const Computation& sq, const Computation& sq2) {
  if (!(sq.configs.back() == sq2.configs.front()))
    throw ArgError("composition needs matching endpoint configurations");
  Computation r = sq;
  r.configs.insert(r.configs.end(), sq2.configs.begin() + 1, sq2.configs.end());
  r.kinds.insert(r.kinds.end(), sq2.kinds.begin(), sq2.kinds.end());
  return r;
}

}  // namespace corewhile
