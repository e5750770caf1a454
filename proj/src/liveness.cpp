#include "corewhile/liveness.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace corewhile {

void validate_lasso(const SpacePtr& space, const CodeMap& rho, const Lasso& l) {
  if (l.stem.configs.empty() || l.cycle.configs.empty()) throw ArgError("lasso parts must be nonempty");
  if (l.cycle.configs.size() < 2) throw ArgError("lasso cycle needs at least one transition");
  if (!(l.stem.configs.back() == l.cycle.configs.front()))
    throw ArgError("stem must end at the cycle's first configuration");
  if (!(l.cycle.configs.back() == l.cycle.configs.front()))
    throw ArgError("cycle must return to its first configuration");
  auto check = [&](const Computation& c) {
    for (size_t i = 0; i + 1 < c.configs.size(); ++i) {
      if (c.kinds[i] == StepKind::Env) {
        if (!term_eq(c.configs[i].term, c.configs[i + 1].term))
          throw ArgError("environment step changes the term");
      } else {
        bool found = false;
        for (const Config& s : program_steps(space, rho, c.configs[i]))
          found = found || (s == c.configs[i + 1]);
        if (!found) throw ArgError("transition is not a program step");
      }
    }
  };
  check(l.stem);
  check(l.cycle);
}

Computation lasso_window(const Lasso& l, size_t unrollings) {
  Computation w = l.stem;
  for (size_t k = 0; k < unrollings; ++k) w = comp_compose(w, l.cycle);
  return w;
}

// Rotates the lasso so the denoted computation's suffix at `start` is itself
// a lasso.
Lasso lasso_suffix(const Lasso& l, size_t start) {
  size_t stem_len = l.stem.configs.size();
  if (start < stem_len) {
    Lasso out;
    out.stem = comp_suffix(start, l.stem);
    out.cycle = l.cycle;
    return out;
  }
  size_t k = (start - stem_len + 1) % (l.cycle.configs.size() - 1);
  Lasso out;
  // Rotated cycle beginning at offset k.
  Computation rot;
  rot.configs.push_back(l.cycle.configs[k]);
  for (size_t i = k; i + 1 < l.cycle.configs.size(); ++i) {
    rot.configs.push_back(l.cycle.configs[i + 1]);
    rot.kinds.push_back(l.cycle.kinds[i]);
  }
  for (size_t i = 0; i < k; ++i) {
    rot.configs.push_back(l.cycle.configs[i + 1]);
    rot.kinds.push_back(l.cycle.kinds[i]);
  }
  out.stem.configs = {rot.configs.front()};
  out.cycle = std::move(rot);
  return out;
}

namespace {

struct Challenge {
  Position pos;
  TermPtr sub;
  bool operator<(const Challenge& o) const {
    if (pos != o.pos) return pos < o.pos;
    return sub->hash < o.sub->hash;  // hash order; ties resolved by term_eq users
  }
};

std::vector<Challenge> challenges_of(const SpacePtr& space, const CodeMap& rho, const TermPtr& t) {
  std::vector<Challenge> out;
  for (const Position& x : positions(t))
    if (always_available(space, rho, t, x)) out.push_back({x, lookup(t, x)});
  return out;
}

}  // namespace

FairVerdict is_fair_lasso(const SpacePtr& space, const CodeMap& rho, const Lasso& l) {
  validate_lasso(space, rho, l);
  FairVerdict v;
  Computation w = lasso_window(l, 2);
  // Reaching a skip-configuration makes the computation fair outright.
  for (auto& c : w.configs)
    if (is_skip(c.term)) return v;

  size_t cycle_steps = l.cycle.configs.size() - 1;
  size_t challenge_window = l.stem.configs.size() + cycle_steps;  // stem + one unrolling
  std::vector<std::optional<Position>> fired(w.configs.size() - 1);
  for (size_t j = 0; j + 1 < w.configs.size(); ++j)
    if (w.kinds[j] == StepKind::Program)
      fired[j] = fired_position(space, rho, w.configs[j], w.configs[j + 1]);

  for (size_t i = 0; i < challenge_window && i < w.configs.size(); ++i) {
    for (const Challenge& ch : challenges_of(space, rho, w.configs[i].term)) {
      bool answered = false;
      for (size_t j = i; j + 1 < w.configs.size() && !answered; ++j) {
        if (!fired[j] || *fired[j] != ch.pos) continue;
        auto ps = positions(w.configs[j].term);
        if (std::find(ps.begin(), ps.end(), ch.pos) == ps.end()) continue;
        if (term_eq(lookup(w.configs[j].term, ch.pos), ch.sub)) answered = true;
      }
      if (!answered) {
        v.fair = false;
        v.index = i;
        v.position = ch.pos;
        v.starved_subterm = term_str(ch.sub);
        return v;
      }
    }
  }
  return v;
}

namespace {

struct Answer {
  Position pos;
  TermPtr sub;
};

// Streett-style pruning over the non-avoided, non-skip region of the
// stuttering-environment graph: a fair cycle exists in an SCC iff every
// challenge its nodes raise is answered by a fired position of an internal
// edge; nodes raising unanswerable challenges cannot lie on fair cycles.
struct FairSearch {
  const SpacePtr& space;
  const CodeMap& rho;
  const ConfigGraph& g;
  std::vector<char> region;  // node in the searched region
  std::vector<std::vector<std::pair<NodeId, size_t>>> prog_edges;  // target, edge tag
  std::vector<Answer> edge_answers;
  std::vector<std::vector<Challenge>> node_challenges;

  explicit FairSearch(const SpacePtr& sp, const CodeMap& r, const ConfigGraph& graph,
                      const Pred* avoid)
      : space(sp), rho(r), g(graph) {
    region.assign(g.nodes.size(), 0);
    for (NodeId u = 0; u < g.nodes.size(); ++u)
      region[u] = !is_skip(g.nodes[u].term) && (!avoid || !avoid->eval(g.nodes[u].state));
    prog_edges.resize(g.nodes.size());
    node_challenges.resize(g.nodes.size());
    for (NodeId u = 0; u < g.nodes.size(); ++u) {
      if (!region[u]) continue;
      node_challenges[u] = challenges_of(space, rho, g.nodes[u].term);
      for (auto& [v, k] : g.succ[u]) {
        if (k != StepKind::Program || !region[v]) continue;
        Position x = fired_position(space, rho, g.nodes[u], g.nodes[v]);
        edge_answers.push_back({x, lookup(g.nodes[u].term, x)});
        prog_edges[u].push_back({v, edge_answers.size() - 1});
      }
    }
  }

  // Tarjan SCCs restricted to alive nodes.
  std::vector<std::vector<NodeId>> sccs(const std::vector<char>& alive) const {
    std::vector<int> index(g.nodes.size(), -1), low(g.nodes.size(), 0);
    std::vector<char> on_stack(g.nodes.size(), 0);
    std::vector<NodeId> stack;
    std::vector<std::vector<NodeId>> out;
    int counter = 0;
    // Iterative Tarjan.
    struct Frame {
      NodeId v;
      size_t edge;
    };
    for (NodeId root = 0; root < g.nodes.size(); ++root) {
      if (!alive[root] || index[root] >= 0) continue;
      std::vector<Frame> frames{{root, 0}};
      index[root] = low[root] = counter++;
      stack.push_back(root);
      on_stack[root] = 1;
      while (!frames.empty()) {
        Frame& f = frames.back();
        if (f.edge < prog_edges[f.v].size()) {
          NodeId w = prog_edges[f.v][f.edge].first;
          ++f.edge;
          if (!alive[w]) continue;
          if (index[w] < 0) {
            index[w] = low[w] = counter++;
            stack.push_back(w);
            on_stack[w] = 1;
            frames.push_back({w, 0});
          } else if (on_stack[w]) {
            low[f.v] = std::min(low[f.v], index[w]);
          }
        } else {
          if (low[f.v] == index[f.v]) {
            std::vector<NodeId> scc;
            while (true) {
              NodeId w = stack.back();
              stack.pop_back();
              on_stack[w] = 0;
              scc.push_back(w);
              if (w == f.v) break;
            }
            out.push_back(std::move(scc));
          }
          NodeId child = f.v;
          frames.pop_back();
          if (!frames.empty()) low[frames.back().v] = std::min(low[frames.back().v], low[child]);
        }
      }
    }
    return out;
  }
};

bool challenge_answered(const Challenge& c, const std::vector<Answer>& answers,
                        const std::vector<char>& enabled) {
  for (size_t i = 0; i < answers.size(); ++i)
    if (enabled[i] && answers[i].pos == c.pos && term_eq(answers[i].sub, c.sub)) return true;
  return false;
}

// Shortest path inside an alive set using program edges and env stutters.
std::vector<std::pair<NodeId, StepKind>> path_within(const FairSearch& fs,
                                                     const std::vector<char>& alive, NodeId from,
                                                     NodeId to) {
  if (from == to) return {};
  std::vector<int> prev(fs.g.nodes.size(), -1);
  std::vector<StepKind> prev_kind(fs.g.nodes.size(), StepKind::Program);
  std::deque<NodeId> q{from};
  prev[from] = static_cast<int>(from);
  while (!q.empty()) {
    NodeId u = q.front();
    q.pop_front();
    for (auto& [v, tag] : fs.prog_edges[u]) {
      (void)tag;
      if (!alive[v] || prev[v] >= 0) continue;
      prev[v] = static_cast<int>(u);
      prev_kind[v] = StepKind::Program;
      if (v == to) {
        std::vector<std::pair<NodeId, StepKind>> path;
        NodeId cur = to;
        while (cur != from) {
          path.push_back({cur, prev_kind[cur]});
          cur = static_cast<NodeId>(prev[cur]);
        }
        std::reverse(path.begin(), path.end());
        return path;
      }
      q.push_back(v);
    }
  }
  throw ResourceError("SCC walk construction failed to connect nodes");
}

}  // namespace

std::optional<Lasso> find_nonterminating(const SpacePtr& space, const CodeMap& rho, const TermPtr& p,
                                         const Pred& pre, SearchMode mode, const Budget& budget,
                                         const Pred* avoid) {
  ConfigGraph g = reachable_graph(space, rho, p, pre, Rel::identity(space), budget);

  // Restrict reachability to the region itself: a lasso must stay inside.
  FairSearch fs(space, rho, g, avoid);
  std::vector<char> reachable(g.nodes.size(), 0);
  {
    std::deque<NodeId> q;
    for (NodeId id : g.initial)
      if (fs.region[id]) {
        reachable[id] = 1;
        q.push_back(id);
      }
    while (!q.empty()) {
      NodeId u = q.front();
      q.pop_front();
      for (auto& [v, k] : g.succ[u]) {
        (void)k;
        if (fs.region[v] && !reachable[v]) {
          reachable[v] = 1;
          q.push_back(v);
        }
      }
    }
  }

  auto region_stem = [&](NodeId target) -> Computation {
    // Parent path may leave the region only outside it never: initial region
    // nodes reach region targets via region nodes by construction of
    // `reachable`; recompute a clean path by BFS.
    std::vector<int> prev(g.nodes.size(), -1);
    std::vector<StepKind> prev_kind(g.nodes.size(), StepKind::Program);
    std::deque<NodeId> q;
    for (NodeId id : g.initial)
      if (fs.region[id]) {
        prev[id] = static_cast<int>(id);
        q.push_back(id);
      }
    while (!q.empty()) {
      NodeId u = q.front();
      q.pop_front();
      if (u == target) break;
      for (auto& [v, k] : g.succ[u]) {
        if (!fs.region[v] || prev[v] >= 0) continue;
        prev[v] = static_cast<int>(u);
        prev_kind[v] = k;
        q.push_back(v);
      }
    }
    std::vector<NodeId> rev;
    NodeId cur = target;
    while (prev[cur] != static_cast<int>(cur)) {
      rev.push_back(cur);
      cur = static_cast<NodeId>(prev[cur]);
    }
    rev.push_back(cur);
    Computation c;
    for (size_t i = rev.size(); i-- > 0;) {
      c.configs.push_back(g.nodes[rev[i]]);
      if (i > 0) c.kinds.push_back(prev_kind[rev[i - 1]]);
    }
    return c;
  };

  if (mode == SearchMode::Any) {
    for (NodeId u = 0; u < g.nodes.size(); ++u) {
      if (!reachable[u]) continue;
      Lasso l;
      l.stem = region_stem(u);
      l.cycle.configs = {g.nodes[u], g.nodes[u]};
      l.cycle.kinds = {StepKind::Env};
      return l;
    }
    return std::nullopt;
  }

  // FairOnly: a stutter-forever lasso is fair iff the term raises no
  // challenges at all.
  for (NodeId u = 0; u < g.nodes.size(); ++u) {
    if (!reachable[u] || !fs.node_challenges[u].empty()) continue;
    Lasso l;
    l.stem = region_stem(u);
    l.cycle.configs = {g.nodes[u], g.nodes[u]};
    l.cycle.kinds = {StepKind::Env};
    return l;
  }

  std::vector<char> alive = reachable;
  while (true) {
    bool deleted = false;
    for (const auto& scc : fs.sccs(alive)) {
      bool has_internal_edge = false;
      std::vector<char> in_scc(g.nodes.size(), 0);
      for (NodeId u : scc) in_scc[u] = 1;
      std::vector<char> enabled(fs.edge_answers.size(), 0);
      for (NodeId u : scc)
        for (auto& [v, tag] : fs.prog_edges[u])
          if (alive[v] && in_scc[v]) {
            enabled[tag] = 1;
            has_internal_edge = true;
          }
      if (!has_internal_edge) continue;  // trivial SCC: no program cycle here

      std::vector<NodeId> bad;
      for (NodeId u : scc)
        for (const Challenge& c : fs.node_challenges[u])
          if (!challenge_answered(c, fs.edge_answers, enabled)) {
            bad.push_back(u);
            break;
          }
      if (bad.empty()) {
        // Fair witness: a closed walk through every internal edge of the SCC.
        NodeId anchor = scc[0];
        for (NodeId u : scc) anchor = std::min(anchor, u);
        Computation cyc;
        cyc.configs = {g.nodes[anchor]};
        NodeId at = anchor;
        std::vector<char> walk_alive(g.nodes.size(), 0);
        for (NodeId u : scc) walk_alive[u] = alive[u];
        for (NodeId u : scc) {
          for (auto& [v, tag] : fs.prog_edges[u]) {
            (void)tag;
            if (!walk_alive[u] || !walk_alive[v] || !in_scc[v]) continue;
            for (auto& [n, k] : path_within(fs, walk_alive, at, u)) {
              cyc.configs.push_back(g.nodes[n]);
              cyc.kinds.push_back(k);
            }
            cyc.configs.push_back(g.nodes[v]);
            cyc.kinds.push_back(StepKind::Program);
            at = v;
          }
        }
        for (auto& [n, k] : path_within(fs, walk_alive, at, anchor)) {
          cyc.configs.push_back(g.nodes[n]);
          cyc.kinds.push_back(k);
        }
        Lasso l;
        l.stem = region_stem(anchor);
        l.cycle = std::move(cyc);
        FairVerdict fv = is_fair_lasso(space, rho, l);
        if (!fv.fair)
          throw ResourceError("internal error: constructed SCC witness is not fair");
        return l;
      }
      for (NodeId u : bad) {
        alive[u] = 0;
        deleted = true;
      }
    }
    if (!deleted) break;
  }
  return std::nullopt;
}

std::optional<Computation> find_terminating_avoiding(const SpacePtr& space, const CodeMap& rho,
                                                     const TermPtr& p, const Pred& pre,
                                                     const Pred& avoid, const Budget& budget) {
  Pred start = pre && !avoid;
  ConfigGraph g = reachable_graph(space, rho, p, start, Rel::bottom(space), budget);
  // Search program-step paths staying outside `avoid` (env is stuttering, so
  // dropping env steps loses nothing).
  std::vector<int> prev(g.nodes.size(), -1);
  std::deque<NodeId> q;
  for (NodeId id : g.initial) {
    prev[id] = static_cast<int>(id);
    q.push_back(id);
  }
  while (!q.empty()) {
    NodeId u = q.front();
    q.pop_front();
    if (is_skip(g.nodes[u].term)) {
      std::vector<NodeId> rev;
      NodeId cur = u;
      while (prev[cur] != static_cast<int>(cur)) {
        rev.push_back(cur);
        cur = static_cast<NodeId>(prev[cur]);
      }
      rev.push_back(cur);
      Computation c;
      for (size_t i = rev.size(); i-- > 0;) {
        c.configs.push_back(g.nodes[rev[i]]);
        if (i > 0) c.kinds.push_back(StepKind::Program);
      }
      return c;
    }
    for (auto& [v, k] : g.succ[u]) {
      if (k != StepKind::Program || prev[v] >= 0) continue;
      if (avoid.eval(g.nodes[v].state)) continue;
      prev[v] = static_cast<int>(u);
      q.push_back(v);
    }
  }
  return std::nullopt;
}

}  // namespace corewhile
