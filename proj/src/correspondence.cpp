#include "corewhile/correspondence.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <deque>
#include <map>
#include <mutex>
#include <sstream>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

namespace corewhile {

namespace {

struct PairKey {
  TermPtr u, v;
  bool operator==(const PairKey& o) const { return term_eq(u, o.u) && term_eq(v, o.v); }
};
struct PairKeyHash {
  size_t operator()(const PairKey& k) const { return hash_combine(k.u->hash, k.v->hash); }
};

using PairSet = std::unordered_set<PairKey, PairKeyHash>;

// Iteration support: list of r-pairs grouped by the second state, so the
// inner loops enumerate (s2, s1 in conv-row(s2)).
struct RelIndex {
  std::vector<std::vector<StateIdx>> conv_rows;  // s2 -> all s1 with (s1,s2) in r
  explicit RelIndex(const Rel& r) {
    uint64_t n = r.space()->state_count();
    conv_rows.resize(n);
    for (uint64_t a = 0; a < n; ++a)
      r.row(static_cast<StateIdx>(a)).for_each([&](size_t b) {
        conv_rows[b].push_back(static_cast<StateIdx>(a));
      });
  }
};

}  // namespace

bool SimRelation::contains(const TermPtr& u, const TermPtr& v) const {
  for (auto& [a, b] : pairs)
    if (term_eq(a, u) && term_eq(b, v)) return true;
  return false;
}

std::string SimFailure::describe(const SpacePtr& space) const {
  std::ostringstream os;
  os << "clause " << clause << " fails for pair (" << term_str(left) << " , " << term_str(right) << ")";
  if (clause == "step-match") {
    os << " at states (" << space->state_at(s1).str() << ", " << space->state_at(s2).str()
       << "): right step to (" << term_str(right_succ) << ", " << space->state_at(s2p).str()
       << ") has no matching left step";
  }
  return os.str();
}

SimCheck check_simulation(const SimRelation& x) {
  SimCheck out;
  StepCache cache_l, cache_r;
  RelIndex idx(x.r);
  uint64_t n = x.space->state_count();
  PairSet members;
  for (auto& [u, v] : x.pairs) members.insert(PairKey{u, v});
  for (auto& [u, v] : x.pairs) {
    if (is_skip(u) && !is_skip(v)) {
      out.ok = false;
      out.failure = SimFailure{"skip-left", u, v};
      return out;
    }
    if (is_skip(v) && !is_skip(u)) {
      out.ok = false;
      out.failure = SimFailure{"skip-right", u, v};
      return out;
    }
    for (uint64_t s2 = 0; s2 < n; ++s2) {
      if (idx.conv_rows[s2].empty()) continue;
      const auto& rsteps = cache_r.steps(x.space, x.rho_right, v, static_cast<StateIdx>(s2));
      if (rsteps.empty()) continue;
      for (StateIdx s1 : idx.conv_rows[s2]) {
        for (const Config& rs : rsteps) {
          bool matched = false;
          for (const Config& ls : cache_l.steps(x.space, x.rho_left, u, s1)) {
            if (x.r.eval(ls.state, rs.state) && members.count(PairKey{ls.term, rs.term})) {
              matched = true;
              break;
            }
          }
          if (!matched) {
            out.ok = false;
            out.failure = SimFailure{"step-match", u, v, s1, static_cast<StateIdx>(s2), rs.term, rs.state};
            return out;
          }
        }
      }
    }
  }
  return out;
}

namespace {

size_t codemap_fingerprint(const CodeMap& rho) {
  size_t h = rho.entries().size();
  for (auto& [i, t] : rho.entries()) h = hash_combine(h, hash_combine(i, t->hash));
  return h;
}

std::optional<SimRelation> corresponds_uncached(const SpacePtr& space, const CodeMap& rho_left,
                                                const TermPtr& p, const CodeMap& rho_right,
                                                const TermPtr& q, const Rel& r,
                                                const Budget& budget);

}  // namespace

// Greatest-simulation queries repeat across derivations, mutual checks and
// audits; memoize per process. Interned terms make pointer keys sound.
std::optional<SimRelation> corresponds(const SpacePtr& space, const CodeMap& rho_left,
                                       const TermPtr& p, const CodeMap& rho_right, const TermPtr& q,
                                       const Rel& r, const Budget& budget) {
  struct Key {
    const StateSpace* space;
    const Term *p, *q;
    size_t rho_l, rho_r;
    std::string r_text;
    bool operator<(const Key& o) const {
      return std::tie(space, p, q, rho_l, rho_r, r_text) <
             std::tie(o.space, o.p, o.q, o.rho_l, o.rho_r, o.r_text);
    }
  };
  static std::mutex mu;
  static std::map<Key, std::optional<SimRelation>> memo;
  Key key{space.get(), p.get(),  q.get(), codemap_fingerprint(rho_left),
          codemap_fingerprint(rho_right), r.str()};
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
  }
  auto result = corresponds_uncached(space, rho_left, p, rho_right, q, r, budget);
  std::lock_guard<std::mutex> lock(mu);
  memo.emplace(std::move(key), result);
  return result;
}

namespace {

std::optional<SimRelation> corresponds_uncached(const SpacePtr& space, const CodeMap& rho_left,
                                                const TermPtr& p, const CodeMap& rho_right,
                                                const TermPtr& q, const Rel& r,
                                                const Budget& budget) {
  StepCache cache_l, cache_r;
  RelIndex idx(r);
  uint64_t n = space->state_count();

  // Candidate pairs: closure of (p,q) under matched stepping.
  std::vector<PairKey> order;
  PairSet seen;
  std::deque<PairKey> queue;
  PairKey root{p, q};
  seen.insert(root);
  queue.push_back(root);
  while (!queue.empty()) {
    PairKey k = queue.front();
    queue.pop_front();
    order.push_back(k);
    if (order.size() > budget.max_nodes)
      throw ResourceError("correspondence candidate set exceeded the budget");
    for (uint64_t s2 = 0; s2 < n; ++s2) {
      if (idx.conv_rows[s2].empty()) continue;
      const auto& rsteps = cache_r.steps(space, rho_right, k.v, static_cast<StateIdx>(s2));
      if (rsteps.empty()) continue;
      for (StateIdx s1 : idx.conv_rows[s2]) {
        for (const Config& rs : rsteps) {
          for (const Config& ls : cache_l.steps(space, rho_left, k.u, s1)) {
            if (!r.eval(ls.state, rs.state)) continue;
            if (is_skip(ls.term) != is_skip(rs.term)) continue;  // dead on arrival
            PairKey nk{ls.term, rs.term};
            if (seen.insert(nk).second) queue.push_back(nk);
          }
        }
      }
    }
  }

  // Greatest fixpoint by deletion with dependency-driven rechecks: a pair is
  // rechecked only when one of the pairs it matched into gets deleted.
  std::unordered_map<PairKey, size_t, PairKeyHash> id_of;
  for (auto& k : order) id_of.emplace(k, id_of.size());
  std::vector<char> alive(order.size(), 0);
  for (size_t i = 0; i < order.size(); ++i)
    alive[i] = is_skip(order[i].u) == is_skip(order[i].v);

  std::vector<std::vector<uint32_t>> dependents(order.size());
  auto alive_lookup = [&](const PairKey& k) -> long long {
    auto it = id_of.find(k);
    if (it == id_of.end()) return -1;
    return alive[it->second] ? static_cast<long long>(it->second) : -1;
  };

  // Checks pair i; when deps is given, records every alive candidate match
  // so deletions can schedule rechecks.
  auto check_pair = [&](size_t i, bool record) -> bool {
    const PairKey& k = order[i];
    for (uint64_t s2 = 0; s2 < n; ++s2) {
      if (idx.conv_rows[s2].empty()) continue;
      const auto& rsteps = cache_r.steps(space, rho_right, k.v, static_cast<StateIdx>(s2));
      if (rsteps.empty()) continue;
      for (StateIdx s1 : idx.conv_rows[s2]) {
        for (const Config& rs : rsteps) {
          bool matched = false;
          for (const Config& ls : cache_l.steps(space, rho_left, k.u, s1)) {
            if (!r.eval(ls.state, rs.state)) continue;
            long long j = alive_lookup(PairKey{ls.term, rs.term});
            if (j >= 0) {
              matched = true;
              if (record) {
                auto& dep = dependents[static_cast<size_t>(j)];
                if (dep.empty() || dep.back() != static_cast<uint32_t>(i))
                  dep.push_back(static_cast<uint32_t>(i));
              }
              break;
            }
          }
          if (!matched) return false;
        }
      }
    }
    return true;
  };

  std::deque<size_t> recheck;
  std::vector<char> queued(order.size(), 0);
  auto kill = [&](size_t i) {
    alive[i] = 0;
    for (uint32_t d : dependents[i])
      if (alive[d] && !queued[d]) {
        queued[d] = 1;
        recheck.push_back(d);
      }
  };
  for (size_t i = 0; i < order.size(); ++i) {
    if (!alive[i]) continue;
    if (!check_pair(i, true)) kill(i);
  }
  while (!recheck.empty()) {
    size_t i = recheck.front();
    recheck.pop_front();
    queued[i] = 0;
    if (!alive[i]) continue;
    if (!check_pair(i, true)) kill(i);
  }

  PairSet alive_set;
  for (size_t i = 0; i < order.size(); ++i)
    if (alive[i]) alive_set.insert(order[i]);

  if (std::getenv("COREWHILE_DEBUG"))
    std::fprintf(stderr, "[corresponds] candidates=%zu alive=%zu\n", order.size(), alive_set.size());

  if (!alive_set.count(root)) return std::nullopt;

  // Restrict to pairs reachable inside the fixpoint, choosing the first
  // matching pair per challenge; the restriction is itself a simulation.
  PairSet kept;
  std::vector<PairKey> kept_order;
  std::deque<PairKey> wl;
  kept.insert(root);
  wl.push_back(root);
  while (!wl.empty()) {
    PairKey k = wl.front();
    wl.pop_front();
    kept_order.push_back(k);
    for (uint64_t s2 = 0; s2 < n; ++s2) {
      if (idx.conv_rows[s2].empty()) continue;
      const auto& rsteps = cache_r.steps(space, rho_right, k.v, static_cast<StateIdx>(s2));
      if (rsteps.empty()) continue;
      for (StateIdx s1 : idx.conv_rows[s2]) {
        for (const Config& rs : rsteps) {
          for (const Config& ls : cache_l.steps(space, rho_left, k.u, s1)) {
            if (!r.eval(ls.state, rs.state)) continue;
            PairKey nk{ls.term, rs.term};
            if (alive_set.count(nk)) {
              if (kept.insert(nk).second) wl.push_back(nk);
              break;
            }
          }
        }
      }
    }
  }

  SimRelation w{space, rho_left, rho_right, r, p, q, {}};
  for (auto& k : kept_order) w.pairs.emplace_back(k.u, k.v);
  return w;
}

}  // namespace

bool mutually_corresponds(const SpacePtr& space, const CodeMap& rho_left, const TermPtr& p,
                          const CodeMap& rho_right, const TermPtr& q, const Rel& r,
                          const Budget& budget) {
  if (!corresponds(space, rho_left, p, rho_right, q, r, budget)) return false;
  return corresponds(space, rho_right, q, rho_left, p, r.converse(), budget).has_value();
}

SimRelation compose_correspondence(const SimRelation& w1, const SimRelation& w2) {
  if (!term_eq(w1.root_right, w2.root_left))
    throw ArgError("composition needs w1's right root to equal w2's left root");
  SimRelation w{w1.space, w1.rho_left, w2.rho_right, w1.r.compose(w2.r),
                w1.root_left, w2.root_right, {}};
  PairSet seen;
  for (auto& [a, b] : w1.pairs)
    for (auto& [c, d] : w2.pairs) {
      if (!term_eq(b, c)) continue;
      PairKey k{a, d};
      if (seen.insert(k).second) w.pairs.emplace_back(a, d);
    }
  return w;
}

Computation replay(const SimRelation& w, StateIdx start, const Computation& sq_q,
                   const Rel& rely_left, const Rel& rely_right) {
  const SpacePtr& space = w.space;
  if (sq_q.configs.empty()) throw ArgError("empty computation");
  if (!term_eq(sq_q.configs[0].term, w.root_right))
    throw ArgError("computation does not start at the witness root");
  if (!w.r.eval(start, sq_q.configs[0].state))
    throw ArgError("start state is not r-related to the computation's first state");

  // r ; R' must be contained in R ; r for the environment replay to exist.
  {
    Rel lhs = w.r.compose(rely_right);
    Rel rhs = rely_left.compose(w.r);
    std::pair<StateIdx, StateIdx> bad;
    if (!lhs.subset_of(rhs, &bad))
      throw ArgError("rely inclusion r;R' <= R;r fails at (" + space->state_at(bad.first).str() +
                     ", " + space->state_at(bad.second).str() + ")");
  }

  StepCache cache_l;
  Computation out;
  TermPtr u = w.root_left;
  StateIdx su = start;
  out.configs.push_back({u, su});
  for (size_t i = 0; i + 1 < sq_q.length(); ++i) {
    const Config& nxt = sq_q.configs[i + 1];
    if (sq_q.kinds[i] == StepKind::Env) {
      if (!rely_right.eval(sq_q.configs[i].state, nxt.state))
        throw ArgError("right computation has an env step outside its rely");
      // some s' with (su, s') in R and (s', next right state) in r
      Bitset reach = rely_left.row(su);
      bool found = false;
      long long pick = -1;
      reach.for_each([&](size_t b) {
        if (!found && w.r.eval(static_cast<StateIdx>(b), nxt.state)) {
          found = true;
          pick = static_cast<long long>(b);
        }
      });
      if (!found) throw ArgError("environment replay failed (inclusion witness missing)");
      su = static_cast<StateIdx>(pick);
      out.configs.push_back({u, su});
      out.kinds.push_back(StepKind::Env);
    } else {
      bool found = false;
      for (const Config& ls : cache_l.steps(space, w.rho_left, u, su)) {
        if (w.r.eval(ls.state, nxt.state) && w.contains(ls.term, nxt.term)) {
          u = ls.term;
          su = ls.state;
          found = true;
          break;
        }
      }
      if (!found)
        throw ArgError("program replay failed at index " + std::to_string(i) +
                       " (witness is not a simulation?)");
      out.configs.push_back({u, su});
      out.kinds.push_back(StepKind::Program);
    }
  }
  return out;
}

ComponentwiseResult componentwise(const SpacePtr& space, size_t m, const Rel& r,
                                  const CodeMap& rho_left, const CodeMap& rho_right,
                                  const TermPtr& p, const TermPtr& q, const Budget& budget) {
  ComponentwiseResult out;
  if (m <= 1) {
    out.failing_clause = "m > 1 required";
    return out;
  }
  if (p->kind != TermKind::Parallel || p->comps.size() != m) {
    out.failing_clause = "left term is not a parallel composition of m components";
    return out;
  }
  if (q->kind != TermKind::Parallel || q->comps.size() != m) {
    out.failing_clause = "right term is not a parallel composition of m components";
    return out;
  }
  for (size_t i = 0; i < m; ++i) {
    if (!classify(space, rho_left, p->comps[i]).sequential) {
      out.failing_clause = "left component " + std::to_string(i + 1) + " is not sequential";
      return out;
    }
    if (!classify(space, rho_right, q->comps[i]).non_blocking) {
      out.failing_clause = "right component " + std::to_string(i + 1) + " is not non-blocking";
      return out;
    }
    auto w = corresponds(space, rho_left, p->comps[i], rho_right, q->comps[i], r, budget);
    if (!w) {
      out.failing_clause = "component " + std::to_string(i + 1) + " correspondence fails";
      return out;
    }
    out.witnesses.push_back(std::move(*w));
  }
  out.ok = true;
  return out;
}

}  // namespace corewhile
