#include "corewhile/rg.hpp"

#include "corewhile/transform.hpp"

#include <algorithm>
#include <deque>
#include <sstream>
#include <unordered_map>

namespace corewhile {

Triple Triple::predicate(SpacePtr space, CodeMap rho, Rel rely, Pred pre, TermPtr body, Pred post,
                         Rel guar) {
  Triple t{std::move(space), std::move(rho), TripleKind::Predicate, std::move(rely),
           std::move(pre),  std::move(post), std::nullopt,          std::nullopt,
           std::move(body), std::move(guar), ""};
  return t;
}

Triple Triple::relational(SpacePtr space, CodeMap rho, Rel rely, Rel pre, TermPtr body, Rel post,
                          Rel guar) {
  Triple t{std::move(space), std::move(rho), TripleKind::Relational, std::move(rely),
           std::nullopt,     std::nullopt,   std::move(pre),         std::move(post),
           std::move(body),  std::move(guar), ""};
  return t;
}

std::string Triple::str() const {
  std::ostringstream os;
  os << "[rely " << rely.str() << "] [pre "
     << (kind == TripleKind::Predicate ? pre_p->str() : pre_r->str()) << "] { "
     << term_str(body) << " } [post "
     << (kind == TripleKind::Predicate ? post_p->str() : post_r->str()) << "] [guar " << guar.str()
     << "]";
  return os.str();
}

namespace {

Computation path_to(const ConfigGraph& g, NodeId n) {
  std::vector<NodeId> rev;
  NodeId cur = n;
  while (g.parent[cur] != cur) {
    rev.push_back(cur);
    cur = g.parent[cur];
  }
  rev.push_back(cur);
  Computation c;
  for (size_t i = rev.size(); i-- > 0;) {
    c.configs.push_back(g.nodes[rev[i]]);
    if (i > 0) c.kinds.push_back(g.parent_kind[rev[i - 1]]);
  }
  return c;
}

}  // namespace

CheckResult check_triple(const Triple& t, const Budget& budget) {
  if (t.kind != TripleKind::Predicate) throw ArgError("check_triple needs a predicate triple");
  CheckResult out;
  ConfigGraph g = reachable_graph(t.space, t.rho, t.body, *t.pre_p, t.rely, budget);
  out.graph_nodes = g.nodes.size();
  out.graph_edges = g.edge_count;

  const Bitset& post = t.post_p->extension();

  // First-skip output condition. Skip nodes only lead to skip nodes, so a
  // first-skip configuration is an initial skip node or a skip node entered
  // from a non-skip node.
  auto fail_out = [&](const Computation& cex, StateIdx s) {
    out.pass = false;
    out.counterexample = cex;
    out.what = "first skip-configuration state " + t.space->state_at(s).str() +
               " violates the postcondition";
  };
  for (NodeId id : g.initial) {
    if (is_skip(g.nodes[id].term) && !post.get(g.nodes[id].state)) {
      fail_out(path_to(g, id), g.nodes[id].state);
      return out;
    }
  }
  for (NodeId u = 0; u < g.nodes.size(); ++u) {
    if (is_skip(g.nodes[u].term)) continue;
    for (auto& [v, k] : g.succ[u]) {
      if (!is_skip(g.nodes[v].term) || post.get(g.nodes[v].state)) continue;
      Computation cex = path_to(g, u);
      cex.configs.push_back(g.nodes[v]);
      cex.kinds.push_back(k);
      fail_out(cex, g.nodes[v].state);
      return out;
    }
  }

  // Program condition: every program edge lies in the guarantee.
  for (NodeId u = 0; u < g.nodes.size(); ++u) {
    for (auto& [v, k] : g.succ[u]) {
      if (k != StepKind::Program) continue;
      if (t.guar.eval(g.nodes[u].state, g.nodes[v].state)) continue;
      Computation cex = path_to(g, u);
      cex.configs.push_back(g.nodes[v]);
      cex.kinds.push_back(k);
      out.pass = false;
      out.counterexample = cex;
      out.what = "program step (" + t.space->state_at(g.nodes[u].state).str() + " -> " +
                 t.space->state_at(g.nodes[v].state).str() + ") violates the guarantee";
      return out;
    }
  }
  return out;
}

CheckResult check_triple_rel(const Triple& t, const Budget& budget) {
  if (t.kind != TripleKind::Relational) throw ArgError("check_triple_rel needs a relational triple");
  CheckResult out;
  uint64_t n = t.space->state_count();

  // One graph from the union of all per-start preconditions; per-start
  // reachability is tracked as origin sets, propagated in chunks.
  Bitset starts(n);
  for (uint64_t s0 = 0; s0 < n; ++s0) starts |= t.pre_r->row(static_cast<StateIdx>(s0));
  ConfigGraph g = reachable_graph(t.space, t.rho, t.body,
                                  Pred::from_states(t.space, starts, "range of relational pre"),
                                  t.rely, budget);
  out.graph_nodes = g.nodes.size();
  out.graph_edges = g.edge_count;

  Rel pre_conv = t.pre_r->converse();
  Rel post_conv = t.post_r->converse();

  // Guarantee violations are independent of the start; any origin reaching
  // one is a failing start.
  std::vector<std::pair<NodeId, NodeId>> bad_guar_edges;
  for (NodeId u = 0; u < g.nodes.size(); ++u)
    for (auto& [v, k] : g.succ[u])
      if (k == StepKind::Program && !t.guar.eval(g.nodes[u].state, g.nodes[v].state))
        bad_guar_edges.push_back({u, v});

  constexpr uint64_t kChunk = 256;
  for (uint64_t base = 0; base < n; base += kChunk) {
    uint64_t width = std::min(kChunk, n - base);
    std::vector<Bitset> origin(g.nodes.size(), Bitset(width));
    std::deque<NodeId> work;
    std::vector<bool> queued(g.nodes.size(), false);
    for (NodeId id : g.initial) {
      Bitset o(width);
      Bitset froms = pre_conv.row(g.nodes[id].state);
      for (uint64_t i = 0; i < width; ++i)
        if (froms.get(base + i)) o.set(i);
      if (o.any()) {
        origin[id] = std::move(o);
        work.push_back(id);
        queued[id] = true;
      }
    }
    while (!work.empty()) {
      NodeId u = work.front();
      work.pop_front();
      queued[u] = false;
      if (is_skip(g.nodes[u].term)) continue;  // first-skip: do not flow past skip
      for (auto& [v, k] : g.succ[u]) {
        Bitset nv = origin[v];
        nv |= origin[u];
        if (nv != origin[v]) {
          origin[v] = std::move(nv);
          if (!queued[v]) {
            work.push_back(v);
            queued[v] = true;
          }
        }
      }
    }

    auto first_failing = [&](NodeId node, const Bitset& allowed_q) -> long long {
      for (uint64_t i = 0; i < width; ++i)
        if (origin[node].get(i) && !allowed_q.get(base + i)) return static_cast<long long>(base + i);
      return -1;
    };

    for (NodeId u = 0; u < g.nodes.size(); ++u) {
      if (!is_skip(g.nodes[u].term) || origin[u].none()) continue;
      Bitset allowed = post_conv.row(g.nodes[u].state);
      long long bad = first_failing(u, allowed);
      if (bad >= 0) {
        out.pass = false;
        out.failing_start = static_cast<StateIdx>(bad);
        break;
      }
    }
    if (out.pass) {
      for (auto& [u, v] : bad_guar_edges) {
        long long bad = origin[u].first_set();
        if (bad >= 0) {
          out.pass = false;
          out.failing_start = static_cast<StateIdx>(base + bad);
          break;
        }
      }
    }
    if (!out.pass) break;
  }

  if (!out.pass && out.failing_start) {
    // Concrete counterexample: rerun the predicate check for that start.
    StateIdx s0 = *out.failing_start;
    Triple inst = Triple::predicate(
        t.space, t.rho, t.rely,
        Pred::from_states(t.space, t.pre_r->row(s0), "pre[" + t.space->state_at(s0).str() + "]"),
        t.body,
        Pred::from_states(t.space, t.post_r->row(s0), "post[" + t.space->state_at(s0).str() + "]"),
        t.guar);
    CheckResult inner = check_triple(inst, budget);
    out.counterexample = inner.counterexample;
    out.what = "start " + t.space->state_at(s0).str() + ": " + inner.what;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Derivation engine.

namespace {

struct DeriveCtx {
  SpacePtr space;
  CodeMap rho;
  Budget budget;
  bool seq_only = false;
  std::unordered_map<const Expr*, Pred> pred_cache;

  Pred pred(const ExprPtr& e) {
    auto it = pred_cache.find(e.get());
    if (it != pred_cache.end()) return it->second;
    Pred p(space, e);
    pred_cache.emplace(e.get(), p);
    return p;
  }
  Rel rel(const ExprPtr& e) { return cached_rel(space, e); }
};

void add_cond(Derivation& d, const std::string& name, bool ok, const std::string& witness = "") {
  d.conditions.push_back({name, ok, ok ? "" : witness});
}

bool all_ok(const Derivation& d) {
  for (auto& c : d.conditions)
    if (!c.passed) return false;
  for (auto& ch : d.children)
    if (!ch.complete) return false;
  return true;
}

// R[P] <= P
bool stable_pred(const Rel& r, const Pred& p, std::string* witness, const SpacePtr& space) {
  Bitset img = r.image(p.extension());
  long long bad = img.first_not_in(p.extension());
  if (bad < 0) return true;
  if (witness) *witness = "environment reaches " + space->state_at(static_cast<StateIdx>(bad)).str();
  return false;
}

// P;R <= P
bool stable_rel(const Pred&, const Rel& p, const Rel& r, std::string* witness, const SpacePtr& space) {
  Rel comp = p.compose(r);
  std::pair<StateIdx, StateIdx> bad;
  if (comp.subset_of(p, &bad)) return true;
  if (witness)
    *witness = "pair (" + space->state_at(bad.first).str() + ", " + space->state_at(bad.second).str() +
               ") escapes the relational precondition";
  return false;
}

bool rel_incl(const Rel& a, const Rel& b, std::string* witness, const SpacePtr& space) {
  std::pair<StateIdx, StateIdx> bad;
  if (a.subset_of(b, &bad)) return true;
  if (witness)
    *witness = "(" + space->state_at(bad.first).str() + ", " + space->state_at(bad.second).str() + ")";
  return false;
}

bool pred_incl(const Pred& a, const Pred& b, std::string* witness, const SpacePtr& space) {
  long long bad = a.extension().first_not_in(b.extension());
  if (bad < 0) return true;
  if (witness) *witness = space->state_at(static_cast<StateIdx>(bad)).str();
  return false;
}

// {(a,b) in P | b in C}
Rel restrict_second(const Rel& p, const Pred& c) {
  uint64_t n = p.space()->state_count();
  std::vector<Bitset> rows;
  rows.reserve(n);
  for (uint64_t a = 0; a < n; ++a) {
    Bitset row = p.row(static_cast<StateIdx>(a));
    row &= c.extension();
    rows.push_back(std::move(row));
  }
  return Rel::from_rows(p.space(), std::move(rows), "(" + p.str() + " restricted to " + c.str() + ")");
}

Derivation derive_node(DeriveCtx& ctx, const Triple& goal, const RuleScript& s);

Triple child_pred(const Triple& goal, Rel rely, Pred pre, TermPtr body, Pred post, Rel guar) {
  Triple t = Triple::predicate(goal.space, goal.rho, std::move(rely), std::move(pre), std::move(body),
                               std::move(post), std::move(guar));
  return t;
}

Triple child_rel(const Triple& goal, Rel rely, Rel pre, TermPtr body, Rel post, Rel guar) {
  Triple t = Triple::relational(goal.space, goal.rho, std::move(rely), std::move(pre), std::move(body),
                                std::move(post), std::move(guar));
  return t;
}

bool need(Derivation& d, const RuleScript& s, const std::string& key) {
  if (s.exprs.count(key)) return true;
  add_cond(d, "annotation-" + key, false, "missing script annotation '" + key + "'");
  return false;
}

Derivation rule_skip(DeriveCtx&, const Triple& goal, const RuleScript&) {
  Derivation d{"skip", goal};
  if (goal.body->kind != TermKind::Skip) {
    add_cond(d, "body-is-skip", false, term_str(goal.body));
    return d;
  }
  if (goal.kind == TripleKind::Predicate)
    add_cond(d, "post-equals-pre", goal.pre_p->same_extension(*goal.post_p),
             "skip rule concludes with the precondition as postcondition");
  else
    add_cond(d, "post-equals-pre", goal.pre_r->same_extension(*goal.post_r),
             "skip rule concludes with the precondition as postcondition");
  return d;
}

Derivation rule_basic(DeriveCtx&, const Triple& goal, const RuleScript&) {
  Derivation d{"basic", goal};
  if (goal.body->kind != TermKind::Basic) {
    add_cond(d, "body-is-basic", false, term_str(goal.body));
    return d;
  }
  const Transformer& f = *goal.body->f;
  const SpacePtr& space = goal.space;
  std::string w;
  if (goal.kind == TripleKind::Predicate) {
    add_cond(d, "pre-stability", stable_pred(goal.rely, *goal.pre_p, &w, space), w);
    bool ok = true;
    std::string witness;
    goal.pre_p->extension().for_each([&](size_t s) {
      if (!ok) return;
      StateIdx fs = f.apply(static_cast<StateIdx>(s));
      if (!goal.post_p->eval(fs)) {
        ok = false;
        witness = "f " + space->state_at(s).str() + " = " + space->state_at(fs).str() +
                  " misses the postcondition";
      } else if (!goal.guar.eval(static_cast<StateIdx>(s), fs)) {
        ok = false;
        witness = "step at " + space->state_at(s).str() + " violates the guarantee";
      }
    });
    add_cond(d, "basic-post-and-guarantee", ok, witness);
  } else {
    add_cond(d, "pre-stability", stable_rel(Pred::top(space), *goal.pre_r, goal.rely, &w, space), w);
    bool ok = true;
    std::string witness;
    uint64_t n = space->state_count();
    for (uint64_t s0 = 0; s0 < n && ok; ++s0) {
      goal.pre_r->row(static_cast<StateIdx>(s0)).for_each([&](size_t s) {
        if (!ok) return;
        StateIdx fs = f.apply(static_cast<StateIdx>(s));
        if (!goal.post_r->eval(static_cast<StateIdx>(s0), fs)) {
          ok = false;
          witness = "start " + space->state_at(s0).str() + ", step at " + space->state_at(s).str();
        } else if (!goal.guar.eval(static_cast<StateIdx>(s), fs)) {
          ok = false;
          witness = "guarantee at " + space->state_at(s).str();
        }
      });
    }
    add_cond(d, "basic-post-and-guarantee", ok, witness);
  }
  return d;
}

Derivation rule_seq(DeriveCtx& ctx, const Triple& goal, const RuleScript& s) {
  Derivation d{"seq", goal};
  if (goal.body->kind != TermKind::Seq) {
    add_cond(d, "body-is-seq", false, term_str(goal.body));
    return d;
  }
  if (!need(d, s, "mid") || s.children.size() != 2) {
    if (s.children.size() != 2) add_cond(d, "two-children", false, "seq rule needs two child scripts");
    return d;
  }
  StateIdx refl_w = 0;
  add_cond(d, "guarantee-reflexive", goal.guar.reflexive(&refl_w),
           "not reflexive at " + goal.space->state_at(refl_w).str());
  std::string w;
  if (goal.kind == TripleKind::Predicate) {
    Pred mid = ctx.pred(s.exprs.at("mid"));
    d.children.push_back(derive_node(ctx, child_pred(goal, goal.rely, *goal.pre_p, goal.body->a, mid, goal.guar), s.children[0]));
    d.children.push_back(derive_node(ctx, child_pred(goal, goal.rely, mid, goal.body->b, *goal.post_p, goal.guar), s.children[1]));
    bool stab = !is_skip(goal.body->b) || stable_pred(goal.rely, *goal.post_p, &w, goal.space);
    add_cond(d, "post-stable-when-tail-skip", stab, w);
  } else {
    Rel mid = ctx.rel(s.exprs.at("mid"));
    d.children.push_back(derive_node(ctx, child_rel(goal, goal.rely, *goal.pre_r, goal.body->a, mid, goal.guar), s.children[0]));
    d.children.push_back(derive_node(ctx, child_rel(goal, goal.rely, mid, goal.body->b, *goal.post_r, goal.guar), s.children[1]));
    bool stab = !is_skip(goal.body->b) ||
                stable_rel(Pred::top(goal.space), *goal.post_r, goal.rely, &w, goal.space);
    add_cond(d, "post-stable-when-tail-skip", stab, w);
  }
  return d;
}

Derivation rule_while(DeriveCtx& ctx, const Triple& goal, const RuleScript& s) {
  Derivation d{"while", goal};
  if (goal.body->kind != TermKind::While) {
    add_cond(d, "body-is-while", false, term_str(goal.body));
    return d;
  }
  if (s.children.size() != 2) {
    add_cond(d, "two-children", false, "while rule needs body and else child scripts");
    return d;
  }
  StateIdx refl_w = 0;
  add_cond(d, "guarantee-reflexive", goal.guar.reflexive(&refl_w),
           "not reflexive at " + goal.space->state_at(refl_w).str());
  const Pred& c = *goal.body->cond;
  std::string w;
  if (goal.kind == TripleKind::Predicate) {
    add_cond(d, "invariant-stability", stable_pred(goal.rely, *goal.pre_p, &w, goal.space), w);
    d.children.push_back(derive_node(ctx, child_pred(goal, goal.rely, *goal.pre_p && c, goal.body->a, *goal.pre_p, goal.guar), s.children[0]));
    d.children.push_back(derive_node(ctx, child_pred(goal, goal.rely, *goal.pre_p && !c, goal.body->b, *goal.post_p, goal.guar), s.children[1]));
  } else {
    add_cond(d, "invariant-stability", stable_rel(Pred::top(goal.space), *goal.pre_r, goal.rely, &w, goal.space), w);
    d.children.push_back(derive_node(ctx, child_rel(goal, goal.rely, restrict_second(*goal.pre_r, c), goal.body->a, *goal.pre_r, goal.guar), s.children[0]));
    d.children.push_back(derive_node(ctx, child_rel(goal, goal.rely, restrict_second(*goal.pre_r, !c), goal.body->b, *goal.post_r, goal.guar), s.children[1]));
  }
  return d;
}

Derivation rule_ite(DeriveCtx& ctx, const Triple& goal, const RuleScript& s) {
  Derivation d{"ite", goal};
  if (goal.body->kind != TermKind::Ite) {
    add_cond(d, "body-is-ite", false, term_str(goal.body));
    return d;
  }
  if (s.children.size() != 2) {
    add_cond(d, "two-children", false, "ite rule needs then and else child scripts");
    return d;
  }
  StateIdx refl_w = 0;
  add_cond(d, "guarantee-reflexive", goal.guar.reflexive(&refl_w),
           "not reflexive at " + goal.space->state_at(refl_w).str());
  const Pred& c = *goal.body->cond;
  std::string w;
  if (goal.kind == TripleKind::Predicate) {
    add_cond(d, "pre-stability", stable_pred(goal.rely, *goal.pre_p, &w, goal.space), w);
    d.children.push_back(derive_node(ctx, child_pred(goal, goal.rely, *goal.pre_p && c, goal.body->a, *goal.post_p, goal.guar), s.children[0]));
    d.children.push_back(derive_node(ctx, child_pred(goal, goal.rely, *goal.pre_p && !c, goal.body->b, *goal.post_p, goal.guar), s.children[1]));
  } else {
    add_cond(d, "pre-stability", stable_rel(Pred::top(goal.space), *goal.pre_r, goal.rely, &w, goal.space), w);
    d.children.push_back(derive_node(ctx, child_rel(goal, goal.rely, restrict_second(*goal.pre_r, c), goal.body->a, *goal.post_r, goal.guar), s.children[0]));
    d.children.push_back(derive_node(ctx, child_rel(goal, goal.rely, restrict_second(*goal.pre_r, !c), goal.body->b, *goal.post_r, goal.guar), s.children[1]));
  }
  return d;
}

Derivation rule_await(DeriveCtx& ctx, const Triple& goal, const RuleScript&) {
  Derivation d{"await", goal};
  if (goal.body->kind != TermKind::Await) {
    add_cond(d, "body-is-await", false, term_str(goal.body));
    return d;
  }
  const Pred& c = *goal.body->cond;
  const TermPtr& body = goal.body->a;
  const SpacePtr& space = goal.space;
  std::string w;
  if (goal.kind == TripleKind::Predicate) {
    add_cond(d, "pre-stability", stable_pred(goal.rely, *goal.pre_p, &w, space), w);
    bool ok = true;
    std::string witness;
    (*goal.pre_p && c).extension().for_each([&](size_t s) {
      if (!ok) return;
      for (StateIdx sp : await_closure(space, goal.rho, body, static_cast<StateIdx>(s),
                                       ctx.budget.max_nodes)) {
        if (!goal.post_p->eval(sp) || !goal.guar.eval(static_cast<StateIdx>(s), sp)) {
          ok = false;
          witness = "atomic run " + space->state_at(s).str() + " -> " + space->state_at(sp).str();
          return;
        }
      }
    });
    add_cond(d, "await-subgoals", ok, witness);
  } else {
    add_cond(d, "pre-stability", stable_rel(Pred::top(space), *goal.pre_r, goal.rely, &w, space), w);
    bool ok = true;
    std::string witness;
    uint64_t n = space->state_count();
    for (uint64_t s0 = 0; s0 < n && ok; ++s0) {
      goal.pre_r->row(static_cast<StateIdx>(s0)).for_each([&](size_t s) {
        if (!ok || !c.eval(static_cast<StateIdx>(s))) return;
        for (StateIdx sp : await_closure(space, goal.rho, body, static_cast<StateIdx>(s),
                                         ctx.budget.max_nodes)) {
          if (!goal.post_r->eval(static_cast<StateIdx>(s0), sp) ||
              !goal.guar.eval(static_cast<StateIdx>(s), sp)) {
            ok = false;
            witness = "start " + space->state_at(s0).str() + ", atomic run " +
                      space->state_at(s).str() + " -> " + space->state_at(sp).str();
            return;
          }
        }
      });
    }
    add_cond(d, "await-subgoals", ok, witness);
  }
  return d;
}

Derivation rule_parallel(DeriveCtx& ctx, const Triple& goal, const RuleScript& s) {
  Derivation d{"parallel", goal};
  if (ctx.seq_only) {
    add_cond(d, "rule-allowed", false, "parallel rule is excluded from sequential derivations");
    return d;
  }
  if (goal.body->kind != TermKind::Parallel) {
    add_cond(d, "body-is-parallel", false, term_str(goal.body));
    return d;
  }
  size_t m = goal.body->comps.size();
  if (s.contracts.size() != m || s.children.size() != m) {
    add_cond(d, "contracts-and-children", false,
             "parallel rule needs one {rely,pre,post} contract and one child per component");
    return d;
  }
  StateIdx refl_w = 0;
  add_cond(d, "guarantee-reflexive", goal.guar.reflexive(&refl_w),
           "not reflexive at " + goal.space->state_at(refl_w).str());
  std::vector<Rel> relies;
  for (size_t k = 0; k < m; ++k) {
    auto it = s.contracts[k].find("rely");
    if (it == s.contracts[k].end()) {
      add_cond(d, "annotation-rely", false, "component " + std::to_string(k + 1));
      return d;
    }
    relies.push_back(ctx.rel(it->second));
  }
  std::string w;
  if (goal.kind == TripleKind::Predicate) {
    std::vector<Pred> pres, posts;
    for (size_t k = 0; k < m; ++k) {
      if (!s.contracts[k].count("pre") || !s.contracts[k].count("post")) {
        add_cond(d, "annotation-pre/post", false, "component " + std::to_string(k + 1));
        return d;
      }
      pres.push_back(ctx.pred(s.contracts[k].at("pre")));
      posts.push_back(ctx.pred(s.contracts[k].at("post")));
    }
    for (size_t k = 0; k < m; ++k)
      add_cond(d, "pre-implies-component-" + std::to_string(k + 1),
               pred_incl(*goal.pre_p, pres[k], &w, goal.space), w);
    for (size_t k = 0; k < m; ++k)
      add_cond(d, "rely-implies-component-" + std::to_string(k + 1),
               rel_incl(goal.rely, relies[k], &w, goal.space), w);
    Pred combined = posts[0];
    for (size_t k = 1; k < m; ++k) combined = combined && posts[k];
    add_cond(d, "post-combination", pred_incl(combined, *goal.post_p, &w, goal.space), w);
    for (size_t k = 0; k < m; ++k)
      add_cond(d, "post-stability-component-" + std::to_string(k + 1),
               stable_pred(relies[k], posts[k], &w, goal.space), w);
    for (size_t k = 0; k < m; ++k) {
      Rel guar_k = goal.guar;
      for (size_t l = 0; l < m; ++l)
        if (l != k) guar_k = guar_k.intersect(relies[l]);
      d.children.push_back(derive_node(
          ctx, child_pred(goal, relies[k], pres[k], goal.body->comps[k], posts[k], guar_k),
          s.children[k]));
    }
  } else {
    std::vector<Rel> pres, posts;
    for (size_t k = 0; k < m; ++k) {
      if (!s.contracts[k].count("pre") || !s.contracts[k].count("post")) {
        add_cond(d, "annotation-pre/post", false, "component " + std::to_string(k + 1));
        return d;
      }
      pres.push_back(ctx.rel(s.contracts[k].at("pre")));
      posts.push_back(ctx.rel(s.contracts[k].at("post")));
    }
    for (size_t k = 0; k < m; ++k)
      add_cond(d, "pre-implies-component-" + std::to_string(k + 1),
               rel_incl(*goal.pre_r, pres[k], &w, goal.space), w);
    for (size_t k = 0; k < m; ++k)
      add_cond(d, "rely-implies-component-" + std::to_string(k + 1),
               rel_incl(goal.rely, relies[k], &w, goal.space), w);
    Rel combined = posts[0];
    for (size_t k = 1; k < m; ++k) combined = combined.intersect(posts[k]);
    add_cond(d, "post-combination", rel_incl(combined, *goal.post_r, &w, goal.space), w);
    for (size_t k = 0; k < m; ++k)
      add_cond(d, "post-stability-component-" + std::to_string(k + 1),
               rel_incl(posts[k].compose(relies[k]), posts[k], &w, goal.space), w);
    for (size_t k = 0; k < m; ++k) {
      Rel guar_k = goal.guar;
      for (size_t l = 0; l < m; ++l)
        if (l != k) guar_k = guar_k.intersect(relies[l]);
      d.children.push_back(derive_node(
          ctx, child_rel(goal, relies[k], pres[k], goal.body->comps[k], posts[k], guar_k),
          s.children[k]));
    }
  }
  return d;
}

Derivation rule_conseq(DeriveCtx& ctx, const Triple& goal, const RuleScript& s) {
  Derivation d{"conseq", goal};
  if (ctx.seq_only) {
    add_cond(d, "rule-allowed", false, "consequence rule is excluded from sequential derivations");
    return d;
  }
  if (s.children.size() != 1) {
    add_cond(d, "one-child", false, "conseq rule needs one child script");
    return d;
  }
  Rel prem_rely = s.exprs.count("rely") ? ctx.rel(s.exprs.at("rely")) : goal.rely;
  Rel prem_guar = s.exprs.count("guar") ? ctx.rel(s.exprs.at("guar")) : goal.guar;
  std::string w;
  add_cond(d, "rely-strengthens", rel_incl(goal.rely, prem_rely, &w, goal.space), w);
  add_cond(d, "guarantee-weakens", rel_incl(prem_guar, goal.guar, &w, goal.space), w);
  if (goal.kind == TripleKind::Predicate) {
    Pred prem_pre = s.exprs.count("pre") ? ctx.pred(s.exprs.at("pre")) : *goal.pre_p;
    Pred prem_post = s.exprs.count("post") ? ctx.pred(s.exprs.at("post")) : *goal.post_p;
    add_cond(d, "pre-strengthens", pred_incl(*goal.pre_p, prem_pre, &w, goal.space), w);
    add_cond(d, "post-weakens", pred_incl(prem_post, *goal.post_p, &w, goal.space), w);
    d.children.push_back(derive_node(ctx, child_pred(goal, prem_rely, prem_pre, goal.body, prem_post, prem_guar), s.children[0]));
  } else {
    Rel prem_pre = s.exprs.count("pre") ? ctx.rel(s.exprs.at("pre")) : *goal.pre_r;
    Rel prem_post = s.exprs.count("post") ? ctx.rel(s.exprs.at("post")) : *goal.post_r;
    add_cond(d, "pre-strengthens", rel_incl(*goal.pre_r, prem_pre, &w, goal.space), w);
    add_cond(d, "post-weakens", rel_incl(prem_post, *goal.post_r, &w, goal.space), w);
    d.children.push_back(derive_node(ctx, child_rel(goal, prem_rely, prem_pre, goal.body, prem_post, prem_guar), s.children[0]));
  }
  return d;
}

Derivation rule_corr(DeriveCtx& ctx, const Triple& goal, const RuleScript& s) {
  Derivation d{"corr", goal};
  if (ctx.seq_only) {
    add_cond(d, "rule-allowed", false, "correspondence rule is excluded from sequential derivations");
    return d;
  }
  if (!s.via || s.children.size() != 1 || !s.exprs.count("rel") || !s.exprs.count("rely") ||
      !s.exprs.count("pre") || !s.exprs.count("post") || !s.exprs.count("guar")) {
    add_cond(d, "annotations", false,
             "corr rule needs via=TERM, rel=[..] and the premise rely/pre/post/guar");
    return d;
  }
  Rel r = ctx.rel(s.exprs.at("rel"));
  Rel prem_rely = ctx.rel(s.exprs.at("rely"));
  Rel prem_guar = ctx.rel(s.exprs.at("guar"));
  std::string w;
  auto corr = corresponds(goal.space, goal.rho, s.via, goal.rho, goal.body, r, ctx.budget);
  add_cond(d, "correspondence", corr.has_value(),
           term_str(s.via) + " does not correspond to " + term_str(goal.body) + " w.r.t. " + r.str());
  add_cond(d, "rely-commutes", rel_incl(r.compose(goal.rely), prem_rely.compose(r), &w, goal.space), w);
  Rel lifted_guar = r.converse().compose(prem_guar).compose(r);
  add_cond(d, "guarantee-transports", rel_incl(lifted_guar, goal.guar, &w, goal.space), w);
  if (goal.kind == TripleKind::Predicate) {
    Pred prem_pre = ctx.pred(s.exprs.at("pre"));
    Pred prem_post = ctx.pred(s.exprs.at("post"));
    add_cond(d, "pre-in-image",
             pred_incl(*goal.pre_p,
                       Pred::from_states(goal.space, r.image(prem_pre.extension()), "r[P]"), &w,
                       goal.space),
             w);
    add_cond(d, "post-image-out",
             pred_incl(Pred::from_states(goal.space, r.image(prem_post.extension()), "r[Q]"),
                       *goal.post_p, &w, goal.space),
             w);
    d.children.push_back(derive_node(ctx, child_pred(goal, prem_rely, prem_pre, s.via, prem_post, prem_guar), s.children[0]));
  } else {
    Rel prem_pre = ctx.rel(s.exprs.at("pre"));
    Rel prem_post = ctx.rel(s.exprs.at("post"));
    add_cond(d, "pre-in-image", rel_incl(*goal.pre_r, prem_pre.compose(r), &w, goal.space), w);
    add_cond(d, "post-image-out", rel_incl(prem_post.compose(r), *goal.post_r, &w, goal.space), w);
    d.children.push_back(derive_node(ctx, child_rel(goal, prem_rely, prem_pre, s.via, prem_post, prem_guar), s.children[0]));
  }
  return d;
}

Derivation rule_conj_disj(DeriveCtx& ctx, const Triple& goal, const RuleScript& s, bool conj) {
  Derivation d{conj ? "conj" : "disj", goal};
  if (s.contracts.size() != 2 || s.children.size() != 2) {
    add_cond(d, "contracts-and-children", false,
             "combination rule needs two premise {rely,pre,post,guar} groups and two children");
    return d;
  }
  for (auto& c : s.contracts)
    if (!c.count("rely") || !c.count("pre") || !c.count("post") || !c.count("guar")) {
      add_cond(d, "annotations", false, "each premise group needs rely, pre, post, guar");
      return d;
    }
  Rel r1 = ctx.rel(s.contracts[0].at("rely")), r2 = ctx.rel(s.contracts[1].at("rely"));
  Rel g1 = ctx.rel(s.contracts[0].at("guar")), g2 = ctx.rel(s.contracts[1].at("guar"));
  add_cond(d, "rely-is-meet", goal.rely.same_extension(r1.intersect(r2)),
           "goal rely must be the intersection of the premise relies");
  Rel gcomb = conj ? g1.intersect(g2) : g1.unite(g2);
  add_cond(d, "guarantee-combination", gcomb.subset_of(goal.guar) && goal.guar.subset_of(gcomb),
           "goal guarantee must be the combination of the premise guarantees");
  if (goal.kind == TripleKind::Predicate) {
    Pred p1 = ctx.pred(s.contracts[0].at("pre")), p2 = ctx.pred(s.contracts[1].at("pre"));
    Pred q1 = ctx.pred(s.contracts[0].at("post")), q2 = ctx.pred(s.contracts[1].at("post"));
    Pred pc = conj ? (p1 && p2) : (p1 || p2);
    Pred qc = conj ? (q1 && q2) : (q1 || q2);
    add_cond(d, "pre-combination", goal.pre_p->same_extension(pc), "goal pre mismatch");
    add_cond(d, "post-combination", goal.post_p->same_extension(qc), "goal post mismatch");
    d.children.push_back(derive_node(ctx, child_pred(goal, r1, p1, goal.body, q1, g1), s.children[0]));
    d.children.push_back(derive_node(ctx, child_pred(goal, r2, p2, goal.body, q2, g2), s.children[1]));
  } else {
    Rel p1 = ctx.rel(s.contracts[0].at("pre")), p2 = ctx.rel(s.contracts[1].at("pre"));
    Rel q1 = ctx.rel(s.contracts[0].at("post")), q2 = ctx.rel(s.contracts[1].at("post"));
    Rel pc = conj ? p1.intersect(p2) : p1.unite(p2);
    Rel qc = conj ? q1.intersect(q2) : q1.unite(q2);
    add_cond(d, "pre-combination", goal.pre_r->same_extension(pc), "goal pre mismatch");
    add_cond(d, "post-combination", goal.post_r->same_extension(qc), "goal post mismatch");
    d.children.push_back(derive_node(ctx, child_rel(goal, r1, p1, goal.body, q1, g1), s.children[0]));
    d.children.push_back(derive_node(ctx, child_rel(goal, r2, p2, goal.body, q2, g2), s.children[1]));
  }
  return d;
}

Derivation rule_ldiv(DeriveCtx& ctx, const Triple& goal, const RuleScript& s) {
  Derivation d{"ldiv", goal};
  if (goal.kind != TripleKind::Relational) {
    add_cond(d, "relational-goal", false, "ldiv applies to relational triples only");
    return d;
  }
  if (!need(d, s, "post") || s.children.size() != 1) {
    if (s.children.size() != 1) add_cond(d, "one-child", false, "ldiv rule needs one child script");
    return d;
  }
  Rel qprime = ctx.rel(s.exprs.at("post"));
  std::string w;
  add_cond(d, "pre-post-composition",
           rel_incl(goal.pre_r->compose(qprime), *goal.post_r, &w, goal.space), w);
  d.children.push_back(derive_node(
      ctx, child_rel(goal, goal.rely, Rel::identity(goal.space), goal.body, qprime, goal.guar),
      s.children[0]));
  return d;
}

Derivation rule_splitbasic(DeriveCtx& ctx, const Triple& goal, const RuleScript& s) {
  Derivation d{"splitbasic", goal};
  if (goal.kind != TripleKind::Predicate) {
    add_cond(d, "predicate-goal", false, "splitbasic applies to predicate triples");
    return d;
  }
  if (goal.body->kind != TermKind::Seq || goal.body->a->kind != TermKind::Basic ||
      goal.body->b->kind != TermKind::Basic) {
    add_cond(d, "body-is-basic-seq", false, "goal body must be basic f ; basic g");
    return d;
  }
  if (s.children.size() != 1) {
    add_cond(d, "one-child", false, "splitbasic needs the child for the fused basic");
    return d;
  }
  const Transformer& f = *goal.body->a->f;
  const Transformer& g = *goal.body->b->f;
  // The split lands in the sequencing rule, whose guarantee must cover the
  // state-preserving skip step.
  StateIdx refl_w = 0;
  add_cond(d, "guarantee-reflexive", goal.guar.reflexive(&refl_w),
           "not reflexive at " + goal.space->state_at(refl_w).str());
  SplitVerdict v = check_split_basic(f, g, goal.rely, goal.guar);
  std::string w;
  if (!v.pass) {
    w = v.failed_condition;
    if (v.witness_state) w += " at " + goal.space->state_at(*v.witness_state).str();
    if (v.witness_pair)
      w += " at (" + goal.space->state_at(v.witness_pair->first).str() + ", " +
           goal.space->state_at(v.witness_pair->second).str() + ")";
  }
  add_cond(d, "split-conditions", v.pass, w);
  d.children.push_back(derive_node(
      ctx,
      child_pred(goal, goal.rely, *goal.pre_p, t_basic(Transformer::composed(f, g)), *goal.post_p,
                 goal.guar),
      s.children[0]));
  return d;
}

Derivation derive_node(DeriveCtx& ctx, const Triple& goal, const RuleScript& s) {
  Derivation d{s.rule, goal, {}, {}, false};
  if (s.rule == "skip") d = rule_skip(ctx, goal, s);
  else if (s.rule == "basic") d = rule_basic(ctx, goal, s);
  else if (s.rule == "seq") d = rule_seq(ctx, goal, s);
  else if (s.rule == "while") d = rule_while(ctx, goal, s);
  else if (s.rule == "ite") d = rule_ite(ctx, goal, s);
  else if (s.rule == "await") d = rule_await(ctx, goal, s);
  else if (s.rule == "parallel") d = rule_parallel(ctx, goal, s);
  else if (s.rule == "conseq") d = rule_conseq(ctx, goal, s);
  else if (s.rule == "corr") d = rule_corr(ctx, goal, s);
  else if (s.rule == "conj") d = rule_conj_disj(ctx, goal, s, true);
  else if (s.rule == "disj") d = rule_conj_disj(ctx, goal, s, false);
  else if (s.rule == "ldiv") d = rule_ldiv(ctx, goal, s);
  else if (s.rule == "splitbasic") d = rule_splitbasic(ctx, goal, s);
  else add_cond(d, "known-rule", false, "unknown rule '" + s.rule + "'");
  d.complete = all_ok(d);
  return d;
}

}  // namespace

std::string Derivation::first_failure() const {
  for (auto& c : conditions)
    if (!c.passed) return rule + ": " + c.name + (c.witness.empty() ? "" : " (" + c.witness + ")");
  for (auto& ch : children) {
    std::string f = ch.first_failure();
    if (!f.empty()) return f;
  }
  return "";
}

std::string Derivation::str(int indent) const {
  std::ostringstream os;
  std::string pad(indent * 2, ' ');
  os << pad << rule << " " << goal.str() << "\n";
  for (auto& c : conditions)
    os << pad << "  | " << c.name << ": " << (c.passed ? "ok" : "FAIL " + c.witness) << "\n";
  for (auto& ch : children) os << ch.str(indent + 1);
  return os.str();
}

Derivation derive(const Triple& goal, const RuleScript& script, const Budget& budget) {
  DeriveCtx ctx{goal.space, goal.rho, budget, false};
  return derive_node(ctx, goal, script);
}

Derivation derive_seq(const Triple& goal, const RuleScript& script, const Budget& budget) {
  DeriveCtx ctx{goal.space, goal.rho, budget, true};
  return derive_node(ctx, goal, script);
}

CheckResult soundness_audit(const Derivation& d, const Budget& budget, bool every_node) {
  CheckResult root = d.goal.kind == TripleKind::Predicate ? check_triple(d.goal, budget)
                                                          : check_triple_rel(d.goal, budget);
  if (!root.pass || !every_node) return root;
  for (auto& ch : d.children) {
    CheckResult r = soundness_audit(ch, budget, true);
    if (!r.pass) return r;
  }
  return root;
}

}  // namespace corewhile
