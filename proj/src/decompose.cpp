#include <algorithm>
#include <functional>
#include <map>
#include <sstream>
#include <unordered_map>

#include "corewhile/liveness.hpp"

namespace corewhile {

namespace {

Computation input_window(const Lasso* lasso, const Computation* trace) {
  if (lasso) return lasso_window(*lasso, 2);
  return *trace;
}

bool window_avoids(const Computation& w, const Pred& avoid) {
  for (auto& c : w.configs)
    if (avoid.eval(c.state)) return false;
  return true;
}

size_t first_skip_index(const Computation& w) {
  for (size_t i = 0; i < w.configs.size(); ++i)
    if (is_skip(w.configs[i].term)) return i;
  return w.configs.size();
}

using TermOf = std::function<TermPtr(const TermPtr&)>;
using KindOf = std::function<StepKind(const Config&, const Config&, StepKind)>;

Computation project_comp(const Computation& c, const TermOf& term_of, const KindOf& kind_of) {
  Computation out;
  for (size_t i = 0; i < c.configs.size(); ++i) {
    out.configs.push_back({term_of(c.configs[i].term), c.configs[i].state});
    if (i + 1 < c.configs.size())
      out.kinds.push_back(kind_of(c.configs[i], c.configs[i + 1], c.kinds[i]));
  }
  return out;
}

Lasso project_lasso(const Lasso& l, const TermOf& term_of, const KindOf& kind_of) {
  return Lasso{project_comp(l.stem, term_of, kind_of), project_comp(l.cycle, term_of, kind_of)};
}

KindOf keep_kind() {
  return [](const Config&, const Config&, StepKind k) { return k; };
}

DecomposedPart lasso_part(const SpacePtr& space, const CodeMap& rho, std::string role, Lasso l,
                          const Pred& avoid) {
  DecomposedPart p;
  p.role = std::move(role);
  p.condition = "N";
  Computation w = lasso_window(l, 2);
  bool never_skip = first_skip_index(w) == w.configs.size();
  bool avoids = window_avoids(w, avoid);
  FairVerdict fv = is_fair_lasso(space, rho, l);
  p.verified = never_skip && avoids && fv.fair;
  if (!p.verified) {
    if (!never_skip) p.note = "component reaches skip";
    else if (!avoids) p.note = "component hits the avoided predicate";
    else p.note = "component lasso is unfair";
  }
  p.lasso = std::move(l);
  return p;
}

DecomposedPart trace_part(std::string role, Computation t, const Pred& avoid) {
  DecomposedPart p;
  p.role = std::move(role);
  p.condition = "T";
  size_t n = first_skip_index(t);
  p.verified = n + 1 == t.configs.size() && window_avoids(t, avoid);
  if (!p.verified) p.note = "trace does not end at its first skip or hits the avoided predicate";
  p.t_index = n;
  p.trace = std::move(t);
  return p;
}

}  // namespace

Decomposition decompose(const SpacePtr& space, const CodeMap& rho, const Lasso* lasso,
                        const Computation* trace, Shape shape, const Pred& avoid) {
  if ((lasso == nullptr) == (trace == nullptr))
    throw ArgError("decompose takes exactly one of lasso or trace");
  if (lasso) validate_lasso(space, rho, *lasso);
  Decomposition out;
  out.shape = shape;
  Computation w = input_window(lasso, trace);
  const TermPtr root = w.configs[0].term;

  switch (shape) {
    case Shape::Skip: {
      if (!is_skip(root)) throw ArgError("shape mismatch: root is not skip");
      DecomposedPart p;
      p.role = "whole";
      if (trace) {
        p.condition = "T";
        p.t_index = 0;
        p.verified = first_skip_index(w) == 0;
        out.case_name = "skip-T";
      } else {
        p.condition = "refuted";
        p.note = "a computation of skip starts in a skip-configuration";
        p.verified = true;
        out.case_name = "skip-N-refuted";
      }
      out.ok = p.verified;
      out.parts.push_back(std::move(p));
      return out;
    }

    case Shape::Basic: {
      if (root->kind != TermKind::Basic) throw ArgError("shape mismatch: root is not basic");
      DecomposedPart p;
      p.role = "whole";
      if (trace) {
        size_t n = first_skip_index(w);
        p.condition = "T";
        p.t_index = n;
        p.verified = n > 0 && n < w.configs.size() &&
                     w.configs[n - 1].term->kind == TermKind::Basic &&
                     root->f->apply(w.configs[n - 1].state) == w.configs[n].state &&
                     !avoid.eval(w.configs[n].state);
        out.case_name = "basic-T";
      } else {
        // A fair computation of a basic step must fire it, so a claimed
        // non-terminating input can only be unfair.
        FairVerdict fv = is_fair_lasso(space, rho, *lasso);
        p.condition = "refuted";
        p.verified = !fv.fair;
        p.note = fv.fair ? "input lasso claims fair non-termination of a basic step"
                         : "input lasso is unfair as expected";
        out.case_name = "basic-N-refuted";
      }
      out.ok = p.verified;
      out.parts.push_back(std::move(p));
      return out;
    }

    case Shape::Await: {
      if (root->kind != TermKind::Await) throw ArgError("shape mismatch: root is not await");
      DecomposedPart p;
      p.role = "whole";
      if (trace) {
        size_t n = first_skip_index(w);
        p.condition = "T";
        p.t_index = n;
        bool ok = n > 0 && n < w.configs.size() && root->cond->eval(w.configs[n - 1].state);
        if (ok) {
          auto closure = await_closure(space, rho, root->a, w.configs[n - 1].state);
          ok = std::find(closure.begin(), closure.end(), w.configs[n].state) != closure.end();
        }
        p.verified = ok;
        out.case_name = "await-T";
      } else {
        // Atomic-section divergence: exhibit a state from which the body
        // cannot terminate; fairness would otherwise have fired the await.
        p.condition = "refuted";
        std::optional<StateIdx> witness;
        for (auto& c : lasso_window(*lasso, 1).configs)
          if (await_closure(space, rho, root->a, c.state).empty()) {
            witness = c.state;
            break;
          }
        if (!witness) {
          uint64_t n = space->state_count();
          for (uint64_t s = 0; s < n && !witness; ++s)
            if (await_closure(space, rho, root->a, static_cast<StateIdx>(s)).empty())
              witness = static_cast<StateIdx>(s);
        }
        p.verified = witness.has_value();
        p.note = witness ? "body diverges from " + space->state_at(*witness).str()
                         : "body terminates from every state; a fair lasso would fire the await";
        out.case_name = "await-N";
      }
      out.ok = p.verified;
      out.parts.push_back(std::move(p));
      return out;
    }

    case Shape::Ite: {
      if (root->kind != TermKind::Ite) throw ArgError("shape mismatch: root is not a conditional");
      size_t fire = w.configs.size();
      for (size_t i = 0; i + 1 < w.configs.size(); ++i)
        if (w.kinds[i] == StepKind::Program && term_eq(w.configs[i].term, root)) {
          fire = i;
          break;
        }
      if (fire == w.configs.size()) {
        out.note = "the conditional never fires in the window (unfair input)";
        return out;
      }
      bool then_branch = root->cond->eval(w.configs[fire].state);
      out.case_name = then_branch ? "ite-then" : "ite-else";
      if (trace) {
        size_t n = first_skip_index(w);
        DecomposedPart p = trace_part("branch", comp_suffix(fire + 1, w), avoid);
        p.note = "branch precondition: " + std::string(then_branch ? "C" : "!C");
        p.verified = p.verified && p.t_index == n - fire - 1;
        out.ok = p.verified;
        out.parts.push_back(std::move(p));
      } else {
        DecomposedPart p =
            lasso_part(space, rho, "branch", lasso_suffix(*lasso, fire + 1), avoid);
        out.ok = p.verified;
        out.parts.push_back(std::move(p));
      }
      return out;
    }

    case Shape::Seq: {
      if (root->kind != TermKind::Seq) throw ArgError("shape mismatch: root is not a sequence");
      const TermPtr q = root->b;
      auto head_of = [&](const TermPtr& t) -> TermPtr {
        if (t->kind == TermKind::Seq && term_eq(t->b, q)) return t->a;
        return nullptr;
      };
      size_t m = w.configs.size();
      for (size_t i = 0; i < w.configs.size(); ++i) {
        TermPtr h = head_of(w.configs[i].term);
        if (h && is_skip(h)) {
          m = i;
          break;
        }
      }
      if (m == w.configs.size() && lasso) {
        DecomposedPart p = lasso_part(
            space, rho, "head",
            project_lasso(*lasso, [&](const TermPtr& t) { return head_of(t); }, keep_kind()),
            avoid);
        out.case_name = "seq-N-head";
        out.ok = p.verified;
        out.parts.push_back(std::move(p));
        return out;
      }
      if (m == w.configs.size()) {
        out.note = "terminating sequence never reaches skip;q (malformed input)";
        return out;
      }
      Computation head;
      for (size_t i = 0; i <= m; ++i) {
        head.configs.push_back({head_of(w.configs[i].term), w.configs[i].state});
        if (i < m) head.kinds.push_back(w.kinds[i]);
      }
      DecomposedPart hp = trace_part("head", std::move(head), avoid);
      size_t l = w.configs.size();
      for (size_t i = m; i < w.configs.size(); ++i)
        if (term_eq(w.configs[i].term, q)) {
          l = i;
          break;
        }
      if (l == w.configs.size()) {
        out.note = "the sequence's tail never starts in the window (unfair input)";
        return out;
      }
      if (trace) {
        size_t n = first_skip_index(w);
        DecomposedPart tp = trace_part("tail", comp_suffix(l, w), avoid);
        tp.verified = tp.verified && hp.t_index < l && l <= n && tp.t_index == n - l;
        out.case_name = "seq-T";
        out.ok = hp.verified && tp.verified;
        out.parts.push_back(std::move(hp));
        out.parts.push_back(std::move(tp));
      } else {
        DecomposedPart tp = lasso_part(space, rho, "tail", lasso_suffix(*lasso, l), avoid);
        out.case_name = "seq-N-tail";
        out.ok = hp.verified && tp.verified;
        out.parts.push_back(std::move(hp));
        out.parts.push_back(std::move(tp));
      }
      return out;
    }

    case Shape::Parallel2: {
      if (root->kind != TermKind::Parallel || root->comps.size() != 2)
        throw ArgError("shape mismatch: root is not a binary parallel composition");
      auto comp_of = [&](size_t k) {
        return [k](const TermPtr& t) -> TermPtr {
          if (t->kind == TermKind::Parallel && t->comps.size() == 2) return t->comps[k];
          return t_skip();  // past the final collapse
        };
      };
      auto side_kind = [&](size_t k) -> KindOf {
        return [&, k](const Config& a, const Config& b, StepKind kind) {
          if (kind != StepKind::Program) return StepKind::Env;
          Position fp = fired_position(space, rho, a, b);
          return (!fp.empty() && fp[0] == static_cast<int>(k + 1)) ? StepKind::Program
                                                                   : StepKind::Env;
        };
      };
      if (trace) {
        size_t n = first_skip_index(w);
        Computation lw = project_comp(comp_prefix(n + 1, w), comp_of(0), side_kind(0));
        Computation rw = project_comp(comp_prefix(n + 1, w), comp_of(1), side_kind(1));
        size_t n1 = first_skip_index(lw), n2 = first_skip_index(rw);
        DecomposedPart lp = trace_part("left", comp_prefix(n1 + 1, lw), avoid);
        DecomposedPart rp = trace_part("right", comp_prefix(n2 + 1, rw), avoid);
        lp.verified = lp.verified && n1 < n;
        rp.verified = rp.verified && n2 < n;
        out.case_name = "parallel2-T";
        out.ok = lp.verified && rp.verified;
        out.parts.push_back(std::move(lp));
        out.parts.push_back(std::move(rp));
      } else {
        Lasso ll = project_lasso(*lasso, comp_of(0), side_kind(0));
        Lasso rl = project_lasso(*lasso, comp_of(1), side_kind(1));
        size_t n1 = first_skip_index(lasso_window(ll, 1));
        size_t n2 = first_skip_index(lasso_window(rl, 1));
        bool lskip = n1 < lasso_window(ll, 1).configs.size();
        bool rskip = n2 < lasso_window(rl, 1).configs.size();
        if (!lskip && !rskip) {
          out.case_name = "parallel2-(a)";
          out.parts.push_back(lasso_part(space, rho, "left", std::move(ll), avoid));
          out.parts.push_back(lasso_part(space, rho, "right", std::move(rl), avoid));
        } else if (!lskip) {
          out.case_name = "parallel2-(b)";
          out.parts.push_back(lasso_part(space, rho, "left", std::move(ll), avoid));
          out.parts.push_back(
              trace_part("right", comp_prefix(n2 + 1, lasso_window(rl, 1)), avoid));
        } else if (!rskip) {
          out.case_name = "parallel2-(c)";
          out.parts.push_back(trace_part("left", comp_prefix(n1 + 1, lasso_window(ll, 1)), avoid));
          out.parts.push_back(lasso_part(space, rho, "right", std::move(rl), avoid));
        } else {
          out.note = "both components terminate; a fair lasso would collapse to skip";
          return out;
        }
        out.ok = out.parts[0].verified && out.parts[1].verified;
      }
      return out;
    }

    case Shape::While: {
      if (root->kind != TermKind::While) throw ArgError("shape mismatch: root is not a while");
      const Pred& c = *root->cond;
      auto head_of = [&](const TermPtr& t) -> TermPtr {
        // x ; skip ; W
        if (t->kind == TermKind::Seq && t->b->kind == TermKind::Seq && is_skip(t->b->a) &&
            term_eq(t->b->b, root))
          return t->a;
        return nullptr;
      };
      if (trace) {
        size_t n = first_skip_index(w);
        size_t exit = w.configs.size();
        for (size_t i = 0; i + 1 < w.configs.size(); ++i)
          if (w.kinds[i] == StepKind::Program && term_eq(w.configs[i].term, root) &&
              !c.eval(w.configs[i].state)) {
            exit = i;
            break;
          }
        if (exit == w.configs.size()) {
          out.note = "terminating while run never takes the false branch (malformed input)";
          return out;
        }
        DecomposedPart p = trace_part("else", comp_suffix(exit + 1, w), avoid);
        p.note = "branch precondition: !C";
        p.verified = p.verified && p.t_index == n - exit - 1;
        out.case_name = "while-T-else";
        out.ok = p.verified;
        out.parts.push_back(std::move(p));
        return out;
      }
      for (size_t i = 0; i + 1 < w.configs.size(); ++i) {
        if (w.kinds[i] == StepKind::Program && term_eq(w.configs[i].term, root)) {
          if (!c.eval(w.configs[i].state)) {
            DecomposedPart p =
                lasso_part(space, rho, "else", lasso_suffix(*lasso, i + 1), avoid);
            out.case_name = "while-N-else";
            out.ok = p.verified;
            out.parts.push_back(std::move(p));
            return out;
          }
          out.phi.push_back(i);
        }
      }
      if (out.phi.empty()) {
        out.note = "the loop head never fires in the window (unfair input)";
        return out;
      }
      size_t window_steps = lasso->stem.configs.size() - 1 + (lasso->cycle.configs.size() - 1);
      bool recurs = false;
      for (size_t i : out.phi) recurs = recurs || i >= lasso->stem.configs.size() - 1;
      if (!recurs || out.phi.size() < 2) {
        // case (2): the body diverges after the last firing.
        DecomposedPart p = lasso_part(
            space, rho, "body",
            project_lasso(lasso_suffix(*lasso, out.phi.back() + 1),
                          [&](const TermPtr& t) { return head_of(t); }, keep_kind()),
            avoid);
        out.case_name = "while-N-body";
        out.ok = p.verified;
        out.parts.push_back(std::move(p));
        return out;
      }
      (void)window_steps;
      // case (1): per-iteration terminating body runs between firings.
      out.case_name = "while-N-iterations";
      out.ok = true;
      for (size_t k = 0; k + 1 < out.phi.size(); ++k) {
        size_t a = out.phi[k] + 1, b = out.phi[k + 1];
        size_t done = b;
        for (size_t i = a; i < b; ++i) {
          TermPtr h = head_of(w.configs[i].term);
          if (h && is_skip(h)) {
            done = i;
            break;
          }
        }
        Computation iter;
        for (size_t i = a; i <= done && i < w.configs.size(); ++i) {
          TermPtr h = head_of(w.configs[i].term);
          iter.configs.push_back({h ? h : t_skip(), w.configs[i].state});
          if (i < done) iter.kinds.push_back(w.kinds[i]);
        }
        DecomposedPart p = trace_part("iteration " + std::to_string(k), std::move(iter), avoid);
        p.verified = p.verified && c.eval(w.configs[out.phi[k]].state) && p.t_index < b - a + 1;
        out.ok = out.ok && p.verified;
        out.parts.push_back(std::move(p));
      }
      return out;
    }
  }
  return out;
}

Lasso replay_componentwise(const SpacePtr& space, const std::vector<SimRelation>& witnesses,
                           StateIdx start, const Lasso& right, const Budget& budget) {
  if (witnesses.size() < 2) throw ArgError("componentwise replay needs m > 1 witnesses");
  const CodeMap& rho_left = witnesses[0].rho_left;
  const CodeMap& rho_right = witnesses[0].rho_right;
  const Rel& r = witnesses[0].r;
  validate_lasso(space, rho_right, right);
  auto check_env_id = [](const Computation& c) {
    for (size_t i = 0; i + 1 < c.configs.size(); ++i)
      if (c.kinds[i] == StepKind::Env && c.configs[i].state != c.configs[i + 1].state)
        throw ArgError("right lasso has a non-stuttering environment step");
  };
  check_env_id(right.stem);
  check_env_id(right.cycle);
  if (!r.eval(start, right.stem.configs[0].state))
    throw ArgError("start state is not r-related to the right lasso's first state");

  std::vector<TermPtr> cur;
  for (auto& w : witnesses) cur.push_back(w.root_left);
  size_t m = witnesses.size();

  StepCache cache_l;
  Computation left;
  left.configs.push_back({t_parallel(cur), start});
  StateIdx sl = start;

  size_t stem_steps = right.stem.configs.size() - 1;
  size_t cycle_steps = right.cycle.configs.size() - 1;

  // Deterministic first-match choices make the left trace a function of
  // (left configuration, phase in the right cycle); a repeat closes the
  // cycle.
  std::unordered_map<Config, size_t, ConfigHash> seen_at_phase0;
  std::optional<size_t> cycle_at;
  for (size_t i = 0;; ++i) {
    if (i > budget.max_nodes) throw ResourceError("componentwise replay exceeded the budget");
    if (i >= stem_steps && (i - stem_steps) % cycle_steps == 0) {
      Config key = left.configs.back();
      auto it = seen_at_phase0.find(key);
      if (it != seen_at_phase0.end()) {
        cycle_at = it->second;
        break;
      }
      seen_at_phase0.emplace(key, left.configs.size() - 1);
    }
    size_t step_idx = i < stem_steps ? i : stem_steps + (i - stem_steps) % cycle_steps;
    const Config& rc = step_idx < stem_steps
                           ? right.stem.configs[step_idx]
                           : right.cycle.configs[step_idx - stem_steps];
    const Config& rn = step_idx < stem_steps
                           ? right.stem.configs[step_idx + 1]
                           : right.cycle.configs[step_idx - stem_steps + 1];
    StepKind kind = step_idx < stem_steps ? right.stem.kinds[step_idx]
                                          : right.cycle.kinds[step_idx - stem_steps];
    if (kind == StepKind::Env) {
      left.configs.push_back({left.configs.back().term, sl});
      left.kinds.push_back(StepKind::Env);
      continue;
    }
    if (is_skip(rn.term)) throw ArgError("right lasso collapses to skip inside its cycle");
    Position fp = fired_position(space, rho_right, rc, rn);
    if (fp.empty() || fp[0] < 1 || static_cast<size_t>(fp[0]) > m)
      throw ArgError("right step does not fire inside a component");
    size_t j = static_cast<size_t>(fp[0] - 1);
    const TermPtr& vjn = rn.term->comps[j];
    bool matched = false;
    for (const Config& ls : program_steps(space, rho_left, {cur[j], sl}, &cache_l)) {
      if (r.eval(ls.state, rn.state) && witnesses[j].contains(ls.term, vjn)) {
        cur[j] = ls.term;
        sl = ls.state;
        matched = true;
        break;
      }
    }
    if (!matched) throw ArgError("componentwise replay failed to match a right step");
    left.configs.push_back({t_parallel(cur), sl});
    left.kinds.push_back(StepKind::Program);
  }

  Lasso out;
  size_t cut = *cycle_at;
  out.stem.configs.assign(left.configs.begin(), left.configs.begin() + cut + 1);
  out.stem.kinds.assign(left.kinds.begin(), left.kinds.begin() + cut);
  out.cycle.configs.assign(left.configs.begin() + cut, left.configs.end());
  out.cycle.kinds.assign(left.kinds.begin() + cut, left.kinds.end());
  return out;
}

}  // namespace corewhile
