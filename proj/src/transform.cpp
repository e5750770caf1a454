#include "corewhile/transform.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

namespace corewhile {

namespace {

TermPtr rebuild(const TermPtr& p, const std::function<TermPtr(const TermPtr&)>& f) {
  switch (p->kind) {
    case TermKind::Skip:
    case TermKind::Basic:
      return p;
    case TermKind::CJump:
      return t_cjump(*p->cond, p->label, f(p->a));
    case TermKind::While:
      return t_while(*p->cond, f(p->a), f(p->b));
    case TermKind::Ite:
      return t_ite(*p->cond, f(p->a), f(p->b));
    case TermKind::Seq:
      return t_seq(f(p->a), f(p->b));
    case TermKind::Parallel: {
      std::vector<TermPtr> comps;
      comps.reserve(p->comps.size());
      for (auto& c : p->comps) comps.push_back(f(c));
      return t_parallel(std::move(comps));
    }
    case TermKind::Await:
      return t_await(*p->cond, f(p->a));
  }
  return p;
}

}  // namespace

TermPtr normalize_cond_seq(const TermPtr& p) {
  TermPtr q = rebuild(p, normalize_cond_seq);
  if (q->kind == TermKind::Seq && q->a->kind == TermKind::Ite) {
    const TermPtr& ite = q->a;
    return t_ite(*ite->cond, normalize_cond_seq(t_seq(ite->a, q->b)),
                 normalize_cond_seq(t_seq(ite->b, q->b)));
  }
  return q;
}

TermPtr normalize_while_seq(const TermPtr& p) {
  TermPtr q = rebuild(p, normalize_while_seq);
  if (q->kind == TermKind::Seq && q->a->kind == TermKind::While) {
    const TermPtr& w = q->a;
    return t_while(*w->cond, w->a, normalize_while_seq(t_seq(w->b, q->b)));
  }
  return q;
}

TermPtr pipeline_normalize(const TermPtr& p) {
  TermPtr q = rebuild(p, pipeline_normalize);
  if (q->kind == TermKind::Seq) {
    if (q->a->kind == TermKind::Seq)
      return pipeline_normalize(t_seq(q->a->a, t_seq(q->a->b, q->b)));
    if (q->a->kind == TermKind::Ite) {
      const TermPtr& ite = q->a;
      return t_ite(*ite->cond, pipeline_normalize(t_seq(ite->a, q->b)),
                   pipeline_normalize(t_seq(ite->b, q->b)));
    }
    if (q->a->kind == TermKind::While) {
      const TermPtr& w = q->a;
      return t_while(*w->cond, w->a, pipeline_normalize(t_seq(w->b, q->b)));
    }
  }
  return q;
}

namespace {

// Collects the transformers of a straight-line term (sequences of basics and
// skips); returns false when anything else occurs.
bool straight_line(const TermPtr& p, std::vector<const Transformer*>& out) {
  switch (p->kind) {
    case TermKind::Skip:
      return true;
    case TermKind::Basic:
      out.push_back(&*p->f);
      return true;
    case TermKind::Seq:
      return straight_line(p->a, out) && straight_line(p->b, out);
    default:
      return false;
  }
}

}  // namespace

TermPtr fuse_atomic_basics(const TermPtr& p) {
  TermPtr q = rebuild(p, fuse_atomic_basics);
  if (q->kind == TermKind::Await && q->cond->is_top()) {
    std::vector<const Transformer*> fs;
    if (straight_line(q->a, fs)) {
      if (fs.empty()) return t_basic(Transformer::identity(q->cond->space()));
      Transformer acc = *fs[0];
      for (size_t i = 1; i < fs.size(); ++i) acc = Transformer::composed(acc, *fs[i]);
      return t_basic(std::move(acc));
    }
  }
  return q;
}

FreshLabels FreshLabels::for_program(const Program& prog) {
  int mx = -1;
  for (auto& [i, t] : prog.rho.entries()) {
    mx = std::max(mx, i);
    for (int j : jumps_local(t)) mx = std::max(mx, j);
  }
  for (int j : jumps_local(prog.root)) mx = std::max(mx, j);
  return FreshLabels(mx + 1);
}

std::pair<TermPtr, CodeMap> lower_ite(const TermPtr& p, const CodeMap& rho, FreshLabels& fresh) {
  CodeMap out = rho;
  std::function<TermPtr(const TermPtr&)> rec = [&](const TermPtr& t) -> TermPtr {
    if (t->kind == TermKind::Await) return t;  // atomic bodies stay structured
    if (t->kind == TermKind::Seq && t->a->kind == TermKind::Ite)
      throw ArgError("lower_ite needs cond-seq-normalized input: " + term_str(t));
    TermPtr q = rebuild(t, rec);
    if (q->kind == TermKind::Ite) {
      int j = fresh.alloc();
      out = out.with(j, q->b);
      return t_cjump(!*q->cond, j, q->a);
    }
    return q;
  };
  TermPtr q = rec(p);
  return {q, out};
}

std::pair<TermPtr, CodeMap> lower_while(const TermPtr& p, const CodeMap& rho, FreshLabels& fresh) {
  CodeMap out = rho;
  std::function<TermPtr(const TermPtr&)> rec = [&](const TermPtr& t) -> TermPtr {
    if (t->kind == TermKind::Await) return t;
    if (t->kind == TermKind::Seq && t->a->kind == TermKind::While)
      throw ArgError("lower_while needs while-seq-normalized input: " + term_str(t));
    TermPtr q = rebuild(t, rec);
    if (q->kind == TermKind::While) {
      int i = fresh.alloc();
      int j = fresh.alloc();
      TermPtr l = t_cjump(!*q->cond, j, t_seq(q->a, t_jump(q->cond->space(), i)));
      out = out.with(i, l);
      out = out.with(j, q->b);
      return l;
    }
    return q;
  };
  TermPtr q = rec(p);
  return {q, out};
}

namespace {

// Full lowering of one locally sequential, normalized component. While-forms
// re-normalize the introduced "body; jump i" before descending, per the
// sequential normalisation the jump insertion re-enables.
TermPtr lower_component(const TermPtr& t, CodeMap& rho, FreshLabels& fresh) {
  switch (t->kind) {
    case TermKind::Skip:
    case TermKind::Basic:
    case TermKind::Await:
      return t;
    case TermKind::CJump:
      return t_cjump(*t->cond, t->label, lower_component(t->a, rho, fresh));
    case TermKind::Seq:
      return t_seq(lower_component(t->a, rho, fresh), lower_component(t->b, rho, fresh));
    case TermKind::Ite: {
      int j = fresh.alloc();
      rho = rho.with(j, lower_component(t->b, rho, fresh));
      return t_cjump(!*t->cond, j, lower_component(t->a, rho, fresh));
    }
    case TermKind::While: {
      int i = fresh.alloc();
      int j = fresh.alloc();
      TermPtr body = pipeline_normalize(t_seq(t->a, t_jump(t->cond->space(), i)));
      TermPtr l = t_cjump(!*t->cond, j, lower_component(body, rho, fresh));
      rho = rho.with(i, l);
      rho = rho.with(j, lower_component(t->b, rho, fresh));
      return l;
    }
    case TermKind::Parallel:
      throw ArgError("parallel operator inside a component");
  }
  return t;
}

void flatten_into(const TermPtr& t, std::vector<FlatInstr>& out) {
  switch (t->kind) {
    case TermKind::Skip:
      return;
    case TermKind::Basic:
      out.push_back({FlatInstr::Kind::Basic, *t->f, std::nullopt, -1});
      return;
    case TermKind::CJump:
      out.push_back({FlatInstr::Kind::CJump, std::nullopt, *t->cond, t->label});
      flatten_into(t->a, out);
      return;
    case TermKind::Seq:
      if (t->a->kind == TermKind::CJump)
        throw ArgError("explicit jump followed by code is not flattenable: " + term_str(t));
      flatten_into(t->a, out);
      flatten_into(t->b, out);
      return;
    default:
      throw ArgError("structured construct survived lowering: " + term_str(t));
  }
}

std::vector<FlatInstr> flatten(const TermPtr& t) {
  std::vector<FlatInstr> out;
  flatten_into(t, out);
  out.push_back({FlatInstr::Kind::Halt, std::nullopt, std::nullopt, -1});
  return out;
}

void print_block(std::ostringstream& os, const std::vector<FlatInstr>& block) {
  for (const FlatInstr& ins : block) {
    switch (ins.kind) {
      case FlatInstr::Kind::Basic:
        os << "  basic " << ins.f->str() << "\n";
        break;
      case FlatInstr::Kind::CJump:
        if (ins.cond->is_top())
          os << "  jump " << ins.label << "\n";
        else
          os << "  cjump (" << ins.cond->str() << ") " << ins.label << "\n";
        break;
      case FlatInstr::Kind::Halt:
        os << "  halt\n";
        break;
    }
  }
}

}  // namespace

std::string FlatListing::text() const {
  std::ostringstream os;
  print_block(os, entry);
  for (auto& [label, block] : blocks) {
    os << label << ":\n";
    print_block(os, block);
  }
  return os.str();
}

LoweredProgram lower_program(const SpacePtr& space, const Program& prog) {
  check_self_jump_restriction(prog.rho);
  std::vector<TermPtr> comps;
  bool was_parallel = prog.root->kind == TermKind::Parallel;
  if (was_parallel)
    comps = prog.root->comps;
  else
    comps = {prog.root};
  for (auto& c : comps)
    if (!classify(space, prog.rho, c).locally_sequential)
      throw ConfigError("lowering needs locally sequential components: " + term_str(c));

  FreshLabels fresh = FreshLabels::for_program(prog);
  CodeMap rho = prog.rho;
  std::vector<TermPtr> lowered;
  for (auto& c : comps)
    lowered.push_back(lower_component(pipeline_normalize(fuse_atomic_basics(c)), rho, fresh));

  LoweredProgram out;
  out.program.rho = rho;
  out.program.root = was_parallel ? t_parallel(lowered) : lowered[0];
  for (auto& c : lowered) {
    FlatListing fl;
    fl.entry = flatten(c);
    for (int label : jumps_closure(rho, c))
      fl.blocks[label] = flatten(rho.get(label));
    out.listings.push_back(std::move(fl));
  }
  return out;
}

TermPtr subst_fragment(const TermPtr& p, const TermPtr& q, const TermPtr& q2) {
  if (term_eq(p, q)) return q2;
  if (p->kind == TermKind::Await) return p;
  return rebuild(p, [&](const TermPtr& c) { return subst_fragment(c, q, q2); });
}

SplitVerdict check_split_basic(const Transformer& f, const Transformer& g, const Rel& rely,
                               const Rel& guar) {
  SplitVerdict v;
  const SpacePtr& space = f.space();
  uint64_t n = space->state_count();
  for (uint64_t s = 0; s < n; ++s) {
    StateIdx fs = f.apply(static_cast<StateIdx>(s));
    StateIdx gfs = g.apply(fs);
    if (guar.eval(static_cast<StateIdx>(s), gfs)) {
      if (!guar.eval(static_cast<StateIdx>(s), fs) || !guar.eval(fs, gfs)) {
        v.pass = false;
        v.failed_condition = "guarantee-split";
        v.witness_state = static_cast<StateIdx>(s);
        return v;
      }
    }
  }
  for (uint64_t s = 0; s < n; ++s) {
    // gr(f);R by rows: successors of f(s) under R must all be f-images of
    // R-successors of s.
    Bitset lhs = rely.row(f.apply(static_cast<StateIdx>(s)));
    Bitset rhs(n);
    rely.row(static_cast<StateIdx>(s)).for_each([&](size_t b) { rhs.set(f.apply(static_cast<StateIdx>(b))); });
    long long bad = lhs.first_not_in(rhs);
    if (bad >= 0) {
      v.pass = false;
      v.failed_condition = "rely-commutation";
      v.witness_pair = {static_cast<StateIdx>(s), static_cast<StateIdx>(bad)};
      return v;
    }
  }
  return v;
}

}  // namespace corewhile
