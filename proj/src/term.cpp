#include "corewhile/term.hpp"

#include <mutex>
#include <sstream>
#include <unordered_set>

namespace corewhile {

namespace {

size_t kind_seed(TermKind k) { return 0x517cc1b727220a95ull + static_cast<size_t>(k) * 0x2545F4914F6CDD1Dull; }

bool structural_eq(const TermPtr& a, const TermPtr& b) {
  if (a.get() == b.get()) return true;
  if (!a || !b) return false;
  if (a->hash != b->hash || a->kind != b->kind || a->label != b->label) return false;
  if (a->f.has_value() != b->f.has_value()) return false;
  if (a->f && !(*a->f == *b->f)) return false;
  if (a->cond.has_value() != b->cond.has_value()) return false;
  if (a->cond && !a->cond->same_extension(*b->cond)) return false;
  if (!structural_eq(a->a, b->a) && (a->a || b->a)) return false;
  if (!structural_eq(a->b, b->b) && (a->b || b->b)) return false;
  if (a->comps.size() != b->comps.size()) return false;
  for (size_t i = 0; i < a->comps.size(); ++i)
    if (!structural_eq(a->comps[i], b->comps[i])) return false;
  return true;
}

struct InternHash {
  size_t operator()(const TermPtr& t) const { return t->hash; }
};
struct InternEq {
  bool operator()(const TermPtr& a, const TermPtr& b) const { return structural_eq(a, b); }
};

// Hash-consing: factories return one canonical instance per structurally
// equal term, so equality checks are pointer comparisons in practice.
TermPtr finish(std::shared_ptr<Term> t) {
  size_t h = kind_seed(t->kind);
  if (t->f) h = hash_combine(h, t->f->ext_hash());
  if (t->cond) h = hash_combine(h, t->cond->ext_hash());
  h = hash_combine(h, static_cast<size_t>(t->label + 1));
  if (t->a) h = hash_combine(h, t->a->hash);
  if (t->b) h = hash_combine(h, t->b->hash);
  for (auto& c : t->comps) h = hash_combine(h, c->hash);
  t->hash = h;

  static std::mutex mu;
  static std::unordered_set<TermPtr, InternHash, InternEq> table;
  std::lock_guard<std::mutex> lock(mu);
  auto [it, inserted] = table.insert(t);
  return *it;
}

}  // namespace

TermPtr t_skip() {
  static TermPtr skip = [] {
    auto t = std::make_shared<Term>();
    t->kind = TermKind::Skip;
    return finish(t);
  }();
  return skip;
}

TermPtr t_basic(Transformer f) {
  auto t = std::make_shared<Term>();
  t->kind = TermKind::Basic;
  t->f = std::move(f);
  return finish(t);
}

TermPtr t_cjump(Pred c, int label, TermPtr els) {
  if (label < 0) throw ArgError("jump labels are naturals");
  auto t = std::make_shared<Term>();
  t->kind = TermKind::CJump;
  t->cond = std::move(c);
  t->label = label;
  t->a = std::move(els);
  return finish(t);
}

TermPtr t_while(Pred c, TermPtr body, TermPtr els) {
  auto t = std::make_shared<Term>();
  t->kind = TermKind::While;
  t->cond = std::move(c);
  t->a = std::move(body);
  t->b = std::move(els);
  return finish(t);
}

TermPtr t_ite(Pred c, TermPtr then_, TermPtr els) {
  auto t = std::make_shared<Term>();
  t->kind = TermKind::Ite;
  t->cond = std::move(c);
  t->a = std::move(then_);
  t->b = std::move(els);
  return finish(t);
}

TermPtr t_seq(TermPtr a, TermPtr b) {
  auto t = std::make_shared<Term>();
  t->kind = TermKind::Seq;
  t->a = std::move(a);
  t->b = std::move(b);
  return finish(t);
}

TermPtr t_parallel(std::vector<TermPtr> comps) {
  if (comps.empty()) throw ArgError("parallel composition needs at least one component");
  auto t = std::make_shared<Term>();
  t->kind = TermKind::Parallel;
  t->comps = std::move(comps);
  return finish(t);
}

TermPtr t_await(Pred c, TermPtr body) {
  auto t = std::make_shared<Term>();
  t->kind = TermKind::Await;
  t->cond = std::move(c);
  t->a = std::move(body);
  return finish(t);
}

TermPtr t_jump(SpacePtr space, int label) {
  return t_cjump(Pred::top(std::move(space)), label, t_skip());
}

TermPtr t_atomic(SpacePtr space, TermPtr body) {
  return t_await(Pred::top(std::move(space)), std::move(body));
}

bool is_skip(const TermPtr& t) { return t->kind == TermKind::Skip; }

bool is_jump(const TermPtr& t, int* label) {
  if (t->kind != TermKind::CJump || !t->cond->is_top() || !is_skip(t->a)) return false;
  if (label) *label = t->label;
  return true;
}

bool term_eq(const TermPtr& a, const TermPtr& b) {
  // Interning makes the pointer comparison decisive for factory-built terms;
  // the structural walk remains as a safety net.
  if (a.get() == b.get()) return true;
  return structural_eq(a, b);
}

namespace {

// Emits the DSL term syntax; sequences are right-associated on reparse which
// matches construction through the parser.
void print(std::ostream& os, const TermPtr& t, bool seq_ctx) {
  switch (t->kind) {
    case TermKind::Skip: os << "skip"; break;
    case TermKind::Basic: os << "basic " << t->f->str(); break;
    case TermKind::CJump:
      if (t->cond->is_top() && is_skip(t->a)) {
        os << "jump " << t->label;
        break;
      }
      os << "cjump (" << t->cond->str() << ") " << t->label << " else {";
      print(os, t->a, false);
      os << "}";
      break;
    case TermKind::While:
      os << "while (" << t->cond->str() << ") {";
      print(os, t->a, false);
      os << "} finally {";
      print(os, t->b, false);
      os << "}";
      break;
    case TermKind::Ite:
      os << "if (" << t->cond->str() << ") {";
      print(os, t->a, false);
      os << "} else {";
      print(os, t->b, false);
      os << "}";
      break;
    case TermKind::Seq: {
      if (seq_ctx) os << "{";
      print(os, t->a, t->a->kind == TermKind::Seq);
      os << " ; ";
      print(os, t->b, false);
      if (seq_ctx) os << "}";
      break;
    }
    case TermKind::Parallel: {
      os << "par [";
      for (size_t i = 0; i < t->comps.size(); ++i) {
        if (i) os << ", ";
        print(os, t->comps[i], false);
      }
      os << "]";
      break;
    }
    case TermKind::Await:
      if (t->cond->is_top()) {
        os << "atomic {";
        print(os, t->a, false);
        os << "}";
      } else {
        os << "await (" << t->cond->str() << ") {";
        print(os, t->a, false);
        os << "}";
      }
      break;
  }
}

}  // namespace

std::string term_str(const TermPtr& t) {
  int label = -1;
  if (is_jump(t, &label)) return "jump " + std::to_string(label);
  std::ostringstream os;
  print(os, t, false);
  return os.str();
}

void check_self_jump_restriction(const CodeMap& rho) {
  for (auto& [i, t] : rho.entries())
    if (t->kind == TermKind::CJump && t->label == i)
      throw ConfigError("label " + std::to_string(i) +
                        " binds a conditional jump to itself (fired positions would not be unique)");
}

}  // namespace corewhile
