#include "corewhile/cond.hpp"

#include <map>
#include <mutex>
#include <sstream>

namespace corewhile {

Pred::Pred(SpacePtr space, ExprPtr expr) : space_(std::move(space)), expr_(std::move(expr)) {
  if (expr_type(expr_, *space_, false) != ValType::Bool)
    throw ConfigError("predicate must be boolean: " + expr_str(expr_));
  ExprProgram prog(expr_, *space_, false);
  uint64_t n = space_->state_count();
  ext_ = Bitset(n);
  for (uint64_t i = 0; i < n; ++i)
    if (prog.run(space_->raw_row(i), nullptr)) ext_.set(i);
  text_ = expr_str(expr_);
}

Pred Pred::from_states(SpacePtr space, Bitset ext, std::string text) {
  if (ext.size() != space->state_count()) throw ArgError("extension size mismatch");
  return Pred(std::move(space), nullptr, std::move(ext), std::move(text));
}

Pred Pred::operator&&(const Pred& o) const {
  Bitset e = ext_;
  e &= o.ext_;
  ExprPtr x = (expr_ && o.expr_) ? e_and(expr_, o.expr_) : nullptr;
  return Pred(space_, x, std::move(e), "(" + text_ + " && " + o.text_ + ")");
}

Pred Pred::operator||(const Pred& o) const {
  Bitset e = ext_;
  e |= o.ext_;
  ExprPtr x = (expr_ && o.expr_) ? e_or(expr_, o.expr_) : nullptr;
  return Pred(space_, x, std::move(e), "(" + text_ + " || " + o.text_ + ")");
}

Pred Pred::operator!() const {
  Bitset e = ext_;
  e.flip();
  ExprPtr x = expr_ ? e_not(expr_) : nullptr;
  return Pred(space_, x, std::move(e), "!(" + text_ + ")");
}

Rel::Rel(SpacePtr space, ExprPtr expr) : space_(std::move(space)), expr_(std::move(expr)) {
  if (expr_type(expr_, *space_, true) != ValType::Bool)
    throw ConfigError("relation must be boolean: " + expr_str(expr_));
  text_ = expr_str(expr_);
  prog_ = std::make_shared<ExprProgram>(expr_, *space_, true);
  uint64_t n = space_->state_count();
  if (n <= kMaterializeLimit) {
    rows_.reserve(n);
    for (uint64_t a = 0; a < n; ++a) {
      const int64_t* ra = space_->raw_row(a);
      Bitset row(n);
      for (uint64_t b = 0; b < n; ++b)
        if (prog_->run(ra, space_->raw_row(b))) row.set(b);
      rows_.push_back(std::move(row));
    }
  }
}

Rel Rel::identity(SpacePtr space) {
  uint64_t n = space->state_count();
  if (n <= kMaterializeLimit) {
    std::vector<Bitset> rows;
    rows.reserve(n);
    for (uint64_t a = 0; a < n; ++a) {
      Bitset row(n);
      row.set(a);
      rows.push_back(std::move(row));
    }
    return Rel(space, e_identity(*space), std::move(rows), "id");
  }
  Rel r(space, e_identity(*space));
  r.text_ = "id";
  return r;
}

Rel Rel::from_rows(SpacePtr space, std::vector<Bitset> rows, std::string text) {
  if (rows.size() != space->state_count()) throw ArgError("row count mismatch");
  return Rel(std::move(space), nullptr, std::move(rows), std::move(text));
}

void Rel::require_rows(const char* what) const {
  if (rows_.empty())
    throw ResourceError(std::string(what) + " needs a materialized relation (space too large)");
}

bool Rel::eval(StateIdx a, StateIdx b) const {
  if (!rows_.empty()) return rows_[a].get(b);
  return prog_->run(space_->raw_row(a), space_->raw_row(b)) != 0;
}

Bitset Rel::row(StateIdx a) const {
  if (!rows_.empty()) return rows_[a];
  uint64_t n = space_->state_count();
  Bitset r(n);
  const int64_t* ra = space_->raw_row(a);
  for (uint64_t b = 0; b < n; ++b)
    if (prog_->run(ra, space_->raw_row(b))) r.set(b);
  return r;
}

Bitset Rel::image(const Bitset& xs) const {
  Bitset out(space_->state_count());
  xs.for_each([&](size_t a) { out |= row(static_cast<StateIdx>(a)); });
  return out;
}

Rel Rel::converse() const {
  require_rows("converse");
  uint64_t n = space_->state_count();
  std::vector<Bitset> rows(n, Bitset(n));
  for (uint64_t a = 0; a < n; ++a)
    rows_[a].for_each([&](size_t b) { rows[b].set(a); });
  return from_rows(space_, std::move(rows), "conv(" + text_ + ")");
}

Rel Rel::compose(const Rel& s) const {
  require_rows("compose");
  s.require_rows("compose");
  uint64_t n = space_->state_count();
  std::vector<Bitset> rows;
  rows.reserve(n);
  for (uint64_t a = 0; a < n; ++a) {
    Bitset r(n);
    rows_[a].for_each([&](size_t c) { r |= s.rows_[c]; });
    rows.push_back(std::move(r));
  }
  return from_rows(space_, std::move(rows), "(" + text_ + " ; " + s.text_ + ")");
}

Rel Rel::intersect(const Rel& o) const {
  require_rows("intersect");
  o.require_rows("intersect");
  std::vector<Bitset> rows = rows_;
  for (size_t a = 0; a < rows.size(); ++a) rows[a] &= o.rows_[a];
  ExprPtr x = (expr_ && o.expr_) ? e_and(expr_, o.expr_) : nullptr;
  Rel r = from_rows(space_, std::move(rows), "(" + text_ + " && " + o.text_ + ")");
  r.expr_ = x;
  return r;
}

Rel Rel::unite(const Rel& o) const {
  require_rows("unite");
  o.require_rows("unite");
  std::vector<Bitset> rows = rows_;
  for (size_t a = 0; a < rows.size(); ++a) rows[a] |= o.rows_[a];
  ExprPtr x = (expr_ && o.expr_) ? e_or(expr_, o.expr_) : nullptr;
  Rel r = from_rows(space_, std::move(rows), "(" + text_ + " || " + o.text_ + ")");
  r.expr_ = x;
  return r;
}

bool Rel::subset_of(const Rel& o, std::pair<StateIdx, StateIdx>* witness) const {
  uint64_t n = space_->state_count();
  for (uint64_t a = 0; a < n; ++a) {
    Bitset ra = row(static_cast<StateIdx>(a));
    Bitset rb = o.row(static_cast<StateIdx>(a));
    long long bad = ra.first_not_in(rb);
    if (bad >= 0) {
      if (witness) *witness = {static_cast<StateIdx>(a), static_cast<StateIdx>(bad)};
      return false;
    }
  }
  return true;
}

bool Rel::same_extension(const Rel& o) const {
  uint64_t n = space_->state_count();
  for (uint64_t a = 0; a < n; ++a)
    if (row(static_cast<StateIdx>(a)) != o.row(static_cast<StateIdx>(a))) return false;
  return true;
}

bool Rel::reflexive(StateIdx* witness) const {
  uint64_t n = space_->state_count();
  for (uint64_t a = 0; a < n; ++a)
    if (!eval(static_cast<StateIdx>(a), static_cast<StateIdx>(a))) {
      if (witness) *witness = static_cast<StateIdx>(a);
      return false;
    }
  return true;
}

bool Rel::is_identity() const {
  uint64_t n = space_->state_count();
  for (uint64_t a = 0; a < n; ++a) {
    Bitset r = row(static_cast<StateIdx>(a));
    if (r.count() != 1 || !r.get(a)) return false;
  }
  return true;
}

size_t Rel::pair_count() const {
  size_t c = 0;
  uint64_t n = space_->state_count();
  for (uint64_t a = 0; a < n; ++a) c += row(static_cast<StateIdx>(a)).count();
  return c;
}

Rel cached_rel(const SpacePtr& space, const ExprPtr& e) {
  struct Entry {
    std::weak_ptr<const StateSpace> space;
    Rel rel;
  };
  static std::mutex mu;
  static std::map<std::pair<const StateSpace*, std::string>, Entry> cache;
  std::string key = expr_str(e);
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find({space.get(), key});
    if (it != cache.end()) {
      auto held = it->second.space.lock();
      if (held == space) return it->second.rel;
      cache.erase(it);
    }
  }
  Rel r(space, e);
  std::lock_guard<std::mutex> lock(mu);
  cache.emplace(std::make_pair(space.get(), std::move(key)),
                Entry{std::weak_ptr<const StateSpace>(space), r});
  return r;
}

Transformer::Transformer(SpacePtr space, std::vector<std::pair<std::string, ExprPtr>> assigns) {
  space_ = std::move(space);
  for (auto& [name, rhs] : assigns) {
    auto vi = space_->var_index(name);
    if (!vi) throw ConfigError("assignment to unknown variable '" + name + "'");
    ValType want = ValType::Bool;
    switch (space_->domain(*vi).kind()) {
      case Domain::Kind::Bool: want = ValType::Bool; break;
      case Domain::Kind::IntRange: want = ValType::Int; break;
      case Domain::Kind::SetOf: want = ValType::Set; break;
    }
    if (expr_type(rhs, *space_, false) != want)
      throw ConfigError("assignment to '" + name + "' has wrong type");
    for (auto& [prev, _] : assigns_)
      if (prev == *vi) throw ConfigError("variable '" + name + "' assigned twice");
    assigns_.emplace_back(*vi, rhs);
  }
  uint64_t n = space_->state_count();
  size_t vars = space_->var_count();
  std::vector<ExprProgram> progs;
  progs.reserve(assigns_.size());
  for (auto& [vi, rhs] : assigns_) {
    (void)vi;
    progs.emplace_back(rhs, *space_, false);
  }
  std::vector<size_t> digits(vars);
  table_.resize(n);
  for (uint64_t i = 0; i < n; ++i) {
    uint64_t rest = i;
    for (size_t v = vars; v-- > 0;) {
      digits[v] = rest % space_->domain(v).size();
      rest /= space_->domain(v).size();
    }
    const int64_t* row = space_->raw_row(i);
    for (size_t a = 0; a < assigns_.size(); ++a) {
      size_t vi = assigns_[a].first;
      int64_t raw = progs[a].run(row, nullptr);
      const Domain& dom = space_->domain(vi);
      Value v = Value::boolean(false);
      switch (dom.kind()) {
        case Domain::Kind::Bool: v = Value::boolean(raw != 0); break;
        case Domain::Kind::IntRange: v = Value::integer(raw); break;
        case Domain::Kind::SetOf: v = Value::set(static_cast<uint64_t>(raw)); break;
      }
      auto di = dom.index_of(v);
      if (!di)
        throw ConfigError("assignment to '" + space_->var_name(vi) + "' leaves its domain in state " +
                          space_->state_at(i).str() + " (value " + v.str() + ")");
      digits[vi] = *di;
    }
    uint64_t target = 0;
    for (size_t v = 0; v < vars; ++v) target = target * space_->domain(v).size() + digits[v];
    table_[i] = static_cast<StateIdx>(target);
  }
  if (assigns_.empty()) identity_syntax_ = true;
}

Transformer Transformer::identity(SpacePtr space) {
  return Transformer(std::move(space), {});
}

Transformer Transformer::composed(const Transformer& f, const Transformer& g) {
  Transformer t;
  t.space_ = f.space_;
  uint64_t n = t.space_->state_count();
  t.table_.resize(n);
  for (uint64_t i = 0; i < n; ++i) t.table_[i] = g.table_[f.table_[i]];
  t.composed_text_ = "compose(" + f.str() + ", " + g.str() + ")";
  return t;
}

State Transformer::apply(const State& s) const {
  return space_->state_at(table_[space_->index_of(s)]);
}

size_t Transformer::ext_hash() const {
  size_t h = table_.size();
  for (StateIdx t : table_) h = h * 1099511628211ull + t;
  return h;
}

std::string Transformer::str() const {
  if (!composed_text_.empty()) return composed_text_;
  std::ostringstream os;
  os << "{ ";
  for (auto& [vi, rhs] : assigns_)
    os << space_->var_name(vi) << " := " << expr_str(rhs) << "; ";
  os << "}";
  return os.str();
}

}  // namespace corewhile
