#ifndef COREWHILE_COND_HPP
#define COREWHILE_COND_HPP

#include <optional>
#include <string>
#include <vector>

#include "corewhile/expr.hpp"

namespace corewhile {

// State predicate over a fixed finite space. The expression is kept for
// printing; the extension is materialized once and answers all queries.
class Pred {
 public:
  Pred(SpacePtr space, ExprPtr expr);
  static Pred top(SpacePtr space) { return Pred(std::move(space), e_bool(true)); }
  static Pred bottom(SpacePtr space) { return Pred(std::move(space), e_bool(false)); }
  static Pred from_states(SpacePtr space, Bitset ext, std::string text = "<set>");

  const SpacePtr& space() const { return space_; }
  const ExprPtr& expr() const { return expr_; }
  bool eval(StateIdx s) const { return ext_.get(s); }
  const Bitset& extension() const { return ext_; }
  size_t count() const { return ext_.count(); }
  bool is_top() const { return ext_.count() == ext_.size(); }
  bool is_bottom() const { return ext_.none(); }

  Pred operator&&(const Pred& o) const;
  Pred operator||(const Pred& o) const;
  Pred operator!() const;
  bool same_extension(const Pred& o) const { return ext_ == o.ext_; }
  bool subset_of(const Pred& o) const { return ext_.subset_of(o.ext_); }

  const std::string& str() const { return text_; }
  size_t ext_hash() const { return ext_.hash(); }

 private:
  Pred(SpacePtr space, ExprPtr expr, Bitset ext, std::string text)
      : space_(std::move(space)), expr_(std::move(expr)), ext_(std::move(ext)), text_(std::move(text)) {}
  SpacePtr space_;
  ExprPtr expr_;
  Bitset ext_;
  std::string text_;
};

// State relation. Rows (successor sets per state) are materialized when the
// space is small enough; otherwise they are computed from the expression on
// demand and never cached, keeping the object immutable and shareable.
class Rel {
 public:
  Rel(SpacePtr space, ExprPtr expr);
  static Rel identity(SpacePtr space);
  static Rel top(SpacePtr space) { return Rel(std::move(space), e_bool(true)); }
  static Rel bottom(SpacePtr space) { return Rel(std::move(space), e_bool(false)); }
  static Rel from_rows(SpacePtr space, std::vector<Bitset> rows, std::string text = "<rel>");

  const SpacePtr& space() const { return space_; }
  const ExprPtr& expr() const { return expr_; }
  bool materialized() const { return !rows_.empty(); }

  bool eval(StateIdx a, StateIdx b) const;
  Bitset row(StateIdx a) const;  // { b | (a,b) in R }
  Bitset image(const Bitset& xs) const;
  Rel converse() const;
  Rel compose(const Rel& s) const;        // this ; s
  Rel intersect(const Rel& o) const;
  Rel unite(const Rel& o) const;

  bool subset_of(const Rel& o, std::pair<StateIdx, StateIdx>* witness = nullptr) const;
  bool same_extension(const Rel& o) const;
  bool reflexive(StateIdx* witness = nullptr) const;
  bool is_identity() const;
  size_t pair_count() const;

  const std::string& str() const { return text_; }

 private:
  Rel(SpacePtr space, ExprPtr expr, std::vector<Bitset> rows, std::string text)
      : space_(std::move(space)), expr_(std::move(expr)), rows_(std::move(rows)), text_(std::move(text)) {}
  void require_rows(const char* what) const;

  SpacePtr space_;
  ExprPtr expr_;            // may be null for row-built relations
  std::shared_ptr<const ExprProgram> prog_;
  std::vector<Bitset> rows_;  // empty when not materialized
  std::string text_;

  static constexpr uint64_t kMaterializeLimit = 8192;
};

// Materialization memo: relations built from expressions are cached by the
// printed expression per space, since models mention the same conditions in
// many triples and scripts.
Rel cached_rel(const SpacePtr& space, const ExprPtr& e);

// Simultaneous multi-assignment denoting a total function on states. All
// right-hand sides read the pre-state. The full table is computed at
// construction, which also checks that every result stays in-domain.
class Transformer {
 public:
  Transformer(SpacePtr space, std::vector<std::pair<std::string, ExprPtr>> assigns);
  static Transformer identity(SpacePtr space);
  // g after f, as one indivisible step.
  static Transformer composed(const Transformer& f, const Transformer& g);

  const SpacePtr& space() const { return space_; }
  StateIdx apply(StateIdx s) const { return table_[s]; }
  State apply(const State& s) const;
  const std::vector<StateIdx>& table() const { return table_; }
  const std::vector<std::pair<size_t, ExprPtr>>& assigns() const { return assigns_; }
  bool has_syntax() const { return !assigns_.empty() || identity_syntax_; }

  bool operator==(const Transformer& o) const { return table_ == o.table_; }
  size_t ext_hash() const;

  std::string str() const;  // "{ x := e; ... }" form when syntax is known

 private:
  Transformer() = default;
  SpacePtr space_;
  std::vector<std::pair<size_t, ExprPtr>> assigns_;
  std::vector<StateIdx> table_;
  bool identity_syntax_ = false;
  std::string composed_text_;
};

}  // namespace corewhile

#endif
