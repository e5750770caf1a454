#ifndef COREWHILE_TERM_HPP
#define COREWHILE_TERM_HPP

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "corewhile/cond.hpp"

namespace corewhile {

enum class TermKind { Skip, Basic, CJump, While, Ite, Seq, Parallel, Await };

struct Term;
using TermPtr = std::shared_ptr<const Term>;

// Immutable term of the language. Conditions compare extensionally and
// transformers by their state tables, so structural term equality is
// insensitive to how a condition was spelled.
struct Term {
  TermKind kind;
  std::optional<Transformer> f;  // Basic
  std::optional<Pred> cond;      // CJump, While, Ite, Await
  int label = -1;                // CJump
  TermPtr a, b;                  // While(body,else) Ite(then,else) Seq(fst,snd) CJump(else) Await(body)
  std::vector<TermPtr> comps;    // Parallel
  size_t hash = 0;
};

TermPtr t_skip();
TermPtr t_basic(Transformer f);
TermPtr t_cjump(Pred c, int label, TermPtr els);
TermPtr t_while(Pred c, TermPtr body, TermPtr els);
TermPtr t_ite(Pred c, TermPtr then_, TermPtr els);
TermPtr t_seq(TermPtr a, TermPtr b);
TermPtr t_parallel(std::vector<TermPtr> comps);
TermPtr t_await(Pred c, TermPtr body);
TermPtr t_jump(SpacePtr space, int label);          // cjump true i else skip
TermPtr t_atomic(SpacePtr space, TermPtr body);     // await true body

bool is_skip(const TermPtr& t);
bool is_jump(const TermPtr& t, int* label = nullptr);
bool term_eq(const TermPtr& a, const TermPtr& b);
std::string term_str(const TermPtr& t);

struct TermPtrHash {
  size_t operator()(const TermPtr& t) const { return t ? t->hash : 0; }
};
struct TermPtrEq {
  bool operator()(const TermPtr& a, const TermPtr& b) const { return term_eq(a, b); }
};

// Code retrieving function: total via the Skip default, finite storage.
class CodeMap {
 public:
  CodeMap() = default;
  explicit CodeMap(std::map<int, TermPtr> entries) : entries_(std::move(entries)) {}

  TermPtr get(int label) const {
    auto it = entries_.find(label);
    return it == entries_.end() ? t_skip() : it->second;
  }
  bool stores(int label) const { return entries_.count(label) != 0; }
  const std::map<int, TermPtr>& entries() const { return entries_; }

  CodeMap with(int label, TermPtr t) const {
    auto e = entries_;
    e[label] = std::move(t);
    return CodeMap(std::move(e));
  }

 private:
  std::map<int, TermPtr> entries_;
};

struct Program {
  CodeMap rho;
  TermPtr root;
};

// Rejects ρ i = cjump C i u for stored labels; the restriction makes fired
// positions unique.
void check_self_jump_restriction(const CodeMap& rho);

}  // namespace corewhile

#endif
