#ifndef COREWHILE_EXPR_HPP
#define COREWHILE_EXPR_HPP

#include <memory>
#include <string>

#include "corewhile/state.hpp"

namespace corewhile {

enum class ExprOp {
  BoolConst, IntConst, SetConst, Var,
  Not, And, Or, Implies, Iff,
  Eq, Ne, Lt, Le, Gt, Ge,
  Add, Sub, Mul, Neg,
  Union, Inter, Diff, Member, Subset, Cond,
};

enum class ValType { Bool, Int, Set };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  ExprOp op;
  bool bval = false;
  int64_t ival = 0;
  uint64_t sval = 0;
  std::string var;
  bool primed = false;
  ExprPtr lhs, rhs, third;  // third: else branch of a conditional
};

inline ExprPtr e_bool(bool b) {
  auto e = std::make_shared<Expr>();
  e->op = ExprOp::BoolConst;
  e->bval = b;
  return e;
}
inline ExprPtr e_int(int64_t v) {
  auto e = std::make_shared<Expr>();
  e->op = ExprOp::IntConst;
  e->ival = v;
  return e;
}
inline ExprPtr e_set(uint64_t mask) {
  auto e = std::make_shared<Expr>();
  e->op = ExprOp::SetConst;
  e->sval = mask;
  return e;
}
inline ExprPtr e_var(std::string name, bool primed = false) {
  auto e = std::make_shared<Expr>();
  e->op = ExprOp::Var;
  e->var = std::move(name);
  e->primed = primed;
  return e;
}
inline ExprPtr e_unary(ExprOp op, ExprPtr a) {
  auto e = std::make_shared<Expr>();
  e->op = op;
  e->lhs = std::move(a);
  return e;
}
inline ExprPtr e_bin(ExprOp op, ExprPtr a, ExprPtr b) {
  auto e = std::make_shared<Expr>();
  e->op = op;
  e->lhs = std::move(a);
  e->rhs = std::move(b);
  return e;
}
inline ExprPtr e_not(ExprPtr a) { return e_unary(ExprOp::Not, std::move(a)); }
inline ExprPtr e_and(ExprPtr a, ExprPtr b) { return e_bin(ExprOp::And, std::move(a), std::move(b)); }
inline ExprPtr e_or(ExprPtr a, ExprPtr b) { return e_bin(ExprOp::Or, std::move(a), std::move(b)); }
inline ExprPtr e_eq(ExprPtr a, ExprPtr b) { return e_bin(ExprOp::Eq, std::move(a), std::move(b)); }
inline ExprPtr e_cond(ExprPtr c, ExprPtr a, ExprPtr b) {
  auto e = std::make_shared<Expr>();
  e->op = ExprOp::Cond;
  e->lhs = std::move(c);
  e->rhs = std::move(a);
  e->third = std::move(b);
  return e;
}

// Conjunction of v == v' over all declared variables.
inline ExprPtr e_identity(const StateSpace& space) {
  ExprPtr acc;
  for (size_t i = 0; i < space.var_count(); ++i) {
    ExprPtr eq = e_eq(e_var(space.var_name(i)), e_var(space.var_name(i), true));
    acc = acc ? e_and(acc, eq) : eq;
  }
  return acc ? acc : e_bool(true);
}

// Copy of e with every unprimed variable primed. Rejects already-primed
// occurrences (priming a relation has no sensible reading here).
inline ExprPtr e_prime_vars(const ExprPtr& e) {
  if (!e) return e;
  if (e->op == ExprOp::Var) {
    if (e->primed) throw ConfigError("cannot prime an expression that already mentions primed variables");
    return e_var(e->var, true);
  }
  auto r = std::make_shared<Expr>(*e);
  r->lhs = e_prime_vars(e->lhs);
  r->rhs = e_prime_vars(e->rhs);
  r->third = e_prime_vars(e->third);
  return r;
}

ValType expr_type(const ExprPtr& e, const StateSpace& space, bool allow_primed);
bool expr_has_primes(const ExprPtr& e);
Value expr_eval(const ExprPtr& e, const State& s, const State* sp);
std::string expr_str(const ExprPtr& e);

// Stack program compiled from an expression; evaluates on the space's raw
// value rows, which makes full-space materialization loops cheap.
class ExprProgram {
 public:
  ExprProgram(const ExprPtr& e, const StateSpace& space, bool allow_primed);

  int64_t run(const int64_t* s, const int64_t* sp) const {
    int64_t stack_[64];
    size_t top = 0;
    for (size_t pc = 0; pc < code_.size(); ++pc) {
      const Instr& in = code_[pc];
      switch (in.op) {
        case Op::Const: stack_[top++] = in.imm; break;
        case Op::Load: stack_[top++] = s[in.imm]; break;
        case Op::LoadP: stack_[top++] = sp[in.imm]; break;
        case Op::JfKeep:
          if (!stack_[top - 1]) pc = static_cast<size_t>(in.imm) - 1;
          else --top;
          break;
        case Op::JtKeep:
          if (stack_[top - 1]) pc = static_cast<size_t>(in.imm) - 1;
          else --top;
          break;
        case Op::Not: stack_[top - 1] = !stack_[top - 1]; break;
        case Op::Neg: stack_[top - 1] = -stack_[top - 1]; break;
        case Op::And: --top; stack_[top - 1] = stack_[top - 1] && stack_[top]; break;
        case Op::Or: --top; stack_[top - 1] = stack_[top - 1] || stack_[top]; break;
        case Op::Implies: --top; stack_[top - 1] = !stack_[top - 1] || stack_[top]; break;
        case Op::Iff: --top; stack_[top - 1] = !stack_[top - 1] == !stack_[top]; break;
        case Op::Eq: --top; stack_[top - 1] = stack_[top - 1] == stack_[top]; break;
        case Op::Ne: --top; stack_[top - 1] = stack_[top - 1] != stack_[top]; break;
        case Op::Lt: --top; stack_[top - 1] = stack_[top - 1] < stack_[top]; break;
        case Op::Le: --top; stack_[top - 1] = stack_[top - 1] <= stack_[top]; break;
        case Op::Gt: --top; stack_[top - 1] = stack_[top - 1] > stack_[top]; break;
        case Op::Ge: --top; stack_[top - 1] = stack_[top - 1] >= stack_[top]; break;
        case Op::Add: --top; stack_[top - 1] += stack_[top]; break;
        case Op::Sub: --top; stack_[top - 1] -= stack_[top]; break;
        case Op::Mul: --top; stack_[top - 1] *= stack_[top]; break;
        case Op::Union: --top; stack_[top - 1] |= stack_[top]; break;
        case Op::Inter: --top; stack_[top - 1] &= stack_[top]; break;
        case Op::Diff: --top; stack_[top - 1] &= ~stack_[top]; break;
        case Op::Member:
          --top;
          stack_[top - 1] = stack_[top - 1] >= 0 && stack_[top - 1] <= 63 &&
                            ((static_cast<uint64_t>(stack_[top]) >> stack_[top - 1]) & 1);
          break;
        case Op::Subset:
          --top;
          stack_[top - 1] = (stack_[top - 1] & ~stack_[top]) == 0;
          break;
        case Op::Select:
          top -= 2;
          stack_[top - 1] = stack_[top - 1] ? stack_[top] : stack_[top + 1];
          break;
      }
    }
    return stack_[0];
  }

 private:
  enum class Op {
    Const, Load, LoadP, Not, Neg, And, Or, Implies, Iff, Eq, Ne, Lt, Le, Gt, Ge,
    Add, Sub, Mul, Union, Inter, Diff, Member, Subset, Select, JfKeep, JtKeep,
  };
  struct Instr {
    Op op;
    int64_t imm = 0;
  };
  void emit(const ExprPtr& e, const StateSpace& space);
  std::vector<Instr> code_;
};

}  // namespace corewhile

#endif
