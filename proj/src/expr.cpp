#include "corewhile/expr.hpp"

#include <algorithm>
#include <sstream>

namespace corewhile {

namespace {

ValType domain_type(const Domain& d) {
  switch (d.kind()) {
    case Domain::Kind::Bool: return ValType::Bool;
    case Domain::Kind::IntRange: return ValType::Int;
    case Domain::Kind::SetOf: return ValType::Set;
  }
  return ValType::Bool;
}

const char* type_name(ValType t) {
  switch (t) {
    case ValType::Bool: return "bool";
    case ValType::Int: return "int";
    case ValType::Set: return "set";
  }
  return "?";
}

[[noreturn]] void type_error(const ExprPtr& e, const std::string& what) {
  throw ConfigError("type error in '" + expr_str(e) + "': " + what);
}

}  // namespace

ValType expr_type(const ExprPtr& e, const StateSpace& space, bool allow_primed) {
  if (!e) throw ConfigError("empty expression");
  switch (e->op) {
    case ExprOp::BoolConst: return ValType::Bool;
    case ExprOp::IntConst: return ValType::Int;
    case ExprOp::SetConst: return ValType::Set;
    case ExprOp::Var: {
      auto i = space.var_index(e->var);
      if (!i) throw ConfigError("unknown variable '" + e->var + "'");
      if (e->primed && !allow_primed)
        throw ConfigError("primed variable '" + e->var + "'' not allowed here");
      return domain_type(space.domain(*i));
    }
    case ExprOp::Not:
      if (expr_type(e->lhs, space, allow_primed) != ValType::Bool) type_error(e, "! needs bool");
      return ValType::Bool;
    case ExprOp::And:
    case ExprOp::Or:
    case ExprOp::Implies:
    case ExprOp::Iff:
      if (expr_type(e->lhs, space, allow_primed) != ValType::Bool ||
          expr_type(e->rhs, space, allow_primed) != ValType::Bool)
        type_error(e, "boolean connective needs bool operands");
      return ValType::Bool;
    case ExprOp::Eq:
    case ExprOp::Ne: {
      ValType a = expr_type(e->lhs, space, allow_primed);
      ValType b = expr_type(e->rhs, space, allow_primed);
      if (a != b) type_error(e, std::string("comparing ") + type_name(a) + " with " + type_name(b));
      return ValType::Bool;
    }
    case ExprOp::Lt:
    case ExprOp::Le:
    case ExprOp::Gt:
    case ExprOp::Ge:
      if (expr_type(e->lhs, space, allow_primed) != ValType::Int ||
          expr_type(e->rhs, space, allow_primed) != ValType::Int)
        type_error(e, "ordering needs int operands");
      return ValType::Bool;
    case ExprOp::Add:
    case ExprOp::Sub:
    case ExprOp::Mul:
      if (expr_type(e->lhs, space, allow_primed) != ValType::Int ||
          expr_type(e->rhs, space, allow_primed) != ValType::Int)
        type_error(e, "arithmetic needs int operands");
      return ValType::Int;
    case ExprOp::Neg:
      if (expr_type(e->lhs, space, allow_primed) != ValType::Int) type_error(e, "negation needs int");
      return ValType::Int;
    case ExprOp::Union:
    case ExprOp::Inter:
    case ExprOp::Diff:
      if (expr_type(e->lhs, space, allow_primed) != ValType::Set ||
          expr_type(e->rhs, space, allow_primed) != ValType::Set)
        type_error(e, "set operation needs set operands");
      return ValType::Set;
    case ExprOp::Member:
      if (expr_type(e->lhs, space, allow_primed) != ValType::Int ||
          expr_type(e->rhs, space, allow_primed) != ValType::Set)
        type_error(e, "'in' needs int and set");
      return ValType::Bool;
    case ExprOp::Subset:
      if (expr_type(e->lhs, space, allow_primed) != ValType::Set ||
          expr_type(e->rhs, space, allow_primed) != ValType::Set)
        type_error(e, "'subset' needs set operands");
      return ValType::Bool;
    case ExprOp::Cond: {
      if (expr_type(e->lhs, space, allow_primed) != ValType::Bool)
        type_error(e, "conditional needs a boolean test");
      ValType a = expr_type(e->rhs, space, allow_primed);
      ValType b = expr_type(e->third, space, allow_primed);
      if (a != b) type_error(e, "conditional branches have different types");
      return a;
    }
  }
  throw ConfigError("bad expression");
}

bool expr_has_primes(const ExprPtr& e) {
  if (!e) return false;
  if (e->op == ExprOp::Var) return e->primed;
  return expr_has_primes(e->lhs) || expr_has_primes(e->rhs) || expr_has_primes(e->third);
}

Value expr_eval(const ExprPtr& e, const State& s, const State* sp) {
  switch (e->op) {
    case ExprOp::BoolConst: return Value::boolean(e->bval);
    case ExprOp::IntConst: return Value::integer(e->ival);
    case ExprOp::SetConst: return Value::set(e->sval);
    case ExprOp::Var: {
      const State& st = e->primed ? *sp : s;
      return st.get(e->var);
    }
    case ExprOp::Not: return Value::boolean(!expr_eval(e->lhs, s, sp).as_bool());
    case ExprOp::And:
      return Value::boolean(expr_eval(e->lhs, s, sp).as_bool() && expr_eval(e->rhs, s, sp).as_bool());
    case ExprOp::Or:
      return Value::boolean(expr_eval(e->lhs, s, sp).as_bool() || expr_eval(e->rhs, s, sp).as_bool());
    case ExprOp::Implies:
      return Value::boolean(!expr_eval(e->lhs, s, sp).as_bool() || expr_eval(e->rhs, s, sp).as_bool());
    case ExprOp::Iff:
      return Value::boolean(expr_eval(e->lhs, s, sp).as_bool() == expr_eval(e->rhs, s, sp).as_bool());
    case ExprOp::Eq: return Value::boolean(expr_eval(e->lhs, s, sp) == expr_eval(e->rhs, s, sp));
    case ExprOp::Ne: return Value::boolean(!(expr_eval(e->lhs, s, sp) == expr_eval(e->rhs, s, sp)));
    case ExprOp::Lt: return Value::boolean(expr_eval(e->lhs, s, sp).as_int() < expr_eval(e->rhs, s, sp).as_int());
    case ExprOp::Le: return Value::boolean(expr_eval(e->lhs, s, sp).as_int() <= expr_eval(e->rhs, s, sp).as_int());
    case ExprOp::Gt: return Value::boolean(expr_eval(e->lhs, s, sp).as_int() > expr_eval(e->rhs, s, sp).as_int());
    case ExprOp::Ge: return Value::boolean(expr_eval(e->lhs, s, sp).as_int() >= expr_eval(e->rhs, s, sp).as_int());
    case ExprOp::Add: return Value::integer(expr_eval(e->lhs, s, sp).as_int() + expr_eval(e->rhs, s, sp).as_int());
    case ExprOp::Sub: return Value::integer(expr_eval(e->lhs, s, sp).as_int() - expr_eval(e->rhs, s, sp).as_int());
    case ExprOp::Mul: return Value::integer(expr_eval(e->lhs, s, sp).as_int() * expr_eval(e->rhs, s, sp).as_int());
    case ExprOp::Neg: return Value::integer(-expr_eval(e->lhs, s, sp).as_int());
    case ExprOp::Union: return Value::set(expr_eval(e->lhs, s, sp).as_set() | expr_eval(e->rhs, s, sp).as_set());
    case ExprOp::Inter: return Value::set(expr_eval(e->lhs, s, sp).as_set() & expr_eval(e->rhs, s, sp).as_set());
    case ExprOp::Diff: return Value::set(expr_eval(e->lhs, s, sp).as_set() & ~expr_eval(e->rhs, s, sp).as_set());
    case ExprOp::Member: {
      int64_t k = expr_eval(e->lhs, s, sp).as_int();
      if (k < 0 || k > 63) return Value::boolean(false);
      return Value::boolean((expr_eval(e->rhs, s, sp).as_set() >> k) & 1);
    }
    case ExprOp::Subset: {
      uint64_t a = expr_eval(e->lhs, s, sp).as_set();
      uint64_t b = expr_eval(e->rhs, s, sp).as_set();
      return Value::boolean((a & ~b) == 0);
    }
    case ExprOp::Cond:
      return expr_eval(e->lhs, s, sp).as_bool() ? expr_eval(e->rhs, s, sp)
                                                : expr_eval(e->third, s, sp);
  }
  throw ConfigError("bad expression");
}

namespace {

int prec(ExprOp op) {
  switch (op) {
    case ExprOp::Iff: return 1;
    case ExprOp::Implies: return 2;
    case ExprOp::Or: return 3;
    case ExprOp::And: return 4;
    case ExprOp::Eq: case ExprOp::Ne: case ExprOp::Lt: case ExprOp::Le:
    case ExprOp::Gt: case ExprOp::Ge: case ExprOp::Member: case ExprOp::Subset:
      return 5;
    case ExprOp::Add: case ExprOp::Sub: case ExprOp::Union: case ExprOp::Diff: return 6;
    case ExprOp::Mul: case ExprOp::Inter: return 7;
    case ExprOp::Not: case ExprOp::Neg: return 8;
    case ExprOp::Cond: return 0;
    default: return 9;
  }
}

const char* op_sym(ExprOp op) {
  switch (op) {
    case ExprOp::And: return " && ";
    case ExprOp::Or: return " || ";
    case ExprOp::Implies: return " -> ";
    case ExprOp::Iff: return " <-> ";
    case ExprOp::Eq: return " == ";
    case ExprOp::Ne: return " != ";
    case ExprOp::Lt: return " < ";
    case ExprOp::Le: return " <= ";
    case ExprOp::Gt: return " > ";
    case ExprOp::Ge: return " >= ";
    case ExprOp::Add: return " + ";
    case ExprOp::Sub: return " - ";
    case ExprOp::Mul: return " * ";
    case ExprOp::Union: return " union ";
    case ExprOp::Inter: return " inter ";
    case ExprOp::Diff: return " diff ";
    case ExprOp::Member: return " in ";
    case ExprOp::Subset: return " subset ";
    default: return " ? ";
  }
}

void print(std::ostream& os, const ExprPtr& e, int parent_prec) {
  int p = prec(e->op);
  bool paren = p < parent_prec;
  if (paren) os << '(';
  switch (e->op) {
    case ExprOp::BoolConst: os << (e->bval ? "true" : "false"); break;
    case ExprOp::IntConst: os << e->ival; break;
    case ExprOp::SetConst: {
      os << '{';
      bool first = true;
      for (int k = 0; k < 64; ++k)
        if (e->sval & (1ull << k)) {
          if (!first) os << ',';
          os << k;
          first = false;
        }
      os << '}';
      break;
    }
    case ExprOp::Var:
      os << e->var;
      if (e->primed) os << '\'';
      break;
    case ExprOp::Not:
      os << '!';
      print(os, e->lhs, p + 1);
      break;
    case ExprOp::Neg:
      os << '-';
      print(os, e->lhs, p + 1);
      break;
    case ExprOp::Cond:
      os << '(';
      print(os, e->lhs, 1);
      os << " ? ";
      print(os, e->rhs, 1);
      os << " : ";
      print(os, e->third, 1);
      os << ')';
      break;
    default:
      // Binary operators: left-assoc printing with a tighter right side so
      // the output reparses to the same tree shape.
      print(os, e->lhs, p);
      os << op_sym(e->op);
      print(os, e->rhs, p + 1);
      break;
  }
  if (paren) os << ')';
}

}  // namespace

std::string expr_str(const ExprPtr& e) {
  std::ostringstream os;
  print(os, e, 0);
  return os.str();
}

ExprProgram::ExprProgram(const ExprPtr& e, const StateSpace& space, bool allow_primed) {
  expr_type(e, space, allow_primed);
  emit(e, space);
  size_t depth = 0, max_depth = 0;
  for (const Instr& in : code_) {
    switch (in.op) {
      case Op::Const:
      case Op::Load:
      case Op::LoadP:
        ++depth;
        break;
      case Op::Not:
      case Op::Neg:
      case Op::JfKeep:  // worst case keeps its operand
      case Op::JtKeep:
        break;
      case Op::Select:
        depth -= 2;
        break;
      default:
        --depth;
        break;
    }
    max_depth = std::max(max_depth, depth);
  }
  if (max_depth >= 64) throw ConfigError("expression nests too deeply");
}

void ExprProgram::emit(const ExprPtr& e, const StateSpace& space) {
  switch (e->op) {
    case ExprOp::BoolConst: code_.push_back({Op::Const, e->bval ? 1 : 0}); return;
    case ExprOp::IntConst: code_.push_back({Op::Const, e->ival}); return;
    case ExprOp::SetConst: code_.push_back({Op::Const, static_cast<int64_t>(e->sval)}); return;
    case ExprOp::Var:
      code_.push_back({e->primed ? Op::LoadP : Op::Load,
                       static_cast<int64_t>(*space.var_index(e->var))});
      return;
    case ExprOp::Not: emit(e->lhs, space); code_.push_back({Op::Not}); return;
    case ExprOp::Neg: emit(e->lhs, space); code_.push_back({Op::Neg}); return;
    case ExprOp::And: {
      // Short-circuit: keep the false on the stack and skip the right side.
      emit(e->lhs, space);
      size_t jmp = code_.size();
      code_.push_back({Op::JfKeep, 0});
      emit(e->rhs, space);
      code_[jmp].imm = static_cast<int64_t>(code_.size());
      return;
    }
    case ExprOp::Or: {
      emit(e->lhs, space);
      size_t jmp = code_.size();
      code_.push_back({Op::JtKeep, 0});
      emit(e->rhs, space);
      code_[jmp].imm = static_cast<int64_t>(code_.size());
      return;
    }
    case ExprOp::Cond:
      emit(e->lhs, space);
      emit(e->rhs, space);
      emit(e->third, space);
      code_.push_back({Op::Select});
      return;
    default: break;
  }
  emit(e->lhs, space);
  emit(e->rhs, space);
  switch (e->op) {
    case ExprOp::Implies: code_.push_back({Op::Implies}); break;
    case ExprOp::Iff: code_.push_back({Op::Iff}); break;
    case ExprOp::Eq: code_.push_back({Op::Eq}); break;
    case ExprOp::Ne: code_.push_back({Op::Ne}); break;
    case ExprOp::Lt: code_.push_back({Op::Lt}); break;
    case ExprOp::Le: code_.push_back({Op::Le}); break;
    case ExprOp::Gt: code_.push_back({Op::Gt}); break;
    case ExprOp::Ge: code_.push_back({Op::Ge}); break;
    case ExprOp::Add: code_.push_back({Op::Add}); break;
    case ExprOp::Sub: code_.push_back({Op::Sub}); break;
    case ExprOp::Mul: code_.push_back({Op::Mul}); break;
    case ExprOp::Union: code_.push_back({Op::Union}); break;
    case ExprOp::Inter: code_.push_back({Op::Inter}); break;
    case ExprOp::Diff: code_.push_back({Op::Diff}); break;
    case ExprOp::Member: code_.push_back({Op::Member}); break;
    case ExprOp::Subset: code_.push_back({Op::Subset}); break;
    default: throw ConfigError("bad expression");
  }
}

}  // namespace corewhile
