#ifndef COREWHILE_STATE_HPP
#define COREWHILE_STATE_HPP

#include <algorithm>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "corewhile/basics.hpp"

namespace corewhile {

// A value of one of the three supported shapes: booleans, bounded integers
// and subsets of a small integer universe. Sets are stored as bit masks over
// the integers 0..63, independently of the declaring variable's universe.
class Value {
 public:
  enum class Kind { Bool, Int, Set };

  static Value boolean(bool b) { return Value(Kind::Bool, b ? 1 : 0); }
  static Value integer(int64_t v) { return Value(Kind::Int, v); }
  static Value set(uint64_t mask) { return Value(Kind::Set, static_cast<int64_t>(mask)); }

  Kind kind() const { return kind_; }
  bool as_bool() const { return raw_ != 0; }
  int64_t as_int() const { return raw_; }
  uint64_t as_set() const { return static_cast<uint64_t>(raw_); }

  bool operator==(const Value& o) const { return kind_ == o.kind_ && raw_ == o.raw_; }
  bool operator!=(const Value& o) const { return !(*this == o); }

  std::string str() const {
    switch (kind_) {
      case Kind::Bool: return raw_ ? "true" : "false";
      case Kind::Int: return std::to_string(raw_);
      case Kind::Set: {
        std::ostringstream os;
        os << '{';
        bool first = true;
        for (int k = 0; k < 64; ++k)
          if (as_set() & (1ull << k)) {
            if (!first) os << ',';
            os << k;
            first = false;
          }
        os << '}';
        return os.str();
      }
    }
    return "?";
  }

 private:
  Value(Kind k, int64_t raw) : kind_(k), raw_(raw) {}
  Kind kind_;
  int64_t raw_;
};

class Domain {
 public:
  enum class Kind { Bool, IntRange, SetOf };

  static Domain boolean() { return Domain(Kind::Bool, 0, 1, {}); }
  static Domain int_range(int64_t lo, int64_t hi) {
    if (lo > hi) throw ConfigError("empty integer range " + std::to_string(lo) + ".." + std::to_string(hi));
    return Domain(Kind::IntRange, lo, hi, {});
  }
  static Domain set_of(std::vector<int> universe) {
    std::sort(universe.begin(), universe.end());
    universe.erase(std::unique(universe.begin(), universe.end()), universe.end());
    for (int k : universe)
      if (k < 0 || k > 63) throw ConfigError("set universe element " + std::to_string(k) + " outside 0..63");
    if (universe.size() > 20) throw ConfigError("set universe too large");
    return Domain(Kind::SetOf, 0, 0, std::move(universe));
  }

  Kind kind() const { return kind_; }
  int64_t lo() const { return lo_; }
  int64_t hi() const { return hi_; }
  const std::vector<int>& universe() const { return universe_; }

  size_t size() const {
    switch (kind_) {
      case Kind::Bool: return 2;
      case Kind::IntRange: return static_cast<size_t>(hi_ - lo_ + 1);
      case Kind::SetOf: return size_t{1} << universe_.size();
    }
    return 0;
  }

  // Enumeration: false before true; integers ascending; subsets in binary
  // counting order over the sorted universe.
  Value value_at(size_t i) const {
    switch (kind_) {
      case Kind::Bool: return Value::boolean(i != 0);
      case Kind::IntRange: return Value::integer(lo_ + static_cast<int64_t>(i));
      case Kind::SetOf: {
        uint64_t mask = 0;
        for (size_t b = 0; b < universe_.size(); ++b)
          if (i & (size_t{1} << b)) mask |= 1ull << universe_[b];
        return Value::set(mask);
      }
    }
    return Value::boolean(false);
  }

  std::optional<size_t> index_of(const Value& v) const {
    switch (kind_) {
      case Kind::Bool:
        if (v.kind() != Value::Kind::Bool) return std::nullopt;
        return v.as_bool() ? 1 : 0;
      case Kind::IntRange:
        if (v.kind() != Value::Kind::Int || v.as_int() < lo_ || v.as_int() > hi_) return std::nullopt;
        return static_cast<size_t>(v.as_int() - lo_);
      case Kind::SetOf: {
        if (v.kind() != Value::Kind::Set) return std::nullopt;
        uint64_t mask = v.as_set();
        size_t i = 0;
        for (size_t b = 0; b < universe_.size(); ++b) {
          uint64_t bit = 1ull << universe_[b];
          if (mask & bit) {
            i |= size_t{1} << b;
            mask &= ~bit;
          }
        }
        if (mask) return std::nullopt;  // element outside the universe
        return i;
      }
    }
    return std::nullopt;
  }

  std::string str() const {
    switch (kind_) {
      case Kind::Bool: return "bool";
      case Kind::IntRange: return "int " + std::to_string(lo_) + ".." + std::to_string(hi_);
      case Kind::SetOf: {
        std::ostringstream os;
        os << "set {";
        for (size_t i = 0; i < universe_.size(); ++i) {
          if (i) os << ',';
          os << universe_[i];
        }
        os << '}';
        return os.str();
      }
    }
    return "?";
  }

 private:
  Domain(Kind k, int64_t lo, int64_t hi, std::vector<int> u)
      : kind_(k), lo_(lo), hi_(hi), universe_(std::move(u)) {}
  Kind kind_;
  int64_t lo_, hi_;
  std::vector<int> universe_;
};

class State;

// Ordered list of declared variables with finite domains. The space
// enumerates all total assignments; the first declared variable is the most
// significant digit of the state index.
class StateSpace {
 public:
  explicit StateSpace(std::vector<std::pair<std::string, Domain>> vars,
                      uint64_t max_states = uint64_t{1} << 24)
      : vars_(std::move(vars)) {
    uint64_t n = 1;
    for (size_t i = 0; i < vars_.size(); ++i) {
      for (size_t j = 0; j < i; ++j)
        if (vars_[j].first == vars_[i].first)
          throw ConfigError("duplicate variable '" + vars_[i].first + "'");
      uint64_t d = vars_[i].second.size();
      if (n > max_states / d + 1) throw ConfigError("state space exceeds bound");
      n *= d;
      if (n > max_states) throw ConfigError("state space exceeds bound (" + std::to_string(max_states) + ")");
    }
    count_ = n;
  }

  size_t var_count() const { return vars_.size(); }
  const std::string& var_name(size_t i) const { return vars_[i].first; }
  const Domain& domain(size_t i) const { return vars_[i].second; }

  std::optional<size_t> var_index(const std::string& name) const {
    for (size_t i = 0; i < vars_.size(); ++i)
      if (vars_[i].first == name) return i;
    return std::nullopt;
  }

  uint64_t state_count() const { return count_; }

  inline State state_at(uint64_t idx) const;
  inline uint64_t index_of(const State& s) const;

  // Flat per-state raw encodings (bool 0/1, int value, set mask), one row of
  // var_count() entries per state, built once on first use. Predicate and
  // relation materialization loops run on these.
  const int64_t* raw_row(uint64_t idx) const {
    std::call_once(raw_once_, [this] { build_raw(); });
    return raw_.data() + idx * vars_.size();
  }

 private:
  inline void build_raw() const;

  std::vector<std::pair<std::string, Domain>> vars_;
  uint64_t count_;
  mutable std::once_flag raw_once_;
  mutable std::vector<int64_t> raw_;
};

using SpacePtr = std::shared_ptr<const StateSpace>;

// Total assignment of domain-conformant values to the declared variables.
class State {
 public:
  State(const StateSpace* space, std::vector<Value> vals)
      : space_(space), vals_(std::move(vals)) {}

  const StateSpace* space() const { return space_; }
  const Value& get(size_t var) const { return vals_[var]; }
  const Value& get(const std::string& name) const {
    auto i = space_->var_index(name);
    if (!i) throw ConfigError("unknown variable '" + name + "'");
    return vals_[*i];
  }

  State with(size_t var, Value v) const {
    State s = *this;
    s.vals_[var] = v;
    return s;
  }

  bool operator==(const State& o) const { return vals_ == o.vals_; }

  std::string str() const {
    std::ostringstream os;
    os << '[';
    for (size_t i = 0; i < vals_.size(); ++i) {
      if (i) os << ' ';
      os << space_->var_name(i) << '=' << vals_[i].str();
    }
    os << ']';
    return os.str();
  }

 private:
  const StateSpace* space_;
  std::vector<Value> vals_;
};

inline State StateSpace::state_at(uint64_t idx) const {
  std::vector<Value> vals(vars_.size(), Value::boolean(false));
  for (size_t i = vars_.size(); i-- > 0;) {
    uint64_t d = vars_[i].second.size();
    vals[i] = vars_[i].second.value_at(static_cast<size_t>(idx % d));
    idx /= d;
  }
  return State(this, std::move(vals));
}

inline uint64_t StateSpace::index_of(const State& s) const {
  uint64_t idx = 0;
  for (size_t i = 0; i < vars_.size(); ++i) {
    auto vi = vars_[i].second.index_of(s.get(i));
    if (!vi) throw ConfigError("value out of domain for '" + vars_[i].first + "'");
    idx = idx * vars_[i].second.size() + *vi;
  }
  return idx;
}

inline int64_t raw_of_value(const Value& v) {
  switch (v.kind()) {
    case Value::Kind::Bool: return v.as_bool() ? 1 : 0;
    case Value::Kind::Int: return v.as_int();
    case Value::Kind::Set: return static_cast<int64_t>(v.as_set());
  }
  return 0;
}

inline void StateSpace::build_raw() const {
  raw_.resize(count_ * vars_.size());
  for (uint64_t s = 0; s < count_; ++s) {
    State st = state_at(s);
    for (size_t v = 0; v < vars_.size(); ++v) raw_[s * vars_.size() + v] = raw_of_value(st.get(v));
  }
}

}  // namespace corewhile

#endif
