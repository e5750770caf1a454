#ifndef COREWHILE_BASICS_HPP
#define COREWHILE_BASICS_HPP

#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <vector>

namespace corewhile {

using StateIdx = uint32_t;

// Model/program validation failed (bad reference, domain violation, ...).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& m) : std::runtime_error(m) {}
};

// A precondition of an operation was violated by the caller.
struct ArgError : std::runtime_error {
  explicit ArgError(const std::string& m) : std::runtime_error(m) {}
};

// A search or construction exceeded its node budget.
struct ResourceError : std::runtime_error {
  explicit ResourceError(const std::string& m) : std::runtime_error(m) {}
};

struct ParseError : std::runtime_error {
  int line, col;
  ParseError(const std::string& m, int line_, int col_)
      : std::runtime_error(m + " at " + std::to_string(line_) + ":" + std::to_string(col_)),
        line(line_), col(col_) {}
};

struct Budget {
  size_t max_nodes = 1000000;

  static Budget from_env() {
    Budget b;
    if (const char* s = std::getenv("COREWHILE_BUDGET")) {
      char* end = nullptr;
      unsigned long long v = std::strtoull(s, &end, 10);
      if (end && *end == '\0' && v > 0) b.max_nodes = static_cast<size_t>(v);
    }
    return b;
  }
};

// Fixed-size bit vector used for predicate extensions and relation rows.
class Bitset {
 public:
  Bitset() : n_(0) {}
  explicit Bitset(size_t n, bool fill = false) : n_(n), w_((n + 63) / 64, fill ? ~0ull : 0ull) {
    trim();
  }

  size_t size() const { return n_; }

  bool get(size_t i) const { return (w_[i >> 6] >> (i & 63)) & 1u; }
  void set(size_t i) { w_[i >> 6] |= (1ull << (i & 63)); }
  void reset(size_t i) { w_[i >> 6] &= ~(1ull << (i & 63)); }

  void clear() { for (auto& w : w_) w = 0; }

  size_t count() const {
    size_t c = 0;
    for (auto w : w_) c += static_cast<size_t>(__builtin_popcountll(w));
    return c;
  }
  bool any() const {
    for (auto w : w_) if (w) return true;
    return false;
  }
  bool none() const { return !any(); }

  Bitset& operator|=(const Bitset& o) {
    for (size_t i = 0; i < w_.size(); ++i) w_[i] |= o.w_[i];
    return *this;
  }
  Bitset& operator&=(const Bitset& o) {
    for (size_t i = 0; i < w_.size(); ++i) w_[i] &= o.w_[i];
    return *this;
  }
  Bitset& subtract(const Bitset& o) {
    for (size_t i = 0; i < w_.size(); ++i) w_[i] &= ~o.w_[i];
    return *this;
  }
  void flip() {
    for (auto& w : w_) w = ~w;
    trim();
  }

  bool subset_of(const Bitset& o) const {
    for (size_t i = 0; i < w_.size(); ++i)
      if (w_[i] & ~o.w_[i]) return false;
    return true;
  }
  // First bit set in *this and not in o; -1 when subset.
  long long first_not_in(const Bitset& o) const {
    for (size_t i = 0; i < w_.size(); ++i) {
      uint64_t d = w_[i] & ~o.w_[i];
      if (d) return static_cast<long long>(i * 64 + __builtin_ctzll(d));
    }
    return -1;
  }
  long long first_set() const {
    for (size_t i = 0; i < w_.size(); ++i)
      if (w_[i]) return static_cast<long long>(i * 64 + __builtin_ctzll(w_[i]));
    return -1;
  }

  bool operator==(const Bitset& o) const { return n_ == o.n_ && w_ == o.w_; }
  bool operator!=(const Bitset& o) const { return !(*this == o); }

  size_t hash() const {
    size_t h = n_;
    for (auto w : w_) h = h * 1099511628211ull + static_cast<size_t>(w);
    return h;
  }

  template <typename F>
  void for_each(F&& f) const {
    for (size_t i = 0; i < w_.size(); ++i) {
      uint64_t w = w_[i];
      while (w) {
        unsigned b = static_cast<unsigned>(__builtin_ctzll(w));
        f(i * 64 + b);
        w &= w - 1;
      }
    }
  }

  std::vector<size_t> to_vector() const {
    std::vector<size_t> v;
    for_each([&](size_t i) { v.push_back(i); });
    return v;
  }

 private:
  void trim() {
    if (n_ % 64 != 0 && !w_.empty()) w_.back() &= (1ull << (n_ % 64)) - 1;
  }
  size_t n_;
  std::vector<uint64_t> w_;
};

inline size_t hash_combine(size_t a, size_t b) {
  return a ^ (b + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2));
}

}  // namespace corewhile

#endif
