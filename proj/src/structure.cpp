#include "corewhile/structure.hpp"

#include <algorithm>
#include <sstream>

namespace corewhile {

std::string position_str(const Position& x) {
  bool plain = true;
  for (int c : x) plain = plain && c >= 0 && c <= 9;
  std::ostringstream os;
  for (size_t i = 0; i < x.size(); ++i) {
    if (!plain && i) os << '.';
    os << x[i];
  }
  return os.str();
}

Position position_parse(const std::string& s) {
  Position x;
  if (s.find('.') != std::string::npos) {
    size_t i = 0;
    while (i < s.size()) {
      size_t j = s.find('.', i);
      if (j == std::string::npos) j = s.size();
      x.push_back(std::stoi(s.substr(i, j - i)));
      i = j + 1;
    }
  } else {
    for (char c : s) {
      if (c < '0' || c > '9') throw ArgError("bad position '" + s + "'");
      x.push_back(c - '0');
    }
  }
  return x;
}

std::vector<Position> positions(const TermPtr& p) {
  std::vector<Position> out;
  switch (p->kind) {
    case TermKind::Skip:
      break;
    case TermKind::Seq:
      if (is_skip(p->a)) {
        out.push_back({0});
      } else {
        for (auto& x : positions(p->a)) {
          Position y{0};
          y.insert(y.end(), x.begin(), x.end());
          out.push_back(std::move(y));
        }
      }
      break;
    case TermKind::Parallel: {
      bool all_skip = true;
      for (auto& c : p->comps) all_skip = all_skip && is_skip(c);
      if (all_skip) {
        out.push_back({0});
        break;
      }
      for (size_t i = 0; i < p->comps.size(); ++i)
        for (auto& x : positions(p->comps[i])) {
          Position y{static_cast<int>(i + 1)};
          y.insert(y.end(), x.begin(), x.end());
          out.push_back(std::move(y));
        }
      break;
    }
    default:
      out.push_back({0});
      break;
  }
  return out;
}

namespace {

bool position_valid(const TermPtr& p, const Position& x) {
  auto ps = positions(p);
  return std::find(ps.begin(), ps.end(), x) != ps.end();
}

TermPtr lookup_at(const TermPtr& p, const Position& x, size_t i) {
  if (i + 1 == x.size() && x[i] == 0) return p;
  if (p->kind == TermKind::Seq && x[i] == 0) return lookup_at(p->a, x, i + 1);
  if (p->kind == TermKind::Parallel && x[i] >= 1 && static_cast<size_t>(x[i]) <= p->comps.size())
    return lookup_at(p->comps[x[i] - 1], x, i + 1);
  throw ArgError("position " + position_str(x) + " invalid in " + term_str(p));
}

TermPtr subst_at(const TermPtr& p, const TermPtr& sub, const Position& x, size_t i) {
  if (i + 1 == x.size() && x[i] == 0) return sub;
  if (p->kind == TermKind::Seq && x[i] == 0) return t_seq(subst_at(p->a, sub, x, i + 1), p->b);
  if (p->kind == TermKind::Parallel && x[i] >= 1 && static_cast<size_t>(x[i]) <= p->comps.size()) {
    auto comps = p->comps;
    comps[x[i] - 1] = subst_at(comps[x[i] - 1], sub, x, i + 1);
    return t_parallel(std::move(comps));
  }
  throw ArgError("position " + position_str(x) + " invalid in " + term_str(p));
}

}  // namespace

TermPtr lookup(const TermPtr& p, const Position& x) {
  if (!position_valid(p, x)) throw ArgError("position " + position_str(x) + " not in Pos(" + term_str(p) + ")");
  return lookup_at(p, x, 0);
}

TermPtr substitute(const TermPtr& p, const TermPtr& sub, const Position& x) {
  if (!position_valid(p, x)) throw ArgError("position " + position_str(x) + " not in Pos(" + term_str(p) + ")");
  return subst_at(p, sub, x, 0);
}

Position fired_position(const SpacePtr& space, const CodeMap& rho, const Config& c, const Config& c2) {
  check_self_jump_restriction(rho);
  auto succ = program_steps(space, rho, c);
  bool is_step = false;
  for (auto& s : succ) is_step = is_step || (s == c2);
  if (!is_step) throw ArgError("not a program step of the given configuration");
  for (const Position& x : positions(c.term)) {
    TermPtr sub = lookup_at(c.term, x, 0);
    for (const Config& s : program_steps(space, rho, {sub, c.state})) {
      if (s.state == c2.state && term_eq(substitute(c.term, s.term, x), c2.term)) return x;
    }
  }
  throw ArgError("no firing position found (malformed step)");
}

namespace {

void jumps_local_into(const TermPtr& p, std::set<int>& out) {
  if (p->kind == TermKind::CJump) out.insert(p->label);
  if (p->a) jumps_local_into(p->a, out);
  if (p->b) jumps_local_into(p->b, out);
  for (auto& c : p->comps) jumps_local_into(c, out);
}

}  // namespace

std::set<int> jumps_local(const TermPtr& p) {
  std::set<int> out;
  jumps_local_into(p, out);
  return out;
}

std::set<int> jumps_closure(const CodeMap& rho, const TermPtr& p) {
  std::set<int> closure = jumps_local(p);
  std::vector<int> work(closure.begin(), closure.end());
  while (!work.empty()) {
    int i = work.back();
    work.pop_back();
    for (int j : jumps_local(rho.get(i)))
      if (closure.insert(j).second) work.push_back(j);
  }
  return closure;
}

WellFormedness is_well_formed(const CodeMap& rho, const TermPtr& p) {
  WellFormedness w;
  auto cl = jumps_closure(rho, p);
  w.closure.assign(cl.begin(), cl.end());
  for (int i : w.closure)
    if (!rho.stores(i)) w.escapes.push_back(i);
  // With a finitely stored code map the closure is always finite; a truly
  // infinite retrieve function is inexpressible here.
  w.well_formed = true;
  return w;
}

bool always_available(const SpacePtr& space, const CodeMap& rho, const TermPtr& p, const Position& x) {
  TermPtr sub = lookup(p, x);
  if (sub->kind != TermKind::Await) return true;
  if (!sub->cond->is_top()) return false;
  uint64_t n = space->state_count();
  for (uint64_t s = 0; s < n; ++s)
    if (await_closure(space, rho, sub->a, static_cast<StateIdx>(s)).empty()) return false;
  return true;
}

namespace {

bool no_cjump(const TermPtr& p) {
  if (p->kind == TermKind::CJump) return false;
  if (p->a && !no_cjump(p->a)) return false;
  if (p->b && !no_cjump(p->b)) return false;
  for (auto& c : p->comps)
    if (!no_cjump(c)) return false;
  return true;
}

bool no_parallel(const TermPtr& p) {
  if (p->kind == TermKind::Parallel) return false;
  if (p->a && !no_parallel(p->a)) return false;
  if (p->b && !no_parallel(p->b)) return false;
  return true;
}

bool locally_non_blocking(const SpacePtr& space, const CodeMap& rho, const TermPtr& p) {
  for (const Position& x : positions(p))
    if (!always_available(space, rho, p, x)) return false;
  return true;
}

}  // namespace

Classification classify(const SpacePtr& space, const CodeMap& rho, const TermPtr& p) {
  Classification c;
  c.jump_free = no_cjump(p);
  c.locally_sequential = no_parallel(p);
  auto closure = jumps_closure(rho, p);
  c.sequential = c.locally_sequential;
  for (int i : closure) c.sequential = c.sequential && no_parallel(rho.get(i));
  c.locally_non_blocking = locally_non_blocking(space, rho, p);
  c.non_blocking = c.locally_non_blocking;
  for (int i : closure) c.non_blocking = c.non_blocking && locally_non_blocking(space, rho, rho.get(i));
  return c;
}

}  // namespace corewhile
