#include <cctype>
#include <sstream>

#include "corewhile/model.hpp"

namespace corewhile {

namespace {

struct Token {
  enum class Kind { Ident, Number, Symbol, End } kind;
  std::string text;
  int64_t num = 0;
  int line = 1, col = 1;
};

class Lexer {
 public:
  explicit Lexer(const std::string& text) : s_(text) {
    advance();
    next_ = tok_;
    advance_into(next_);
  }

  const Token& peek() const { return tok_; }
  const Token& peek2() const { return next_; }
  Token take() {
    Token t = tok_;
    tok_ = next_;
    advance_into(next_);
    return t;
  }
  bool at_symbol(const std::string& sym) const {
    return tok_.kind == Token::Kind::Symbol && tok_.text == sym;
  }
  bool at_ident(const std::string& id) const {
    return tok_.kind == Token::Kind::Ident && tok_.text == id;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg + " (found '" + tok_.text + "')", tok_.line, tok_.col);
  }
  void expect_symbol(const std::string& sym) {
    if (!at_symbol(sym)) fail("expected '" + sym + "'");
    take();
  }
  void expect_ident(const std::string& id) {
    if (!at_ident(id)) fail("expected '" + id + "'");
    take();
  }
  std::string take_name() {
    if (tok_.kind != Token::Kind::Ident) fail("expected a name");
    return take().text;
  }
  int64_t take_number() {
    if (tok_.kind != Token::Kind::Number) fail("expected a number");
    return take().num;
  }

 private:
  void advance() { advance_into(tok_); }

  void advance_into(Token& out) {
    scan();
    out = tok_scan_;
  }

  void scan() {
    while (pos_ < s_.size()) {
      char c = s_[pos_];
      if (c == '\n') {
        ++line_;
        col_ = 1;
        ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++col_;
        ++pos_;
      } else if (c == '#' || (c == '/' && pos_ + 1 < s_.size() && s_[pos_ + 1] == '/')) {
        while (pos_ < s_.size() && s_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
    tok_scan_.line = line_;
    tok_scan_.col = col_;
    if (pos_ >= s_.size()) {
      tok_scan_ = {Token::Kind::End, "<eof>", 0, line_, col_};
      return;
    }
    char c = s_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t start = pos_;
      while (pos_ < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
        ++pos_;
      tok_scan_ = {Token::Kind::Ident, s_.substr(start, pos_ - start), 0, line_, col_};
      col_ += static_cast<int>(pos_ - start);
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t start = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      Token t{Token::Kind::Number, s_.substr(start, pos_ - start), 0, line_, col_};
      t.num = std::stoll(t.text);
      tok_scan_ = t;
      col_ += static_cast<int>(pos_ - start);
      return;
    }
    static const char* two[] = {"..", ":=", "==", "!=", "<=", ">=", "&&", "||", "->", "<->"};
    for (const char* sym : two) {
      size_t len = std::string(sym).size();
      if (s_.compare(pos_, len, sym) == 0) {
        tok_scan_ = {Token::Kind::Symbol, sym, 0, line_, col_};
        pos_ += len;
        col_ += static_cast<int>(len);
        return;
      }
    }
    tok_scan_ = {Token::Kind::Symbol, std::string(1, c), 0, line_, col_};
    ++pos_;
    ++col_;
  }

  const std::string& s_;
  size_t pos_ = 0;
  int line_ = 1, col_ = 1;
  Token tok_, next_, tok_scan_;
};

class Parser {
 public:
  explicit Parser(const std::string& text) : lex_(text) {}

  Model run() {
    std::vector<std::pair<std::string, Domain>> vars;
    bool space_closed = false;
    while (!done()) {
      if (lex_.at_ident("var")) {
        if (space_closed) lex_.fail("variable declarations must precede everything else");
        lex_.take();
        std::string name = lex_.take_name();
        lex_.expect_symbol(":");
        vars.emplace_back(name, parse_domain());
        lex_.expect_symbol(";");
        m_.decls.push_back({Decl::Kind::Var, name, 0});
        continue;
      }
      if (!space_closed) {
        m_.space = std::make_shared<StateSpace>(vars);
        space_closed = true;
      }
      parse_decl();
    }
    if (!space_closed) m_.space = std::make_shared<StateSpace>(vars);
    check_self_jump_restriction(m_.rho);
    return std::move(m_);
  }

 private:
  bool done() const { return lex_.peek().kind == Token::Kind::End; }

  Domain parse_domain() {
    if (lex_.at_ident("bool")) {
      lex_.take();
      return Domain::boolean();
    }
    if (lex_.at_ident("int")) {
      lex_.take();
      int64_t lo = take_signed();
      lex_.expect_symbol("..");
      int64_t hi = take_signed();
      return Domain::int_range(lo, hi);
    }
    if (lex_.at_ident("set")) {
      lex_.take();
      lex_.expect_symbol("{");
      std::vector<int> universe;
      while (!lex_.at_symbol("}")) {
        universe.push_back(static_cast<int>(lex_.take_number()));
        if (lex_.at_symbol(",")) lex_.take();
      }
      lex_.take();
      return Domain::set_of(std::move(universe));
    }
    lex_.fail("expected a domain (bool, int lo..hi, set {..})");
  }

  int64_t take_signed() {
    if (lex_.at_symbol("-")) {
      lex_.take();
      return -lex_.take_number();
    }
    return lex_.take_number();
  }

  void parse_decl() {
    if (lex_.at_ident("pred")) {
      lex_.take();
      std::string name = lex_.take_name();
      lex_.expect_symbol("=");
      ExprPtr e = parse_expr();
      lex_.expect_symbol(";");
      Pred validate(m_.space, e);
      (void)validate;
      m_.pred_exprs.emplace(name, e);
      m_.decls.push_back({Decl::Kind::Pred, name, 0});
      return;
    }
    if (lex_.at_ident("rel")) {
      lex_.take();
      std::string name = lex_.take_name();
      lex_.expect_symbol("=");
      ExprPtr e = parse_expr();
      lex_.expect_symbol(";");
      expr_type(e, *m_.space, true);  // relations are materialized on demand
      m_.rel_exprs.emplace(name, e);
      m_.decls.push_back({Decl::Kind::Rel, name, 0});
      return;
    }
    if (lex_.at_ident("transformer")) {
      lex_.take();
      std::string name = lex_.take_name();
      m_.transformers.emplace(name, parse_transformer());
      lex_.expect_symbol(";");
      m_.decls.push_back({Decl::Kind::Transformer, name, 0});
      return;
    }
    if (lex_.at_ident("term")) {
      lex_.take();
      std::string name = lex_.take_name();
      lex_.expect_symbol("=");
      TermPtr t = parse_term();
      lex_.expect_symbol(";");
      m_.terms.emplace(name, t);
      m_.decls.push_back({Decl::Kind::Term, name, 0});
      return;
    }
    if (lex_.at_ident("label")) {
      lex_.take();
      int label = static_cast<int>(lex_.take_number());
      lex_.expect_symbol("=");
      TermPtr t = parse_term();
      lex_.expect_symbol(";");
      m_.rho = m_.rho.with(label, t);
      m_.decls.push_back({Decl::Kind::Label, "", label});
      return;
    }
    if (lex_.at_ident("triple") || lex_.at_ident("rtriple")) {
      bool relational = lex_.peek().text == "rtriple";
      lex_.take();
      std::string name = lex_.take_name();
      lex_.expect_symbol("=");
      lex_.expect_ident("rely");
      ExprPtr rely = parse_paren_expr();
      lex_.expect_ident("pre");
      ExprPtr pre = parse_paren_expr();
      lex_.expect_symbol("{");
      TermPtr body = parse_term();
      lex_.expect_symbol("}");
      lex_.expect_ident("post");
      ExprPtr post = parse_paren_expr();
      lex_.expect_ident("guar");
      ExprPtr guar = parse_paren_expr();
      lex_.expect_symbol(";");
      Triple t = relational
                     ? Triple::relational(m_.space, m_.rho, cached_rel(rely), cached_rel(pre),
                                          body, cached_rel(post), cached_rel(guar))
                     : Triple::predicate(m_.space, m_.rho, cached_rel(rely), Pred(m_.space, pre),
                                         body, Pred(m_.space, post), cached_rel(guar));
      t.name = name;
      m_.triples.emplace(name, std::move(t));
      m_.decls.push_back({Decl::Kind::Triple, name, 0});
      return;
    }
    if (lex_.at_ident("script")) {
      lex_.take();
      std::string name = lex_.take_name();
      lex_.expect_symbol("=");
      RuleScript s = parse_script();
      lex_.expect_symbol(";");
      m_.scripts.emplace(name, std::move(s));
      m_.decls.push_back({Decl::Kind::Script, name, 0});
      return;
    }
    if (lex_.at_ident("query")) {
      lex_.take();
      Query q;
      q.name = lex_.take_name();
      lex_.expect_symbol("=");
      q.command = lex_.take_name();
      for (auto& ch : q.command)
        if (ch == '_') ch = '-';
      parse_query_body(q);
      lex_.expect_symbol(";");
      m_.queries.emplace(q.name, q);
      m_.decls.push_back({Decl::Kind::Query, q.name, 0});
      return;
    }
    lex_.fail("expected a declaration");
  }

  void parse_query_body(Query& q) {
    auto term_ref = [&] {
      std::string n = lex_.take_name();
      if (!m_.terms.count(n)) lex_.fail("unknown term '" + n + "'");
      return n;
    };
    if (q.command == "check-triple" || q.command == "check-triple-rel") {
      std::string n = lex_.take_name();
      if (!m_.triples.count(n)) lex_.fail("unknown triple '" + n + "'");
      bool rel = m_.triples.at(n).kind == TripleKind::Relational;
      if (rel != (q.command == "check-triple-rel"))
        lex_.fail("triple kind does not match the command");
      q.triple = n;
      return;
    }
    if (q.command == "derive" || q.command == "derive-seq") {
      std::string n = lex_.take_name();
      if (!m_.triples.count(n)) lex_.fail("unknown triple '" + n + "'");
      q.triple = n;
      lex_.expect_ident("with");
      std::string s = lex_.take_name();
      if (!m_.scripts.count(s)) lex_.fail("unknown script '" + s + "'");
      q.script = s;
      return;
    }
    if (q.command == "check-corr" || q.command == "check-mutual") {
      q.term_a = term_ref();
      q.term_b = term_ref();
      lex_.expect_ident("rel");
      q.rel = parse_paren_expr();
      return;
    }
    if (q.command == "lower" || q.command == "classify") {
      q.term_a = term_ref();
      return;
    }
    if (q.command == "check-termination") {
      q.term_a = term_ref();
      lex_.expect_ident("pre");
      q.pre = parse_paren_expr();
      if (lex_.at_ident("fair")) {
        lex_.take();
        q.fair = true;
      } else if (lex_.at_ident("any")) {
        lex_.take();
        q.fair = false;
      } else {
        lex_.fail("expected 'fair' or 'any'");
      }
      if (lex_.at_ident("avoid")) {
        lex_.take();
        q.avoid = parse_paren_expr();
      }
      return;
    }
    if (q.command == "enumerate" || q.command == "graph-stats") {
      q.term_a = term_ref();
      lex_.expect_ident("pre");
      q.pre = parse_paren_expr();
      lex_.expect_ident("rely");
      q.rely = parse_paren_expr();
      if (q.command == "enumerate") {
        lex_.expect_ident("depth");
        q.depth = static_cast<size_t>(lex_.take_number());
      }
      return;
    }
    lex_.fail("unknown query command '" + q.command + "'");
  }

  Transformer parse_transformer() {
    lex_.expect_symbol("{");
    std::vector<std::pair<std::string, ExprPtr>> assigns;
    while (!lex_.at_symbol("}")) {
      std::string var = lex_.take_name();
      lex_.expect_symbol(":=");
      assigns.emplace_back(var, parse_expr());
      lex_.expect_symbol(";");
    }
    lex_.take();
    return Transformer(m_.space, std::move(assigns));
  }

  bool starts_term(const Token& t) const {
    if (t.kind == Token::Kind::Symbol) return t.text == "(" || t.text == "{";
    if (t.kind != Token::Kind::Ident) return false;
    static const char* kw[] = {"skip", "basic", "jump", "cjump", "while",
                               "if",   "await", "atomic", "par"};
    for (const char* k : kw)
      if (t.text == k) return true;
    return m_.terms.count(t.text) != 0;
  }

  // A ';' continues the sequence only when a term follows; otherwise it
  // terminates the enclosing declaration.
  TermPtr parse_term() {
    std::vector<TermPtr> parts{parse_term_prim()};
    while (lex_.at_symbol(";") && starts_term(lex_.peek2())) {
      lex_.take();
      parts.push_back(parse_term_prim());
    }
    TermPtr t = parts.back();
    for (size_t i = parts.size() - 1; i-- > 0;) t = t_seq(parts[i], t);
    return t;
  }

  TermPtr parse_term_prim() {
    if (lex_.at_ident("skip")) {
      lex_.take();
      return t_skip();
    }
    if (lex_.at_ident("basic")) {
      lex_.take();
      if (lex_.peek().kind == Token::Kind::Ident) {
        std::string n = lex_.take_name();
        auto it = m_.transformers.find(n);
        if (it == m_.transformers.end()) lex_.fail("unknown transformer '" + n + "'");
        return t_basic(it->second);
      }
      return t_basic(parse_transformer());
    }
    if (lex_.at_ident("jump")) {
      lex_.take();
      return t_jump(m_.space, static_cast<int>(lex_.take_number()));
    }
    if (lex_.at_ident("cjump")) {
      lex_.take();
      Pred c(m_.space, parse_paren_expr());
      int label = static_cast<int>(lex_.take_number());
      lex_.expect_ident("else");
      return t_cjump(std::move(c), label, parse_term_prim());
    }
    if (lex_.at_ident("while")) {
      lex_.take();
      Pred c(m_.space, parse_paren_expr());
      TermPtr body = parse_term_prim();
      TermPtr els = t_skip();
      if (lex_.at_ident("finally")) {
        lex_.take();
        els = parse_term_prim();
      }
      return t_while(std::move(c), body, els);
    }
    if (lex_.at_ident("if")) {
      lex_.take();
      Pred c(m_.space, parse_paren_expr());
      TermPtr then_ = parse_term_prim();
      TermPtr els = t_skip();
      if (lex_.at_ident("else")) {
        lex_.take();
        els = parse_term_prim();
      }
      return t_ite(std::move(c), then_, els);
    }
    if (lex_.at_ident("await")) {
      lex_.take();
      Pred c(m_.space, parse_paren_expr());
      return t_await(std::move(c), parse_term_prim());
    }
    if (lex_.at_ident("atomic")) {
      lex_.take();
      return t_atomic(m_.space, parse_term_prim());
    }
    if (lex_.at_ident("par")) {
      lex_.take();
      lex_.expect_symbol("[");
      std::vector<TermPtr> comps;
      comps.push_back(parse_term());
      while (lex_.at_symbol(",")) {
        lex_.take();
        comps.push_back(parse_term());
      }
      lex_.expect_symbol("]");
      return t_parallel(std::move(comps));
    }
    if (lex_.at_symbol("(") || lex_.at_symbol("{")) {
      std::string close = lex_.at_symbol("(") ? ")" : "}";
      lex_.take();
      TermPtr t = parse_term();
      lex_.expect_symbol(close);
      return t;
    }
    if (lex_.peek().kind == Token::Kind::Ident) {
      std::string n = lex_.take_name();
      auto it = m_.terms.find(n);
      if (it == m_.terms.end()) lex_.fail("unknown term '" + n + "'");
      return it->second;
    }
    lex_.fail("expected a term");
  }

  ExprPtr parse_paren_expr() {
    lex_.expect_symbol("(");
    ExprPtr e = parse_expr();
    lex_.expect_symbol(")");
    return e;
  }

  ExprPtr parse_expr() {
    ExprPtr c = parse_iff();
    if (lex_.at_symbol("?")) {
      lex_.take();
      ExprPtr a = parse_expr();
      lex_.expect_symbol(":");
      ExprPtr b = parse_expr();
      return e_cond(c, a, b);
    }
    return c;
  }

  ExprPtr parse_iff() {
    ExprPtr e = parse_implies();
    while (lex_.at_symbol("<->")) {
      lex_.take();
      e = e_bin(ExprOp::Iff, e, parse_implies());
    }
    return e;
  }

  ExprPtr parse_implies() {
    ExprPtr e = parse_or();
    if (lex_.at_symbol("->")) {
      lex_.take();
      return e_bin(ExprOp::Implies, e, parse_implies());  // right assoc
    }
    return e;
  }

  ExprPtr parse_or() {
    ExprPtr e = parse_and();
    while (lex_.at_symbol("||")) {
      lex_.take();
      e = e_or(e, parse_and());
    }
    return e;
  }

  ExprPtr parse_and() {
    ExprPtr e = parse_cmp();
    while (lex_.at_symbol("&&")) {
      lex_.take();
      e = e_and(e, parse_cmp());
    }
    return e;
  }

  ExprPtr parse_cmp() {
    ExprPtr e = parse_add();
    struct {
      const char* sym;
      ExprOp op;
      bool ident;
    } ops[] = {{"==", ExprOp::Eq, false}, {"!=", ExprOp::Ne, false}, {"<=", ExprOp::Le, false},
               {">=", ExprOp::Ge, false}, {"<", ExprOp::Lt, false},  {">", ExprOp::Gt, false},
               {"in", ExprOp::Member, true}, {"subset", ExprOp::Subset, true}};
    for (auto& o : ops) {
      if (o.ident ? lex_.at_ident(o.sym) : lex_.at_symbol(o.sym)) {
        lex_.take();
        return e_bin(o.op, e, parse_add());
      }
    }
    return e;
  }

  ExprPtr parse_add() {
    ExprPtr e = parse_mul();
    while (true) {
      if (lex_.at_symbol("+")) {
        lex_.take();
        e = e_bin(ExprOp::Add, e, parse_mul());
      } else if (lex_.at_symbol("-")) {
        lex_.take();
        e = e_bin(ExprOp::Sub, e, parse_mul());
      } else if (lex_.at_ident("union")) {
        lex_.take();
        e = e_bin(ExprOp::Union, e, parse_mul());
      } else if (lex_.at_ident("diff")) {
        lex_.take();
        e = e_bin(ExprOp::Diff, e, parse_mul());
      } else {
        return e;
      }
    }
  }

  ExprPtr parse_mul() {
    ExprPtr e = parse_unary();
    while (true) {
      if (lex_.at_symbol("*")) {
        lex_.take();
        e = e_bin(ExprOp::Mul, e, parse_unary());
      } else if (lex_.at_ident("inter")) {
        lex_.take();
        e = e_bin(ExprOp::Inter, e, parse_unary());
      } else {
        return e;
      }
    }
  }

  ExprPtr parse_unary() {
    if (lex_.at_symbol("!")) {
      lex_.take();
      return e_not(parse_unary());
    }
    if (lex_.at_symbol("-")) {
      lex_.take();
      return e_unary(ExprOp::Neg, parse_unary());
    }
    return parse_atom();
  }

  ExprPtr parse_atom() {
    const Token& t = lex_.peek();
    if (t.kind == Token::Kind::Number) return e_int(lex_.take_number());
    if (lex_.at_symbol("(")) {
      lex_.take();
      ExprPtr e = parse_expr();
      lex_.expect_symbol(")");
      return e;
    }
    if (lex_.at_symbol("{")) {
      lex_.take();
      uint64_t mask = 0;
      while (!lex_.at_symbol("}")) {
        int64_t k = lex_.take_number();
        if (k < 0 || k > 63) lex_.fail("set elements must lie in 0..63");
        mask |= 1ull << k;
        if (lex_.at_symbol(",")) lex_.take();
      }
      lex_.take();
      return e_set(mask);
    }
    if (t.kind == Token::Kind::Ident) {
      std::string n = lex_.take_name();
      bool primed = false;
      if (lex_.at_symbol("'")) {
        lex_.take();
        primed = true;
      }
      if (n == "true" && !primed) return e_bool(true);
      if (n == "false" && !primed) return e_bool(false);
      if (n == "top" && !primed) return e_bool(true);
      if (n == "bottom" && !primed) return e_bool(false);
      if (n == "id" && !primed) return e_identity(*m_.space);
      if (m_.space->var_index(n)) return e_var(n, primed);
      auto pit = m_.pred_exprs.find(n);
      if (pit != m_.pred_exprs.end()) return primed ? e_prime_vars(pit->second) : pit->second;
      auto rit = m_.rel_exprs.find(n);
      if (rit != m_.rel_exprs.end()) {
        if (primed) lex_.fail("cannot prime the relation '" + n + "'");
        return rit->second;
      }
      lex_.fail("unknown name '" + n + "'");
    }
    lex_.fail("expected an expression");
  }

  RuleScript parse_script() {
    lex_.expect_symbol("(");
    RuleScript s;
    s.rule = lex_.take_name();
    while (!lex_.at_symbol(")")) {
      if (lex_.at_symbol("(")) {
        s.children.push_back(parse_script());
        continue;
      }
      if (lex_.at_symbol("{")) {
        lex_.take();
        std::map<std::string, ExprPtr> group;
        while (!lex_.at_symbol("}")) {
          std::string key = lex_.take_name();
          lex_.expect_symbol("=");
          lex_.expect_symbol("[");
          group[key] = parse_expr();
          lex_.expect_symbol("]");
          if (lex_.at_symbol(";")) lex_.take();
        }
        lex_.take();
        s.contracts.push_back(std::move(group));
        continue;
      }
      std::string key = lex_.take_name();
      lex_.expect_symbol("=");
      if (key == "via") {
        std::string n = lex_.take_name();
        auto it = m_.terms.find(n);
        if (it == m_.terms.end()) lex_.fail("unknown term '" + n + "'");
        s.via = it->second;
        s.via_name = n;
      } else if (key == "kind") {
        s.flavor = lex_.take_name();
      } else {
        lex_.expect_symbol("[");
        s.exprs[key] = parse_expr();
        lex_.expect_symbol("]");
      }
    }
    lex_.take();
    return s;
  }

  Rel cached_rel(const ExprPtr& e) { return corewhile::cached_rel(m_.space, e); }

  Lexer lex_;
  Model m_;
};

}  // namespace

Pred Model::pred(const std::string& name) const {
  auto it = pred_exprs.find(name);
  if (it == pred_exprs.end()) throw ConfigError("unknown predicate '" + name + "'");
  return Pred(space, it->second);
}

Rel Model::rel(const std::string& name) const {
  auto it = rel_exprs.find(name);
  if (it == rel_exprs.end()) throw ConfigError("unknown relation '" + name + "'");
  return cached_rel(space, it->second);
}

TermPtr Model::term(const std::string& name) const {
  auto it = terms.find(name);
  if (it == terms.end()) throw ConfigError("unknown term '" + name + "'");
  return it->second;
}

Model parse_model(const std::string& text) { return Parser(text).run(); }

std::string print_script(const RuleScript& s) {
  std::ostringstream os;
  os << "(" << s.rule;
  if (!s.flavor.empty()) os << " kind=" << s.flavor;
  if (s.via) os << " via=" << s.via_name;
  for (auto& [k, e] : s.exprs) os << " " << k << "=[" << expr_str(e) << "]";
  size_t child = 0;
  for (size_t i = 0; i < s.contracts.size(); ++i) {
    os << " {";
    for (auto& [k, e] : s.contracts[i]) os << " " << k << "=[" << expr_str(e) << "];";
    os << " }";
    if (child < s.children.size()) os << " " << print_script(s.children[child++]);
  }
  for (; child < s.children.size(); ++child) os << " " << print_script(s.children[child]);
  os << ")";
  return os.str();
}

std::string print_model(const Model& m) {
  std::ostringstream os;
  size_t var = 0;
  for (const Decl& d : m.decls) {
    switch (d.kind) {
      case Decl::Kind::Var:
        os << "var " << m.space->var_name(var) << " : " << m.space->domain(var).str() << ";\n";
        ++var;
        break;
      case Decl::Kind::Pred:
        os << "pred " << d.name << " = " << expr_str(m.pred_exprs.at(d.name)) << ";\n";
        break;
      case Decl::Kind::Rel:
        os << "rel " << d.name << " = " << expr_str(m.rel_exprs.at(d.name)) << ";\n";
        break;
      case Decl::Kind::Transformer:
        os << "transformer " << d.name << " " << m.transformers.at(d.name).str() << ";\n";
        break;
      case Decl::Kind::Term:
        os << "term " << d.name << " = " << term_str(m.terms.at(d.name)) << ";\n";
        break;
      case Decl::Kind::Label:
        os << "label " << d.label << " = " << term_str(m.rho.get(d.label)) << ";\n";
        break;
      case Decl::Kind::Triple: {
        const Triple& t = m.triples.at(d.name);
        os << (t.kind == TripleKind::Relational ? "rtriple " : "triple ") << d.name << " = rely ("
           << t.rely.str() << ") pre ("
           << (t.kind == TripleKind::Relational ? t.pre_r->str() : t.pre_p->str()) << ") { "
           << term_str(t.body) << " } post ("
           << (t.kind == TripleKind::Relational ? t.post_r->str() : t.post_p->str()) << ") guar ("
           << t.guar.str() << ");\n";
        break;
      }
      case Decl::Kind::Script:
        os << "script " << d.name << " = " << print_script(m.scripts.at(d.name)) << ";\n";
        break;
      case Decl::Kind::Query: {
        const Query& q = m.queries.at(d.name);
        std::string cmd = q.command;
        for (auto& ch : cmd)
          if (ch == '-') ch = '_';
        os << "query " << q.name << " = " << cmd;
        if (!q.triple.empty()) os << " " << q.triple;
        if (!q.script.empty()) os << " with " << q.script;
        if (!q.term_a.empty()) os << " " << q.term_a;
        if (!q.term_b.empty()) os << " " << q.term_b;
        if (q.rel) os << " rel (" << expr_str(q.rel) << ")";
        if (q.pre) os << " pre (" << expr_str(q.pre) << ")";
        if (q.rely) os << " rely (" << expr_str(q.rely) << ")";
        if (q.command == "check-termination") os << (q.fair ? " fair" : " any");
        if (q.avoid) os << " avoid (" << expr_str(q.avoid) << ")";
        if (q.command == "enumerate") os << " depth " << q.depth;
        os << ";\n";
        break;
      }
    }
  }
  return os.str();
}

}  // namespace corewhile
