#include "patcalc/syntax.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

namespace patcalc {

// ---------------------------------------------------------------------------
// Constructors and basic pattern helpers
// ---------------------------------------------------------------------------

Pattern pvar(Name name) { return std::make_shared<PatternNode>(PatternNode{PVar{std::move(name)}}); }
Pattern ppair(Pattern left, Pattern right) {
  return std::make_shared<PatternNode>(PatternNode{PPair{std::move(left), std::move(right)}});
}

bool is_pvar(const Pattern& p) { return std::holds_alternative<PVar>(p->v); }
bool is_ppair(const Pattern& p) { return std::holds_alternative<PPair>(p->v); }
const PVar& as_pvar(const Pattern& p) { return std::get<PVar>(p->v); }
const PPair& as_ppair(const Pattern& p) { return std::get<PPair>(p->v); }

static void collect_pattern_vars(const Pattern& p, std::vector<Name>& out) {
  if (is_pvar(p)) {
    out.push_back(as_pvar(p).name);
  } else {
    collect_pattern_vars(as_ppair(p).left, out);
    collect_pattern_vars(as_ppair(p).right, out);
  }
}

std::vector<Name> pattern_vars(const Pattern& p) {
  std::vector<Name> out;
  collect_pattern_vars(p, out);
  return out;
}

NameSet pattern_var_set(const Pattern& p) {
  auto vs = pattern_vars(p);
  return NameSet(vs.begin(), vs.end());
}

bool pattern_linear(const Pattern& p) {
  auto vs = pattern_vars(p);
  NameSet seen;
  for (auto& v : vs)
    if (!seen.insert(v).second) return false;
  return true;
}

bool pattern_equal(const Pattern& a, const Pattern& b) {
  if (is_pvar(a) && is_pvar(b)) return as_pvar(a).name == as_pvar(b).name;
  if (is_ppair(a) && is_ppair(b))
    return pattern_equal(as_ppair(a).left, as_ppair(b).left) &&
           pattern_equal(as_ppair(a).right, as_ppair(b).right);
  return false;
}

bool pattern_same_shape(const Pattern& a, const Pattern& b) {
  if (is_pvar(a) && is_pvar(b)) return true;
  if (is_ppair(a) && is_ppair(b))
    return pattern_same_shape(as_ppair(a).left, as_ppair(b).left) &&
           pattern_same_shape(as_ppair(a).right, as_ppair(b).right);
  return false;
}

Pattern pattern_rename(const Pattern& p, const Name& from, const Name& to) {
  if (is_pvar(p)) return as_pvar(p).name == from ? pvar(to) : p;
  return ppair(pattern_rename(as_ppair(p).left, from, to),
               pattern_rename(as_ppair(p).right, from, to));
}

Term var(Name name) { return std::make_shared<TermNode>(TermNode{Var{std::move(name)}}); }
Term abs(Pattern pattern, Term body) {
  return std::make_shared<TermNode>(TermNode{Abs{std::move(pattern), std::move(body)}});
}
Term pair(Term fst, Term snd) {
  return std::make_shared<TermNode>(TermNode{Pair{std::move(fst), std::move(snd)}});
}
Term app(Term fun, Term arg) {
  return std::make_shared<TermNode>(TermNode{App{std::move(fun), std::move(arg)}});
}
Term match(Term body, Pattern pattern, Term arg) {
  return std::make_shared<TermNode>(TermNode{Match{std::move(body), std::move(pattern), std::move(arg)}});
}

bool term_equal(const Term& a, const Term& b) {
  if (a.get() == b.get()) return true;
  if (a->v.index() != b->v.index()) return false;
  if (is<Var>(a)) return as<Var>(a).name == as<Var>(b).name;
  if (is<Abs>(a))
    return pattern_equal(as<Abs>(a).pattern, as<Abs>(b).pattern) &&
           term_equal(as<Abs>(a).body, as<Abs>(b).body);
  if (is<Pair>(a))
    return term_equal(as<Pair>(a).fst, as<Pair>(b).fst) && term_equal(as<Pair>(a).snd, as<Pair>(b).snd);
  if (is<App>(a))
    return term_equal(as<App>(a).fun, as<App>(b).fun) && term_equal(as<App>(a).arg, as<App>(b).arg);
  return pattern_equal(as<Match>(a).pattern, as<Match>(b).pattern) &&
         term_equal(as<Match>(a).body, as<Match>(b).body) &&
         term_equal(as<Match>(a).arg, as<Match>(b).arg);
}

// ---------------------------------------------------------------------------
// Variables
// ---------------------------------------------------------------------------

static void free_vars_into(const Term& t, NameSet& acc) {
  if (is<Var>(t)) {
    acc.insert(as<Var>(t).name);
  } else if (is<Abs>(t)) {
    NameSet body;
    free_vars_into(as<Abs>(t).body, body);
    for (auto& v : pattern_vars(as<Abs>(t).pattern)) body.erase(v);
    acc.insert(body.begin(), body.end());
  } else if (is<Pair>(t)) {
    free_vars_into(as<Pair>(t).fst, acc);
    free_vars_into(as<Pair>(t).snd, acc);
  } else if (is<App>(t)) {
    free_vars_into(as<App>(t).fun, acc);
    free_vars_into(as<App>(t).arg, acc);
  } else {
    const auto& m = as<Match>(t);
    NameSet body;
    free_vars_into(m.body, body);
    for (auto& v : pattern_vars(m.pattern)) body.erase(v);
    acc.insert(body.begin(), body.end());
    free_vars_into(m.arg, acc);
  }
}

NameSet free_vars(const Term& t) {
  NameSet acc;
  free_vars_into(t, acc);
  return acc;
}

static void all_names_into(const Term& t, NameSet& acc) {
  if (is<Var>(t)) {
    acc.insert(as<Var>(t).name);
  } else if (is<Abs>(t)) {
    for (auto& v : pattern_vars(as<Abs>(t).pattern)) acc.insert(v);
    all_names_into(as<Abs>(t).body, acc);
  } else if (is<Pair>(t)) {
    all_names_into(as<Pair>(t).fst, acc);
    all_names_into(as<Pair>(t).snd, acc);
  } else if (is<App>(t)) {
    all_names_into(as<App>(t).fun, acc);
    all_names_into(as<App>(t).arg, acc);
  } else {
    const auto& m = as<Match>(t);
    for (auto& v : pattern_vars(m.pattern)) acc.insert(v);
    all_names_into(m.body, acc);
    all_names_into(m.arg, acc);
  }
}

NameSet all_names(const Term& t) {
  NameSet acc;
  all_names_into(t, acc);
  return acc;
}

// ---------------------------------------------------------------------------
// Alpha equivalence: bound names are compared through shared binding levels.
// ---------------------------------------------------------------------------

namespace {

using BindEnv = std::map<Name, int>;

bool bind_lockstep(const Pattern& a, const Pattern& b, BindEnv& ea, BindEnv& eb, int& level) {
  if (is_pvar(a) && is_pvar(b)) {
    ea[as_pvar(a).name] = level;
    eb[as_pvar(b).name] = level;
    ++level;
    return true;
  }
  if (is_ppair(a) && is_ppair(b))
    return bind_lockstep(as_ppair(a).left, as_ppair(b).left, ea, eb, level) &&
           bind_lockstep(as_ppair(a).right, as_ppair(b).right, ea, eb, level);
  return false;
}

bool alpha_eq_impl(const Term& a, const Term& b, const BindEnv& ea, const BindEnv& eb, int level) {
  if (a->v.index() != b->v.index()) return false;
  if (is<Var>(a)) {
    auto ia = ea.find(as<Var>(a).name);
    auto ib = eb.find(as<Var>(b).name);
    if ((ia != ea.end()) != (ib != eb.end())) return false;
    if (ia != ea.end()) return ia->second == ib->second;
    return as<Var>(a).name == as<Var>(b).name;
  }
  if (is<Abs>(a)) {
    BindEnv ea2 = ea, eb2 = eb;
    int lvl = level;
    if (!bind_lockstep(as<Abs>(a).pattern, as<Abs>(b).pattern, ea2, eb2, lvl)) return false;
    return alpha_eq_impl(as<Abs>(a).body, as<Abs>(b).body, ea2, eb2, lvl);
  }
  if (is<Pair>(a))
    return alpha_eq_impl(as<Pair>(a).fst, as<Pair>(b).fst, ea, eb, level) &&
           alpha_eq_impl(as<Pair>(a).snd, as<Pair>(b).snd, ea, eb, level);
  if (is<App>(a))
    return alpha_eq_impl(as<App>(a).fun, as<App>(b).fun, ea, eb, level) &&
           alpha_eq_impl(as<App>(a).arg, as<App>(b).arg, ea, eb, level);
  const auto& ma = as<Match>(a);
  const auto& mb = as<Match>(b);
  if (!alpha_eq_impl(ma.arg, mb.arg, ea, eb, level)) return false;
  BindEnv ea2 = ea, eb2 = eb;
  int lvl = level;
  if (!bind_lockstep(ma.pattern, mb.pattern, ea2, eb2, lvl)) return false;
  return alpha_eq_impl(ma.body, mb.body, ea2, eb2, lvl);
}

}  // namespace

bool alpha_eq(const Term& a, const Term& b) { return alpha_eq_impl(a, b, {}, {}, 0); }

// ---------------------------------------------------------------------------
// Fresh names and renaming
// ---------------------------------------------------------------------------

Name fresh_name(const Name& base, const NameSet& avoid) {
  // Strip a trailing numeric suffix so z3 freshens to z4, not z31.
  std::size_t end = base.size();
  while (end > 1 && std::isdigit(static_cast<unsigned char>(base[end - 1]))) --end;
  Name stem = base.substr(0, end);
  if (avoid.find(stem) == avoid.end()) return stem;
  for (long long k = 1;; ++k) {
    Name candidate = stem + std::to_string(k);
    if (avoid.find(candidate) == avoid.end()) return candidate;
  }
}

Term rename_free(const Term& t, const Name& from, const Name& to) {
  if (is<Var>(t)) return as<Var>(t).name == from ? var(to) : t;
  if (is<Abs>(t)) {
    const auto& n = as<Abs>(t);
    if (pattern_var_set(n.pattern).count(from)) return t;
    return abs(n.pattern, rename_free(n.body, from, to));
  }
  if (is<Pair>(t)) return pair(rename_free(as<Pair>(t).fst, from, to), rename_free(as<Pair>(t).snd, from, to));
  if (is<App>(t)) return app(rename_free(as<App>(t).fun, from, to), rename_free(as<App>(t).arg, from, to));
  const auto& m = as<Match>(t);
  Term arg = rename_free(m.arg, from, to);
  if (pattern_var_set(m.pattern).count(from)) return match(m.body, m.pattern, arg);
  return match(rename_free(m.body, from, to), m.pattern, arg);
}

std::vector<std::pair<Name, Name>> binder_renames(const Pattern& p, const NameSet& scope_names,
                                                  const NameSet& clashes, const NameSet& avoid) {
  NameSet taken = avoid;
  taken.insert(scope_names.begin(), scope_names.end());
  for (auto& v : pattern_vars(p)) taken.insert(v);
  std::vector<std::pair<Name, Name>> out;
  for (const auto& v : pattern_vars(p)) {
    if (clashes.count(v)) {
      Name v2 = fresh_name(v, taken);
      taken.insert(v2);
      out.emplace_back(v, v2);
    }
  }
  return out;
}

namespace {

// Renames the binders of `p` that fall in `avoid`, applying the same renaming
// to `scope` (the subterm the pattern binds in).
std::pair<Pattern, Term> freshen_binder(Pattern p, Term scope, const NameSet& avoid) {
  for (auto& [v, v2] : binder_renames(p, all_names(scope), avoid, avoid)) {
    scope = rename_free(scope, v, v2);
    p = pattern_rename(p, v, v2);
  }
  return {p, scope};
}

}  // namespace

Term fresh_rename(const Term& t, const NameSet& avoid) {
  if (is<Var>(t)) return t;
  if (is<Abs>(t)) {
    auto [p, body] = freshen_binder(as<Abs>(t).pattern, as<Abs>(t).body, avoid);
    return abs(p, fresh_rename(body, avoid));
  }
  if (is<Pair>(t)) return pair(fresh_rename(as<Pair>(t).fst, avoid), fresh_rename(as<Pair>(t).snd, avoid));
  if (is<App>(t)) return app(fresh_rename(as<App>(t).fun, avoid), fresh_rename(as<App>(t).arg, avoid));
  const auto& m = as<Match>(t);
  Term arg = fresh_rename(m.arg, avoid);
  auto [p, body] = freshen_binder(m.pattern, m.body, avoid);
  return match(fresh_rename(body, avoid), p, arg);
}

// ---------------------------------------------------------------------------
// Positions
// ---------------------------------------------------------------------------

static std::optional<Term> child_of(const Term& t, int i) {
  if (is<Abs>(t) && i == 0) return as<Abs>(t).body;
  if (is<Pair>(t) && i == 0) return as<Pair>(t).fst;
  if (is<Pair>(t) && i == 1) return as<Pair>(t).snd;
  if (is<App>(t) && i == 0) return as<App>(t).fun;
  if (is<App>(t) && i == 1) return as<App>(t).arg;
  if (is<Match>(t) && i == 0) return as<Match>(t).body;
  if (is<Match>(t) && i == 1) return as<Match>(t).arg;
  return std::nullopt;
}

std::optional<Term> subterm_at(const Term& t, const Position& pos) {
  Term cur = t;
  for (int i : pos.path) {
    auto next = child_of(cur, i);
    if (!next) return std::nullopt;
    cur = *next;
  }
  return cur;
}

static Term replace_at_impl(const Term& t, const std::vector<int>& path, std::size_t k, const Term& r) {
  if (k == path.size()) return r;
  int i = path[k];
  if (is<Abs>(t) && i == 0) return abs(as<Abs>(t).pattern, replace_at_impl(as<Abs>(t).body, path, k + 1, r));
  if (is<Pair>(t) && i == 0) return pair(replace_at_impl(as<Pair>(t).fst, path, k + 1, r), as<Pair>(t).snd);
  if (is<Pair>(t) && i == 1) return pair(as<Pair>(t).fst, replace_at_impl(as<Pair>(t).snd, path, k + 1, r));
  if (is<App>(t) && i == 0) return app(replace_at_impl(as<App>(t).fun, path, k + 1, r), as<App>(t).arg);
  if (is<App>(t) && i == 1) return app(as<App>(t).fun, replace_at_impl(as<App>(t).arg, path, k + 1, r));
  if (is<Match>(t) && i == 0)
    return match(replace_at_impl(as<Match>(t).body, path, k + 1, r), as<Match>(t).pattern, as<Match>(t).arg);
  if (is<Match>(t) && i == 1)
    return match(as<Match>(t).body, as<Match>(t).pattern, replace_at_impl(as<Match>(t).arg, path, k + 1, r));
  throw std::logic_error("replace_at: position does not resolve");
}

Term replace_at(const Term& t, const Position& pos, const Term& replacement) {
  return replace_at_impl(t, pos.path, 0, replacement);
}

std::string position_to_string(const Position& pos) {
  std::string s;
  for (std::size_t i = 0; i < pos.path.size(); ++i) {
    if (i) s += '.';
    s += std::to_string(pos.path[i]);
  }
  return s.empty() ? "<root>" : s;
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

namespace {

struct Lexer {
  const std::string& text;
  std::size_t pos = 0;

  explicit Lexer(const std::string& t) : text(t) {}

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }
  bool eof() {
    skip_ws();
    return pos >= text.size();
  }
  char peek() {
    skip_ws();
    return pos < text.size() ? text[pos] : '\0';
  }
  bool eat(char c) {
    skip_ws();
    if (pos < text.size() && text[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!eat(c)) throw ParseError(std::string("expected '") + c + "'", pos);
  }
  static bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)); }
  static bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
  }
  std::optional<Name> ident() {
    skip_ws();
    if (pos >= text.size() || !ident_start(text[pos])) return std::nullopt;
    std::size_t start = pos;
    while (pos < text.size() && ident_char(text[pos])) ++pos;
    return text.substr(start, pos - start);
  }
};

struct Parser {
  Lexer lex;

  explicit Parser(const std::string& t) : lex(t) {}

  Pattern pattern() {
    if (lex.eat('<')) {
      Pattern l = pattern();
      lex.expect(',');
      Pattern r = pattern();
      lex.expect('>');
      return ppair(l, r);
    }
    auto id = lex.ident();
    if (!id) throw ParseError("expected pattern", lex.pos);
    return pvar(*id);
  }

  Pattern checked_pattern() {
    Pattern p = pattern();
    NameSet seen;
    for (auto& v : pattern_vars(p))
      if (!seen.insert(v).second) throw LinearityError(v);
    return p;
  }

  Term term() {
    if (lex.peek() == '\\') {
      lex.expect('\\');
      Pattern p = checked_pattern();
      lex.expect('.');
      return abs(p, term());
    }
    return application();
  }

  Term application() {
    Term t = postfix();
    for (;;) {
      char c = lex.peek();
      if (c == '\0' || c == ')' || c == '>' || c == ',' || c == ']' || c == '/') break;
      t = app(t, postfix());
    }
    return t;
  }

  Term postfix() {
    Term t = atom();
    while (lex.eat('[')) {
      Pattern p = checked_pattern();
      lex.expect('/');
      Term u = term();
      lex.expect(']');
      t = match(t, p, u);
    }
    return t;
  }

  Term atom() {
    if (lex.eat('(')) {
      Term t = term();
      lex.expect(')');
      return t;
    }
    if (lex.eat('<')) {
      Term fst = term();
      lex.expect(',');
      Term snd = term();
      lex.expect('>');
      return pair(fst, snd);
    }
    auto id = lex.ident();
    if (!id) throw ParseError("expected term", lex.pos);
    return var(*id);
  }
};

}  // namespace

Term parse(const std::string& text) {
  Parser p(text);
  Term t = p.term();
  if (!p.lex.eof()) throw ParseError("trailing input", p.lex.pos);
  return t;
}

Pattern parse_pattern(const std::string& text) {
  Parser p(text);
  Pattern pat = p.checked_pattern();
  if (!p.lex.eof()) throw ParseError("trailing input", p.lex.pos);
  return pat;
}

// ---------------------------------------------------------------------------
// Printer
// ---------------------------------------------------------------------------

std::string print(const Pattern& p) {
  if (is_pvar(p)) return as_pvar(p).name;
  return "<" + print(as_ppair(p).left) + ", " + print(as_ppair(p).right) + ">";
}

namespace {

void print_term(const Term& t, std::ostringstream& out);

// Postfix-level item: atoms and matchings; anything looser needs parens.
void print_postfix(const Term& t, std::ostringstream& out) {
  if (is<Abs>(t) || is<App>(t)) {
    out << '(';
    print_term(t, out);
    out << ')';
  } else {
    print_term(t, out);
  }
}

void print_term(const Term& t, std::ostringstream& out) {
  if (is<Var>(t)) {
    out << as<Var>(t).name;
  } else if (is<Abs>(t)) {
    out << '\\' << print(as<Abs>(t).pattern) << ". ";
    print_term(as<Abs>(t).body, out);
  } else if (is<Pair>(t)) {
    out << '<';
    print_term(as<Pair>(t).fst, out);
    out << ", ";
    print_term(as<Pair>(t).snd, out);
    out << '>';
  } else if (is<App>(t)) {
    const auto& a = as<App>(t);
    // Left side stays at application level unless it is an abstraction.
    if (is<Abs>(a.fun)) {
      out << '(';
      print_term(a.fun, out);
      out << ')';
    } else {
      print_term(a.fun, out);
    }
    out << ' ';
    print_postfix(a.arg, out);
  } else {
    const auto& m = as<Match>(t);
    print_postfix(m.body, out);
    out << '[' << print(m.pattern) << '/';
    print_term(m.arg, out);
    out << ']';
  }
}

}  // namespace

std::string print(const Term& t) {
  std::ostringstream out;
  print_term(t, out);
  return out.str();
}

}  // namespace patcalc
