#pragma once

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "patcalc/errors.hpp"

namespace patcalc {

using Name = std::string;
using NameSet = std::set<Name>;

// ---------------------------------------------------------------------------
// Patterns: variables and pairs of patterns. Every pattern is linear.
// ---------------------------------------------------------------------------

struct PatternNode;
using Pattern = std::shared_ptr<const PatternNode>;

struct PVar {
  Name name;
};
struct PPair {
  Pattern left;
  Pattern right;
};

struct PatternNode {
  std::variant<PVar, PPair> v;
};

Pattern pvar(Name name);
Pattern ppair(Pattern left, Pattern right);

bool is_pvar(const Pattern& p);
bool is_ppair(const Pattern& p);
const PVar& as_pvar(const Pattern& p);
const PPair& as_ppair(const Pattern& p);

// Pattern variables, left to right.
std::vector<Name> pattern_vars(const Pattern& p);
NameSet pattern_var_set(const Pattern& p);
bool pattern_linear(const Pattern& p);
bool pattern_equal(const Pattern& a, const Pattern& b);
// Same tree shape, ignoring names.
bool pattern_same_shape(const Pattern& a, const Pattern& b);
Pattern pattern_rename(const Pattern& p, const Name& from, const Name& to);

// ---------------------------------------------------------------------------
// Terms. Match{body, pattern, arg} is the explicit matching body[pattern/arg];
// the pattern binds in body only.
// ---------------------------------------------------------------------------

struct TermNode;
using Term = std::shared_ptr<const TermNode>;

struct Var {
  Name name;
};
struct Abs {
  Pattern pattern;
  Term body;
};
struct Pair {
  Term fst;
  Term snd;
};
struct App {
  Term fun;
  Term arg;
};
struct Match {
  Term body;
  Pattern pattern;
  Term arg;
};

struct TermNode {
  std::variant<Var, Abs, Pair, App, Match> v;
};

Term var(Name name);
Term abs(Pattern pattern, Term body);
Term pair(Term fst, Term snd);
Term app(Term fun, Term arg);
Term match(Term body, Pattern pattern, Term arg);

template <class T>
bool is(const Term& t) {
  return std::holds_alternative<T>(t->v);
}
template <class T>
const T& as(const Term& t) {
  return std::get<T>(t->v);
}

bool term_equal(const Term& a, const Term& b);  // syntactic, names included

NameSet free_vars(const Term& t);
// Free, bound and pattern names occurring anywhere in t. Used as an avoid set
// when choosing fresh names.
NameSet all_names(const Term& t);

bool alpha_eq(const Term& a, const Term& b);

// Smallest decorated variant of `base` (base, base1, base2, ...) not in avoid.
Name fresh_name(const Name& base, const NameSet& avoid);

// Alpha-equivalent copy of t whose bound variables avoid `avoid`. Free
// variables are untouched. Deterministic.
Term fresh_rename(const Term& t, const NameSet& avoid);

// Rename free occurrences of `from` to `to`; `to` must not be captured (the
// caller picks it fresh).
Term rename_free(const Term& t, const Name& from, const Name& to);

// Deterministic renaming plan for the pattern variables of p that fall in
// `clashes`: fresh against avoid + the scope's names + the pattern's own
// variables, accumulating choices left to right.
std::vector<std::pair<Name, Name>> binder_renames(const Pattern& p, const NameSet& scope_names,
                                                  const NameSet& clashes, const NameSet& avoid);

// ---------------------------------------------------------------------------
// Positions: paths of child indices from the root.
//   Abs: 0 = body; Pair: 0 = fst, 1 = snd; App: 0 = fun, 1 = arg;
//   Match: 0 = body, 1 = arg.
// ---------------------------------------------------------------------------

struct Position {
  std::vector<int> path;
  bool operator==(const Position& o) const { return path == o.path; }
};

std::optional<Term> subterm_at(const Term& t, const Position& pos);
Term replace_at(const Term& t, const Position& pos, const Term& replacement);
std::string position_to_string(const Position& pos);

// ---------------------------------------------------------------------------
// Concrete syntax.
//
//   term    ::= abs | app
//   abs     ::= '\' pattern '.' term                (body extends right)
//   app     ::= postfix { postfix }                 (left-associative)
//   postfix ::= atom { '[' pattern '/' term ']' }
//   atom    ::= ident | '<' term ',' term '>' | '(' term ')'
//   pattern ::= ident | '<' pattern ',' pattern '>'
// ---------------------------------------------------------------------------

Term parse(const std::string& text);            // throws ParseError, LinearityError
Pattern parse_pattern(const std::string& text); // throws ParseError, LinearityError

std::string print(const Term& t);
std::string print(const Pattern& p);

}  // namespace patcalc
