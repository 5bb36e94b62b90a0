#pragma once

#include <map>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "patcalc/syntax.hpp"

namespace patcalc {

// ---------------------------------------------------------------------------
// Shared type grammar for both systems.
//   simple   ::= base | multiset '->' simple | multiset 'x' multiset
//   multiset ::= unordered collection of simple types (duplicates allowed)
// The checkers restrict base constants per system: plain * for the upper
// system, *N / *M for the exact one.
// ---------------------------------------------------------------------------

enum class BaseKind { Star, StarN, StarM };

struct TypeNode;
using Type = std::shared_ptr<const TypeNode>;

// Kept sorted by the canonical type order, so equality is structural.
struct MultisetType {
  std::vector<Type> elems;

  std::size_t size() const { return elems.size(); }
  bool empty() const { return elems.empty(); }
};

struct TBase {
  BaseKind kind;
};
struct TProduct {
  MultisetType left;
  MultisetType right;
};
struct TArrow {
  MultisetType domain;
  Type codomain;
};

struct TypeNode {
  std::variant<TBase, TProduct, TArrow> v;
};

Type base(BaseKind k);
Type star();
Type star_n();
Type star_m();
Type product(MultisetType left, MultisetType right);
Type arrow(MultisetType domain, Type codomain);

bool is_base(const Type& t);
bool is_product(const Type& t);
bool is_arrow(const Type& t);
const TBase& as_base(const Type& t);
const TProduct& as_product(const Type& t);
const TArrow& as_arrow(const Type& t);

// Canonical total order on types; the order itself carries no meaning.
int type_compare(const Type& a, const Type& b);
bool type_equal(const Type& a, const Type& b);
bool mset_equal(const MultisetType& a, const MultisetType& b);

MultisetType mset(std::vector<Type> elems);
MultisetType singleton(Type t);
MultisetType multiset_union(const MultisetType& a, const MultisetType& b);

// ---------------------------------------------------------------------------
// Typing contexts: total maps from names to multiset types, almost everywhere
// empty. x:[] entries are never stored, so a context equals its support.
// ---------------------------------------------------------------------------

struct TypingContext {
  std::map<Name, MultisetType> entries;

  // Returns [] for absent names.
  MultisetType get(const Name& x) const;
  bool has(const Name& x) const { return entries.count(x) != 0; }
  NameSet domain() const;
  bool empty() const { return entries.empty(); }
};

TypingContext context_of(std::vector<std::pair<Name, MultisetType>> entries);
TypingContext context_meet(const TypingContext& a, const TypingContext& b);
TypingContext context_meet(const std::vector<TypingContext>& gs);
TypingContext context_restrict(const TypingContext& g, const Pattern& p);
TypingContext context_erase(const TypingContext& g, const NameSet& vars);
bool context_equal(const TypingContext& a, const TypingContext& b);

bool is_tight(const Type& t);
bool is_tight(const MultisetType& a);
bool is_tight(const TypingContext& g);

// True when some type inside is built from the given base constant.
bool mentions_base(const Type& t, BaseKind k);
bool mentions_base(const MultisetType& a, BaseKind k);
bool mentions_base(const TypingContext& g, BaseKind k);

// Concrete syntax: '*', '*N', '*M'; '[s1, s2]'; 'A -> s' (right-assoc);
// 'A x B' with A, B multisets.
std::string print_type(const Type& t);
std::string print_mset(const MultisetType& a);
Type parse_type(const std::string& text);            // throws FormatError
MultisetType parse_mset(const std::string& text);    // throws FormatError
std::variant<Type, MultisetType> parse_assigned(const std::string& text);

}  // namespace patcalc
