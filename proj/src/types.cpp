#include "patcalc/types.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "patcalc/errors.hpp"

namespace patcalc {

Type base(BaseKind k) { return std::make_shared<TypeNode>(TypeNode{TBase{k}}); }
Type star() { return base(BaseKind::Star); }
Type star_n() { return base(BaseKind::StarN); }
Type star_m() { return base(BaseKind::StarM); }
Type product(MultisetType left, MultisetType right) {
  return std::make_shared<TypeNode>(TypeNode{TProduct{std::move(left), std::move(right)}});
}
Type arrow(MultisetType domain, Type codomain) {
  return std::make_shared<TypeNode>(TypeNode{TArrow{std::move(domain), std::move(codomain)}});
}

bool is_base(const Type& t) { return std::holds_alternative<TBase>(t->v); }
bool is_product(const Type& t) { return std::holds_alternative<TProduct>(t->v); }
bool is_arrow(const Type& t) { return std::holds_alternative<TArrow>(t->v); }
const TBase& as_base(const Type& t) { return std::get<TBase>(t->v); }
const TProduct& as_product(const Type& t) { return std::get<TProduct>(t->v); }
const TArrow& as_arrow(const Type& t) { return std::get<TArrow>(t->v); }

static int mset_compare(const MultisetType& a, const MultisetType& b);

int type_compare(const Type& a, const Type& b) {
  if (a->v.index() != b->v.index()) return a->v.index() < b->v.index() ? -1 : 1;
  if (is_base(a)) {
    int ka = static_cast<int>(as_base(a).kind), kb = static_cast<int>(as_base(b).kind);
    return ka == kb ? 0 : (ka < kb ? -1 : 1);
  }
  if (is_product(a)) {
    int c = mset_compare(as_product(a).left, as_product(b).left);
    if (c) return c;
    return mset_compare(as_product(a).right, as_product(b).right);
  }
  int c = mset_compare(as_arrow(a).domain, as_arrow(b).domain);
  if (c) return c;
  return type_compare(as_arrow(a).codomain, as_arrow(b).codomain);
}

static int mset_compare(const MultisetType& a, const MultisetType& b) {
  if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
  for (std::size_t i = 0; i < a.size(); ++i) {
    int c = type_compare(a.elems[i], b.elems[i]);
    if (c) return c;
  }
  return 0;
}

bool type_equal(const Type& a, const Type& b) { return type_compare(a, b) == 0; }
bool mset_equal(const MultisetType& a, const MultisetType& b) { return mset_compare(a, b) == 0; }

MultisetType mset(std::vector<Type> elems) {
  std::sort(elems.begin(), elems.end(),
            [](const Type& x, const Type& y) { return type_compare(x, y) < 0; });
  return MultisetType{std::move(elems)};
}

MultisetType singleton(Type t) { return MultisetType{{std::move(t)}}; }

MultisetType multiset_union(const MultisetType& a, const MultisetType& b) {
  std::vector<Type> elems = a.elems;
  elems.insert(elems.end(), b.elems.begin(), b.elems.end());
  return mset(std::move(elems));
}

// ---------------------------------------------------------------------------
// Contexts
// ---------------------------------------------------------------------------

MultisetType TypingContext::get(const Name& x) const {
  auto it = entries.find(x);
  return it == entries.end() ? MultisetType{} : it->second;
}

NameSet TypingContext::domain() const {
  NameSet out;
  for (auto& [k, v] : entries) out.insert(k);
  return out;
}

TypingContext context_of(std::vector<std::pair<Name, MultisetType>> entries) {
  TypingContext g;
  for (auto& [k, v] : entries) {
    if (v.empty()) continue;
    auto it = g.entries.find(k);
    if (it == g.entries.end())
      g.entries.emplace(k, std::move(v));
    else
      it->second = multiset_union(it->second, v);
  }
  return g;
}

TypingContext context_meet(const TypingContext& a, const TypingContext& b) {
  TypingContext out = a;
  for (auto& [k, v] : b.entries) {
    auto it = out.entries.find(k);
    if (it == out.entries.end())
      out.entries.emplace(k, v);
    else
      it->second = multiset_union(it->second, v);
  }
  return out;
}

TypingContext context_meet(const std::vector<TypingContext>& gs) {
  TypingContext out;
  for (auto& g : gs) out = context_meet(out, g);
  return out;
}

TypingContext context_restrict(const TypingContext& g, const Pattern& p) {
  auto vars = pattern_var_set(p);
  TypingContext out;
  for (auto& [k, v] : g.entries)
    if (vars.count(k)) out.entries.emplace(k, v);
  return out;
}

TypingContext context_erase(const TypingContext& g, const NameSet& vars) {
  TypingContext out;
  for (auto& [k, v] : g.entries)
    if (!vars.count(k)) out.entries.emplace(k, v);
  return out;
}

bool context_equal(const TypingContext& a, const TypingContext& b) {
  if (a.entries.size() != b.entries.size()) return false;
  auto ia = a.entries.begin();
  auto ib = b.entries.begin();
  for (; ia != a.entries.end(); ++ia, ++ib) {
    if (ia->first != ib->first) return false;
    if (!mset_equal(ia->second, ib->second)) return false;
  }
  return true;
}

bool is_tight(const Type& t) {
  return is_base(t) && (as_base(t).kind == BaseKind::StarN || as_base(t).kind == BaseKind::StarM);
}

bool is_tight(const MultisetType& a) {
  for (auto& t : a.elems)
    if (!is_tight(t)) return false;
  return true;
}

bool is_tight(const TypingContext& g) {
  for (auto& [k, v] : g.entries)
    if (!is_tight(v)) return false;
  return true;
}

bool mentions_base(const Type& t, BaseKind k) {
  if (is_base(t)) return as_base(t).kind == k;
  if (is_product(t)) return mentions_base(as_product(t).left, k) || mentions_base(as_product(t).right, k);
  return mentions_base(as_arrow(t).domain, k) || mentions_base(as_arrow(t).codomain, k);
}

bool mentions_base(const MultisetType& a, BaseKind k) {
  for (auto& t : a.elems)
    if (mentions_base(t, k)) return true;
  return false;
}

bool mentions_base(const TypingContext& g, BaseKind k) {
  for (auto& [n, v] : g.entries)
    if (mentions_base(v, k)) return true;
  return false;
}

// ---------------------------------------------------------------------------
// Printing and parsing
// ---------------------------------------------------------------------------

std::string print_type(const Type& t) {
  if (is_base(t)) {
    switch (as_base(t).kind) {
      case BaseKind::Star: return "*";
      case BaseKind::StarN: return "*N";
      case BaseKind::StarM: return "*M";
    }
  }
  if (is_product(t)) return print_mset(as_product(t).left) + " x " + print_mset(as_product(t).right);
  return print_mset(as_arrow(t).domain) + " -> " + print_type(as_arrow(t).codomain);
}

std::string print_mset(const MultisetType& a) {
  std::string out = "[";
  for (std::size_t i = 0; i < a.elems.size(); ++i) {
    if (i) out += ", ";
    out += print_type(a.elems[i]);
  }
  return out + "]";
}

namespace {

struct TypeParser {
  const std::string& text;
  std::size_t pos = 0;

  explicit TypeParser(const std::string& t) : text(t) {}

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
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
  bool eat_arrow() {
    skip_ws();
    if (pos + 1 < text.size() && text[pos] == '-' && text[pos + 1] == '>') {
      pos += 2;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!eat(c)) throw FormatError("type syntax: expected '" + std::string(1, c) + "'");
  }

  Type parse_base() {
    expect('*');
    if (pos < text.size() && text[pos] == 'N') {
      ++pos;
      return star_n();
    }
    if (pos < text.size() && text[pos] == 'M') {
      ++pos;
      return star_m();
    }
    return star();
  }

  MultisetType parse_multiset() {
    expect('[');
    std::vector<Type> elems;
    if (!eat(']')) {
      elems.push_back(parse_simple());
      while (eat(',')) elems.push_back(parse_simple());
      expect(']');
    }
    return mset(std::move(elems));
  }

  // A simple type, or the multiset it started with when `bare` is permitted
  // and neither '->' nor 'x' follows.
  std::variant<Type, MultisetType> parse_general() {
    if (peek() == '*') return parse_base();
    MultisetType a = parse_multiset();
    if (eat_arrow()) return arrow(std::move(a), parse_simple());
    if (eat('x')) return product(std::move(a), parse_multiset());
    return a;
  }

  Type parse_simple() {
    auto g = parse_general();
    if (std::holds_alternative<Type>(g)) return std::get<Type>(g);
    throw FormatError("type syntax: bare multiset where a type was expected");
  }

  void expect_end() {
    skip_ws();
    if (pos != text.size()) throw FormatError("type syntax: trailing input");
  }
};

}  // namespace

Type parse_type(const std::string& text) {
  TypeParser p(text);
  Type t = p.parse_simple();
  p.expect_end();
  return t;
}

MultisetType parse_mset(const std::string& text) {
  TypeParser p(text);
  auto g = p.parse_general();
  p.expect_end();
  if (std::holds_alternative<MultisetType>(g)) return std::get<MultisetType>(g);
  throw FormatError("type syntax: expected a multiset");
}

std::variant<Type, MultisetType> parse_assigned(const std::string& text) {
  TypeParser p(text);
  auto g = p.parse_general();
  p.expect_end();
  return g;
}

}  // namespace patcalc
