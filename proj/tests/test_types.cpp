#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "patcalc/types.hpp"
#include "patcalc/errors.hpp"

using namespace patcalc;

TEST_CASE("multiset union adds counts") {
  MultisetType a = singleton(star());
  MultisetType ab = multiset_union(a, a);
  CHECK(ab.size() == 2);
  CHECK(mset_equal(multiset_union(MultisetType{}, a), a));

  MultisetType mixed = mset({star(), arrow(MultisetType{}, star())});
  MultisetType u = multiset_union(mixed, a);
  CHECK(u.size() == 3);
  CHECK(mset_equal(u, mset({star(), star(), arrow(MultisetType{}, star())})));
}

TEST_CASE("multiset equality is permutation-insensitive") {
  Type arr = arrow(singleton(star()), star());
  CHECK(mset_equal(mset({star(), arr}), mset({arr, star()})));
  CHECK_FALSE(mset_equal(mset({star(), star()}), mset({star()})));
  CHECK_FALSE(mset_equal(mset({star()}), mset({star_n()})));
}

TEST_CASE("context algebra") {
  TypingContext g = context_of({{"x", singleton(star())}, {"y", singleton(star())}});
  TypingContext m = context_meet(g, context_of({{"x", singleton(star())}}));
  CHECK(mset_equal(m.get("x"), mset({star(), star()})));

  // disjoint meet keeps both sides
  TypingContext d = context_meet(context_of({{"x", singleton(star())}}),
                                 context_of({{"y", singleton(star_n())}}));
  CHECK(d.domain() == NameSet{"x", "y"});

  CHECK(context_meet(std::vector<TypingContext>{}).empty());

  TypingContext r = context_restrict(g, parse_pattern("x"));
  CHECK(r.domain() == NameSet{"x"});
  CHECK(context_restrict(TypingContext{}, parse_pattern("<p,q>")).empty());
  TypingContext r2 = context_restrict(context_of({{"x", singleton(star())}, {"z", singleton(star())}}),
                                      parse_pattern("<x,y>"));
  CHECK(r2.domain() == NameSet{"x"});

  TypingContext e = context_erase(g, {"x"});
  CHECK(e.domain() == NameSet{"y"});
  CHECK(context_equal(context_erase(g, {}), g));
  CHECK(context_erase(context_of({{"x", singleton(star())}}), {"x", "y"}).empty());

  // restrict and erase recombine to the original context
  TypingContext back = context_meet(context_restrict(g, parse_pattern("<x,w>")),
                                    context_erase(g, {"x", "w"}));
  CHECK(context_equal(back, g));

  // x:[] entries are not distinguishable from absence
  TypingContext via_empty = context_of({{"x", MultisetType{}}, {"y", singleton(star())}});
  CHECK(context_equal(via_empty, context_of({{"y", singleton(star())}})));
}

TEST_CASE("tightness") {
  CHECK(is_tight(star_n()));
  CHECK(is_tight(star_m()));
  CHECK_FALSE(is_tight(star()));
  CHECK_FALSE(is_tight(arrow(MultisetType{}, star_n())));
  CHECK_FALSE(is_tight(product(MultisetType{}, MultisetType{})));
  CHECK(is_tight(MultisetType{}));
  CHECK(is_tight(mset({star_m(), star_n()})));
  CHECK_FALSE(is_tight(mset({star_m(), star()})));
  CHECK(is_tight(context_of({{"b", singleton(star_n())}})));
  CHECK_FALSE(is_tight(context_of({{"b", singleton(arrow(MultisetType{}, star_n()))}})));
}

TEST_CASE("type syntax round trips") {
  for (const char* src : {"*", "*N", "*M", "[] -> *", "[*, *] -> [*N] -> *M",
                          "[*] x []", "[[*] x [*N]] -> [] x [*M]",
                          "[[] -> *, *]"}) {
    auto t = parse_assigned(src);
    std::string printed = std::holds_alternative<Type>(t) ? print_type(std::get<Type>(t))
                                                          : print_mset(std::get<MultisetType>(t));
    auto again = parse_assigned(printed);
    CHECK(printed == (std::holds_alternative<Type>(again)
                          ? print_type(std::get<Type>(again))
                          : print_mset(std::get<MultisetType>(again))));
  }
  CHECK(print_type(parse_type("[]->[]->*")) == "[] -> [] -> *");
  CHECK(std::holds_alternative<MultisetType>(parse_assigned("[*, *N]")));
  CHECK_THROWS_AS(parse_type("[*]"), FormatError);
  CHECK_THROWS_AS(parse_type("* ->"), FormatError);
  CHECK_THROWS_AS(parse_mset("*"), FormatError);
  CHECK_THROWS_AS(parse_type("[*] x [*] -> *"), FormatError);
}
