#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "patcalc/syntax.hpp"

using namespace patcalc;

TEST_CASE("parse builds the expected shapes") {
  // \<x,y>. x (I y) with I a plain identifier here
  Term t = parse("\\<x,y>. x (I y)");
  REQUIRE(is<Abs>(t));
  const auto& a = as<Abs>(t);
  CHECK(is_ppair(a.pattern));
  REQUIRE(is<App>(a.body));
  CHECK(is<Var>(as<App>(a.body).fun));
  CHECK(is<App>(as<App>(a.body).arg));

  // postfix matching binds tighter than application
  Term u = parse("x [<z,w> / y] v");
  REQUIRE(is<App>(u));
  CHECK(is<Match>(as<App>(u).fun));
  CHECK(is<Var>(as<App>(u).arg));

  Term p = parse("<a, b>");
  CHECK(is<Pair>(p));

  // abstraction body extends maximally right
  Term r = parse("\\x. x y z");
  REQUIRE(is<Abs>(r));
  CHECK(is<App>(as<Abs>(r).body));
}

TEST_CASE("parse rejects non-linear patterns and syntax errors") {
  CHECK_THROWS_AS(parse("\\<x,x>. x"), LinearityError);
  try {
    parse("\\<x,x>. x");
  } catch (const LinearityError& e) {
    CHECK(e.duplicated == "x");
  }
  CHECK_THROWS_AS(parse("(x"), ParseError);
  CHECK_THROWS_AS(parse(""), ParseError);
  CHECK_THROWS_AS(parse("x )"), ParseError);
  CHECK_THROWS_AS(parse("<x>"), ParseError);
}

TEST_CASE("alpha equivalence") {
  CHECK(alpha_eq(parse("\\<x,y>. x z"), parse("\\<x',y'>. x' z")));
  CHECK(alpha_eq(parse("x[<x,y>/z]"), parse("x'[<x',y'>/z]")));
  CHECK_FALSE(alpha_eq(parse("x"), parse("y")));
  CHECK_FALSE(alpha_eq(parse("\\x. x y"), parse("\\x. x z")));
  CHECK_FALSE(alpha_eq(parse("\\x. x"), parse("\\<x,y>. x")));
  // bound names are insensitive to shadowing depth
  CHECK(alpha_eq(parse("\\x. \\x. x"), parse("\\y. \\z. z")));
  CHECK_FALSE(alpha_eq(parse("\\x. \\z. x"), parse("\\y. \\z. z")));
}

TEST_CASE("free variables") {
  CHECK(free_vars(parse("\\z. z")).empty());
  CHECK(free_vars(parse("x[<x,y>/z]")) == NameSet{"z"});
  CHECK(free_vars(parse("\\<x,y>. x w")) == NameSet{"w"});
  CHECK(free_vars(parse("x[y/z]")) == NameSet{"x", "z"});
}

TEST_CASE("fresh_rename avoids the requested names") {
  Term t = parse("\\z. z");
  Term r = fresh_rename(t, {"z"});
  CHECK(alpha_eq(t, r));
  REQUIRE(is<Abs>(r));
  CHECK(pattern_var_set(as<Abs>(r).pattern) == NameSet{"z1"});

  // free variables stay put
  Term x = parse("x");
  CHECK(term_equal(fresh_rename(x, {"x"}), x));

  Term m = parse("t[<x,y>/u]");
  Term rm = fresh_rename(m, {"x"});
  CHECK(alpha_eq(m, rm));
  CHECK_FALSE(pattern_var_set(as<Match>(rm).pattern).count("x"));
}

TEST_CASE("print and reparse round trip") {
  for (const char* src : {
           "x",
           "x y z",
           "\\x. x",
           "\\<x,y>. x (w y)",
           "(\\z. z) x",
           "x [<z,w> / y] v",
           "<a, \\x. x>",
           "x[y/z][w/v]",
           "t[<p1,p2>/<u1,u2>]",
           "f (g h) <a, b>[q/s]",
           "\\x. \\y. x y (\\z. z w)",
       }) {
    Term t = parse(src);
    Term again = parse(print(t));
    CAPTURE(src);
    CAPTURE(print(t));
    CHECK(alpha_eq(t, again));
  }
}

TEST_CASE("positions resolve and replace") {
  Term t = parse("x [p/q] v");
  auto sub = subterm_at(t, Position{{0, 1}});
  REQUIRE(sub.has_value());
  CHECK(term_equal(*sub, parse("q")));
  Term r = replace_at(t, Position{{1}}, parse("w"));
  CHECK(alpha_eq(r, parse("x [p/q] w")));
  CHECK_FALSE(subterm_at(t, Position{{5}}).has_value());
}

TEST_CASE("fresh_name strips numeric suffixes") {
  CHECK(fresh_name("z", {"z"}) == "z1");
  CHECK(fresh_name("z", {"z", "z1"}) == "z2");
  CHECK(fresh_name("z3", {"z3"}) == "z");
  CHECK(fresh_name("z3", {"z", "z1", "z3"}) == "z2");
  CHECK(fresh_name("a", {}) == "a");
}
