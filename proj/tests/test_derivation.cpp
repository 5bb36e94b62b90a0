#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "patcalc/derivation.hpp"
#include "patcalc/errors.hpp"

using namespace patcalc;

namespace {

Derivation ax_node(const char* name, Type sigma) {
  Judgment j;
  j.ctx = context_of({{name, singleton(sigma)}});
  j.subject = var(name);
  j.assigned = sigma;
  return mk_node(Rule::Ax, std::move(j), {});
}

Derivation many_node(Term subject, std::vector<Derivation> prems) {
  Judgment j;
  std::vector<Type> tys;
  TypingContext ctx;
  for (auto& p : prems) {
    tys.push_back(p->conclusion.type_assigned());
    ctx = context_meet(ctx, p->conclusion.ctx);
  }
  j.ctx = ctx;
  j.subject = subject;
  j.assigned = mset(tys);
  return mk_node(Rule::Many, std::move(j), std::move(prems));
}

}  // namespace

TEST_CASE("deriv_size counts everything but many") {
  Derivation a = ax_node("x", star());
  CHECK(deriv_size(a) == 1);
  Derivation m0 = many_node(var("y"), {});
  CHECK(deriv_size(m0) == 0);
  Derivation m2 = many_node(var("x"), {a, a});
  CHECK(deriv_size(m2) == 2);
}

TEST_CASE("serialize round trips") {
  Derivation a = ax_node("x", arrow(singleton(star()), star()));
  Derivation m = many_node(var("x"), {a, ax_node("x", star())});
  Derivation back = deserialize(serialize(m));
  CHECK(derivation_equal(m, back));
  CHECK(judgment_equal(m->conclusion, back->conclusion));
}

TEST_CASE("deserialize rejects malformed documents") {
  CHECK_THROWS_AS(deserialize("not json"), FormatError);
  CHECK_THROWS_AS(deserialize("{}"), FormatError);
  CHECK_THROWS_AS(
      deserialize(R"({"rule":"frobnicate","context":[],"subject":"x","assigned":"*"})"),
      FormatError);
  CHECK_THROWS_AS(
      deserialize(R"({"rule":"ax","context":[],"subject":"\\<x,x>. x","assigned":"*"})"),
      FormatError);
  CHECK_THROWS_AS(
      deserialize(R"({"rule":"ax","context":[],"subject":"x","assigned":"*","indices":[1,2]})"),
      FormatError);
}

TEST_CASE("many premise order does not matter for equality") {
  Derivation p1 = ax_node("x", star());
  Derivation p2 = ax_node("x", arrow(MultisetType{}, star()));
  Derivation a = many_node(var("x"), {p1, p2});
  Derivation b = many_node(var("x"), {p2, p1});
  CHECK(derivation_equal(a, b));
  CHECK_FALSE(derivation_equal(a, many_node(var("x"), {p1, p1})));
}

TEST_CASE("rule names round trip") {
  for (Rule r : {Rule::Ax, Rule::Many, Rule::Abs, Rule::App, Rule::Pair, Rule::Match,
                 Rule::PatV, Rule::PatX, Rule::AbsP, Rule::AppP, Rule::PairP, Rule::PatP})
    CHECK(rule_from_name(rule_name(r)) == r);
  CHECK_FALSE(rule_from_name("nope").has_value());
}
