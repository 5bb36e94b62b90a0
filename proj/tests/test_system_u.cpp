#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "patcalc/system_u.hpp"
#include "patcalc/errors.hpp"

using namespace patcalc;

namespace {

Term ii() { return parse("\\z. z"); }
Term kk() { return parse("\\x1. \\y1. x1"); }
Term omega() { return parse("(\\z. z z) (\\z. z z)"); }

Term example1() {
  return app(match(parse("\\<x,y>. x ((\\z. z) y)"), pvar("z"), ii()),
             app(ii(), pair(kk(), var("w"))));
}

Derivation u_ax(const char* name, Type sigma) {
  Judgment j;
  j.ctx = context_of({{name, singleton(sigma)}});
  j.subject = var(name);
  j.assigned = sigma;
  return mk_node(Rule::Ax, std::move(j), {});
}

Derivation u_many(Term subject, std::vector<Derivation> prems) {
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

Derivation u_pair(Term subject, Derivation l, Derivation r) {
  Judgment j;
  j.ctx = context_meet(l->conclusion.ctx, r->conclusion.ctx);
  j.subject = subject;
  j.assigned = product(l->conclusion.mset_assigned(), r->conclusion.mset_assigned());
  return mk_node(Rule::Pair, std::move(j), {l, r});
}

void check_relevance_and_clash_freeness(const Derivation& d) {
  if (!d->conclusion.is_pattern_judgment()) {
    const Term& subj = d->conclusion.term_subject();
    NameSet fv = free_vars(subj);
    for (auto& x : d->conclusion.ctx.domain()) {
      CAPTURE(x);
      CHECK(fv.count(x));
    }
    if (!d->conclusion.assigns_mset()) CHECK(classify(subj) != Classification::HeadClash);
  }
  for (auto& p : d->premises) check_relevance_and_clash_freeness(p);
}

}  // namespace

TEST_CASE("check_u accepts simple valid derivations") {
  CHECK(check_u(u_ax("x", star())).ok);
  // a pair typed [] x [] over two empty manys
  Derivation p = u_pair(parse("<a, b>"), u_many(var("a"), {}), u_many(var("b"), {}));
  CHECK(check_u(p).ok);
  CHECK(check_u(type_canonical_u(parse("\\<x,y>. x"))).ok);
}

TEST_CASE("check_u rejects rule violations") {
  // ax with the wrong context
  {
    Judgment j;
    j.ctx = context_of({{"y", singleton(star())}});
    j.subject = var("x");
    j.assigned = star();
    CHECK_FALSE(check_u(mk_node(Rule::Ax, std::move(j), {})).ok);
  }
  // pair-pattern derivation whose multiset is not the forced singleton
  {
    Derivation good = type_canonical_u(parse("\\<x,y>. x"));
    const Derivation& pat = good->premises[1];  // pat_x node
    Judgment j = pat->conclusion;
    MultisetType dup = multiset_union(j.mset_assigned(), j.mset_assigned());
    j.assigned = dup;
    Derivation tampered_pat = mk_node(pat->rule, std::move(j), pat->premises);
    Judgment root = good->conclusion;
    Derivation tampered = mk_node(good->rule, root, {good->premises[0], tampered_pat});
    auto r = check_u(tampered);
    CHECK_FALSE(r.ok);
    CHECK(r.node_path == "1");
  }
  // exact-system base constants are rejected
  {
    CHECK_FALSE(check_u(u_ax("x", star_n())).ok);
  }
  // exact-system rules are rejected
  {
    Judgment j;
    j.ctx = TypingContext{};
    j.subject = parse("<a, b>");
    j.assigned = star_m();
    CHECK_FALSE(check_u(mk_node(Rule::PairP, std::move(j), {})).ok);
  }
}

TEST_CASE("type_canonical_u picks minimal types") {
  // x applied to a diverging argument: head at [] -> *, argument erased
  Derivation d = type_canonical_u(app(var("x"), omega()));
  CHECK(check_u(d).ok);
  CHECK(type_equal(d->conclusion.type_assigned(), star()));
  CHECK(mset_equal(d->conclusion.ctx.get("x"), singleton(arrow(MultisetType{}, star()))));

  Derivation l = type_canonical_u(parse("\\<x,y>. x"));
  CHECK(check_u(l).ok);
  // pattern typed [[*] x []]
  const auto& arr = as_arrow(l->conclusion.type_assigned());
  REQUIRE(arr.domain.size() == 1);
  const auto& prod = as_product(arr.domain.elems[0]);
  CHECK(mset_equal(prod.left, singleton(star())));
  CHECK(prod.right.empty());

  CHECK(check_u(type_canonical_u(parse("x"))).ok);
  CHECK_THROWS_AS(type_canonical_u(parse("(\\x. x) y")), NotCanonicalError);

  // blocked matchings type their argument at the singleton product
  Derivation m = type_canonical_u(parse("z[<z,w>/x y]"));
  CHECK(check_u(m).ok);
}

TEST_CASE("subst_u obeys the size law") {
  SUBCASE("t = x consumes the single premise") {
    Derivation phi_t = u_ax("x", star());
    Derivation phi_u = u_many(var("w"), {u_ax("w", star())});
    Derivation out = subst_u(phi_t, "x", phi_u);
    CHECK(check_u(out).ok);
    CHECK(deriv_size(out) == 1);  // 1 + 1 - 1
    CHECK(alpha_eq(out->conclusion.term_subject(), parse("w")));
  }
  SUBCASE("t = y with empty multiset is untouched") {
    Derivation phi_t = u_ax("y", star());
    Derivation phi_u = u_many(var("w"), {});
    Derivation out = subst_u(phi_t, "x", phi_u);
    CHECK(deriv_size(out) == 1);
    CHECK(alpha_eq(out->conclusion.term_subject(), parse("y")));
  }
  SUBCASE("two equal-typed occurrences split the premises") {
    Derivation phi_t =
        u_pair(parse("<x, x>"), u_many(var("x"), {u_ax("x", star())}),
               u_many(var("x"), {u_ax("x", star())}));
    REQUIRE(check_u(phi_t).ok);
    Derivation phi_u = u_many(var("w"), {u_ax("w", star()), u_ax("w", star())});
    Derivation out = subst_u(phi_t, "x", phi_u);
    CHECK(check_u(out).ok);
    CHECK(alpha_eq(out->conclusion.term_subject(), parse("<w, w>")));
    // sz(pair)+2 + sz(many premises)=2 - |A|=2
    CHECK(deriv_size(out) == deriv_size(phi_t) + deriv_size(phi_u) - 2);
  }
  SUBCASE("mismatched multiset is rejected") {
    Derivation phi_t = u_ax("x", star());
    Derivation phi_u = u_many(var("w"), {u_ax("w", arrow(MultisetType{}, star()))});
    CHECK_THROWS_AS(subst_u(phi_t, "x", phi_u), ShapeMismatchError);
  }
}

TEST_CASE("antisubst_u inverts subst_u") {
  // phi types t{x:=u} for t = <x, y x>, u = \z. z ... use a canonical shape
  Term t = parse("x (w x)");
  Term u = parse("y");
  Term sub = substitute(t, "x", u);  // y (w y)
  Derivation phi = type_canonical_u(sub);
  auto r = antisubst_u(phi, t, "x", u);
  CHECK(check_u(r.phi_t).ok);
  CHECK(check_u(r.phi_u).ok);
  CHECK(alpha_eq(r.phi_t->conclusion.term_subject(), t));
  CHECK(alpha_eq(r.phi_u->conclusion.term_subject(), u));
  // size law: sz(phi) = sz(phi_t) + sz(phi_u) - |A|
  CHECK(deriv_size(phi) ==
        deriv_size(r.phi_t) + deriv_size(r.phi_u) - static_cast<long long>(r.a.size()));
  // round trip back through subst_u
  Derivation again = subst_u(r.phi_t, "x", r.phi_u);
  CHECK(check_u(again).ok);
  CHECK(judgment_equal(again->conclusion, phi->conclusion));
  CHECK(deriv_size(again) == deriv_size(phi));

  SUBCASE("x absent gives the empty multiset") {
    Derivation phi2 = type_canonical_u(parse("y"));
    auto r2 = antisubst_u(phi2, parse("y"), "x", u);
    CHECK(r2.a.empty());
    CHECK(r2.phi_u->premises.empty());
  }
  SUBCASE("subject mismatch is rejected") {
    Derivation phi3 = type_canonical_u(parse("y"));
    CHECK_THROWS_AS(antisubst_u(phi3, parse("z"), "x", u), ShapeMismatchError);
  }
}

TEST_CASE("subject reduction sizes") {
  SUBCASE("b-step drops the size by exactly one") {
    Term t = parse("(\\x. x w) y");
    Derivation phi = synthesize_u(t, 100);
    REQUIRE(check_u(phi).ok);
    Derivation next = subject_reduce_u(phi, t, StepKind::B);
    CHECK(check_u(next).ok);
    CHECK(deriv_size(next) == deriv_size(phi) - 1);
    CHECK(context_equal(next->conclusion.ctx, phi->conclusion.ctx));
    CHECK(type_equal(next->conclusion.type_assigned(), phi->conclusion.type_assigned()));
  }
  SUBCASE("head replay strictly decreases the size") {
    Term t = example1();
    Derivation phi = synthesize_u(t, 200);
    REQUIRE(check_u(phi).ok);
    Term cur = t;
    Derivation d = phi;
    int steps = 0;
    while (auto s = head_step(cur)) {
      Derivation next = subject_reduce_u(d, cur, s->second);
      CHECK(check_u(next).ok);
      CHECK(deriv_size(next) < deriv_size(d));
      d = next;
      cur = s->first;
      ++steps;
    }
    CHECK(steps == 11);
  }
  SUBCASE("a full step under an empty many keeps the size") {
    Term t = app(var("x"), parse("(\\z. z) y"));  // x ((\z. z) y), canonical
    Derivation phi = type_canonical_u(t);
    REQUIRE(check_u(phi).ok);
    Derivation next = subject_reduce_u_at(phi, Position{{1}});
    CHECK(check_u(next).ok);
    CHECK(deriv_size(next) == deriv_size(phi));
    CHECK(alpha_eq(next->conclusion.term_subject(), parse("x (z[z/y])")));
  }
}

TEST_CASE("expansion round trips with reduction") {
  Term t = parse("(\\<x,y>. x) <w, v>");
  Derivation phi = synthesize_u(t, 100);
  REQUIRE(check_u(phi).ok);
  Term cur = t;
  Derivation d = phi;
  while (auto s = head_step(cur)) {
    Derivation reduced = subject_reduce_u(d, cur, s->second);
    Derivation back = subject_expand_u(reduced, cur);
    CHECK(check_u(back).ok);
    CHECK(judgment_equal(back->conclusion, d->conclusion));
    CHECK(deriv_size(back) > deriv_size(reduced));
    d = reduced;
    cur = s->first;
  }
}

TEST_CASE("synthesize_u bounds the head-step count") {
  Term t = app(ii(), var("x"));
  auto norm = head_normalize(t, 100);
  Derivation phi = synthesize_u(t, 100);
  CHECK(check_u(phi).ok);
  long long k = norm.counters.b + norm.counters.e + norm.counters.m;
  CHECK(k == 2);
  CHECK(deriv_size(phi) >= k);
  check_relevance_and_clash_freeness(phi);

  // canonical inputs come straight from the canonical typer
  Derivation c = synthesize_u(parse("x"), 10);
  CHECK(deriv_size(c) == 1);

  CHECK_THROWS_AS(synthesize_u(omega(), 50), NotHeadNormalizingError);
}

TEST_CASE("transport keeps the judgment on both directions") {
  Term from = parse("(\\x. x) y");
  Term to = parse("x[x/y]");
  Derivation phi = synthesize_u(from, 10);
  Derivation fwd = transport_judgment(phi, from, to, TransportDirection::Forward);
  CHECK(context_equal(fwd->conclusion.ctx, phi->conclusion.ctx));
  CHECK(type_equal(fwd->conclusion.type_assigned(), phi->conclusion.type_assigned()));
  Derivation bwd = transport_judgment(fwd, from, to, TransportDirection::Backward);
  CHECK(judgment_equal(bwd->conclusion, phi->conclusion));

  SUBCASE("across the whole example trace") {
    Term t = example1();
    auto norm = head_normalize(t, 200);
    Derivation d = synthesize_u(t, 200);
    TypingContext ctx0 = d->conclusion.ctx;
    Type ty0 = d->conclusion.type_assigned();
    for (std::size_t i = 0; i < norm.trace.steps.size(); ++i) {
      Term pre = norm.trace.steps[i].first;
      Term nxt = i + 1 < norm.trace.steps.size() ? norm.trace.steps[i + 1].first
                                                 : norm.trace.final;
      d = transport_judgment(d, pre, nxt, TransportDirection::Forward);
      CHECK(context_equal(d->conclusion.ctx, ctx0));
      CHECK(type_equal(d->conclusion.type_assigned(), ty0));
    }
  }

  SUBCASE("unrelated terms are rejected") {
    CHECK_THROWS_AS(transport_judgment(phi, from, parse("q"), TransportDirection::Forward),
                    ShapeMismatchError);
  }
}

TEST_CASE("synthesized derivations satisfy relevance and clash-freeness") {
  for (const char* src : {"(\\x. x) y", "(\\<x,y>. y x) <a, b>", "x (w z)"}) {
    Derivation d = synthesize_u(parse(src), 100);
    REQUIRE(check_u(d).ok);
    check_relevance_and_clash_freeness(d);
  }
}
