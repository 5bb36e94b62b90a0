#include "internal/builders.hpp"

#include "patcalc/errors.hpp"

namespace patcalc::build {

namespace {

[[noreturn]] void bad(const std::string& what) { throw ShapeMismatchError("", what); }

void require(bool cond, const std::string& what) {
  if (!cond) bad(what);
}

bool term_judgment_simple(const Derivation& d) {
  return !d->conclusion.is_pattern_judgment() && !d->conclusion.assigns_mset();
}

void stamp_term(const Ctx& c, Judgment& j, Counters idx) {
  if (c.sys == Sys::E) j.indices = idx;
}

void stamp_pattern(const Ctx& c, Judgment& j, PatIndices idx) {
  if (c.sys == Sys::E) j.pat_indices = idx;
}

Counters term_idx(const Ctx& c, const Derivation& d) {
  if (c.sys == Sys::U) return {};
  require(d->conclusion.indices.has_value(), "term judgment without indices in the exact system");
  return *d->conclusion.indices;
}

PatIndices pat_idx(const Ctx& c, const Derivation& d) {
  if (c.sys == Sys::U) return {};
  require(d->conclusion.pat_indices.has_value(),
          "pattern judgment without indices in the exact system");
  return *d->conclusion.pat_indices;
}

}  // namespace

const Judgment& concl(const Derivation& d) { return d->conclusion; }

Term subject_term(const Derivation& d) {
  require(!d->conclusion.is_pattern_judgment(), "expected a term judgment");
  return d->conclusion.term_subject();
}

Counters counters_of(const Derivation& d) {
  return d->conclusion.indices ? *d->conclusion.indices : Counters{};
}

Derivation ax(const Ctx& c, const Name& x, const Type& sigma) {
  Judgment j;
  j.ctx = context_of({{x, singleton(sigma)}});
  j.subject = var(x);
  j.assigned = sigma;
  stamp_term(c, j, Counters{0, 0, 0, 0});
  return mk_node(Rule::Ax, std::move(j), {});
}

Derivation many(const Ctx& c, const Term& subject, std::vector<Derivation> premises) {
  TypingContext ctx;
  std::vector<Type> elems;
  Counters sum;
  for (auto& p : premises) {
    require(term_judgment_simple(p), "many premise must assign a simple type");
    require(p->rule != Rule::Many, "many premises cannot be many nodes");
    // Premises may disagree on bound names: duplicated subterms evolve
    // independently through the transformers.
    require(alpha_eq(p->conclusion.term_subject(), subject),
            "many premises must type the conclusion subject");
    ctx = context_meet(ctx, p->conclusion.ctx);
    elems.push_back(p->conclusion.type_assigned());
    Counters ci = term_idx(c, p);
    sum.b += ci.b;
    sum.e += ci.e;
    sum.m += ci.m;
    sum.f += ci.f;
  }
  Judgment j;
  j.ctx = std::move(ctx);
  j.subject = subject;
  j.assigned = mset(std::move(elems));
  stamp_term(c, j, sum);
  return mk_node(Rule::Many, std::move(j), std::move(premises));
}

Derivation abs_node(const Ctx& c, const Derivation& body, const Derivation& pat) {
  require(term_judgment_simple(body), "abs body premise must assign a simple type");
  require(is_pattern_rule(pat->rule), "abs pattern premise must be a pattern derivation");
  const Pattern& p = pat->conclusion.pattern_subject();
  const TypingContext& gamma = body->conclusion.ctx;
  require(context_equal(pat->conclusion.ctx, context_restrict(gamma, p)),
          "abs pattern context must be the body context restricted to the pattern");
  Judgment j;
  j.ctx = context_erase(gamma, pattern_var_set(p));
  j.subject = abs(p, body->conclusion.term_subject());
  j.assigned = arrow(pat->conclusion.mset_assigned(), body->conclusion.type_assigned());
  Counters bi = term_idx(c, body);
  PatIndices pi = pat_idx(c, pat);
  stamp_term(c, j, Counters{bi.b + 1, bi.e + pi.e, bi.m + pi.m, bi.f + pi.f});
  return mk_node(Rule::Abs, std::move(j), {body, pat});
}

Derivation abs_p_node(const Ctx& c, const Pattern& p, const Derivation& body) {
  require(c.sys == Sys::E, "abs_p is a rule of the exact system only");
  require(term_judgment_simple(body), "abs_p body premise must assign a simple type");
  require(is_tight(body->conclusion.type_assigned()), "abs_p body must have a tight type");
  const TypingContext& gamma = body->conclusion.ctx;
  require(is_tight(context_restrict(gamma, p)),
          "abs_p needs a tight context restriction at the pattern");
  Judgment j;
  j.ctx = context_erase(gamma, pattern_var_set(p));
  j.subject = abs(p, body->conclusion.term_subject());
  j.assigned = star_m();
  Counters bi = term_idx(c, body);
  stamp_term(c, j, Counters{bi.b, bi.e, bi.m, bi.f + 1});
  return mk_node(Rule::AbsP, std::move(j), {body});
}

Derivation app_node(const Ctx& c, const Derivation& fun, const Derivation& arg_many) {
  require(term_judgment_simple(fun), "app function premise must assign a simple type");
  require(is_arrow(fun->conclusion.type_assigned()), "app function premise must have an arrow type");
  require(arg_many->rule == Rule::Many, "app argument premise must be a many node");
  const auto& arr = as_arrow(fun->conclusion.type_assigned());
  require(mset_equal(arr.domain, arg_many->conclusion.mset_assigned()),
          "app argument multiset must equal the arrow domain");
  Judgment j;
  j.ctx = context_meet(fun->conclusion.ctx, arg_many->conclusion.ctx);
  j.subject = app(fun->conclusion.term_subject(), arg_many->conclusion.term_subject());
  j.assigned = arr.codomain;
  Counters a = term_idx(c, fun), b = term_idx(c, arg_many);
  stamp_term(c, j, Counters{a.b + b.b, a.e + b.e, a.m + b.m, a.f + b.f});
  return mk_node(Rule::App, std::move(j), {fun, arg_many});
}

Derivation app_p_node(const Ctx& c, const Derivation& fun, const Term& arg) {
  require(c.sys == Sys::E, "app_p is a rule of the exact system only");
  require(term_judgment_simple(fun), "app_p premise must assign a simple type");
  require(type_equal(fun->conclusion.type_assigned(), star_n()),
          "app_p premise must have the neutral tight type");
  Judgment j;
  j.ctx = fun->conclusion.ctx;
  j.subject = app(fun->conclusion.term_subject(), arg);
  j.assigned = star_n();
  Counters a = term_idx(c, fun);
  stamp_term(c, j, Counters{a.b, a.e, a.m, a.f + 1});
  return mk_node(Rule::AppP, std::move(j), {fun});
}

Derivation pair_node(const Ctx& c, const Derivation& fst_many, const Derivation& snd_many) {
  require(fst_many->rule == Rule::Many && snd_many->rule == Rule::Many,
          "pair premises must be many nodes");
  Judgment j;
  j.ctx = context_meet(fst_many->conclusion.ctx, snd_many->conclusion.ctx);
  j.subject = pair(fst_many->conclusion.term_subject(), snd_many->conclusion.term_subject());
  j.assigned = product(fst_many->conclusion.mset_assigned(), snd_many->conclusion.mset_assigned());
  Counters a = term_idx(c, fst_many), b = term_idx(c, snd_many);
  long long second = c.pair_reading == PairReading::Sum ? a.e + b.e : a.e + b.b;
  stamp_term(c, j, Counters{a.b + b.b, second, a.m + b.m, a.f + b.f});
  return mk_node(Rule::Pair, std::move(j), {fst_many, snd_many});
}

Derivation pair_p_node(const Ctx& c, const Term& subject) {
  require(c.sys == Sys::E, "pair_p is a rule of the exact system only");
  require(is<Pair>(subject), "pair_p subject must be a pair");
  Judgment j;
  j.ctx = TypingContext{};
  j.subject = subject;
  j.assigned = star_m();
  stamp_term(c, j, Counters{0, 0, 0, 1});
  return mk_node(Rule::PairP, std::move(j), {});
}

Derivation match_node(const Ctx& c, const Derivation& body, const Derivation& pat,
                      const Derivation& arg_many) {
  require(term_judgment_simple(body), "match body premise must assign a simple type");
  require(is_pattern_rule(pat->rule), "match pattern premise must be a pattern derivation");
  require(arg_many->rule == Rule::Many, "match argument premise must be a many node");
  const Pattern& p = pat->conclusion.pattern_subject();
  const TypingContext& gamma = body->conclusion.ctx;
  require(context_equal(pat->conclusion.ctx, context_restrict(gamma, p)),
          "match pattern context must be the body context restricted to the pattern");
  require(mset_equal(pat->conclusion.mset_assigned(), arg_many->conclusion.mset_assigned()),
          "match argument multiset must equal the pattern multiset");
  Judgment j;
  j.ctx = context_meet(context_erase(gamma, pattern_var_set(p)), arg_many->conclusion.ctx);
  j.subject = match(body->conclusion.term_subject(), p, arg_many->conclusion.term_subject());
  j.assigned = body->conclusion.type_assigned();
  Counters t = term_idx(c, body), u = term_idx(c, arg_many);
  PatIndices pi = pat_idx(c, pat);
  stamp_term(c, j, Counters{t.b + u.b, t.e + u.e + pi.e, t.m + u.m + pi.m, t.f + u.f + pi.f});
  return mk_node(Rule::Match, std::move(j), {body, pat, arg_many});
}

Derivation pat_v_node(const Ctx& c, const Name& x, const MultisetType& a) {
  Judgment j;
  j.ctx = context_of({{x, a}});
  j.subject = pvar(x);
  j.assigned = a;
  stamp_pattern(c, j, PatIndices{1, 0, 0});
  return mk_node(Rule::PatV, std::move(j), {});
}

Derivation pat_x_node(const Ctx& c, const Derivation& left, const Derivation& right) {
  require(is_pattern_rule(left->rule) && is_pattern_rule(right->rule),
          "pat_x premises must be pattern derivations");
  const Pattern& p = left->conclusion.pattern_subject();
  const Pattern& q = right->conclusion.pattern_subject();
  auto pv = pattern_var_set(p);
  for (auto& v : pattern_var_set(q))
    require(!pv.count(v), "pat_x components must bind disjoint variables");
  Judgment j;
  j.ctx = context_meet(left->conclusion.ctx, right->conclusion.ctx);
  j.subject = ppair(p, q);
  j.assigned = singleton(product(left->conclusion.mset_assigned(), right->conclusion.mset_assigned()));
  PatIndices a = pat_idx(c, left), b = pat_idx(c, right);
  stamp_pattern(c, j, PatIndices{a.e + b.e, 1 + a.m + b.m, a.f + b.f});
  return mk_node(Rule::PatX, std::move(j), {left, right});
}

Derivation pat_p_node(const Ctx& c, const Pattern& p, const TypingContext& restricted) {
  require(c.sys == Sys::E, "pat_p is a rule of the exact system only");
  require(is_ppair(p), "pat_p types pair patterns only");
  auto vars = pattern_var_set(p);
  for (auto& x : restricted.domain())
    require(vars.count(x), "pat_p context may mention pattern variables only");
  require(is_tight(restricted), "pat_p requires a tight context");
  Judgment j;
  j.ctx = restricted;
  j.subject = p;
  j.assigned = singleton(star_n());
  stamp_pattern(c, j, PatIndices{0, 0, 1});
  return mk_node(Rule::PatP, std::move(j), {});
}

Derivation synth_pattern(const Ctx& c, const Pattern& p, const TypingContext& restricted) {
  if (is_pvar(p)) return pat_v_node(c, as_pvar(p).name, restricted.get(as_pvar(p).name));
  const auto& pp = as_ppair(p);
  return pat_x_node(c, synth_pattern(c, pp.left, context_restrict(restricted, pp.left)),
                    synth_pattern(c, pp.right, context_restrict(restricted, pp.right)));
}

// ---------------------------------------------------------------------------
// Renaming inside derivations
// ---------------------------------------------------------------------------

namespace {

TypingContext ctx_rename_key(const TypingContext& g, const Name& from, const Name& to) {
  auto it = g.entries.find(from);
  if (it == g.entries.end()) return g;
  TypingContext out = g;
  MultisetType ms = it->second;
  out.entries.erase(from);
  out.entries.emplace(to, std::move(ms));
  return out;
}

Judgment judgment_rename_free(const Judgment& j, const Name& from, const Name& to) {
  Judgment out = j;
  out.ctx = ctx_rename_key(j.ctx, from, to);
  if (j.is_pattern_judgment())
    out.subject = pattern_rename(j.pattern_subject(), from, to);
  else
    out.subject = rename_free(j.term_subject(), from, to);
  return out;
}

// True when the node's conclusion subject binds `v` over its body premises.
bool node_binds(const Derivation& d, const Name& v) {
  if (d->rule == Rule::Abs || d->rule == Rule::AbsP) {
    const Term& s = d->conclusion.term_subject();
    return pattern_var_set(as<Abs>(s).pattern).count(v) != 0;
  }
  if (d->rule == Rule::Match) {
    const Term& s = d->conclusion.term_subject();
    return pattern_var_set(as<Match>(s).pattern).count(v) != 0;
  }
  return false;
}

}  // namespace

Derivation deriv_rename_free(const Derivation& d, const Name& from, const Name& to) {
  Judgment j = judgment_rename_free(d->conclusion, from, to);
  std::vector<Derivation> premises;
  premises.reserve(d->premises.size());
  if (node_binds(d, from)) {
    // `from` is rebound below: only a match argument still sees it free.
    for (std::size_t i = 0; i < d->premises.size(); ++i) {
      bool is_match_arg = d->rule == Rule::Match && i == 2;
      premises.push_back(is_match_arg ? deriv_rename_free(d->premises[i], from, to)
                                      : d->premises[i]);
    }
  } else {
    for (auto& p : d->premises) premises.push_back(deriv_rename_free(p, from, to));
  }
  return mk_node(d->rule, std::move(j), std::move(premises));
}

namespace {

// Renames pattern-side occurrences (subject and context keys) throughout a
// pattern derivation.
Derivation pattern_deriv_rename(const Derivation& d, const Name& from, const Name& to) {
  Judgment j = d->conclusion;
  j.subject = pattern_rename(d->conclusion.pattern_subject(), from, to);
  j.ctx = ctx_rename_key(d->conclusion.ctx, from, to);
  std::vector<Derivation> premises;
  for (auto& p : d->premises) premises.push_back(pattern_deriv_rename(p, from, to));
  return mk_node(d->rule, std::move(j), std::move(premises));
}

}  // namespace

Derivation rename_node_binder(const Ctx& c, const Derivation& node, const Name& v, const Name& v2) {
  switch (node->rule) {
    case Rule::Abs: {
      Derivation body = deriv_rename_free(node->premises[0], v, v2);
      Derivation pat = pattern_deriv_rename(node->premises[1], v, v2);
      return abs_node(c, body, pat);
    }
    case Rule::AbsP: {
      const Term& s = node->conclusion.term_subject();
      Pattern p = pattern_rename(as<Abs>(s).pattern, v, v2);
      return abs_p_node(c, p, deriv_rename_free(node->premises[0], v, v2));
    }
    case Rule::Match: {
      Derivation body = deriv_rename_free(node->premises[0], v, v2);
      Derivation pat = pattern_deriv_rename(node->premises[1], v, v2);
      return match_node(c, body, pat, node->premises[2]);
    }
    default:
      bad("rename_node_binder: node does not bind a pattern");
  }
}

// ---------------------------------------------------------------------------
// Generic checker
// ---------------------------------------------------------------------------

namespace {

bool conclusion_matches(const Judgment& built, const Judgment& stored) {
  if (!context_equal(built.ctx, stored.ctx)) return false;
  if (built.is_pattern_judgment() != stored.is_pattern_judgment()) return false;
  if (built.is_pattern_judgment()) {
    if (!pattern_equal(built.pattern_subject(), stored.pattern_subject())) return false;
  } else {
    if (!term_equal(built.term_subject(), stored.term_subject())) return false;
  }
  if (built.assigns_mset() != stored.assigns_mset()) return false;
  if (built.assigns_mset()) {
    if (!mset_equal(built.mset_assigned(), stored.mset_assigned())) return false;
  } else {
    if (!type_equal(built.type_assigned(), stored.type_assigned())) return false;
  }
  return built.indices == stored.indices && built.pat_indices == stored.pat_indices;
}

bool judgment_mentions_base(const Judgment& j, BaseKind k) {
  if (mentions_base(j.ctx, k)) return true;
  if (j.assigns_mset()) return mentions_base(j.mset_assigned(), k);
  return mentions_base(j.type_assigned(), k);
}

// Rebuilds the node from its premises; parts not determined by premises
// (pattern of abs_p, argument of app_p, subjects of leaves) are taken from
// the stored conclusion.
Derivation rebuild(const Ctx& c, const Derivation& d) {
  const Judgment& j = d->conclusion;
  auto arity = [&](std::size_t n) {
    require(d->premises.size() == n, "wrong premise count for rule");
  };
  switch (d->rule) {
    case Rule::Ax: {
      arity(0);
      require(!j.is_pattern_judgment() && !j.assigns_mset(), "ax concludes a simple term judgment");
      require(is<Var>(j.term_subject()), "ax subject must be a variable");
      return ax(c, as<Var>(j.term_subject()).name, j.type_assigned());
    }
    case Rule::Many: {
      require(!j.is_pattern_judgment(), "many concludes a term judgment");
      return many(c, j.term_subject(), d->premises);
    }
    case Rule::Abs: {
      arity(2);
      return abs_node(c, d->premises[0], d->premises[1]);
    }
    case Rule::AbsP: {
      arity(1);
      require(!j.is_pattern_judgment() && is<Abs>(j.term_subject()),
              "abs_p subject must be an abstraction");
      return abs_p_node(c, as<Abs>(j.term_subject()).pattern, d->premises[0]);
    }
    case Rule::App: {
      arity(2);
      return app_node(c, d->premises[0], d->premises[1]);
    }
    case Rule::AppP: {
      arity(1);
      require(!j.is_pattern_judgment() && is<App>(j.term_subject()),
              "app_p subject must be an application");
      return app_p_node(c, d->premises[0], as<App>(j.term_subject()).arg);
    }
    case Rule::Pair: {
      arity(2);
      return pair_node(c, d->premises[0], d->premises[1]);
    }
    case Rule::PairP: {
      arity(0);
      require(!j.is_pattern_judgment(), "pair_p concludes a term judgment");
      return pair_p_node(c, j.term_subject());
    }
    case Rule::Match: {
      arity(3);
      return match_node(c, d->premises[0], d->premises[1], d->premises[2]);
    }
    case Rule::PatV: {
      arity(0);
      require(j.is_pattern_judgment() && is_pvar(j.pattern_subject()),
              "pat_v subject must be a pattern variable");
      require(j.assigns_mset(), "pat_v assigns a multiset");
      return pat_v_node(c, as_pvar(j.pattern_subject()).name, j.mset_assigned());
    }
    case Rule::PatX: {
      arity(2);
      return pat_x_node(c, d->premises[0], d->premises[1]);
    }
    case Rule::PatP: {
      arity(0);
      require(j.is_pattern_judgment(), "pat_p concludes a pattern judgment");
      return pat_p_node(c, j.pattern_subject(), j.ctx);
    }
  }
  bad("unknown rule");
}

CheckResult check_node(const Ctx& c, const Derivation& d, const std::string& path) {
  for (std::size_t i = 0; i < d->premises.size(); ++i) {
    std::string sub = path.empty() ? std::to_string(i) : path + "." + std::to_string(i);
    CheckResult r = check_node(c, d->premises[i], sub);
    if (!r.ok) return r;
  }
  const Judgment& j = d->conclusion;
  if (c.sys == Sys::U) {
    if (j.indices || j.pat_indices)
      return check_fail(path, "indices are not part of the upper system");
    if (judgment_mentions_base(j, BaseKind::StarN) || judgment_mentions_base(j, BaseKind::StarM))
      return check_fail(path, "tight base constants are not part of the upper system");
  } else {
    if (judgment_mentions_base(j, BaseKind::Star))
      return check_fail(path, "the plain base constant is not part of the exact system");
    if (j.is_pattern_judgment() ? !j.pat_indices.has_value() : !j.indices.has_value())
      return check_fail(path, "missing indices");
  }
  try {
    Derivation built = rebuild(c, d);
    if (!conclusion_matches(built->conclusion, j))
      return check_fail(path, "conclusion does not follow from the premises by rule " +
                                  std::string(rule_name(d->rule)));
  } catch (const ShapeMismatchError& e) {
    return check_fail(path, e.what());
  }
  return check_ok();
}

}  // namespace

CheckResult check_system(const Derivation& d, const Ctx& c) { return check_node(c, d, ""); }

}  // namespace patcalc::build
