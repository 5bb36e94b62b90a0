#include "internal/transform.hpp"

#include <algorithm>
#include <functional>

#include "patcalc/errors.hpp"

namespace patcalc::build {

namespace {

[[noreturn]] void bad(const std::string& what) { throw ShapeMismatchError("", what); }

void require(bool cond, const std::string& what) {
  if (!cond) bad(what);
}

Derivation pattern_premise(const Derivation& d) { return d->premises[1]; }

// Renames pattern-side occurrences throughout a pattern derivation.
Derivation pat_deriv_rename(const Derivation& d, const Name& from, const Name& to) {
  Judgment j = d->conclusion;
  j.subject = pattern_rename(d->conclusion.pattern_subject(), from, to);
  auto it = j.ctx.entries.find(from);
  if (it != j.ctx.entries.end()) {
    MultisetType ms = it->second;
    j.ctx.entries.erase(from);
    j.ctx.entries.emplace(to, std::move(ms));
  }
  std::vector<Derivation> prems;
  for (auto& p : d->premises) prems.push_back(pat_deriv_rename(p, from, to));
  return mk_node(d->rule, std::move(j), std::move(prems));
}

// ---------------------------------------------------------------------------
// Substitution
// ---------------------------------------------------------------------------

struct Pool {
  Term u_subject;
  std::vector<Derivation> premises;
  std::vector<bool> used;

  Derivation take(const Type& sigma) {
    for (std::size_t i = 0; i < premises.size(); ++i) {
      if (!used[i] && !premises[i]->conclusion.assigns_mset() &&
          type_equal(premises[i]->conclusion.type_assigned(), sigma)) {
        used[i] = true;
        return premises[i];
      }
    }
    bad("substitution: no unconsumed premise types u at the required type");
  }
  bool all_used() const {
    for (bool u : used)
      if (!u) return false;
    return true;
  }
};

Derivation subst_go(const Ctx& c, const Derivation& d, const Name& x, Pool& pool) {
  const Judgment& j = d->conclusion;
  require(!j.is_pattern_judgment(), "substitution reached a pattern judgment");
  const Term& subj = j.term_subject();
  if (!free_vars(subj).count(x)) return d;

  switch (d->rule) {
    case Rule::Ax:
      // The subject is the substituted variable itself.
      return pool.take(j.type_assigned());
    case Rule::Many: {
      if (d->premises.empty()) return many(c, substitute(subj, x, pool.u_subject), {});
      std::vector<Derivation> prems;
      for (auto& p : d->premises) prems.push_back(subst_go(c, p, x, pool));
      Term new_subj = prems[0]->conclusion.term_subject();
      return many(c, new_subj, std::move(prems));
    }
    case Rule::Abs: {
      // x is free below, so it cannot be among the pattern variables.
      NameSet fvu = free_vars(pool.u_subject);
      NameSet base = fvu;
      base.insert(x);
      const auto& a = as<Abs>(subj);
      Derivation node = d;
      for (auto& [v, v2] : binder_renames(a.pattern, all_names(a.body), fvu, base))
        node = rename_node_binder(c, node, v, v2);
      return abs_node(c, subst_go(c, node->premises[0], x, pool), node->premises[1]);
    }
    case Rule::AbsP: {
      NameSet fvu = free_vars(pool.u_subject);
      NameSet base = fvu;
      base.insert(x);
      const auto& a = as<Abs>(subj);
      Derivation node = d;
      for (auto& [v, v2] : binder_renames(a.pattern, all_names(a.body), fvu, base))
        node = rename_node_binder(c, node, v, v2);
      Pattern p = as<Abs>(node->conclusion.term_subject()).pattern;
      return abs_p_node(c, p, subst_go(c, node->premises[0], x, pool));
    }
    case Rule::App:
      return app_node(c, subst_go(c, d->premises[0], x, pool),
                      subst_go(c, d->premises[1], x, pool));
    case Rule::AppP:
      return app_p_node(c, subst_go(c, d->premises[0], x, pool),
                        substitute(as<App>(subj).arg, x, pool.u_subject));
    case Rule::Pair:
      return pair_node(c, subst_go(c, d->premises[0], x, pool),
                       subst_go(c, d->premises[1], x, pool));
    case Rule::PairP:
      return pair_p_node(c, substitute(subj, x, pool.u_subject));
    case Rule::Match: {
      const auto& m = as<Match>(subj);
      if (pattern_var_set(m.pattern).count(x))
        return match_node(c, d->premises[0], d->premises[1],
                          subst_go(c, d->premises[2], x, pool));
      NameSet fvu = free_vars(pool.u_subject);
      NameSet base = fvu;
      base.insert(x);
      Derivation node = d;
      for (auto& [v, v2] : binder_renames(m.pattern, all_names(m.body), fvu, base))
        node = rename_node_binder(c, node, v, v2);
      Derivation body = subst_go(c, node->premises[0], x, pool);
      return match_node(c, body, node->premises[1], subst_go(c, node->premises[2], x, pool));
    }
    default:
      bad("substitution hit an unexpected rule");
  }
}

}  // namespace

Derivation subst_deriv(const Ctx& c, const Derivation& phi_t, const Name& x,
                       const Derivation& phi_u) {
  require(phi_u->rule == Rule::Many, "substitution argument must be a many node");
  MultisetType declared = phi_t->conclusion.ctx.get(x);
  require(mset_equal(declared, phi_u->conclusion.mset_assigned()),
          "x's declared multiset differs from the substitution derivation's type");
  Pool pool{subject_term(phi_u), phi_u->premises,
            std::vector<bool>(phi_u->premises.size(), false)};
  Derivation out = subst_go(c, phi_t, x, pool);
  require(pool.all_used(), "substitution left unconsumed premises");
  return out;
}

// ---------------------------------------------------------------------------
// Anti-substitution
// ---------------------------------------------------------------------------

namespace {

// Maps t-side binder names to the subject-side names the substitution chose,
// innermost entries last.
struct REnv {
  std::vector<std::pair<Name, Name>> entries;

  std::optional<Name> lookup(const Name& n) const {
    for (auto it = entries.rbegin(); it != entries.rend(); ++it)
      if (it->first == n) return it->second;
    return std::nullopt;
  }
  std::size_t push_pattern(const Pattern& mine, const Pattern& subject) {
    auto a = pattern_vars(mine);
    auto b = pattern_vars(subject);
    require(a.size() == b.size(), "anti-substitution: pattern shapes differ");
    for (std::size_t i = 0; i < a.size(); ++i) entries.emplace_back(a[i], b[i]);
    return a.size();
  }
  void pop(std::size_t n) { entries.resize(entries.size() - n); }
};

// Transplants a piece of the source term into the derivation's naming: its
// binders are first moved off every environment name, then free occurrences
// are mapped simultaneously (innermost entry wins), so no chain or capture
// can occur.
Term graft_env(const Term& piece, const REnv& env) {
  bool identity = true;
  for (auto& [from, to] : env.entries)
    if (from != to) identity = false;
  if (identity) return piece;
  NameSet avoid;
  std::map<Name, Name> map;
  for (auto& [from, to] : env.entries) {
    avoid.insert(from);
    avoid.insert(to);
    map[from] = to;  // later (inner) entries overwrite earlier ones
  }
  Term clean = fresh_rename(piece, avoid);
  std::function<Term(const Term&)> walk = [&](const Term& t) -> Term {
    if (is<Var>(t)) {
      auto it = map.find(as<Var>(t).name);
      return it == map.end() ? t : var(it->second);
    }
    if (is<Abs>(t)) return abs(as<Abs>(t).pattern, walk(as<Abs>(t).body));
    if (is<Pair>(t)) return pair(walk(as<Pair>(t).fst), walk(as<Pair>(t).snd));
    if (is<App>(t)) return app(walk(as<App>(t).fun), walk(as<App>(t).arg));
    const auto& m = as<Match>(t);
    return match(walk(m.body), m.pattern, walk(m.arg));
  };
  return walk(clean);
}

AntiResult anti_go(const Ctx& c, const Derivation& phi, const Term& t, const Name& x,
                   const Term& u, REnv& env) {
  if (phi->rule == Rule::Many) {
    std::vector<Derivation> ts;
    std::vector<Derivation> us;
    for (auto& p : phi->premises) {
      AntiResult r = anti_go(c, p, t, x, u, env);
      ts.push_back(r.phi_t);
      us.insert(us.end(), r.u_premises.begin(), r.u_premises.end());
    }
    Term subj = ts.empty() ? graft_env(t, env) : ts[0]->conclusion.term_subject();
    return {many(c, subj, std::move(ts)), std::move(us)};
  }

  if (is<Var>(t)) {
    const Name& y = as<Var>(t).name;
    if (env.lookup(y)) return {phi, {}};  // bound occurrence, untouched
    if (y == x) {
      require(!phi->conclusion.is_pattern_judgment() && !phi->conclusion.assigns_mset(),
              "anti-substitution: occurrence of x is not simple-typed");
      return {ax(c, x, phi->conclusion.type_assigned()), {phi}};
    }
    require(phi->rule == Rule::Ax, "anti-substitution: variable subject typed by a non-axiom");
    return {phi, {}};
  }

  const Term& subj = subject_term(phi);
  if (is<Abs>(t)) {
    require(phi->rule == Rule::Abs || phi->rule == Rule::AbsP,
            "anti-substitution: abstraction typed by a non-abstraction rule");
    const auto& mine = as<Abs>(t);
    const auto& theirs = as<Abs>(subj);
    std::size_t n = env.push_pattern(mine.pattern, theirs.pattern);
    AntiResult body = anti_go(c, phi->premises[0], mine.body, x, u, env);
    env.pop(n);
    if (phi->rule == Rule::Abs)
      return {abs_node(c, body.phi_t, pattern_premise(phi)), std::move(body.u_premises)};
    return {abs_p_node(c, theirs.pattern, body.phi_t), std::move(body.u_premises)};
  }
  if (is<App>(t)) {
    const auto& mine = as<App>(t);
    if (phi->rule == Rule::App) {
      AntiResult fun = anti_go(c, phi->premises[0], mine.fun, x, u, env);
      AntiResult arg = anti_go(c, phi->premises[1], mine.arg, x, u, env);
      std::vector<Derivation> us = std::move(fun.u_premises);
      us.insert(us.end(), arg.u_premises.begin(), arg.u_premises.end());
      return {app_node(c, fun.phi_t, arg.phi_t), std::move(us)};
    }
    require(phi->rule == Rule::AppP, "anti-substitution: application typed by a non-application rule");
    AntiResult fun = anti_go(c, phi->premises[0], mine.fun, x, u, env);
    return {app_p_node(c, fun.phi_t, graft_env(mine.arg, env)), std::move(fun.u_premises)};
  }
  if (is<Pair>(t)) {
    if (phi->rule == Rule::Pair) {
      AntiResult fst = anti_go(c, phi->premises[0], as<Pair>(t).fst, x, u, env);
      AntiResult snd = anti_go(c, phi->premises[1], as<Pair>(t).snd, x, u, env);
      std::vector<Derivation> us = std::move(fst.u_premises);
      us.insert(us.end(), snd.u_premises.begin(), snd.u_premises.end());
      return {pair_node(c, fst.phi_t, snd.phi_t), std::move(us)};
    }
    require(phi->rule == Rule::PairP, "anti-substitution: pair typed by a non-pair rule");
    return {pair_p_node(c, graft_env(t, env)), {}};
  }
  require(is<Match>(t) && phi->rule == Rule::Match,
          "anti-substitution: term and derivation shapes differ");
  const auto& mine = as<Match>(t);
  const auto& theirs = as<Match>(subj);
  AntiResult arg = anti_go(c, phi->premises[2], mine.arg, x, u, env);
  std::size_t n = env.push_pattern(mine.pattern, theirs.pattern);
  AntiResult body = anti_go(c, phi->premises[0], mine.body, x, u, env);
  env.pop(n);
  std::vector<Derivation> us = std::move(body.u_premises);
  us.insert(us.end(), arg.u_premises.begin(), arg.u_premises.end());
  return {match_node(c, body.phi_t, pattern_premise(phi), arg.phi_t), std::move(us)};
}

}  // namespace

AntiResult antisubst_deriv_in(const Ctx& c, const Derivation& phi, const Term& t, const Name& x,
                              const Term& u, REnv& env) {
  require(!phi->conclusion.is_pattern_judgment(), "anti-substitution needs a term derivation");
  require(alpha_eq(phi->conclusion.term_subject(), graft_env(substitute(t, x, u), env)),
          "derivation subject is not the substituted term: have '" +
              print(phi->conclusion.term_subject()) + "', want '" + print(substitute(t, x, u)) +
              "'");
  return anti_go(c, phi, t, x, u, env);
}

AntiResult antisubst_deriv(const Ctx& c, const Derivation& phi, const Term& t, const Name& x,
                           const Term& u) {
  REnv env;
  return antisubst_deriv_in(c, phi, t, x, u, env);
}

// ---------------------------------------------------------------------------
// Redex paths
// ---------------------------------------------------------------------------

std::optional<std::pair<std::vector<int>, StepKind>> head_redex_path(const Term& t) {
  if (is<Abs>(t)) {
    auto r = head_redex_path(as<Abs>(t).body);
    if (r) r->first.insert(r->first.begin(), 0);
    return r;
  }
  if (is<App>(t)) {
    if (is_abs_core(as<App>(t).fun)) return std::make_pair(std::vector<int>{}, StepKind::B);
    auto r = head_redex_path(as<App>(t).fun);
    if (r) r->first.insert(r->first.begin(), 0);
    return r;
  }
  if (is<Match>(t)) {
    const auto& m = as<Match>(t);
    if (auto r = head_redex_path(m.body)) {
      r->first.insert(r->first.begin(), 0);
      return r;
    }
    if (is_pvar(m.pattern)) return std::make_pair(std::vector<int>{}, StepKind::E);
    if (is_pair_core(m.arg)) return std::make_pair(std::vector<int>{}, StepKind::M);
    if (auto r = head_redex_path(m.arg)) {
      r->first.insert(r->first.begin(), 1);
      return r;
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Subject reduction
// ---------------------------------------------------------------------------

namespace {

// Freshens every matching-stack binder of d's subject against `clashes`,
// inner layers first, keeping derivation and subject in lockstep.
Derivation freshen_stack_deriv(const Ctx& c, const Derivation& d, const NameSet& clashes) {
  if (d->rule != Rule::Match) return d;
  Derivation body = freshen_stack_deriv(c, d->premises[0], clashes);
  Derivation node = body == d->premises[0]
                        ? d
                        : match_node(c, body, d->premises[1], d->premises[2]);
  const auto& m = as<Match>(node->conclusion.term_subject());
  for (auto& [v, v2] : binder_renames(m.pattern, all_names(m.body), clashes, clashes))
    node = rename_node_binder(c, node, v, v2);
  return node;
}

// Rule b: pushes the application's argument derivation through the matching
// stack onto the abstraction.
Derivation push_b(const Ctx& c, const Derivation& fun, const Derivation& arg_many) {
  if (fun->rule == Rule::Abs)
    return match_node(c, fun->premises[0], fun->premises[1], arg_many);
  require(fun->rule == Rule::Match, "application head is not an abstraction under matchings");
  Derivation inner = push_b(c, fun->premises[0], arg_many);
  return match_node(c, inner, fun->premises[1], fun->premises[2]);
}

std::pair<Derivation, StepKind> reduce_root(const Ctx& c, const Derivation& d) {
  const Term& subj = subject_term(d);
  if (is<App>(subj) && is_abs_core(as<App>(subj).fun)) {
    require(d->rule == Rule::App, "b-redex must be typed by the consuming application rule");
    Derivation fun = freshen_stack_deriv(c, d->premises[0],
                                         free_vars(subject_term(d->premises[1])));
    return {push_b(c, fun, d->premises[1]), StepKind::B};
  }
  require(is<Match>(subj) && d->rule == Rule::Match, "no base redex at this position");
  const auto& m = as<Match>(subj);
  if (is_pvar(m.pattern))
    return {subst_deriv(c, d->premises[0], as_pvar(m.pattern).name, d->premises[2]),
            StepKind::E};
  require(is_pair_core(m.arg), "no base redex at this position");
  require(d->premises[1]->rule == Rule::PatX,
          "pair-pattern matching against a pair must use the product pattern rule");
  require(d->premises[2]->premises.size() == 1,
          "pair-pattern matching argument must be a singleton many");
  Derivation body = d->premises[0];
  Derivation pat1 = d->premises[1]->premises[0];
  Derivation pat2 = d->premises[1]->premises[1];
  Derivation chain = freshen_stack_deriv(c, d->premises[2]->premises[0],
                                         free_vars(subject_term(body)));
  std::vector<Derivation> layers;  // outermost first
  Derivation core = chain;
  while (core->rule == Rule::Match) {
    layers.push_back(core);
    core = core->premises[0];
  }
  require(core->rule == Rule::Pair, "matching argument core is not a consumed pair");
  Derivation u1m = core->premises[0];
  Derivation u2m = core->premises[1];
  // The right component's binders must not capture through u1.
  NameSet fvu1 = free_vars(subject_term(u1m));
  NameSet base = fvu1;
  for (auto& v : pattern_vars(pat1->conclusion.pattern_subject())) base.insert(v);
  for (auto& [v, v2] : binder_renames(pat2->conclusion.pattern_subject(),
                                      all_names(subject_term(body)), fvu1, base)) {
    body = deriv_rename_free(body, v, v2);
    pat2 = pat_deriv_rename(pat2, v, v2);
  }
  Derivation out = match_node(c, match_node(c, body, pat1, u1m), pat2, u2m);
  for (auto it = layers.rbegin(); it != layers.rend(); ++it)
    out = match_node(c, out, (*it)->premises[1], (*it)->premises[2]);
  return {out, StepKind::M};
}

// Rewrites an untyped region (no premises to carry) by firing the base rule
// in the subject alone.
std::pair<Term, StepKind> rewrite_subject(const Term& subj, const std::vector<int>& path,
                                          std::size_t at) {
  Position pos{std::vector<int>(path.begin() + at, path.end())};
  auto sub = subterm_at(subj, pos);
  require(sub.has_value(), "redex position does not resolve in the subject");
  auto fired = root_full_step(*sub);
  require(fired.has_value(), "no base redex at this position");
  return {replace_at(subj, pos, fired->first), fired->second};
}

std::pair<Derivation, StepKind> reduce_at_impl(const Ctx& c, const Derivation& d,
                                               const std::vector<int>& path, std::size_t at);

// Transforms each premise of a many node at the given relative position; with
// no premises only the subject changes.
std::pair<Derivation, StepKind> reduce_into_many(const Ctx& c, const Derivation& many_node,
                                                 const std::vector<int>& path, std::size_t at) {
  require(many_node->rule == Rule::Many, "expected a many node");
  if (many_node->premises.empty()) {
    auto [subj, kind] = rewrite_subject(subject_term(many_node), path, at);
    return {many(c, subj, {}), kind};
  }
  std::vector<Derivation> prems;
  StepKind kind = StepKind::B;
  for (auto& p : many_node->premises) {
    auto [p2, k] = reduce_at_impl(c, p, path, at);
    prems.push_back(p2);
    kind = k;
  }
  Term subj = prems[0]->conclusion.term_subject();
  return {many(c, subj, std::move(prems)), kind};
}

std::pair<Derivation, StepKind> reduce_at_impl(const Ctx& c, const Derivation& d,
                                               const std::vector<int>& path, std::size_t at) {
  if (at == path.size()) return reduce_root(c, d);
  int i = path[at];
  switch (d->rule) {
    case Rule::Many:
      return reduce_into_many(c, d, path, at);
    case Rule::Abs: {
      require(i == 0, "redex path leaves the abstraction body");
      auto [b, k] = reduce_at_impl(c, d->premises[0], path, at + 1);
      return {abs_node(c, b, d->premises[1]), k};
    }
    case Rule::AbsP: {
      require(i == 0, "redex path leaves the abstraction body");
      Pattern p = as<Abs>(subject_term(d)).pattern;
      auto [b, k] = reduce_at_impl(c, d->premises[0], path, at + 1);
      return {abs_p_node(c, p, b), k};
    }
    case Rule::App: {
      if (i == 0) {
        auto [f, k] = reduce_at_impl(c, d->premises[0], path, at + 1);
        return {app_node(c, f, d->premises[1]), k};
      }
      require(i == 1, "bad redex path under an application");
      auto [a, k] = reduce_into_many(c, d->premises[1], path, at + 1);
      return {app_node(c, d->premises[0], a), k};
    }
    case Rule::AppP: {
      if (i == 0) {
        auto [f, k] = reduce_at_impl(c, d->premises[0], path, at + 1);
        return {app_p_node(c, f, as<App>(subject_term(d)).arg), k};
      }
      require(i == 1, "bad redex path under an application");
      auto [arg, k] = rewrite_subject(as<App>(subject_term(d)).arg, path, at + 1);
      return {app_p_node(c, d->premises[0], arg), k};
    }
    case Rule::Pair: {
      require(i == 0 || i == 1, "bad redex path under a pair");
      auto [side, k] = reduce_into_many(c, d->premises[i], path, at + 1);
      return {i == 0 ? pair_node(c, side, d->premises[1]) : pair_node(c, d->premises[0], side),
              k};
    }
    case Rule::PairP: {
      auto [subj, k] = rewrite_subject(subject_term(d), path, at);
      return {pair_p_node(c, subj), k};
    }
    case Rule::Match: {
      if (i == 0) {
        auto [b, k] = reduce_at_impl(c, d->premises[0], path, at + 1);
        return {match_node(c, b, d->premises[1], d->premises[2]), k};
      }
      require(i == 1, "bad redex path under a matching");
      auto [a, k] = reduce_into_many(c, d->premises[2], path, at + 1);
      return {match_node(c, d->premises[0], d->premises[1], a), k};
    }
    default:
      bad("redex path crosses a leaf rule");
  }
}

}  // namespace

std::pair<Derivation, StepKind> reduce_deriv_at(const Ctx& c, const Derivation& phi,
                                                const std::vector<int>& path) {
  return reduce_at_impl(c, phi, path, 0);
}

std::pair<Derivation, StepKind> reduce_deriv_head(const Ctx& c, const Derivation& phi) {
  auto r = head_redex_path(subject_term(phi));
  require(r.has_value(), "subject is head-irreducible");
  auto out = reduce_deriv_at(c, phi, r->first);
  require(out.second == r->second, "strategy and derivation disagree on the step kind");
  return out;
}

// ---------------------------------------------------------------------------
// Subject expansion
// ---------------------------------------------------------------------------

namespace {

// Names that appear as binders anywhere in t.
void bound_names_into(const Term& t, NameSet& acc) {
  if (is<Abs>(t)) {
    for (auto& v : pattern_vars(as<Abs>(t).pattern)) acc.insert(v);
    bound_names_into(as<Abs>(t).body, acc);
  } else if (is<Pair>(t)) {
    bound_names_into(as<Pair>(t).fst, acc);
    bound_names_into(as<Pair>(t).snd, acc);
  } else if (is<App>(t)) {
    bound_names_into(as<App>(t).fun, acc);
    bound_names_into(as<App>(t).arg, acc);
  } else if (is<Match>(t)) {
    for (auto& v : pattern_vars(as<Match>(t).pattern)) acc.insert(v);
    bound_names_into(as<Match>(t).body, acc);
    bound_names_into(as<Match>(t).arg, acc);
  }
}

Derivation expand_root(const Ctx& c, const Derivation& d, const Term& pre, REnv& env) {
  if (is<App>(pre) && is_abs_core(as<App>(pre).fun)) {
    auto [l, lam] = decompose_list_context(as<App>(pre).fun);
    std::vector<Derivation> layers;
    Derivation cur = d;
    for (std::size_t k = 0; k < l.layers.size(); ++k) {
      require(cur->rule == Rule::Match, "successor derivation is shallower than the stack");
      layers.push_back(cur);
      cur = cur->premises[0];
    }
    require(cur->rule == Rule::Match, "expansion target is not a matching node");
    Derivation core = abs_node(c, cur->premises[0], cur->premises[1]);
    for (auto it = layers.rbegin(); it != layers.rend(); ++it)
      core = match_node(c, core, (*it)->premises[1], (*it)->premises[2]);
    return app_node(c, core, cur->premises[2]);
  }
  require(is<Match>(pre), "no redex shape at the expansion position");
  const auto& m = as<Match>(pre);
  if (is_pvar(m.pattern)) {
    // The matching's binder is alpha-irrelevant; move it off every name the
    // derivation side could confuse it with.
    Name x = as_pvar(m.pattern).name;
    Term body = m.body;
    NameSet taken;
    bound_names_into(subject_term(d), taken);
    for (auto& [from, to] : env.entries) {
      taken.insert(from);
      taken.insert(to);
    }
    if (taken.count(x)) {
      auto body_names = all_names(body);
      taken.insert(body_names.begin(), body_names.end());
      auto arg_fv = free_vars(m.arg);
      taken.insert(arg_fv.begin(), arg_fv.end());
      Name x2 = fresh_name(x, taken);
      body = rename_free(body, x, x2);
      x = x2;
    }
    AntiResult r = antisubst_deriv_in(c, d, body, x, m.arg, env);
    Term u_subject =
        r.u_premises.empty() ? graft_env(m.arg, env) : r.u_premises[0]->conclusion.term_subject();
    Derivation u_many = many(c, u_subject, std::move(r.u_premises));
    Derivation pat = pat_v_node(c, x, u_many->conclusion.mset_assigned());
    return match_node(c, r.phi_t, pat, u_many);
  }
  require(is_ppair(m.pattern) && is_pair_core(m.arg), "no redex shape at the expansion position");
  auto [l, core_pair] = decompose_list_context(m.arg);
  std::vector<Derivation> layers;
  Derivation cur = d;
  for (std::size_t k = 0; k < l.layers.size(); ++k) {
    require(cur->rule == Rule::Match, "successor derivation is shallower than the stack");
    layers.push_back(cur);
    cur = cur->premises[0];
  }
  require(cur->rule == Rule::Match, "expansion target is not a matching node");
  Derivation outer = cur;
  Derivation inner = outer->premises[0];
  require(inner->rule == Rule::Match, "expansion target is missing the inner matching");
  Derivation pat = pat_x_node(c, inner->premises[1], outer->premises[1]);
  Derivation pair_d = pair_node(c, inner->premises[2], outer->premises[2]);
  Derivation chain = pair_d;
  for (auto it = layers.rbegin(); it != layers.rend(); ++it)
    chain = match_node(c, chain, (*it)->premises[1], (*it)->premises[2]);
  Derivation arg_many = many(c, chain->conclusion.term_subject(), {chain});
  return match_node(c, inner->premises[0], pat, arg_many);
}

Derivation expand_at_impl(const Ctx& c, const Derivation& d, const Term& pre,
                          const std::vector<int>& path, std::size_t at, REnv& env);

Derivation expand_into_many(const Ctx& c, const Derivation& many_node, const Term& pre,
                            const std::vector<int>& path, std::size_t at, REnv& env) {
  require(many_node->rule == Rule::Many, "expected a many node");
  // `pre` is the predecessor of this node's whole subject, so an erased
  // argument just swaps subjects.
  if (many_node->premises.empty()) return many(c, graft_env(pre, env), {});
  std::vector<Derivation> prems;
  for (auto& p : many_node->premises) prems.push_back(expand_at_impl(c, p, pre, path, at, env));
  Term subj = prems[0]->conclusion.term_subject();
  return many(c, subj, std::move(prems));
}

Derivation expand_at_impl(const Ctx& c, const Derivation& d, const Term& pre,
                          const std::vector<int>& path, std::size_t at, REnv& env) {
  if (at == path.size()) return expand_root(c, d, pre, env);
  int i = path[at];
  switch (d->rule) {
    case Rule::Many: {
      std::vector<Derivation> prems;
      for (auto& p : d->premises) prems.push_back(expand_at_impl(c, p, pre, path, at, env));
      Term subj = prems.empty() ? graft_env(pre, env) : prems[0]->conclusion.term_subject();
      return many(c, subj, std::move(prems));
    }
    case Rule::Abs: {
      require(i == 0 && is<Abs>(pre), "expansion path and predecessor term disagree");
      std::size_t n = env.push_pattern(as<Abs>(pre).pattern, as<Abs>(subject_term(d)).pattern);
      Derivation body = expand_at_impl(c, d->premises[0], as<Abs>(pre).body, path, at + 1, env);
      env.pop(n);
      return abs_node(c, body, d->premises[1]);
    }
    case Rule::AbsP: {
      require(i == 0 && is<Abs>(pre), "expansion path and predecessor term disagree");
      Pattern p = as<Abs>(subject_term(d)).pattern;
      std::size_t n = env.push_pattern(as<Abs>(pre).pattern, p);
      Derivation body = expand_at_impl(c, d->premises[0], as<Abs>(pre).body, path, at + 1, env);
      env.pop(n);
      return abs_p_node(c, p, body);
    }
    case Rule::App: {
      require(is<App>(pre), "expansion path and predecessor term disagree");
      if (i == 0)
        return app_node(c,
                        expand_at_impl(c, d->premises[0], as<App>(pre).fun, path, at + 1, env),
                        d->premises[1]);
      require(i == 1, "bad expansion path under an application");
      return app_node(c, d->premises[0],
                      expand_into_many(c, d->premises[1], as<App>(pre).arg, path, at + 1, env));
    }
    case Rule::AppP: {
      require(is<App>(pre), "expansion path and predecessor term disagree");
      if (i == 0)
        return app_p_node(
            c, expand_at_impl(c, d->premises[0], as<App>(pre).fun, path, at + 1, env),
            as<App>(subject_term(d)).arg);
      require(i == 1, "bad expansion path under an application");
      return app_p_node(c, d->premises[0], graft_env(as<App>(pre).arg, env));
    }
    case Rule::Pair: {
      require(is<Pair>(pre) && (i == 0 || i == 1), "bad expansion path under a pair");
      const Term& comp = i == 0 ? as<Pair>(pre).fst : as<Pair>(pre).snd;
      Derivation side = expand_into_many(c, d->premises[i], comp, path, at + 1, env);
      return i == 0 ? pair_node(c, side, d->premises[1]) : pair_node(c, d->premises[0], side);
    }
    case Rule::PairP: {
      require(is<Pair>(pre), "expansion path and predecessor term disagree");
      return pair_p_node(c, graft_env(pre, env));
    }
    case Rule::Match: {
      require(is<Match>(pre), "expansion path and predecessor term disagree");
      if (i == 0) {
        std::size_t n =
            env.push_pattern(as<Match>(pre).pattern, as<Match>(subject_term(d)).pattern);
        Derivation body =
            expand_at_impl(c, d->premises[0], as<Match>(pre).body, path, at + 1, env);
        env.pop(n);
        return match_node(c, body, d->premises[1], d->premises[2]);
      }
      require(i == 1, "bad expansion path under a matching");
      return match_node(c, d->premises[0], d->premises[1],
                        expand_into_many(c, d->premises[2], as<Match>(pre).arg, path, at + 1,
                                         env));
    }
    default:
      bad("expansion path crosses a leaf rule");
  }
}

}  // namespace

Derivation expand_deriv_at(const Ctx& c, const Derivation& phi_after, const Term& pre,
                           const std::vector<int>& path) {
  REnv env;
  return expand_at_impl(c, phi_after, pre, path, 0, env);
}

Derivation expand_deriv_head(const Ctx& c, const Derivation& phi_after, const Term& pre) {
  auto r = head_redex_path(pre);
  require(r.has_value(), "predecessor term has no head redex");
  auto s = head_step(pre);
  require(s && alpha_eq(s->first, subject_term(phi_after)),
          "derivation subject is not the successor of the given term: have '" +
              print(subject_term(phi_after)) + "', want '" + print(s->first) + "'");
  return expand_deriv_at(c, phi_after, pre, r->first);
}

}  // namespace patcalc::build
