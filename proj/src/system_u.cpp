#include "patcalc/system_u.hpp"

#include "internal/builders.hpp"
#include "internal/transform.hpp"
#include "patcalc/errors.hpp"

namespace patcalc {

using build::e_ctx;
using build::u_ctx;

CheckResult check_u(const Derivation& d) { return build::check_system(d, u_ctx()); }

Derivation subst_u(const Derivation& phi_t, const Name& x, const Derivation& phi_u) {
  return build::subst_deriv(u_ctx(), phi_t, x, phi_u);
}

static AntiSubstResult wrap_anti(const build::Ctx& c, build::AntiResult r, const Term& u) {
  Term u_subject = r.u_premises.empty() ? u : r.u_premises[0]->conclusion.term_subject();
  Derivation phi_u = build::many(c, u_subject, std::move(r.u_premises));
  MultisetType a = phi_u->conclusion.mset_assigned();
  return AntiSubstResult{std::move(r.phi_t), std::move(phi_u), std::move(a)};
}

AntiSubstResult antisubst_u(const Derivation& phi, const Term& t, const Name& x, const Term& u) {
  return wrap_anti(u_ctx(), build::antisubst_deriv(u_ctx(), phi, t, x, u), u);
}

Derivation subject_reduce_u(const Derivation& phi, const Term& pre_term, StepKind kind) {
  if (!alpha_eq(build::subject_term(phi), pre_term))
    throw ShapeMismatchError("", "derivation subject differs from the step's start term: have '" +
                                     print(build::subject_term(phi)) + "', want '" +
                                     print(pre_term) + "'");
  auto [out, k] = build::reduce_deriv_head(u_ctx(), phi);
  if (k != kind)
    throw ShapeMismatchError("", "head step kind differs from the recorded one");
  return out;
}

Derivation subject_reduce_u_at(const Derivation& phi, const Position& pos) {
  return build::reduce_deriv_at(u_ctx(), phi, pos.path).first;
}

Derivation subject_expand_u(const Derivation& phi_after, const Term& pre_term) {
  return build::expand_deriv_head(u_ctx(), phi_after, pre_term);
}

Derivation subject_expand_u_at(const Derivation& phi_after, const Term& pre_term,
                               const Position& pos) {
  return build::expand_deriv_at(u_ctx(), phi_after, pre_term, pos.path);
}

// ---------------------------------------------------------------------------
// Canonical typing: pure canonical forms are built to an arbitrary requested
// type, everything unexamined sits under an empty many.
// ---------------------------------------------------------------------------

namespace {

Derivation build_pure_u(const Term& t, const Type& goal) {
  auto c = u_ctx();
  if (is<Var>(t)) return build::ax(c, as<Var>(t).name, goal);
  if (is<App>(t)) {
    Derivation fun = build_pure_u(as<App>(t).fun, arrow(MultisetType{}, goal));
    return build::app_node(c, fun, build::many(c, as<App>(t).arg, {}));
  }
  if (is<Match>(t)) {
    const auto& m = as<Match>(t);
    Derivation body = build_pure_u(m.body, goal);
    Derivation pat =
        build::synth_pattern(c, m.pattern, context_restrict(body->conclusion.ctx, m.pattern));
    const Type& prod = pat->conclusion.mset_assigned().elems[0];
    Derivation arg = build_pure_u(m.arg, prod);
    return build::match_node(c, body, pat, build::many(c, m.arg, {arg}));
  }
  throw NotCanonicalError("type_canonical_u: not a pure canonical form");
}

Derivation build_canonical_u(const Term& t) {
  auto c = u_ctx();
  if (is_pure_canonical(t)) return build_pure_u(t, star());
  if (is<Abs>(t)) {
    const auto& a = as<Abs>(t);
    Derivation body = build_canonical_u(a.body);
    Derivation pat =
        build::synth_pattern(c, a.pattern, context_restrict(body->conclusion.ctx, a.pattern));
    return build::abs_node(c, body, pat);
  }
  if (is<Pair>(t))
    return build::pair_node(c, build::many(c, as<Pair>(t).fst, {}),
                            build::many(c, as<Pair>(t).snd, {}));
  if (is<Match>(t)) {
    const auto& m = as<Match>(t);
    Derivation body = build_canonical_u(m.body);
    Derivation pat =
        build::synth_pattern(c, m.pattern, context_restrict(body->conclusion.ctx, m.pattern));
    const Type& prod = pat->conclusion.mset_assigned().elems[0];
    Derivation arg = build_pure_u(m.arg, prod);
    return build::match_node(c, body, pat, build::many(c, m.arg, {arg}));
  }
  throw NotCanonicalError("type_canonical_u: not a canonical form");
}

}  // namespace

Derivation type_canonical_u(const Term& t) {
  if (!is_canonical(t)) throw NotCanonicalError("type_canonical_u: not a canonical form");
  return build_canonical_u(t);
}

Derivation synthesize_u(const Term& t, long long max_steps) {
  NormalizeResult norm = head_normalize(t, max_steps);
  if (norm.budget_exceeded)
    throw NotHeadNormalizingError("head normalization did not finish within the step budget");
  Derivation d = type_canonical_u(norm.trace.final);
  for (auto it = norm.trace.steps.rbegin(); it != norm.trace.steps.rend(); ++it)
    d = build::expand_deriv_head(u_ctx(), d, it->first);
  return d;
}

Derivation transport_judgment(const Derivation& phi, const Term& t_from, const Term& t_to,
                              TransportDirection direction) {
  std::optional<Position> where;
  if (auto h = head_step(t_from); h && alpha_eq(h->first, t_to)) {
    auto hp = build::head_redex_path(t_from);
    where = Position{hp->first};
  } else {
    for (auto& [pos, reduct] : full_steps(t_from)) {
      if (alpha_eq(reduct, t_to)) {
        where = pos;
        break;
      }
    }
  }
  if (!where)
    throw ShapeMismatchError("", "the given terms are not related by a single step");
  if (direction == TransportDirection::Forward) {
    if (!alpha_eq(build::subject_term(phi), t_from))
      throw ShapeMismatchError("", "forward transport needs a derivation of the start term");
    return build::reduce_deriv_at(u_ctx(), phi, where->path).first;
  }
  if (!alpha_eq(build::subject_term(phi), t_to))
    throw ShapeMismatchError("", "backward transport needs a derivation of the end term");
  return build::expand_deriv_at(u_ctx(), phi, t_from, where->path);
}

}  // namespace patcalc
