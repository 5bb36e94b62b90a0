#include "patcalc/system_e.hpp"

#include <sstream>

#include "internal/builders.hpp"
#include "internal/transform.hpp"
#include "patcalc/errors.hpp"

namespace patcalc {

using build::e_ctx;

CheckResult check_e(const Derivation& d, const EConfig& cfg) {
  return build::check_system(d, e_ctx(cfg));
}

bool is_tight_derivation(const Derivation& d) {
  const Judgment& j = d->conclusion;
  if (!is_tight(j.ctx)) return false;
  return j.assigns_mset() ? is_tight(j.mset_assigned()) : is_tight(j.type_assigned());
}

// ---------------------------------------------------------------------------
// Tight typing of canonical forms: the pure builder assigns the neutral base,
// the general one a tight base, with persistent rules throughout. Indices
// come out as (0,0,0,size).
// ---------------------------------------------------------------------------

namespace {

Derivation tight_pure(const Term& t) {
  auto c = e_ctx();
  if (is<Var>(t)) return build::ax(c, as<Var>(t).name, star_n());
  if (is<App>(t)) return build::app_p_node(c, tight_pure(as<App>(t).fun), as<App>(t).arg);
  if (is<Match>(t)) {
    const auto& m = as<Match>(t);
    Derivation body = tight_pure(m.body);
    Derivation pat =
        build::pat_p_node(c, m.pattern, context_restrict(body->conclusion.ctx, m.pattern));
    Derivation arg = build::many(c, m.arg, {tight_pure(m.arg)});
    return build::match_node(c, body, pat, arg);
  }
  throw NotCanonicalError("tight_type_canonical: not a pure canonical form");
}

Derivation tight_canonical(const Term& t) {
  auto c = e_ctx();
  if (is_pure_canonical(t)) return tight_pure(t);
  if (is<Abs>(t)) {
    const auto& a = as<Abs>(t);
    return build::abs_p_node(c, a.pattern, tight_canonical(a.body));
  }
  if (is<Pair>(t)) return build::pair_p_node(c, t);
  if (is<Match>(t)) {
    const auto& m = as<Match>(t);
    Derivation body = tight_canonical(m.body);
    Derivation pat =
        build::pat_p_node(c, m.pattern, context_restrict(body->conclusion.ctx, m.pattern));
    Derivation arg = build::many(c, m.arg, {tight_pure(m.arg)});
    return build::match_node(c, body, pat, arg);
  }
  throw NotCanonicalError("tight_type_canonical: not a canonical form");
}

}  // namespace

Derivation tight_type_canonical(const Term& t) {
  if (!is_canonical(t)) throw NotCanonicalError("tight_type_canonical: not a canonical form");
  return tight_canonical(t);
}

Derivation subst_e(const Derivation& phi_t, const Name& x, const Derivation& phi_u,
                   const EConfig& cfg) {
  return build::subst_deriv(e_ctx(cfg), phi_t, x, phi_u);
}

AntiSubstResult antisubst_e(const Derivation& phi, const Term& t, const Name& x, const Term& u,
                            const EConfig& cfg) {
  build::AntiResult r = build::antisubst_deriv(e_ctx(cfg), phi, t, x, u);
  Term u_subject = r.u_premises.empty() ? u : r.u_premises[0]->conclusion.term_subject();
  Derivation phi_u = build::many(e_ctx(cfg), u_subject, std::move(r.u_premises));
  MultisetType a = phi_u->conclusion.mset_assigned();
  return AntiSubstResult{std::move(r.phi_t), std::move(phi_u), std::move(a)};
}

Derivation subject_reduce_e(const Derivation& phi, const Term& pre_term, StepKind kind,
                            const EConfig& cfg) {
  if (!alpha_eq(build::subject_term(phi), pre_term))
    throw ShapeMismatchError("", "derivation subject differs from the step's start term: have '" +
                                     print(build::subject_term(phi)) + "', want '" +
                                     print(pre_term) + "'");
  auto [out, k] = build::reduce_deriv_head(e_ctx(cfg), phi);
  if (k != kind)
    throw ShapeMismatchError("", "head step kind differs from the recorded one");
  return out;
}

Derivation subject_expand_e(const Derivation& phi_after, const Term& pre_term,
                            const EConfig& cfg) {
  return build::expand_deriv_head(e_ctx(cfg), phi_after, pre_term);
}

Derivation synthesize_tight(const Term& t, long long max_steps, const EConfig& cfg) {
  NormalizeResult norm = head_normalize(t, max_steps);
  if (norm.budget_exceeded)
    throw NotHeadNormalizingError("head normalization did not finish within the step budget");
  Derivation d = tight_type_canonical(norm.trace.final);
  for (auto it = norm.trace.steps.rbegin(); it != norm.trace.steps.rend(); ++it)
    d = build::expand_deriv_head(e_ctx(cfg), d, it->first);
  return d;
}

TightReport verify_exact(const Term& t, long long max_steps, const EConfig& cfg) {
  NormalizeResult norm = head_normalize(t, max_steps);
  if (norm.budget_exceeded)
    throw NotHeadNormalizingError("head normalization did not finish within the step budget");
  TightReport report;
  report.observed = norm.counters;
  report.observed.f = canonical_size(norm.trace.final);
  report.derivation = synthesize_tight(t, max_steps, cfg);
  report.synthesized = *report.derivation->conclusion.indices;
  report.match = report.synthesized == report.observed;
  return report;
}

std::string tight_report_line(const TightReport& r) {
  std::ostringstream out;
  out << "SYNTH " << r.synthesized.b << ' ' << r.synthesized.e << ' ' << r.synthesized.m << ' '
      << r.synthesized.f << " | OBS " << r.observed.b << ' ' << r.observed.e << ' '
      << r.observed.m << ' ' << r.observed.f << " | MATCH " << (r.match ? "yes" : "no");
  return out.str();
}

ReplayResult forward_replay_check(const Derivation& phi, const Trace& trace, const EConfig& cfg) {
  auto fail = [](std::size_t i, std::string detail) {
    return ReplayResult{false, i, std::move(detail)};
  };
  Derivation cur = phi;
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const auto& [pre, kind] = trace.steps[i];
    if (!alpha_eq(build::subject_term(cur), pre))
      return fail(i, "derivation subject diverged from the trace");
    if (!cur->conclusion.indices) return fail(i, "missing indices");
    Counters before = *cur->conclusion.indices;
    Derivation next;
    try {
      auto [n, k] = build::reduce_deriv_head(e_ctx(cfg), cur);
      if (k != kind) return fail(i, "step kind differs from the trace");
      next = n;
    } catch (const ShapeMismatchError& e) {
      return fail(i, e.what());
    }
    Counters after = *next->conclusion.indices;
    Counters want = before;
    switch (kind) {
      case StepKind::B: want.b -= 1; break;
      case StepKind::E: want.e -= 1; break;
      case StepKind::M: want.m -= 1; break;
    }
    if (!(after == want))
      return fail(i, "counters did not decrement exactly by the step kind");
    cur = next;
  }
  if (!alpha_eq(build::subject_term(cur), trace.final))
    return fail(trace.steps.size(), "terminal subject differs from the trace's final term");
  Counters end = cur->conclusion.indices.value_or(Counters{});
  if (end.b != 0 || end.e != 0 || end.m != 0)
    return fail(trace.steps.size(), "terminal counters are not (0,0,0,_)");
  if (end.f != canonical_size(trace.final))
    return fail(trace.steps.size(), "terminal size index differs from the canonical size");
  return ReplayResult{};
}

}  // namespace patcalc
