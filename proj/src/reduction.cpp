#include "patcalc/reduction.hpp"

#include <deque>
#include <sstream>

namespace patcalc {

char step_kind_letter(StepKind k) {
  switch (k) {
    case StepKind::B: return 'b';
    case StepKind::E: return 'e';
    case StepKind::M: return 'm';
  }
  return '?';
}

const char* classification_name(Classification c) {
  switch (c) {
    case Classification::PureCanonical: return "pure-canonical";
    case Classification::Canonical: return "canonical";
    case Classification::HeadReducible: return "head-reducible";
    case Classification::HeadClash: return "head-clash";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Substitution
// ---------------------------------------------------------------------------

namespace {

// Renames the pattern vars of p that collide with `clashes`, in lockstep with
// the scope they bind. Avoid sets are fixed up front so choices are
// deterministic.
std::pair<Pattern, Term> avoid_capture(Pattern p, Term scope, const NameSet& clashes,
                                       const NameSet& avoid) {
  for (auto& [v, v2] : binder_renames(p, all_names(scope), clashes, avoid)) {
    scope = rename_free(scope, v, v2);
    p = pattern_rename(p, v, v2);
  }
  return {p, scope};
}

Term subst_impl(const Term& t, const Name& x, const Term& u, const NameSet& fvu) {
  if (!free_vars(t).count(x)) return t;
  if (is<Var>(t)) return u;  // free occurrence of x
  if (is<Abs>(t)) {
    const auto& n = as<Abs>(t);
    if (pattern_var_set(n.pattern).count(x)) return t;
    NameSet avoid = fvu;
    avoid.insert(x);
    auto [p, body] = avoid_capture(n.pattern, n.body, fvu, avoid);
    return abs(p, subst_impl(body, x, u, fvu));
  }
  if (is<Pair>(t))
    return pair(subst_impl(as<Pair>(t).fst, x, u, fvu), subst_impl(as<Pair>(t).snd, x, u, fvu));
  if (is<App>(t))
    return app(subst_impl(as<App>(t).fun, x, u, fvu), subst_impl(as<App>(t).arg, x, u, fvu));
  const auto& m = as<Match>(t);
  Term arg = subst_impl(m.arg, x, u, fvu);
  if (pattern_var_set(m.pattern).count(x)) return match(m.body, m.pattern, arg);
  NameSet avoid = fvu;
  avoid.insert(x);
  auto [p, body] = avoid_capture(m.pattern, m.body, fvu, avoid);
  return match(subst_impl(body, x, u, fvu), p, arg);
}

}  // namespace

Term substitute(const Term& t, const Name& x, const Term& u) {
  return subst_impl(t, x, u, free_vars(u));
}

// ---------------------------------------------------------------------------
// List contexts
// ---------------------------------------------------------------------------

std::pair<ListContext, Term> decompose_list_context(const Term& t) {
  if (is<Match>(t)) {
    const auto& m = as<Match>(t);
    auto [inner, core] = decompose_list_context(m.body);
    inner.layers.emplace_back(m.pattern, m.arg);
    return {std::move(inner), core};
  }
  return {ListContext{}, t};
}

Term recompose(const ListContext& l, const Term& core) {
  Term t = core;
  for (auto& [p, u] : l.layers) t = match(t, p, u);
  return t;
}

NameSet list_context_binders(const ListContext& l) {
  NameSet out;
  for (auto& [p, u] : l.layers)
    for (auto& v : pattern_vars(p)) out.insert(v);
  return out;
}

bool is_abs_core(const Term& t) {
  if (is<Abs>(t)) return true;
  if (is<Match>(t)) return is_abs_core(as<Match>(t).body);
  return false;
}

bool is_pair_core(const Term& t) {
  if (is<Pair>(t)) return true;
  if (is<Match>(t)) return is_pair_core(as<Match>(t).body);
  return false;
}

// Renames the matching-stack binders of t that collide with `clashes`; inner
// layers are handled first.
static Term rename_stack_binders(const Term& t, const NameSet& clashes) {
  if (!is<Match>(t)) return t;
  const auto& m = as<Match>(t);
  Term body = rename_stack_binders(m.body, clashes);
  NameSet avoid = clashes;
  auto [p, body2] = avoid_capture(m.pattern, body, clashes, avoid);
  return match(body2, p, m.arg);
}

// ---------------------------------------------------------------------------
// Head strategy
// ---------------------------------------------------------------------------

namespace {

// Fires rule b at the root of App(fun, arg); fun must have an abstraction
// core. The stack binders are freshened against the argument first.
Term fire_b(const Term& fun, const Term& arg) {
  Term f = rename_stack_binders(fun, free_vars(arg));
  auto [l, core] = decompose_list_context(f);
  const auto& lam = as<Abs>(core);
  return recompose(l, match(lam.body, lam.pattern, arg));
}

// Fires rule m at the root of Match(body, <p1,p2>, arg); arg must have a pair
// core. Stack binders move over `body`, so they are freshened against it; the
// right pattern component additionally must not capture through the left
// component's argument, nor collide with the left component's binders.
Term fire_m(const Term& body, const Pattern& p, const Term& arg) {
  Term a = rename_stack_binders(arg, free_vars(body));
  auto [l, core] = decompose_list_context(a);
  const auto& pr = as<Pair>(core);
  Pattern p1 = as_ppair(p).left;
  Pattern p2 = as_ppair(p).right;
  NameSet fvu1 = free_vars(pr.fst);
  NameSet avoid = fvu1;
  for (auto& v : pattern_vars(p1)) avoid.insert(v);
  auto [p2f, b2] = avoid_capture(p2, body, fvu1, avoid);
  return recompose(l, match(match(b2, p1, pr.fst), p2f, pr.snd));
}

}  // namespace

std::optional<std::pair<Term, StepKind>> head_step(const Term& t) {
  if (is<Var>(t) || is<Pair>(t)) return std::nullopt;
  if (is<Abs>(t)) {
    const auto& n = as<Abs>(t);
    if (auto s = head_step(n.body)) return std::make_pair(abs(n.pattern, s->first), s->second);
    return std::nullopt;
  }
  if (is<App>(t)) {
    const auto& a = as<App>(t);
    if (is_abs_core(a.fun)) return std::make_pair(fire_b(a.fun, a.arg), StepKind::B);
    if (auto s = head_step(a.fun)) return std::make_pair(app(s->first, a.arg), s->second);
    return std::nullopt;
  }
  const auto& m = as<Match>(t);
  if (auto s = head_step(m.body)) return std::make_pair(match(s->first, m.pattern, m.arg), s->second);
  if (is_pvar(m.pattern))
    return std::make_pair(substitute(m.body, as_pvar(m.pattern).name, m.arg), StepKind::E);
  if (is_pair_core(m.arg)) return std::make_pair(fire_m(m.body, m.pattern, m.arg), StepKind::M);
  if (auto s = head_step(m.arg)) return std::make_pair(match(m.body, m.pattern, s->first), s->second);
  return std::nullopt;
}

NormalizeResult head_normalize(const Term& t, long long max_steps) {
  NormalizeResult out;
  Term cur = t;
  for (long long i = 0; i < max_steps; ++i) {
    auto s = head_step(cur);
    if (!s) {
      out.trace.final = cur;
      return out;
    }
    out.trace.steps.emplace_back(cur, s->second);
    switch (s->second) {
      case StepKind::B: ++out.counters.b; break;
      case StepKind::E: ++out.counters.e; break;
      case StepKind::M: ++out.counters.m; break;
    }
    cur = s->first;
  }
  if (head_step(cur)) {
    out.budget_exceeded = true;
    out.trace.final = cur;  // last term reached, not a normal form
    return out;
  }
  out.trace.final = cur;
  return out;
}

// ---------------------------------------------------------------------------
// Full (non-deterministic) relation
// ---------------------------------------------------------------------------

std::optional<std::pair<Term, StepKind>> root_full_step(const Term& t) {
  if (is<App>(t)) {
    const auto& a = as<App>(t);
    if (is_abs_core(a.fun)) return std::make_pair(fire_b(a.fun, a.arg), StepKind::B);
    return std::nullopt;
  }
  if (is<Match>(t)) {
    const auto& m = as<Match>(t);
    if (is_pvar(m.pattern))
      return std::make_pair(substitute(m.body, as_pvar(m.pattern).name, m.arg), StepKind::E);
    if (is_pair_core(m.arg)) return std::make_pair(fire_m(m.body, m.pattern, m.arg), StepKind::M);
    return std::nullopt;
  }
  return std::nullopt;
}

namespace {

void full_steps_impl(const Term& root, const Term& t, Position& pos,
                     std::vector<std::pair<Position, Term>>& out) {
  if (auto s = root_full_step(t)) out.emplace_back(pos, replace_at(root, pos, s->first));
  auto descend = [&](int i, const Term& child) {
    pos.path.push_back(i);
    full_steps_impl(root, child, pos, out);
    pos.path.pop_back();
  };
  if (is<Abs>(t)) {
    descend(0, as<Abs>(t).body);
  } else if (is<Pair>(t)) {
    descend(0, as<Pair>(t).fst);
    descend(1, as<Pair>(t).snd);
  } else if (is<App>(t)) {
    descend(0, as<App>(t).fun);
    descend(1, as<App>(t).arg);
  } else if (is<Match>(t)) {
    descend(0, as<Match>(t).body);
    descend(1, as<Match>(t).arg);
  }
}

}  // namespace

std::vector<std::pair<Position, Term>> full_steps(const Term& t) {
  std::vector<std::pair<Position, Term>> out;
  Position pos;
  full_steps_impl(t, t, pos, out);
  return out;
}

// ---------------------------------------------------------------------------
// Canonical forms
// ---------------------------------------------------------------------------

bool is_pure_canonical(const Term& t) {
  if (is<Var>(t)) return true;
  if (is<App>(t)) return is_pure_canonical(as<App>(t).fun);
  if (is<Match>(t)) {
    const auto& m = as<Match>(t);
    return is_ppair(m.pattern) && is_pure_canonical(m.body) && is_pure_canonical(m.arg);
  }
  return false;
}

bool is_canonical(const Term& t) {
  if (is_pure_canonical(t)) return true;
  if (is<Abs>(t)) return is_canonical(as<Abs>(t).body);
  if (is<Pair>(t)) return true;
  if (is<Match>(t)) {
    const auto& m = as<Match>(t);
    return is_ppair(m.pattern) && is_canonical(m.body) && is_pure_canonical(m.arg);
  }
  return false;
}

Classification classify(const Term& t) {
  if (is_pure_canonical(t)) return Classification::PureCanonical;
  if (is_canonical(t)) return Classification::Canonical;
  if (!head_step(t)) return Classification::HeadClash;
  return Classification::HeadReducible;
}

long long canonical_size(const Term& t) {
  if (is<Var>(t)) return 0;
  if (is<Pair>(t)) {
    if (!is_canonical(t)) throw NotCanonicalError("canonical_size: not a canonical form");
    return 1;
  }
  if (is<App>(t)) {
    if (!is_pure_canonical(t)) throw NotCanonicalError("canonical_size: not a canonical form");
    return canonical_size(as<App>(t).fun) + 1;
  }
  if (is<Abs>(t)) {
    if (!is_canonical(t)) throw NotCanonicalError("canonical_size: not a canonical form");
    return canonical_size(as<Abs>(t).body) + 1;
  }
  const auto& m = as<Match>(t);
  if (!is_canonical(t)) throw NotCanonicalError("canonical_size: not a canonical form");
  return canonical_size(m.body) + canonical_size(m.arg) + 1;
}

// ---------------------------------------------------------------------------
// Joinability probe
// ---------------------------------------------------------------------------

namespace {

bool contains_alpha(const std::vector<Term>& set, const Term& t) {
  for (auto& s : set)
    if (alpha_eq(s, t)) return true;
  return false;
}

// All terms reachable from t by at most `depth` full steps, capped.
std::vector<Term> reachable(const Term& t, long long depth, std::size_t cap) {
  std::vector<Term> seen{t};
  std::deque<std::pair<Term, long long>> queue{{t, 0}};
  while (!queue.empty() && seen.size() < cap) {
    auto [cur, d] = queue.front();
    queue.pop_front();
    if (d >= depth) continue;
    for (auto& [pos, next] : full_steps(cur)) {
      if (!contains_alpha(seen, next)) {
        seen.push_back(next);
        queue.emplace_back(next, d + 1);
      }
    }
  }
  return seen;
}

}  // namespace

bool joinability_probe(const Term& t, long long budget) {
  auto steps = full_steps(t);
  // Find two distinct reducts; alpha-equal ones do not form a peak.
  std::optional<Term> first, second;
  for (auto& [pos, next] : steps) {
    if (!first) {
      first = next;
    } else if (!alpha_eq(*first, next)) {
      second = next;
      break;
    }
  }
  if (!second) return true;
  const std::size_t cap = 2000;
  auto ra = reachable(*first, budget, cap);
  auto rb = reachable(*second, budget, cap);
  for (auto& a : ra)
    if (contains_alpha(rb, a)) return true;
  return false;
}

// ---------------------------------------------------------------------------
// Exhaustive rule applicability (for the determinism property)
// ---------------------------------------------------------------------------

std::vector<std::string> applicable_head_rules(const Term& t) {
  std::vector<std::string> out;
  if (is<Abs>(t)) {
    if (head_step(as<Abs>(t).body)) out.push_back("cong-abs");
  } else if (is<App>(t)) {
    const auto& a = as<App>(t);
    if (is_abs_core(a.fun)) out.push_back("b");
    if (!is_abs_core(a.fun) && head_step(a.fun)) out.push_back("cong-app-left");
  } else if (is<Match>(t)) {
    const auto& m = as<Match>(t);
    bool body_reduces = head_step(m.body).has_value();
    if (body_reduces) out.push_back("cong-match-body");
    if (!body_reduces && is_pvar(m.pattern)) out.push_back("e");
    if (!body_reduces && is_ppair(m.pattern) && is_pair_core(m.arg)) out.push_back("m");
    if (!body_reduces && is_ppair(m.pattern) && !is_pair_core(m.arg) && head_step(m.arg))
      out.push_back("cong-match-arg");
  }
  return out;
}

std::string trace_to_text(const Trace& trace, const Counters& counters) {
  std::ostringstream out;
  for (auto& [pre, kind] : trace.steps) out << step_kind_letter(kind) << ' ' << print(pre) << '\n';
  if (trace.final) out << "FINAL " << print(trace.final) << '\n';
  out << "COUNTERS " << counters.b << ' ' << counters.e << ' ' << counters.m << '\n';
  return out.str();
}

}  // namespace patcalc
