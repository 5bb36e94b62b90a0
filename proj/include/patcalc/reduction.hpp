#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "patcalc/syntax.hpp"

namespace patcalc {

// Kind of a reduction step: b fires an application against an abstraction
// (possibly through a stack of pending matchings), e resolves a
// variable-pattern matching by substitution, m decomposes a pair-pattern
// matching against a pair.
enum class StepKind { B, E, M };
char step_kind_letter(StepKind k);

struct Counters {
  long long b = 0, e = 0, m = 0, f = 0;
  bool operator==(const Counters&) const = default;
};

struct PatIndices {
  long long e = 0, m = 0, f = 0;
  bool operator==(const PatIndices&) const = default;
};

// Recorded head-reduction history: each entry stores the term exactly as it
// was before the step, plus the rule kind that fired.
struct Trace {
  std::vector<std::pair<Term, StepKind>> steps;
  Term final;
};

enum class Classification { PureCanonical, Canonical, HeadReducible, HeadClash };
const char* classification_name(Classification c);

// Capture-avoiding substitution of u for the free occurrences of x in t.
Term substitute(const Term& t, const Name& x, const Term& u);

// Maximal stack of explicit matchings around a non-matching core,
// innermost layer first. recompose(decompose(t)) == t exactly.
struct ListContext {
  std::vector<std::pair<Pattern, Term>> layers;
};
std::pair<ListContext, Term> decompose_list_context(const Term& t);
Term recompose(const ListContext& l, const Term& core);
NameSet list_context_binders(const ListContext& l);

// True when t is an abstraction under a (possibly empty) matching stack.
bool is_abs_core(const Term& t);
// True when t is a pair under a (possibly empty) matching stack.
bool is_pair_core(const Term& t);

// One deterministic head step, or nothing when t is head-irreducible.
std::optional<std::pair<Term, StepKind>> head_step(const Term& t);

// Applies whichever base rule matches at the root of t, ignoring the head
// strategy's guards; used to fire full-relation redexes at known positions.
std::optional<std::pair<Term, StepKind>> root_full_step(const Term& t);

struct NormalizeResult {
  Trace trace;
  Counters counters;      // per-kind step counts; f stays 0 here
  bool budget_exceeded = false;
};
NormalizeResult head_normalize(const Term& t, long long max_steps);

// Every redex occurrence of the full (non-deterministic) relation, in
// leftmost-outermost order, paired with the whole reduced term.
std::vector<std::pair<Position, Term>> full_steps(const Term& t);

bool is_pure_canonical(const Term& t);
bool is_canonical(const Term& t);
Classification classify(const Term& t);

// Node count of a canonical form: |x|=0, |<t,u>|=1, |N t|=|N|+1,
// |\p.M|=|M|+1, |M[<p1,p2>/N]|=|M|+|N|+1. Throws NotCanonicalError.
long long canonical_size(const Term& t);

// Desk-scale joinability check: picks two distinct one-step reducts (when
// they exist) and searches for a common reduct within `budget` further steps
// on each side.
bool joinability_probe(const Term& t, long long budget);

// Names of all strategy rules applicable to t, for the exhaustive
// determinism check. At most one may ever fire.
std::vector<std::string> applicable_head_rules(const Term& t);

// Line format: one "<kind> <pre-term>" per step, then "FINAL <term>",
// then "COUNTERS b e m".
std::string trace_to_text(const Trace& trace, const Counters& counters);

}  // namespace patcalc
