#pragma once

#include "patcalc/derivation.hpp"
#include "patcalc/system_u.hpp"

namespace patcalc {

// Exact system: judgments carry (b,e,m,f) counters; tight derivations pin
// the exact number of head steps of each kind plus the normal-form size.

// The second index of the consuming pair rule. Sum adds the components'
// e-indices, by symmetry with every other rule and as the substitution
// arithmetic requires. Paper adds the right component's b-index instead; it
// breaks exactness and exists so the discrepancy can be demonstrated.
enum class PairReading { Sum, Paper };

struct EConfig {
  PairReading pair_reading = PairReading::Sum;
};

CheckResult check_e(const Derivation& d, const EConfig& cfg = {});

// Root context and root type (or multiset) both tight.
bool is_tight_derivation(const Derivation& d);

// Tight derivation for a canonical form with indices (0,0,0,|t|).
Derivation tight_type_canonical(const Term& t);

// As subst_u, with componentwise counter sums.
Derivation subst_e(const Derivation& phi_t, const Name& x, const Derivation& phi_u,
                   const EConfig& cfg = {});
AntiSubstResult antisubst_e(const Derivation& phi, const Term& t, const Name& x, const Term& u,
                            const EConfig& cfg = {});

// One head step forward: exactly the counter named by the step kind drops by
// one, f is unchanged.
Derivation subject_reduce_e(const Derivation& phi, const Term& pre_term, StepKind kind,
                            const EConfig& cfg = {});
// One head step backward: the counter named by the step kind grows by one.
Derivation subject_expand_e(const Derivation& phi_after, const Term& pre_term,
                            const EConfig& cfg = {});

// Head-normalize, tightly type the canonical form, expand backwards. Root
// indices come out exactly (b, e, m, |final|). Throws NotHeadNormalizingError.
Derivation synthesize_tight(const Term& t, long long max_steps, const EConfig& cfg = {});

struct TightReport {
  Counters synthesized;
  Counters observed;
  bool match = false;
  Derivation derivation;
};

// Runs the observer (head_normalize) and the synthesizer independently and
// compares counters componentwise.
TightReport verify_exact(const Term& t, long long max_steps, const EConfig& cfg = {});

// One line: "SYNTH b e m f | OBS b e m f | MATCH yes|no".
std::string tight_report_line(const TightReport& r);

struct ReplayResult {
  bool ok = true;
  std::size_t mismatch_index = 0;
  std::string detail;
};

// Replays subject_reduce_e along the trace, checking per-step exactness and
// the terminal (0,0,0,|final|) indices.
ReplayResult forward_replay_check(const Derivation& phi, const Trace& trace,
                                  const EConfig& cfg = {});

}  // namespace patcalc
