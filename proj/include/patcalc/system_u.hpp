#pragma once

#include "patcalc/derivation.hpp"

namespace patcalc {

// Upper-bound system: derivations carry no indices; the size of a derivation
// bounds the number of head steps from its subject.

CheckResult check_u(const Derivation& d);

// Substitution as a derivation transformer. phi_u must be a many node typing
// u at the multiset assigned to x in phi_t's context. The output satisfies
// deriv_size(out) == deriv_size(phi_t) + deriv_size(phi_u) - |A|.
Derivation subst_u(const Derivation& phi_t, const Name& x, const Derivation& phi_u);

struct AntiSubstResult {
  Derivation phi_t;   // Gamma_t; x:A |- t : sigma
  Derivation phi_u;   // many node, Gamma_u |- u : A
  MultisetType a;
};
// Splits a derivation of t{x:=u} into a derivation of t and one of u.
AntiSubstResult antisubst_u(const Derivation& phi, const Term& t, const Name& x, const Term& u);

// Carries phi across the head step leaving pre_term (phi's subject). The
// step kind must match the one recorded; size strictly decreases.
Derivation subject_reduce_u(const Derivation& phi, const Term& pre_term, StepKind kind);
// Same across an arbitrary one-step reduction at `pos`; size weakly decreases.
Derivation subject_reduce_u_at(const Derivation& phi, const Position& pos);

// Inverse direction: phi_after types the successor of pre_term's head step.
Derivation subject_expand_u(const Derivation& phi_after, const Term& pre_term);
Derivation subject_expand_u_at(const Derivation& phi_after, const Term& pre_term, const Position& pos);

// A valid derivation for a canonical form, choosing minimal types: base *
// at the head, empty multisets for unexamined arguments.
Derivation type_canonical_u(const Term& t);

// Head-normalizes within max_steps, types the canonical form, then expands
// backwards along the trace. Throws NotHeadNormalizingError on budget
// exhaustion. The result's size bounds the number of head steps taken.
Derivation synthesize_u(const Term& t, long long max_steps);

enum class TransportDirection { Forward, Backward };

// Moves a derivation across one full-relation step between t_from and t_to
// (forward: phi types t_from; backward: phi types t_to), preserving the
// (context, type) pair.
Derivation transport_judgment(const Derivation& phi, const Term& t_from, const Term& t_to,
                              TransportDirection direction);

}  // namespace patcalc
