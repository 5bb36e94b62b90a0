#pragma once

// Derivation transformers shared by the two systems: substitution and its
// inverse, and subject reduction/expansion along a redex position. Counter
// bookkeeping falls out of the node builders.

#include "internal/builders.hpp"

namespace patcalc::build {

// phi_u must be a many node whose multiset equals x's multiset in phi_t.
Derivation subst_deriv(const Ctx& c, const Derivation& phi_t, const Name& x,
                       const Derivation& phi_u);

struct AntiResult {
  Derivation phi_t;
  std::vector<Derivation> u_premises;  // simple-typed derivations of u
};
AntiResult antisubst_deriv(const Ctx& c, const Derivation& phi, const Term& t, const Name& x,
                           const Term& u);

// Path and base-rule kind of the head redex, mirroring head_step's dispatch.
std::optional<std::pair<std::vector<int>, StepKind>> head_redex_path(const Term& t);

std::pair<Derivation, StepKind> reduce_deriv_at(const Ctx& c, const Derivation& phi,
                                                const std::vector<int>& path);
std::pair<Derivation, StepKind> reduce_deriv_head(const Ctx& c, const Derivation& phi);

Derivation expand_deriv_at(const Ctx& c, const Derivation& phi_after, const Term& pre,
                           const std::vector<int>& path);
Derivation expand_deriv_head(const Ctx& c, const Derivation& phi_after, const Term& pre);

}  // namespace patcalc::build
