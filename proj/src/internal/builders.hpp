#pragma once

// Rule-node constructors shared by both systems. Each builder computes the
// conclusion judgment from its premises and rejects ill-formed combinations,
// so every transformation that goes through them stays rule-correct. The
// checkers replay the same arithmetic against stored conclusions.

#include "patcalc/derivation.hpp"
#include "patcalc/system_e.hpp"

namespace patcalc::build {

enum class Sys { U, E };

struct Ctx {
  Sys sys = Sys::U;
  PairReading pair_reading = PairReading::Sum;
};

inline Ctx u_ctx() { return Ctx{Sys::U, PairReading::Sum}; }
inline Ctx e_ctx(const EConfig& cfg = {}) { return Ctx{Sys::E, cfg.pair_reading}; }

Derivation ax(const Ctx& c, const Name& x, const Type& sigma);
Derivation many(const Ctx& c, const Term& subject, std::vector<Derivation> premises);
Derivation abs_node(const Ctx& c, const Derivation& body, const Derivation& pat);
Derivation abs_p_node(const Ctx& c, const Pattern& p, const Derivation& body);
Derivation app_node(const Ctx& c, const Derivation& fun, const Derivation& arg_many);
Derivation app_p_node(const Ctx& c, const Derivation& fun, const Term& arg);
Derivation pair_node(const Ctx& c, const Derivation& fst_many, const Derivation& snd_many);
Derivation pair_p_node(const Ctx& c, const Term& subject);
Derivation match_node(const Ctx& c, const Derivation& body, const Derivation& pat,
                      const Derivation& arg_many);
Derivation pat_v_node(const Ctx& c, const Name& x, const MultisetType& a);
Derivation pat_x_node(const Ctx& c, const Derivation& left, const Derivation& right);
Derivation pat_p_node(const Ctx& c, const Pattern& p, const TypingContext& restricted);

// The pattern derivation determined by the restriction of a context to the
// pattern (pat_v at the declared multiset, pat_x on pairs).
Derivation synth_pattern(const Ctx& c, const Pattern& p, const TypingContext& restricted);

// Free-variable rename over a whole derivation, stopping below binders of
// `from` as term scoping does. `to` must be globally fresh for the subtree.
Derivation deriv_rename_free(const Derivation& d, const Name& from, const Name& to);

// Alpha-renames one pattern variable of an abs/abs_p/match node.
Derivation rename_node_binder(const Ctx& c, const Derivation& node, const Name& v, const Name& v2);

// Generic checker behind check_u / check_e.
CheckResult check_system(const Derivation& d, const Ctx& c);

// Conveniences used across the transformers.
const Judgment& concl(const Derivation& d);
Term subject_term(const Derivation& d);
Counters counters_of(const Derivation& d);  // zeros in the upper system

}  // namespace patcalc::build
