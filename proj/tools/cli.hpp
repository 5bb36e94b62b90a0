#pragma once

#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "patcalc/system_e.hpp"
#include "patcalc/system_u.hpp"

namespace patcalc::cli {

struct RunConfig {
  std::string command;                // normalize | classify | check | synthesize | verify | fuzz
  std::optional<std::string> expr;    // -e
  std::optional<std::string> file;    // -f
  long long max_steps = 10000;
  unsigned long long seed = 0;
  long long count = 500;
  long long size = 12;
  std::string strategy = "head";      // head | full-probe (normalize only)
  std::string system = "e";           // u | e
  std::string out_path;
  bool macros = true;
  PairReading pair_reading = PairReading::Sum;
};

// Exit codes: 0 success, 1 input error, 2 step budget exhausted,
// 3 rule violation, 4 property failure / counter mismatch.
int run_command(const RunConfig& config, std::ostream& out, std::ostream& err);

// Notational macros I, K, Delta, Omega, expanded at their free occurrences.
Term expand_macros(const Term& t);

// Seeded, size-bounded, linear-by-construction term generator. Roughly a
// third of generated applications put an abstraction in function position to
// bias toward redexes.
Term generate_term(std::mt19937_64& rng, long long size_budget);

// Structural shrinking: drop matchings, replace subterms by free variables.
std::vector<Term> shrink_candidates(const Term& t);

}  // namespace patcalc::cli
