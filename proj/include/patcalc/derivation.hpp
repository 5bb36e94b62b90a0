#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "patcalc/reduction.hpp"
#include "patcalc/syntax.hpp"
#include "patcalc/types.hpp"

namespace patcalc {

// Typing rules of the two systems. The *_p rules type persistent
// constructors and are exclusive to the exact system.
enum class Rule { Ax, Many, Abs, App, Pair, Match, PatV, PatX, AbsP, AppP, PairP, PatP };

const char* rule_name(Rule r);
std::optional<Rule> rule_from_name(const std::string& name);
bool is_pattern_rule(Rule r);

// A full judgment: context, subject (term or pattern), assigned type (simple
// or multiset), and for the exact system the index tuple — (b,e,m,f) on term
// judgments, (e,m,f) on pattern judgments.
struct Judgment {
  TypingContext ctx;
  std::variant<Term, Pattern> subject;
  std::variant<Type, MultisetType> assigned;
  std::optional<Counters> indices;
  std::optional<PatIndices> pat_indices;

  bool is_pattern_judgment() const { return std::holds_alternative<Pattern>(subject); }
  const Term& term_subject() const { return std::get<Term>(subject); }
  const Pattern& pattern_subject() const { return std::get<Pattern>(subject); }
  bool assigns_mset() const { return std::holds_alternative<MultisetType>(assigned); }
  const Type& type_assigned() const { return std::get<Type>(assigned); }
  const MultisetType& mset_assigned() const { return std::get<MultisetType>(assigned); }
};

struct DerivationNode;
using Derivation = std::shared_ptr<const DerivationNode>;

struct DerivationNode {
  Rule rule;
  Judgment conclusion;
  std::vector<Derivation> premises;
};

Derivation mk_node(Rule rule, Judgment conclusion, std::vector<Derivation> premises);

// Number of rule nodes excluding many, pattern rules included.
long long deriv_size(const Derivation& d);

bool judgment_equal(const Judgment& a, const Judgment& b);
// Node-wise equality; premise order inside many nodes is irrelevant.
bool derivation_equal(const Derivation& a, const Derivation& b);

struct CheckResult {
  bool ok = true;
  std::string node_path;  // dotted premise indices, "" = root
  std::string reason;
};
CheckResult check_ok();
CheckResult check_fail(const std::string& path, const std::string& reason);

// JSON document, schema: {"rule", "context": [[name, multiset]...],
// "subject", "assigned", "indices"?, "premises": [...]}.
std::string serialize(const Derivation& d);
Derivation deserialize(const std::string& document);  // throws FormatError

}  // namespace patcalc
