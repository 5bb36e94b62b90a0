#include "patcalc/derivation.hpp"

#include <algorithm>

#include <json.hpp>

#include "patcalc/errors.hpp"

namespace patcalc {

using nlohmann::json;

const char* rule_name(Rule r) {
  switch (r) {
    case Rule::Ax: return "ax";
    case Rule::Many: return "many";
    case Rule::Abs: return "abs";
    case Rule::App: return "app";
    case Rule::Pair: return "pair";
    case Rule::Match: return "match";
    case Rule::PatV: return "pat_v";
    case Rule::PatX: return "pat_x";
    case Rule::AbsP: return "abs_p";
    case Rule::AppP: return "app_p";
    case Rule::PairP: return "pair_p";
    case Rule::PatP: return "pat_p";
  }
  return "?";
}

std::optional<Rule> rule_from_name(const std::string& name) {
  static const std::pair<const char*, Rule> table[] = {
      {"ax", Rule::Ax},        {"many", Rule::Many},   {"abs", Rule::Abs},
      {"app", Rule::App},      {"pair", Rule::Pair},   {"match", Rule::Match},
      {"pat_v", Rule::PatV},   {"pat_x", Rule::PatX},  {"abs_p", Rule::AbsP},
      {"app_p", Rule::AppP},   {"pair_p", Rule::PairP}, {"pat_p", Rule::PatP},
  };
  for (auto& [n, r] : table)
    if (name == n) return r;
  return std::nullopt;
}

bool is_pattern_rule(Rule r) {
  return r == Rule::PatV || r == Rule::PatX || r == Rule::PatP;
}

Derivation mk_node(Rule rule, Judgment conclusion, std::vector<Derivation> premises) {
  return std::make_shared<DerivationNode>(
      DerivationNode{rule, std::move(conclusion), std::move(premises)});
}

long long deriv_size(const Derivation& d) {
  long long n = d->rule == Rule::Many ? 0 : 1;
  for (auto& p : d->premises) n += deriv_size(p);
  return n;
}

bool judgment_equal(const Judgment& a, const Judgment& b) {
  if (!context_equal(a.ctx, b.ctx)) return false;
  if (a.is_pattern_judgment() != b.is_pattern_judgment()) return false;
  if (a.is_pattern_judgment()) {
    if (!pattern_equal(a.pattern_subject(), b.pattern_subject())) return false;
  } else {
    if (!alpha_eq(a.term_subject(), b.term_subject())) return false;
  }
  if (a.assigns_mset() != b.assigns_mset()) return false;
  if (a.assigns_mset()) {
    if (!mset_equal(a.mset_assigned(), b.mset_assigned())) return false;
  } else {
    if (!type_equal(a.type_assigned(), b.type_assigned())) return false;
  }
  return a.indices == b.indices && a.pat_indices == b.pat_indices;
}

bool derivation_equal(const Derivation& a, const Derivation& b) {
  if (a->rule != b->rule) return false;
  if (!judgment_equal(a->conclusion, b->conclusion)) return false;
  if (a->premises.size() != b->premises.size()) return false;
  if (a->rule == Rule::Many) {
    // Match premises up to permutation.
    std::vector<bool> used(b->premises.size(), false);
    for (auto& pa : a->premises) {
      bool found = false;
      for (std::size_t j = 0; j < b->premises.size(); ++j) {
        if (!used[j] && derivation_equal(pa, b->premises[j])) {
          used[j] = true;
          found = true;
          break;
        }
      }
      if (!found) return false;
    }
    return true;
  }
  for (std::size_t i = 0; i < a->premises.size(); ++i)
    if (!derivation_equal(a->premises[i], b->premises[i])) return false;
  return true;
}

CheckResult check_ok() { return CheckResult{}; }
CheckResult check_fail(const std::string& path, const std::string& reason) {
  return CheckResult{false, path, reason};
}

// ---------------------------------------------------------------------------
// JSON serialization
// ---------------------------------------------------------------------------

namespace {

json to_json(const Derivation& d) {
  json node;
  node["rule"] = rule_name(d->rule);
  json ctx = json::array();
  for (auto& [name, ms] : d->conclusion.ctx.entries) ctx.push_back({name, print_mset(ms)});
  node["context"] = std::move(ctx);
  node["subject"] = d->conclusion.is_pattern_judgment() ? print(d->conclusion.pattern_subject())
                                                        : print(d->conclusion.term_subject());
  node["assigned"] = d->conclusion.assigns_mset() ? print_mset(d->conclusion.mset_assigned())
                                                  : print_type(d->conclusion.type_assigned());
  if (d->conclusion.indices) {
    const auto& c = *d->conclusion.indices;
    node["indices"] = {c.b, c.e, c.m, c.f};
  } else if (d->conclusion.pat_indices) {
    const auto& c = *d->conclusion.pat_indices;
    node["indices"] = {c.e, c.m, c.f};
  }
  json premises = json::array();
  for (auto& p : d->premises) premises.push_back(to_json(p));
  node["premises"] = std::move(premises);
  return node;
}

Derivation from_json(const json& node) {
  if (!node.is_object()) throw FormatError("derivation node must be an object");
  if (!node.contains("rule") || !node["rule"].is_string())
    throw FormatError("derivation node missing string field 'rule'");
  auto rule = rule_from_name(node["rule"].get<std::string>());
  if (!rule) throw FormatError("unknown rule name '" + node["rule"].get<std::string>() + "'");

  Judgment j;
  if (!node.contains("context") || !node["context"].is_array())
    throw FormatError("derivation node missing array field 'context'");
  std::vector<std::pair<Name, MultisetType>> entries;
  for (auto& e : node["context"]) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string())
      throw FormatError("context entries must be [name, multiset] pairs");
    entries.emplace_back(e[0].get<std::string>(), parse_mset(e[1].get<std::string>()));
  }
  j.ctx = context_of(std::move(entries));

  if (!node.contains("subject") || !node["subject"].is_string())
    throw FormatError("derivation node missing string field 'subject'");
  try {
    if (is_pattern_rule(*rule))
      j.subject = parse_pattern(node["subject"].get<std::string>());
    else
      j.subject = parse(node["subject"].get<std::string>());
  } catch (const ParseError& e) {
    throw FormatError(std::string("bad subject: ") + e.what());
  } catch (const LinearityError& e) {
    throw FormatError(std::string("bad subject: ") + e.what());
  }

  if (!node.contains("assigned") || !node["assigned"].is_string())
    throw FormatError("derivation node missing string field 'assigned'");
  j.assigned = parse_assigned(node["assigned"].get<std::string>());

  if (node.contains("indices")) {
    const auto& idx = node["indices"];
    if (!idx.is_array() || !(idx.size() == 3 || idx.size() == 4))
      throw FormatError("'indices' must hold 3 (pattern) or 4 (term) integers");
    for (auto& v : idx)
      if (!v.is_number_integer()) throw FormatError("'indices' must hold integers");
    if (idx.size() == 4)
      j.indices = Counters{idx[0].get<long long>(), idx[1].get<long long>(),
                           idx[2].get<long long>(), idx[3].get<long long>()};
    else
      j.pat_indices =
          PatIndices{idx[0].get<long long>(), idx[1].get<long long>(), idx[2].get<long long>()};
  }

  std::vector<Derivation> premises;
  if (node.contains("premises")) {
    if (!node["premises"].is_array()) throw FormatError("'premises' must be an array");
    for (auto& p : node["premises"]) premises.push_back(from_json(p));
  }
  return mk_node(*rule, std::move(j), std::move(premises));
}

}  // namespace

std::string serialize(const Derivation& d) { return to_json(d).dump(2) + "\n"; }

Derivation deserialize(const std::string& document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("invalid JSON: ") + e.what());
  }
  return from_json(doc);
}

}  // namespace patcalc
