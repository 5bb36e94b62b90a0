#include "cli.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

#include "patcalc/errors.hpp"

namespace patcalc::cli {

// ---------------------------------------------------------------------------
// Macros
// ---------------------------------------------------------------------------

Term expand_macros(const Term& t) {
  static const std::vector<std::pair<Name, const char*>> table = {
      {"I", "\\z. z"},
      {"K", "\\x1. \\y1. x1"},
      {"Delta", "\\z. z z"},
      {"Omega", "(\\z. z z) (\\z. z z)"},
  };
  Term out = t;
  for (auto& [name, src] : table) out = substitute(out, name, parse(src));
  return out;
}

// ---------------------------------------------------------------------------
// Term generator
// ---------------------------------------------------------------------------

namespace {

struct Gen {
  std::mt19937_64& rng;
  long long next_binder = 0;

  int roll(int n) { return static_cast<int>(std::uniform_int_distribution<int>(0, n - 1)(rng)); }
  Name binder() { return "v" + std::to_string(next_binder++); }
};

Pattern gen_pattern(Gen& g, int depth) {
  if (depth >= 2 || g.roll(100) < 55) return pvar(g.binder());
  return ppair(gen_pattern(g, depth + 1), gen_pattern(g, depth + 1));
}

const std::vector<Name>& free_pool() {
  static const std::vector<Name> pool = {"a", "b", "c", "w"};
  return pool;
}

Term gen_var(Gen& g, const std::vector<Name>& scope) {
  long long n = static_cast<long long>(scope.size() + free_pool().size());
  int k = g.roll(static_cast<int>(n));
  if (k < static_cast<int>(scope.size())) return var(scope[k]);
  return var(free_pool()[k - scope.size()]);
}

Term gen_term_impl(Gen& g, long long budget, std::vector<Name>& scope);

Term gen_abs(Gen& g, long long budget, std::vector<Name>& scope) {
  Pattern p = gen_pattern(g, 0);
  auto vars = pattern_vars(p);
  for (auto& v : vars) scope.push_back(v);
  Term body = gen_term_impl(g, budget - 1, scope);
  scope.resize(scope.size() - vars.size());
  return abs(p, body);
}

Term gen_term_impl(Gen& g, long long budget, std::vector<Name>& scope) {
  if (budget <= 1) return gen_var(g, scope);
  int r = g.roll(100);
  if (r < 14) return gen_var(g, scope);
  if (r < 34) return gen_abs(g, budget, scope);
  if (r < 49) {
    long long left = 1 + g.roll(static_cast<int>(budget - 1));
    return pair(gen_term_impl(g, left, scope), gen_term_impl(g, budget - left, scope));
  }
  if (r < 79) {
    long long left = 1 + g.roll(static_cast<int>(budget - 1));
    Term fun = g.roll(100) < 30 ? gen_abs(g, left, scope) : gen_term_impl(g, left, scope);
    // Occasional self-application so looping terms show up in the corpus.
    Term arg = g.roll(100) < 8 ? fun : gen_term_impl(g, budget - left, scope);
    return app(fun, arg);
  }
  long long left = 1 + g.roll(static_cast<int>(budget - 1));
  Pattern p = gen_pattern(g, 0);
  auto vars = pattern_vars(p);
  for (auto& v : vars) scope.push_back(v);
  Term body = gen_term_impl(g, left, scope);
  scope.resize(scope.size() - vars.size());
  return match(body, p, gen_term_impl(g, budget - left, scope));
}

}  // namespace

Term generate_term(std::mt19937_64& rng, long long size_budget) {
  Gen g{rng};
  std::vector<Name> scope;
  return gen_term_impl(g, size_budget, scope);
}

// ---------------------------------------------------------------------------
// Shrinking
// ---------------------------------------------------------------------------

namespace {

void positions_of(const Term& t, Position& cur, std::vector<Position>& out) {
  out.push_back(cur);
  auto descend = [&](int i, const Term& child) {
    cur.path.push_back(i);
    positions_of(child, cur, out);
    cur.path.pop_back();
  };
  if (is<Abs>(t)) descend(0, as<Abs>(t).body);
  if (is<Pair>(t)) {
    descend(0, as<Pair>(t).fst);
    descend(1, as<Pair>(t).snd);
  }
  if (is<App>(t)) {
    descend(0, as<App>(t).fun);
    descend(1, as<App>(t).arg);
  }
  if (is<Match>(t)) {
    descend(0, as<Match>(t).body);
    descend(1, as<Match>(t).arg);
  }
}

}  // namespace

std::vector<Term> shrink_candidates(const Term& t) {
  std::vector<Position> positions;
  Position root;
  positions_of(t, root, positions);
  std::vector<Term> out;
  for (auto& pos : positions) {
    Term sub = *subterm_at(t, pos);
    if (is<Match>(sub)) out.push_back(replace_at(t, pos, as<Match>(sub).body));
    if (!is<Var>(sub)) out.push_back(replace_at(t, pos, var("a")));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Command implementations
// ---------------------------------------------------------------------------

namespace {

struct InputError {
  std::string message;
};

Term load_term(const RunConfig& config) {
  std::string text;
  if (config.expr) {
    text = *config.expr;
  } else if (config.file) {
    std::ifstream in(*config.file);
    if (!in) throw InputError{"cannot open " + *config.file};
    std::ostringstream buf;
    buf << in.rdbuf();
    text = buf.str();
  } else {
    throw InputError{"no input: pass -e EXPR or -f FILE"};
  }
  Term t = parse(text);
  return config.macros ? expand_macros(t) : t;
}

std::string load_document(const RunConfig& config) {
  if (!config.file) throw InputError{"check needs a derivation file: -f FILE"};
  std::ifstream in(*config.file);
  if (!in) throw InputError{"cannot open " + *config.file};
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_output(const RunConfig& config, std::ostream& out, const std::string& payload) {
  if (config.out_path.empty()) {
    out << payload;
    return;
  }
  std::ofstream f(config.out_path);
  if (!f) throw InputError{"cannot write " + config.out_path};
  f << payload;
}

int cmd_normalize(const RunConfig& config, std::ostream& out) {
  Term t = load_term(config);
  if (config.strategy == "full-probe") {
    long long budget = std::min<long long>(config.max_steps, 20);
    bool joined = joinability_probe(t, budget);
    out << "JOINABLE " << (joined ? "yes" : "no") << '\n';
    return joined ? 0 : 4;
  }
  NormalizeResult r = head_normalize(t, config.max_steps);
  out << trace_to_text(r.trace, r.counters);
  return r.budget_exceeded ? 2 : 0;
}

int cmd_classify(const RunConfig& config, std::ostream& out) {
  Term t = load_term(config);
  Classification c = classify(t);
  out << classification_name(c);
  if (c == Classification::Canonical || c == Classification::PureCanonical)
    out << " size " << canonical_size(t);
  out << '\n';
  return 0;
}

int cmd_check(const RunConfig& config, std::ostream& out) {
  Derivation d = deserialize(load_document(config));
  CheckResult r = config.system == "u" ? check_u(d) : check_e(d, EConfig{config.pair_reading});
  if (!r.ok) {
    out << "violation at [" << (r.node_path.empty() ? "root" : r.node_path) << "]: " << r.reason
        << '\n';
    return 3;
  }
  out << "Ok";
  if (config.system == "u") {
    out << " size " << deriv_size(d) << '\n';
  } else {
    out << (is_tight_derivation(d) ? " TIGHT" : " NOT-TIGHT");
    if (d->conclusion.indices) {
      const Counters& c = *d->conclusion.indices;
      out << " (" << c.b << "," << c.e << "," << c.m << "," << c.f << ")";
    }
    out << '\n';
  }
  return 0;
}

int cmd_synthesize(const RunConfig& config, std::ostream& out) {
  Term t = load_term(config);
  Derivation d;
  if (config.system == "u")
    d = synthesize_u(t, config.max_steps);
  else
    d = synthesize_tight(t, config.max_steps, EConfig{config.pair_reading});
  write_output(config, out, serialize(d));
  if (config.system == "u") {
    out << "size " << deriv_size(d) << '\n';
  } else {
    const Counters& c = *d->conclusion.indices;
    out << "indices (" << c.b << "," << c.e << "," << c.m << "," << c.f << ")\n";
  }
  return 0;
}

int cmd_verify(const RunConfig& config, std::ostream& out) {
  Term t = load_term(config);
  TightReport r = verify_exact(t, config.max_steps, EConfig{config.pair_reading});
  out << tight_report_line(r) << '\n';
  return r.match ? 0 : 4;
}

struct FuzzStats {
  long long normalizing = 0, diverging = 0, clashing = 0;
  std::map<std::string, long long> passes;
};

// Property battery for one generated term; returns a failure label or "".
std::string check_term(const Term& t, const RunConfig& config, FuzzStats& stats) {
  const EConfig ecfg{config.pair_reading};
  const long long budget = 200;

  // Determinism and strategy/classification agreement along the whole run.
  Term cur = t;
  for (long long i = 0; i <= budget; ++i) {
    auto rules = applicable_head_rules(cur);
    if (rules.size() > 1) return "determinism";
    auto s = head_step(cur);
    if (s.has_value() == rules.empty()) return "determinism";
    Classification cls = classify(cur);
    bool canonical = cls == Classification::Canonical || cls == Classification::PureCanonical;
    if (canonical && s) return "classify-agreement";
    if (!s && !canonical && cls != Classification::HeadClash) return "classify-agreement";
    if (s && cls != Classification::HeadReducible) return "classify-agreement";
    if (!s) break;
    cur = s->first;
  }
  stats.passes["determinism"]++;
  stats.passes["classify-agreement"]++;

  if (!alpha_eq(parse(print(t)), t)) return "print-parse-round-trip";
  stats.passes["print-parse-round-trip"]++;

  NormalizeResult norm = head_normalize(t, budget);
  if (norm.budget_exceeded) {
    stats.diverging++;
    try {
      synthesize_tight(t, budget, ecfg);
      return "diverging-term-synthesized";
    } catch (const NotHeadNormalizingError&) {
    }
    stats.passes["divergence-consistency"]++;
    return "";
  }
  Classification final_cls = classify(norm.trace.final);
  if (final_cls == Classification::HeadClash) {
    stats.clashing++;
    try {
      synthesize_tight(t, budget, ecfg);
      return "clashing-term-synthesized";
    } catch (const NotCanonicalError&) {
    }
    stats.passes["clash-consistency"]++;
    return "";
  }
  stats.normalizing++;

  // Exactness: synthesized counters equal observed ones.
  TightReport report = verify_exact(t, budget, ecfg);
  if (!report.match) return "exactness";
  stats.passes["exactness"]++;

  if (!check_e(report.derivation, ecfg).ok) return "check-e";
  if (!is_tight_derivation(report.derivation)) return "tightness";
  stats.passes["check-e"]++;

  ReplayResult replay = forward_replay_check(report.derivation, norm.trace, ecfg);
  if (!replay.ok) return "exact-replay";
  stats.passes["exact-replay"]++;

  // Upper bounds with a strict-decrease replay.
  Derivation upper = synthesize_u(t, budget);
  if (!check_u(upper).ok) return "check-u";
  long long k = norm.counters.b + norm.counters.e + norm.counters.m;
  if (k > deriv_size(upper)) return "upper-bound";
  Term cur2 = t;
  Derivation d = upper;
  while (auto s = head_step(cur2)) {
    Derivation next = subject_reduce_u(d, cur2, s->second);
    if (deriv_size(next) >= deriv_size(d)) return "upper-strict-decrease";
    if (!context_equal(next->conclusion.ctx, d->conclusion.ctx)) return "upper-judgment";
    d = next;
    cur2 = s->first;
  }
  stats.passes["upper-bound"]++;

  // Relevance over every node of the tight derivation.
  std::function<bool(const Derivation&)> relevant = [&](const Derivation& n) {
    if (!n->conclusion.is_pattern_judgment()) {
      NameSet fv = free_vars(n->conclusion.term_subject());
      for (auto& x : n->conclusion.ctx.domain())
        if (!fv.count(x)) return false;
    }
    for (auto& p : n->premises)
      if (!relevant(p)) return false;
    return true;
  };
  if (!relevant(report.derivation)) return "relevance";
  stats.passes["relevance"]++;

  return "";
}

int cmd_fuzz(const RunConfig& config, std::ostream& out) {
  std::mt19937_64 rng(config.seed);
  FuzzStats stats;
  for (long long i = 0; i < config.count; ++i) {
    Term t = generate_term(rng, config.size);
    std::string failure = check_term(t, config, stats);
    if (!failure.empty()) {
      // Shrink while the same failure label persists.
      Term witness = t;
      for (bool shrunk = true; shrunk;) {
        shrunk = false;
        for (const Term& candidate : shrink_candidates(witness)) {
          FuzzStats scratch;
          if (check_term(candidate, config, scratch) == failure) {
            witness = candidate;
            shrunk = true;
            break;
          }
        }
      }
      out << "FAIL " << failure << " on term: " << print(witness) << '\n';
      out << "seed " << config.seed << " index " << i << " original: " << print(t) << '\n';
      return 4;
    }
  }
  out << "fuzz: " << config.count << " terms, seed " << config.seed << ", size<=" << config.size
      << '\n';
  out << "split: " << stats.normalizing << " normalizing, " << stats.diverging << " diverging, "
      << stats.clashing << " clashing\n";
  for (auto& [name, n] : stats.passes) out << "  " << name << ": " << n << '\n';
  return 0;
}

}  // namespace

int run_command(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    if (config.command == "normalize") return cmd_normalize(config, out);
    if (config.command == "classify") return cmd_classify(config, out);
    if (config.command == "check") return cmd_check(config, out);
    if (config.command == "synthesize") return cmd_synthesize(config, out);
    if (config.command == "verify") return cmd_verify(config, out);
    if (config.command == "fuzz") return cmd_fuzz(config, out);
    err << "unknown command: " << config.command << '\n';
    return 1;
  } catch (const InputError& e) {
    err << "error: " << e.message << '\n';
    return 1;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return 1;
  } catch (const LinearityError& e) {
    err << "parse error: " << e.what() << '\n';
    return 1;
  } catch (const FormatError& e) {
    err << "format error: " << e.what() << '\n';
    return 1;
  } catch (const NotHeadNormalizingError& e) {
    err << "budget: " << e.what() << '\n';
    return 2;
  } catch (const NotCanonicalError& e) {
    err << "not canonical: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace patcalc::cli
