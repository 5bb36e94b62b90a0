#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <sstream>

#include "cli.hpp"

using namespace patcalc;
using cli::RunConfig;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(RunConfig config) {
  std::ostringstream out, err;
  int code = cli::run_command(config, out, err);
  return {code, out.str(), err.str()};
}

std::string golden(const char* name) { return std::string(GOLDEN_DIR) + "/" + name; }

bool patterns_all_linear(const Term& t) {
  if (is<Var>(t)) return true;
  if (is<Abs>(t))
    return pattern_linear(as<Abs>(t).pattern) && patterns_all_linear(as<Abs>(t).body);
  if (is<Pair>(t))
    return patterns_all_linear(as<Pair>(t).fst) && patterns_all_linear(as<Pair>(t).snd);
  if (is<App>(t))
    return patterns_all_linear(as<App>(t).fun) && patterns_all_linear(as<App>(t).arg);
  return pattern_linear(as<Match>(t).pattern) && patterns_all_linear(as<Match>(t).body) &&
         patterns_all_linear(as<Match>(t).arg);
}

}  // namespace

TEST_CASE("macro expansion") {
  Term t = cli::expand_macros(parse("I K"));
  CHECK(alpha_eq(t, parse("(\\z. z) (\\x. \\y. x)")));
  // binders shadow macros
  Term s = cli::expand_macros(parse("\\I. I"));
  CHECK(alpha_eq(s, parse("\\I. I")));
  Term o = cli::expand_macros(parse("Omega"));
  CHECK(alpha_eq(o, parse("(\\z. z z) (\\z. z z)")));
}

TEST_CASE("normalize command") {
  RunConfig c;
  c.command = "normalize";
  c.expr = "(\\z.z) x";
  Run r = run(c);
  CHECK(r.code == 0);
  CHECK(r.out ==
        "b (\\z. z) x\n"
        "e z[z/x]\n"
        "FINAL x\n"
        "COUNTERS 1 1 0\n");

  c.expr = "x";
  r = run(c);
  CHECK(r.code == 0);
  CHECK(r.out == "FINAL x\nCOUNTERS 0 0 0\n");

  c.expr = "Omega";
  c.max_steps = 10;
  CHECK(run(c).code == 2);

  c.expr = "\\<x,x>. x";
  CHECK(run(c).code == 1);
  c.expr = "((";
  CHECK(run(c).code == 1);
}

TEST_CASE("verify command") {
  RunConfig c;
  c.command = "verify";
  c.expr = "(\\<x,y>. (\\<w,z>. w y z) x) <<K, a>, b>";
  Run r = run(c);
  CHECK(r.code == 0);
  CHECK(r.out == "SYNTH 4 6 2 0 | OBS 4 6 2 0 | MATCH yes\n");

  c.expr = "(\\z. (\\<x,y>. I) z z) <u, v>";
  r = run(c);
  CHECK(r.code == 0);
  CHECK(r.out == "SYNTH 3 4 1 1 | OBS 3 4 1 1 | MATCH yes\n");

  c.expr = "x";
  r = run(c);
  CHECK(r.code == 0);
  CHECK(r.out == "SYNTH 0 0 0 0 | OBS 0 0 0 0 | MATCH yes\n");

  c.expr = "Omega";
  c.max_steps = 40;
  CHECK(run(c).code == 2);
}

TEST_CASE("check command against the golden files") {
  RunConfig c;
  c.command = "check";
  c.system = "e";
  c.file = golden("example2.deriv.json");
  Run r = run(c);
  CHECK(r.code == 0);
  CHECK(r.out == "Ok TIGHT (4,6,2,0)\n");

  c.file = golden("example3.deriv.json");
  r = run(c);
  CHECK(r.code == 0);
  CHECK(r.out == "Ok TIGHT (3,4,1,1)\n");

  // the exact system's constants are rejected by the upper checker
  c.system = "u";
  c.file = golden("example2.deriv.json");
  CHECK(run(c).code == 3);

  // corrupting one index is flagged with a node path
  {
    std::ifstream in(golden("example2.deriv.json"));
    std::stringstream buf;
    buf << in.rdbuf();
    std::string doc = buf.str();
    auto pos = doc.find("4,\n    6,\n    2,\n    0");
    REQUIRE(pos != std::string::npos);
    doc.replace(pos, 1, "9");
    std::ofstream outf("corrupted.deriv.json");
    outf << doc;
  }
  c.system = "e";
  c.file = "corrupted.deriv.json";
  r = run(c);
  CHECK(r.code == 3);
  CHECK(r.out.find("violation at [root]") != std::string::npos);

  c.file = "does-not-exist.deriv.json";
  CHECK(run(c).code == 1);
}

TEST_CASE("synthesize round trips through check") {
  RunConfig c;
  c.command = "synthesize";
  c.expr = "(\\<x,y>. y) <a, b>";
  c.out_path = "synth_roundtrip.deriv.json";
  REQUIRE(run(c).code == 0);

  RunConfig k;
  k.command = "check";
  k.file = "synth_roundtrip.deriv.json";
  k.system = "e";
  Run r = run(k);
  CHECK(r.code == 0);
  CHECK(r.out.substr(0, 8) == "Ok TIGHT");

  c.system = "u";
  c.out_path = "synth_roundtrip_u.deriv.json";
  REQUIRE(run(c).code == 0);
  k.system = "u";
  k.file = "synth_roundtrip_u.deriv.json";
  CHECK(run(k).code == 0);
}

TEST_CASE("generator is deterministic per seed") {
  std::mt19937_64 a(7), b(7), c(8);
  bool all_equal = true, any_diff = false;
  for (int i = 0; i < 50; ++i) {
    Term ta = cli::generate_term(a, 12);
    Term tb = cli::generate_term(b, 12);
    Term tc = cli::generate_term(c, 12);
    all_equal = all_equal && term_equal(ta, tb);
    any_diff = any_diff || !term_equal(ta, tc);
    CHECK(patterns_all_linear(ta));
  }
  CHECK(all_equal);
  CHECK(any_diff);
}

TEST_CASE("fuzz runs are reproducible and clean") {
  RunConfig c;
  c.command = "fuzz";
  c.seed = 11;
  c.count = 40;
  c.size = 10;
  Run r1 = run(c);
  Run r2 = run(c);
  CHECK(r1.code == 0);
  CHECK(r1.out == r2.out);
}

namespace {

// Collapses every binder onto a tiny name pool that overlaps the free pool,
// manufacturing shadowing and capture hazards the unique-name generator
// avoids.
Pattern collapse_pattern(const Pattern& p, std::map<Name, Name>& env, long long& k,
                         NameSet& used) {
  static const std::vector<Name> pool = {"x", "y", "a"};
  if (is_pvar(p)) {
    Name fresh;
    for (std::size_t tries = 0; tries < pool.size(); ++tries) {
      const Name& cand = pool[(k + tries) % pool.size()];
      if (!used.count(cand)) {
        fresh = cand;
        break;
      }
    }
    if (fresh.empty()) fresh = "x" + std::to_string(k);  // > 3 variables in one pattern
    ++k;
    used.insert(fresh);
    env[as_pvar(p).name] = fresh;
    return pvar(fresh);
  }
  Pattern l = collapse_pattern(as_ppair(p).left, env, k, used);
  Pattern r = collapse_pattern(as_ppair(p).right, env, k, used);
  return ppair(l, r);
}

Term collapse_names(const Term& t, std::map<Name, Name> env, long long& k) {
  if (is<Var>(t)) {
    auto it = env.find(as<Var>(t).name);
    return it == env.end() ? t : var(it->second);
  }
  if (is<Abs>(t)) {
    std::map<Name, Name> env2 = env;
    NameSet used;
    Pattern p = collapse_pattern(as<Abs>(t).pattern, env2, k, used);
    return abs(p, collapse_names(as<Abs>(t).body, env2, k));
  }
  if (is<Pair>(t))
    return pair(collapse_names(as<Pair>(t).fst, env, k), collapse_names(as<Pair>(t).snd, env, k));
  if (is<App>(t))
    return app(collapse_names(as<App>(t).fun, env, k), collapse_names(as<App>(t).arg, env, k));
  const auto& m = as<Match>(t);
  Term arg = collapse_names(m.arg, env, k);
  std::map<Name, Name> env2 = env;
  NameSet used;
  Pattern p = collapse_pattern(m.pattern, env2, k, used);
  return match(collapse_names(m.body, env2, k), p, arg);
}

}  // namespace

TEST_CASE("properties survive heavy name collisions") {
  std::mt19937_64 rng(21);
  long long k = 0;
  int normalizing = 0;
  for (int i = 0; i < 250; ++i) {
    Term raw = cli::generate_term(rng, 12);
    Term t = collapse_names(raw, {}, k);
    CAPTURE(print(t));
    REQUIRE(patterns_all_linear(t));
    NormalizeResult norm = head_normalize(t, 200);
    if (norm.budget_exceeded) continue;
    if (classify(norm.trace.final) == Classification::HeadClash) continue;
    ++normalizing;
    TightReport r = verify_exact(t, 200);
    CHECK(r.match);
    CHECK(check_e(r.derivation).ok);
    ReplayResult replay = forward_replay_check(r.derivation, norm.trace);
    CAPTURE(replay.detail);
    CHECK(replay.ok);
    Derivation upper = synthesize_u(t, 200);
    CHECK(check_u(upper).ok);
    CHECK(norm.counters.b + norm.counters.e + norm.counters.m <= deriv_size(upper));
  }
  CHECK(normalizing > 100);
}

TEST_CASE("random peaks join within a small budget") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    Term t = cli::generate_term(rng, 7);
    CAPTURE(print(t));
    CHECK(joinability_probe(t, 8));
  }
}

TEST_CASE("normalize with the probing strategy") {
  RunConfig c;
  c.command = "normalize";
  c.strategy = "full-probe";
  c.expr = "(\\x. x) ((\\y. y) z)";
  Run r = run(c);
  CHECK(r.code == 0);
  CHECK(r.out == "JOINABLE yes\n");
}

TEST_CASE("fuzzing under the alternative pair reading finds a counterexample") {
  RunConfig c;
  c.command = "fuzz";
  c.seed = 3;
  c.count = 400;
  c.size = 14;
  c.pair_reading = PairReading::Paper;
  Run r = run(c);
  CHECK(r.code == 4);
  CHECK(r.out.find("FAIL exactness") != std::string::npos);

  c.pair_reading = PairReading::Sum;
  CHECK(run(c).code == 0);
}

TEST_CASE("the alternative pair reading is caught by the verify command") {
  // direct witness: consumed pair whose right component has b != e
  RunConfig c;
  c.command = "verify";
  c.expr = "(\\<y,f>. f <a, b>) <c, \\<p,q>. p>";
  c.pair_reading = PairReading::Paper;
  Run r = run(c);
  CHECK(r.code == 4);
  CHECK(r.out.find("MATCH no") != std::string::npos);

  c.pair_reading = PairReading::Sum;
  CHECK(run(c).code == 0);
}
