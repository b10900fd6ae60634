#include <fstream>
#include <set>
#include <sstream>

#include "cdgen/combinator.hpp"
#include "cdgen/dag_grammar.hpp"
#include "doctest.h"

using namespace cdgen;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE_MESSAGE(in.good(), "cannot open " << path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string grammar_path(const std::string& name) { return std::string(CDGEN_TEST_DATA) + "/grammars/" + name + ".dag"; }

struct Golden {
  DagGrammar grammar;
  std::uint64_t csize = 0, tsize = 0, height = 0;
  Formula theorem;
};

Golden load(const std::string& name) {
  std::string text = slurp(grammar_path(name));
  std::istringstream header(text.substr(0, text.find('\n')));
  std::string hash, k1, k2, k3;
  Golden g{parse_grammar(text), 0, 0, 0, Formula::var(0)};
  header >> hash >> k1 >> g.csize >> k2 >> g.tsize >> k3 >> g.height;
  REQUIRE(k1 == "csize");
  REQUIRE(g.grammar.productions().back().annotation);
  g.theorem = *g.grammar.productions().back().annotation;
  return g;
}

// Drops annotations so grammars compare by productions only.
std::string bare(const DagGrammar& g) {
  DagGrammar out;
  for (const auto& p : g.productions()) out.add_production(p.lhs, p.rhs);
  for (const auto& r : g.roots()) out.add_root(r);
  return print_grammar(out);
}

std::set<std::string> shared_terms(const DagGrammar& g) {
  std::set<std::string> out;
  for (const auto& p : g.productions()) out.insert(print_proof_term(g.expand(p.lhs)));
  return out;
}

SchemaTable pattern_schemas() { return parse_schema_declarations(slurp(std::string(CDGEN_TEST_DATA) + "/schemas/b4_c_s.txt")); }

void check_stats(const Golden& g, const AxiomSystem& ax, const SchemaTable* schemas) {
  ProofTerm d = g.grammar.expand_root(0);
  CHECK(csize(d) == g.csize);
  CHECK(tsize(d) == g.tsize);
  CHECK(height(d) == g.height);
  CHECK(grammar_size(g.grammar) == g.csize);
  auto m = mgt(d, ax, schemas);
  REQUIRE(m);
  CHECK(*m == canonical(g.theorem));
}

}  // namespace

TEST_CASE("unit proofs from the three axioms") {
  AxiomSystem ax = AxiomSystem::table1();
  for (const char* name : {"3anim1i", "exp4b", "stoic3", "sylan11", "mp2and", "mp3an13", "mpan112", "syland", "sylani"}) {
    CAPTURE(name);
    Golden g = load(name);
    check_stats(g, ax, nullptr);
    ProofTerm d = g.grammar.expand_root(0);
    CHECK(shared_terms(compress({d}, &ax, {0, false})) == shared_terms(g.grammar));
  }
  // These listings use postorder numbering, so recompression reproduces the text.
  for (const char* name : {"3anim1i", "exp4b", "stoic3", "sylan11", "mp2and"}) {
    Golden g = load(name);
    CHECK(bare(compress({g.grammar.expand_root(0)}, &ax, {0, false})) == bare(g.grammar));
  }
}

TEST_CASE("pattern proofs and their two conversions") {
  AxiomSystem ax = AxiomSystem::table1();
  AxiomSystem with_prims = ax;
  add_primitive_combinators(with_prims);
  SchemaTable schemas = pattern_schemas();
  for (const char* base : {"exp41", "imp41"}) {
    CAPTURE(base);
    Golden pat = load(std::string(base) + "_patterns");
    Golden comb = load(std::string(base) + "_combinators");
    Golden axs = load(std::string(base) + "_axioms");
    check_stats(pat, ax, &schemas);
    check_stats(comb, with_prims, nullptr);
    check_stats(axs, ax, nullptr);

    ProofTerm expanded = expand_patterns(pat.grammar.expand_root(0), schemas);
    CHECK(expanded == comb.grammar.expand_root(0));
    auto eliminated = eliminate_combinators(expanded, ax);
    REQUIRE(eliminated);
    CHECK(*eliminated == axs.grammar.expand_root(0));
    CHECK(bare(compress({expanded}, &ax, {0, false})) == bare(comb.grammar));
    // The listing numbers the proofs of the primitives differently.
    CHECK(shared_terms(compress({*eliminated}, &ax, {0, false})) == shared_terms(axs.grammar));
  }
}

TEST_CASE("golden files roundtrip through the printer") {
  for (const char* name : {"3anim1i", "exp41_patterns", "exp41_axioms"}) {
    std::string canon = print_grammar(parse_grammar(slurp(grammar_path(name))));
    CHECK(print_grammar(parse_grammar(canon)) == canon);
  }
}
