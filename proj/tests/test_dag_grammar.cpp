#include <random>
#include <set>

#include "cdgen/dag_grammar.hpp"
#include "cdgen/errors.hpp"
#include "doctest.h"

using namespace cdgen;

namespace {

ProofTerm T(const char* s) { return parse_proof_term(s); }
Formula F(const char* s) { return parse_formula(s); }

const char* kD1 = "D(D(1,1),D(D(1,D(1,1)),D(1,D(1,1))))";

ProofTerm random_term(std::mt19937& rng, int budget) {
  if (budget == 0) return ProofTerm::axiom(std::to_string(rng() % 3 + 1));
  int left = static_cast<int>(rng() % budget);
  if (rng() % 7 == 0 && budget >= 2) {
    int rest = budget - 1;
    return ProofTerm::pattern("p", {random_term(rng, rest / 2), random_term(rng, rest - rest / 2)});
  }
  return ProofTerm::det(random_term(rng, left), random_term(rng, budget - 1 - left));
}

// Distinct compound subterms by their printed form.
void distinct_compound(const ProofTerm& t, std::set<std::string>& out) {
  if (!t.is_compound()) return;
  out.insert(print_proof_term(t));
  for (const auto& c : t.children()) distinct_compound(c, out);
}

}  // namespace

TEST_CASE("compress the worked example") {
  AxiomSystem ax = AxiomSystem::table1();
  DagGrammar g = compress({T(kD1)}, &ax);
  CHECK(print_grammar(g) == "4 -> D(1,1)\n5 -> D(1,4)\nStart -> D(4,D(5,5))\n");
  CHECK(grammar_size(g) == 4);
  CHECK(g.expand("Start") == T(kD1));
  CHECK(ref_count(g, "4") == 2);
  CHECK(ref_count(g, "5") == 2);
  CHECK(ref_count(g, "Start") == 1);
  CHECK(save_value(g, "4") == 1);
  CHECK(save_value(g, "5") == 1);
  CHECK(save_value(g, "Start") == 0);
  CHECK(grammar_mgt(g, "Start", ax) == mgt(T(kD1), ax));
  CHECK(grammar_mgt(g, "5", ax) == mgt(T("D(1,D(1,1))"), ax));
  CHECK_THROWS_AS(g.expand("6"), ConfigError);
  CHECK_THROWS_AS(ref_count(g, "6"), ConfigError);

  DagGrammar u = unfold(g, "5");
  CHECK(print_grammar(u) == "4 -> D(1,1)\nStart -> D(4,D(D(1,4),D(1,4)))\n");
  CHECK(grammar_size(u) - grammar_size(g) == 1);
  CHECK(u.expand("Start") == T(kD1));
}

TEST_CASE("compress edge cases") {
  DagGrammar a = compress({T("1")});
  CHECK(a.productions().empty());
  REQUIRE(a.roots().size() == 1);
  CHECK(a.roots()[0] == T("1"));
  CHECK(grammar_size(a) == 0);
  CHECK(a.expand_root(0) == T("1"));
  CHECK(print_grammar(a) == "roots 1\n");
  CHECK(print_grammar(parse_grammar(print_grammar(a))) == "roots 1\n");

  DagGrammar empty;
  CHECK(grammar_size(empty) == 0);
  CHECK(print_grammar(empty).empty());

  // Numbering starts above every numeric leaf.
  DagGrammar b = compress({T("D(7,7)")}, nullptr, {0, false});
  CHECK(print_grammar(b) == "8 -> D(7,7)\n");
  DagGrammar c = compress({T("D(1,1)")}, nullptr, {10, false});
  CHECK(print_grammar(c) == "10 -> D(1,1)\n");

  // Shared roots and repeated inputs.
  DagGrammar m = compress({T("D(1,1)"), T("D(D(1,1),2)")}, nullptr);
  CHECK(print_grammar(m) == "3 -> D(1,1)\n4 -> D(3,2)\nroots 3 4\n");
  CHECK(ref_count(m, "3") == 2);
}

TEST_CASE("compress properties on random terms") {
  std::mt19937 rng(17);
  AxiomSystem ax = AxiomSystem::table1();
  for (int i = 0; i < 300; ++i) {
    ProofTerm d = random_term(rng, static_cast<int>(rng() % 16));
    DagGrammar g = compress({d}, &ax);
    std::set<std::string> distinct;
    distinct_compound(d, distinct);
    CHECK(grammar_size(g) == csize(d));
    CHECK(grammar_size(g) == distinct.size());
    CHECK(g.productions().size() <= csize(d));
    CHECK(g.expand_root(0) == d);
    // Every production except the root is shared.
    for (const auto& p : g.productions()) {
      CHECK(p.rhs.is_compound());
      if (p.lhs != "Start") CHECK(ref_count(g, p.lhs) >= 2);
    }
    // Repeating an input changes only root naming.
    DagGrammar twice = compress({d, d}, &ax);
    DagGrammar once = compress({d}, &ax, {0, false});
    if (d.is_compound()) {
      REQUIRE(twice.productions().size() == once.productions().size());
      for (std::size_t k = 0; k < once.productions().size(); ++k) {
        CHECK(twice.productions()[k].lhs == once.productions()[k].lhs);
        CHECK(twice.productions()[k].rhs == once.productions()[k].rhs);
      }
    }
    // Unfolding changes the size by the save value and keeps the expansion.
    for (const auto& p : g.productions()) {
      DagGrammar u = unfold(g, p.lhs);
      CHECK(static_cast<std::int64_t>(grammar_size(u)) - static_cast<std::int64_t>(grammar_size(g)) ==
            save_value(g, p.lhs));
      CHECK(u.expand_root(0) == d);
    }
    // Unfolding everything leaves the plain tree.
    DagGrammar flat = g;
    while (!flat.productions().empty()) flat = unfold(flat, flat.productions().back().lhs);
    CHECK(flat.roots()[0] == d);
    CHECK(grammar_size(flat) == tsize(d));
  }
}

TEST_CASE("multi-term roundtrip") {
  std::mt19937 rng(3);
  for (int i = 0; i < 100; ++i) {
    std::vector<ProofTerm> ts;
    std::set<std::string> distinct;
    for (int k = 0, n = 1 + static_cast<int>(rng() % 4); k < n; ++k) {
      ts.push_back(random_term(rng, static_cast<int>(rng() % 10)));
      distinct_compound(ts.back(), distinct);
    }
    DagGrammar g = compress(ts);
    CHECK(grammar_size(g) == distinct.size());
    REQUIRE(g.roots().size() == ts.size());
    for (std::size_t k = 0; k < ts.size(); ++k) CHECK(g.expand_root(k) == ts[k]);
    DagGrammar back = parse_grammar(print_grammar(g));
    CHECK(print_grammar(back) == print_grammar(g));
    for (std::size_t k = 0; k < ts.size(); ++k) CHECK(back.expand_root(k) == ts[k]);
  }
}

TEST_CASE("grammar file format") {
  const char* text =
      "4 -> D(D(B,1),1) : (x => (y => (z => x)))\n"
      "Start -> D(4,D(4,D(4,1)))\n";
  DagGrammar g = parse_grammar(text);
  CHECK(print_grammar(g) == text);
  AxiomSystem ax = AxiomSystem::table1();
  ax.add("B", F("(x => y) => ((z => x) => (z => y))"));
  CHECK(grammar_mgt(g, "4", ax) == g.find("4")->annotation);
  CHECK(grammar_mgt(g, "Start", ax) == F("x => (y => (z => (u => (v => (w => (x1 => (y1 => x1)))))))"));

  DagGrammar loose = parse_grammar(
      "# comment\n"
      "4 = D(2, D(1, 3))\n"
      "\n"
      "5 \xE2\x86\x92 D(4, 4)   # trailing\n");
  CHECK(print_grammar(loose) == "4 -> D(2,D(1,3))\n5 -> D(4,4)\n");
  CHECK(loose.roots()[0] == T("5"));

  CHECK_THROWS_AS(parse_grammar("4 -> D(5,1)\n5 -> D(1,1)\n"), ParseError);
  CHECK_THROWS_AS(parse_grammar("4 -> D(1,1)\n4 -> D(1,2)\n"), ParseError);
  CHECK_THROWS_AS(parse_grammar("4 D(1,1)\n"), ParseError);
  CHECK_THROWS_AS(parse_grammar("4 -> D(1,1\n"), ParseError);
  CHECK_THROWS_AS(parse_grammar("4 -> D(1,1) : x =>\n"), ParseError);
  CHECK_THROWS_AS(parse_grammar("a b -> D(1,1)\n"), ParseError);
  CHECK_THROWS_AS(parse_grammar("4 -> 4\n"), ParseError);
}
