#include <functional>
#include <random>

#include "cdgen/combinator.hpp"
#include "cdgen/errors.hpp"
#include "doctest.h"

using namespace cdgen;

namespace {

ProofTerm T(const char* s) { return parse_proof_term(s); }
Formula F(const char* s) { return parse_formula(s); }

ProofTerm random_term(std::mt19937& rng, int budget, std::uint32_t params) {
  if (budget == 0) {
    std::uint32_t pick = rng() % (3 + params);
    if (pick < 3) return ProofTerm::axiom(std::to_string(pick + 1));
    return ProofTerm::param(pick - 2);
  }
  int left = static_cast<int>(rng() % budget);
  return ProofTerm::det(random_term(rng, left, params), random_term(rng, budget - 1 - left, params));
}

}  // namespace

TEST_CASE("principal types of the primitives") {
  CHECK(primitive_type("B") == F("(x => y) => ((z => x) => (z => y))"));
  CHECK(primitive_type("C4") == F("(x => (y => z)) => ((u => x) => (y => (u => z)))"));
  CHECK(mgt(T("D(D(2,D(1,2)),1)"), AxiomSystem::table1()) == primitive_type("B"));
  CHECK_THROWS_AS(primitive_type("W"), ConfigError);
  for (const auto& n : primitive_names()) CHECK(principal_type(parse_combinator(n)) == primitive_type(n));
  // Composition of principal types, e.g. B4 C.
  auto bc = principal_type(parse_combinator("B4 C"));
  REQUIRE(bc);
  CHECK(*bc == *mgt(T("D(B4,C)"), primitive_axioms()));
}

TEST_CASE("combinator syntax") {
  ProofTerm c = parse_combinator("C4(C4(C4 C))");
  CHECK(c == T("D(C4,D(C4,D(C4,C)))"));
  CHECK(print_combinator(c) == "C4(C4(C4 C))");
  CHECK(print_combinator(parse_combinator("S (K S) K")) == "S(K S) K");
  CHECK(parse_combinator("B4 C") == T("D(B4,C)"));
  CHECK_THROWS_AS(parse_combinator("B4 X"), ParseError);
  CHECK_THROWS_AS(parse_combinator("(B"), ParseError);
  CHECK_THROWS_AS(parse_combinator(""), ParseError);
  CHECK(is_combinator_expression(c));
  CHECK_FALSE(is_combinator_expression(T("D(B,1)")));
}

TEST_CASE("standard arities") {
  CHECK(standard_arity(parse_combinator("I")) == 1);
  CHECK(standard_arity(parse_combinator("K")) == 2);
  CHECK(standard_arity(parse_combinator("B")) == 3);
  CHECK(standard_arity(parse_combinator("C")) == 3);
  CHECK(standard_arity(parse_combinator("B4")) == 4);
  CHECK(standard_arity(parse_combinator("C4(C4(C4 C))")) == 6);
}

TEST_CASE("reduction") {
  CHECK(reduce(T("D(D(D(B,1),1),D(D(D(B,1),1),D(D(D(B,1),1),1)))")) == T("D(1,D(1,D(1,D(1,D(1,D(1,1))))))"));
  CHECK(reduce(T("D(D(D(B,1),1),1)")) == T("D(1,D(1,1))"));
  CHECK(reduce(T("D(D(D(S,K),K),V1)")) == T("V1"));
  CHECK(reduce(T("D(D(D(C,V1),V2),V3)")) == T("D(D(V1,V3),V2)"));
  // Partial applications stay in normal form.
  CHECK(reduce(T("D(B,D(I,1))")) == T("D(B,1)"));
  // The SII(SII) loop exhausts any budget.
  CHECK_THROWS_AS(reduce(T("D(D(D(S,I),I),D(D(S,I),I))"), 1000), BudgetExceeded);
}

TEST_CASE("bracket abstraction") {
  CHECK(bracket_abstract(T("D(D(1,V2),V1)")) == T("D(C,1)"));
  CHECK(bracket_abstract(T("V1")) == T("I"));
  CHECK(bracket_abstract(T("D(1,V1)")) == T("1"));
  CHECK(bracket_abstract(T("D(1,2)")) == T("D(1,2)"));
  CHECK(bracket_abstract(T("D(D(1,2),V2)")) == T("D(K,D(1,2))"));
  std::mt19937 rng(5);
  for (int i = 0; i < 400; ++i) {
    std::uint32_t n = 1 + rng() % 3;
    ProofTerm d = random_term(rng, static_cast<int>(rng() % 9), n);
    std::uint32_t m = max_param(d);
    ProofTerm c = bracket_abstract(d);
    CHECK_FALSE(max_param(c));
    CHECK(reduce(apply_params(c, m)) == d);
  }
}

TEST_CASE("combinator elimination preserves mgt") {
  AxiomSystem ax = AxiomSystem::table1();
  CHECK(primitive_proof("B", "1", "2") == T("D(D(2,D(1,2)),1)"));
  CHECK(primitive_proof("B4", "1", "2") == T("D(D(2,D(1,D(2,D(1,D(D(2,D(1,2)),1))))),D(D(2,D(1,2)),1))"));
  for (const auto& n : primitive_names())
    CHECK(mgt(primitive_proof(n, "1", "2"), ax) == primitive_type(n));
  auto e = eliminate_combinators(T("D(D(B,1),1)"), ax);
  REQUIRE(e);
  CHECK(*e == T("D(D(D(D(2,D(1,2)),1),1),1)"));
  AxiomSystem mixed = ax;
  add_primitive_combinators(mixed);
  std::mt19937 rng(11);
  const char* leaves[] = {"1", "2", "3", "S", "K", "I", "B", "C", "S4", "B4", "C4"};
  std::function<ProofTerm(int)> gen = [&](int b) -> ProofTerm {
    if (b == 0) return ProofTerm::axiom(leaves[rng() % 11]);
    int l = static_cast<int>(rng() % b);
    return ProofTerm::det(gen(l), gen(b - 1 - l));
  };
  int defined = 0;
  for (int i = 0; i < 600; ++i) {
    ProofTerm d = gen(static_cast<int>(rng() % 6));
    auto m = mgt(d, mixed);
    if (!m) continue;
    ++defined;
    auto el = eliminate_combinators(d, ax);
    REQUIRE(el);
    CHECK_FALSE(contains_primitive(*el));
    CHECK(mgt(*el, ax) == m);
  }
  CHECK(defined > 50);
  AxiomSystem no_k;
  no_k.add("2", *ax.find("2"));
  CHECK_FALSE(eliminate_combinators(T("D(B,2)"), no_k));
  CHECK(eliminate_combinators(T("D(2,2)"), no_k) == T("D(2,2)"));
}

TEST_CASE("unit and definite conversions") {
  AxiomSystem ax = AxiomSystem::table1();
  ProofTerm u = definite_to_unit(T("D(D(1,V2),V1)"), ax);
  CHECK(mgt(u, ax) == F("x => (y => y)"));
  ProofTerm mpi = definite_to_unit(T("D(D(2,V2),D(1,V1))"), ax);
  CHECK(mgt(mpi, ax) == F("x => ((y => (x => z)) => (y => z))"));
  CHECK(definite_to_unit(T("D(1,1)"), ax) == T("D(1,1)"));
  CHECK_THROWS_AS(definite_to_unit(T("D(D(3,1),V1)"), ax), DomainError);

  CHECK(unit_to_definite(T("1"), 2, ax) == T("D(D(1,V1),V2)"));
  CHECK_THROWS_AS(unit_to_definite(T("1"), 3, ax), DomainError);

  std::mt19937 rng(21);
  for (int i = 0; i < 300; ++i) {
    ProofTerm d = random_term(rng, static_cast<int>(rng() % 7), 0);
    auto m = mgt(d, ax);
    if (!m) continue;
    std::uint32_t n = 0;
    for (Formula f = *m; f.is_imp() && n < 3; f = f.rhs()) ++n;
    ProofTerm w = unit_to_definite(d, n, ax);
    auto dm = mgt_definite(w, ax);
    REQUIRE(dm);
    CHECK(mgt(definite_to_unit(w, ax), ax) == dm->implication_form());
  }
}

TEST_CASE("pattern expansion") {
  SchemaTable s = parse_schema_declarations(
      "# nested patterns\n"
      "pattern p1 = B4 / 3\n"
      "pattern p2 = C / 2\n"
      "pattern p3 = S / 2\n"
      "pattern d = I / 2\n"
      "direct s1 = C4(C4(C4 C)) / 1\n");
  REQUIRE(s.pattern("p1"));
  CHECK(s.pattern("p1")->arity == 3);
  CHECK(s.pattern("p1")->type == primitive_type("B4"));
  CHECK(s.direct("s1")->arity == 1);
  CHECK(s.direct("s1")->combinator == "C4(C4(C4 C))");
  CHECK(expand_patterns(T("p1(1,p2(2,3),V1)"), s) == T("D(D(D(B4,1),D(D(C,2),3)),V1)"));
  CHECK(expand_patterns(T("d(1,2)"), s) == T("D(1,2)"));
  CHECK(expand_patterns(T("D(s1,1)"), s) == T("D(D(C4,D(C4,D(C4,C))),1)"));

  SchemaTable dflt = parse_schema_declarations("pattern q = B4\n");
  CHECK(dflt.pattern("q")->arity == 3);
  CHECK_THROWS_AS(parse_schema_declarations("pattern q = I\n"), ParseError);
  CHECK_THROWS_AS(parse_schema_declarations("lemma q = B\n"), ParseError);
  CHECK_THROWS_AS(parse_schema_declarations("pattern q = B / x\n"), ParseError);
  CHECK_THROWS_AS(parse_schema_declarations("pattern q = B\npattern q = C\n"), ConfigError);
  CHECK_THROWS_AS(parse_schema_declarations("pattern q B\n"), ParseError);

  AxiomSystem ax = AxiomSystem::table1();
  AxiomSystem axc = ax;
  add_primitive_combinators(axc);
  std::mt19937 rng(3);
  for (int i = 0; i < 200; ++i) {
    ProofTerm a = random_term(rng, static_cast<int>(rng() % 4), 0);
    ProofTerm b = random_term(rng, static_cast<int>(rng() % 4), 0);
    ProofTerm c = random_term(rng, static_cast<int>(rng() % 4), 0);
    ProofTerm p = ProofTerm::pattern("p1", {a, ProofTerm::pattern("p2", {b, c}), a});
    CHECK(mgt(p, ax, &s) == mgt(expand_patterns(p, s), axc));
  }
}
