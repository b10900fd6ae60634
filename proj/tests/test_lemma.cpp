#include <algorithm>
#include <set>

#include "cdgen/errors.hpp"
#include "cdgen/lemma.hpp"
#include "doctest.h"

using namespace cdgen;

namespace {

const char* kD1 = "D(D(1,1),D(D(1,D(1,1)),D(1,D(1,1))))";

ProofTerm T(const char* s) { return parse_proof_term(s); }

Lemma lemma_of(const char* formula, std::int64_t save) {
  return {ProofTerm::axiom("1"), canonical(parse_formula(formula)), save, ""};
}

}  // namespace

TEST_CASE("synthesis keeps the shared productions of the worked example") {
  AxiomSystem ax = AxiomSystem::table1();
  SynthesisStats st;
  LemmaSeq seq = synthesize({T(kD1)}, ax, nullptr, &st);
  std::set<std::string> names;
  for (const auto& l : seq) names.insert(l.production);
  CHECK(names == std::set<std::string>{"4", "5"});
  CHECK(st.productions == 3);
  CHECK(st.d_prime == 2);
  for (auto r : st.survivor_refs) CHECK(r >= 2);
  // Both right-hand sides have tree size 1 and two uses, so the MGT size decides.
  REQUIRE(seq.size() == 2);
  CHECK(seq[0].save == 1);
  CHECK(seq[1].save == 1);
  auto key = [](const Lemma& l) { return std::make_pair(f_tsize(l.mgt), f_height(l.mgt)); };
  CHECK(key(seq[0]) <= key(seq[1]));
  for (const auto& l : seq) CHECK(mgt(l.term, ax) == l.mgt);
}

TEST_CASE("synthesis edge cases") {
  AxiomSystem ax = AxiomSystem::table1();
  CHECK(synthesize({T("1")}, ax).empty());
  CHECK(synthesize({}, ax).empty());
  CHECK_THROWS_AS(synthesize({T("D(1,1)"), T("D(3,3)")}, ax), DomainError);
  // Duplicated base members change nothing.
  auto once = synthesize({T(kD1), T("D(D(1,1),2)")}, ax);
  auto twice = synthesize({T(kD1), T("D(D(1,1),2)"), T(kD1)}, ax);
  REQUIRE(once.size() == twice.size());
  for (std::size_t i = 0; i < once.size(); ++i) CHECK(once[i].term == twice[i].term);
}

TEST_CASE("synthesis over an engine run") {
  AxiomSystem ax = AxiomSystem::table1();
  EngineConfig cfg;
  cfg.maxlevel = 4;
  cfg.rest.dup = true;
  RunResult r = run(cfg);
  SynthesisStats st;
  LemmaSeq seq = synthesize(compose_base(r, std::nullopt), ax, nullptr, &st);
  CHECK(!seq.empty());
  CHECK(st.d_lem == seq.size());
  CHECK(st.d_lem <= st.d_prime);
  for (auto ref : st.survivor_refs) CHECK(ref >= 2);
  for (std::size_t i = 1; i < seq.size(); ++i) CHECK(seq[i - 1].save >= seq[i].save);
  for (std::size_t i = 0; i < seq.size(); ++i)
    for (std::size_t j = 0; j < seq.size(); ++j)
      if (i != j) CHECK_FALSE(subsumes(seq[j].mgt, seq[i].mgt));
}

TEST_CASE("stride sampling of Abandoned") {
  CHECK(stride_sample(10, 3) == std::vector<std::size_t>{0, 4, 8});
  CHECK(stride_sample(9, 3) == std::vector<std::size_t>{0, 3, 6});
  CHECK(stride_sample(2, 5) == std::vector<std::size_t>{0, 1});
  CHECK(stride_sample(7, 0).empty());
  for (std::size_t total = 0; total < 50; ++total)
    for (std::size_t n = 1; n < 20; ++n) CHECK(stride_sample(total, n).size() <= n);
}

TEST_CASE("subsumption reduction of lemma sequences") {
  LemmaSeq seq = {lemma_of("x => x", 5), lemma_of("y => y", 9), lemma_of("(x => y) => (x => y)", 3),
                  lemma_of("x => (y => x)", 1)};
  LemmaSeq out = subsumption_reduce(seq);
  REQUIRE(out.size() == 2);
  CHECK(out[0].save == 5);
  CHECK(out[1].save == 1);
  CHECK(subsumption_reduce(out).size() == out.size());
}

TEST_CASE("prefix precision") {
  LemmaSeq seq = {lemma_of("x => (y => x)", 3), lemma_of("n(x) => x", 9), lemma_of("x => x", 1)};
  std::vector<Formula> targets = {parse_formula("(a => b) => (c => (a => b))"), parse_formula("b => b")};
  auto by_save = prefix_precision(seq, targets, PrecisionOrder::Save, {1, 2, 3, 10});
  CHECK(by_save[0].second == doctest::Approx(0.0));  // n(x) => x first
  CHECK(by_save[1].second == doctest::Approx(0.5));
  CHECK(by_save[2].second == doctest::Approx(2.0 / 3));
  CHECK(by_save[3].second == doctest::Approx(2.0 / 3));
  auto by_size = prefix_precision(seq, targets, PrecisionOrder::MgtTsize, {1});
  CHECK(by_size[0].second == doctest::Approx(1.0));  // x => x first
  for (auto [len, frac] : prefix_precision(seq, {}, PrecisionOrder::MgtHeight, {1, 2, 3})) CHECK(frac == 0.0);
  std::vector<Formula> all;
  for (const auto& l : seq) all.push_back(l.mgt);
  for (auto [len, frac] : prefix_precision(seq, all, PrecisionOrder::Save, {1, 2, 3})) CHECK(frac == 1.0);
  CHECK(parse_precision_order("mgt_height") == PrecisionOrder::MgtHeight);
  CHECK_THROWS_AS(parse_precision_order("size"), ConfigError);
}

TEST_CASE("lemma axioms") {
  LemmaSeq seq = {lemma_of("x => x", 3), lemma_of("n(x) => x", 2)};
  CHECK(emit_lemma_axioms(seq, 0).empty());
  auto ax = emit_lemma_axioms(seq, 5);
  REQUIRE(ax.size() == 2);
  CHECK(ax[0].first == "lem_1");
  CHECK(ax[1].second == seq[1].mgt);
  CHECK(print_formula_table(ax) == "lem_1\t(x => x)\nlem_2\t(n(x) => x)\n");

  EngineConfig cfg;
  cfg.maxlevel = 1;
  cfg.lemmas = ax;
  RunResult r = run(cfg);
  std::set<std::string> level0;
  for (const auto& e : all_entries(r))
    if (e.level == 0) level0.insert(print_proof_term(e.term));
  CHECK(level0 == std::set<std::string>{"1", "2", "3", "lem_1", "lem_2"});
}
