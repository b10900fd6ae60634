#pragma once

// Lemma synthesis by DAG compression of a base set of proof terms, and
// evaluation of lemma sequence prefixes against target theorems.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cdgen/dag_grammar.hpp"
#include "cdgen/engine.hpp"

namespace cdgen {

struct Lemma {
  ProofTerm term;
  Formula mgt;
  std::int64_t save = 0;
  std::string production;  // lhs in the compressed grammar
};

using LemmaSeq = std::vector<Lemma>;

struct LemmaConfig {
  std::size_t nlem = 50;
  // Members taken from Abandoned; all of them if absent.
  std::optional<std::size_t> abandoned_sample;
};

struct SynthesisStats {
  std::size_t d0 = 0;        // distinct base terms
  std::size_t productions = 0;
  std::size_t d_prime = 0;   // after deleting save-0 productions
  std::size_t d_lem = 0;     // after subsumption reduction
  // ref_count of every production that survived deletion.
  std::vector<std::uint64_t> survivor_refs;
};

// Evenly spaced indices 0, s, 2s, ... below total with s = ceil(total / n).
std::vector<std::size_t> stride_sample(std::size_t total, std::size_t n);

// Final M followed by the sampled Abandoned members, each in seq order.
std::vector<ProofTerm> compose_base(const RunResult& r, std::optional<std::size_t> abandoned_sample);

// Throws DomainError if a base term has no MGT.
LemmaSeq synthesize(const std::vector<ProofTerm>& d0, const AxiomSystem& ax, const SchemaTable* schemas = nullptr,
                    SynthesisStats* stats = nullptr);

// post_subs over lemmas; earlier position wins among variants.
LemmaSeq subsumption_reduce(const LemmaSeq& seq);

enum class PrecisionOrder { Save, MgtTsize, MgtHeight };
PrecisionOrder parse_precision_order(const std::string& s);
std::string precision_order_name(PrecisionOrder o);

// For each length, the share of the first `length` members (after a stable
// reorder by the key) whose MGT subsumes some target.
std::vector<std::pair<std::size_t, double>> prefix_precision(const LemmaSeq& seq, const std::vector<Formula>& targets,
                                                             PrecisionOrder order,
                                                             const std::vector<std::size_t>& lengths);

// The first nlem MGTs named lem_1, lem_2, ...
std::vector<std::pair<std::string, Formula>> emit_lemma_axioms(const LemmaSeq& seq, std::size_t nlem);

}  // namespace cdgen
