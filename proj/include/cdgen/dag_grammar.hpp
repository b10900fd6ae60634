#pragma once

// DAG grammars: productions "a -> d" whose right-hand sides refer to axioms,
// pattern symbols and earlier nonterminals.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cdgen/proof_term.hpp"

namespace cdgen {

struct Production {
  std::string lhs;
  ProofTerm rhs;
  std::optional<Formula> annotation;  // printed as " : <formula>"
};

class DagGrammar {
 public:
  // Throws ConfigError if lhs is already defined or was used as a leaf.
  void add_production(std::string lhs, ProofTerm rhs, std::optional<Formula> annotation = std::nullopt);
  // A root is a leaf naming a nonterminal or axiom, or an unfolded term.
  void add_root(ProofTerm root);

  const std::vector<Production>& productions() const { return productions_; }
  const std::vector<ProofTerm>& roots() const { return roots_; }
  const Production* find(const std::string& lhs) const;
  bool is_nonterminal(const std::string& name) const { return find(name) != nullptr; }

  // The denoted proof term, sharing structure. Throws ConfigError on an
  // unknown symbol.
  ProofTerm expand(const std::string& symbol) const;
  ProofTerm expand_root(std::size_t i) const;
  ProofTerm expand_term(const ProofTerm& t) const;

 private:
  std::vector<Production> productions_;
  std::unordered_map<std::string, std::size_t> index_;
  std::unordered_map<std::string, std::size_t> leaf_uses_;
  std::vector<ProofTerm> roots_;
  mutable std::unordered_map<std::string, ProofTerm> expansion_;
};

struct CompressOptions {
  // First nonterminal number; 0 picks one above every numeric leaf and
  // every numeric axiom id of `ax`.
  std::uint64_t first_nonterminal = 0;
  // A single input gets its top production named Start.
  bool name_start = true;
};

// Minimal DAG grammar of the inputs. Every compound subterm that occurs
// more than once, and every compound input, gets a production; other
// subterms stay inline. Nonterminals are numbered in postorder.
DagGrammar compress(const std::vector<ProofTerm>& terms, const AxiomSystem* ax = nullptr,
                    const CompressOptions& opts = {});

// Sum of tree sizes of all right-hand sides and roots.
std::uint64_t grammar_size(const DagGrammar& g);

// Occurrences of the nonterminal in right-hand sides and roots.
std::uint64_t ref_count(const DagGrammar& g, const std::string& nonterminal);

// (ref - 1) * tsize(rhs); negative for unreferenced productions.
std::int64_t save_value(const DagGrammar& g, const std::string& nonterminal);

// Removes the production and substitutes its rhs for every occurrence.
DagGrammar unfold(const DagGrammar& g, const std::string& nonterminal);

// MGT of a symbol's expansion, computed over the shared expansion.
std::optional<Formula> grammar_mgt(const DagGrammar& g, const std::string& symbol, const AxiomSystem& ax,
                                   const SchemaTable* schemas = nullptr);

// Lines "lhs -> rhs" with an optional " : formula" suffix; '=' is accepted
// for '->'. A line "roots a b ..." lists roots; otherwise the root is Start
// if defined, else the last production. '#' starts a comment.
DagGrammar parse_grammar(std::string_view text);
std::string print_grammar(const DagGrammar& g);

}  // namespace cdgen
