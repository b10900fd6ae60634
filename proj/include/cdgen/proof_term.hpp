#pragma once

// Proof terms over axiom identifiers, detachment, proof patterns and
// parameters, with size measures and most general theorems.

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cdgen/formula.hpp"

namespace cdgen {

class ProofTerm {
 public:
  enum class Kind { Axiom, Det, Pattern, Param };

  ProofTerm() = delete;

  static ProofTerm axiom(std::string id);
  static ProofTerm det(ProofTerm left, ProofTerm right);
  static ProofTerm pattern(std::string symbol, std::vector<ProofTerm> args);
  static ProofTerm param(std::uint32_t index);

  Kind kind() const { return node_->kind; }
  bool is_axiom() const { return node_->kind == Kind::Axiom; }
  bool is_det() const { return node_->kind == Kind::Det; }
  bool is_pattern() const { return node_->kind == Kind::Pattern; }
  bool is_param() const { return node_->kind == Kind::Param; }
  bool is_compound() const { return is_det() || is_pattern(); }

  // Axiom identifier or pattern symbol.
  const std::string& label() const { return node_->label; }
  std::uint32_t param_index() const { return node_->param; }
  // Det children are {left, right}.
  const std::vector<ProofTerm>& children() const { return node_->children; }
  const ProofTerm& left() const { return node_->children[0]; }
  const ProofTerm& right() const { return node_->children[1]; }

  std::size_t hash() const { return node_->hash; }
  // Identity of the shared node, for memo tables.
  const void* node_id() const { return node_.get(); }

  friend bool operator==(const ProofTerm& a, const ProofTerm& b);
  friend bool operator!=(const ProofTerm& a, const ProofTerm& b) { return !(a == b); }

 private:
  struct Node {
    Kind kind;
    std::string label;
    std::uint32_t param = 0;
    std::vector<ProofTerm> children;
    std::size_t hash = 0;
  };
  explicit ProofTerm(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

  std::shared_ptr<const Node> node_;
};

// Sizes saturate at UINT64_MAX.
std::uint64_t tsize(const ProofTerm& d);
std::uint64_t height(const ProofTerm& d);
std::uint64_t csize(const ProofTerm& d);

// Distinct compound subterms, children before parents.
std::vector<ProofTerm> subterms(const ProofTerm& d);

// d := id | "D(" d "," d ")" | sym "(" d {"," d} ")" | "V" nat
ProofTerm parse_proof_term(std::string_view text);
std::string print_proof_term(const ProofTerm& d);

// Ordered identifier to formula table.
class AxiomSystem {
 public:
  AxiomSystem() = default;

  // Axioms 1, 2, 3: x=>(y=>x), the Frege axiom, transposition.
  static AxiomSystem table1();

  // Replaces the formula if the id exists.
  void add(const std::string& id, const Formula& f);
  const Formula* find(const std::string& id) const;
  bool contains(const std::string& id) const { return find(id) != nullptr; }
  const std::vector<std::pair<std::string, Formula>>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  // Largest purely numeric identifier, 0 if none.
  std::uint64_t max_numeric_id() const;

 private:
  std::vector<std::pair<std::string, Formula>> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Declared schemas. A pattern p/k is a k-ary node whose MGT is that of its
// combinator applied to the arguments. A direct schema c/k contributes a
// leaf constant named by its symbol, typed with the combinator's principal
// type, which the engine applies to k arguments with D.
struct PatternSchema {
  std::string symbol;
  std::size_t arity = 0;
  Formula type;
  std::string combinator;  // display text, e.g. "B4"
};

struct DirectSchema {
  std::string symbol;
  std::size_t arity = 0;
  Formula type;
  std::string combinator;
};

class SchemaTable {
 public:
  void add_pattern(PatternSchema p);
  void add_direct(DirectSchema d);

  const PatternSchema* pattern(const std::string& symbol) const;
  const DirectSchema* direct(const std::string& symbol) const;
  // Type of a direct-schema constant.
  const Formula* constant(const std::string& symbol) const;
  const std::vector<PatternSchema>& patterns() const { return patterns_; }
  const std::vector<DirectSchema>& directs() const { return directs_; }
  bool empty() const { return patterns_.empty() && directs_.empty(); }

 private:
  void check_fresh(const std::string& symbol) const;

  std::vector<PatternSchema> patterns_;
  std::vector<DirectSchema> directs_;
};

// Memoizing MGT evaluator bound to one axiom system and schema table.
class MgtEvaluator {
 public:
  explicit MgtEvaluator(const AxiomSystem& ax, const SchemaTable* schemas = nullptr)
      : ax_(ax), schemas_(schemas) {}

  // Canonical MGT, or nullopt if undefined. Throws ConfigError on an unknown
  // leaf, an undeclared or misapplied pattern, or a parameter.
  std::optional<Formula> operator()(const ProofTerm& d);

  const Formula& leaf_formula(const std::string& id) const;

 private:
  const AxiomSystem& ax_;
  const SchemaTable* schemas_;
  std::unordered_map<const void*, std::pair<ProofTerm, std::optional<Formula>>> memo_;
};

std::optional<Formula> mgt(const ProofTerm& d, const AxiomSystem& ax,
                           const SchemaTable* schemas = nullptr);

// Definite clause head <- body[0] & ... & body[n-1]; body[i] belongs to V(i+1).
struct DefiniteMgt {
  Formula head;
  std::vector<Formula> body;

  // x1 => (... => (xn => y))
  Formula implication_form() const;
  friend bool operator==(const DefiniteMgt&, const DefiniteMgt&) = default;
};

// Parameters must be numbered 1..n without gaps (ConfigError otherwise).
// Variables are named over the body atoms first, then the head.
std::optional<DefiniteMgt> mgt_definite(const ProofTerm& d, const AxiomSystem& ax,
                                        const SchemaTable* schemas = nullptr);

// Highest parameter index in d, 0 if parameter-free.
std::uint32_t max_param(const ProofTerm& d);

bool proves(const ProofTerm& d, const Formula& target, const AxiomSystem& ax,
            const SchemaTable* schemas = nullptr);

}  // namespace cdgen

template <>
struct std::hash<cdgen::ProofTerm> {
  std::size_t operator()(const cdgen::ProofTerm& d) const noexcept { return d.hash(); }
};
