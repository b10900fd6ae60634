#pragma once

// Combinators as proof terms: primitive combinators are axiom leaves named
// S, K, I, B, C, S4, B4, C4 and application is D. Also reduction, bracket
// abstraction, elimination into axiom-only proofs and conversion between
// unit and definite-clause proofs.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cdgen/proof_term.hpp"

namespace cdgen {

const std::vector<std::string>& primitive_names();
bool is_primitive(const std::string& name);
// Table of principal types; throws ConfigError for other names.
const Formula& primitive_type(const std::string& name);
// Number of arguments consumed by the reduction rule.
std::size_t primitive_rule_arity(const std::string& name);

// Adds every primitive combinator as an axiom typed by its principal type.
void add_primitive_combinators(AxiomSystem& ax);
AxiomSystem primitive_axioms();

// Applicative syntax with juxtaposition, e.g. "C4(C4(C4 C))" or "B4 C".
ProofTerm parse_combinator(std::string_view text);
std::string print_combinator(const ProofTerm& c);
bool is_combinator_expression(const ProofTerm& c);

std::optional<Formula> principal_type(const ProofTerm& c);

// D(...D(D(c, V1), V2)..., Vk)
ProofTerm apply_params(const ProofTerm& c, std::uint32_t k);

inline constexpr std::uint64_t kDefaultReduceBudget = 10'000'000;

// Leftmost-outermost normal form under the primitive reduction rules.
// Throws BudgetExceeded after `budget` steps.
ProofTerm reduce(const ProofTerm& d, std::uint64_t budget = kDefaultReduceBudget);

bool contains_primitive(const ProofTerm& d);

// Minimal k such that c applied to k parameters reduces to a term free of
// primitives. Throws DomainError if none up to 32.
std::uint32_t standard_arity(const ProofTerm& c);

// Compiles lambda V1 ... Vn. d (n = max_param(d)) into a combinator term over
// the primitives and the parameter-free leaves of d.
ProofTerm bracket_abstract(const ProofTerm& d);

// Axiom-only proof of a primitive's principal type, given the ids of axioms
// typed like K and S.
ProofTerm primitive_proof(const std::string& name, const std::string& k_id, const std::string& s_id);

// Replaces every primitive leaf by a fixed proof built from the K and S
// axioms of ax. Absent if ax has no K or S axiom while one is needed.
std::optional<ProofTerm> eliminate_combinators(const ProofTerm& d, const AxiomSystem& ax);

// Rewrites pattern nodes and direct-schema leaves into combinator terms.
ProofTerm expand_patterns(const ProofTerm& d, const SchemaTable& schemas);

// D(...D(d, V1)..., Vn). Throws DomainError if mgt(d) is undefined or has
// fewer than n leading implications.
ProofTerm unit_to_definite(const ProofTerm& d, std::uint32_t n, const AxiomSystem& ax,
                           const SchemaTable* schemas = nullptr);

// Bracket abstraction followed by combinator elimination. Throws
// DomainError if the MGT is undefined or elimination is impossible.
ProofTerm definite_to_unit(const ProofTerm& d, const AxiomSystem& ax, const SchemaTable* schemas = nullptr);

// Schema declarations, one per line:
//   pattern p1 = B4 / 3
//   direct s1 = C4(C4(C4 C)) / 1
// The arity defaults to the standard arity minus one.
SchemaTable parse_schema_declarations(std::string_view text);

}  // namespace cdgen
