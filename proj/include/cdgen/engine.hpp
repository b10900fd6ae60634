#pragma once

// Bottom-up proof term generation by levels: M_0 = Ax, then M'_i from
// M_{i-1}, filtered by restrictions, merged, ordered, trimmed and
// postprocessed into M_i.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cdgen/proof_term.hpp"

namespace cdgen {

enum class LevelKind { TreeSize, Height, Psp, PspPatterns, PspSchemas };

std::string level_kind_name(LevelKind k);
// Accepts tsize|t, height|h, psp|p, pp|patterns, pk|schemas.
LevelKind parse_level_kind(std::string_view s);

enum class Order { FTh, FHt };

enum class Termination { Exhausted, Stopped, BudgetExceeded };
std::string termination_name(Termination t);

struct Restrictions {
  bool dup = false;
  bool subs = false;
  std::optional<std::size_t> lt_ft;
  std::optional<std::size_t> lt_fh;
  std::optional<std::uint64_t> gen_max;
};

// Comma-separated: dup, subs, lt_ft:n, lt_fh:n, gen_max:n ("lt_ft(n)" too).
Restrictions parse_restrictions(std::string_view s);
std::string print_restrictions(const Restrictions& r);

struct EngineConfig {
  LevelKind level = LevelKind::Psp;
  Restrictions rest;
  Order ord = Order::FTh;
  std::optional<std::uint64_t> trim;      // unlimited if absent
  bool post_subs = false;
  std::optional<std::uint32_t> maxlevel;  // unlimited if absent
  AxiomSystem axioms = AxiomSystem::table1();
  SchemaTable schemas;
  // Extra level-0 members, e.g. synthesized lemmas.
  std::vector<std::pair<std::string, Formula>> lemmas;
  unsigned jobs = 1;
  // Interned proof term cap; reaching it ends the run with BudgetExceeded.
  std::uint64_t max_terms = 20'000'000;

  // Throws ConfigError.
  void validate() const;
};

// Lines "id<TAB>formula" (any whitespace separates); '#' starts a comment.
std::vector<std::pair<std::string, Formula>> parse_formula_table(std::string_view text);
std::string print_formula_table(const std::vector<std::pair<std::string, Formula>>& rows);

// key=value lines: level, rest, ord, trim, post, maxlevel, patterns (schema
// file), lemmas (lemma file), axioms (axiom file), jobs, max_terms. Relative
// paths resolve against base_dir.
EngineConfig parse_engine_config(std::string_view text, const std::string& base_dir = ".");

struct Entry {
  ProofTerm term;
  Formula mgt;
  std::uint32_t level = 0;
  std::uint64_t seq = 0;  // generation sequence number
};

struct LevelStats {
  std::uint32_t level = 0;
  std::uint64_t candidates = 0;  // distinct structural candidates
  std::uint64_t defined = 0;     // with defined MGT
  std::uint64_t accepted = 0;    // |M'_i|
  std::uint64_t retained = 0;    // |M_i|
};

struct RunResult {
  std::vector<Entry> final_m;
  std::vector<Entry> abandoned;
  Termination termination = Termination::Stopped;
  std::uint32_t level_reached = 0;  // index of the final M_i
  std::uint64_t gen = 0;            // |final_m| + |abandoned|
  std::vector<LevelStats> levels;
  std::uint64_t interned = 0;  // proof term nodes held at the end
  double seconds = 0;
};

RunResult run(const EngineConfig& cfg);

// key=value block: level, termination, gen, final, abandoned, seconds and
// one "level.<i>=candidates,defined,accepted,retained" line per level.
std::string format_run_stats(const RunResult& r);

// Stable sort by (f_tsize, f_height) or (f_height, f_tsize) of the MGT,
// then seq; keeps the first `trim`.
std::vector<Entry> order_and_trim(std::vector<Entry> entries, Order ord, std::optional<std::uint64_t> trim);

// One entry per variant class (lowest seq wins) and none whose MGT is
// strictly subsumed by another entry's. Input order is kept.
std::vector<Entry> post_subs(const std::vector<Entry>& entries);

// Level census: all members of L_i, those with defined MGT, and distinct
// MGTs up to variants.
struct LevelCount {
  std::uint64_t total = 0;
  std::uint64_t defined = 0;
  std::uint64_t distinct = 0;
  friend bool operator==(const LevelCount&, const LevelCount&) = default;
};

std::vector<LevelCount> census(LevelKind kind, std::uint32_t max_level, const AxiomSystem& ax,
                               const SchemaTable* schemas = nullptr, unsigned jobs = 1);

// Every member of L_i, defined or not, in enumeration order.
std::vector<ProofTerm> level_members(LevelKind kind, std::uint32_t i, const AxiomSystem& ax,
                                     const SchemaTable* schemas = nullptr);

inline constexpr std::uint32_t kCsizeOracleBound = 5;

// C_i = {d | csize(d) = i} as canonical value-numbered DAGs. Throws
// ConfigError when i exceeds the bound.
std::vector<ProofTerm> enumerate_csize(std::uint32_t i, const AxiomSystem& ax,
                                       std::uint32_t bound = kCsizeOracleBound);
std::vector<LevelCount> census_csize(std::uint32_t max_level, const AxiomSystem& ax,
                                     std::uint32_t bound = kCsizeOracleBound);

// First entry in seq order whose MGT subsumes the target.
std::optional<Entry> find_proof(const std::vector<Entry>& entries, const Formula& target);

// All entries of a result in seq order.
std::vector<Entry> all_entries(const RunResult& r);

}  // namespace cdgen
