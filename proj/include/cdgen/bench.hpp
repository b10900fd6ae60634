#pragma once

// Benchmark theorems, prover difficulty ratings, TPTP problem files and
// checking generated proofs against targets.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cdgen/engine.hpp"
#include "cdgen/lemma.hpp"

namespace cdgen {

// A rating k/9, stored as k.
struct Rating {
  std::uint32_t ninths = 0;

  double value() const { return ninths / 9.0; }
  // Two decimals, e.g. "0.89".
  std::string str() const;
  bool operator==(const Rating&) const = default;
};

// Nearest k/9 to a printed decimal; throws ParseError if off by more than 0.01.
Rating parse_rating(std::string_view text);

struct TheoremRecord {
  std::string name;
  Formula formula;
  std::uint64_t refs = 0;
  std::optional<Rating> rating;
  std::string flags;  // subset of "PTSCL", kept in that order

  bool operator==(const TheoremRecord&) const = default;
};

// Solve times per theorem and solver; nullopt is a timeout.
class SolverMatrix {
 public:
  // Throws DomainError unless seconds > 0.
  void set(const std::string& theorem, const std::string& solver, std::optional<double> seconds);
  // Null if there is no row for the pair.
  const std::optional<double>* find(const std::string& theorem, const std::string& solver) const;
  const std::map<std::string, std::map<std::string, std::optional<double>>>& rows() const { return rows_; }
  bool operator==(const SolverMatrix&) const = default;

 private:
  std::map<std::string, std::map<std::string, std::optional<double>>> rows_;
};

inline constexpr const char* kRatedSolvers[] = {"Vampire", "E", "E-as"};
inline constexpr double kRatingLimits[] = {60, 600, 3600};

// Cells (solver, limit) over the rated solvers with solve time <= limit.
std::uint32_t solved_cells(const std::string& theorem, const SolverMatrix& m);
Rating rating(const std::string& theorem, const SolverMatrix& m);

// name<TAB>formula<TAB>refs[<TAB>rating[<TAB>flags]]; '#' lines and blank
// lines are skipped. Errors name the line.
std::vector<TheoremRecord> parse_theorems(std::string_view text);
std::string print_theorems(const std::vector<TheoremRecord>& records);
std::vector<TheoremRecord> load_theorems(const std::string& path);
void save_theorems(const std::string& path, const std::vector<TheoremRecord>& records);

// name<TAB>solver<TAB>seconds|timeout
SolverMatrix parse_solver_matrix(std::string_view text);
std::string print_solver_matrix(const SolverMatrix& m);
SolverMatrix load_solver_matrix(const std::string& path);
void save_solver_matrix(const std::string& path, const SolverMatrix& m);

// p(...) over i/2 and n/1, variables X, Y, Z, U, V, W, X1, ... in order of
// first occurrence, universally closed.
std::string tptp_closure(const Formula& f);

// [a-z][A-Za-z0-9_]*; other characters become '_' and a leading "t_" is
// added when needed.
std::string tptp_identifier(const std::string& name);
// Theorem name made safe as a file stem.
std::string tptp_file_stem(const std::string& name);

// det, ax_1..ax_3 (the axioms of `ax`, in order), one axiom per lemma, then
// the conjecture thm. Renamed identifiers are listed in leading comments.
std::string emit_tptp(const TheoremRecord& t, const std::vector<std::pair<std::string, Formula>>& lemmas,
                      const AxiomSystem& ax = AxiomSystem::table1());

// For each target, the first entry in seq order whose MGT subsumes it.
std::vector<std::pair<std::string, std::optional<ProofTerm>>> check_solutions(
    const RunResult& r, const std::vector<TheoremRecord>& targets);
std::vector<std::pair<std::string, std::optional<ProofTerm>>> check_solutions(
    const LemmaSeq& seq, const std::vector<TheoremRecord>& targets);

}  // namespace cdgen
