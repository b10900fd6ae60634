#pragma once

// Object-level formulas over variables, implication and negation.
//
// A formula is stored as its preorder symbol sequence: non-negative entries
// are variable indices, kImp and kNeg are the two connectives. The encoding
// is unambiguous because connective arities are fixed, and it makes
// structural equality and hashing a plain comparison of integer arrays.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cdgen {

using VarIndex = std::uint32_t;

class Formula {
 public:
  static constexpr std::int32_t kImp = -1;
  static constexpr std::int32_t kNeg = -2;

  enum class Kind { Var, Imp, Neg };

  // The default formula is the variable x.
  Formula() : code_{0} {}

  static Formula var(VarIndex index);
  static Formula imp(const Formula& lhs, const Formula& rhs);
  static Formula neg(const Formula& arg);

  // Wraps a preorder code; throws std::invalid_argument if it is not exactly
  // one well-formed formula.
  static Formula from_code(std::vector<std::int32_t> code);

  Kind kind() const {
    return code_[0] == kImp ? Kind::Imp : code_[0] == kNeg ? Kind::Neg : Kind::Var;
  }
  bool is_var() const { return code_[0] >= 0; }
  bool is_imp() const { return code_[0] == kImp; }
  bool is_neg() const { return code_[0] == kNeg; }

  VarIndex var_index() const;
  Formula lhs() const;
  Formula rhs() const;
  Formula arg() const;

  std::span<const std::int32_t> code() const { return code_; }
  std::size_t length() const { return code_.size(); }

  // Distinct variables in order of first preorder occurrence.
  std::vector<VarIndex> variables() const;
  // One past the largest variable index, 0 never happens (formulas always
  // contain a variable).
  VarIndex var_bound() const;

  std::size_t hash() const;

  friend bool operator==(const Formula& a, const Formula& b) { return a.code_ == b.code_; }
  friend bool operator<(const Formula& a, const Formula& b) { return a.code_ < b.code_; }

 private:
  explicit Formula(std::vector<std::int32_t> code) : code_(std::move(code)) {}

  std::vector<std::int32_t> code_;
};

// Index one past the end of the subformula starting at `pos`.
std::size_t subformula_end(std::span<const std::int32_t> code, std::size_t pos);

// Renames variables to 0,1,2,... by first occurrence in preorder. Variants
// have identical canonical forms.
Formula canonical(const Formula& f);
bool is_canonical(const Formula& f);

bool variant_eq(const Formula& f, const Formula& g);

// One-sided matching: true iff g is a substitution instance of f. The
// variables of g are treated as constants.
bool subsumes(const Formula& f, const Formula& g);

// Number of connective nodes (both => and n count).
std::size_t f_tsize(const Formula& f);
// Longest root-to-leaf path counted in connective nodes.
std::size_t f_height(const Formula& f);

class Substitution {
 public:
  Substitution() = default;

  // Identity bindings are dropped.
  void bind(VarIndex v, Formula value);

  const Formula* find(VarIndex v) const;
  bool empty() const { return bindings_.empty(); }
  std::size_t size() const { return bindings_.size(); }
  const std::map<VarIndex, Formula>& bindings() const { return bindings_; }

  friend bool operator==(const Substitution&, const Substitution&) = default;

 private:
  std::map<VarIndex, Formula> bindings_;
};

// Simultaneous replacement of bound variables.
Formula apply(const Substitution& s, const Formula& f);

// Most general unifier with occurs check, in idempotent solved form.
std::optional<Substitution> unify(const Formula& f, const Formula& g);

// Variant of f whose variables avoid `reserved`.
Formula rename_apart(const Formula& f, const std::set<VarIndex>& reserved);

// Canonical MGT of D(major, minor): unify the antecedent of the major
// premise with a renamed copy of the minor premise and return the
// instantiated consequent. Absent when unification fails. Both inputs may
// use any variable indices; they are renamed apart internally.
std::optional<Formula> detach(const Formula& major, const Formula& minor);

// Text syntax: var | "n(" f ")" | "(" f "=>" f ")"; var := [a-z][0-9]*.
// Names x,y,z,u,v,w with subscript k denote index 6k+j; the other letters
// map to a separate index range so that parsing and printing are inverse.
// The parser also accepts an unparenthesized right-nested implication chain
// and the arrows "->" and the Unicode double arrow.
Formula parse_formula(std::string_view text);
std::string print_formula(const Formula& f);
std::string var_name(VarIndex v);

// Mutable term store for unification over shared variables. Cells are
// variables (possibly bound) or connective nodes over other cells.
class UnifyArena {
 public:
  using Cell = std::int32_t;

  void clear();
  std::size_t cell_count() const { return cells_.size(); }

  Cell fresh_var();
  Cell make_imp(Cell lhs, Cell rhs);
  Cell make_neg(Cell arg);

  // Builds the cells of `code`. var_cells[i] is the cell for variable i; it
  // is extended with fresh variables on demand. The code's variable indices
  // should be dense (canonical formulas are).
  Cell build(std::span<const std::int32_t> code, std::vector<Cell>& var_cells);

  // Robinson unification with occurs check. On failure the arena is left
  // partially bound and should be cleared.
  bool unify(Cell a, Cell b);

  Cell deref(Cell c) const;

  // Reads out a cell as preorder code. Unbound variables are numbered in
  // order of first occurrence across all reads since begin_naming().
  void begin_naming();
  void read(Cell c, std::vector<std::int32_t>& out);
  Formula read_formula(Cell c);
  // Cells named since begin_naming(), indexed by assigned name.
  const std::vector<Cell>& named_cells() const { return named_; }

  // Readouts longer than this throw BudgetExceeded.
  static constexpr std::size_t kMaxReadLength = std::size_t{1} << 24;

 private:
  struct Node {
    std::int32_t tag;  // kVar, Formula::kImp or Formula::kNeg
    std::int32_t a;    // binding (or -1) for variables, first child otherwise
    std::int32_t b;
  };
  static constexpr std::int32_t kVar = 0;

  bool occurs(Cell var, Cell term);

  std::vector<Node> cells_;
  std::vector<std::pair<Cell, Cell>> work_;
  std::vector<Cell> stack_;
  std::vector<std::uint32_t> stamp_;
  std::uint32_t epoch_ = 0;
  std::vector<std::int32_t> names_;
  std::vector<Cell> named_;
  std::int32_t next_name_ = 0;
};

}  // namespace cdgen

template <>
struct std::hash<cdgen::Formula> {
  std::size_t operator()(const cdgen::Formula& f) const noexcept { return f.hash(); }
};
