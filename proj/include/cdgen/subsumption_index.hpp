#pragma once

// Discrimination tree over formula codes with variables collapsed to one
// wildcard. Candidates are confirmed with exact one-sided matching.

#include <cstdint>
#include <functional>
#include <vector>

#include "cdgen/formula.hpp"

namespace cdgen {

class SubsumptionIndex {
 public:
  using Id = std::uint32_t;

  void insert(const Formula& f, Id id);
  // Drops every entry with this id.
  void erase(const Formula& f, Id id);
  std::size_t size() const { return size_; }

  // Calls visit(id, stored) for each stored formula that subsumes f, until
  // visit returns false.
  void for_generalizations(const Formula& f, const std::function<bool(Id, const Formula&)>& visit) const;
  // Same for stored formulas that are instances of f.
  void for_instances(const Formula& f, const std::function<bool(Id, const Formula&)>& visit) const;

  bool has_generalization(const Formula& f) const;

 private:
  struct Node {
    std::int32_t child[3] = {-1, -1, -1};  // imp, neg, variable
    std::vector<std::pair<Id, Formula>> entries;
  };
  static int slot(std::int32_t symbol) { return symbol == Formula::kImp ? 0 : symbol == Formula::kNeg ? 1 : 2; }

  std::vector<Node> nodes_{1};
  std::size_t size_ = 0;
};

}  // namespace cdgen
