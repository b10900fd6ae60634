#include "cdgen/subsumption_index.hpp"

#include <algorithm>

namespace cdgen {

void SubsumptionIndex::insert(const Formula& f, Id id) {
  std::size_t n = 0;
  for (auto s : f.code()) {
    int k = slot(s);
    if (nodes_[n].child[k] < 0) {
      nodes_[n].child[k] = static_cast<std::int32_t>(nodes_.size());
      nodes_.emplace_back();
    }
    n = static_cast<std::size_t>(nodes_[n].child[k]);
  }
  nodes_[n].entries.emplace_back(id, f);
  ++size_;
}

void SubsumptionIndex::erase(const Formula& f, Id id) {
  std::size_t n = 0;
  for (auto s : f.code()) {
    std::int32_t c = nodes_[n].child[slot(s)];
    if (c < 0) return;
    n = static_cast<std::size_t>(c);
  }
  auto& e = nodes_[n].entries;
  auto it = std::remove_if(e.begin(), e.end(), [&](const auto& p) { return p.first == id; });
  size_ -= static_cast<std::size_t>(e.end() - it);
  e.erase(it, e.end());
}

void SubsumptionIndex::for_generalizations(const Formula& f,
                                           const std::function<bool(Id, const Formula&)>& visit) const {
  auto code = f.code();
  bool go = true;
  // A stored variable absorbs a whole query subformula.
  auto rec = [&](auto&& self, std::size_t n, std::size_t pos) -> void {
    if (!go) return;
    if (pos == code.size()) {
      for (const auto& [id, g] : nodes_[n].entries)
        if (subsumes(g, f) && !(go = visit(id, g))) return;
      return;
    }
    std::int32_t s = code[pos];
    if (nodes_[n].child[2] >= 0) self(self, static_cast<std::size_t>(nodes_[n].child[2]), subformula_end(code, pos));
    if (s < 0 && nodes_[n].child[slot(s)] >= 0) self(self, static_cast<std::size_t>(nodes_[n].child[slot(s)]), pos + 1);
  };
  rec(rec, 0, 0);
}

void SubsumptionIndex::for_instances(const Formula& f, const std::function<bool(Id, const Formula&)>& visit) const {
  auto code = f.code();
  bool go = true;
  // A query variable absorbs a whole stored subformula: `need` counts the
  // stored subformulas still to skip before resuming at `pos`.
  auto rec = [&](auto&& self, std::size_t n, std::size_t pos, std::size_t need) -> void {
    if (!go) return;
    const Node& node = nodes_[n];
    if (need > 0) {
      if (node.child[0] >= 0) self(self, static_cast<std::size_t>(node.child[0]), pos, need + 1);
      if (node.child[1] >= 0) self(self, static_cast<std::size_t>(node.child[1]), pos, need);
      if (node.child[2] >= 0) self(self, static_cast<std::size_t>(node.child[2]), pos, need - 1);
      return;
    }
    if (pos == code.size()) {
      for (const auto& [id, g] : node.entries)
        if (subsumes(f, g) && !(go = visit(id, g))) return;
      return;
    }
    std::int32_t s = code[pos];
    if (s >= 0) {
      self(self, n, pos + 1, 1);
    } else if (node.child[slot(s)] >= 0) {
      self(self, static_cast<std::size_t>(node.child[slot(s)]), pos + 1, 0);
    }
  };
  rec(rec, 0, 0, 0);
}

bool SubsumptionIndex::has_generalization(const Formula& f) const {
  bool found = false;
  for_generalizations(f, [&](Id, const Formula&) {
    found = true;
    return false;
  });
  return found;
}

}  // namespace cdgen
