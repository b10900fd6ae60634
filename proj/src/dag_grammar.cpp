#include "cdgen/dag_grammar.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

#include "cdgen/errors.hpp"

namespace cdgen {

namespace {

using Memo = std::unordered_map<const void*, std::pair<ProofTerm, ProofTerm>>;

// Rebuilds t bottom-up with every leaf passed through `leaf`.
ProofTerm map_leaves(const ProofTerm& t, const std::function<ProofTerm(const ProofTerm&)>& leaf, Memo& memo) {
  if (!t.is_compound()) return leaf(t);
  auto it = memo.find(t.node_id());
  if (it != memo.end()) return it->second.second;
  std::vector<ProofTerm> kids;
  kids.reserve(t.children().size());
  bool same = true;
  for (const auto& c : t.children()) {
    kids.push_back(map_leaves(c, leaf, memo));
    same = same && kids.back().node_id() == c.node_id();
  }
  ProofTerm r = same ? t
                : t.is_det() ? ProofTerm::det(kids[0], kids[1])
                             : ProofTerm::pattern(t.label(), std::move(kids));
  memo.emplace(t.node_id(), std::make_pair(t, r));
  return r;
}

void for_each_leaf(const ProofTerm& t, const std::function<void(const ProofTerm&)>& f) {
  if (!t.is_compound()) {
    f(t);
    return;
  }
  for (const auto& c : t.children()) for_each_leaf(c, f);
}

bool is_number(const std::string& s) {
  return !s.empty() && s.size() < 19 && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

}  // namespace

void DagGrammar::add_production(std::string lhs, ProofTerm rhs, std::optional<Formula> annotation) {
  if (lhs.empty()) throw ConfigError("empty nonterminal");
  if (index_.count(lhs)) throw ConfigError("duplicate production for " + lhs);
  if (leaf_uses_.count(lhs)) throw ConfigError("nonterminal " + lhs + " used before its production");
  if (rhs.is_axiom() && rhs.label() == lhs) throw ConfigError("cyclic production for " + lhs);
  for_each_leaf(rhs, [&](const ProofTerm& l) {
    if (l.is_axiom()) ++leaf_uses_[l.label()];
  });
  expansion_.emplace(lhs, expand_term(rhs));
  index_.emplace(lhs, productions_.size());
  productions_.push_back({std::move(lhs), std::move(rhs), std::move(annotation)});
}

void DagGrammar::add_root(ProofTerm root) {
  for_each_leaf(root, [&](const ProofTerm& l) {
    if (l.is_axiom()) ++leaf_uses_[l.label()];
  });
  roots_.push_back(std::move(root));
}

const Production* DagGrammar::find(const std::string& lhs) const {
  auto it = index_.find(lhs);
  return it == index_.end() ? nullptr : &productions_[it->second];
}

ProofTerm DagGrammar::expand(const std::string& symbol) const {
  auto it = expansion_.find(symbol);
  if (it == expansion_.end()) throw ConfigError("unknown nonterminal " + symbol);
  return it->second;
}

ProofTerm DagGrammar::expand_root(std::size_t i) const {
  if (i >= roots_.size()) throw ConfigError("no root " + std::to_string(i));
  return expand_term(roots_[i]);
}

ProofTerm DagGrammar::expand_term(const ProofTerm& t) const {
  Memo memo;
  return map_leaves(
      t,
      [&](const ProofTerm& l) {
        if (l.is_axiom()) {
          auto it = expansion_.find(l.label());
          if (it != expansion_.end()) return it->second;
        }
        return l;
      },
      memo);
}

DagGrammar compress(const std::vector<ProofTerm>& terms, const AxiomSystem* ax, const CompressOptions& opts) {
  // Value numbering of compound subterms across all inputs.
  std::unordered_map<ProofTerm, std::size_t> number;
  std::unordered_map<const void*, std::size_t> by_node;
  std::vector<ProofTerm> nodes;
  std::vector<std::uint64_t> parents;
  std::uint64_t max_leaf = ax ? ax->max_numeric_id() : 0;

  std::function<std::size_t(const ProofTerm&)> visit = [&](const ProofTerm& t) -> std::size_t {
    auto bn = by_node.find(t.node_id());
    if (bn != by_node.end()) return bn->second;
    auto it = number.find(t);
    if (it != number.end()) {
      by_node.emplace(t.node_id(), it->second);
      return it->second;
    }
    for (const auto& c : t.children()) {
      if (c.is_compound()) {
        visit(c);
      } else if (c.is_axiom() && is_number(c.label())) {
        max_leaf = std::max<std::uint64_t>(max_leaf, std::stoull(c.label()));
      }
    }
    std::size_t id = nodes.size();
    nodes.push_back(t);
    parents.push_back(0);
    // Each distinct node counts each of its compound children once per position.
    for (const auto& c : t.children())
      if (c.is_compound()) ++parents[number.at(c)];
    number.emplace(t, id);
    by_node.emplace(t.node_id(), id);
    return id;
  };

  std::vector<bool> is_root;
  for (const auto& t : terms) {
    if (t.is_axiom() && is_number(t.label())) max_leaf = std::max<std::uint64_t>(max_leaf, std::stoull(t.label()));
    if (!t.is_compound()) continue;
    std::size_t id = visit(t);
    is_root.resize(nodes.size(), false);
    is_root[id] = true;
  }
  is_root.resize(nodes.size(), false);

  bool single_start = opts.name_start && terms.size() == 1 && terms[0].is_compound();
  std::uint64_t next = opts.first_nonterminal ? opts.first_nonterminal : max_leaf + 1;
  std::vector<std::string> name(nodes.size());
  DagGrammar g;

  // Postorder emission; inline nodes are rebuilt inside their parent.
  std::vector<std::optional<ProofTerm>> built(nodes.size());
  std::function<ProofTerm(const ProofTerm&)> emit = [&](const ProofTerm& t) -> ProofTerm {
    if (!t.is_compound()) return t;
    std::size_t id = number.at(t);
    if (built[id]) return *built[id];
    std::vector<ProofTerm> kids;
    for (const auto& c : t.children()) kids.push_back(emit(c));
    ProofTerm rhs = t.is_det() ? ProofTerm::det(kids[0], kids[1]) : ProofTerm::pattern(t.label(), std::move(kids));
    if (parents[id] >= 2 || is_root[id]) {
      name[id] = (single_start && is_root[id]) ? "Start" : std::to_string(next++);
      g.add_production(name[id], rhs);
      built[id] = ProofTerm::axiom(name[id]);
    } else {
      built[id] = rhs;
    }
    return *built[id];
  };
  for (const auto& t : terms) g.add_root(emit(t));
  return g;
}

std::uint64_t grammar_size(const DagGrammar& g) {
  std::uint64_t n = 0;
  for (const auto& p : g.productions()) n += tsize(p.rhs);
  for (const auto& r : g.roots()) n += tsize(r);
  return n;
}

std::uint64_t ref_count(const DagGrammar& g, const std::string& nonterminal) {
  if (!g.find(nonterminal)) throw ConfigError("unknown nonterminal " + nonterminal);
  std::uint64_t n = 0;
  auto count = [&](const ProofTerm& l) { n += l.is_axiom() && l.label() == nonterminal; };
  for (const auto& p : g.productions()) for_each_leaf(p.rhs, count);
  for (const auto& r : g.roots()) for_each_leaf(r, count);
  return n;
}

std::int64_t save_value(const DagGrammar& g, const std::string& nonterminal) {
  const Production* p = g.find(nonterminal);
  if (!p) throw ConfigError("unknown nonterminal " + nonterminal);
  auto refs = static_cast<std::int64_t>(ref_count(g, nonterminal));
  return (refs - 1) * static_cast<std::int64_t>(tsize(p->rhs));
}

DagGrammar unfold(const DagGrammar& g, const std::string& nonterminal) {
  const Production* target = g.find(nonterminal);
  if (!target) throw ConfigError("unknown nonterminal " + nonterminal);
  ProofTerm body = target->rhs;
  auto leaf = [&](const ProofTerm& l) { return l.is_axiom() && l.label() == nonterminal ? body : l; };
  DagGrammar out;
  for (const auto& p : g.productions()) {
    if (p.lhs == nonterminal) continue;
    Memo memo;
    out.add_production(p.lhs, map_leaves(p.rhs, leaf, memo), p.annotation);
  }
  for (const auto& r : g.roots()) {
    Memo memo;
    out.add_root(map_leaves(r, leaf, memo));
  }
  return out;
}

std::optional<Formula> grammar_mgt(const DagGrammar& g, const std::string& symbol, const AxiomSystem& ax,
                                   const SchemaTable* schemas) {
  ProofTerm t = g.is_nonterminal(symbol) ? g.expand(symbol) : ProofTerm::axiom(symbol);
  return mgt(t, ax, schemas);
}

DagGrammar parse_grammar(std::string_view text) {
  DagGrammar g;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  std::optional<std::vector<std::string>> roots;
  auto fail = [&](const std::string& msg) -> void {
    throw ParseError("grammar line " + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::string s = trim(line);
    if (s.empty()) continue;
    if (s.rfind("roots", 0) == 0 && (s.size() == 5 || std::isspace(static_cast<unsigned char>(s[5])))) {
      if (roots) fail("duplicate roots line");
      std::istringstream ls(s.substr(5));
      roots.emplace();
      for (std::string r; ls >> r;) roots->push_back(r);
      continue;
    }
    std::size_t arrow = s.find("->");
    std::size_t skip = 2;
    if (arrow == std::string::npos) {
      arrow = s.find("\xE2\x86\x92");
      skip = 3;
    }
    if (arrow == std::string::npos) {
      arrow = s.find('=');
      skip = 1;
    }
    if (arrow == std::string::npos) fail("expected '->'");
    std::string lhs = trim(s.substr(0, arrow));
    std::string rest = s.substr(arrow + skip);
    std::optional<Formula> annotation;
    auto colon = rest.find(':');
    if (colon != std::string::npos) {
      try {
        annotation = parse_formula(rest.substr(colon + 1));
      } catch (const ParseError& e) {
        fail(std::string("annotation: ") + e.what());
      }
      rest.resize(colon);
    }
    if (lhs.empty() || !std::all_of(lhs.begin(), lhs.end(), [](unsigned char c) { return std::isalnum(c) || c == '_'; }))
      fail("bad nonterminal '" + lhs + "'");
    std::optional<ProofTerm> rhs;
    try {
      rhs = parse_proof_term(rest);
    } catch (const ParseError& e) {
      fail(e.what());
    }
    try {
      g.add_production(lhs, *rhs, annotation);
    } catch (const ConfigError& e) {
      fail(e.what());
    }
  }
  if (roots) {
    for (const auto& r : *roots) g.add_root(ProofTerm::axiom(r));
  } else if (g.find("Start")) {
    g.add_root(ProofTerm::axiom("Start"));
  } else if (!g.productions().empty()) {
    g.add_root(ProofTerm::axiom(g.productions().back().lhs));
  }
  return g;
}

std::string print_grammar(const DagGrammar& g) {
  std::string out;
  for (const auto& p : g.productions()) {
    out += p.lhs;
    out += " -> ";
    out += print_proof_term(p.rhs);
    if (p.annotation) {
      out += " : ";
      out += print_formula(*p.annotation);
    }
    out += '\n';
  }
  const auto& roots = g.roots();
  bool implicit = false;
  if (roots.size() == 1 && roots[0].is_axiom()) {
    const std::string& r = roots[0].label();
    implicit = g.find("Start") ? r == "Start" : (!g.productions().empty() && r == g.productions().back().lhs);
  } else if (roots.empty()) {
    implicit = g.productions().empty();
  }
  bool leaves = std::all_of(roots.begin(), roots.end(), [](const ProofTerm& r) { return !r.is_compound(); });
  if (!implicit) {
    if (!leaves) throw ConfigError("cannot print a grammar with unfolded roots");
    out += "roots";
    for (const auto& r : roots) out += ' ' + r.label();
    out += '\n';
  }
  return out;
}

}  // namespace cdgen
