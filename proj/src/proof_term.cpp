#include "cdgen/proof_term.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <limits>
#include <set>
#include <unordered_set>

#include "cdgen/errors.hpp"

namespace cdgen {

namespace {

std::size_t mix(std::size_t h, std::size_t v) {
  std::uint64_t x = h ^ (v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2));
  x ^= x >> 31;
  x *= 0xbf58476d1ce4e5b9ull;
  return static_cast<std::size_t>(x ^ (x >> 27));
}

std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r = a + b;
  return r < a ? std::numeric_limits<std::uint64_t>::max() : r;
}

struct PairHash {
  std::size_t operator()(const std::pair<const void*, const void*>& p) const {
    return mix(std::hash<const void*>()(p.first), std::hash<const void*>()(p.second));
  }
};

bool equal_rec(const ProofTerm& a, const ProofTerm& b,
               std::unordered_set<std::pair<const void*, const void*>, PairHash>& seen) {
  if (a.node_id() == b.node_id()) return true;
  if (a.hash() != b.hash() || a.kind() != b.kind() || a.label() != b.label() ||
      a.param_index() != b.param_index() || a.children().size() != b.children().size())
    return false;
  if (!seen.insert({a.node_id(), b.node_id()}).second) return true;
  for (std::size_t i = 0; i < a.children().size(); ++i)
    if (!equal_rec(a.children()[i], b.children()[i], seen)) return false;
  return true;
}

}  // namespace

ProofTerm ProofTerm::axiom(std::string id) {
  if (id.empty()) throw ConfigError("empty axiom identifier");
  auto n = std::make_shared<Node>();
  n->kind = Kind::Axiom;
  n->hash = mix(1, std::hash<std::string>()(id));
  n->label = std::move(id);
  return ProofTerm(std::move(n));
}

ProofTerm ProofTerm::det(ProofTerm left, ProofTerm right) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Det;
  n->hash = mix(mix(2, left.hash()), right.hash());
  n->children = {std::move(left), std::move(right)};
  return ProofTerm(std::move(n));
}

ProofTerm ProofTerm::pattern(std::string symbol, std::vector<ProofTerm> args) {
  if (args.empty()) throw ConfigError("pattern application without arguments");
  auto n = std::make_shared<Node>();
  n->kind = Kind::Pattern;
  std::size_t h = mix(3, std::hash<std::string>()(symbol));
  for (const auto& a : args) h = mix(h, a.hash());
  n->hash = h;
  n->label = std::move(symbol);
  n->children = std::move(args);
  return ProofTerm(std::move(n));
}

ProofTerm ProofTerm::param(std::uint32_t index) {
  if (index == 0) throw ConfigError("parameter indices start at 1");
  auto n = std::make_shared<Node>();
  n->kind = Kind::Param;
  n->param = index;
  n->hash = mix(4, index);
  return ProofTerm(std::move(n));
}

bool operator==(const ProofTerm& a, const ProofTerm& b) {
  std::unordered_set<std::pair<const void*, const void*>, PairHash> seen;
  return equal_rec(a, b, seen);
}

// Measures.

namespace {

template <typename Combine>
std::uint64_t measure(const ProofTerm& d, std::unordered_map<const void*, std::uint64_t>& memo,
                      Combine combine) {
  if (!d.is_compound()) return 0;
  auto it = memo.find(d.node_id());
  if (it != memo.end()) return it->second;
  std::uint64_t acc = 0;
  bool first = true;
  for (const auto& c : d.children()) {
    std::uint64_t v = measure(c, memo, combine);
    acc = first ? v : combine(acc, v);
    first = false;
  }
  std::uint64_t r = sat_add(acc, 1);
  memo.emplace(d.node_id(), r);
  return r;
}

// Value numbering of distinct subterms; compound ones are recorded in
// postorder.
class ValueNumbering {
 public:
  int number(const ProofTerm& d) {
    auto it = memo_.find(d.node_id());
    if (it != memo_.end()) return it->second;
    std::vector<int> key;
    key.push_back(static_cast<int>(d.kind()));
    key.push_back(static_cast<int>(d.param_index()));
    for (const auto& c : d.children()) key.push_back(number(c));
    std::string label = d.label();
    auto [pos, inserted] = table_.emplace(std::make_pair(std::move(label), std::move(key)),
                                          static_cast<int>(table_.size()));
    if (inserted && d.is_compound()) compound_.push_back(d);
    memo_.emplace(d.node_id(), pos->second);
    keep_.push_back(d);
    return pos->second;
  }
  std::vector<ProofTerm>& compound() { return compound_; }

 private:
  std::unordered_map<const void*, int> memo_;
  std::map<std::pair<std::string, std::vector<int>>, int> table_;
  std::vector<ProofTerm> compound_;
  std::vector<ProofTerm> keep_;
};

}  // namespace

std::uint64_t tsize(const ProofTerm& d) {
  std::unordered_map<const void*, std::uint64_t> memo;
  return measure(d, memo, sat_add);
}

std::uint64_t height(const ProofTerm& d) {
  std::unordered_map<const void*, std::uint64_t> memo;
  return measure(d, memo, [](std::uint64_t a, std::uint64_t b) { return std::max(a, b); });
}

std::uint64_t csize(const ProofTerm& d) { return subterms(d).size(); }

std::vector<ProofTerm> subterms(const ProofTerm& d) {
  ValueNumbering vn;
  vn.number(d);
  return std::move(vn.compound());
}

// Text syntax.

namespace {

class TermParser {
 public:
  explicit TermParser(std::string_view text) : text_(text) {}

  ProofTerm parse_all() {
    ProofTerm t = term();
    skip_ws();
    if (pos_ != text_.size()) throw ParseError("unexpected trailing input", pos_);
    return t;
  }

 private:
  static bool ident_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
  }
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool peek(char c) {
    skip_ws();
    return pos_ < text_.size() && text_[pos_] == c;
  }
  void expect(char c) {
    if (!peek(c)) throw ParseError(std::string("expected '") + c + "'", pos_);
    ++pos_;
  }

  ProofTerm term() {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < text_.size() && ident_char(text_[pos_])) ++pos_;
    if (pos_ == start) {
      if (pos_ >= text_.size()) throw ParseError("unexpected end of proof term", pos_);
      throw ParseError(std::string("unexpected character '") + text_[pos_] + "'", pos_);
    }
    std::string id(text_.substr(start, pos_ - start));
    if (peek('(')) {
      ++pos_;
      std::vector<ProofTerm> args{term()};
      while (peek(',')) {
        ++pos_;
        args.push_back(term());
      }
      expect(')');
      if (id == "D") {
        if (args.size() != 2) throw ParseError("D takes two arguments", start);
        return ProofTerm::det(std::move(args[0]), std::move(args[1]));
      }
      return ProofTerm::pattern(std::move(id), std::move(args));
    }
    if (id.size() > 1 && id.size() < 9 && id[0] == 'V' &&
        std::all_of(id.begin() + 1, id.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      unsigned long v = std::stoul(id.substr(1));
      if (v == 0 || v > 1000000) throw ParseError("bad parameter index", start);
      return ProofTerm::param(static_cast<std::uint32_t>(v));
    }
    if (id == "D") throw ParseError("D needs arguments", start);
    return ProofTerm::axiom(std::move(id));
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

void print_rec(const ProofTerm& d, std::string& out) {
  switch (d.kind()) {
    case ProofTerm::Kind::Axiom:
      out += d.label();
      return;
    case ProofTerm::Kind::Param:
      out += 'V';
      out += std::to_string(d.param_index());
      return;
    case ProofTerm::Kind::Det:
      out += "D(";
      break;
    case ProofTerm::Kind::Pattern:
      out += d.label();
      out += '(';
      break;
  }
  for (std::size_t i = 0; i < d.children().size(); ++i) {
    if (i) out += ',';
    print_rec(d.children()[i], out);
  }
  out += ')';
}

}  // namespace

ProofTerm parse_proof_term(std::string_view text) { return TermParser(text).parse_all(); }

std::string print_proof_term(const ProofTerm& d) {
  std::string out;
  print_rec(d, out);
  return out;
}

// Axiom systems and schemas.

AxiomSystem AxiomSystem::table1() {
  AxiomSystem ax;
  ax.add("1", parse_formula("(x => (y => x))"));
  ax.add("2", parse_formula("((x => (y => z)) => ((x => y) => (x => z)))"));
  ax.add("3", parse_formula("((n(x) => n(y)) => (y => x))"));
  return ax;
}

void AxiomSystem::add(const std::string& id, const Formula& f) {
  auto it = index_.find(id);
  if (it != index_.end()) {
    entries_[it->second].second = canonical(f);
    return;
  }
  index_.emplace(id, entries_.size());
  entries_.emplace_back(id, canonical(f));
}

const Formula* AxiomSystem::find(const std::string& id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &entries_[it->second].second;
}

std::uint64_t AxiomSystem::max_numeric_id() const {
  std::uint64_t m = 0;
  for (const auto& [id, f] : entries_) {
    if (id.size() > 18 || !std::all_of(id.begin(), id.end(), [](char c) { return c >= '0' && c <= '9'; }))
      continue;
    m = std::max<std::uint64_t>(m, std::stoull(id));
  }
  return m;
}

void SchemaTable::check_fresh(const std::string& symbol) const {
  if (symbol.empty() || symbol == "D") throw ConfigError("bad schema symbol '" + symbol + "'");
  if (pattern(symbol) || direct(symbol)) throw ConfigError("duplicate schema symbol " + symbol);
}

void SchemaTable::add_pattern(PatternSchema p) {
  if (p.arity == 0) throw ConfigError("pattern " + p.symbol + " needs arity >= 1");
  check_fresh(p.symbol);
  p.type = canonical(p.type);
  patterns_.push_back(std::move(p));
}

void SchemaTable::add_direct(DirectSchema d) {
  if (d.arity == 0) throw ConfigError("direct schema " + d.symbol + " needs arity >= 1");
  check_fresh(d.symbol);
  d.type = canonical(d.type);
  directs_.push_back(std::move(d));
}

const PatternSchema* SchemaTable::pattern(const std::string& symbol) const {
  for (const auto& p : patterns_)
    if (p.symbol == symbol) return &p;
  return nullptr;
}

const DirectSchema* SchemaTable::direct(const std::string& symbol) const {
  for (const auto& d : directs_)
    if (d.symbol == symbol) return &d;
  return nullptr;
}

const Formula* SchemaTable::constant(const std::string& symbol) const {
  const DirectSchema* d = direct(symbol);
  return d ? &d->type : nullptr;
}

// MGT.

const Formula& MgtEvaluator::leaf_formula(const std::string& id) const {
  if (const Formula* f = ax_.find(id)) return *f;
  if (schemas_)
    if (const Formula* f = schemas_->constant(id)) return *f;
  throw ConfigError("unknown axiom identifier " + id);
}

std::optional<Formula> MgtEvaluator::operator()(const ProofTerm& d) {
  switch (d.kind()) {
    case ProofTerm::Kind::Axiom:
      return leaf_formula(d.label());
    case ProofTerm::Kind::Param:
      throw ConfigError("parameter V" + std::to_string(d.param_index()) + " in a unit proof term");
    default:
      break;
  }
  auto it = memo_.find(d.node_id());
  if (it != memo_.end()) return it->second.second;
  std::optional<Formula> result;
  if (d.is_det()) {
    auto l = (*this)(d.left());
    if (l) {
      auto r = (*this)(d.right());
      if (r) result = detach(*l, *r);
    }
  } else {
    const PatternSchema* p = schemas_ ? schemas_->pattern(d.label()) : nullptr;
    if (!p) throw ConfigError("undeclared pattern " + d.label());
    if (p->arity != d.children().size())
      throw ConfigError("pattern " + d.label() + " expects " + std::to_string(p->arity) + " arguments");
    std::optional<Formula> acc = p->type;
    for (const auto& a : d.children()) {
      auto f = (*this)(a);
      if (!f) {
        acc.reset();
        break;
      }
      acc = detach(*acc, *f);
      if (!acc) break;
    }
    result = std::move(acc);
  }
  memo_.emplace(d.node_id(), std::make_pair(d, result));
  return result;
}

std::optional<Formula> mgt(const ProofTerm& d, const AxiomSystem& ax, const SchemaTable* schemas) {
  MgtEvaluator eval(ax, schemas);
  return eval(d);
}

Formula DefiniteMgt::implication_form() const {
  Formula f = head;
  for (std::size_t i = body.size(); i-- > 0;) f = Formula::imp(body[i], f);
  return canonical(f);
}

std::uint32_t max_param(const ProofTerm& d) {
  std::unordered_map<const void*, std::uint32_t> memo;
  std::function<std::uint32_t(const ProofTerm&)> rec = [&](const ProofTerm& t) -> std::uint32_t {
    if (t.is_param()) return t.param_index();
    if (t.is_axiom()) return 0;
    auto it = memo.find(t.node_id());
    if (it != memo.end()) return it->second;
    std::uint32_t m = 0;
    for (const auto& c : t.children()) m = std::max(m, rec(c));
    memo.emplace(t.node_id(), m);
    return m;
  };
  return rec(d);
}

std::optional<DefiniteMgt> mgt_definite(const ProofTerm& d, const AxiomSystem& ax,
                                        const SchemaTable* schemas) {
  std::uint32_t n = max_param(d);
  if (n == 0) {
    auto f = mgt(d, ax, schemas);
    if (!f) return std::nullopt;
    return DefiniteMgt{*f, {}};
  }
  std::set<std::uint32_t> seen;
  std::unordered_set<const void*> visited;
  std::function<void(const ProofTerm&)> collect = [&](const ProofTerm& t) {
    if (t.is_param()) seen.insert(t.param_index());
    if (!t.is_compound() || !visited.insert(t.node_id()).second) return;
    for (const auto& c : t.children()) collect(c);
  };
  collect(d);
  if (seen.size() != n) throw ConfigError("parameters must be numbered 1..n without gaps");

  MgtEvaluator unit(ax, schemas);
  UnifyArena arena;
  std::vector<UnifyArena::Cell> params(n + 1, -1);
  std::unordered_map<const void*, bool> has_params_memo;
  std::function<bool(const ProofTerm&)> has_params = [&](const ProofTerm& t) -> bool {
    if (t.is_param()) return true;
    if (t.is_axiom()) return false;
    auto it = has_params_memo.find(t.node_id());
    if (it != has_params_memo.end()) return it->second;
    bool r = std::any_of(t.children().begin(), t.children().end(), has_params);
    has_params_memo.emplace(t.node_id(), r);
    return r;
  };
  auto fresh_copy = [&](const Formula& f) {
    std::vector<UnifyArena::Cell> vars;
    return arena.build(f.code(), vars);
  };
  auto step = [&](UnifyArena::Cell major, UnifyArena::Cell minor) -> std::optional<UnifyArena::Cell> {
    auto y = arena.fresh_var();
    if (!arena.unify(major, arena.make_imp(minor, y))) return std::nullopt;
    return y;
  };
  std::function<std::optional<UnifyArena::Cell>(const ProofTerm&)> eval =
      [&](const ProofTerm& t) -> std::optional<UnifyArena::Cell> {
    if (t.is_param()) {
      auto& c = params[t.param_index()];
      if (c < 0) c = arena.fresh_var();
      return c;
    }
    if (t.is_axiom()) return fresh_copy(unit.leaf_formula(t.label()));
    if (!has_params(t)) {
      auto f = unit(t);
      if (!f) return std::nullopt;
      return fresh_copy(*f);
    }
    if (t.is_det()) {
      auto l = eval(t.left());
      if (!l) return std::nullopt;
      auto r = eval(t.right());
      if (!r) return std::nullopt;
      return step(*l, *r);
    }
    const PatternSchema* p = schemas ? schemas->pattern(t.label()) : nullptr;
    if (!p) throw ConfigError("undeclared pattern " + t.label());
    if (p->arity != t.children().size())
      throw ConfigError("pattern " + t.label() + " expects " + std::to_string(p->arity) + " arguments");
    std::optional<UnifyArena::Cell> acc = fresh_copy(p->type);
    for (const auto& a : t.children()) {
      auto c = eval(a);
      if (!c) return std::nullopt;
      acc = step(*acc, *c);
      if (!acc) return std::nullopt;
    }
    return acc;
  };
  auto root = eval(d);
  if (!root) return std::nullopt;
  arena.begin_naming();
  DefiniteMgt out;
  for (std::uint32_t i = 1; i <= n; ++i) out.body.push_back(arena.read_formula(params[i]));
  out.head = arena.read_formula(*root);
  return out;
}

bool proves(const ProofTerm& d, const Formula& target, const AxiomSystem& ax, const SchemaTable* schemas) {
  auto f = mgt(d, ax, schemas);
  return f && subsumes(*f, target);
}

}  // namespace cdgen
