#include "cdgen/combinator.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <map>
#include <sstream>
#include <unordered_map>

#include "cdgen/errors.hpp"

namespace cdgen {

namespace {

struct Primitive {
  const char* name;
  std::size_t arity;
  const char* type;
};

const Primitive kPrimitives[] = {
    {"S", 3, "((x => (y => z)) => ((x => y) => (x => z)))"},
    {"K", 2, "(x => (y => x))"},
    {"I", 1, "(x => x)"},
    {"B", 3, "((x => y) => ((z => x) => (z => y)))"},
    {"C", 3, "((x => (y => z)) => (y => (x => z)))"},
    {"S4", 4, "((x => (y => z)) => ((u => x) => ((u => y) => (u => z))))"},
    {"B4", 4, "((x => y) => ((z => x) => ((u => z) => (u => y))))"},
    {"C4", 4, "((x => (y => z)) => ((u => x) => (y => (u => z))))"},
};

const Primitive* find_primitive(const std::string& name) {
  for (const auto& p : kPrimitives)
    if (name == p.name) return &p;
  return nullptr;
}

ProofTerm leaf(const char* name) { return ProofTerm::axiom(name); }
ProofTerm app(ProofTerm f, ProofTerm a) { return ProofTerm::det(std::move(f), std::move(a)); }


bool is_prim_leaf(const ProofTerm& t, const char* name) { return t.is_axiom() && t.label() == name; }

// Right-hand side of a primitive's reduction rule.
ProofTerm contract(const std::string& name, const std::vector<ProofTerm>& a) {
  if (name == "S") return app(app(a[0], a[2]), app(a[1], a[2]));
  if (name == "K") return a[0];
  if (name == "I") return a[0];
  if (name == "B") return app(a[0], app(a[1], a[2]));
  if (name == "C") return app(app(a[0], a[2]), a[1]);
  if (name == "S4") return app(app(a[0], app(a[1], a[3])), app(a[2], a[3]));
  if (name == "B4") return app(a[0], app(a[1], app(a[2], a[3])));
  if (name == "C4") return app(app(a[0], app(a[1], a[3])), a[2]);
  throw ConfigError("no reduction rule for " + name);
}

class Reducer {
 public:
  explicit Reducer(std::uint64_t budget) : budget_(budget) {}

  ProofTerm normal_form(const ProofTerm& t) {
    if (!t.is_compound()) return t;
    auto it = memo_.find(t.node_id());
    if (it != memo_.end()) return it->second.second;
    ProofTerm cur = t;
    std::vector<ProofTerm> args;
    for (;;) {
      args.clear();
      ProofTerm head = cur;
      while (head.is_det()) {
        args.push_back(head.right());
        ProofTerm next = head.left();
        head = next;
      }
      std::reverse(args.begin(), args.end());
      const Primitive* p = head.is_axiom() ? find_primitive(head.label()) : nullptr;
      if (!p || args.size() < p->arity) {
        ProofTerm h = head;
        if (head.is_pattern()) {
          std::vector<ProofTerm> kids;
          for (const auto& c : head.children()) kids.push_back(normal_form(c));
          h = ProofTerm::pattern(head.label(), std::move(kids));
        }
        for (const auto& a : args) h = app(h, normal_form(a));
        memo_.emplace(t.node_id(), std::make_pair(t, h));
        return h;
      }
      if (++steps_ > budget_) throw BudgetExceeded("reduction step budget exhausted");
      std::vector<ProofTerm> used(args.begin(), args.begin() + static_cast<std::ptrdiff_t>(p->arity));
      ProofTerm r = contract(p->name, used);
      for (std::size_t i = p->arity; i < args.size(); ++i) r = app(r, args[i]);
      cur = r;
    }
  }

 private:
  std::uint64_t budget_;
  std::uint64_t steps_ = 0;
  std::unordered_map<const void*, std::pair<ProofTerm, ProofTerm>> memo_;
};

// Combinator expression parser.
class CombParser {
 public:
  explicit CombParser(std::string_view text) : text_(text) {}

  ProofTerm parse_all() {
    ProofTerm t = expr();
    skip_ws();
    if (pos_ != text_.size()) throw ParseError("unexpected trailing input in combinator", pos_);
    return t;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool at_atom() {
    skip_ws();
    return pos_ < text_.size() && (text_[pos_] == '(' || std::isalnum(static_cast<unsigned char>(text_[pos_])));
  }
  ProofTerm atom() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of combinator", pos_);
    if (text_[pos_] == '(') {
      ++pos_;
      ProofTerm t = expr();
      skip_ws();
      if (pos_ >= text_.size() || text_[pos_] != ')') throw ParseError("expected ')'", pos_);
      ++pos_;
      return t;
    }
    std::size_t start = pos_;
    // Names are a capital letter with an optional digit suffix.
    if (!std::isupper(static_cast<unsigned char>(text_[pos_])))
      throw ParseError("expected a combinator name", pos_);
    ++pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    std::string name(text_.substr(start, pos_ - start));
    if (!find_primitive(name)) throw ParseError("unknown combinator " + name, start);
    return ProofTerm::axiom(name);
  }
  ProofTerm expr() {
    ProofTerm t = atom();
    while (at_atom()) t = app(t, atom());
    return t;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

void print_comb(const ProofTerm& c, std::string& out) {
  if (c.is_axiom()) {
    out += c.label();
    return;
  }
  if (!c.is_det()) throw ConfigError("not a combinator expression");
  print_comb(c.left(), out);
  if (c.right().is_det()) {
    out += '(';
    print_comb(c.right(), out);
    out += ')';
  } else {
    out += ' ';
    print_comb(c.right(), out);
  }
}

bool mentions_param(const ProofTerm& t, std::uint32_t k, std::unordered_map<const void*, bool>& memo) {
  if (t.is_param()) return t.param_index() == k;
  if (t.is_axiom()) return false;
  auto it = memo.find(t.node_id());
  if (it != memo.end()) return it->second;
  bool r = false;
  for (const auto& c : t.children()) r = r || mentions_param(c, k, memo);
  memo.emplace(t.node_id(), r);
  return r;
}

// Matches D(D(B, p), q).
bool b_form(const ProofTerm& t, ProofTerm* p, ProofTerm* q) {
  if (!t.is_det() || !t.left().is_det() || !is_prim_leaf(t.left().left(), "B")) return false;
  *p = t.left().right();
  *q = t.right();
  return true;
}

class Abstractor {
 public:
  explicit Abstractor(std::uint32_t var) : var_(var) {}

  ProofTerm abstract(const ProofTerm& m) {
    if (m.is_param() && m.param_index() == var_) return leaf("I");
    if (!free(m)) return app(leaf("K"), m);
    if (m.is_pattern()) throw ConfigError("cannot abstract a parameter inside a pattern node");
    auto it = memo_.find(m.node_id());
    if (it != memo_.end()) return it->second.second;
    const ProofTerm& p = m.left();
    const ProofTerm& q = m.right();
    bool fp = free(p);
    bool fq = free(q);
    ProofTerm r = m;
    ProofTerm b1 = m, b2 = m;
    if (!fp && q.is_param() && q.param_index() == var_) {
      r = p;
    } else if (!fp) {
      ProofTerm aq = abstract(q);
      r = b_form(aq, &b1, &b2) ? app(app(app(leaf("B4"), p), b1), b2) : app(app(leaf("B"), p), aq);
    } else if (!fq) {
      ProofTerm ap = abstract(p);
      r = b_form(ap, &b1, &b2) ? app(app(app(leaf("C4"), b1), b2), q) : app(app(leaf("C"), ap), q);
    } else {
      ProofTerm ap = abstract(p);
      ProofTerm aq = abstract(q);
      r = b_form(ap, &b1, &b2) ? app(app(app(leaf("S4"), b1), b2), aq) : app(app(leaf("S"), ap), aq);
    }
    memo_.emplace(m.node_id(), std::make_pair(m, r));
    return r;
  }

 private:
  bool free(const ProofTerm& t) { return mentions_param(t, var_, free_memo_); }

  std::uint32_t var_;
  std::unordered_map<const void*, bool> free_memo_;
  std::unordered_map<const void*, std::pair<ProofTerm, ProofTerm>> memo_;
};

std::string find_axiom_like(const AxiomSystem& ax, const Formula& f) {
  for (const auto& [id, g] : ax.entries())
    if (variant_eq(g, f) && !find_primitive(id)) return id;
  return {};
}

}  // namespace

const std::vector<std::string>& primitive_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& p : kPrimitives) n.emplace_back(p.name);
    return n;
  }();
  return names;
}

bool is_primitive(const std::string& name) { return find_primitive(name) != nullptr; }

const Formula& primitive_type(const std::string& name) {
  static const std::map<std::string, Formula> types = [] {
    std::map<std::string, Formula> m;
    for (const auto& p : kPrimitives) m.emplace(p.name, parse_formula(p.type));
    return m;
  }();
  auto it = types.find(name);
  if (it == types.end()) throw ConfigError("unknown primitive combinator " + name);
  return it->second;
}

std::size_t primitive_rule_arity(const std::string& name) {
  const Primitive* p = find_primitive(name);
  if (!p) throw ConfigError("unknown primitive combinator " + name);
  return p->arity;
}

void add_primitive_combinators(AxiomSystem& ax) {
  for (const auto& name : primitive_names()) ax.add(name, primitive_type(name));
}

AxiomSystem primitive_axioms() {
  AxiomSystem ax;
  add_primitive_combinators(ax);
  return ax;
}

ProofTerm parse_combinator(std::string_view text) { return CombParser(text).parse_all(); }

std::string print_combinator(const ProofTerm& c) {
  std::string out;
  print_comb(c, out);
  return out;
}

bool is_combinator_expression(const ProofTerm& c) {
  if (c.is_axiom()) return is_primitive(c.label());
  if (!c.is_det()) return false;
  return is_combinator_expression(c.left()) && is_combinator_expression(c.right());
}

std::optional<Formula> principal_type(const ProofTerm& c) {
  if (!is_combinator_expression(c)) throw ConfigError("not a combinator expression");
  static const AxiomSystem prims = primitive_axioms();
  return mgt(c, prims);
}

ProofTerm apply_params(const ProofTerm& c, std::uint32_t k) {
  ProofTerm t = c;
  for (std::uint32_t i = 1; i <= k; ++i) t = app(t, ProofTerm::param(i));
  return t;
}

ProofTerm reduce(const ProofTerm& d, std::uint64_t budget) { return Reducer(budget).normal_form(d); }

bool contains_primitive(const ProofTerm& d) {
  std::unordered_map<const void*, bool> memo;
  std::function<bool(const ProofTerm&)> rec = [&](const ProofTerm& t) -> bool {
    if (t.is_axiom()) return is_primitive(t.label());
    if (t.is_param()) return false;
    auto it = memo.find(t.node_id());
    if (it != memo.end()) return it->second;
    bool r = std::any_of(t.children().begin(), t.children().end(), rec);
    memo.emplace(t.node_id(), r);
    return r;
  };
  return rec(d);
}

std::uint32_t standard_arity(const ProofTerm& c) {
  for (std::uint32_t k = 1; k <= 32; ++k)
    if (!contains_primitive(reduce(apply_params(c, k)))) return k;
  throw DomainError("no standard arity up to 32 for " + print_combinator(c));
}

ProofTerm bracket_abstract(const ProofTerm& d) {
  ProofTerm t = d;
  for (std::uint32_t k = max_param(d); k >= 1; --k) t = Abstractor(k).abstract(t);
  return t;
}

ProofTerm primitive_proof(const std::string& name, const std::string& k_id, const std::string& s_id) {
  ProofTerm k = ProofTerm::axiom(k_id);
  ProofTerm s = ProofTerm::axiom(s_id);
  // B = S(KS)K and C = S(K(S(S(KK))))(S(KK)S), written with D as application.
  ProofTerm b = app(app(s, app(k, s)), k);
  ProofTerm c = app(app(s, app(k, app(app(s, s), app(k, k)))), app(app(s, app(k, k)), s));
  if (name == "K") return k;
  if (name == "S") return s;
  if (name == "I") return app(app(s, k), k);
  if (name == "B") return b;
  if (name == "C") return c;
  // B4 = S(K(S(KB)))B, S4 = B(BS)B, C4 = B(BC)B.
  if (name == "B4") return app(app(s, app(k, app(s, app(k, b)))), b);
  if (name == "S4") return app(app(b, app(b, s)), b);
  if (name == "C4") return app(app(b, app(b, c)), b);
  throw ConfigError("unknown primitive combinator " + name);
}

std::optional<ProofTerm> eliminate_combinators(const ProofTerm& d, const AxiomSystem& ax) {
  if (!contains_primitive(d)) return d;
  std::string k_id = find_axiom_like(ax, primitive_type("K"));
  std::string s_id = find_axiom_like(ax, primitive_type("S"));
  if (k_id.empty() || s_id.empty()) return std::nullopt;
  std::map<std::string, ProofTerm> proofs;
  for (const auto& n : primitive_names()) proofs.emplace(n, primitive_proof(n, k_id, s_id));
  std::unordered_map<const void*, std::pair<ProofTerm, ProofTerm>> memo;
  std::function<ProofTerm(const ProofTerm&)> rec = [&](const ProofTerm& t) -> ProofTerm {
    if (t.is_axiom()) {
      auto it = proofs.find(t.label());
      return it == proofs.end() ? t : it->second;
    }
    if (t.is_param()) return t;
    auto it = memo.find(t.node_id());
    if (it != memo.end()) return it->second.second;
    std::vector<ProofTerm> kids;
    for (const auto& c : t.children()) kids.push_back(rec(c));
    ProofTerm r = t.is_det() ? app(kids[0], kids[1]) : ProofTerm::pattern(t.label(), std::move(kids));
    memo.emplace(t.node_id(), std::make_pair(t, r));
    return r;
  };
  return rec(d);
}

ProofTerm expand_patterns(const ProofTerm& d, const SchemaTable& schemas) {
  std::map<std::string, ProofTerm> combs;
  auto comb_of = [&](const std::string& symbol, const std::string& text) -> ProofTerm {
    auto it = combs.find(symbol);
    if (it != combs.end()) return it->second;
    if (text.empty()) throw ConfigError("schema " + symbol + " has no combinator");
    ProofTerm c = parse_combinator(text);
    combs.emplace(symbol, c);
    return c;
  };
  std::unordered_map<const void*, std::pair<ProofTerm, ProofTerm>> memo;
  std::function<ProofTerm(const ProofTerm&)> rec = [&](const ProofTerm& t) -> ProofTerm {
    if (t.is_param()) return t;
    if (t.is_axiom()) {
      const DirectSchema* ds = schemas.direct(t.label());
      return ds ? comb_of(ds->symbol, ds->combinator) : t;
    }
    auto it = memo.find(t.node_id());
    if (it != memo.end()) return it->second.second;
    std::vector<ProofTerm> kids;
    for (const auto& c : t.children()) kids.push_back(rec(c));
    ProofTerm r = t;
    if (t.is_det()) {
      r = app(kids[0], kids[1]);
    } else {
      const PatternSchema* p = schemas.pattern(t.label());
      if (!p) throw ConfigError("undeclared pattern " + t.label());
      ProofTerm c = comb_of(p->symbol, p->combinator);
      std::size_t i = 0;
      // I x = x, so an identity pattern reads as plain D.
      if (is_prim_leaf(c, "I")) {
        c = kids[0];
        i = 1;
      }
      for (; i < kids.size(); ++i) c = app(c, kids[i]);
      r = c;
    }
    memo.emplace(t.node_id(), std::make_pair(t, r));
    return r;
  };
  return rec(d);
}

ProofTerm unit_to_definite(const ProofTerm& d, std::uint32_t n, const AxiomSystem& ax, const SchemaTable* schemas) {
  auto f = mgt(d, ax, schemas);
  if (!f) throw DomainError("undefined MGT");
  Formula g = *f;
  for (std::uint32_t i = 0; i < n; ++i) {
    if (!g.is_imp()) throw DomainError("MGT has fewer than " + std::to_string(n) + " leading implications");
    g = g.rhs();
  }
  return apply_params(d, n);
}

ProofTerm definite_to_unit(const ProofTerm& d, const AxiomSystem& ax, const SchemaTable* schemas) {
  if (!mgt_definite(d, ax, schemas)) throw DomainError("undefined MGT");
  if (max_param(d) == 0) return d;
  ProofTerm src = schemas ? expand_patterns(d, *schemas) : d;
  ProofTerm c = bracket_abstract(src);
  auto e = eliminate_combinators(c, ax);
  if (!e) throw DomainError("axioms do not supply K and S for combinator elimination");
  return *e;
}

SchemaTable parse_schema_declarations(std::string_view text) {
  SchemaTable table;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string kind, symbol, eq;
    if (!(ls >> kind)) continue;
    auto fail = [&](const std::string& msg) {
      throw ParseError("schema line " + std::to_string(lineno) + ": " + msg);
    };
    if (kind != "pattern" && kind != "direct") fail("expected 'pattern' or 'direct'");
    if (!(ls >> symbol >> eq) || eq != "=") fail("expected '<symbol> ='");
    std::string rest;
    std::getline(ls, rest);
    std::string expr = rest;
    std::size_t arity = 0;
    auto slash = rest.find('/');
    if (slash != std::string::npos) {
      expr = rest.substr(0, slash);
      std::string a = rest.substr(slash + 1);
      a.erase(std::remove_if(a.begin(), a.end(), [](unsigned char c) { return std::isspace(c); }), a.end());
      if (a.empty() || !std::all_of(a.begin(), a.end(), [](unsigned char c) { return std::isdigit(c); }) ||
          a.size() > 3)
        fail("bad arity");
      arity = std::stoul(a);
    }
    ProofTerm c = [&] {
      try {
        return parse_combinator(expr);
      } catch (const ParseError& e) {
        fail(e.what());
      }
      throw ParseError("unreachable");
    }();
    if (arity == 0) {
      std::uint32_t sa = standard_arity(c);
      if (sa < 2) fail("default arity would be 0; give an explicit arity");
      arity = sa - 1;
    }
    auto type = principal_type(c);
    if (!type) fail("combinator has no principal type");
    std::string shown = print_combinator(c);
    if (kind == "pattern")
      table.add_pattern({symbol, arity, *type, shown});
    else
      table.add_direct({symbol, arity, *type, shown});
  }
  return table;
}

}  // namespace cdgen
