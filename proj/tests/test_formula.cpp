#include <map>
#include <memory>
#include <random>

#include "cdgen/errors.hpp"
#include "cdgen/formula.hpp"
#include "doctest.h"

using namespace cdgen;

namespace {

Formula F(const char* s) { return parse_formula(s); }

// Textbook unifier over pointer trees, used as a reference.
struct Tree {
  int tag;  // -1 imp, -2 neg, >=0 var
  std::shared_ptr<Tree> a, b;
};
using TreeP = std::shared_ptr<Tree>;

TreeP to_tree(std::span<const std::int32_t> code, std::size_t& pos) {
  auto t = std::make_shared<Tree>();
  t->tag = code[pos++];
  if (t->tag == -1) {
    t->a = to_tree(code, pos);
    t->b = to_tree(code, pos);
  } else if (t->tag == -2) {
    t->a = to_tree(code, pos);
  }
  return t;
}

TreeP subst(const std::map<int, TreeP>& s, const TreeP& t) {
  if (t->tag >= 0) {
    auto it = s.find(t->tag);
    return it == s.end() ? t : it->second;
  }
  auto r = std::make_shared<Tree>(*t);
  r->a = subst(s, t->a);
  if (t->b) r->b = subst(s, t->b);
  return r;
}

bool occurs_in(int v, const TreeP& t) {
  if (t->tag >= 0) return t->tag == v;
  return occurs_in(v, t->a) || (t->b && occurs_in(v, t->b));
}

bool tree_unify(TreeP x, TreeP y, std::map<int, TreeP>& s) {
  x = subst(s, x);
  y = subst(s, y);
  if (x->tag >= 0 && y->tag >= 0 && x->tag == y->tag) return true;
  if (x->tag < 0 && y->tag >= 0) std::swap(x, y);
  if (x->tag >= 0) {
    if (occurs_in(x->tag, y)) return false;
    std::map<int, TreeP> one{{x->tag, y}};
    for (auto& [k, v] : s) v = subst(one, v);
    s[x->tag] = y;
    return true;
  }
  if (x->tag != y->tag) return false;
  if (!tree_unify(x->a, y->a, s)) return false;
  if (x->b) return tree_unify(x->b, y->b, s);
  return true;
}

void tree_code(const TreeP& t, std::vector<std::int32_t>& out) {
  out.push_back(t->tag);
  if (t->a) tree_code(t->a, out);
  if (t->b) tree_code(t->b, out);
}

Formula random_formula(std::mt19937& rng, int depth, int nvars) {
  std::uniform_int_distribution<int> pick(0, 9);
  int r = pick(rng);
  if (depth == 0 || r < 3) return Formula::var(std::uniform_int_distribution<int>(0, nvars - 1)(rng));
  if (r < 5) return Formula::neg(random_formula(rng, depth - 1, nvars));
  return Formula::imp(random_formula(rng, depth - 1, nvars), random_formula(rng, depth - 1, nvars));
}

}  // namespace

TEST_CASE("parse and print") {
  CHECK(print_formula(F("(x => (y => x))")) == "(x => (y => x))");
  CHECK(print_formula(Formula::neg(Formula::var(0))) == "n(x)");
  CHECK(print_formula(Formula::var(6)) == "x1");
  CHECK(print_formula(Formula::var(13)) == "y2");
  CHECK(F("x => y => z") == F("(x => (y => z))"));
  CHECK(F("n((x => z))") == F("n((x=>z))"));
  CHECK(F("  ( n( x )=>y ) ") == F("(n(x) => y)"));
  CHECK(F("n") == Formula::var(F("n").var_index()));
  CHECK(print_formula(F("(a => b1)")) == "(a => b1)");
  CHECK_THROWS_AS(F("(x => y"), ParseError);
  CHECK_THROWS_AS(F("x y"), ParseError);
  CHECK_THROWS_AS(F(""), ParseError);
  CHECK_THROWS_AS(F("(x => Y)"), ParseError);
  try {
    F("(x => #)");
  } catch (const ParseError& e) {
    CHECK(e.position() == 6);
  }
}

TEST_CASE("print parse roundtrip on random formulas") {
  std::mt19937 rng(7);
  for (int i = 0; i < 2000; ++i) {
    Formula f = canonical(random_formula(rng, 6, 14));
    CHECK(parse_formula(print_formula(f)) == f);
  }
}

TEST_CASE("measures") {
  CHECK(f_tsize(F("x")) == 0);
  CHECK(f_height(F("x")) == 0);
  CHECK(f_tsize(F("(x => (y => x))")) == 2);
  CHECK(f_height(F("(n(x) => n(y))")) == 2);
  CHECK(f_height(F("((x => y) => ((z => x) => (z => y)))")) == 3);
  CHECK(f_tsize(F("((x => y) => ((z => x) => (z => y)))")) == 5);
  std::mt19937 rng(3);
  for (int i = 0; i < 1000; ++i) {
    Formula f = random_formula(rng, 6, 4);
    CHECK(f_tsize(f) >= f_height(f));
    CHECK((f_tsize(f) == 0) == f.is_var());
    CHECK((f_height(f) == 0) == f.is_var());
  }
}

TEST_CASE("variants and canonical form") {
  CHECK(variant_eq(F("x => y"), F("y => x")));
  CHECK_FALSE(variant_eq(F("x => x"), F("x => y")));
  CHECK(variant_eq(F("x => (y => x)"), F("z => (u => z)")));
  CHECK(canonical(F("(z => (a => z))")) == F("x => (y => x)"));
  CHECK(is_canonical(F("x => (y => x)")));
  CHECK_FALSE(is_canonical(F("y => x")));
  CHECK(F("(u => (x => u))").variables() == std::vector<VarIndex>{3, 0});
}

TEST_CASE("rename apart") {
  CHECK(variant_eq(rename_apart(F("x => y"), {}), F("x => y")));
  Formula r = rename_apart(F("x => y"), {0, 1});
  CHECK(variant_eq(r, F("x => y")));
  for (auto v : r.variables()) CHECK(v >= 2);
  std::mt19937 rng(11);
  for (int i = 0; i < 500; ++i) {
    Formula f = random_formula(rng, 5, 6);
    std::set<VarIndex> reserved{0, 2, 3, 9};
    Formula g = rename_apart(f, reserved);
    CHECK(variant_eq(g, f));
    for (auto v : g.variables()) CHECK(reserved.count(v) == 0);
  }
}

TEST_CASE("unify examples") {
  auto s = unify(F("x"), F("x"));
  REQUIRE(s);
  CHECK(s->empty());

  Formula f = F("x => (y => x)");
  Formula g = F("a => b");
  auto u = unify(f, g);
  REQUIRE(u);
  CHECK(apply(*u, f) == apply(*u, g));
  CHECK(variant_eq(apply(*u, g), f));

  CHECK_FALSE(unify(F("n(y)"), F("b => a")));
  CHECK_FALSE(unify(F("x"), F("x => y")));
  CHECK(unify(F("x"), F("n(x)")) == std::nullopt);
}

TEST_CASE("substitution basics") {
  Substitution s;
  s.bind(0, Formula::var(0));
  CHECK(s.empty());
  CHECK(apply(s, F("x => y")) == F("x => y"));
  s.bind(0, F("n(z)"));
  CHECK(apply(s, F("x => y")) == F("n(z) => y"));
}

TEST_CASE("unify agrees with a reference unifier") {
  std::mt19937 rng(2024);
  int unified = 0;
  for (int i = 0; i < 10000; ++i) {
    Formula f = random_formula(rng, 4, 4);
    Formula g = random_formula(rng, 4, 4);
    auto s = unify(f, g);
    std::map<int, TreeP> ts;
    std::size_t p = 0, q = 0;
    bool ok = tree_unify(to_tree(f.code(), p), to_tree(g.code(), q), ts);
    REQUIRE(s.has_value() == ok);
    if (!s) continue;
    ++unified;
    Formula fs = apply(*s, f);
    REQUIRE(fs == apply(*s, g));
    // Idempotence.
    CHECK(apply(*s, fs) == fs);
    for (auto& [v, img] : s->bindings()) CHECK(!(img.is_var() && img.var_index() == v));
    // Same most general instance as the reference, up to renaming.
    std::size_t r = 0;
    std::vector<std::int32_t> ref;
    tree_code(subst(ts, to_tree(f.code(), r)), ref);
    CHECK(variant_eq(fs, Formula::from_code(ref)));
  }
  CHECK(unified > 1000);
}

TEST_CASE("unify generality on instances") {
  std::mt19937 rng(5);
  for (int i = 0; i < 2000; ++i) {
    Formula f = random_formula(rng, 4, 4);
    Substitution sigma;
    for (VarIndex v : f.variables()) sigma.bind(v, rename_apart(random_formula(rng, 2, 3), {0, 1, 2, 3}));
    Formula inst = apply(sigma, f);
    auto mgu = unify(f, inst);
    REQUIRE(mgu);
    CHECK(subsumes(apply(*mgu, f), inst));
  }
}

TEST_CASE("subsumption") {
  CHECK(subsumes(F("x"), F("n(y) => z")));
  CHECK(subsumes(F("x => (y => x)"), F("n(z) => (u => n(z))")));
  CHECK_FALSE(subsumes(F("x => x"), F("x => y")));
  CHECK(subsumes(F("x => y"), F("x => x")));
  CHECK_FALSE(subsumes(F("n(x)"), F("x")));

  std::mt19937 rng(17);
  for (int i = 0; i < 3000; ++i) {
    Formula f = random_formula(rng, 3, 3);
    Formula g = random_formula(rng, 4, 3);
    bool sub = subsumes(f, g);
    // Cross-check against unification of f with a frozen copy of g.
    Formula fr = rename_apart(f, std::set<VarIndex>{0, 1, 2, 3, 4, 5});
    auto u = unify(fr, g);
    bool matched = u && variant_eq(apply(*u, g), g);
    CHECK(sub == matched);
    CHECK(variant_eq(f, g) == (subsumes(f, g) && subsumes(g, f)));
    // Instances are always subsumed.
    Substitution s;
    s.bind(0, g);
    CHECK(subsumes(f, apply(s, f)));
  }
}

TEST_CASE("detach") {
  Formula ax1 = F("x => (y => x)");
  Formula ax2 = F("(x => (y => z)) => ((x => y) => (x => z))");
  Formula ax3 = F("(n(x) => n(y)) => (y => x)");
  CHECK(detach(ax1, ax1) == F("x => (y => (z => y))"));
  CHECK_FALSE(detach(ax3, ax1));
  CHECK_FALSE(detach(F("x"), ax1));
  auto d21 = detach(ax2, ax1);
  REQUIRE(d21);
  CHECK(*d21 == F("(x => y) => (x => x)"));
  // Non-canonical inputs with overlapping variables are renamed apart.
  CHECK(detach(F("(z => y) => (y => z)"), F("y => z")) == F("x => y"));
  CHECK(detach(F("(q => r) => q"), F("r => q")) == F("x"));
}
