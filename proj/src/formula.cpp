#include "cdgen/formula.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>

#include "cdgen/errors.hpp"

namespace cdgen {

namespace {

constexpr std::int32_t kForeignBase = 1 << 20;
constexpr std::string_view kHouseLetters = "xyzuvw";
constexpr std::string_view kForeignLetters = "abcdefghijklmnopqrst";

// Variable-indexed table that stays dense for small indices.
template <typename T>
class VarSlots {
 public:
  explicit VarSlots(T empty) : empty_(empty) {}

  T get(std::int32_t v) const {
    if (v < kDense) return static_cast<std::size_t>(v) < dense_.size() ? dense_[v] : empty_;
    auto it = sparse_.find(v);
    return it == sparse_.end() ? empty_ : it->second;
  }
  void set(std::int32_t v, T value) {
    if (v < kDense) {
      if (static_cast<std::size_t>(v) >= dense_.size()) dense_.resize(v + 1, empty_);
      dense_[v] = value;
    } else {
      sparse_[v] = value;
    }
  }

 private:
  static constexpr std::int32_t kDense = 1 << 14;
  T empty_;
  std::vector<T> dense_;
  std::unordered_map<std::int32_t, T> sparse_;
};

std::vector<std::int32_t> rename_first_occurrence(std::span<const std::int32_t> code,
                                                  std::vector<VarIndex>* originals) {
  VarSlots<std::int32_t> names(-1);
  std::int32_t next = 0;
  std::vector<std::int32_t> out(code.begin(), code.end());
  for (auto& s : out) {
    if (s < 0) continue;
    std::int32_t n = names.get(s);
    if (n < 0) {
      n = next++;
      names.set(s, n);
      if (originals) originals->push_back(static_cast<VarIndex>(s));
    }
    s = n;
  }
  return out;
}

}  // namespace

Formula Formula::var(VarIndex index) {
  if (index > static_cast<VarIndex>(INT32_MAX)) throw std::invalid_argument("variable index too large");
  return Formula(std::vector<std::int32_t>{static_cast<std::int32_t>(index)});
}

Formula Formula::imp(const Formula& lhs, const Formula& rhs) {
  std::vector<std::int32_t> c;
  c.reserve(1 + lhs.code_.size() + rhs.code_.size());
  c.push_back(kImp);
  c.insert(c.end(), lhs.code_.begin(), lhs.code_.end());
  c.insert(c.end(), rhs.code_.begin(), rhs.code_.end());
  return Formula(std::move(c));
}

Formula Formula::neg(const Formula& arg) {
  std::vector<std::int32_t> c;
  c.reserve(1 + arg.code_.size());
  c.push_back(kNeg);
  c.insert(c.end(), arg.code_.begin(), arg.code_.end());
  return Formula(std::move(c));
}

Formula Formula::from_code(std::vector<std::int32_t> code) {
  std::size_t need = 1;
  for (std::size_t i = 0; i < code.size(); ++i) {
    if (need == 0) throw std::invalid_argument("trailing symbols in formula code");
    --need;
    if (code[i] == kImp) need += 2;
    else if (code[i] == kNeg) need += 1;
    else if (code[i] < 0) throw std::invalid_argument("bad symbol in formula code");
  }
  if (need != 0) throw std::invalid_argument("incomplete formula code");
  return Formula(std::move(code));
}

VarIndex Formula::var_index() const {
  if (!is_var()) throw std::logic_error("not a variable");
  return static_cast<VarIndex>(code_[0]);
}

Formula Formula::lhs() const {
  if (!is_imp()) throw std::logic_error("not an implication");
  std::size_t e = subformula_end(code_, 1);
  return Formula(std::vector<std::int32_t>(code_.begin() + 1, code_.begin() + e));
}

Formula Formula::rhs() const {
  if (!is_imp()) throw std::logic_error("not an implication");
  std::size_t e = subformula_end(code_, 1);
  return Formula(std::vector<std::int32_t>(code_.begin() + e, code_.end()));
}

Formula Formula::arg() const {
  if (!is_neg()) throw std::logic_error("not a negation");
  return Formula(std::vector<std::int32_t>(code_.begin() + 1, code_.end()));
}

std::vector<VarIndex> Formula::variables() const {
  std::vector<VarIndex> vars;
  rename_first_occurrence(code_, &vars);
  return vars;
}

VarIndex Formula::var_bound() const {
  std::int32_t m = -1;
  for (auto s : code_) m = std::max(m, s);
  return static_cast<VarIndex>(m + 1);
}

std::size_t Formula::hash() const {
  std::uint64_t h = 1469598103934665603ull;
  for (auto s : code_) {
    h ^= static_cast<std::uint32_t>(s);
    h *= 1099511628211ull;
  }
  return static_cast<std::size_t>(h ^ (h >> 29));
}

std::size_t subformula_end(std::span<const std::int32_t> code, std::size_t pos) {
  std::size_t need = 1;
  while (need > 0) {
    std::int32_t s = code[pos++];
    --need;
    if (s == Formula::kImp) need += 2;
    else if (s == Formula::kNeg) need += 1;
  }
  return pos;
}

Formula canonical(const Formula& f) {
  if (is_canonical(f)) return f;
  return Formula::from_code(rename_first_occurrence(f.code(), nullptr));
}

bool is_canonical(const Formula& f) {
  std::int32_t next = 0;
  for (auto s : f.code()) {
    if (s < 0) continue;
    if (s > next) return false;
    if (s == next) ++next;
  }
  return true;
}

bool variant_eq(const Formula& f, const Formula& g) {
  if (f.length() != g.length()) return false;
  return canonical(f) == canonical(g);
}

bool subsumes(const Formula& f, const Formula& g) {
  auto fc = f.code();
  auto gc = g.code();
  struct Span {
    std::uint32_t begin = 0, end = 0;
    bool operator==(const Span&) const = default;
  };
  if (fc.size() > gc.size()) return false;
  constexpr std::int32_t kSmall = 32;
  Span small[kSmall] = {};
  std::optional<VarSlots<Span>> big;
  auto get = [&](std::int32_t v) {
    if (v < kSmall) return small[v];
    return big ? big->get(v) : Span{};
  };
  std::size_t j = 0;
  for (std::size_t i = 0; i < fc.size(); ++i) {
    std::int32_t s = fc[i];
    if (s >= 0) {
      std::size_t e = subformula_end(gc, j);
      Span prior = get(s);
      if (prior.end == 0) {
        Span now{static_cast<std::uint32_t>(j), static_cast<std::uint32_t>(e)};
        if (s < kSmall) {
          small[s] = now;
        } else {
          if (!big) big.emplace(Span{});
          big->set(s, now);
        }
      } else if (prior.end - prior.begin != e - j ||
                 !std::equal(gc.begin() + prior.begin, gc.begin() + prior.end, gc.begin() + j)) {
        return false;
      }
      j = e;
    } else {
      if (gc[j] != s) return false;
      ++j;
    }
  }
  return true;
}

std::size_t f_tsize(const Formula& f) {
  std::size_t n = 0;
  for (auto s : f.code()) n += s < 0;
  return n;
}

std::size_t f_height(const Formula& f) {
  // Pending child slots per open connective, with its depth.
  std::vector<std::pair<std::size_t, int>> open;
  std::size_t best = 0;
  for (auto s : f.code()) {
    std::size_t depth = open.size();
    if (s >= 0) {
      best = std::max(best, depth);
      while (!open.empty() && --open.back().second == 0) open.pop_back();
    } else {
      open.push_back({depth, s == Formula::kImp ? 2 : 1});
    }
  }
  return best;
}

void Substitution::bind(VarIndex v, Formula value) {
  if (value.is_var() && value.var_index() == v) {
    bindings_.erase(v);
    return;
  }
  bindings_.insert_or_assign(v, std::move(value));
}

const Formula* Substitution::find(VarIndex v) const {
  auto it = bindings_.find(v);
  return it == bindings_.end() ? nullptr : &it->second;
}

Formula apply(const Substitution& s, const Formula& f) {
  if (s.empty()) return f;
  std::vector<std::int32_t> out;
  out.reserve(f.length());
  for (auto c : f.code()) {
    if (c >= 0) {
      if (const Formula* r = s.find(static_cast<VarIndex>(c))) {
        out.insert(out.end(), r->code().begin(), r->code().end());
        continue;
      }
    }
    out.push_back(c);
  }
  return Formula::from_code(std::move(out));
}

std::optional<Substitution> unify(const Formula& f, const Formula& g) {
  // Joint dense numbering so that shared variables share cells.
  std::vector<std::int32_t> joint(f.code().begin(), f.code().end());
  joint.insert(joint.end(), g.code().begin(), g.code().end());
  std::vector<VarIndex> originals;
  auto dense = rename_first_occurrence(joint, &originals);
  std::span<const std::int32_t> all(dense);

  UnifyArena arena;
  std::vector<UnifyArena::Cell> vars;
  auto a = arena.build(all.subspan(0, f.length()), vars);
  auto b = arena.build(all.subspan(f.length()), vars);
  if (!arena.unify(a, b)) return std::nullopt;

  // Unbound cells are always the own cell of exactly one variable.
  std::unordered_map<UnifyArena::Cell, VarIndex> own;
  for (std::size_t i = 0; i < vars.size(); ++i) own.emplace(vars[i], originals[i]);
  Substitution result;
  for (std::size_t i = 0; i < vars.size(); ++i) {
    auto r = arena.deref(vars[i]);
    if (r == vars[i]) continue;
    arena.begin_naming();
    std::vector<std::int32_t> code;
    arena.read(r, code);
    const auto& named = arena.named_cells();
    for (auto& c : code)
      if (c >= 0) c = static_cast<std::int32_t>(own.at(named[c]));
    result.bind(originals[i], Formula::from_code(std::move(code)));
  }
  return result;
}

Formula rename_apart(const Formula& f, const std::set<VarIndex>& reserved) {
  VarSlots<std::int32_t> names(-1);
  std::int32_t next = 0;
  std::vector<std::int32_t> out(f.code().begin(), f.code().end());
  for (auto& s : out) {
    if (s < 0) continue;
    std::int32_t n = names.get(s);
    if (n < 0) {
      while (reserved.count(static_cast<VarIndex>(next))) ++next;
      n = next++;
      names.set(s, n);
    }
    s = n;
  }
  return Formula::from_code(std::move(out));
}

std::optional<Formula> detach(const Formula& major, const Formula& minor) {
  if (!major.is_imp()) return std::nullopt;
  thread_local UnifyArena arena;
  thread_local std::vector<UnifyArena::Cell> vars_major, vars_minor;
  arena.clear();
  vars_major.clear();
  vars_minor.clear();

  auto mc = major.code();
  std::vector<std::int32_t> dense_major, dense_minor;
  if (major.var_bound() > major.length()) {
    dense_major = rename_first_occurrence(mc, nullptr);
    mc = dense_major;
  }
  auto nc = minor.code();
  if (minor.var_bound() > minor.length()) {
    dense_minor = rename_first_occurrence(nc, nullptr);
    nc = dense_minor;
  }
  std::size_t split = subformula_end(mc, 1);
  auto ante = arena.build(mc.subspan(1, split - 1), vars_major);
  auto cons = arena.build(mc.subspan(split), vars_major);
  auto m = arena.build(nc, vars_minor);
  if (!arena.unify(ante, m)) return std::nullopt;
  arena.begin_naming();
  return arena.read_formula(cons);
}

// Parsing and printing.

std::string var_name(VarIndex v) {
  std::string s;
  std::uint32_t k;
  if (v >= static_cast<VarIndex>(kForeignBase)) {
    VarIndex r = v - kForeignBase;
    s.push_back(kForeignLetters[r % 20]);
    k = r / 20;
  } else {
    s.push_back(kHouseLetters[v % 6]);
    k = v / 6;
  }
  if (k > 0) s += std::to_string(k);
  return s;
}

namespace {

class FormulaParser {
 public:
  explicit FormulaParser(std::string_view text) : text_(text) {}

  Formula parse_all() {
    parse_chain();
    skip_ws();
    if (pos_ != text_.size()) throw ParseError("unexpected trailing input", pos_);
    return Formula::from_code(std::move(out_));
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() &&
           (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n' || text_[pos_] == '\r'))
      ++pos_;
  }

  bool eat_arrow() {
    skip_ws();
    for (std::string_view a : {std::string_view("=>"), std::string_view("->"),
                               std::string_view("\xE2\x87\x92")}) {
      if (text_.substr(pos_, a.size()) == a) {
        pos_ += a.size();
        return true;
      }
    }
    return false;
  }

  void expect(char c) {
    skip_ws();
    if (pos_ >= text_.size() || text_[pos_] != c)
      throw ParseError(std::string("expected '") + c + "'", pos_);
    ++pos_;
  }

  // chain := unary [arrow chain]
  void parse_chain() {
    std::size_t mark = out_.size();
    parse_unary();
    if (eat_arrow()) {
      out_.insert(out_.begin() + static_cast<std::ptrdiff_t>(mark), Formula::kImp);
      parse_chain();
    }
  }

  void parse_unary() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of formula", pos_);
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      parse_chain();
      expect(')');
      return;
    }
    if (c >= 'a' && c <= 'z') {
      std::size_t start = pos_++;
      if (c == 'n') {
        std::size_t save = pos_;
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == '(') {
          ++pos_;
          out_.push_back(Formula::kNeg);
          parse_chain();
          expect(')');
          return;
        }
        pos_ = save;
      }
      std::uint64_t k = 0;
      bool digits = false;
      while (pos_ < text_.size() && text_[pos_] >= '0' && text_[pos_] <= '9') {
        k = k * 10 + static_cast<std::uint64_t>(text_[pos_++] - '0');
        digits = true;
        if (k > 10000000) throw ParseError("variable subscript too large", start);
      }
      (void)digits;
      std::size_t h = kHouseLetters.find(c);
      std::uint64_t index;
      if (h != std::string_view::npos) {
        index = 6 * k + h;
        if (index >= static_cast<std::uint64_t>(kForeignBase))
          throw ParseError("variable subscript too large", start);
      } else {
        index = static_cast<std::uint64_t>(kForeignBase) + 20 * k + kForeignLetters.find(c);
        if (index > static_cast<std::uint64_t>(INT32_MAX))
          throw ParseError("variable subscript too large", start);
      }
      out_.push_back(static_cast<std::int32_t>(index));
      return;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::vector<std::int32_t> out_;
};

void print_into(std::span<const std::int32_t> code, std::size_t& pos, std::string& out) {
  std::int32_t s = code[pos++];
  if (s >= 0) {
    out += var_name(static_cast<VarIndex>(s));
  } else if (s == Formula::kNeg) {
    out += "n(";
    print_into(code, pos, out);
    out += ')';
  } else {
    out += '(';
    print_into(code, pos, out);
    out += " => ";
    print_into(code, pos, out);
    out += ')';
  }
}

}  // namespace

Formula parse_formula(std::string_view text) { return FormulaParser(text).parse_all(); }

std::string print_formula(const Formula& f) {
  std::string out;
  std::size_t pos = 0;
  print_into(f.code(), pos, out);
  return out;
}

// UnifyArena.

void UnifyArena::clear() { cells_.clear(); }

UnifyArena::Cell UnifyArena::fresh_var() {
  cells_.push_back({kVar, -1, 0});
  return static_cast<Cell>(cells_.size() - 1);
}

UnifyArena::Cell UnifyArena::make_imp(Cell lhs, Cell rhs) {
  cells_.push_back({Formula::kImp, lhs, rhs});
  return static_cast<Cell>(cells_.size() - 1);
}

UnifyArena::Cell UnifyArena::make_neg(Cell arg) {
  cells_.push_back({Formula::kNeg, arg, 0});
  return static_cast<Cell>(cells_.size() - 1);
}

UnifyArena::Cell UnifyArena::build(std::span<const std::int32_t> code, std::vector<Cell>& var_cells) {
  // Build right to left so children exist before their parents.
  stack_.clear();
  for (std::size_t i = code.size(); i-- > 0;) {
    std::int32_t s = code[i];
    if (s >= 0) {
      if (static_cast<std::size_t>(s) >= var_cells.size()) var_cells.resize(s + 1, -1);
      if (var_cells[s] < 0) var_cells[s] = fresh_var();
      stack_.push_back(var_cells[s]);
    } else if (s == Formula::kNeg) {
      Cell a = stack_.back();
      stack_.back() = make_neg(a);
    } else {
      Cell l = stack_.back();
      stack_.pop_back();
      Cell r = stack_.back();
      stack_.back() = make_imp(l, r);
    }
  }
  return stack_.back();
}

UnifyArena::Cell UnifyArena::deref(Cell c) const {
  while (cells_[c].tag == kVar && cells_[c].a >= 0) c = cells_[c].a;
  return c;
}

bool UnifyArena::occurs(Cell var, Cell term) {
  if (stamp_.size() < cells_.size()) stamp_.resize(cells_.size(), 0);
  if (++epoch_ == 0) {
    std::fill(stamp_.begin(), stamp_.end(), 0);
    epoch_ = 1;
  }
  stack_.clear();
  stack_.push_back(term);
  while (!stack_.empty()) {
    Cell c = deref(stack_.back());
    stack_.pop_back();
    if (c == var) return true;
    if (stamp_[c] == epoch_) continue;
    stamp_[c] = epoch_;
    const Node& n = cells_[c];
    if (n.tag == Formula::kImp) {
      stack_.push_back(n.a);
      stack_.push_back(n.b);
    } else if (n.tag == Formula::kNeg) {
      stack_.push_back(n.a);
    }
  }
  return false;
}

bool UnifyArena::unify(Cell a, Cell b) {
  work_.clear();
  work_.push_back({a, b});
  while (!work_.empty()) {
    auto [x, y] = work_.back();
    work_.pop_back();
    x = deref(x);
    y = deref(y);
    if (x == y) continue;
    if (cells_[x].tag != kVar && cells_[y].tag == kVar) std::swap(x, y);
    if (cells_[x].tag == kVar) {
      if (cells_[y].tag != kVar && occurs(x, y)) return false;
      cells_[x].a = y;
      continue;
    }
    if (cells_[x].tag != cells_[y].tag) return false;
    if (cells_[x].tag == Formula::kImp) {
      work_.push_back({cells_[x].b, cells_[y].b});
      work_.push_back({cells_[x].a, cells_[y].a});
    } else {
      work_.push_back({cells_[x].a, cells_[y].a});
    }
  }
  return true;
}

void UnifyArena::begin_naming() {
  for (Cell c : named_) names_[c] = -1;
  named_.clear();
  next_name_ = 0;
}

void UnifyArena::read(Cell c, std::vector<std::int32_t>& out) {
  if (names_.size() < cells_.size()) names_.resize(cells_.size(), -1);
  stack_.clear();
  stack_.push_back(c);
  while (!stack_.empty()) {
    Cell x = deref(stack_.back());
    stack_.pop_back();
    if (out.size() >= kMaxReadLength) throw BudgetExceeded("formula readout too long");
    const Node& n = cells_[x];
    if (n.tag == kVar) {
      if (names_[x] < 0) {
        names_[x] = next_name_++;
        named_.push_back(x);
      }
      out.push_back(names_[x]);
    } else if (n.tag == Formula::kImp) {
      out.push_back(Formula::kImp);
      stack_.push_back(n.b);
      stack_.push_back(n.a);
    } else {
      out.push_back(Formula::kNeg);
      stack_.push_back(n.a);
    }
  }
}

Formula UnifyArena::read_formula(Cell c) {
  std::vector<std::int32_t> out;
  read(c, out);
  return Formula::from_code(std::move(out));
}

}  // namespace cdgen
