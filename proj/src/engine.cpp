#include "cdgen/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cstring>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "cdgen/combinator.hpp"
#include "cdgen/errors.hpp"
#include "cdgen/subsumption_index.hpp"

namespace cdgen {

namespace {

std::string trim_ws(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::uint64_t parse_natural(std::string_view s, const std::string& what) {
  std::string t = trim_ws(s);
  if (t.empty() || !std::all_of(t.begin(), t.end(), [](char c) { return c >= '0' && c <= '9'; }))
    throw ConfigError("expected a natural number for " + what + ", got '" + t + "'");
  try {
    return std::stoull(t);
  } catch (const std::exception&) {
    throw ConfigError("number out of range for " + what);
  }
}

std::string slurp_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <class F>
void parallel_for(std::size_t n, unsigned jobs, F&& f) {
  if (jobs <= 1 || n < 512) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  constexpr std::size_t kChunk = 256;
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    try {
      for (;;) {
        std::size_t b = next.fetch_add(kChunk);
        if (b >= n) return;
        std::size_t e = std::min(n, b + kChunk);
        for (std::size_t i = b; i < e; ++i) f(i);
      }
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
      next = n;
    }
  };
  unsigned t = std::min<unsigned>(jobs, static_cast<unsigned>((n + kChunk - 1) / kChunk));
  std::vector<std::thread> threads;
  for (unsigned k = 1; k < t; ++k) threads.emplace_back(work);
  work();
  for (auto& th : threads) th.join();
  if (error) std::rethrow_exception(error);
}

// Leaves: Ax (axioms, then lemmas), then direct-schema constants.
struct Context {
  std::vector<std::string> leaf_names;
  std::vector<Formula> leaf_formulas;
  std::uint32_t n_ax = 0;
  struct Schema {
    bool direct = false;
    std::string symbol;
    std::uint32_t arity = 0;
    Formula type;
    std::uint32_t leaf = 0;  // constant leaf of a direct schema
  };
  std::vector<Schema> patterns;  // pattern symbols, indexed by node sym
  std::vector<Schema> schemas;   // patterns then directs, in table order

  Context(const AxiomSystem& ax, const std::vector<std::pair<std::string, Formula>>& lemmas,
          const SchemaTable* table) {
    for (const auto& [id, f] : ax.entries()) add_leaf(id, f);
    for (const auto& [id, f] : lemmas) add_leaf(id, f);
    n_ax = static_cast<std::uint32_t>(leaf_names.size());
    if (!table) return;
    for (const auto& p : table->patterns()) {
      Schema s{false, p.symbol, static_cast<std::uint32_t>(p.arity), p.type, 0};
      patterns.push_back(s);
      schemas.push_back(s);
    }
    for (const auto& d : table->directs()) {
      Schema s{true, d.symbol, static_cast<std::uint32_t>(d.arity), d.type,
               static_cast<std::uint32_t>(leaf_names.size())};
      add_leaf(d.symbol, d.type);
      schemas.push_back(s);
    }
  }

  void add_leaf(const std::string& id, const Formula& f) {
    if (std::find(leaf_names.begin(), leaf_names.end(), id) != leaf_names.end())
      throw ConfigError("duplicate leaf identifier " + id);
    leaf_names.push_back(id);
    leaf_formulas.push_back(canonical(f));
  }
};

enum : std::uint8_t { kLeaf, kDet, kPat };

class TermBank {
 public:
  using Id = std::uint32_t;

  explicit TermBank(const Context& ctx) : ctx_(ctx) {
    for (Id i = 0; i < ctx.leaf_names.size(); ++i) {
      nodes_.push_back({kLeaf, true, i, 0, 0});
      f_.emplace_back(ctx.leaf_formulas[i]);
    }
  }

  std::size_t size() const { return nodes_.size(); }
  bool is_leaf(Id id) const { return nodes_[id].kind == kLeaf; }
  bool member(Id id) const { return nodes_[id].member; }
  void set_member(Id id) { nodes_[id].member = true; }
  const std::optional<Formula>& formula(Id id) const { return f_[id]; }
  std::uint32_t leaf_index(Id id) const { return nodes_[id].x; }

  template <class Visit>
  void for_children(Id id, Visit&& v) const {
    const Node& n = nodes_[id];
    if (n.kind == kDet) {
      v(n.x);
      v(n.y);
    } else if (n.kind == kPat) {
      for (std::uint32_t k = 0; k < n.z; ++k) v(args_[n.y + k]);
    }
  }

  std::optional<Id> find_det(Id l, Id r) const {
    auto it = det_index_.find(det_key(l, r));
    if (it == det_index_.end()) return std::nullopt;
    return it->second;
  }
  std::optional<Id> find_pattern(std::uint32_t sym, std::span<const Id> args) const {
    auto it = pat_index_.find(pat_key(sym, args));
    if (it == pat_index_.end()) return std::nullopt;
    return it->second;
  }

  Id det(Id l, Id r, std::optional<Formula> f, bool member) {
    auto [it, fresh] = det_index_.try_emplace(det_key(l, r), static_cast<Id>(nodes_.size()));
    if (fresh) {
      nodes_.push_back({kDet, member, l, r, 0});
      f_.push_back(std::move(f));
    } else if (member) {
      nodes_[it->second].member = true;
    }
    return it->second;
  }
  Id pattern(std::uint32_t sym, std::span<const Id> args, std::optional<Formula> f) {
    auto [it, fresh] = pat_index_.try_emplace(pat_key(sym, args), static_cast<Id>(nodes_.size()));
    if (fresh) {
      nodes_.push_back({kPat, true, sym, static_cast<std::uint32_t>(args_.size()), static_cast<std::uint32_t>(args.size())});
      args_.insert(args_.end(), args.begin(), args.end());
      f_.push_back(std::move(f));
    } else {
      nodes_[it->second].member = true;
    }
    return it->second;
  }

  ProofTerm to_term(Id id) const {
    if (exported_.size() < nodes_.size()) exported_.resize(nodes_.size());
    if (exported_[id]) return *exported_[id];
    const Node& n = nodes_[id];
    std::optional<ProofTerm> t;
    if (n.kind == kLeaf) {
      t = ProofTerm::axiom(ctx_.leaf_names[n.x]);
    } else if (n.kind == kDet) {
      t = ProofTerm::det(to_term(n.x), to_term(n.y));
    } else {
      std::vector<ProofTerm> args;
      for (std::uint32_t k = 0; k < n.z; ++k) args.push_back(to_term(args_[n.y + k]));
      t = ProofTerm::pattern(ctx_.patterns[n.x].symbol, std::move(args));
    }
    exported_[id] = t;
    return *t;
  }

  static std::uint64_t det_key(Id l, Id r) { return (static_cast<std::uint64_t>(l) << 32) | r; }
  static std::string pat_key(std::uint32_t sym, std::span<const Id> args) {
    std::string k(sizeof(std::uint32_t) * (args.size() + 1), '\0');
    std::memcpy(k.data(), &sym, sizeof sym);
    std::memcpy(k.data() + sizeof sym, args.data(), sizeof(Id) * args.size());
    return k;
  }

 private:
  struct Node {
    std::uint8_t kind;
    bool member;   // false for spine nodes of direct schema instances
    std::uint32_t x;  // leaf index | left | pattern
    std::uint32_t y;  // right | args offset
    std::uint32_t z;  // argument count
  };

  const Context& ctx_;
  std::vector<Node> nodes_;
  std::vector<std::optional<Formula>> f_;
  std::vector<Id> args_;
  std::unordered_map<std::uint64_t, Id> det_index_;
  std::unordered_map<std::string, Id> pat_index_;
  mutable std::vector<std::optional<ProofTerm>> exported_;
};

using Id = TermBank::Id;

// A structural candidate: D(a,b), a pattern instance, or a direct schema
// instance D(...D(c,a1)...,ak).
struct Cand {
  std::uint8_t tag = kDet;
  bool direct = false;
  std::uint32_t sym = 0;  // index into Context::schemas for schema instances
  Id a = 0, b = 0;
  std::uint32_t off = 0, n = 0;
};

struct Batch {
  std::vector<Cand> cands;
  std::vector<Id> args;
  void clear() {
    cands.clear();
    args.clear();
  }
  std::span<const Id> args_of(const Cand& c) const { return {args.data() + c.off, c.n}; }
};

std::optional<Formula> cand_mgt(const Cand& c, const Batch& batch, const TermBank& bank, const Context& ctx) {
  if (c.tag == kDet) {
    const auto& l = bank.formula(c.a);
    if (!l) return std::nullopt;
    const auto& r = bank.formula(c.b);
    if (!r) return std::nullopt;
    return detach(*l, *r);
  }
  std::optional<Formula> acc = ctx.schemas[c.sym].type;
  for (Id a : batch.args_of(c)) {
    const auto& f = bank.formula(a);
    if (!f) return std::nullopt;
    acc = detach(*acc, *f);
    if (!acc) return std::nullopt;
  }
  return acc;
}

// Interns a candidate as a member; spine nodes of direct instances get
// their partial MGTs and stay non-members unless already members.
Id intern(const Cand& c, const Batch& batch, TermBank& bank, const Context& ctx, std::optional<Formula> f) {
  if (c.tag == kDet) return bank.det(c.a, c.b, std::move(f), true);
  auto args = batch.args_of(c);
  const auto& s = ctx.schemas[c.sym];
  if (!s.direct) {
    std::uint32_t p = 0;
    while (ctx.patterns[p].symbol != s.symbol) ++p;
    return bank.pattern(p, args, std::move(f));
  }
  Id cur = s.leaf;
  for (std::size_t k = 0; k < args.size(); ++k) {
    bool last = k + 1 == args.size();
    std::optional<Formula> part;
    if (last) {
      part = f;
    } else if (bank.formula(cur) && bank.formula(args[k])) {
      part = detach(*bank.formula(cur), *bank.formula(args[k]));
    }
    cur = bank.det(cur, args[k], std::move(part), last);
  }
  return cur;
}

bool is_member(const Cand& c, const Batch& batch, const TermBank& bank, const Context& ctx) {
  if (c.tag == kDet) {
    auto id = bank.find_det(c.a, c.b);
    return id && bank.member(*id);
  }
  auto args = batch.args_of(c);
  const auto& s = ctx.schemas[c.sym];
  if (!s.direct) {
    std::uint32_t p = 0;
    while (ctx.patterns[p].symbol != s.symbol) ++p;
    auto id = bank.find_pattern(p, args);
    return id && bank.member(*id);
  }
  Id cur = s.leaf;
  for (Id a : args) {
    auto next = bank.find_det(cur, a);
    if (!next) return false;
    cur = *next;
  }
  return bank.member(cur);
}

struct PoolItem {
  Id id;
  std::uint32_t level;
};

// Candidate generation for one level from a pool. Calls emit(cand) with
// the candidate staged in `batch`; emit returns false to stop.
class Generator {
 public:
  Generator(LevelKind kind, const Context& ctx, const TermBank& bank, Batch& batch)
      : kind_(kind), ctx_(ctx), bank_(bank), batch_(batch) {}

  // Pool members other than Ax leaves, in pool order; Ax leaves are added
  // at level 0.
  void set_pool(const std::vector<PoolItem>& pool) {
    list_.clear();
    for (const auto& p : pool)
      if (!bank_.is_leaf(p.id)) list_.push_back(p);
    for (Id a = 0; a < ctx_.n_ax; ++a) list_.push_back({a, 0});
    by_level_.clear();
    for (const auto& p : list_) {
      if (by_level_.size() <= p.level) by_level_.resize(p.level + 1);
      by_level_[p.level].push_back(p.id);
    }
    ++epoch_;
    if (in_pool_.size() < bank_.size()) in_pool_.resize(bank_.size(), 0);
    for (const auto& p : list_) in_pool_[p.id] = epoch_;
  }

  template <class Emit>
  bool generate(std::uint32_t n, Emit&& emit) {
    seen_det_.clear();
    seen_other_.clear();
    switch (kind_) {
      case LevelKind::TreeSize:
        return gen_tsize(n, emit);
      case LevelKind::Height:
        return gen_height(n, emit);
      default:
        return gen_psp(n, emit);
    }
  }

 private:
  const std::vector<Id>& level(std::uint32_t l) const {
    static const std::vector<Id> empty;
    return l < by_level_.size() ? by_level_[l] : empty;
  }

  // Subterm condition on an immediate component drawn from Subterms(d).
  bool available(Id id) const { return bank_.is_leaf(id) || !bank_.member(id) || in_pool_[id] == epoch_; }

  template <class Emit>
  bool emit_det(Id a, Id b, bool dedupe, Emit& emit) {
    if (dedupe && !seen_det_.insert(TermBank::det_key(a, b)).second) return true;
    batch_.cands.push_back({kDet, false, 0, a, b, 0, 0});
    if (dedupe && is_member(batch_.cands.back(), batch_, bank_, ctx_)) {
      batch_.cands.pop_back();
      return true;
    }
    return emit();
  }

  template <class Emit>
  bool emit_schema(std::uint32_t s, const std::vector<Id>& args, Emit& emit) {
    std::string key = TermBank::pat_key(s, args);
    if (!seen_other_.insert(std::move(key)).second) return true;
    Cand c{kPat, ctx_.schemas[s].direct, s, 0, 0, static_cast<std::uint32_t>(batch_.args.size()),
           static_cast<std::uint32_t>(args.size())};
    batch_.args.insert(batch_.args.end(), args.begin(), args.end());
    batch_.cands.push_back(c);
    if (is_member(c, batch_, bank_, ctx_)) {
      batch_.cands.pop_back();
      batch_.args.resize(c.off);
      return true;
    }
    return emit();
  }

  template <class Emit>
  bool gen_tsize(std::uint32_t n, Emit& emit) {
    for (const auto& d : list_) {
      if (d.level > n) continue;
      for (Id e : level(n - d.level))
        if (!emit_det(d.id, e, false, emit)) return false;
    }
    return true;
  }

  template <class Emit>
  bool gen_height(std::uint32_t n, Emit& emit) {
    for (Id x : level(n)) {
      for (const auto& y : list_)
        if (y.level <= n && !emit_det(x, y.id, false, emit)) return false;
      for (const auto& y : list_)
        if (y.level < n && !emit_det(y.id, x, false, emit)) return false;
    }
    return true;
  }

  // Subterms(d) in postorder, then Ax.
  void partners(Id d, std::vector<Id>& out) {
    out.clear();
    std::unordered_set<Id> visited;
    auto rec = [&](auto&& self, Id id) -> void {
      if (bank_.is_leaf(id) || !visited.insert(id).second) return;
      bank_.for_children(id, [&](Id c) { self(self, c); });
      if (available(id)) out.push_back(id);
    };
    rec(rec, d);
    for (Id a = 0; a < ctx_.n_ax; ++a) out.push_back(a);
  }

  template <class Emit>
  bool gen_psp(std::uint32_t n, Emit& emit) {
    std::vector<Id> parts, args;
    bool with_d = kind_ != LevelKind::PspPatterns;
    for (Id d : level(n)) {
      partners(d, parts);
      if (with_d) {
        for (Id e : parts)
          if (!emit_det(d, e, true, emit)) return false;
        for (Id e : parts)
          if (!emit_det(e, d, true, emit)) return false;
      }
      if (kind_ != LevelKind::PspPatterns) continue;
      for (std::uint32_t s = 0; s < ctx_.schemas.size(); ++s) {
        std::uint32_t k = ctx_.schemas[s].arity;
        for (std::uint32_t pos = 0; pos < k; ++pos) {
          std::vector<std::size_t> odo(k, 0);
          for (;;) {
            args.assign(k, 0);
            for (std::uint32_t j = 0; j < k; ++j) args[j] = j == pos ? d : parts[odo[j]];
            if (!emit_schema(s, args, emit)) return false;
            std::uint32_t j = 0;
            for (; j < k; ++j) {
              if (j == pos) continue;
              if (++odo[j] < parts.size()) break;
              odo[j] = 0;
            }
            if (j == k) break;
          }
        }
      }
    }
    if (kind_ != LevelKind::PspSchemas) return true;
    std::vector<Id> pick;
    std::size_t fresh = 0;
    for (Id d : level(n))
      if (!bank_.is_leaf(d) || n == 0) pick.push_back(d);
    fresh = pick.size();
    if (n > 0)
      for (Id a = 0; a < ctx_.n_ax; ++a) pick.push_back(a);
    if (pick.empty()) return true;
    for (std::uint32_t s = 0; s < ctx_.schemas.size(); ++s) {
      std::uint32_t k = ctx_.schemas[s].arity;
      std::vector<std::size_t> odo(k, 0);
      for (;;) {
        bool any_fresh = false;
        args.assign(k, 0);
        for (std::uint32_t j = 0; j < k; ++j) {
          args[j] = pick[odo[j]];
          any_fresh = any_fresh || odo[j] < fresh;
        }
        if (any_fresh && !emit_schema(s, args, emit)) return false;
        std::uint32_t j = 0;
        for (; j < k; ++j) {
          if (++odo[j] < pick.size()) break;
          odo[j] = 0;
        }
        if (j == k) break;
      }
    }
    return true;
  }

  LevelKind kind_;
  const Context& ctx_;
  const TermBank& bank_;
  Batch& batch_;
  std::vector<PoolItem> list_;
  std::vector<std::vector<Id>> by_level_;
  std::uint32_t epoch_ = 0;
  std::vector<std::uint32_t> in_pool_;
  std::unordered_set<std::uint64_t> seen_det_;
  std::unordered_set<std::string> seen_other_;
};

constexpr std::size_t kBatchSize = 1 << 15;

// Generates level n+1 from the pool, computing MGTs in parallel batches and
// handing each candidate with its MGT to `take` in canonical order. take
// returns false to stop the level.
template <class Take>
void run_level(Generator& gen, Batch& batch, std::uint32_t n, const TermBank& bank, const Context& ctx,
               unsigned jobs, Take&& take) {
  std::vector<std::optional<Formula>> mgts;
  bool go = true;
  auto flush = [&] {
    mgts.assign(batch.cands.size(), std::nullopt);
    parallel_for(batch.cands.size(), jobs,
                 [&](std::size_t i) { mgts[i] = cand_mgt(batch.cands[i], batch, bank, ctx); });
    for (std::size_t i = 0; i < batch.cands.size() && go; ++i) go = take(batch.cands[i], std::move(mgts[i]));
    batch.clear();
    return go;
  };
  batch.clear();
  bool done = gen.generate(n, [&] { return batch.cands.size() < kBatchSize || flush(); });
  if (done && go) flush();
}

void check_kind(LevelKind kind, const SchemaTable* schemas) {
  bool needs = kind == LevelKind::PspPatterns || kind == LevelKind::PspSchemas;
  if (needs && (!schemas || schemas->empty()))
    throw ConfigError(level_kind_name(kind) + " needs a nonempty schema table");
  if (kind == LevelKind::PspPatterns && schemas && !schemas->directs().empty())
    throw ConfigError("pp admits patterns only; direct schemas need pk");
}

// Full level enumeration without restrictions. Every member is interned
// except those of the last level unless keep_last.
struct Enumeration {
  Context ctx;
  TermBank bank;
  std::vector<PoolItem> pool;
  std::vector<std::vector<Id>> levels;
  std::vector<LevelCount> counts;

  Enumeration(const AxiomSystem& ax, const SchemaTable* schemas) : ctx(ax, {}, schemas), bank(ctx) {}

  void run(LevelKind kind, std::uint32_t max_level, bool keep_last, unsigned jobs) {
    LevelCount c0;
    std::unordered_set<Formula> d0;
    levels.emplace_back();
    for (Id a = 0; a < ctx.n_ax; ++a) {
      ++c0.total;
      ++c0.defined;
      d0.insert(*bank.formula(a));
      levels[0].push_back(a);
      pool.push_back({a, 0});
    }
    c0.distinct = d0.size();
    counts.push_back(c0);
    Batch batch;
    Generator gen(kind, ctx, bank, batch);
    for (std::uint32_t i = 1; i <= max_level; ++i) {
      bool intern_all = keep_last || i < max_level;
      gen.set_pool(pool);
      LevelCount c;
      std::unordered_set<Formula> distinct;
      std::vector<Id> fresh;
      run_level(gen, batch, i - 1, bank, ctx, jobs, [&](const Cand& cand, std::optional<Formula> m) {
        ++c.total;
        if (m) {
          ++c.defined;
          distinct.insert(*m);
        }
        if (intern_all) fresh.push_back(intern(cand, batch, bank, ctx, std::move(m)));
        return true;
      });
      c.distinct = distinct.size();
      counts.push_back(c);
      for (Id id : fresh) pool.push_back({id, i});
      levels.push_back(std::move(fresh));
    }
  }
};

struct Rec {
  Id id;
  std::uint32_t level;
  Formula mgt;
  std::uint32_t ft, fh;
};

std::pair<std::uint32_t, std::uint32_t> order_key(Order ord, std::uint32_t ft, std::uint32_t fh) {
  return ord == Order::FTh ? std::make_pair(ft, fh) : std::make_pair(fh, ft);
}

// keep[i] per post_subs semantics over formulas in input order; seqs break
// ties among variants.
std::vector<bool> post_subs_keep(const std::vector<const Formula*>& mgts, const std::vector<std::uint64_t>& seqs) {
  SubsumptionIndex index;
  for (std::uint32_t i = 0; i < mgts.size(); ++i) index.insert(*mgts[i], i);
  std::vector<bool> keep(mgts.size(), true);
  for (std::uint32_t i = 0; i < mgts.size(); ++i) {
    index.for_generalizations(*mgts[i], [&](std::uint32_t j, const Formula& g) {
      if (j == i) return true;
      bool variant = subsumes(*mgts[i], g);
      if (!variant || std::make_pair(seqs[j], j) < std::make_pair(seqs[i], i)) {
        keep[i] = false;
        return false;
      }
      return true;
    });
  }
  return keep;
}

}  // namespace

std::string level_kind_name(LevelKind k) {
  switch (k) {
    case LevelKind::TreeSize:
      return "tsize";
    case LevelKind::Height:
      return "height";
    case LevelKind::Psp:
      return "psp";
    case LevelKind::PspPatterns:
      return "pp";
    case LevelKind::PspSchemas:
      return "pk";
  }
  return "?";
}

LevelKind parse_level_kind(std::string_view s) {
  std::string t = trim_ws(s);
  if (t == "tsize" || t == "t") return LevelKind::TreeSize;
  if (t == "height" || t == "h") return LevelKind::Height;
  if (t == "psp" || t == "p") return LevelKind::Psp;
  if (t == "pp" || t == "patterns") return LevelKind::PspPatterns;
  if (t == "pk" || t == "schemas") return LevelKind::PspSchemas;
  throw ConfigError("unknown level kind '" + t + "'");
}

std::string termination_name(Termination t) {
  switch (t) {
    case Termination::Exhausted:
      return "exhausted";
    case Termination::Stopped:
      return "stopped";
    case Termination::BudgetExceeded:
      return "budget_exceeded";
  }
  return "?";
}

Restrictions parse_restrictions(std::string_view s) {
  Restrictions r;
  std::string text = trim_ws(s);
  if (text.empty() || text == "none") return r;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim_ws(item);
    std::string name = item, arg;
    auto colon = item.find_first_of(":(");
    if (colon != std::string::npos) {
      name = trim_ws(item.substr(0, colon));
      arg = item.substr(colon + 1);
      if (item[colon] == '(') {
        if (arg.empty() || arg.back() != ')') throw ConfigError("unbalanced restriction '" + item + "'");
        arg.pop_back();
      }
    }
    auto need_arg = [&] {
      if (colon == std::string::npos) throw ConfigError("restriction " + name + " needs a value");
      return parse_natural(arg, name);
    };
    if (name == "dup" || name == "subs") {
      if (colon != std::string::npos) throw ConfigError("restriction " + name + " takes no value");
      (name == "dup" ? r.dup : r.subs) = true;
    } else if (name == "lt_ft") {
      r.lt_ft = need_arg();
    } else if (name == "lt_fh") {
      r.lt_fh = need_arg();
    } else if (name == "gen_max") {
      r.gen_max = need_arg();
    } else {
      throw ConfigError("unknown restriction '" + name + "'");
    }
  }
  return r;
}

std::string print_restrictions(const Restrictions& r) {
  std::vector<std::string> parts;
  if (r.dup) parts.push_back("dup");
  if (r.subs) parts.push_back("subs");
  if (r.lt_ft) parts.push_back("lt_ft:" + std::to_string(*r.lt_ft));
  if (r.lt_fh) parts.push_back("lt_fh:" + std::to_string(*r.lt_fh));
  if (r.gen_max) parts.push_back("gen_max:" + std::to_string(*r.gen_max));
  if (parts.empty()) return "none";
  std::string out;
  for (const auto& p : parts) out += (out.empty() ? "" : ",") + p;
  return out;
}

void EngineConfig::validate() const {
  if (trim && *trim == 0) throw ConfigError("trim must be at least 1");
  if (rest.gen_max && *rest.gen_max == 0) throw ConfigError("gen_max must be at least 1");
  if (jobs == 0) throw ConfigError("jobs must be at least 1");
  if (axioms.size() + lemmas.size() == 0) throw ConfigError("no axioms");
  check_kind(level, &schemas);
  Context ctx(axioms, lemmas, &schemas);
}

std::vector<std::pair<std::string, Formula>> parse_formula_table(std::string_view text) {
  std::vector<std::pair<std::string, Formula>> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::string t = trim_ws(line);
    if (t.empty()) continue;
    auto sep = t.find_first_of(" \t");
    if (sep == std::string::npos) throw ParseError("formula table line " + std::to_string(lineno) + ": missing formula", 0);
    try {
      rows.emplace_back(t.substr(0, sep), parse_formula(trim_ws(t.substr(sep))));
    } catch (const ParseError& e) {
      throw ParseError("formula table line " + std::to_string(lineno) + ": " + e.what(), e.position());
    }
  }
  return rows;
}

std::string print_formula_table(const std::vector<std::pair<std::string, Formula>>& rows) {
  std::string out;
  for (const auto& [id, f] : rows) out += id + "\t" + print_formula(f) + "\n";
  return out;
}

EngineConfig parse_engine_config(std::string_view text, const std::string& base_dir) {
  EngineConfig cfg;
  auto resolve = [&](const std::string& p) { return !p.empty() && p[0] == '/' ? p : base_dir + "/" + p; };
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::string t = trim_ws(line);
    if (t.empty()) continue;
    auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
    std::string key = trim_ws(t.substr(0, eq)), value = trim_ws(t.substr(eq + 1));
    auto optional_natural = [&]() -> std::optional<std::uint64_t> {
      if (value == "unlimited" || value == "inf" || value == "none") return std::nullopt;
      return parse_natural(value, key);
    };
    if (key == "level") {
      cfg.level = parse_level_kind(value);
    } else if (key == "rest") {
      cfg.rest = parse_restrictions(value);
    } else if (key == "ord") {
      if (value == "f_th") cfg.ord = Order::FTh;
      else if (value == "f_ht") cfg.ord = Order::FHt;
      else throw ConfigError("unknown order '" + value + "'");
    } else if (key == "trim") {
      cfg.trim = optional_natural();
    } else if (key == "post") {
      if (value == "subs") cfg.post_subs = true;
      else if (value == "none") cfg.post_subs = false;
      else throw ConfigError("unknown post '" + value + "'");
    } else if (key == "maxlevel") {
      auto v = optional_natural();
      if (v) cfg.maxlevel = static_cast<std::uint32_t>(*v);
      else cfg.maxlevel.reset();
    } else if (key == "patterns") {
      cfg.schemas = parse_schema_declarations(slurp_file(resolve(value)));
    } else if (key == "lemmas") {
      cfg.lemmas = parse_formula_table(slurp_file(resolve(value)));
    } else if (key == "axioms") {
      AxiomSystem ax;
      for (const auto& [id, f] : parse_formula_table(slurp_file(resolve(value)))) ax.add(id, f);
      cfg.axioms = ax;
    } else if (key == "jobs") {
      cfg.jobs = static_cast<unsigned>(parse_natural(value, key));
    } else if (key == "max_terms") {
      cfg.max_terms = parse_natural(value, key);
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

std::vector<Entry> order_and_trim(std::vector<Entry> entries, Order ord, std::optional<std::uint64_t> trim) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> keys;
  std::vector<std::size_t> idx(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    idx[i] = i;
    keys.push_back(order_key(ord, static_cast<std::uint32_t>(f_tsize(entries[i].mgt)),
                             static_cast<std::uint32_t>(f_height(entries[i].mgt))));
  }
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return std::tie(keys[a], entries[a].seq) < std::tie(keys[b], entries[b].seq);
  });
  std::size_t n = trim ? std::min<std::uint64_t>(*trim, idx.size()) : idx.size();
  std::vector<Entry> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(std::move(entries[idx[i]]));
  return out;
}

std::vector<Entry> post_subs(const std::vector<Entry>& entries) {
  std::vector<const Formula*> mgts;
  std::vector<std::uint64_t> seqs;
  for (const auto& e : entries) {
    mgts.push_back(&e.mgt);
    seqs.push_back(e.seq);
  }
  auto keep = post_subs_keep(mgts, seqs);
  std::vector<Entry> out;
  for (std::size_t i = 0; i < entries.size(); ++i)
    if (keep[i]) out.push_back(entries[i]);
  return out;
}

RunResult run(const EngineConfig& cfg) {
  cfg.validate();
  auto start = std::chrono::steady_clock::now();
  Context ctx(cfg.axioms, cfg.lemmas, &cfg.schemas);
  TermBank bank(ctx);
  RunResult result;

  std::vector<Rec> recs;  // indexed by seq
  std::unordered_set<Formula> seen_dup;
  SubsumptionIndex seen_subs;
  auto remember = [&](const Formula& m, std::uint64_t seq) {
    if (cfg.rest.dup) seen_dup.insert(m);
    if (cfg.rest.subs) seen_subs.insert(m, static_cast<std::uint32_t>(seq));
  };

  std::vector<std::uint64_t> m;  // current M as seqs
  for (Id a = 0; a < ctx.n_ax; ++a) {
    const Formula& f = *bank.formula(a);
    recs.push_back({a, 0, f, static_cast<std::uint32_t>(f_tsize(f)), static_cast<std::uint32_t>(f_height(f))});
    remember(f, a);
    m.push_back(a);
  }
  std::vector<std::uint64_t> abandoned;
  SubsumptionIndex m_index;  // entries of M when post is subs
  result.levels.push_back({0, 0, 0, static_cast<std::uint64_t>(m.size()), static_cast<std::uint64_t>(m.size())});

  Batch batch;
  Generator gen(cfg.level, ctx, bank, batch);
  std::uint32_t i = 1;
  for (;; ++i) {
    if (cfg.maxlevel && i > *cfg.maxlevel) {
      result.termination = Termination::Stopped;
      result.level_reached = i - 1;
      break;
    }
    std::vector<PoolItem> pool;
    for (auto s : m) pool.push_back({recs[s].id, recs[s].level});
    gen.set_pool(pool);

    LevelStats st{i, 0, 0, 0, 0};
    std::vector<std::uint64_t> accepted;
    bool budget_hit = false;
    run_level(gen, batch, i - 1, bank, ctx, cfg.jobs, [&](const Cand& cand, std::optional<Formula> mg) {
      ++st.candidates;
      if (!mg) return true;
      ++st.defined;
      std::uint32_t ft = static_cast<std::uint32_t>(f_tsize(*mg));
      std::uint32_t fh = static_cast<std::uint32_t>(f_height(*mg));
      if (cfg.rest.lt_ft && ft > *cfg.rest.lt_ft) return true;
      if (cfg.rest.lt_fh && fh > *cfg.rest.lt_fh) return true;
      if (cfg.rest.dup && seen_dup.count(*mg)) return true;
      if (cfg.rest.subs && seen_subs.has_generalization(*mg)) return true;
      Id id = intern(cand, batch, bank, ctx, *mg);
      std::uint64_t seq = recs.size();
      remember(*mg, seq);
      recs.push_back({id, i, std::move(*mg), ft, fh});
      accepted.push_back(seq);
      if (bank.size() >= cfg.max_terms) {
        budget_hit = true;
        return false;
      }
      return !(cfg.rest.gen_max && accepted.size() >= *cfg.rest.gen_max);
    });
    st.accepted = accepted.size();

    if (budget_hit) {
      abandoned.insert(abandoned.end(), accepted.begin(), accepted.end());
      st.retained = m.size();
      result.levels.push_back(st);
      result.termination = Termination::BudgetExceeded;
      result.level_reached = i - 1;
      break;
    }

    std::uint64_t first_fresh = accepted.empty() ? recs.size() : accepted.front();
    std::vector<std::uint64_t> merged = m;
    merged.insert(merged.end(), accepted.begin(), accepted.end());
    std::stable_sort(merged.begin(), merged.end(), [&](std::uint64_t a, std::uint64_t b) {
      return std::make_pair(order_key(cfg.ord, recs[a].ft, recs[a].fh), a) <
             std::make_pair(order_key(cfg.ord, recs[b].ft, recs[b].fh), b);
    });
    std::vector<std::uint64_t> next(merged.begin(), merged.begin() + static_cast<std::ptrdiff_t>(
                                                          cfg.trim ? std::min<std::uint64_t>(*cfg.trim, merged.size())
                                                                   : merged.size()));
    for (std::size_t k = next.size(); k < merged.size(); ++k) abandoned.push_back(merged[k]);
    if (cfg.post_subs) {
      std::vector<bool> drop(next.size(), false);
      if (i == 1) {
        std::vector<const Formula*> mgts;
        for (auto s : next) mgts.push_back(&recs[s].mgt);
        auto keep = post_subs_keep(mgts, next);
        for (std::size_t k = 0; k < next.size(); ++k) drop[k] = !keep[k];
      } else {
        // M_{i-1} is already reduced, so only pairs with a fresh entry matter.
        std::unordered_set<std::uint64_t> kept_old;
        for (auto s : next)
          if (s < first_fresh) kept_old.insert(s);
        for (auto s : m)
          if (!kept_old.count(s)) m_index.erase(recs[s].mgt, static_cast<std::uint32_t>(s));
        SubsumptionIndex fresh_index;
        std::unordered_map<std::uint64_t, std::size_t> pos;
        for (std::size_t k = 0; k < next.size(); ++k) {
          pos[next[k]] = k;
          if (next[k] >= first_fresh) fresh_index.insert(recs[next[k]].mgt, static_cast<std::uint32_t>(next[k]));
        }
        for (std::size_t k = 0; k < next.size(); ++k) {
          std::uint64_t s = next[k];
          if (s < first_fresh) continue;
          const Formula& f = recs[s].mgt;
          if (m_index.has_generalization(f)) {
            drop[k] = true;
          } else {
            fresh_index.for_generalizations(f, [&](std::uint32_t j, const Formula& g) {
              if (j == s || (subsumes(f, g) && j > s)) return true;
              drop[k] = true;
              return false;
            });
          }
          m_index.for_instances(f, [&](std::uint32_t j, const Formula& g) {
            if (!subsumes(g, f)) drop[pos[j]] = true;
            return true;
          });
        }
      }
      std::vector<std::uint64_t> kept;
      for (std::size_t k = 0; k < next.size(); ++k) {
        auto id = static_cast<std::uint32_t>(next[k]);
        if (i == 1) {
          if (!drop[k]) m_index.insert(recs[id].mgt, id);
        } else if (drop[k] && next[k] < first_fresh) {
          m_index.erase(recs[id].mgt, id);
        } else if (!drop[k] && next[k] >= first_fresh) {
          m_index.insert(recs[id].mgt, id);
        }
        (drop[k] ? abandoned : kept).push_back(next[k]);
      }
      next = std::move(kept);
    }
    st.retained = next.size();
    result.levels.push_back(st);

    std::vector<std::uint64_t> before = m, after = next;
    std::sort(before.begin(), before.end());
    std::sort(after.begin(), after.end());
    m = std::move(next);
    if (before == after) {
      result.termination = Termination::Exhausted;
      result.level_reached = i - 1;
      break;
    }
  }

  auto export_entries = [&](const std::vector<std::uint64_t>& seqs) {
    std::vector<Entry> out;
    for (auto s : seqs) out.push_back({bank.to_term(recs[s].id), recs[s].mgt, recs[s].level, s});
    return out;
  };
  result.final_m = export_entries(m);
  std::sort(abandoned.begin(), abandoned.end());
  result.abandoned = export_entries(abandoned);
  result.gen = result.final_m.size() + result.abandoned.size();
  result.interned = bank.size();
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

std::string format_run_stats(const RunResult& r) {
  std::ostringstream out;
  out << "termination=" << termination_name(r.termination) << "\n";
  out << "level=" << r.level_reached << "\n";
  out << "gen=" << r.gen << "\n";
  out << "final=" << r.final_m.size() << "\n";
  out << "abandoned=" << r.abandoned.size() << "\n";
  out << "interned=" << r.interned << "\n";
  out << "seconds=" << r.seconds << "\n";
  for (const auto& l : r.levels)
    out << "level." << l.level << "=" << l.candidates << "," << l.defined << "," << l.accepted << "," << l.retained
        << "\n";
  return out.str();
}

std::vector<LevelCount> census(LevelKind kind, std::uint32_t max_level, const AxiomSystem& ax,
                               const SchemaTable* schemas, unsigned jobs) {
  check_kind(kind, schemas);
  Enumeration e(ax, schemas);
  e.run(kind, max_level, false, std::max(1u, jobs));
  return e.counts;
}

std::vector<ProofTerm> level_members(LevelKind kind, std::uint32_t i, const AxiomSystem& ax,
                                     const SchemaTable* schemas) {
  check_kind(kind, schemas);
  Enumeration e(ax, schemas);
  e.run(kind, i, true, 1);
  std::vector<ProofTerm> out;
  for (Id id : e.levels[i]) out.push_back(e.bank.to_term(id));
  return out;
}

namespace {

// Sequences of i nodes, each a distinct pair over axioms (codes < A) and
// earlier nodes (code A + k), kept when the left-first postorder numbering
// from the last node is the identity.
template <class Visit>
void for_each_csize_dag(std::uint32_t i, std::uint32_t n_ax, Visit&& visit) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> nodes(i);
  std::vector<std::uint32_t> stamp(i, 0);
  std::uint32_t epoch = 0;
  auto canonical_order = [&] {
    ++epoch;
    std::uint32_t next = 0;
    bool ok = true;
    auto rec = [&](auto&& self, std::uint32_t k) -> void {
      if (!ok || stamp[k] == epoch) return;
      stamp[k] = epoch;
      if (nodes[k].first >= n_ax) self(self, nodes[k].first - n_ax);
      if (nodes[k].second >= n_ax) self(self, nodes[k].second - n_ax);
      if (next++ != k) ok = false;
    };
    rec(rec, i - 1);
    return ok && next == i;
  };
  auto fill = [&](auto&& self, std::uint32_t k) -> void {
    if (k == i) {
      if (canonical_order()) visit(nodes);
      return;
    }
    std::uint32_t choices = n_ax + k;
    for (std::uint32_t l = 0; l < choices; ++l)
      for (std::uint32_t r = 0; r < choices; ++r) {
        bool clash = false;
        for (std::uint32_t j = 0; j < k && !clash; ++j) clash = nodes[j] == std::make_pair(l, r);
        if (clash) continue;
        nodes[k] = {l, r};
        self(self, k + 1);
      }
  };
  fill(fill, 0);
}

}  // namespace

std::vector<ProofTerm> enumerate_csize(std::uint32_t i, const AxiomSystem& ax, std::uint32_t bound) {
  if (i > bound) throw ConfigError("csize oracle bound is " + std::to_string(bound));
  std::vector<ProofTerm> out;
  std::vector<ProofTerm> leaves;
  for (const auto& [id, f] : ax.entries()) leaves.push_back(ProofTerm::axiom(id));
  if (i == 0) return leaves;
  auto n_ax = static_cast<std::uint32_t>(leaves.size());
  for_each_csize_dag(i, n_ax, [&](const auto& nodes) {
    std::vector<ProofTerm> built;
    auto get = [&](std::uint32_t c) { return c < n_ax ? leaves[c] : built[c - n_ax]; };
    for (const auto& [l, r] : nodes) built.push_back(ProofTerm::det(get(l), get(r)));
    out.push_back(built.back());
  });
  return out;
}

std::vector<LevelCount> census_csize(std::uint32_t max_level, const AxiomSystem& ax, std::uint32_t bound) {
  if (max_level > bound) throw ConfigError("csize oracle bound is " + std::to_string(bound));
  std::vector<Formula> leaves;
  for (const auto& [id, f] : ax.entries()) leaves.push_back(canonical(f));
  auto n_ax = static_cast<std::uint32_t>(leaves.size());
  std::vector<LevelCount> counts;
  {
    std::unordered_set<Formula> d(leaves.begin(), leaves.end());
    counts.push_back({n_ax, n_ax, d.size()});
  }
  for (std::uint32_t i = 1; i <= max_level; ++i) {
    LevelCount c;
    std::unordered_set<Formula> distinct;
    std::vector<std::optional<Formula>> f;
    for_each_csize_dag(i, n_ax, [&](const auto& nodes) {
      ++c.total;
      f.clear();
      auto get = [&](std::uint32_t x) -> std::optional<Formula> {
        return x < n_ax ? std::optional<Formula>(leaves[x]) : f[x - n_ax];
      };
      for (const auto& [l, r] : nodes) {
        auto a = get(l), b = get(r);
        f.push_back(a && b ? detach(*a, *b) : std::nullopt);
        if (!f.back()) return;
      }
      ++c.defined;
      distinct.insert(*f.back());
    });
    c.distinct = distinct.size();
    counts.push_back(c);
  }
  return counts;
}

std::optional<Entry> find_proof(const std::vector<Entry>& entries, const Formula& target) {
  const Entry* best = nullptr;
  for (const auto& e : entries)
    if (subsumes(e.mgt, target) && (!best || e.seq < best->seq)) best = &e;
  if (!best) return std::nullopt;
  return *best;
}

std::vector<Entry> all_entries(const RunResult& r) {
  std::vector<Entry> out = r.final_m;
  out.insert(out.end(), r.abandoned.begin(), r.abandoned.end());
  std::sort(out.begin(), out.end(), [](const Entry& a, const Entry& b) { return a.seq < b.seq; });
  return out;
}

}  // namespace cdgen
