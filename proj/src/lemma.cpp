#include "cdgen/lemma.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_set>

#include "cdgen/errors.hpp"

namespace cdgen {

std::vector<std::size_t> stride_sample(std::size_t total, std::size_t n) {
  std::vector<std::size_t> out;
  if (n == 0 || total == 0) return out;
  std::size_t stride = (total + n - 1) / n;
  for (std::size_t i = 0; i < total; i += stride) out.push_back(i);
  return out;
}

std::vector<ProofTerm> compose_base(const RunResult& r, std::optional<std::size_t> abandoned_sample) {
  std::vector<ProofTerm> out;
  for (const auto& e : r.final_m) out.push_back(e.term);
  if (!abandoned_sample) {
    for (const auto& e : r.abandoned) out.push_back(e.term);
  } else {
    for (auto i : stride_sample(r.abandoned.size(), *abandoned_sample)) out.push_back(r.abandoned[i].term);
  }
  return out;
}

LemmaSeq synthesize(const std::vector<ProofTerm>& d0, const AxiomSystem& ax, const SchemaTable* schemas,
                    SynthesisStats* stats) {
  MgtEvaluator eval(ax, schemas);
  std::vector<ProofTerm> base;
  std::unordered_set<ProofTerm> seen;
  std::string undefined;
  for (std::size_t i = 0; i < d0.size(); ++i) {
    if (!eval(d0[i])) {
      undefined += (undefined.empty() ? "" : ", ") + std::to_string(i);
      continue;
    }
    if (seen.insert(d0[i]).second) base.push_back(d0[i]);
  }
  if (!undefined.empty()) throw DomainError("base terms without MGT at positions " + undefined);

  DagGrammar g = compress(base, &ax);
  struct Row {
    std::size_t index;
    std::int64_t save;
    std::size_t ft, fh;
    ProofTerm term;
    Formula mgt;
  };
  std::vector<Row> rows;
  SynthesisStats st;
  st.d0 = base.size();
  st.productions = g.productions().size();
  const auto& prods = g.productions();
  for (std::size_t i = 0; i < prods.size(); ++i) {
    std::int64_t save = save_value(g, prods[i].lhs);
    if (save <= 0) continue;
    st.survivor_refs.push_back(ref_count(g, prods[i].lhs));
    ProofTerm t = g.expand(prods[i].lhs);
    Formula m = *eval(t);
    rows.push_back({i, save, f_tsize(m), f_height(m), t, m});
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.save != b.save) return a.save > b.save;
    return std::tie(a.ft, a.fh, a.index) < std::tie(b.ft, b.fh, b.index);
  });
  LemmaSeq expanded;
  for (auto& r : rows) expanded.push_back({r.term, r.mgt, r.save, prods[r.index].lhs});
  st.d_prime = expanded.size();
  LemmaSeq out = subsumption_reduce(expanded);
  st.d_lem = out.size();
  if (stats) *stats = std::move(st);
  return out;
}

LemmaSeq subsumption_reduce(const LemmaSeq& seq) {
  std::vector<Entry> entries;
  for (std::size_t i = 0; i < seq.size(); ++i) entries.push_back({seq[i].term, seq[i].mgt, 0, i});
  LemmaSeq out;
  for (const auto& e : post_subs(entries)) out.push_back(seq[e.seq]);
  return out;
}

PrecisionOrder parse_precision_order(const std::string& s) {
  if (s == "save") return PrecisionOrder::Save;
  if (s == "mgt_tsize") return PrecisionOrder::MgtTsize;
  if (s == "mgt_height") return PrecisionOrder::MgtHeight;
  throw ConfigError("unknown order '" + s + "'");
}

std::string precision_order_name(PrecisionOrder o) {
  switch (o) {
    case PrecisionOrder::Save:
      return "save";
    case PrecisionOrder::MgtTsize:
      return "mgt_tsize";
    case PrecisionOrder::MgtHeight:
      return "mgt_height";
  }
  return "?";
}

std::vector<std::pair<std::size_t, double>> prefix_precision(const LemmaSeq& seq, const std::vector<Formula>& targets,
                                                             PrecisionOrder order,
                                                             const std::vector<std::size_t>& lengths) {
  std::vector<std::size_t> idx(seq.size());
  std::iota(idx.begin(), idx.end(), 0);
  auto key = [&](std::size_t i) -> std::int64_t {
    switch (order) {
      case PrecisionOrder::Save:
        return -seq[i].save;
      case PrecisionOrder::MgtTsize:
        return static_cast<std::int64_t>(f_tsize(seq[i].mgt));
      case PrecisionOrder::MgtHeight:
        return static_cast<std::int64_t>(f_height(seq[i].mgt));
    }
    return 0;
  };
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return key(a) < key(b); });
  std::vector<std::size_t> hits(seq.size() + 1, 0);
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const Formula& m = seq[idx[k]].mgt;
    bool hit = std::any_of(targets.begin(), targets.end(), [&](const Formula& t) { return subsumes(m, t); });
    hits[k + 1] = hits[k] + (hit ? 1 : 0);
  }
  std::vector<std::pair<std::size_t, double>> out;
  for (auto len : lengths) {
    std::size_t n = std::min(len, seq.size());
    out.emplace_back(len, n == 0 ? 0.0 : static_cast<double>(hits[n]) / static_cast<double>(n));
  }
  return out;
}

std::vector<std::pair<std::string, Formula>> emit_lemma_axioms(const LemmaSeq& seq, std::size_t nlem) {
  std::vector<std::pair<std::string, Formula>> out;
  for (std::size_t i = 0; i < std::min(nlem, seq.size()); ++i)
    out.emplace_back("lem_" + std::to_string(i + 1), seq[i].mgt);
  return out;
}

}  // namespace cdgen
