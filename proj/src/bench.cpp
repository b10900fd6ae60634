#include "cdgen/bench.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cdgen/errors.hpp"

namespace cdgen {

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    std::size_t tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return out;
}

std::string_view strip(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// Calls f(line_number, line) for every line that is neither blank nor a comment.
template <class F>
void for_each_line(std::string_view text, F&& f) {
  std::size_t lineno = 0;
  while (!text.empty()) {
    ++lineno;
    std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::string_view s = strip(line);
    if (s.empty() || s.front() == '#') continue;
    f(lineno, line);
  }
}

ParseError line_error(std::size_t lineno, const std::string& what) {
  return ParseError("line " + std::to_string(lineno) + ": " + what);
}

std::optional<double> parse_seconds(std::string_view s) {
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

std::string format_seconds(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ParseError("cannot write " + path);
  out << text;
  if (!out) throw ParseError("write failed for " + path);
}

constexpr std::string_view kFlagOrder = "PTSCL";

void tptp_term(std::span<const std::int32_t> code, std::size_t& pos, std::string& out) {
  std::int32_t s = code[pos++];
  if (s >= 0) {
    std::string v = var_name(static_cast<VarIndex>(s));
    v[0] = static_cast<char>(v[0] - 'a' + 'A');
    out += v;
  } else if (s == Formula::kNeg) {
    out += "n(";
    tptp_term(code, pos, out);
    out += ')';
  } else {
    out += "i(";
    tptp_term(code, pos, out);
    out += ',';
    tptp_term(code, pos, out);
    out += ')';
  }
}

std::vector<std::pair<std::string, std::optional<ProofTerm>>> match_targets(
    const std::vector<Entry>& entries, const std::vector<TheoremRecord>& targets) {
  std::vector<std::pair<std::string, std::optional<ProofTerm>>> out;
  for (const auto& t : targets) {
    auto hit = find_proof(entries, t.formula);
    out.emplace_back(t.name, hit ? std::optional<ProofTerm>(hit->term) : std::nullopt);
  }
  return out;
}

}  // namespace

std::string Rating::str() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.2f", value());
  return buf;
}

Rating parse_rating(std::string_view text) {
  auto v = parse_seconds(strip(text));
  if (!v || *v < 0 || *v > 1) throw ParseError("rating must be a number in [0,1], got '" + std::string(text) + "'");
  double k = std::round(*v * 9);
  if (std::abs(*v - k / 9) > 0.01) throw ParseError("rating '" + std::string(text) + "' is not a multiple of 1/9");
  return {static_cast<std::uint32_t>(k)};
}

void SolverMatrix::set(const std::string& theorem, const std::string& solver, std::optional<double> seconds) {
  if (seconds && !(*seconds > 0)) throw DomainError("solve time must be positive for " + theorem + "/" + solver);
  rows_[theorem][solver] = seconds;
}

const std::optional<double>* SolverMatrix::find(const std::string& theorem, const std::string& solver) const {
  auto it = rows_.find(theorem);
  if (it == rows_.end()) return nullptr;
  auto jt = it->second.find(solver);
  return jt == it->second.end() ? nullptr : &jt->second;
}

std::uint32_t solved_cells(const std::string& theorem, const SolverMatrix& m) {
  std::uint32_t n = 0;
  for (const char* s : kRatedSolvers) {
    const auto* t = m.find(theorem, s);
    if (!t || !*t) continue;
    for (double limit : kRatingLimits)
      if (**t <= limit) ++n;
  }
  return n;
}

Rating rating(const std::string& theorem, const SolverMatrix& m) { return {9 - solved_cells(theorem, m)}; }

std::vector<TheoremRecord> parse_theorems(std::string_view text) {
  std::vector<TheoremRecord> out;
  for_each_line(text, [&](std::size_t lineno, std::string_view line) {
    auto f = split_tabs(line);
    if (f.size() < 3 || f.size() > 5) throw line_error(lineno, "expected 3 to 5 tab-separated fields");
    TheoremRecord r;
    r.name = std::string(strip(f[0]));
    if (r.name.empty()) throw line_error(lineno, "empty theorem name");
    try {
      r.formula = parse_formula(strip(f[1]));
    } catch (const ParseError& e) {
      throw line_error(lineno, e.what());
    }
    std::string_view refs = strip(f[2]);
    auto [p, ec] = std::from_chars(refs.data(), refs.data() + refs.size(), r.refs);
    if (refs.empty() || ec != std::errc() || p != refs.data() + refs.size())
      throw line_error(lineno, "bad reference count '" + std::string(refs) + "'");
    if (f.size() > 3 && !strip(f[3]).empty()) {
      try {
        r.rating = parse_rating(f[3]);
      } catch (const ParseError& e) {
        throw line_error(lineno, e.what());
      }
    }
    if (f.size() > 4) {
      std::string_view flags = strip(f[4]);
      for (char c : flags)
        if (kFlagOrder.find(c) == std::string_view::npos) throw line_error(lineno, std::string("bad flag '") + c + "'");
      for (char c : kFlagOrder)
        if (flags.find(c) != std::string_view::npos) r.flags.push_back(c);
    }
    out.push_back(std::move(r));
  });
  return out;
}

std::string print_theorems(const std::vector<TheoremRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += r.name + '\t' + print_formula(r.formula) + '\t' + std::to_string(r.refs);
    if (r.rating || !r.flags.empty()) out += '\t' + (r.rating ? r.rating->str() : std::string());
    if (!r.flags.empty()) out += '\t' + r.flags;
    out += '\n';
  }
  return out;
}

std::vector<TheoremRecord> load_theorems(const std::string& path) { return parse_theorems(read_text(path)); }

void save_theorems(const std::string& path, const std::vector<TheoremRecord>& records) {
  write_text(path, print_theorems(records));
}

SolverMatrix parse_solver_matrix(std::string_view text) {
  SolverMatrix m;
  for_each_line(text, [&](std::size_t lineno, std::string_view line) {
    auto f = split_tabs(line);
    if (f.size() != 3) throw line_error(lineno, "expected 3 tab-separated fields");
    std::string name(strip(f[0])), solver(strip(f[1]));
    std::string_view t = strip(f[2]);
    if (name.empty() || solver.empty()) throw line_error(lineno, "empty theorem or solver name");
    std::optional<double> secs;
    if (t != "timeout") {
      secs = parse_seconds(t);
      if (!secs || !(*secs > 0)) throw line_error(lineno, "bad solve time '" + std::string(t) + "'");
    }
    if (m.find(name, solver)) throw line_error(lineno, "duplicate row for " + name + "/" + solver);
    m.set(name, solver, secs);
  });
  return m;
}

std::string print_solver_matrix(const SolverMatrix& m) {
  std::string out;
  for (const auto& [name, row] : m.rows())
    for (const auto& [solver, t] : row)
      out += name + '\t' + solver + '\t' + (t ? format_seconds(*t) : std::string("timeout")) + '\n';
  return out;
}

SolverMatrix load_solver_matrix(const std::string& path) { return parse_solver_matrix(read_text(path)); }

void save_solver_matrix(const std::string& path, const SolverMatrix& m) { write_text(path, print_solver_matrix(m)); }

std::string tptp_closure(const Formula& f) {
  Formula c = canonical(f);
  std::int32_t nvars = 0;
  for (auto s : c.code()) nvars = std::max(nvars, s + 1);
  std::string out;
  if (nvars > 0) {
    out += "![";
    for (std::int32_t v = 0; v < nvars; ++v) {
      if (v) out += ',';
      std::string name = var_name(static_cast<VarIndex>(v));
      name[0] = static_cast<char>(name[0] - 'a' + 'A');
      out += name;
    }
    out += "]: ";
  }
  out += "p(";
  std::size_t pos = 0;
  tptp_term(c.code(), pos, out);
  out += ')';
  return out;
}

std::string tptp_identifier(const std::string& name) {
  std::string out;
  for (char c : name) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
    out.push_back(ok ? c : '_');
  }
  if (out.empty() || !(out[0] >= 'a' && out[0] <= 'z')) out = "t_" + out;
  return out;
}

std::string tptp_file_stem(const std::string& name) {
  std::string out;
  for (char c : name) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-' ||
              c == '.';
    out.push_back(ok ? c : '_');
  }
  if (out.empty() || out[0] == '.') out = "t" + out;
  return out;
}

std::string emit_tptp(const TheoremRecord& t, const std::vector<std::pair<std::string, Formula>>& lemmas,
                      const AxiomSystem& ax) {
  std::string head = "% " + t.name + "\n";
  std::string body = "fof(det, axiom, ![X,Y]: ((p(i(X,Y)) & p(X)) => p(Y))).\n";
  for (const auto& [id, f] : ax.entries()) {
    std::string fid = tptp_identifier("ax_" + id);
    if (fid != "ax_" + id) head += "% axiom " + id + " as " + fid + "\n";
    body += "fof(" + fid + ", axiom, " + tptp_closure(f) + ").\n";
  }
  for (const auto& [id, f] : lemmas) {
    std::string fid = tptp_identifier(id);
    if (fid != id) head += "% lemma " + id + " as " + fid + "\n";
    body += "fof(" + fid + ", axiom, " + tptp_closure(f) + ").\n";
  }
  body += "fof(thm, conjecture, " + tptp_closure(t.formula) + ").\n";
  return head + body;
}

std::vector<std::pair<std::string, std::optional<ProofTerm>>> check_solutions(
    const RunResult& r, const std::vector<TheoremRecord>& targets) {
  return match_targets(all_entries(r), targets);
}

std::vector<std::pair<std::string, std::optional<ProofTerm>>> check_solutions(
    const LemmaSeq& seq, const std::vector<TheoremRecord>& targets) {
  std::vector<Entry> entries;
  for (std::size_t i = 0; i < seq.size(); ++i) entries.push_back({seq[i].term, seq[i].mgt, 0, i});
  return match_targets(entries, targets);
}

}  // namespace cdgen
