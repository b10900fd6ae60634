#include "cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "cdgen/bench.hpp"
#include "cdgen/combinator.hpp"
#include "cdgen/dag_grammar.hpp"
#include "cdgen/errors.hpp"
#include "cdgen/lemma.hpp"

namespace fs = std::filesystem;

namespace cdgen::cli {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ParseError("cannot write " + path.string());
  out << text;
  if (!out) throw ParseError("write failed for " + path.string());
}

void make_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ParseError("cannot create directory " + dir);
}

// Non-blank lines with '#' comments removed.
std::vector<std::string> content_lines(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    auto e = line.find_last_not_of(" \t\r");
    out.push_back(line.substr(b, e - b + 1));
  }
  return out;
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

// Shared --axioms / --patterns options.
struct Theory {
  std::string axioms_path, patterns_path;

  void add_options(CLI::App* app) {
    app->add_option("--axioms", axioms_path, "Axiom table replacing the three default axioms");
    app->add_option("--patterns", patterns_path, "Schema declarations");
  }
  AxiomSystem axioms() const {
    if (axioms_path.empty()) return AxiomSystem::table1();
    AxiomSystem ax;
    for (const auto& [id, f] : parse_formula_table(read_file(axioms_path))) ax.add(id, f);
    return ax;
  }
  SchemaTable schemas() const {
    return patterns_path.empty() ? SchemaTable{} : parse_schema_declarations(read_file(patterns_path));
  }
  bool has_schemas() const { return !patterns_path.empty(); }
};

std::string stats_without_timing(const RunResult& r) {
  std::string out;
  for (const auto& line : content_lines(format_run_stats(r)))
    if (line.rfind("seconds=", 0) != 0) out += line + '\n';
  return out;
}

int cmd_enumerate(const std::string& config_path, const std::string& out_dir, std::optional<unsigned> jobs,
                  std::ostream& out, std::ostream& err) {
  std::string base = fs::path(config_path).parent_path().string();
  EngineConfig cfg = parse_engine_config(read_file(config_path), base.empty() ? "." : base);
  if (jobs) cfg.jobs = *jobs;
  cfg.validate();
  RunResult r = run(cfg);
  std::vector<ProofTerm> terms;
  for (const auto& e : all_entries(r)) terms.push_back(e.term);
  std::string grammar = terms.empty() ? std::string() : print_grammar(compress(terms, &cfg.axioms));
  make_dir(out_dir);
  write_file(fs::path(out_dir) / "result.dag", grammar);
  std::string stats = stats_without_timing(r);
  write_file(fs::path(out_dir) / "stats.txt", stats);
  write_file(fs::path(out_dir) / "final.tsv", print_entries(r.final_m));
  write_file(fs::path(out_dir) / "abandoned.tsv", print_entries(r.abandoned));
  out << stats;
  err << "seconds=" << r.seconds << "\n";
  return kOk;
}

int cmd_lemmas(const std::vector<std::string>& run_dirs, const LemmaConfig& lc, const std::string& out_path,
               const Theory& th, std::ostream& out) {
  AxiomSystem ax = th.axioms();
  SchemaTable schemas = th.schemas();
  std::vector<ProofTerm> base;
  for (const auto& dir : run_dirs) {
    RunResult r;
    r.final_m = parse_entries(read_file((fs::path(dir) / "final.tsv").string()));
    r.abandoned = parse_entries(read_file((fs::path(dir) / "abandoned.tsv").string()));
    for (auto& t : compose_base(r, lc.abandoned_sample)) base.push_back(std::move(t));
  }
  SynthesisStats st;
  LemmaSeq seq = synthesize(base, ax, th.has_schemas() ? &schemas : nullptr, &st);
  write_file(out_path, print_formula_table(emit_lemma_axioms(seq, lc.nlem)));
  out << "base=" << st.d0 << "\nproductions=" << st.productions << "\nafter_deletion=" << st.d_prime
      << "\nafter_reduction=" << st.d_lem << "\nwritten=" << std::min(lc.nlem, seq.size()) << "\n";
  return kOk;
}

int cmd_precision(const std::string& lemma_path, const std::string& theorem_path, const std::string& orders,
                  const std::string& lengths, std::ostream& out) {
  auto rows = parse_formula_table(read_file(lemma_path));
  auto theorems = load_theorems(theorem_path);
  std::vector<PrecisionOrder> ords;
  for (const auto& o : split_commas(orders)) ords.push_back(parse_precision_order(o));
  std::vector<std::size_t> lens;
  for (const auto& l : split_commas(lengths)) {
    try {
      std::size_t used = 0;
      lens.push_back(std::stoul(l, &used));
      if (used != l.size()) throw std::invalid_argument(l);
    } catch (const std::exception&) {
      throw ParseError("bad length '" + l + "'");
    }
  }
  // The file is in save order, so positions stand in for save values.
  LemmaSeq seq;
  for (std::size_t i = 0; i < rows.size(); ++i)
    seq.push_back({ProofTerm::axiom(rows[i].first), rows[i].second, static_cast<std::int64_t>(rows.size() - i), ""});
  std::vector<Formula> targets;
  for (const auto& t : theorems) targets.push_back(t.formula);
  out << "order\tlength\tprecision\n";
  for (auto o : ords)
    for (auto [len, frac] : prefix_precision(seq, targets, o, lens)) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.4f", frac);
      out << precision_order_name(o) << '\t' << len << '\t' << buf << '\n';
    }
  return kOk;
}

int cmd_tptp(const std::string& theorem_path, const std::string& lemma_path, std::optional<std::size_t> nlem,
             const std::string& out_dir, const Theory& th, std::ostream& out) {
  auto theorems = load_theorems(theorem_path);
  std::vector<std::pair<std::string, Formula>> lemmas;
  if (!lemma_path.empty()) lemmas = parse_formula_table(read_file(lemma_path));
  if (nlem && *nlem < lemmas.size()) lemmas.resize(*nlem);
  AxiomSystem ax = th.axioms();
  std::map<std::string, std::string> files;
  for (const auto& t : theorems) {
    std::string file = tptp_file_stem(t.name) + ".p";
    auto [it, fresh] = files.emplace(file, t.name);
    if (!fresh) throw ParseError("theorems " + it->second + " and " + t.name + " map to the same file " + file);
  }
  make_dir(out_dir);
  std::string index;
  for (const auto& t : theorems) {
    std::string file = tptp_file_stem(t.name) + ".p";
    write_file(fs::path(out_dir) / file, emit_tptp(t, lemmas, ax));
    index += t.name + '\t' + file + '\n';
  }
  write_file(fs::path(out_dir) / "index.tsv", index);
  out << "problems=" << theorems.size() << "\n";
  return kOk;
}

int cmd_verify(const std::string& path, bool grammar, const std::string& theorem, const Theory& th,
               std::ostream& out, std::ostream& err) {
  AxiomSystem ax = th.axioms();
  SchemaTable schemas = th.schemas();
  std::vector<std::pair<ProofTerm, std::optional<Formula>>> items;
  std::optional<Formula> target;
  if (!theorem.empty()) target = parse_formula(theorem);
  std::string text = read_file(path);
  if (grammar) {
    DagGrammar g = parse_grammar(text);
    for (std::size_t i = 0; i < g.roots().size(); ++i) {
      std::optional<Formula> stated;
      const auto& root = g.roots()[i];
      if (root.is_axiom())
        if (const auto* p = g.find(root.label())) stated = p->annotation;
      items.emplace_back(g.expand_root(i), target ? target : stated);
    }
  } else {
    for (const auto& line : content_lines(text)) items.emplace_back(parse_proof_term(line), target);
  }
  if (items.empty()) throw ParseError("no proof in " + path);
  int code = kOk;
  for (const auto& [d, goal] : items) {
    AxiomSystem use = ax;
    if (contains_primitive(d)) add_primitive_combinators(use);
    out << "csize=" << csize(d) << " tsize=" << tsize(d) << " height=" << height(d) << "\n";
    auto m = mgt(d, use, th.has_schemas() ? &schemas : nullptr);
    if (!m) {
      out << "mgt=undefined\n";
      err << "proof has no MGT\n";
      code = kDomainFailure;
      continue;
    }
    out << "mgt=" << print_formula(*m) << "\n";
    if (goal) {
      bool ok = subsumes(*m, *goal);
      out << "proves=" << (ok ? "yes" : "no") << "\n";
      if (!ok) {
        err << "MGT does not subsume " << print_formula(*goal) << "\n";
        code = kDomainFailure;
      }
    }
  }
  return code;
}

int cmd_convert(const std::string& path, const std::string& mode, const Theory& th, std::ostream& out) {
  AxiomSystem ax = th.axioms();
  SchemaTable schemas = th.schemas();
  const SchemaTable* sp = th.has_schemas() ? &schemas : nullptr;
  std::optional<std::uint32_t> unit_n;
  if (mode.rfind("unit2def:", 0) == 0) {
    std::string n = mode.substr(9);
    if (n.empty() || n.find_first_not_of("0123456789") != std::string::npos || n.size() > 9)
      throw ParseError("bad parameter count in '" + mode + "'");
    unit_n = static_cast<std::uint32_t>(std::stoul(n));
  } else if (mode != "reduce" && mode != "eliminate" && mode != "def2unit") {
    throw ParseError("unknown mode '" + mode + "'");
  }
  std::vector<ProofTerm> terms;
  for (const auto& line : content_lines(read_file(path))) terms.push_back(parse_proof_term(line));
  if (terms.empty()) throw ParseError("no proof in " + path);
  std::string result;
  auto convert = [&](const ProofTerm& d) -> ProofTerm {
    if (mode == "reduce") return reduce(sp ? expand_patterns(d, *sp) : d);
    if (mode == "eliminate") {
      auto e = eliminate_combinators(sp ? expand_patterns(d, *sp) : d, ax);
      if (!e) throw DomainError("the axioms lack K or S for combinator elimination");
      return *e;
    }
    if (unit_n) return unit_to_definite(d, *unit_n, ax, sp);
    return definite_to_unit(d, ax, sp);
  };
  for (const auto& d : terms) result += print_proof_term(convert(d)) + '\n';
  out << result;
  return kOk;
}

int cmd_stats(const std::string& level, std::uint32_t max, bool oracle, unsigned jobs, const Theory& th,
              std::ostream& out) {
  AxiomSystem ax = th.axioms();
  std::vector<LevelCount> counts;
  if (level == "csize" || level == "c") {
    if (!oracle) throw ConfigError("csize levels need --oracle");
    if (max > kCsizeOracleBound)
      throw ConfigError("the csize oracle is bounded by " + std::to_string(kCsizeOracleBound));
    counts = census_csize(max, ax);
  } else {
    LevelKind kind = parse_level_kind(level);
    SchemaTable schemas = th.schemas();
    counts = census(kind, max, ax, th.has_schemas() ? &schemas : nullptr, jobs);
  }
  out << "i\tmembers\tdefined\tdistinct\n";
  for (std::size_t i = 0; i < counts.size(); ++i)
    out << i << '\t' << counts[i].total << '\t' << counts[i].defined << '\t' << counts[i].distinct << '\n';
  return kOk;
}

}  // namespace

std::string print_entries(const std::vector<Entry>& entries) {
  std::string out;
  for (const auto& e : entries)
    out += std::to_string(e.seq) + '\t' + std::to_string(e.level) + '\t' + print_proof_term(e.term) + '\t' +
           print_formula(e.mgt) + '\n';
  return out;
}

std::vector<Entry> parse_entries(std::string_view text) {
  std::vector<Entry> out;
  std::size_t lineno = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, '\t')) f.push_back(field);
    try {
      if (f.size() != 4) throw ParseError("expected 4 tab-separated fields");
      Entry e{parse_proof_term(f[2]), canonical(parse_formula(f[3])), 0, 0};
      std::size_t used = 0;
      e.seq = std::stoull(f[0], &used);
      if (used != f[0].size()) throw ParseError("bad sequence number");
      e.level = static_cast<std::uint32_t>(std::stoul(f[1], &used));
      if (used != f[1].size()) throw ParseError("bad level");
      out.push_back(std::move(e));
    } catch (const std::exception& ex) {
      throw ParseError("line " + std::to_string(lineno) + ": " + ex.what());
    }
  }
  return out;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Condensed detachment proof term generation and lemma synthesis", "cdgen"};
  app.require_subcommand(1);

  std::string config, out_dir;
  std::optional<unsigned> enum_jobs;
  auto* enumerate = app.add_subcommand("enumerate", "Run the level engine on a config file");
  enumerate->add_option("config", config, "Engine config (key=value lines)")->required();
  enumerate->add_option("out-dir", out_dir, "Directory for stats.txt, final.tsv, abandoned.tsv, result.dag")->required();
  enumerate->add_option("--jobs", enum_jobs, "Worker threads")->check(CLI::PositiveNumber);

  std::vector<std::string> run_dirs;
  LemmaConfig lc;
  std::string lemma_out;
  Theory lemma_th;
  auto* lemmas = app.add_subcommand("lemmas", "Synthesize lemmas from enumerate outputs");
  lemmas->add_option("run-dirs", run_dirs, "Output directories of enumerate")->required();
  lemmas->add_option("--nlem", lc.nlem, "Lemmas to write")->capture_default_str();
  lemmas->add_option("--sample", lc.abandoned_sample, "Abandoned members to sample per run");
  lemmas->add_option("--out", lemma_out, "Lemma file to write")->required();
  lemma_th.add_options(lemmas);

  std::string prec_lemmas, prec_theorems, orders = "save,mgt_tsize,mgt_height", lengths = "1,5,10,50";
  auto* precision = app.add_subcommand("precision", "Share of lemma prefixes that subsume a theorem");
  precision->add_option("lemma-file", prec_lemmas)->required();
  precision->add_option("theorem-file", prec_theorems)->required();
  precision->add_option("--orders", orders, "Comma-separated: save, mgt_tsize, mgt_height")->capture_default_str();
  precision->add_option("--lengths", lengths, "Comma-separated prefix lengths")->capture_default_str();

  std::string tptp_theorems, tptp_lemmas, tptp_out;
  std::optional<std::size_t> tptp_nlem;
  Theory tptp_th;
  auto* tptp = app.add_subcommand("tptp", "Write one TPTP problem per theorem");
  tptp->add_option("theorem-file", tptp_theorems)->required();
  tptp->add_option("out-dir", tptp_out)->required();
  tptp->add_option("--lemmas", tptp_lemmas, "Lemma file added as axioms");
  tptp->add_option("--nlem", tptp_nlem, "Use only the first n lemmas");
  tptp->add_option("--axioms", tptp_th.axioms_path, "Axiom table replacing the three default axioms");

  std::string verify_path, verify_theorem;
  bool verify_grammar = false;
  Theory verify_th;
  auto* verify = app.add_subcommand("verify", "Sizes and MGT of a proof term or grammar");
  verify->add_option("file", verify_path)->required();
  verify->add_flag("--grammar", verify_grammar, "The file is a DAG grammar");
  verify->add_option("--theorem", verify_theorem, "Formula the proof must prove");
  verify_th.add_options(verify);

  std::string convert_path, convert_mode;
  Theory convert_th;
  auto* convert = app.add_subcommand("convert", "Transform proof terms, one per line");
  convert->add_option("file", convert_path)->required();
  convert->add_option("--mode", convert_mode, "reduce, eliminate, unit2def:n or def2unit")->required();
  convert_th.add_options(convert);

  std::string stats_level;
  std::uint32_t stats_max = 0;
  bool stats_oracle = false;
  unsigned stats_jobs = 1;
  Theory stats_th;
  auto* stats = app.add_subcommand("stats", "Level cardinalities: members, defined MGTs, distinct MGTs");
  stats->add_option("--level", stats_level, "tsize, height, psp, pp, pk or csize")->required();
  stats->add_option("--max", stats_max, "Largest level")->required();
  stats->add_flag("--oracle", stats_oracle, "Allow the brute-force csize enumerator");
  stats->add_option("--jobs", stats_jobs, "Worker threads")->check(CLI::PositiveNumber);
  stats_th.add_options(stats);

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  }

  try {
    if (*enumerate) return cmd_enumerate(config, out_dir, enum_jobs, out, err);
    if (*lemmas) return cmd_lemmas(run_dirs, lc, lemma_out, lemma_th, out);
    if (*precision) return cmd_precision(prec_lemmas, prec_theorems, orders, lengths, out);
    if (*tptp) return cmd_tptp(tptp_theorems, tptp_lemmas, tptp_nlem, tptp_out, tptp_th, out);
    if (*verify) return cmd_verify(verify_path, verify_grammar, verify_theorem, verify_th, out, err);
    if (*convert) return cmd_convert(convert_path, convert_mode, convert_th, out);
    if (*stats) return cmd_stats(stats_level, stats_max, stats_oracle, stats_jobs, stats_th, out);
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kDomainFailure;
  } catch (const BudgetExceeded& e) {
    err << "error: " << e.what() << "\n";
    return kDomainFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  }
  return kUsageError;
}

}  // namespace cdgen::cli
