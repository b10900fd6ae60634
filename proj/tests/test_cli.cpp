#include <filesystem>
#include <fstream>
#include <sstream>

#include "cdgen/bench.hpp"
#include "cdgen/dag_grammar.hpp"
#include "cli.hpp"
#include "doctest.h"

namespace fs = std::filesystem;
using namespace cdgen;

namespace {

const std::string kData = CDGEN_TEST_DATA;

struct Outcome {
  int code;
  std::string out, err;
};

Outcome call(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = cli::dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("cdgen_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void put(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

}  // namespace

TEST_CASE("stats prints census triples") {
  auto r = call({"stats", "--level", "tsize", "--max", "5"});
  CHECK(r.code == 0);
  CHECK(r.out.find("5\t30618\t4628\t516\n") != std::string::npos);
  CHECK(call({"stats", "--level", "csize", "--max", "2"}).code == 2);
  auto c = call({"stats", "--level", "csize", "--max", "2", "--oracle"});
  CHECK(c.code == 0);
  CHECK(c.out.find("1\t9\t6\t6\n") != std::string::npos);
  CHECK(call({"stats", "--level", "csize", "--max", "6", "--oracle"}).code == 2);
  CHECK(call({"stats", "--level", "pp", "--max", "1"}).code == 2);
  auto pp = call({"stats", "--level", "pp", "--max", "1", "--patterns", kData + "/schemas/b4_c_s.txt"});
  CHECK(pp.code == 0);
  CHECK(pp.out.find("1\t45\t") != std::string::npos);
}

TEST_CASE("verify a golden grammar") {
  auto r = call({"verify", "--grammar", kData + "/grammars/stoic3.dag"});
  CHECK(r.code == 0);
  CHECK(r.out.rfind("csize=24 tsize=183 height=24\n", 0) == 0);
  CHECK(r.out.find("mgt=((x => y) => ((n((y => z)) => u) => (n((x => z)) => u)))\n") != std::string::npos);
  CHECK(r.out.find("proves=yes") != std::string::npos);
  auto wrong = call({"verify", "--grammar", kData + "/grammars/stoic3.dag", "--theorem", "x => x"});
  CHECK(wrong.code == 1);
  CHECK(wrong.out.find("proves=no") != std::string::npos);
  CHECK(call({"verify", kData + "/grammars/stoic3.dag"}).code == 2);
  CHECK(call({"verify", "--grammar", kData + "/nothing.dag"}).code == 2);
}

TEST_CASE("convert modes") {
  fs::path dir = scratch("convert");
  put(dir / "d2.term", "# shared B applications\nD(D(D(B,1),1),D(D(D(B,1),1),D(D(D(B,1),1),1)))\n");
  auto r = call({"convert", "--mode", "reduce", (dir / "d2.term").string()});
  CHECK(r.code == 0);
  CHECK(r.out == "D(1,D(1,D(1,D(1,D(1,D(1,1))))))\n");

  put(dir / "def.term", "D(D(1,V2),V1)\n");
  auto u = call({"convert", "--mode", "def2unit", (dir / "def.term").string()});
  REQUIRE(u.code == 0);
  put(dir / "unit.term", u.out);
  auto m = call({"verify", (dir / "unit.term").string(), "--theorem", "x => (y => y)"});
  CHECK(m.code == 0);

  put(dir / "one.term", "1\n");
  CHECK(call({"convert", "--mode", "unit2def:2", (dir / "one.term").string()}).out == "D(D(1,V1),V2)\n");
  CHECK(call({"convert", "--mode", "unit2def:x", (dir / "one.term").string()}).code == 2);
  CHECK(call({"convert", "--mode", "shrink", (dir / "one.term").string()}).code == 2);

  put(dir / "bad.term", "D(3,3)\n");
  CHECK(call({"convert", "--mode", "def2unit", (dir / "bad.term").string()}).code == 1);
  auto e = call({"convert", "--mode", "eliminate", (dir / "d2.term").string()});
  CHECK(e.code == 0);
  put(dir / "elim.term", e.out);
  std::string eight = "x => (y => (z => (u => (v => (w => (x1 => (y1 => x1)))))))";
  CHECK(call({"verify", (dir / "elim.term").string(), "--theorem", eight}).code == 0);
  fs::remove_all(dir);
}

TEST_CASE("enumerate, lemmas, precision and tptp") {
  fs::path dir = scratch("pipeline");
  put(dir / "run.cfg", "level=psp\nrest=dup\nmaxlevel=4\n");
  auto r = call({"enumerate", (dir / "run.cfg").string(), (dir / "run").string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("termination=stopped\n") != std::string::npos);
  std::string final1 = slurp(dir / "run/final.tsv");
  std::string stats1 = slurp(dir / "run/stats.txt");
  CHECK(!final1.empty());
  CHECK(stats1.find("seconds=") == std::string::npos);
  // Re-running overwrites byte-identically.
  REQUIRE(call({"enumerate", (dir / "run.cfg").string(), (dir / "run").string(), "--jobs", "3"}).code == 0);
  CHECK(slurp(dir / "run/final.tsv") == final1);
  CHECK(slurp(dir / "run/stats.txt") == stats1);
  CHECK(parse_grammar(slurp(dir / "run/result.dag")).roots().size() ==
        cli::parse_entries(final1).size() + cli::parse_entries(slurp(dir / "run/abandoned.tsv")).size());
  auto entries = cli::parse_entries(final1);
  CHECK(cli::print_entries(entries) == final1);

  auto l = call({"lemmas", (dir / "run").string(), "--out", (dir / "lem.tsv").string(), "--nlem", "5"});
  REQUIRE(l.code == 0);
  CHECK(l.out.find("written=5\n") != std::string::npos);
  auto lemmas = parse_formula_table(slurp(dir / "lem.tsv"));
  REQUIRE(lemmas.size() == 5);
  CHECK(lemmas[0].first == "lem_1");

  put(dir / "targets.tsv", "t1\t" + print_formula(lemmas[0].second) + "\t1\nt2\tx => x\t1\n");
  auto p = call({"precision", (dir / "lem.tsv").string(), (dir / "targets.tsv").string(), "--orders", "save",
                 "--lengths", "1,2"});
  REQUIRE(p.code == 0);
  CHECK(p.out == "order\tlength\tprecision\nsave\t1\t1.0000\nsave\t2\t0.5000\n");
  CHECK(call({"precision", (dir / "lem.tsv").string(), (dir / "targets.tsv").string(), "--orders", "size"}).code ==
        2);

  auto t = call({"tptp", kData + "/bench/theorems.tsv", (dir / "tptp").string(), "--lemmas",
                 (dir / "lem.tsv").string(), "--nlem", "3"});
  REQUIRE(t.code == 0);
  CHECK(t.out == "problems=11\n");
  std::string stoic = slurp(dir / "tptp/stoic3.p");
  CHECK(std::count(stoic.begin(), stoic.end(), '\n') == 1 + 3 + 5);
  CHECK(stoic.find("fof(lem_3, axiom,") != std::string::npos);
  CHECK(slurp(dir / "tptp/index.tsv").find("stoic3\tstoic3.p\n") != std::string::npos);

  // Inputs are checked before anything is written.
  put(dir / "broken.tsv", "a\tx => x\t1\nb\tx =>\t1\n");
  auto bad = call({"tptp", (dir / "broken.tsv").string(), (dir / "never").string()});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("line 2") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "never"));
  put(dir / "broken.cfg", "level=psp\nbogus=1\n");
  CHECK(call({"enumerate", (dir / "broken.cfg").string(), (dir / "never").string()}).code == 2);
  CHECK_FALSE(fs::exists(dir / "never"));
  fs::remove_all(dir);
}

TEST_CASE("usage errors") {
  CHECK(call({}).code == 2);
  CHECK(call({"frobnicate"}).code == 2);
  CHECK(call({"stats", "--max", "3"}).code == 2);
  CHECK(call({"--help"}).code == 0);
}
