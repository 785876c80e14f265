#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "seqdesign/config_file.hpp"
#include "seqdesign/csv.hpp"
#include "seqdesign/error.hpp"
#include "seqdesign/fasta.hpp"
#include "seqdesign/pdb.hpp"
#include "test_support.hpp"

using namespace seqdesign;

namespace {

std::vector<FastaRecord> parse(const std::string& text, const FastaReadOptions& opt = {}) {
  std::istringstream in(text);
  return read_fasta(in, opt);
}

std::string ca_line(int serial, char chain, int res, double x, double y, double z, char alt = ' ', char icode = ' ',
                    const char* name = " CA ") {
  char buf[100];
  std::snprintf(buf, sizeof(buf), "ATOM  %5d %4s%c%3s %c%4d%c   %8.3f%8.3f%8.3f%6.2f%6.2f           C", serial, name,
                alt, "ALA", chain, res, icode, x, y, z, 1.0, 0.0);
  return buf;
}

}  // namespace

TEST(Fasta, ParsesHeadersAndWrappedSequences) {
  auto recs = parse(">seq1 method=ppo score=0.71\nACDE\nFGHI\n\n>seq2\nKLMN\n");
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs[0].id, "seq1");
  EXPECT_EQ(recs[0].description, "method=ppo score=0.71");
  EXPECT_EQ(recs[0].sequence, "ACDEFGHI");
  EXPECT_EQ(recs[1].id, "seq2");
  EXPECT_EQ(recs[1].description, "");
  EXPECT_EQ(recs[1].sequence, "KLMN");
}

TEST(Fasta, WindowsLineEndings) {
  auto recs = parse(">a\r\nAC\r\nDE\r\n");
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(recs[0].sequence, "ACDE");
}

TEST(Fasta, StrictErrors) {
  EXPECT_THROW(parse("ACDE\n>a\nAC\n"), ParseError);
  EXPECT_THROW(parse(">\nACDE\n"), ParseError);
  EXPECT_THROW(parse(">a\n>b\nAC\n"), ParseError);
  EXPECT_THROW(parse(">a\nACXB\n"), ParseError);
}

TEST(Fasta, LenientSubstituteOrDrop) {
  std::vector<std::string> warnings;
  FastaReadOptions opt;
  opt.mode = FastaMode::kLenient;
  opt.warnings = &warnings;
  auto dropped = parse(">a\nACXD\n>b\nacde\n", opt);
  ASSERT_EQ(dropped.size(), 1u);
  EXPECT_EQ(dropped[0].id, "b");
  EXPECT_EQ(dropped[0].sequence, "ACDE");
  EXPECT_EQ(warnings.size(), 1u);

  warnings.clear();
  opt.substitute = 'A';
  auto kept = parse(">a\nACXD\n>b\nACDE\n", opt);
  ASSERT_EQ(kept.size(), 2u);
  EXPECT_EQ(kept[0].sequence, "ACAD");
  EXPECT_EQ(warnings.size(), 1u);
}

TEST(Fasta, RoundtripThousandRecords) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::size_t> len(1, 300);
  std::vector<FastaRecord> recs;
  for (int i = 0; i < 1000; ++i) {
    auto s = Sequence::random(len(rng), Alphabet::amino_acids(), rng).to_string(Alphabet::amino_acids());
    recs.push_back({"r" + std::to_string(i), i % 3 ? "score=" + std::to_string(i) : "", s});
  }
  for (std::size_t width : {0, 60, 7}) {
    std::ostringstream out;
    write_fasta(out, recs, width);
    EXPECT_EQ(parse(out.str()), recs) << width;
  }
  auto dir = testkit::scratch_dir("fasta_roundtrip");
  write_fasta_file((dir / "x.fasta").string(), recs);
  EXPECT_EQ(read_fasta_file((dir / "x.fasta").string()), recs);
}

TEST(Fasta, LineWidth) {
  std::ostringstream out;
  write_fasta(out, {{"a", "", std::string(130, 'A')}});
  EXPECT_EQ(out.str(), ">a\n" + std::string(60, 'A') + "\n" + std::string(60, 'A') + "\n" + std::string(10, 'A') + "\n");
}

TEST(Pdb, SingleAtomLine) {
  std::istringstream in(ca_line(1, 'A', 5, 1.5, -2.25, 3.125) + "\n");
  auto t = read_pdb_ca(in);
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t.chain, 'A');
  EXPECT_EQ(t.residue_numbers[0], 5);
  EXPECT_DOUBLE_EQ(t.coords[0][0], 1.5);
  EXPECT_DOUBLE_EQ(t.coords[0][1], -2.25);
  EXPECT_DOUBLE_EQ(t.coords[0][2], 3.125);
}

TEST(Pdb, HandWrittenFixture) {
  auto t = read_pdb_ca_file(testkit::fixture("three_ca.pdb"));
  ASSERT_EQ(t.size(), 3u);
  EXPECT_EQ(t.chain, 'A');
  EXPECT_EQ(t.residue_numbers, (std::vector<int>{1, 2, 3}));
  EXPECT_DOUBLE_EQ(t.coords[0][0], 11.104);
  EXPECT_DOUBLE_EQ(t.coords[1][1], 7.2);
  EXPECT_DOUBLE_EQ(t.coords[2][2], -2.45);
  auto b = read_pdb_ca_file(testkit::fixture("three_ca.pdb"), 'B');
  ASSERT_EQ(b.size(), 1u);
  EXPECT_EQ(b.chain, 'B');
}

TEST(Pdb, SkipsNonCaAltLocsAndLaterModels) {
  std::string text = "MODEL        1\n" + ca_line(1, 'A', 1, 0, 0, 0, ' ', ' ', " N  ") + "\n" +
                     ca_line(2, 'A', 1, 1, 0, 0, 'A') + "\n" + ca_line(3, 'A', 1, 9, 9, 9, 'B') + "\n" +
                     ca_line(4, 'A', 2, 2, 0, 0) + "\nENDMDL\nMODEL        2\n" + ca_line(5, 'A', 3, 3, 0, 0) + "\nENDMDL\n";
  std::istringstream in(text);
  auto t = read_pdb_ca(in);
  ASSERT_EQ(t.size(), 2u);
  EXPECT_DOUBLE_EQ(t.coords[0][0], 1.0);
  EXPECT_DOUBLE_EQ(t.coords[1][0], 2.0);
}

TEST(Pdb, InsertionCodesOrder) {
  std::istringstream in(ca_line(1, 'A', 10, 0, 0, 0) + "\n" + ca_line(2, 'A', 10, 1, 0, 0, ' ', 'A') + "\n" +
                        ca_line(3, 'A', 11, 2, 0, 0) + "\n");
  auto t = read_pdb_ca(in);
  EXPECT_EQ(t.size(), 3u);
  EXPECT_EQ(t.insertion_codes[1], 'A');
}

TEST(Pdb, Errors) {
  std::istringstream decreasing(ca_line(1, 'A', 5, 0, 0, 0) + "\n" + ca_line(2, 'A', 4, 1, 0, 0) + "\n");
  EXPECT_THROW(read_pdb_ca(decreasing), ParseError);
  std::istringstream repeated(ca_line(1, 'A', 5, 0, 0, 0) + "\n" + ca_line(2, 'A', 5, 1, 0, 0) + "\n");
  EXPECT_THROW(read_pdb_ca(repeated), ParseError);
  std::string bad = ca_line(1, 'A', 5, 0, 0, 0);
  bad.replace(30, 8, "  abc.de");
  std::istringstream malformed(bad + "\n");
  EXPECT_THROW(read_pdb_ca(malformed), ParseError);
  std::istringstream empty("HEADER\nEND\n");
  EXPECT_THROW(read_pdb_ca(empty), ParseError);
  std::istringstream other(ca_line(1, 'A', 1, 0, 0, 0) + "\n");
  EXPECT_THROW(read_pdb_ca(other, 'Z'), ParseError);
}

TEST(Csv, EmptyTableWritesHeaderOnly) {
  std::ostringstream out;
  write_csv(out, {"a", "b"}, {});
  EXPECT_EQ(out.str(), "a,b\n");
}

TEST(Csv, Formatting) {
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(format_double(2.0), "2");
  EXPECT_EQ(format_double(std::numeric_limits<double>::quiet_NaN()), "nan");
  EXPECT_EQ(format_double(-std::numeric_limits<double>::infinity()), "-inf");
  EXPECT_EQ(format_cell(CsvCell{std::string("a,b")}), "\"a,b\"");
  EXPECT_EQ(format_cell(CsvCell{std::string("say \"hi\"")}), "\"say \"\"hi\"\"\"");
  EXPECT_EQ(format_cell(CsvCell{std::int64_t{-7}}), "-7");
}

TEST(Csv, WidthMismatchRejected) {
  std::ostringstream out;
  EXPECT_THROW(write_csv(out, {"a", "b"}, {{CsvCell{1.0}}}), ContractError);
}

TEST(Csv, DoublesRoundtripExactly) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  std::vector<CsvRow> rows;
  std::vector<double> values;
  for (int i = 0; i < 500; ++i) {
    const double v = u(rng) * std::pow(10.0, (i % 40) - 20);
    values.push_back(v);
    rows.push_back({CsvCell{std::int64_t{i}}, CsvCell{v}, CsvCell{std::string(i % 2 ? "x,\"y\"" : "plain")}});
  }
  std::ostringstream out;
  write_csv(out, {"i", "v", "s"}, rows);
  std::istringstream in(out.str());
  auto t = read_csv(in);
  ASSERT_EQ(t.rows.size(), 500u);
  for (int i = 0; i < 500; ++i) {
    EXPECT_EQ(parse_double(t.rows[i][t.column("v")]), values[i]);
    EXPECT_EQ(t.rows[i][2], i % 2 ? "x,\"y\"" : "plain");
  }

  std::ostringstream again;
  write_csv(again, {"i", "v", "s"}, rows);
  EXPECT_EQ(out.str(), again.str());
}

TEST(Csv, ReaderErrors) {
  std::istringstream unterminated("a,b\n\"x,1\n");
  EXPECT_THROW(read_csv(unterminated), ParseError);
  std::istringstream ragged("a,b\n1\n");
  EXPECT_THROW(read_csv(ragged), ParseError);
  EXPECT_THROW(parse_double("1.5x"), ParseError);
  std::istringstream ok("a,b\n1,2\n");
  EXPECT_THROW(read_csv(ok).column("c"), ParseError);
}

TEST(Toml, TablesValuesAndArrays) {
  auto j = parse_toml_string(R"(# comment
experiment = "oracle"
budget = 20_000
seeds = [1, 2, 3]

[env]
seq_len = 50
horizon = 'infinite'   # trailing comment

[agents.ppo]
learning_rate = 3e-4
hidden = [64, 64]
use_rnd = false
clip = 0.2

[proxy]
"top_k" = 200
inf_val = inf
)");
  EXPECT_EQ(j["experiment"], "oracle");
  EXPECT_EQ(j["budget"], 20000);
  EXPECT_EQ(j["seeds"], nlohmann::json::array({1, 2, 3}));
  EXPECT_EQ(j["env"]["seq_len"], 50);
  EXPECT_EQ(j["env"]["horizon"], "infinite");
  EXPECT_DOUBLE_EQ(j["agents"]["ppo"]["learning_rate"].get<double>(), 3e-4);
  EXPECT_EQ(j["agents"]["ppo"]["hidden"], nlohmann::json::array({64, 64}));
  EXPECT_EQ(j["agents"]["ppo"]["use_rnd"], false);
  EXPECT_EQ(j["proxy"]["top_k"], 200);
  EXPECT_TRUE(std::isinf(j["proxy"]["inf_val"].get<double>()));
}

TEST(Toml, DottedKeys) {
  auto j = parse_toml_string("a.b.c = 1\n[x]\ny.z = \"s\"\n");
  EXPECT_EQ(j["a"]["b"]["c"], 1);
  EXPECT_EQ(j["x"]["y"]["z"], "s");
}

TEST(Toml, ErrorsCarryLineNumbers) {
  try {
    parse_toml_string("a = 1\nb = \n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_toml_string("a = 1\na = 2\n"), ConfigError);
  EXPECT_THROW(parse_toml_string("[t]\nx=1\n[t]\n"), ConfigError);
  EXPECT_THROW(parse_toml_string("a = \"unterminated\n"), ConfigError);
  EXPECT_THROW(parse_toml_string("a = [1, 2\n"), ConfigError);
}
