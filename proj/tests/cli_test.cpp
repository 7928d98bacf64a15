#include "poda/cli.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include <unistd.h>

#include "json.hpp"
#include "poda/corpus.hpp"
#include "poda/io.hpp"
#include "poda/linearize.hpp"

namespace poda {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("poda_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const std::string& path, const std::string& text) { std::ofstream(path, std::ios::binary) << text; }

std::vector<json> jsonl(const std::string& path) {
  std::vector<json> out;
  std::istringstream in(slurp(path));
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) out.push_back(json::parse(line));
  }
  return out;
}

// One generated sentence: each entity is a single token "e<i>_<j>" of type
// types[(i + j) % n], separated by filler tokens.
struct Generated {
  std::string conll;
  std::vector<std::vector<std::pair<std::string, std::string>>> entities;  // per sentence, left to right
};

Generated make_conll(const std::vector<std::string>& types, std::size_t sentences, std::size_t per_sentence) {
  Generated g;
  for (std::size_t i = 0; i < sentences; ++i) {
    auto& ents = g.entities.emplace_back();
    g.conll += "the\tO\n";
    for (std::size_t j = 0; j < per_sentence; ++j) {
      const auto& type = types[(i + j) % types.size()];
      const std::string token = "e" + std::to_string(i) + "_" + std::to_string(j);
      g.conll += token + "\tB-" + type + "\nand\tO\n";
      ents.emplace_back(token, type);
    }
    g.conll += "\n";
  }
  return g;
}

std::string flat_target(const std::vector<std::pair<std::string, std::string>>& ents) {
  std::string s = "[";
  for (std::size_t i = 0; i < ents.size(); ++i) {
    if (i) s += ", ";
    s += "(" + ents[i].first + ", " + ents[i].second + ")";
  }
  return s + "]";
}

std::string prediction_line(std::size_t sentence, const std::string& generated) {
  return json{{"example_id", "s" + std::to_string(sentence) + ":0"},
              {"sentence_id", "s" + std::to_string(sentence)},
              {"generated", generated}}
             .dump() +
         "\n";
}

const std::vector<std::string> kFour{"LOC", "MISC", "ORG", "PER"};
const std::vector<std::string> kSeven{"FAC", "GPE", "LOC", "ORG", "PER", "VEH", "WEA"};

TEST(Io, Sha256KnownAnswers) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Io, AtomicWriteLeavesNoTemp) {
  TempDir dir;
  write_file_atomic(dir.file("a.txt"), "one");
  write_file_atomic(dir.file("a.txt"), "two");
  EXPECT_EQ(slurp(dir.file("a.txt")), "two");
  EXPECT_FALSE(fs::exists(dir.file("a.txt.tmp")));
}

TEST(CmdAugment, AllPermutationsGiveTwentyFivePerSentence) {
  TempDir dir;
  spit(dir.file("c.conll"), make_conll(kFour, 40, 3).conll);
  const auto r = run_cli({"augment", "--in", dir.file("c.conll"), "--k", "5", "--perms", "all", "--out",
                          dir.file("out")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto split = json::parse(slurp(dir.file("out/split.json")));
  const auto lines = jsonl(dir.file("out/train.jsonl"));
  std::map<std::string, std::size_t> per_sentence;
  for (const auto& j : lines) ++per_sentence[j.at("sentence_id").get<std::string>()];
  EXPECT_EQ(per_sentence.size(), split.at("sentence_ids").size());
  for (const auto& [id, n] : per_sentence) EXPECT_EQ(n, 25u) << id;
  EXPECT_EQ(lines.size(), 25u * split.at("sentence_ids").size());

  const auto manifest = json::parse(slurp(dir.file("out/manifest.json")));
  EXPECT_EQ(manifest.at("tool_version"), cli::kToolVersion);
  EXPECT_EQ(manifest.at("config").at("instruction_template"), cli::kInstructionTemplateId);
  EXPECT_EQ(manifest.at("config").at("perms"), "all");
  for (const auto& o : manifest.at("outputs")) {
    EXPECT_EQ(o.at("sha256"), sha256_hex(slurp(dir.file("out/" + o.at("path").get<std::string>()))));
  }
}

TEST(CmdAugment, SampledPermutationsGiveTwentyOnePerSentence) {
  TempDir dir;
  spit(dir.file("c.conll"), make_conll(kSeven, 60, 4).conll);
  const auto r = run_cli({"augment", "--in", dir.file("c.conll"), "--k", "5", "--perms", "20", "--seed", "7",
                          "--out", dir.file("out")});
  ASSERT_EQ(r.code, 0) << r.err;
  std::map<std::string, std::size_t> per_sentence;
  std::set<std::string> instructions;
  for (const auto& j : jsonl(dir.file("out/train.jsonl"))) {
    ++per_sentence[j.at("sentence_id").get<std::string>()];
    if (!j.at("permutation").is_null()) instructions.insert(j.at("permutation").get<std::string>());
  }
  for (const auto& [id, n] : per_sentence) EXPECT_EQ(n, 21u) << id;
  EXPECT_EQ(instructions.size(), 20u);
}

TEST(CmdAugment, ByteIdenticalReruns) {
  ::setenv("SOURCE_DATE_EPOCH", "1700000000", 1);
  TempDir dir;
  spit(dir.file("c.conll"), make_conll(kSeven, 50, 3).conll);
  for (const char* out : {"a", "b"}) {
    const auto r = run_cli({"augment", "--in", dir.file("c.conll"), "--k", "5", "--perms", "20", "--seed", "7",
                            "--out", dir.file(out)});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  ::unsetenv("SOURCE_DATE_EPOCH");
  for (const char* name : {"train.jsonl", "split.json", "manifest.json"}) {
    const auto a = slurp(dir.file(std::string("a/") + name));
    EXPECT_FALSE(a.empty()) << name;
    EXPECT_EQ(a, slurp(dir.file(std::string("b/") + name))) << name;
  }
  EXPECT_NE(slurp(dir.file("a/manifest.json")).find("2023-11-14T22:13:20Z"), std::string::npos);
}

TEST(CmdAugment, ShortfallWarningInManifest) {
  TempDir dir;
  // 30 sentences x 1 entity over {LOC, PER}: 15 of each, far below K=50.
  spit(dir.file("c.conll"), make_conll({"LOC", "PER"}, 30, 1).conll);
  const auto r = run_cli({"augment", "--in", dir.file("c.conll"), "--k", "50", "--perms", "all", "--out",
                          dir.file("out")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto manifest = json::parse(slurp(dir.file("out/manifest.json")));
  ASSERT_EQ(manifest.at("warnings").size(), 2u);
  EXPECT_NE(manifest.at("warnings")[0].get<std::string>().find("LOC"), std::string::npos);
  EXPECT_NE(manifest.at("warnings")[0].get<std::string>().find("insufficient corpus support"), std::string::npos);
  EXPECT_NE(r.err.find("warning"), std::string::npos);
  // Exhaustion takes every sentence: 30 x (2! + 1).
  EXPECT_EQ(jsonl(dir.file("out/train.jsonl")).size(), 90u);
}

TEST(CmdAugment, EnumerationAboveCapIsUsageError) {
  TempDir dir;
  spit(dir.file("c.conll"), make_conll({"A", "B", "C", "D", "E", "F", "G", "H"}, 10, 2).conll);
  const auto r = run_cli({"augment", "--in", dir.file("c.conll"), "--k", "1", "--out", dir.file("out")});
  EXPECT_EQ(r.code, cli::kExitUsage);
  EXPECT_NE(r.err.find("--perms"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir.file("out/train.jsonl")));
  EXPECT_EQ(run_cli({"augment", "--in", dir.file("c.conll"), "--k", "1", "--perms", "x", "--out", dir.file("o")}).code,
            cli::kExitUsage);
}

TEST(CmdAugment, InvalidCorpusIsValidationError) {
  TempDir dir;
  spit(dir.file("bad.jsonl"),
       R"({"id":"a","tokens":["x","y"],"entities":[{"start":0,"end":2,"type":"PER"},{"start":1,"end":2,"type":"LOC"}]})"
       "\n");
  const auto r = run_cli({"augment", "--in", dir.file("bad.jsonl"), "--format", "conll", "--k", "1", "--out",
                          dir.file("out")});
  EXPECT_EQ(r.code, cli::kExitValidation);
  spit(dir.file("labels.jsonl"),
       R"({"id":"a","tokens":["x","y"],"entities":[{"start":0,"end":1,"type":"P)ER"}]})"
       "\n");
  EXPECT_EQ(run_cli({"augment", "--in", dir.file("labels.jsonl"), "--format", "nested", "--k", "1", "--out",
                     dir.file("out")})
                .code,
            cli::kExitValidation);
}

TEST(CmdScore, PerfectPredictions) {
  TempDir dir;
  const auto g = make_conll(kFour, 12, 3);
  spit(dir.file("gold.conll"), g.conll);
  std::string preds;
  for (std::size_t i = 0; i < g.entities.size(); ++i) preds += prediction_line(i, flat_target(g.entities[i]));
  spit(dir.file("p.jsonl"), preds);
  const auto r = run_cli({"score", "--gold", dir.file("gold.conll"), "--pred", dir.file("p.jsonl")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("F1 100.00 ± 0.00 over 1 run(s)"), std::string::npos) << r.out;
}

TEST(CmdScore, ThreeRunsAggregate) {
  TempDir dir;
  const auto g = make_conll(kFour, 10, 2);
  spit(dir.file("gold.conll"), g.conll);
  // Run r keeps the first entity of the first (r + 1) * 3 sentences only.
  std::vector<std::string> args{"score", "--gold", dir.file("gold.conll"), "--out", dir.file("report.json")};
  std::vector<double> expected;
  for (std::size_t r = 0; r < 3; ++r) {
    std::string preds;
    std::size_t tp = 0;
    for (std::size_t i = 0; i < g.entities.size(); ++i) {
      if (i < (r + 1) * 3) {
        preds += prediction_line(i, flat_target({g.entities[i][0]}));
        ++tp;
      }
    }
    const std::string path = dir.file("run" + std::to_string(r) + ".jsonl");
    spit(path, preds);
    args.push_back("--pred");
    args.push_back(path);
    const double p = 1.0;
    const double rec = static_cast<double>(tp) / 20.0;
    expected.push_back(2 * p * rec / (p + rec));
  }
  const auto res = run_cli(args);
  ASSERT_EQ(res.code, 0) << res.err;
  const double mean = (expected[0] + expected[1] + expected[2]) / 3.0;
  double var = 0;
  for (double f : expected) var += (f - mean) * (f - mean);
  const double sd = std::sqrt(var / 3.0);

  const auto report = json::parse(slurp(dir.file("report.json")));
  EXPECT_NEAR(report.at("aggregate").at("mean_f1").get<double>(), mean, 1e-12);
  EXPECT_NEAR(report.at("aggregate").at("std_f1").get<double>(), sd, 1e-12);
  EXPECT_EQ(report.at("aggregate").at("std_estimator"), "population");
  EXPECT_EQ(report.at("runs").size(), 3u);
  std::ostringstream line;
  line << std::fixed << std::setprecision(2) << "F1 " << mean * 100 << " ± " << sd * 100;
  EXPECT_NE(res.out.find(line.str()), std::string::npos) << res.out;
}

TEST(CmdScore, MalformedLinesSalvaged) {
  TempDir dir;
  const auto g = make_conll(kFour, 3, 2);
  spit(dir.file("gold.conll"), g.conll);
  // s0 is truncated after its first tuple; s1 is clean; s2 is garbage.
  const std::string truncated = "[(" + g.entities[0][0].first + ", " + g.entities[0][0].second + "), (e0_";
  spit(dir.file("p.jsonl"), prediction_line(0, truncated) + prediction_line(1, flat_target(g.entities[1])) +
                                prediction_line(2, "no entities here"));
  const auto r = run_cli({"score", "--gold", dir.file("gold.conll"), "--pred", dir.file("p.jsonl"), "--out",
                          dir.file("report.json"), "--parse-report", dir.file("parse.jsonl")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto run = json::parse(slurp(dir.file("report.json"))).at("runs")[0];
  EXPECT_EQ(run.at("malformed_lines"), 2);
  EXPECT_EQ(run.at("malformed_segments"), 2);
  // 3 salvaged tuples are correct, 3 gold entities missed.
  EXPECT_EQ(run.at("micro").at("tp"), 3);
  EXPECT_EQ(run.at("micro").at("fp"), 0);
  EXPECT_EQ(run.at("micro").at("fn"), 3);
  const auto parsed = jsonl(dir.file("parse.jsonl"));
  ASSERT_EQ(parsed.size(), 3u);
  EXPECT_EQ(parsed[0].at("malformed_segments"), json::array({"(e0_"}));
  EXPECT_EQ(parsed[0].at("tuples").size(), 1u);
  EXPECT_EQ(parsed[1].at("clean"), true);
  EXPECT_EQ(parsed[1].at("example_id"), "s1:0");
}

TEST(CmdScore, GroundedMode) {
  TempDir dir;
  const auto g = make_conll({"PER"}, 1, 2);
  spit(dir.file("gold.conll"), g.conll);
  spit(dir.file("p.jsonl"), prediction_line(0, "[(e0_0, PER), (ghost, PER)]"));
  const auto r = run_cli({"score", "--gold", dir.file("gold.conll"), "--pred", dir.file("p.jsonl"), "--grounded",
                          "--out", dir.file("report.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto run = json::parse(slurp(dir.file("report.json"))).at("runs")[0];
  EXPECT_EQ(run.at("grounding_dropped"), 1);
  EXPECT_EQ(run.at("micro").at("tp"), 1);
  EXPECT_EQ(run.at("micro").at("fp"), 0);
  EXPECT_EQ(run.at("micro").at("fn"), 1);
}

TEST(CmdScore, UnknownIdsListed) {
  TempDir dir;
  const auto g = make_conll(kFour, 2, 1);
  spit(dir.file("gold.conll"), g.conll);
  spit(dir.file("p.jsonl"), prediction_line(0, "[]") + prediction_line(7, "[]") + prediction_line(9, "[]"));
  const auto r = run_cli({"score", "--gold", dir.file("gold.conll"), "--pred", dir.file("p.jsonl")});
  EXPECT_EQ(r.code, cli::kExitValidation);
  EXPECT_NE(r.err.find("s7 s9"), std::string::npos) << r.err;
}

TEST(CmdScore, OnlyPredictedRestrictsGold) {
  TempDir dir;
  const auto g = make_conll(kFour, 4, 1);
  spit(dir.file("gold.conll"), g.conll);
  spit(dir.file("p.jsonl"), prediction_line(1, flat_target(g.entities[1])));
  const auto r = run_cli({"score", "--gold", dir.file("gold.conll"), "--pred", dir.file("p.jsonl"),
                          "--only-predicted"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("F1 100.00"), std::string::npos);
}

json audit_json(const TempDir& dir, const std::string& train) {
  const auto r = run_cli({"audit", "--in", train, "--json", dir.file("audit.json")});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("stripped"), std::string::npos);
  return json::parse(slurp(dir.file("audit.json")));
}

TEST(CmdAudit, InstructedVersusStripped) {
  TempDir dir;
  spit(dir.file("c.conll"), make_conll(kFour, 20, 3).conll);
  ASSERT_EQ(run_cli({"augment", "--in", dir.file("c.conll"), "--k", "2", "--out", dir.file("out")}).code, 0);
  const auto j = audit_json(dir, dir.file("out/train.jsonl"));
  EXPECT_EQ(j.at("instructed").at("ambiguous_sources"), 0);
  EXPECT_EQ(j.at("instructed").at("max_fanout"), 1);
  EXPECT_GT(j.at("stripped").at("ambiguous_sources").get<int>(), 0);
}

TEST(CmdAudit, SingleInstructionFileIsUnambiguousBothWays) {
  TempDir dir;
  spit(dir.file("c.conll"), make_conll(kFour, 20, 3).conll);
  ASSERT_EQ(run_cli({"augment", "--in", dir.file("c.conll"), "--k", "2", "--perms", "0", "--out", dir.file("out")})
                .code,
            0);
  const auto j = audit_json(dir, dir.file("out/train.jsonl"));
  EXPECT_EQ(j.at("instructed").at("ambiguous_sources"), 0);
  EXPECT_EQ(j.at("stripped").at("ambiguous_sources"), 0);
}

TEST(CliExitCodes, Contract) {
  TempDir dir;
  EXPECT_EQ(run_cli({}).code, cli::kExitUsage);
  EXPECT_EQ(run_cli({"--help"}).code, cli::kExitOk);
  EXPECT_EQ(run_cli({"--version"}).code, cli::kExitOk);
  EXPECT_EQ(run_cli({"frobnicate"}).code, cli::kExitUsage);
  EXPECT_EQ(run_cli({"stats", "--in", dir.file("missing.conll")}).code, cli::kExitUsage);
  EXPECT_EQ(run_cli({"sample", "--in", dir.file("missing.conll")}).code, cli::kExitUsage);

  spit(dir.file("good.conll"), make_conll(kFour, 6, 2).conll);
  EXPECT_EQ(run_cli({"validate", "--in", dir.file("good.conll")}).code, cli::kExitOk);
  spit(dir.file("broken.conll"), "EU\tB-ORG\textra\n");
  EXPECT_EQ(run_cli({"validate", "--in", dir.file("broken.conll")}).code, cli::kExitValidation);
  spit(dir.file("overlap.jsonl"),
       R"({"id":"a","tokens":["x","y"],"entities":[{"start":0,"end":2,"type":"PER"},{"start":1,"end":2,"type":"LOC"}]})"
       "\n");
  // Overlap is fine for a nested corpus.
  EXPECT_EQ(run_cli({"validate", "--in", dir.file("overlap.jsonl"), "--format", "nested"}).code, cli::kExitOk);
}

TEST(CmdIngestSampleStats, EndToEnd) {
  TempDir dir;
  spit(dir.file("c.conll"), make_conll(kFour, 30, 2).conll);
  auto r = run_cli({"ingest", "--in", dir.file("c.conll"), "--out", dir.file("records.jsonl")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("sentences: 30"), std::string::npos);
  EXPECT_EQ(jsonl(dir.file("records.jsonl")).size(), 30u);

  r = run_cli({"sample", "--in", dir.file("records.jsonl"), "--format", "nested", "--k", "3", "--seed", "5", "--out",
               dir.file("split.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto split = json::parse(slurp(dir.file("split.json")));
  EXPECT_EQ(split.at("k"), 3);
  for (const auto& [label, n] : split.at("per_type_counts").items()) EXPECT_GE(n.get<int>(), 3) << label;

  r = run_cli({"stats", "--in", dir.file("c.conll")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("examples per sentence with --perms all: 25"), std::string::npos) << r.out;
}

// Shared fixture for the training harness: left-to-right sources for a
// 10-sentence corpus, built by plain string concatenation outside this code.
TEST(TemplateParity, LeftToRightSourcesMatchFixture) {
  const std::string fixtures = PODA_FIXTURE_DIR;
  std::ifstream corpus_in(fixtures + "/parity/corpus.conll");
  const auto ingest = parse_conll(corpus_in);
  ASSERT_EQ(ingest.corpus.sentences.size(), 10u);
  std::string rendered;
  for (const auto& s : ingest.corpus.sentences) rendered += render_source(s, OrderInstruction::left_to_right()) + "\n";
  EXPECT_EQ(rendered, slurp(fixtures + "/parity/expected_sources.txt"));

  // The augment output carries the same bytes.
  TempDir dir;
  ASSERT_EQ(run_cli({"augment", "--in", fixtures + "/parity/corpus.conll", "--k", "100", "--perms", "0", "--out",
                     dir.file("out")})
                .code,
            0);
  std::set<std::string> expected;
  std::istringstream lines(rendered);
  for (std::string line; std::getline(lines, line);) expected.insert(line);
  std::set<std::string> sources;
  for (const auto& j : jsonl(dir.file("out/train.jsonl"))) sources.insert(j.at("source").get<std::string>());
  std::set<std::string> with_entities;
  for (const auto& s : ingest.corpus.sentences) {
    if (!s.entities.empty()) with_entities.insert(render_source(s, OrderInstruction::left_to_right()));
  }
  EXPECT_EQ(sources, with_entities);
  for (const auto& s : sources) EXPECT_TRUE(expected.count(s)) << s;
}

}  // namespace
}  // namespace poda
