#include "poda/cli.hpp"

#include <filesystem>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "json.hpp"
#include "poda/corpus.hpp"
#include "poda/delinearize.hpp"
#include "poda/eval.hpp"
#include "poda/io.hpp"
#include "poda/linearize.hpp"
#include "poda/ordering.hpp"
#include "poda/sampler.hpp"

namespace poda::cli {

namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

class ValidationFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UsageFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CorpusInput {
  std::string path;
  std::string format = "conll";
};

void add_corpus_options(CLI::App* cmd, CorpusInput& input, const std::string& flag = "--in") {
  cmd->add_option(flag, input.path, "Corpus file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--format", input.format, "conll (BIO lines) or nested (JSON records)")
      ->check(CLI::IsMember({"conll", "nested"}));
}

struct LoadedCorpus {
  Corpus corpus;
  RepairReport repairs;
  std::string bytes;
};

LoadedCorpus load_corpus(const CorpusInput& input) {
  LoadedCorpus loaded;
  loaded.bytes = read_file(input.path);
  std::istringstream in(loaded.bytes);
  try {
    if (input.format == "conll") {
      auto ingest = parse_conll(in);
      loaded.corpus = std::move(ingest.corpus);
      loaded.repairs = std::move(ingest.repairs);
    } else {
      loaded.corpus = parse_nested_records(in);
    }
  } catch (const CorpusError& e) {
    throw ValidationFailure(input.path + ": " + e.what());
  }
  return loaded;
}

std::string percent(double fraction) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(2) << fraction * 100.0;
  return ss.str();
}

ojson counts_json(const MatchCounts& c) {
  return {{"tp", c.true_positives},     {"fp", c.false_positives}, {"fn", c.false_negatives},
          {"precision", c.precision()}, {"recall", c.recall()},    {"f1", c.f1()}};
}

ojson validation_json(const ValidationReport& r) {
  ojson j;
  j["valid"] = r.valid;
  j["per_type_counts"] = ojson::object();
  for (const auto& [label, n] : r.per_type_counts) j["per_type_counts"][label] = n;
  j["overlaps"] = r.overlaps.size();
  j["empty_mentions"] = r.empty_mentions.size();
  j["malformed_entities"] = r.malformed_entities.size();
  j["reserved_labels"] = r.reserved_labels;
  j["duplicate_ids"] = r.duplicate_ids;
  return j;
}

// ---------------------------------------------------------------------------

int cmd_ingest(const CorpusInput& input, const std::string& out_path, std::ostream& out) {
  const auto loaded = load_corpus(input);
  std::size_t entities = 0;
  for (const auto& s : loaded.corpus.sentences) entities += s.entities.size();
  out << "sentences: " << loaded.corpus.sentences.size() << '\n'
      << "entities: " << entities << '\n'
      << "types: " << loaded.corpus.registry.size() << '\n'
      << "repaired I- tags: " << loaded.repairs.count << '\n';
  if (!out_path.empty()) {
    std::ostringstream records;
    write_nested_records(records, loaded.corpus);
    write_file_atomic(out_path, records.str());
    out << "wrote " << out_path << '\n';
  }
  return kExitOk;
}

int cmd_validate(const CorpusInput& input, const std::string& json_path, std::ostream& out) {
  const auto loaded = load_corpus(input);
  const auto report = validate_corpus(loaded.corpus);
  out << describe(report);
  if (loaded.repairs.count > 0) out << "repaired I- tags: " << loaded.repairs.count << '\n';
  if (!json_path.empty()) {
    auto j = validation_json(report);
    j["repaired_tags"] = loaded.repairs.count;
    write_file_atomic(json_path, j.dump(2) + "\n");
  }
  return report.valid ? kExitOk : kExitValidation;
}

int cmd_sample(const CorpusInput& input, const FewShotConfig& config, const std::string& out_path,
               std::ostream& out, std::ostream& err) {
  const auto loaded = load_corpus(input);
  if (loaded.corpus.sentences.empty()) throw ValidationFailure("corpus has no sentences");
  const auto split = sample_k_shot(loaded.corpus, config);
  out << split_report(split, loaded.corpus);
  for (const auto& label : split.shortfalls) {
    err << "warning: type " << label << " has fewer than K=" << config.k << " entities in the corpus\n";
  }
  if (!out_path.empty()) write_file_atomic(out_path, split_to_json(split));
  return kExitOk;
}

struct AugmentOptions {
  CorpusInput input;
  FewShotConfig config;
  std::string perms = "all";
  std::optional<std::uint64_t> perm_seed;
  std::size_t cap = kDefaultEnumerationCap;
  std::string out_dir;
};

int cmd_augment(const AugmentOptions& opt, std::ostream& out, std::ostream& err) {
  const auto loaded = load_corpus(opt.input);
  const auto& corpus = loaded.corpus;
  const auto validation = validate_corpus(corpus);
  if (!validation.valid) {
    err << describe(validation);
    return kExitValidation;
  }
  if (corpus.sentences.empty()) throw ValidationFailure("corpus has no sentences");

  std::vector<OrderInstruction> instructions{OrderInstruction::left_to_right()};
  const std::uint64_t perm_seed = opt.perm_seed.value_or(opt.config.seed);
  try {
    std::vector<TypePermutation> perms;
    if (opt.perms == "all") {
      perms = enumerate_type_permutations(corpus.registry, opt.cap);
    } else {
      std::size_t n = 0;
      try {
        std::size_t used = 0;
        n = std::stoul(opt.perms, &used);
        if (used != opt.perms.size()) throw std::invalid_argument(opt.perms);
      } catch (const std::logic_error&) {
        throw UsageFailure("--perms expects 'all' or a count, got '" + opt.perms + "'");
      }
      if (n > 0) perms = sample_type_permutations(corpus.registry, n, perm_seed);
    }
    for (auto& p : perms) instructions.push_back(OrderInstruction::type_order(std::move(p)));
  } catch (const OrderingError& e) {
    throw UsageFailure(std::string("--perms ") + opt.perms + ": " + e.what());
  }

  const auto split = sample_k_shot(corpus, opt.config);
  const auto subset = select_sentences(corpus, split.sentence_ids);
  const auto examples = build_training_set(subset.sentences, corpus.registry, instructions);

  std::string train;
  for (const auto& ex : examples) {
    train += example_to_json(ex);
    train += '\n';
  }
  const std::string split_json = split_to_json(split);

  const fs::path dir(opt.out_dir);
  fs::create_directories(dir);
  write_file_atomic(dir / "train.jsonl", train);
  write_file_atomic(dir / "split.json", split_json);

  RunManifest manifest;
  manifest.tool_version = kToolVersion;
  manifest.command = "augment";
  manifest.created_at = timestamp_utc();
  manifest.inputs.push_back({opt.input.path, sha256_hex(loaded.bytes)});
  manifest.outputs.push_back({"train.jsonl", sha256_hex(train)});
  manifest.outputs.push_back({"split.json", sha256_hex(split_json)});

  ojson config;
  config["format"] = opt.input.format;
  config["k"] = opt.config.k;
  config["seed"] = opt.config.seed;
  config["split_index"] = opt.config.split_index;
  config["perms"] = opt.perms;
  config["perm_seed"] = perm_seed;
  config["enumeration_cap"] = opt.cap;
  config["instruction_template"] = kInstructionTemplateId;
  config["instructions"] = instructions.size();
  config["sentences"] = subset.sentences.size();
  config["examples"] = examples.size();
  manifest.config_json = config.dump();

  for (const auto& label : split.shortfalls) {
    manifest.warnings.push_back("type " + label + ": " + std::to_string(split.per_type_counts.at(label)) +
                                " entities available, fewer than K=" + std::to_string(opt.config.k) +
                                " (insufficient corpus support)");
  }
  if (loaded.repairs.count > 0) {
    manifest.warnings.push_back("repaired " + std::to_string(loaded.repairs.count) + " dangling I- tags");
  }
  write_file_atomic(dir / "manifest.json", manifest.to_json());

  out << "sentences: " << subset.sentences.size() << '\n'
      << "instructions: " << instructions.size() << '\n'
      << "examples: " << examples.size() << '\n';
  for (const auto& w : manifest.warnings) err << "warning: " << w << '\n';
  return kExitOk;
}

struct ScoreOptions {
  CorpusInput gold;
  std::vector<std::string> predictions;
  bool only_predicted = false;
  bool grounded = false;
  std::string out_path;
  std::string parse_report_path;
};

struct RunStats {
  std::size_t lines = 0;
  std::size_t malformed_lines = 0;
  std::size_t malformed_segments = 0;
  std::size_t grounding_dropped = 0;
};

void print_counts_row(std::ostream& out, const std::string& name, const MatchCounts& c) {
  out << std::left << std::setw(20) << name << std::right << std::setw(7) << c.true_positives
      << std::setw(7) << c.false_positives << std::setw(7) << c.false_negatives << std::setw(9)
      << percent(c.precision()) << std::setw(9) << percent(c.recall()) << std::setw(9) << percent(c.f1())
      << '\n';
}

void print_counts_header(std::ostream& out, const std::string& first) {
  out << std::left << std::setw(20) << first << std::right << std::setw(7) << "tp" << std::setw(7) << "fp"
      << std::setw(7) << "fn" << std::setw(9) << "P" << std::setw(9) << "R" << std::setw(9) << "F1" << '\n';
}

int cmd_score(const ScoreOptions& opt, std::ostream& out) {
  const auto loaded = load_corpus(opt.gold);
  const auto& corpus = loaded.corpus;

  std::vector<EvalReport> reports;
  ojson runs = ojson::array();
  std::string parse_report;
  for (const auto& path : opt.predictions) {
    RunStats stats;
    EntityTable predicted;
    std::vector<std::string> unknown;
    const auto lines = read_lines(path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
      const std::string where = path + ":" + std::to_string(i + 1);
      nlohmann::json j;
      std::string sentence_id;
      std::string example_id;
      std::string generated;
      try {
        j = nlohmann::json::parse(lines[i]);
        sentence_id = j.at("sentence_id").get<std::string>();
        if (j.contains("example_id") && !j.at("example_id").is_null()) {
          example_id = j.at("example_id").get<std::string>();
        }
        if (j.contains("generated") && !j.at("generated").is_null()) {
          generated = j.at("generated").get<std::string>();
        }
      } catch (const nlohmann::json::exception& e) {
        throw ValidationFailure(where + ": bad prediction record: " + e.what());
      }
      ++stats.lines;
      const Sentence* sentence = corpus.find(sentence_id);
      if (sentence == nullptr) {
        unknown.push_back(sentence_id);
        continue;
      }
      if (predicted.count(sentence_id)) {
        throw ValidationFailure(where + ": second prediction for sentence " + sentence_id);
      }

      const auto outcome = parse_target(generated, corpus.registry);
      if (!outcome.clean) {
        ++stats.malformed_lines;
        stats.malformed_segments += outcome.malformed_segments.size();
      }
      auto& keys = predicted[sentence_id];
      std::size_t dropped = 0;
      if (opt.grounded) {
        const auto grounding = ground_mentions(outcome.tuples, *sentence);
        dropped = grounding.dropped;
        stats.grounding_dropped += grounding.dropped;
        for (const auto& e : grounding.entities) keys.emplace_back(span_key(e), e.etype);
      } else {
        for (const auto& t : outcome.tuples) keys.emplace_back(t.mention, t.etype);
      }

      if (!opt.parse_report_path.empty()) {
        ojson line;
        line["predictions"] = path;
        line["line"] = i + 1;
        line["example_id"] = example_id;
        line["sentence_id"] = sentence_id;
        line["tuples"] = ojson::array();
        for (const auto& t : outcome.tuples) {
          ojson tuple{{"mention", t.mention}, {"etype", t.etype}};
          tuple["group_index"] = t.group_index ? ojson(*t.group_index) : ojson(nullptr);
          line["tuples"].push_back(std::move(tuple));
        }
        line["malformed_segments"] = outcome.malformed_segments;
        line["clean"] = outcome.clean;
        line["dropped"] = dropped;
        parse_report += line.dump();
        parse_report += '\n';
      }
    }
    if (!unknown.empty()) {
      std::string msg = path + ": predictions for sentence ids not in gold:";
      for (const auto& id : unknown) msg += " " + id;
      throw ValidationFailure(msg);
    }

    std::vector<Sentence> gold_sentences;
    for (const auto& s : corpus.sentences) {
      if (!opt.only_predicted || predicted.count(s.id)) gold_sentences.push_back(s);
    }
    const auto gold = opt.grounded ? gold_span_table(gold_sentences) : gold_table(gold_sentences);
    auto report = score_micro(predicted, gold);

    out << "== " << path << " (" << stats.lines << " predictions, " << stats.malformed_lines
        << " malformed, " << stats.malformed_segments << " salvaged segments";
    if (opt.grounded) out << ", " << stats.grounding_dropped << " ungrounded";
    out << ")\n";
    print_counts_header(out, "type");
    for (const auto& [label, c] : report.per_type) print_counts_row(out, label, c);
    print_counts_row(out, "micro", report.micro);

    ojson run;
    run["predictions"] = path;
    run["sha256"] = sha256_hex(read_file(path));
    run["lines"] = stats.lines;
    run["malformed_lines"] = stats.malformed_lines;
    run["malformed_segments"] = stats.malformed_segments;
    if (opt.grounded) run["grounding_dropped"] = stats.grounding_dropped;
    run["micro"] = counts_json(report.micro);
    run["per_type"] = ojson::object();
    for (const auto& [label, c] : report.per_type) run["per_type"][label] = counts_json(c);
    runs.push_back(std::move(run));
    reports.push_back(std::move(report));
  }

  if (!opt.parse_report_path.empty()) write_file_atomic(opt.parse_report_path, parse_report);

  const auto agg = aggregate_runs(reports);
  out << "F1 " << percent(agg.mean_f1) << " ± " << percent(agg.std_f1) << " over " << reports.size()
      << " run(s)\n";

  if (!opt.out_path.empty()) {
    ojson j;
    j["gold"] = {{"path", opt.gold.path}, {"sha256", sha256_hex(loaded.bytes)}};
    j["matching"] = opt.grounded ? "span" : "mention";
    j["runs"] = std::move(runs);
    j["aggregate"] = {{"mean_f1", agg.mean_f1},
                      {"std_f1", agg.std_f1},
                      {"run_f1s", agg.run_f1s},
                      {"std_estimator", "population"}};
    write_file_atomic(opt.out_path, j.dump(2) + "\n");
  }
  return kExitOk;
}

int cmd_audit(const std::string& path, const std::string& json_path, std::ostream& out) {
  std::vector<AugmentedExample> examples;
  const auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    try {
      examples.push_back(example_from_json(lines[i]));
    } catch (const std::exception& e) {
      throw ValidationFailure(path + ":" + std::to_string(i + 1) + ": " + e.what());
    }
  }
  const auto instructed = ambiguity_report(examples, false);
  const auto stripped = ambiguity_report(examples, true);

  auto row = [&](const std::string& name, const AmbiguityCounts& c) {
    out << std::left << std::setw(14) << name << std::right << std::setw(10) << c.total_sources
        << std::setw(12) << c.ambiguous_sources << std::setw(12) << c.max_fanout << '\n';
  };
  out << "examples: " << examples.size() << '\n';
  out << std::left << std::setw(14) << "sources" << std::right << std::setw(10) << "total" << std::setw(12)
      << "ambiguous" << std::setw(12) << "max_fanout" << '\n';
  row("instructed", instructed);
  row("stripped", stripped);

  if (!json_path.empty()) {
    auto counts = [](const AmbiguityCounts& c) {
      return ojson{{"total_sources", c.total_sources},
                   {"ambiguous_sources", c.ambiguous_sources},
                   {"max_fanout", c.max_fanout}};
    };
    ojson j;
    j["examples"] = examples.size();
    j["instructed"] = counts(instructed);
    j["stripped"] = counts(stripped);
    write_file_atomic(json_path, j.dump(2) + "\n");
  }
  return kExitOk;
}

int cmd_stats(const CorpusInput& input, std::size_t cap, std::ostream& out) {
  const auto loaded = load_corpus(input);
  const auto& corpus = loaded.corpus;
  std::size_t tokens = 0;
  std::size_t entities = 0;
  std::size_t with_entities = 0;
  std::map<std::string, std::size_t> per_type;
  for (const auto& s : corpus.sentences) {
    tokens += s.tokens.size();
    entities += s.entities.size();
    if (!s.entities.empty()) ++with_entities;
    for (const auto& e : s.entities) ++per_type[e.etype];
  }
  out << "kind: " << to_string(corpus.kind) << '\n'
      << "sentences: " << corpus.sentences.size() << " (" << with_entities << " with entities)\n"
      << "tokens: " << tokens << '\n'
      << "entities: " << entities << '\n'
      << "types: " << corpus.registry.size() << '\n';
  for (const auto& [label, n] : per_type) out << "  " << label << '\t' << n << '\n';
  if (!corpus.registry.empty()) {
    const auto total = factorial_saturated(corpus.registry.size());
    if (total <= cap) {
      out << "permutations: " << total << '\n'
          << "examples per sentence with --perms all: " << total + 1 << '\n';
    } else {
      out << "permutations: above enumeration cap " << cap << "; use --perms N\n";
    }
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Prompt-ordered data augmentation for generative NER"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  CorpusInput input;
  std::string out_path;
  std::string json_path;

  auto* ingest = app.add_subcommand("ingest", "Parse a corpus and write normalized JSON records");
  add_corpus_options(ingest, input);
  ingest->add_option("--out", out_path, "Records output (JSONL)");

  auto* validate = app.add_subcommand("validate", "Check corpus invariants");
  add_corpus_options(validate, input);
  validate->add_option("--json", json_path, "Write the report as JSON");

  FewShotConfig config;
  auto* sample = app.add_subcommand("sample", "Draw a greedy K-shot split");
  add_corpus_options(sample, input);
  sample->add_option("--k", config.k, "Entities per type")->required()->check(CLI::PositiveNumber);
  sample->add_option("--seed", config.seed, "Sampling seed");
  sample->add_option("--split-index", config.split_index, "Provenance tag for the split");
  sample->add_option("--out", out_path, "Split output (JSON)");

  AugmentOptions augment_opt;
  auto* augment = app.add_subcommand("augment", "Sample, permute and write the augmented training set");
  add_corpus_options(augment, augment_opt.input);
  augment->add_option("--k", augment_opt.config.k, "Entities per type")->required()->check(CLI::PositiveNumber);
  augment->add_option("--seed", augment_opt.config.seed, "Sampling seed");
  augment->add_option("--split-index", augment_opt.config.split_index, "Provenance tag for the split");
  augment->add_option("--perms", augment_opt.perms, "'all' or a number of sampled type orders");
  augment->add_option("--perm-seed", augment_opt.perm_seed, "Seed for sampled type orders (default: --seed)");
  augment->add_option("--cap", augment_opt.cap, "Largest l! that --perms all may enumerate");
  augment->add_option("--out", augment_opt.out_dir, "Output directory")->required();

  ScoreOptions score_opt;
  auto* score = app.add_subcommand("score", "Score prediction files against gold");
  add_corpus_options(score, score_opt.gold, "--gold");
  score->add_option("--pred", score_opt.predictions, "Prediction JSONL, one file per run")
      ->required()
      ->check(CLI::ExistingFile);
  score->add_flag("--only-predicted", score_opt.only_predicted, "Restrict gold to predicted sentence ids");
  score->add_flag("--grounded", score_opt.grounded, "Match on grounded token spans instead of mention text");
  score->add_option("--out", score_opt.out_path, "Write the report as JSON");
  score->add_option("--parse-report", score_opt.parse_report_path, "Write per-line parse outcomes as JSONL");

  std::string audit_path;
  auto* audit = app.add_subcommand("audit", "Count sources mapped to more than one target");
  audit->add_option("--in", audit_path, "Augmented train.jsonl")->required()->check(CLI::ExistingFile);
  audit->add_option("--json", json_path, "Write the counts as JSON");

  std::size_t stats_cap = kDefaultEnumerationCap;
  auto* stats = app.add_subcommand("stats", "Corpus statistics");
  add_corpus_options(stats, input);
  stats->add_option("--cap", stats_cap, "Enumeration cap used for the permutation count");

  std::vector<std::string> argv_storage{"poda"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_storage) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*ingest) return cmd_ingest(input, out_path, out);
    if (*validate) return cmd_validate(input, json_path, out);
    if (*sample) return cmd_sample(input, config, out_path, out, err);
    if (*augment) return cmd_augment(augment_opt, out, err);
    if (*score) return cmd_score(score_opt, out);
    if (*audit) return cmd_audit(audit_path, json_path, out);
    if (*stats) return cmd_stats(input, stats_cap, out);
  } catch (const UsageFailure& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitUsage;
}

}  // namespace poda::cli
