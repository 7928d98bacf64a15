#include "poda/corpus.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "json.hpp"

namespace poda {

namespace {

std::string line_error(std::size_t line_no, const std::string& what) {
  return "line " + std::to_string(line_no) + ": " + what;
}

std::vector<std::string> split_whitespace(const std::string& line) {
  std::vector<std::string> fields;
  std::istringstream ss(line);
  std::string field;
  while (ss >> field) fields.push_back(std::move(field));
  return fields;
}

bool has_reserved_char(std::string_view label) {
  return label.find_first_of(kReservedLabelChars) != std::string_view::npos;
}

}  // namespace

TypeRegistry::TypeRegistry(std::vector<std::string> labels) : labels_(std::move(labels)) {
  std::unordered_set<std::string> seen;
  for (const auto& label : labels_) {
    if (label.empty()) throw CorpusError("type registry: empty label");
    if (!seen.insert(label).second) throw CorpusError("type registry: duplicate label '" + label + "'");
  }
}

TypeRegistry TypeRegistry::sorted(std::vector<std::string> labels) {
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  return TypeRegistry(std::move(labels));
}

bool TypeRegistry::contains(std::string_view label) const { return index_of(label).has_value(); }

std::optional<std::size_t> TypeRegistry::index_of(std::string_view label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - labels_.begin());
}

std::vector<std::string> TypeRegistry::reserved_violations() const {
  std::vector<std::string> out;
  for (const auto& label : labels_) {
    if (has_reserved_char(label)) out.push_back(label);
  }
  return out;
}

std::string join_tokens(const std::vector<std::string>& tokens, std::size_t start, std::size_t end) {
  std::string out;
  for (std::size_t i = start; i < end && i < tokens.size(); ++i) {
    if (i > start) out += ' ';
    out += tokens[i];
  }
  return out;
}

Entity make_entity(const std::vector<std::string>& tokens, std::size_t start, std::size_t end,
                   std::string etype) {
  if (start >= end || end > tokens.size()) {
    throw CorpusError("entity span [" + std::to_string(start) + ", " + std::to_string(end) +
                      ") invalid for " + std::to_string(tokens.size()) + " tokens");
  }
  return Entity{start, end, join_tokens(tokens, start, end), std::move(etype)};
}

void sort_left_to_right(std::vector<Entity>& entities) {
  std::stable_sort(entities.begin(), entities.end(), [](const Entity& a, const Entity& b) {
    return a.start != b.start ? a.start < b.start : a.end < b.end;
  });
}

std::string_view to_string(CorpusKind kind) { return kind == CorpusKind::kFlat ? "flat" : "nested"; }

CorpusKind corpus_kind_from_string(std::string_view text) {
  if (text == "flat") return CorpusKind::kFlat;
  if (text == "nested") return CorpusKind::kNested;
  throw CorpusError("unknown corpus kind '" + std::string(text) + "'");
}

const Sentence* Corpus::find(std::string_view id) const {
  for (const auto& s : sentences) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------
// CoNLL / BIO

ConllIngest parse_conll(std::istream& in) {
  ConllIngest result;
  result.corpus.kind = CorpusKind::kFlat;
  std::set<std::string> types;

  Sentence current;
  std::optional<std::size_t> open_start;
  std::string open_type;

  auto close_entity = [&](std::size_t end) {
    if (open_start) {
      current.entities.push_back(make_entity(current.tokens, *open_start, end, open_type));
      types.insert(open_type);
      open_start.reset();
    }
  };
  auto flush_sentence = [&] {
    close_entity(current.tokens.size());
    if (!current.tokens.empty()) {
      current.id = "s" + std::to_string(result.corpus.sentences.size());
      result.corpus.sentences.push_back(std::move(current));
    }
    current = Sentence{};
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto fields = split_whitespace(line);
    if (fields.empty()) {
      flush_sentence();
      continue;
    }
    if (fields.front() == "-DOCSTART-") continue;
    if (fields.size() != 2) {
      throw CorpusError(line_error(line_no, "expected 2 fields (token tag), got " +
                                                std::to_string(fields.size())));
    }
    const std::string& tag = fields[1];
    const std::size_t index = current.tokens.size();
    current.tokens.push_back(fields[0]);

    if (tag == "O") {
      close_entity(index);
      continue;
    }
    if (tag.size() < 3 || tag[1] != '-' || (tag[0] != 'B' && tag[0] != 'I')) {
      throw CorpusError(line_error(line_no, "unknown tag '" + tag + "'"));
    }
    std::string type = tag.substr(2);
    if (tag[0] == 'I' && open_start && open_type == type) continue;
    if (tag[0] == 'I') {
      ++result.repairs.count;
      result.repairs.lines.push_back(line_no);
    }
    close_entity(index);
    open_start = index;
    open_type = std::move(type);
  }
  flush_sentence();

  result.corpus.registry = TypeRegistry(std::vector<std::string>(types.begin(), types.end()));
  return result;
}

void write_conll(std::ostream& out, const Corpus& corpus) {
  for (const auto& sentence : corpus.sentences) {
    if (sentence.tokens.empty()) throw CorpusError("sentence " + sentence.id + " has no tokens");
    std::vector<std::string> tags(sentence.tokens.size(), "O");
    for (const auto& e : sentence.entities) {
      for (std::size_t i = e.start; i < e.end; ++i) {
        if (tags[i] != "O") {
          throw CorpusError("sentence " + sentence.id + ": overlapping spans cannot be written as BIO");
        }
        tags[i] = (i == e.start ? "B-" : "I-") + e.etype;
      }
    }
    for (std::size_t i = 0; i < sentence.tokens.size(); ++i) {
      out << sentence.tokens[i] << '\t' << tags[i] << '\n';
    }
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Nested records

Corpus parse_nested_records(std::istream& in) {
  using nlohmann::json;
  Corpus corpus;
  corpus.kind = CorpusKind::kNested;
  std::set<std::string> types;
  std::unordered_set<std::string> ids;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;

    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw CorpusError(line_error(line_no, std::string("invalid JSON: ") + e.what()));
    }
    if (!record.is_object() || !record.contains("id") || !record.contains("tokens") ||
        !record.contains("entities")) {
      throw CorpusError(line_error(line_no, "record needs fields id, tokens, entities"));
    }

    Sentence sentence;
    try {
      sentence.id = record.at("id").is_string() ? record.at("id").get<std::string>()
                                                : record.at("id").dump();
      sentence.tokens = record.at("tokens").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
      throw CorpusError(line_error(line_no, std::string("bad record: ") + e.what()));
    }
    if (!ids.insert(sentence.id).second) {
      throw CorpusError(line_error(line_no, "duplicate record id '" + sentence.id + "'"));
    }

    const std::string where = "record '" + sentence.id + "'";
    for (const auto& ent : record.at("entities")) {
      std::size_t start = 0;
      std::size_t end = 0;
      std::string type;
      try {
        start = ent.at("start").get<std::size_t>();
        end = ent.at("end").get<std::size_t>();
        type = ent.at("type").get<std::string>();
      } catch (const json::exception& e) {
        throw CorpusError(where + ": bad entity: " + e.what());
      }
      if (start >= end || end > sentence.tokens.size()) {
        throw CorpusError(where + ": entity span [" + std::to_string(start) + ", " +
                          std::to_string(end) + ") out of bounds for " +
                          std::to_string(sentence.tokens.size()) + " tokens");
      }
      if (type.empty()) throw CorpusError(where + ": entity with empty type");
      for (const auto& prior : sentence.entities) {
        if (prior.start == start && prior.end == end && prior.etype == type) {
          throw CorpusError(where + ": duplicate entity [" + std::to_string(start) + ", " +
                            std::to_string(end) + ") " + type);
        }
      }
      sentence.entities.push_back(make_entity(sentence.tokens, start, end, type));
      types.insert(type);
    }
    sort_left_to_right(sentence.entities);
    corpus.sentences.push_back(std::move(sentence));
  }

  corpus.registry = TypeRegistry(std::vector<std::string>(types.begin(), types.end()));
  return corpus;
}

void write_nested_records(std::ostream& out, const Corpus& corpus) {
  using nlohmann::json;
  for (const auto& sentence : corpus.sentences) {
    json entities = json::array();
    for (const auto& e : sentence.entities) {
      entities.push_back({{"start", e.start}, {"end", e.end}, {"type", e.etype}});
    }
    json record = {{"id", sentence.id}, {"tokens", sentence.tokens}, {"entities", entities}};
    out << record.dump() << '\n';
  }
}

// ---------------------------------------------------------------------------
// Validation

ValidationReport validate_corpus(const Corpus& corpus) {
  ValidationReport report;
  for (const auto& label : corpus.registry.labels()) report.per_type_counts[label] = 0;
  report.reserved_labels = corpus.registry.reserved_violations();

  std::unordered_set<std::string> ids;
  for (const auto& sentence : corpus.sentences) {
    if (!ids.insert(sentence.id).second) report.duplicate_ids.push_back(sentence.id);

    auto sorted = sentence.entities;
    sort_left_to_right(sorted);
    if (sorted != sentence.entities) report.unsorted_sentences.push_back(sentence.id);

    for (const auto& e : sentence.entities) {
      ++report.per_type_counts[e.etype];
      if (e.mention.empty()) {
        report.empty_mentions.push_back({sentence.id, e, "empty mention"});
      }
      if (e.start >= e.end || e.end > sentence.tokens.size()) {
        report.malformed_entities.push_back({sentence.id, e, "span out of bounds"});
      } else if (e.mention != join_tokens(sentence.tokens, e.start, e.end)) {
        report.malformed_entities.push_back({sentence.id, e, "mention differs from token slice"});
      }
      if (!corpus.registry.contains(e.etype)) {
        report.malformed_entities.push_back({sentence.id, e, "type not in registry"});
      }
    }

    for (std::size_t i = 0; i < sentence.entities.size(); ++i) {
      for (std::size_t j = i + 1; j < sentence.entities.size(); ++j) {
        const auto& a = sentence.entities[i];
        const auto& b = sentence.entities[j];
        const bool overlap = a.start < b.end && b.start < a.end;
        if (corpus.kind == CorpusKind::kFlat && overlap) {
          report.overlaps.push_back({sentence.id, a, b});
        } else if (a.start == b.start && a.end == b.end && a.etype == b.etype) {
          report.malformed_entities.push_back({sentence.id, b, "duplicate entity"});
        }
      }
    }
  }

  report.valid = report.overlaps.empty() && report.empty_mentions.empty() &&
                 report.malformed_entities.empty() && report.reserved_labels.empty() &&
                 report.duplicate_ids.empty() && report.unsorted_sentences.empty();
  return report;
}

std::string describe(const ValidationReport& report) {
  std::ostringstream out;
  out << "valid: " << (report.valid ? "yes" : "no") << '\n';
  out << "entities per type:\n";
  for (const auto& [label, count] : report.per_type_counts) {
    out << "  " << label << '\t' << count << '\n';
  }
  auto span = [](const Entity& e) {
    return "[" + std::to_string(e.start) + ", " + std::to_string(e.end) + ") " + e.etype;
  };
  for (const auto& v : report.overlaps) {
    out << "overlap in " << v.sentence_id << ": " << span(v.first) << " / " << span(v.second) << '\n';
  }
  for (const auto& v : report.empty_mentions) {
    out << "empty mention in " << v.sentence_id << ": " << span(v.entity) << '\n';
  }
  for (const auto& v : report.malformed_entities) {
    out << v.reason << " in " << v.sentence_id << ": " << span(v.entity) << '\n';
  }
  for (const auto& label : report.reserved_labels) {
    out << "reserved character in label '" << label << "'\n";
  }
  for (const auto& id : report.duplicate_ids) out << "duplicate sentence id " << id << '\n';
  for (const auto& id : report.unsorted_sentences) {
    out << "entities not in left-to-right order in " << id << '\n';
  }
  return out.str();
}

}  // namespace poda
