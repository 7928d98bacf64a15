#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace poda {

// Characters with structural meaning in rendered target sequences.
inline constexpr std::string_view kReservedLabelChars = "()[],";

class CorpusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Ordered set of entity-type labels. Labels are unique and non-empty;
/// reserved characters are reported by validate_corpus rather than rejected
/// here so that a bad release can still be inspected.
class TypeRegistry {
 public:
  TypeRegistry() = default;
  explicit TypeRegistry(std::vector<std::string> labels);

  /// Builds a registry from labels in any order; result is sorted.
  static TypeRegistry sorted(std::vector<std::string> labels);

  const std::vector<std::string>& labels() const { return labels_; }
  std::size_t size() const { return labels_.size(); }
  bool empty() const { return labels_.empty(); }
  bool contains(std::string_view label) const;
  std::optional<std::size_t> index_of(std::string_view label) const;

  /// Labels containing any of `( ) [ ] ,`.
  std::vector<std::string> reserved_violations() const;

  bool operator==(const TypeRegistry&) const = default;

 private:
  std::vector<std::string> labels_;
};

struct Entity {
  std::size_t start = 0;  // inclusive token index
  std::size_t end = 0;    // exclusive token index
  std::string mention;
  std::string etype;

  bool operator==(const Entity&) const = default;
};

/// Space-joins tokens[start, end).
std::string join_tokens(const std::vector<std::string>& tokens, std::size_t start, std::size_t end);

/// Builds an entity whose mention is derived from the token slice.
/// Throws CorpusError when the span is empty or out of bounds.
Entity make_entity(const std::vector<std::string>& tokens, std::size_t start, std::size_t end,
                   std::string etype);

struct Sentence {
  std::string id;
  std::vector<std::string> tokens;
  std::vector<Entity> entities;  // sorted by (start, end)

  bool operator==(const Sentence&) const = default;
};

/// Stable sort of entities into left-to-right order.
void sort_left_to_right(std::vector<Entity>& entities);

enum class CorpusKind { kFlat, kNested };

std::string_view to_string(CorpusKind kind);
CorpusKind corpus_kind_from_string(std::string_view text);

struct Corpus {
  std::vector<Sentence> sentences;
  TypeRegistry registry;
  CorpusKind kind = CorpusKind::kFlat;

  const Sentence* find(std::string_view id) const;

  bool operator==(const Corpus&) const = default;
};

struct RepairReport {
  std::size_t count = 0;
  std::vector<std::size_t> lines;  // 1-based line numbers of repaired I- tags
};

struct ConllIngest {
  Corpus corpus;
  RepairReport repairs;
};

/// Reads `token tag` lines in BIO encoding. Dangling I-X tags are repaired
/// to B-X and recorded. `-DOCSTART-` lines are skipped.
ConllIngest parse_conll(std::istream& in);

/// Writes a flat corpus as BIO lines, one blank line after every sentence.
void write_conll(std::ostream& out, const Corpus& corpus);

/// Reads one JSON record per line: {id, tokens, entities: [{start, end, type}]}.
Corpus parse_nested_records(std::istream& in);

/// Writes a corpus as records readable by parse_nested_records.
void write_nested_records(std::ostream& out, const Corpus& corpus);

struct OverlapViolation {
  std::string sentence_id;
  Entity first;
  Entity second;
};

struct EntityIssue {
  std::string sentence_id;
  Entity entity;
  std::string reason;
};

struct ValidationReport {
  std::map<std::string, std::size_t> per_type_counts;
  std::vector<OverlapViolation> overlaps;
  std::vector<EntityIssue> empty_mentions;
  std::vector<EntityIssue> malformed_entities;  // bad span, drifted mention, unknown type
  std::vector<std::string> reserved_labels;
  std::vector<std::string> duplicate_ids;
  std::vector<std::string> unsorted_sentences;
  bool valid = true;
};

ValidationReport validate_corpus(const Corpus& corpus);

/// Multi-line human readable rendering of a validation report.
std::string describe(const ValidationReport& report);

}  // namespace poda
