#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "poda/linearize.hpp"

namespace poda {

class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// (mention, type); scoring identity for generated entities.
using EntityKey = std::pair<std::string, std::string>;

/// Sentence id -> entity multiset (as a list; order is irrelevant).
using EntityTable = std::map<std::string, std::vector<EntityKey>>;

struct MatchCounts {
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;

  // Each is 0 when its denominator is 0.
  double precision() const;
  double recall() const;
  double f1() const;

  MatchCounts& operator+=(const MatchCounts& other);
  bool operator==(const MatchCounts&) const = default;
};

struct EvalReport {
  MatchCounts micro;
  std::map<std::string, MatchCounts> per_type;

  double precision() const { return micro.precision(); }
  double recall() const { return micro.recall(); }
  double f1() const { return micro.f1(); }
};

/// Multiset matching per sentence, pooled over sentences. Gold sentences with
/// no prediction count every gold entity as missed. Throws EvalError for a
/// prediction keyed by a sentence id absent from gold.
EvalReport score_micro(const EntityTable& predicted, const EntityTable& gold);

struct AggregateReport {
  double mean_f1 = 0.0;
  double std_f1 = 0.0;  // population (divide by n)
  std::vector<double> run_f1s;
};

AggregateReport aggregate_runs(std::span<const EvalReport> reports);

struct AmbiguityCounts {
  std::size_t total_sources = 0;
  std::size_t ambiguous_sources = 0;  // sources with more than one distinct target
  std::size_t max_fanout = 0;
};

/// Groups examples by source text and counts distinct targets per source.
/// With `strip_instructions` the rendered instruction prefix is removed first,
/// which is what an uninstructed mixture of re-ordered targets would see.
AmbiguityCounts ambiguity_report(std::span<const AugmentedExample> examples, bool strip_instructions);

/// Source text with its instruction prefix (and the following space) removed.
/// Returned unchanged when the prefix does not match.
std::string strip_instruction(const AugmentedExample& example);

/// Gold (mention, type) table for a set of sentences.
EntityTable gold_table(std::span<const Sentence> sentences);

/// Gold table keyed by token span instead of mention, for grounded scoring.
EntityTable gold_span_table(std::span<const Sentence> sentences);

/// `start:end` key used by grounded scoring.
std::string span_key(const Entity& entity);

}  // namespace poda
