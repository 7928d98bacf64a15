#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "poda/corpus.hpp"

namespace poda {

struct FewShotConfig {
  std::size_t k = 1;
  std::uint64_t seed = 0;
  int split_index = 0;
};

/// One greedy pick: which label asked for it, and that label's count
/// immediately before the sentence was added.
struct SelectionStep {
  std::string label;
  std::string sentence_id;
  std::size_t count_before = 0;
};

struct FewShotSplit {
  std::vector<std::string> sentence_ids;
  std::map<std::string, std::size_t> per_type_counts;
  FewShotConfig config;
  std::vector<std::string> shortfalls;  // labels the corpus cannot supply K times
  std::vector<SelectionStep> trace;

  bool has_shortfall(const std::string& label) const;
};

/// Greedy K-shot sampling. Labels are visited by ascending corpus frequency
/// (ties by label). For each label, while its split count is below K, a
/// not-yet-selected sentence containing that label is drawn uniformly from
/// the remaining candidates (kept in corpus order); the drawn sentence adds
/// all of its entities to the counts. Throws std::invalid_argument on an
/// empty corpus or k == 0.
FewShotSplit sample_k_shot(const Corpus& corpus, const FewShotConfig& config);

/// Per-type table with counts and overshoot over K. Throws CorpusError if the
/// split names a sentence the corpus does not have.
std::string split_report(const FewShotSplit& split, const Corpus& corpus);

/// `{k, seed, split_index, sentence_ids, per_type_counts}`.
std::string split_to_json(const FewShotSplit& split);
FewShotSplit split_from_json(const std::string& text);

/// Restricts a corpus to the split's sentences, in split order.
Corpus select_sentences(const Corpus& corpus, const std::vector<std::string>& ids);

}  // namespace poda
