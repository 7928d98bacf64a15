#include "poda/sampler.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "json.hpp"
#include "poda/rng.hpp"

namespace poda {

bool FewShotSplit::has_shortfall(const std::string& label) const {
  return std::find(shortfalls.begin(), shortfalls.end(), label) != shortfalls.end();
}

FewShotSplit sample_k_shot(const Corpus& corpus, const FewShotConfig& config) {
  if (corpus.sentences.empty()) throw std::invalid_argument("sample_k_shot: empty corpus");
  if (config.k == 0) throw std::invalid_argument("sample_k_shot: k must be at least 1");

  std::map<std::string, std::size_t> totals;
  for (const auto& s : corpus.sentences) {
    for (const auto& e : s.entities) ++totals[e.etype];
  }
  std::vector<std::string> labels;
  for (const auto& [label, count] : totals) labels.push_back(label);
  std::stable_sort(labels.begin(), labels.end(),
                   [&](const std::string& a, const std::string& b) { return totals[a] < totals[b]; });

  FewShotSplit split;
  split.config = config;
  for (const auto& label : labels) split.per_type_counts[label] = 0;

  Xoshiro256 rng(config.seed);
  std::vector<bool> selected(corpus.sentences.size(), false);

  for (const auto& label : labels) {
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < corpus.sentences.size(); ++i) {
      if (selected[i]) continue;
      const auto& ents = corpus.sentences[i].entities;
      if (std::any_of(ents.begin(), ents.end(), [&](const Entity& e) { return e.etype == label; })) {
        candidates.push_back(i);
      }
    }

    while (split.per_type_counts[label] < config.k && !candidates.empty()) {
      const auto pick = static_cast<std::size_t>(rng.bounded(candidates.size()));
      const std::size_t index = candidates[pick];
      candidates.erase(candidates.begin() + static_cast<std::ptrdiff_t>(pick));

      const auto& sentence = corpus.sentences[index];
      split.trace.push_back({label, sentence.id, split.per_type_counts[label]});
      selected[index] = true;
      split.sentence_ids.push_back(sentence.id);
      for (const auto& e : sentence.entities) ++split.per_type_counts[e.etype];
    }
    if (split.per_type_counts[label] < config.k) split.shortfalls.push_back(label);
  }
  return split;
}

std::string split_report(const FewShotSplit& split, const Corpus& corpus) {
  std::map<std::string, std::size_t> counts;
  for (const auto& id : split.sentence_ids) {
    const Sentence* s = corpus.find(id);
    if (s == nullptr) throw CorpusError("split references unknown sentence id '" + id + "'");
    for (const auto& e : s->entities) ++counts[e.etype];
  }

  std::ostringstream out;
  out << "K=" << split.config.k << " seed=" << split.config.seed
      << " split=" << split.config.split_index << " sentences=" << split.sentence_ids.size() << '\n';
  if (split.sentence_ids.empty()) {
    out << "warning: empty split\n";
    return out.str();
  }
  out << std::left << std::setw(16) << "type" << std::right << std::setw(8) << "count" << std::setw(11)
      << "overshoot" << '\n';
  for (const auto& [label, count] : counts) {
    const auto k = static_cast<long long>(split.config.k);
    out << std::left << std::setw(16) << label << std::right << std::setw(8) << count << std::setw(11)
        << static_cast<long long>(count) - k;
    if (split.has_shortfall(label) || count < split.config.k) out << "  insufficient corpus support";
    out << '\n';
  }
  return out.str();
}

std::string split_to_json(const FewShotSplit& split) {
  nlohmann::ordered_json j;
  j["k"] = split.config.k;
  j["seed"] = split.config.seed;
  j["split_index"] = split.config.split_index;
  j["sentence_ids"] = split.sentence_ids;
  j["per_type_counts"] = nlohmann::ordered_json::object();
  for (const auto& [label, count] : split.per_type_counts) j["per_type_counts"][label] = count;
  return j.dump(2) + "\n";
}

FewShotSplit split_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  FewShotSplit split;
  split.config.k = j.at("k").get<std::size_t>();
  split.config.seed = j.at("seed").get<std::uint64_t>();
  split.config.split_index = j.at("split_index").get<int>();
  split.sentence_ids = j.at("sentence_ids").get<std::vector<std::string>>();
  split.per_type_counts = j.at("per_type_counts").get<std::map<std::string, std::size_t>>();
  for (const auto& [label, count] : split.per_type_counts) {
    if (count < split.config.k) split.shortfalls.push_back(label);
  }
  return split;
}

Corpus select_sentences(const Corpus& corpus, const std::vector<std::string>& ids) {
  std::unordered_map<std::string, const Sentence*> by_id;
  for (const auto& s : corpus.sentences) by_id.emplace(s.id, &s);
  Corpus out;
  out.registry = corpus.registry;
  out.kind = corpus.kind;
  for (const auto& id : ids) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw CorpusError("unknown sentence id '" + id + "'");
    out.sentences.push_back(*it->second);
  }
  return out;
}

}  // namespace poda
