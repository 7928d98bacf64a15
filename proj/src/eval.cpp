#include "poda/eval.hpp"

#include <cmath>
#include <set>
#include <unordered_map>

namespace poda {

namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

using Bag = std::map<EntityKey, std::size_t>;

Bag to_bag(const std::vector<EntityKey>& keys) {
  Bag bag;
  for (const auto& k : keys) ++bag[k];
  return bag;
}

}  // namespace

double MatchCounts::precision() const { return ratio(true_positives, true_positives + false_positives); }

double MatchCounts::recall() const { return ratio(true_positives, true_positives + false_negatives); }

double MatchCounts::f1() const {
  const double p = precision();
  const double r = recall();
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

MatchCounts& MatchCounts::operator+=(const MatchCounts& other) {
  true_positives += other.true_positives;
  false_positives += other.false_positives;
  false_negatives += other.false_negatives;
  return *this;
}

EvalReport score_micro(const EntityTable& predicted, const EntityTable& gold) {
  std::vector<std::string> unknown;
  for (const auto& [id, keys] : predicted) {
    if (!gold.count(id)) unknown.push_back(id);
  }
  if (!unknown.empty()) {
    std::string msg = "predictions for sentence ids not in gold:";
    for (const auto& id : unknown) msg += " " + id;
    throw EvalError(msg);
  }

  EvalReport report;
  static const std::vector<EntityKey> kNone;
  for (const auto& [id, gold_keys] : gold) {
    auto it = predicted.find(id);
    const Bag pred_bag = to_bag(it == predicted.end() ? kNone : it->second);
    const Bag gold_bag = to_bag(gold_keys);

    for (const auto& [key, n_pred] : pred_bag) {
      auto g = gold_bag.find(key);
      const std::size_t n_gold = g == gold_bag.end() ? 0 : g->second;
      const std::size_t hit = std::min(n_pred, n_gold);
      auto& per = report.per_type[key.second];
      per.true_positives += hit;
      per.false_positives += n_pred - hit;
    }
    for (const auto& [key, n_gold] : gold_bag) {
      auto p = pred_bag.find(key);
      const std::size_t n_pred = p == pred_bag.end() ? 0 : p->second;
      report.per_type[key.second].false_negatives += n_gold - std::min(n_pred, n_gold);
    }
  }
  for (const auto& [label, counts] : report.per_type) report.micro += counts;
  return report;
}

AggregateReport aggregate_runs(std::span<const EvalReport> reports) {
  if (reports.empty()) throw EvalError("aggregate_runs: no runs");
  AggregateReport agg;
  double sum = 0.0;
  for (const auto& r : reports) {
    agg.run_f1s.push_back(r.f1());
    sum += r.f1();
  }
  const auto n = static_cast<double>(reports.size());
  agg.mean_f1 = sum / n;
  double sq = 0.0;
  for (double f : agg.run_f1s) sq += (f - agg.mean_f1) * (f - agg.mean_f1);
  agg.std_f1 = std::sqrt(sq / n);
  return agg;
}

std::string strip_instruction(const AugmentedExample& example) {
  const std::string prefix = example.instruction.render();
  const std::string& source = example.source_text;
  if (source.compare(0, prefix.size(), prefix) != 0) return source;
  if (source.size() == prefix.size()) return {};
  if (source[prefix.size()] != ' ') return source;
  return source.substr(prefix.size() + 1);
}

AmbiguityCounts ambiguity_report(std::span<const AugmentedExample> examples, bool strip_instructions) {
  std::unordered_map<std::string, std::set<std::string>> targets;
  for (const auto& ex : examples) {
    targets[strip_instructions ? strip_instruction(ex) : ex.source_text].insert(ex.target_text);
  }
  AmbiguityCounts counts;
  counts.total_sources = targets.size();
  for (const auto& [source, distinct] : targets) {
    if (distinct.size() > 1) ++counts.ambiguous_sources;
    counts.max_fanout = std::max(counts.max_fanout, distinct.size());
  }
  return counts;
}

EntityTable gold_table(std::span<const Sentence> sentences) {
  EntityTable table;
  for (const auto& s : sentences) {
    auto& keys = table[s.id];
    for (const auto& e : s.entities) keys.emplace_back(e.mention, e.etype);
  }
  return table;
}

std::string span_key(const Entity& entity) {
  return std::to_string(entity.start) + ":" + std::to_string(entity.end);
}

EntityTable gold_span_table(std::span<const Sentence> sentences) {
  EntityTable table;
  for (const auto& s : sentences) {
    auto& keys = table[s.id];
    for (const auto& e : s.entities) keys.emplace_back(span_key(e), e.etype);
  }
  return table;
}

}  // namespace poda
