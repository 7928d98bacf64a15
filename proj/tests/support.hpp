#pragma once

// Test-only generators and oracles. Nothing here calls into the code under
// test except to build plain data values.

#include <algorithm>
#include <map>
#include <tuple>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "poda/corpus.hpp"

namespace poda::testing {

inline const std::vector<std::string> kTypePool = {"PER", "LOC", "ORG", "MISC", "GPE", "FAC", "VEH"};

/// Sentence with entities built by hand; mentions come from the tokens.
inline Sentence make_sentence(std::string id, std::vector<std::string> tokens,
                              std::vector<std::tuple<std::size_t, std::size_t, std::string>> spans) {
  Sentence s;
  s.id = std::move(id);
  s.tokens = std::move(tokens);
  for (auto& [start, end, type] : spans) s.entities.push_back(make_entity(s.tokens, start, end, type));
  sort_left_to_right(s.entities);
  return s;
}

/// Left-to-right entities [(EU, MISC), (Britain, LOC), (BSE, MISC)].
inline Sentence bse_sentence() {
  return make_sentence("ex", {"EU", "says", "Britain", "must", "fight", "BSE"},
                       {{0, 1, "MISC"}, {2, 3, "LOC"}, {5, 6, "MISC"}});
}

/// Tokens drawn from lowercase letters, digits and `( ) ,` so that mentions
/// never contain an uppercase registry label.
inline std::string fuzz_token(std::mt19937_64& rng) {
  static const std::string alphabet = "abcdefghijklmnopqrstuvwxyz0123456789(),";
  std::uniform_int_distribution<std::size_t> len(1, 6);
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  std::string t;
  const auto n = len(rng);
  for (std::size_t i = 0; i < n; ++i) t += alphabet[pick(rng)];
  return t;
}

inline std::vector<std::string> fuzz_types(std::mt19937_64& rng, std::size_t count) {
  auto pool = kTypePool;
  std::shuffle(pool.begin(), pool.end(), rng);
  pool.resize(count);
  std::sort(pool.begin(), pool.end());
  return pool;
}

/// Random sentence with `n_entities` entities over `types`. Flat sentences
/// get disjoint spans; nested ones may overlap but never repeat (start, end, type).
inline Sentence fuzz_sentence(std::mt19937_64& rng, const std::vector<std::string>& types,
                              std::size_t n_entities, bool nested, const std::string& id = "fz") {
  std::uniform_int_distribution<std::size_t> extra(0, 6);
  const std::size_t n_tokens = nested ? n_entities + 1 + extra(rng) : 2 * n_entities + extra(rng);
  Sentence s;
  s.id = id;
  for (std::size_t i = 0; i < n_tokens; ++i) s.tokens.push_back(fuzz_token(rng));

  std::uniform_int_distribution<std::size_t> type_pick(0, types.size() - 1);
  if (!nested) {
    // Choose disjoint [start, end) spans from a left-to-right walk.
    std::size_t pos = 0;
    for (std::size_t e = 0; e < n_entities; ++e) {
      const std::size_t remaining = n_entities - e;
      const std::size_t slack = n_tokens - pos - remaining;
      std::uniform_int_distribution<std::size_t> gap(0, std::min<std::size_t>(slack, 2));
      const std::size_t start = pos + gap(rng);
      const std::size_t room = n_tokens - start - (remaining - 1);
      std::uniform_int_distribution<std::size_t> width(1, std::min<std::size_t>(room, 3));
      const std::size_t end = start + width(rng);
      s.entities.push_back(make_entity(s.tokens, start, end, types[type_pick(rng)]));
      pos = end;
    }
  } else {
    std::uniform_int_distribution<std::size_t> start_pick(0, n_tokens - 1);
    while (s.entities.size() < n_entities) {
      const std::size_t start = start_pick(rng);
      std::uniform_int_distribution<std::size_t> end_pick(start + 1, std::min(n_tokens, start + 4));
      const std::size_t end = end_pick(rng);
      const auto& type = types[type_pick(rng)];
      const bool dup = std::any_of(s.entities.begin(), s.entities.end(), [&](const Entity& e) {
        return e.start == start && e.end == end && e.etype == type;
      });
      if (!dup) s.entities.push_back(make_entity(s.tokens, start, end, type));
    }
  }
  sort_left_to_right(s.entities);
  return s;
}

/// (mention, type) multiset as a sorted vector.
template <typename Range, typename Proj>
std::vector<std::pair<std::string, std::string>> sorted_pairs(const Range& items, Proj proj) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& item : items) out.push_back(proj(item));
  std::sort(out.begin(), out.end());
  return out;
}

/// One single-entity sentence per requested entity, grouped by type.
inline Corpus round_robin_corpus(const std::vector<std::pair<std::string, std::size_t>>& type_counts) {
  Corpus corpus;
  std::vector<std::string> labels;
  std::size_t next = 0;
  for (const auto& [label, count] : type_counts) {
    labels.push_back(label);
    for (std::size_t i = 0; i < count; ++i) {
      corpus.sentences.push_back(make_sentence("r" + std::to_string(next++), {"w", label + "x", "z"},
                                               {{1, 2, label}}));
    }
  }
  corpus.registry = TypeRegistry::sorted(labels);
  return corpus;
}

}  // namespace poda::testing
