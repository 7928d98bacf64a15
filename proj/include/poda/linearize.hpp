#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "poda/corpus.hpp"
#include "poda/ordering.hpp"

namespace poda {

class LinearizeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EntityGroup {
  std::string label;
  std::vector<Entity> entities;

  bool operator==(const EntityGroup&) const = default;
};

/// A target entity sequence. Grouped targets follow a type permutation with
/// empty groups omitted; flat targets keep the left-to-right order.
struct ReorderedTarget {
  enum class Form { kGrouped, kFlat };

  Form form = Form::kGrouped;
  std::vector<EntityGroup> groups;
  std::vector<Entity> flat;

  bool operator==(const ReorderedTarget&) const = default;
};

/// Buckets entities by type and emits the buckets in the permutation's
/// order; entities keep their original relative order inside a bucket.
ReorderedTarget reorder_entities(std::span<const Entity> entities, const TypePermutation& order);

ReorderedTarget left_to_right_target(std::span<const Entity> entities);

/// Grouped target for a type order, flat target for left-to-right.
ReorderedTarget target_for(std::span<const Entity> entities, const OrderInstruction& instruction);

/// `[[(m, T), ...], ...]` for grouped, `[(m, T), ...]` for flat, `[]` when empty.
std::string render_target(const ReorderedTarget& target);

/// Instruction text, one space, then the space-joined tokens. With no tokens
/// the trailing space is dropped.
std::string render_source(const std::vector<std::string>& tokens, const OrderInstruction& instruction);
std::string render_source(const Sentence& sentence, const OrderInstruction& instruction);

struct AugmentedExample {
  std::string example_id;
  std::string sentence_id;
  OrderInstruction instruction = OrderInstruction::left_to_right();
  std::string source_text;
  std::string target_text;

  bool operator==(const AugmentedExample&) const = default;
};

/// Every sentence paired with every instruction, sentence-major. The
/// left-to-right instruction is prepended when absent. Each rendered target
/// is parsed back before it is emitted; a mismatch throws LinearizeError.
/// Throws on an empty or duplicated instruction list.
std::vector<AugmentedExample> build_training_set(std::span<const Sentence> sentences,
                                                 const TypeRegistry& registry,
                                                 std::vector<OrderInstruction> instructions);

/// JSONL record: {example_id, sentence_id, instruction_kind, permutation, source, target}.
std::string example_to_json(const AugmentedExample& example);
AugmentedExample example_from_json(const std::string& line);

}  // namespace poda
