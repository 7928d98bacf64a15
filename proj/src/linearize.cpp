#include "poda/linearize.hpp"

#include <algorithm>
#include <map>

#include "json.hpp"
#include "poda/delinearize.hpp"

namespace poda {

namespace {

void render_tuple(std::string& out, const Entity& e) {
  out += '(';
  out += e.mention;
  out += ", ";
  out += e.etype;
  out += ')';
}

void render_tuple_list(std::string& out, const std::vector<Entity>& entities) {
  out += '[';
  for (std::size_t i = 0; i < entities.size(); ++i) {
    if (i > 0) out += ", ";
    render_tuple(out, entities[i]);
  }
  out += ']';
}

using MentionBag = std::map<std::pair<std::string, std::string>, std::size_t>;

MentionBag bag_of(std::span<const Entity> entities) {
  MentionBag bag;
  for (const auto& e : entities) ++bag[{e.mention, e.etype}];
  return bag;
}

MentionBag bag_of(const std::vector<ParsedTuple>& tuples) {
  MentionBag bag;
  for (const auto& t : tuples) ++bag[{t.mention, t.etype}];
  return bag;
}

}  // namespace

ReorderedTarget reorder_entities(std::span<const Entity> entities, const TypePermutation& order) {
  std::vector<EntityGroup> buckets;
  buckets.reserve(order.size());
  for (const auto& label : order.order()) buckets.push_back({label, {}});

  for (const auto& e : entities) {
    auto it = std::find_if(buckets.begin(), buckets.end(),
                           [&](const EntityGroup& g) { return g.label == e.etype; });
    if (it == buckets.end()) {
      throw LinearizeError("entity type '" + e.etype + "' is not in permutation '" + order.render() + "'");
    }
    it->entities.push_back(e);
  }

  ReorderedTarget target;
  target.form = ReorderedTarget::Form::kGrouped;
  for (auto& bucket : buckets) {
    if (!bucket.entities.empty()) target.groups.push_back(std::move(bucket));
  }
  return target;
}

ReorderedTarget left_to_right_target(std::span<const Entity> entities) {
  ReorderedTarget target;
  target.form = ReorderedTarget::Form::kFlat;
  target.flat.assign(entities.begin(), entities.end());
  sort_left_to_right(target.flat);
  return target;
}

ReorderedTarget target_for(std::span<const Entity> entities, const OrderInstruction& instruction) {
  if (instruction.is_left_to_right()) return left_to_right_target(entities);
  return reorder_entities(entities, instruction.permutation());
}

std::string render_target(const ReorderedTarget& target) {
  std::string out;
  if (target.form == ReorderedTarget::Form::kFlat) {
    render_tuple_list(out, target.flat);
    return out;
  }
  out += '[';
  for (std::size_t i = 0; i < target.groups.size(); ++i) {
    if (i > 0) out += ", ";
    render_tuple_list(out, target.groups[i].entities);
  }
  out += ']';
  return out;
}

std::string render_source(const std::vector<std::string>& tokens, const OrderInstruction& instruction) {
  std::string out = instruction.render();
  if (!tokens.empty()) {
    out += ' ';
    out += join_tokens(tokens, 0, tokens.size());
  }
  return out;
}

std::string render_source(const Sentence& sentence, const OrderInstruction& instruction) {
  return render_source(sentence.tokens, instruction);
}

std::vector<AugmentedExample> build_training_set(std::span<const Sentence> sentences,
                                                 const TypeRegistry& registry,
                                                 std::vector<OrderInstruction> instructions) {
  if (instructions.empty()) throw LinearizeError("build_training_set: no instructions given");
  for (std::size_t i = 0; i < instructions.size(); ++i) {
    for (std::size_t j = i + 1; j < instructions.size(); ++j) {
      if (instructions[i] == instructions[j]) {
        throw LinearizeError("duplicate instruction '" + instructions[i].render() + "'");
      }
    }
  }
  const auto l2r = OrderInstruction::left_to_right();
  if (std::find(instructions.begin(), instructions.end(), l2r) == instructions.end()) {
    instructions.insert(instructions.begin(), l2r);
  }

  std::vector<AugmentedExample> out;
  out.reserve(sentences.size() * instructions.size());
  for (const auto& sentence : sentences) {
    const auto gold = bag_of(sentence.entities);
    for (std::size_t i = 0; i < instructions.size(); ++i) {
      AugmentedExample ex;
      ex.example_id = sentence.id + ":" + std::to_string(i);
      ex.sentence_id = sentence.id;
      ex.instruction = instructions[i];
      ex.source_text = render_source(sentence, ex.instruction);
      ex.target_text = render_target(target_for(sentence.entities, ex.instruction));

      const auto parsed = parse_target(ex.target_text, registry);
      if (!parsed.clean || bag_of(parsed.tuples) != gold) {
        throw LinearizeError("target for sentence " + sentence.id + " does not parse back: " + ex.target_text);
      }
      out.push_back(std::move(ex));
    }
  }
  return out;
}

std::string example_to_json(const AugmentedExample& example) {
  nlohmann::ordered_json j;
  j["example_id"] = example.example_id;
  j["sentence_id"] = example.sentence_id;
  j["instruction_kind"] = std::string(example.instruction.kind());
  if (example.instruction.is_left_to_right()) {
    j["permutation"] = nullptr;
  } else {
    j["permutation"] = example.instruction.permutation().render();
  }
  j["source"] = example.source_text;
  j["target"] = example.target_text;
  return j.dump();
}

AugmentedExample example_from_json(const std::string& line) {
  const auto j = nlohmann::json::parse(line);
  AugmentedExample ex;
  ex.example_id = j.at("example_id").get<std::string>();
  ex.sentence_id = j.at("sentence_id").get<std::string>();
  const auto kind = j.at("instruction_kind").get<std::string>();
  if (kind == "left_to_right") {
    ex.instruction = OrderInstruction::left_to_right();
  } else if (kind == "type_order") {
    ex.instruction = OrderInstruction::type_order(TypePermutation::parse(j.at("permutation").get<std::string>()));
  } else {
    throw LinearizeError("unknown instruction_kind '" + kind + "'");
  }
  ex.source_text = j.at("source").get<std::string>();
  ex.target_text = j.at("target").get<std::string>();
  return ex;
}

}  // namespace poda
