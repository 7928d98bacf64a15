#include "poda/delinearize.hpp"

#include <set>
#include <tuple>

namespace poda {

TargetParseError::TargetParseError(std::size_t offset, const std::string& what)
    : std::runtime_error("offset " + std::to_string(offset) + ": " + what), offset_(offset) {}

namespace {

enum class State {
  kStart,
  kTopOpen,
  kFlatAfterTuple,
  kFlatExpectTuple,
  kGroupOpen,
  kGroupAfterTuple,
  kGroupExpectTuple,
  kAfterGroup,
  kExpectGroup,
  kEnd,
  kSalvage,
};

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

class TargetParser {
 public:
  TargetParser(std::string_view text, const TypeRegistry& registry, ParseMode mode)
      : text_(text), labels_(registry.labels()), mode_(mode) {}

  ParseOutcome run() {
    for (;;) {
      pos_ = skip_space(pos_);
      if (pos_ == text_.size()) {
        if (state_ != State::kEnd && state_ != State::kSalvage) {
          if (mode_ == ParseMode::kStrict) throw TargetParseError(pos_, "unexpected end of input");
          outcome_.malformed_segments.emplace_back(kTruncatedSegment);
        }
        break;
      }
      step(text_[pos_]);
    }
    outcome_.clean = outcome_.malformed_segments.empty();
    return std::move(outcome_);
  }

 private:
  void step(char c) {
    switch (state_) {
      case State::kStart:
        if (c == '[') return advance(State::kTopOpen);
        return violation("expected '['");
      case State::kTopOpen:
        if (c == ']') return advance(State::kEnd);
        if (c == '[') return open_group();
        if (c == '(') return tuple(State::kFlatAfterTuple);
        return violation("expected '[', '(' or ']'");
      case State::kFlatAfterTuple:
        if (c == ',') return advance(State::kFlatExpectTuple);
        if (c == ']') return advance(State::kEnd);
        return violation("expected ',' or ']' after tuple");
      case State::kFlatExpectTuple:
        if (c == '(') return tuple(State::kFlatAfterTuple);
        return violation("expected '('");
      case State::kGroupOpen:
        if (c == '(') return tuple(State::kGroupAfterTuple);
        if (c == ']') return advance(State::kAfterGroup);
        return violation("expected '(' or ']' in group");
      case State::kGroupAfterTuple:
        if (c == ',') return advance(State::kGroupExpectTuple);
        if (c == ']') return advance(State::kAfterGroup);
        return violation("expected ',' or ']' after tuple");
      case State::kGroupExpectTuple:
        if (c == '(') return tuple(State::kGroupAfterTuple);
        return violation("expected '('");
      case State::kAfterGroup:
        if (c == ',') return advance(State::kExpectGroup);
        if (c == ']') return advance(State::kEnd);
        return violation("expected ',' or ']' after group");
      case State::kExpectGroup:
        if (c == '[') return open_group();
        return violation("expected '['");
      case State::kEnd:
        return violation("trailing text after target");
      case State::kSalvage:
        if (c == '[' || c == ']' || c == ',') {
          ++pos_;
          return;
        }
        if (c == '(' && try_tuple()) return;
        return residue();
    }
  }

  void advance(State next) {
    ++pos_;
    state_ = next;
  }

  void open_group() {
    group_index_ = group_index_ ? *group_index_ + 1 : 0;
    advance(State::kGroupOpen);
  }

  void tuple(State next) {
    if (try_tuple()) {
      state_ = next;
    } else {
      violation("no ', LABEL)' terminator for tuple");
    }
  }

  // At '(' : find the first registry-label terminator and record the tuple.
  bool try_tuple() {
    const std::size_t open = pos_;
    for (std::size_t k = open + 2; k + 1 < text_.size(); ++k) {
      if (text_[k] != ',' || text_[k + 1] != ' ') continue;
      for (const auto& label : labels_) {
        const std::size_t close = k + 2 + label.size();
        if (close >= text_.size() || text_[close] != ')') continue;
        if (text_.compare(k + 2, label.size(), label) != 0) continue;
        const std::size_t follow = skip_space(close + 1);
        if (follow != text_.size() && text_[follow] != ',' && text_[follow] != ']') continue;
        outcome_.tuples.push_back(
            {std::string(text_.substr(open + 1, k - open - 1)), label, group_index_});
        pos_ = close + 1;
        return true;
      }
    }
    return false;
  }

  void violation(const std::string& what) {
    if (mode_ == ParseMode::kStrict) throw TargetParseError(pos_, what);
    residue();
    state_ = State::kSalvage;
  }

  // Consumes up to and including the next ')', or up to the next '('.
  void residue() {
    std::size_t end = text_.size();
    for (std::size_t j = pos_ + 1; j < text_.size(); ++j) {
      if (text_[j] == ')') {
        end = j + 1;
        break;
      }
      if (text_[j] == '(') {
        end = j;
        break;
      }
    }
    outcome_.malformed_segments.emplace_back(text_.substr(pos_, end - pos_));
    pos_ = end;
  }

  std::size_t skip_space(std::size_t i) const {
    while (i < text_.size() && is_space(text_[i])) ++i;
    return i;
  }

  std::string_view text_;
  const std::vector<std::string>& labels_;
  ParseMode mode_;
  State state_ = State::kStart;
  std::size_t pos_ = 0;
  std::optional<std::size_t> group_index_;
  ParseOutcome outcome_;
};

}  // namespace

ParseOutcome parse_target(std::string_view text, const TypeRegistry& registry, ParseMode mode) {
  return TargetParser(text, registry, mode).run();
}

GroundingResult ground_mentions(const std::vector<ParsedTuple>& tuples, const Sentence& sentence) {
  GroundingResult result;
  std::set<std::tuple<std::string, std::size_t, std::size_t>> taken;
  const auto& tokens = sentence.tokens;

  for (const auto& t : tuples) {
    bool matched = false;
    for (std::size_t start = 0; start < tokens.size() && !matched; ++start) {
      std::string joined;
      for (std::size_t end = start + 1; end <= tokens.size(); ++end) {
        if (end > start + 1) joined += ' ';
        joined += tokens[end - 1];
        if (joined.size() > t.mention.size()) break;
        if (joined == t.mention && !taken.count({t.etype, start, end})) {
          taken.insert({t.etype, start, end});
          result.entities.push_back(Entity{start, end, joined, t.etype});
          matched = true;
          break;
        }
      }
    }
    if (!matched) {
      ++result.dropped;
      result.unmatched.push_back(t);
    }
  }
  return result;
}

}  // namespace poda
