#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "poda/corpus.hpp"

namespace poda {

struct ParsedTuple {
  std::string mention;
  std::string etype;
  std::optional<std::size_t> group_index;  // set for grouped targets

  bool operator==(const ParsedTuple&) const = default;
};

struct ParseOutcome {
  std::vector<ParsedTuple> tuples;
  std::vector<std::string> malformed_segments;
  bool clean = true;
};

/// Strict-mode grammar violation; `offset` is the byte offset in the input.
class TargetParseError : public std::runtime_error {
 public:
  TargetParseError(std::size_t offset, const std::string& what);
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

enum class ParseMode { kTolerant, kStrict };

/// Marker recorded when input ends before the target is closed.
inline constexpr std::string_view kTruncatedSegment = "<truncated>";

/// Parses a rendered or generated target.
///
///   target := '[' ']' | '[' tuple (',' tuple)* ']' | '[' group (',' group)* ']'
///   group  := '[' ']' | '[' tuple (',' tuple)* ']'
///   tuple  := '(' mention ', ' LABEL ')'
///
/// Whitespace between structural tokens is ignored. A tuple ends at the
/// first `, LABEL)` with LABEL from the registry whose next non-space
/// character is `,`, `]` or end of input; everything between the opening
/// `(` and that point is the mention, so mentions may contain commas and
/// parentheses. A mention that itself contains such a terminator is
/// ambiguous and is split at the earliest one.
///
/// Tolerant mode records the residue from a violation up to and including
/// the next `)` (stopping before a `(` so a following tuple can still be
/// read), then keeps salvaging tuples while skipping brackets and commas.
/// Strict mode throws TargetParseError at the first violation.
ParseOutcome parse_target(std::string_view text, const TypeRegistry& registry,
                          ParseMode mode = ParseMode::kTolerant);

struct GroundingResult {
  std::vector<Entity> entities;  // in tuple order
  std::size_t dropped = 0;
  std::vector<ParsedTuple> unmatched;
};

/// Maps each tuple to the leftmost token span whose space-join equals the
/// mention and that no earlier tuple of the same type already took.
GroundingResult ground_mentions(const std::vector<ParsedTuple>& tuples, const Sentence& sentence);

}  // namespace poda
