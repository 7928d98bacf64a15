#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "poda/corpus.hpp"

namespace poda {

class OrderingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kDefaultEnumerationCap = 5040;  // 7!

/// An ordering of the full entity-type set.
class TypePermutation {
 public:
  /// Throws OrderingError unless `order` is a permutation of registry.labels().
  static TypePermutation of(const TypeRegistry& registry, std::vector<std::string> order);

  /// Parses the `A, B, C` rendering. Checks only that labels are distinct.
  static TypePermutation parse(std::string_view text);

  const std::vector<std::string>& order() const { return order_; }
  std::size_t size() const { return order_.size(); }

  /// Labels joined with `, `.
  std::string render() const;

  bool is_permutation_of(const TypeRegistry& registry) const;

  bool operator==(const TypePermutation&) const = default;
  auto operator<=>(const TypePermutation&) const = default;

 private:
  explicit TypePermutation(std::vector<std::string> order) : order_(std::move(order)) {}
  std::vector<std::string> order_;
};

/// Either "follow this type order" or the evaluation-time left-to-right order.
class OrderInstruction {
 public:
  static OrderInstruction left_to_right() { return OrderInstruction(std::nullopt); }
  static OrderInstruction type_order(TypePermutation p) { return OrderInstruction(std::move(p)); }

  bool is_left_to_right() const { return !permutation_.has_value(); }
  const TypePermutation& permutation() const;  // throws OrderingError for left-to-right

  /// `left_to_right` or `type_order`.
  std::string_view kind() const { return is_left_to_right() ? "left_to_right" : "type_order"; }

  /// `Following the order: PER, LOC, MISC, ORG.` / `Following the order: from left to right.`
  std::string render() const;

  bool operator==(const OrderInstruction&) const = default;

 private:
  explicit OrderInstruction(std::optional<TypePermutation> p) : permutation_(std::move(p)) {}
  std::optional<TypePermutation> permutation_;
};

/// n! saturated at UINT64_MAX.
std::uint64_t factorial_saturated(std::size_t n);

/// All l! orders in lexicographic order of label sequences.
/// Throws OrderingError if the registry is empty or l! exceeds `cap`.
std::vector<TypePermutation> enumerate_type_permutations(const TypeRegistry& registry,
                                                         std::size_t cap = kDefaultEnumerationCap);

/// `count` distinct orders, each drawn by a seeded Fisher-Yates shuffle of
/// registry.labels() (i from l-1 down to 1, j = bounded(i + 1)); repeated
/// draws are rejected. Throws OrderingError when count > l!.
std::vector<TypePermutation> sample_type_permutations(const TypeRegistry& registry, std::size_t count,
                                                      std::uint64_t seed);

}  // namespace poda
