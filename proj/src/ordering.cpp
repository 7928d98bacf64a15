#include "poda/ordering.hpp"

#include <algorithm>
#include <limits>
#include <set>

#include "poda/rng.hpp"

namespace poda {

namespace {

constexpr std::string_view kInstructionPrefix = "Following the order: ";
constexpr std::string_view kLeftToRightText = "from left to right";

}  // namespace

TypePermutation TypePermutation::of(const TypeRegistry& registry, std::vector<std::string> order) {
  TypePermutation p(std::move(order));
  if (!p.is_permutation_of(registry)) {
    throw OrderingError("'" + p.render() + "' is not a permutation of the type registry");
  }
  return p;
}

TypePermutation TypePermutation::parse(std::string_view text) {
  std::vector<std::string> order;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto next = text.find(", ", pos);
    const auto piece = text.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos);
    if (piece.empty()) throw OrderingError("empty label in permutation '" + std::string(text) + "'");
    order.emplace_back(piece);
    if (next == std::string_view::npos) break;
    pos = next + 2;
  }
  std::set<std::string> distinct(order.begin(), order.end());
  if (distinct.size() != order.size()) {
    throw OrderingError("repeated label in permutation '" + std::string(text) + "'");
  }
  return TypePermutation(std::move(order));
}

std::string TypePermutation::render() const {
  std::string out;
  for (std::size_t i = 0; i < order_.size(); ++i) {
    if (i > 0) out += ", ";
    out += order_[i];
  }
  return out;
}

bool TypePermutation::is_permutation_of(const TypeRegistry& registry) const {
  auto mine = order_;
  auto theirs = registry.labels();
  std::sort(mine.begin(), mine.end());
  std::sort(theirs.begin(), theirs.end());
  return mine == theirs;
}

const TypePermutation& OrderInstruction::permutation() const {
  if (!permutation_) throw OrderingError("left-to-right instruction has no type permutation");
  return *permutation_;
}

std::string OrderInstruction::render() const {
  std::string out(kInstructionPrefix);
  out += permutation_ ? permutation_->render() : std::string(kLeftToRightText);
  out += '.';
  return out;
}

std::uint64_t factorial_saturated(std::size_t n) {
  std::uint64_t result = 1;
  for (std::size_t i = 2; i <= n; ++i) {
    if (result > std::numeric_limits<std::uint64_t>::max() / i) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    result *= i;
  }
  return result;
}

std::vector<TypePermutation> enumerate_type_permutations(const TypeRegistry& registry, std::size_t cap) {
  if (registry.empty()) throw OrderingError("cannot permute an empty type registry");
  const auto total = factorial_saturated(registry.size());
  if (total > cap) {
    throw OrderingError(std::to_string(registry.size()) + " types give " +
                        (total == std::numeric_limits<std::uint64_t>::max() ? std::string("too many")
                                                                           : std::to_string(total)) +
                        " permutations, above the enumeration cap of " + std::to_string(cap) +
                        "; sample a fixed number instead");
  }
  auto order = registry.labels();
  std::sort(order.begin(), order.end());
  std::vector<TypePermutation> out;
  out.reserve(static_cast<std::size_t>(total));
  do {
    out.push_back(TypePermutation::of(registry, order));
  } while (std::next_permutation(order.begin(), order.end()));
  return out;
}

std::vector<TypePermutation> sample_type_permutations(const TypeRegistry& registry, std::size_t count,
                                                      std::uint64_t seed) {
  if (registry.empty()) throw OrderingError("cannot permute an empty type registry");
  const auto total = factorial_saturated(registry.size());
  if (count > total) {
    throw OrderingError("requested " + std::to_string(count) + " distinct permutations but only " +
                        std::to_string(total) + " exist");
  }

  Xoshiro256 rng(seed);
  std::set<std::vector<std::string>> seen;
  std::vector<TypePermutation> out;
  out.reserve(count);
  while (out.size() < count) {
    auto order = registry.labels();
    for (std::size_t i = order.size() - 1; i > 0; --i) {
      const auto j = static_cast<std::size_t>(rng.bounded(i + 1));
      std::swap(order[i], order[j]);
    }
    if (seen.insert(order).second) out.push_back(TypePermutation::of(registry, std::move(order)));
  }
  return out;
}

}  // namespace poda
