#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace horolab {

enum class GroupKind { kFree, kCyclic, kLattice, kFreeProduct, kDirectProduct };

/*!
 * Description of a finitely generated group with a solvable word problem.
 *
 * Only constructions with an explicit normal form are supported: free groups,
 * finite cyclic groups, integer lattices, and free/direct products of these.
 * Each comes with its standard symmetric generating set.
 */
struct GroupSpec {
  GroupKind kind = GroupKind::kFree;
  int param = 1;  // rank, order or dimension
  std::vector<GroupSpec> factors;

  static GroupSpec free(int rank);
  static GroupSpec cyclic(int order);
  static GroupSpec lattice(int dim);
  static GroupSpec free_product(std::vector<GroupSpec> factors);
  static GroupSpec direct_product(std::vector<GroupSpec> factors);

  // {"kind": "free", "rank": 2}, {"kind": "free_product", "factors": [...]}, ...
  static GroupSpec from_json(const nlohmann::json& doc);
  nlohmann::json to_json() const;

  // Short human name, e.g. "F2", "Z^2", "(Z/2 * Z/3)".
  std::string name() const;

  bool operator==(const GroupSpec&) const = default;
};

/// Canonical (normal) form of a group element. Two elements are equal in the
/// group iff their codes are equal.
struct Element {
  std::vector<std::int32_t> code;

  bool operator==(const Element&) const = default;
  auto operator<=>(const Element&) const = default;
};

std::uint64_t digest(const Element& e);

struct ElementHash {
  std::size_t operator()(const Element& e) const { return static_cast<std::size_t>(digest(e)); }
};

/// A word over the generating set, as generator indices.
using Word = std::vector<int>;

/*!
 * Word-problem oracle for a GroupSpec.
 *
 * Immutable after construction and cheap to copy (shared implementation).
 */
class Group {
 public:
  explicit Group(GroupSpec spec);

  const GroupSpec& spec() const { return spec_; }

  int generator_count() const;
  const std::string& label(int gen) const;
  int inverse_generator(int gen) const;

  Element identity() const;
  Element generator(int gen) const;
  Element multiply(const Element& a, const Element& b) const;
  Element multiply_generator(const Element& a, int gen) const;
  Element inverse(const Element& a) const;

  /// Word length with respect to the standard generators.
  int length(const Element& a) const;
  int distance(const Element& a, const Element& b) const { return length(multiply(inverse(a), b)); }

  /// A geodesic spelling of the element; canon(spell(a)) == a.
  Word spell(const Element& a) const;

  Element canon(std::span<const int> word) const;
  Element canon(std::string_view word) const;

  /// Tokenize a word: whitespace/'*' separated labels, "e" for the identity,
  /// "x^-1" for inverses; single-character labels may be run together.
  Word parse_word(std::string_view text) const;
  std::string format(const Element& a) const;

  /// Length-lexicographic order on canonical spellings.
  bool less(const Element& a, const Element& b) const;

  /// Known exact growth rate for built-in families; nullopt when only an
  /// estimate is available (free products).
  std::optional<double> exact_growth_rate() const;

  /// True if generator 0 has infinite order.
  bool first_generator_infinite() const;

  struct Node;

 private:
  GroupSpec spec_;
  std::shared_ptr<const Node> root_;
};

inline constexpr std::size_t kDefaultEnumerationCap = 20'000'000;

/*!
 * Cayley ball B_n(o), indexed in ElementOrder.
 *
 * Elements are sorted by (distance, spelling), so each sphere is a contiguous
 * index range. The neighbor table stores right multiplication by every
 * generator, with -1 for neighbors outside the ball.
 */
class CayleyBall {
 public:
  CayleyBall(Group group, int radius, std::size_t cap = kDefaultEnumerationCap);

  const Group& group() const { return group_; }
  int radius() const { return radius_; }
  std::size_t size() const { return elements_.size(); }

  const Element& element(std::size_t i) const { return elements_[i]; }
  int distance(std::size_t i) const { return dist_[i]; }
  std::int32_t neighbor(std::size_t i, int gen) const {
    return neighbors_[i * static_cast<std::size_t>(gens_) + static_cast<std::size_t>(gen)];
  }
  std::uint64_t key(std::size_t i) const { return keys_[i]; }

  /// Index of an element, or -1 if it lies outside the ball.
  std::int64_t find(const Element& e) const;

  /// Index range [first, last) of the sphere of radius k.
  std::pair<std::size_t, std::size_t> sphere(int k) const;
  /// Number of elements at distance <= k.
  std::size_t volume(int k) const;

  /// Walk a word from element i through the neighbor table; -1 if it leaves.
  std::int64_t walk(std::size_t i, std::span<const int> word) const;

 private:
  Group group_;
  int radius_;
  int gens_;
  std::vector<Element> elements_;
  std::vector<int> dist_;
  std::vector<std::uint64_t> keys_;
  std::vector<std::int32_t> neighbors_;
  std::vector<std::size_t> sphere_start_;
  std::unordered_map<Element, std::int32_t, ElementHash> index_;
};

}  // namespace horolab
