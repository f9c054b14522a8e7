#pragma once

#include <cstdint>
#include <initializer_list>

namespace horolab {

/// Stream tags for the independent i.i.d. markings of G''.
enum class Stream : std::uint64_t {
  kCenters = 1,      // u''_1: Bernoulli centers
  kDiamondMarks = 2, // u''_2: diamond marks
  kTieBreak = 3,     // w''_1: tie-breaking in phi/psi
  kOverlap = 4,      // w''_2: overlap breaking
  kPercolation = 5,  // percolation arrivals
  kCorner = 6,       // corner-event sampling
};

/// SplitMix64 finalizer: a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

constexpr std::uint64_t combine(std::uint64_t h, std::uint64_t v) {
  return mix64(h + 0x9e3779b97f4a7c15ull + v);
}

/// Order-sensitive key of a pair (combine alone is symmetric in its arguments).
constexpr std::uint64_t pair_key(std::uint64_t a, std::uint64_t b) { return combine(mix64(a ^ 0x2545f4914f6cdd1dull), b); }

constexpr double to_unit(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/*!
 * Counter-based randomness: a pure function of (seed, stream, key, counter).
 *
 * Keys are digests of canonical forms, so the value at a point depends only on
 * the point and the tags. Nothing is stateful; identical arguments give
 * identical bits.
 */
class CounterRng {
 public:
  constexpr explicit CounterRng(std::uint64_t seed) : seed_(mix64(seed ^ 0x5851f42d4c957f2dull)) {}

  constexpr std::uint64_t bits(Stream stream, std::uint64_t key, std::uint64_t counter = 0) const {
    std::uint64_t h = combine(seed_, static_cast<std::uint64_t>(stream));
    h = combine(h, key);
    return combine(h, counter);
  }

  /// Uniform in [0, 1).
  constexpr double uniform(Stream stream, std::uint64_t key, std::uint64_t counter = 0) const {
    return to_unit(bits(stream, key, counter));
  }

  constexpr std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
};

/// Derive the seed of the i-th run from a master seed.
constexpr std::uint64_t run_seed(std::uint64_t master, std::uint64_t index) {
  return mix64(combine(master, index));
}

}  // namespace horolab
