#pragma once

#include <cstdint>
#include <string_view>

namespace dfl {

/// Counter-based 64-bit generator ("splitmix64-counter").
///
/// Draw i of a stream with key k is mix64(k + (i + 1) * 0x9E3779B97F4A7C15),
/// where mix64 is the SplitMix64 finalizer. A substream key is derived as
/// mix64(parent_key ^ mix64(tag)), so streams for (seed, purpose, index) can be
/// recreated in any order and in any language.
class CounterRng {
 public:
  static constexpr std::string_view kAlgorithm = "splitmix64-counter";

  explicit CounterRng(std::uint64_t key) : key_(key) {}

  static std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  static std::uint64_t derive_key(std::uint64_t parent, std::uint64_t tag) {
    return mix64(parent ^ mix64(tag));
  }

  CounterRng substream(std::uint64_t tag) const { return CounterRng(derive_key(key_, tag)); }

  std::uint64_t next_u64() {
    ++counter_;
    return mix64(key_ + counter_ * 0x9E3779B97F4A7C15ULL);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal via Box-Muller; consumes exactly two draws.
  double normal();
  bool bernoulli(double p) { return uniform() < p; }
  /// Uniform integer in [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace dfl
