#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace mlcache {

/// SplitMix64 finalizer (Steele, Lea, Flood 2014).
std::uint64_t splitmix64(std::uint64_t x);

/// Derives an independent stream seed from a root seed and a tuple of ids by
/// folding each id through SplitMix64.
std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> ids);

/// Reproducible random stream: std::mt19937_64 seeded with derive_seed().
/// Only the raw engine output is used (no std:: distributions, whose output
/// is implementation-defined), so streams are bit-identical across platforms.
class RandomStream {
public:
  RandomStream(std::uint64_t root, std::initializer_list<std::uint64_t> ids)
      : engine_(derive_seed(root, ids)) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  bool bernoulli(double p) { return uniform01() < p; }
  /// Uniform integer in [0, n), unbiased (Lemire's rejection method).
  std::uint64_t uniform_index(std::uint64_t n);

private:
  std::mt19937_64 engine_;
};

/// Stream domain tags, first id of every derived stream.
namespace stream {
inline constexpr std::uint64_t kFileContent = 1;
inline constexpr std::uint64_t kPlacement = 2;
inline constexpr std::uint64_t kDemand = 3;
inline constexpr std::uint64_t kTrial = 4;
inline constexpr std::uint64_t kFuzz = 5;
}  // namespace stream

}  // namespace mlcache
