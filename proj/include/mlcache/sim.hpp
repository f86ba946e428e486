#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mlcache/model.hpp"
#include "mlcache/popularity.hpp"

// Executable placement and delivery, bit-exact and in expectation.
namespace mlcache::sim {

/// Cache colors and user groups of one level. Cache c has color c mod d; the
/// user in slot u of cache c belongs to group (c mod d) U + u. When d does
/// not divide K the last K mod d caches are edge caches whose users are
/// served uncoded.
struct Coloring {
  std::int64_t num_caches = 1;
  std::int64_t users_per_cache = 1;
  std::int64_t degree = 1;
  std::vector<std::int64_t> cache_colors;
  std::vector<bool> edge;

  std::int64_t num_groups() const { return degree * users_per_cache; }
  std::int64_t group(std::int64_t cache, std::int64_t slot) const {
    return (cache % degree) * users_per_cache + slot;
  }
  bool is_edge(std::int64_t cache) const { return edge[static_cast<std::size_t>(cache)]; }
  std::int64_t num_edge() const;
  /// First cache of the given color among the d caches read by a user at
  /// `cache` (cyclic), or -1.
  std::int64_t cache_of_color(std::int64_t cache, std::int64_t color) const;
};

/// Throws std::invalid_argument unless 1 <= d <= K and U >= 1.
Coloring build_coloring(std::int64_t num_caches, std::int64_t users_per_cache, std::int64_t degree);

/// One request: the user in `slot` of `cache` asks for file `file` (index
/// within the level) of level `level`.
struct Demand {
  std::int64_t cache = 0;
  std::int64_t slot = 0;
  std::size_t level = 0;
  std::int64_t file = 0;

  friend bool operator==(const Demand&, const Demand&) = default;
};

using DemandProfile = std::vector<Demand>;

/// Exactly U_i level-i users per cache, all requesting different files.
/// Requires N_i >= K U_i.
DemandProfile worst_case_demands(const SystemConfig& config);

/// Exactly U_i level-i users per cache, files uniform within the level.
DemandProfile random_demands(const SystemConfig& config, std::uint64_t seed);

/// Fixed-length bit string.
class BitSet {
public:
  BitSet() = default;
  explicit BitSet(std::int64_t size) : size_(size), words_(static_cast<std::size_t>((size + 63) / 64), 0) {}

  std::int64_t size() const { return size_; }
  bool test(std::int64_t i) const { return (words_[static_cast<std::size_t>(i >> 6)] >> (i & 63)) & 1U; }
  void set(std::int64_t i) { words_[static_cast<std::size_t>(i >> 6)] |= std::uint64_t{1} << (i & 63); }
  std::int64_t count() const;
  const std::vector<std::uint64_t>& words() const { return words_; }

  friend bool operator==(const BitSet&, const BitSet&) = default;

private:
  std::int64_t size_ = 0;
  std::vector<std::uint64_t> words_;
};

/// Bits [begin, end) of a file held by caches of one color.
struct SubfileRange {
  std::int64_t begin = 0;
  std::int64_t end = 0;
  std::int64_t size() const { return end - begin; }
};

SubfileRange subfile_range(std::int64_t file_bits, std::int64_t degree, std::int64_t color);

/// Random-sampling cache contents. For every cache, level and file, the
/// subfile of the cache's color is sampled bit by bit with probability
/// d share / N from its own stream (placement, cache, level, file).
struct PlacementState {
  struct Level {
    std::int64_t n_files = 0;
    std::int64_t degree = 1;
    double fraction = 0.0;
    std::vector<BitSet> stored;  // [cache * n_files + file], over the subfile

    const BitSet& at(std::int64_t cache, std::int64_t file) const {
      return stored[static_cast<std::size_t>(cache * n_files + file)];
    }

    friend bool operator==(const Level&, const Level&) = default;
  };

  std::int64_t file_size_bits = 0;
  std::uint64_t seed = 0;
  std::int64_t num_caches = 0;
  std::vector<Level> levels;

  /// Stored bits of one cache, summed over levels and files.
  std::int64_t stored_bits(std::int64_t cache) const;

  friend bool operator==(const PlacementState&, const PlacementState&) = default;
};

/// Throws std::invalid_argument if F < 64, shares has the wrong size or a
/// stored fraction exceeds 1 by more than 1e-9.
PlacementState place(const SystemConfig& config, std::span<const double> shares, std::int64_t file_bits,
                     std::uint64_t seed);

/// Bits of file `file` of a level, drawn from stream (content, level, file).
BitSet file_content(std::uint64_t seed, std::size_t level, std::int64_t file, std::int64_t file_bits);

struct SubsystemLoad {
  std::size_t level = 0;
  std::int64_t group = 0;
  std::int64_t color = 0;
  std::int64_t users = 0;
  std::int64_t bits = 0;

  friend bool operator==(const SubsystemLoad&, const SubsystemLoad&) = default;
};

struct DeliveryLog {
  std::int64_t broadcast_bits = 0;
  std::int64_t uncoded_bits = 0;  // part of broadcast_bits sent in clear
  std::vector<SubsystemLoad> loads;
  std::int64_t decoded_users = 0;
  double empirical_rate = 0.0;  // broadcast_bits / F

  friend bool operator==(const DeliveryLog&, const DeliveryLog&) = default;
};

/// Coded delivery per (group, color) subsystem followed by bit-for-bit
/// decoding of every demand from the broadcast and cache contents. Requires
/// exactly one demand per (level, cache, slot); throws std::invalid_argument
/// otherwise. A decoding failure throws std::logic_error.
DeliveryLog deliver_bit_exact(const SystemConfig& config, const PlacementState& placement,
                              const DemandProfile& demands);

/// Expected broadcast size, in files, of the same scheme for a demand
/// profile: each subsystem with k distinct requested files costs
/// (1/d)(1/mu - 1)(1 - (1 - mu)^k). Slots may exceed U_i. The result is
/// capped by the number of distinct requested files (unicasting each whole).
double expected_rate(const SystemConfig& config, std::span<const double> shares, const DemandProfile& demands);

/// Random attachments and Zipf-like requests of one stochastic trial:
/// each of total_users users picks a cache uniformly and a file rank from
/// the distribution. Ranks map to levels through the discretization blocks.
DemandProfile stochastic_demands(const popularity::Discretized& levels,
                                 const popularity::EmpiricalDistribution& dist, std::int64_t total_users,
                                 std::uint64_t seed, std::int64_t trial);

struct TrialStatistics {
  std::vector<double> rates;  // per trial
  double mean = 0.0;
  double p05 = 0.0;
  double p50 = 0.0;
  double p95 = 0.0;

  friend bool operator==(const TrialStatistics&, const TrialStatistics&) = default;
};

TrialStatistics summarize(std::vector<double> rates);

/// Expected-size rate of PAMA on stochastic demands, per trial. Serial
/// reference.
TrialStatistics simulate_stochastic(const popularity::Discretized& levels,
                                    const popularity::EmpiricalDistribution& dist, std::int64_t total_users,
                                    std::int64_t trials, std::uint64_t seed);

/// OpenMP over trials; identical result.
TrialStatistics simulate_stochastic_parallel(const popularity::Discretized& levels,
                                             const popularity::EmpiricalDistribution& dist,
                                             std::int64_t total_users, std::int64_t trials, std::uint64_t seed);

/// LFU on the same stochastic demands: distinct requested ranks outside the
/// floor(M) most popular.
TrialStatistics lfu_simulate(const popularity::Discretized& levels, const popularity::EmpiricalDistribution& dist,
                             std::int64_t total_users, std::int64_t trials, std::uint64_t seed);

/// LFU on a fixed profile over a level config: distinct requested files
/// not among the floor(M) most popular (levels filled in order).
double lfu_rate_for(const SystemConfig& config, const DemandProfile& demands);

}  // namespace mlcache::sim
