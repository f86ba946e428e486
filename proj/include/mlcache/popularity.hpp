#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <span>
#include <string>
#include <vector>

#include "mlcache/model.hpp"

// From a continuous popularity profile to popularity levels.
namespace mlcache::popularity {

/// File request probabilities sorted non-increasing, summing to 1.
class EmpiricalDistribution {
public:
  /// Sorts descending and normalizes. Throws std::invalid_argument on an
  /// empty input, a negative weight or an all-zero input.
  explicit EmpiricalDistribution(std::vector<double> weights);

  std::int64_t n_files() const { return static_cast<std::int64_t>(probs_.size()); }
  const std::vector<double>& probabilities() const { return probs_; }
  double probability(std::int64_t rank) const { return probs_.at(static_cast<std::size_t>(rank)); }
  /// Mass of ranks [first, last).
  double mass(std::int64_t first, std::int64_t last) const;
  /// Rank whose cumulative interval contains u in [0, 1).
  std::int64_t rank_for(double u) const;

private:
  std::vector<double> probs_;
  std::vector<double> cumulative_;  // cumulative_[k] = mass of ranks [0, k)
};

/// Newline-separated non-negative integer counts, or two-column "id,count"
/// CSV (an "id,count" header line is allowed). Blank lines and '#' comments
/// are skipped; zero counts are dropped with a warning. Throws
/// std::invalid_argument with the offending line number on bad input.
EmpiricalDistribution load_counts(std::istream& in);
EmpiricalDistribution load_counts_file(const std::string& path);

/// Exact Zipf(s) over n ranks: p_r proportional to r^-s.
EmpiricalDistribution zipf_distribution(double s, std::int64_t n);

/// Least-squares slope of log p against log rank over all ranks, negated.
/// Needs at least 10 files.
double fit_zipf(const EmpiricalDistribution& dist);

/// Contiguous popularity-ordered blocks: block k holds ranks
/// [boundaries[k-1], boundaries[k]) with boundaries[-1] = 0, boundaries[L-1] = N.
class LevelPartition {
public:
  LevelPartition(std::int64_t n_files, std::vector<std::int64_t> cuts);

  std::int64_t n_files() const { return n_files_; }
  /// Interior cut points b_1 < ... < b_{L-1}.
  const std::vector<std::int64_t>& cuts() const { return cuts_; }
  std::size_t num_blocks() const { return cuts_.size() + 1; }
  std::vector<std::int64_t> block_sizes() const;
  std::int64_t block_begin(std::size_t k) const { return k == 0 ? 0 : cuts_[k - 1]; }
  std::int64_t block_end(std::size_t k) const { return k == cuts_.size() ? n_files_ : cuts_[k]; }

  friend bool operator==(const LevelPartition&, const LevelPartition&) = default;

private:
  std::int64_t n_files_;
  std::vector<std::int64_t> cuts_;
};

/// Two-level split for Zipf(s) popularity. s = 1 takes the s -> 1+ limit
/// for K^(1/(s-1)): m1 = N/K, m2 = N^(1/s). n is rounded to nearest and
/// clamped to [1, N-1].
LevelPartition zipf_split_heuristic(double s, std::int64_t n_files, std::int64_t num_caches,
                                    double memory);

/// A config built from blocks plus the rank range each level covers, in the
/// config's level order.
struct Discretized {
  SystemConfig config;
  std::vector<std::int64_t> block_first;  // first rank of each level
  std::vector<std::int64_t> block_size;
};

/// U_i = round-half-up(total_users * mass_i / K), last level takes the
/// remainder; zero-user blocks are merged into their neighbor with a warning.
/// N_i < K U_i is downgraded to a warning. Throws std::invalid_argument when
/// no level has users or when degrees.size() != number of blocks.
Discretized discretize(const EmpiricalDistribution& dist, const LevelPartition& partition,
                       std::int64_t num_caches, std::int64_t total_users,
                       std::span<const std::int64_t> degrees, double memory);

struct BruteForceOptions {
  std::size_t num_levels = 2;
  std::int64_t num_caches = 10;
  std::int64_t total_users = 100;
  std::vector<std::int64_t> degrees;  // empty: all ones
  double memory = 0.0;
  std::int64_t coarsening = 0;        // 0: max(1, N/200)
  std::uint64_t budget = 10'000'000;  // maximum number of candidates
};

struct BruteForceResult {
  LevelPartition partition{1, {}};
  double rate = 0.0;
  std::uint64_t candidates = 0;
};

/// Exhaustive search over contiguous L-block partitions whose cuts are
/// multiples of the coarsening step, minimizing the PAMA exact rate. Ties
/// keep the lexicographically smallest cut vector. Serial reference.
BruteForceResult brute_force_partition(const EmpiricalDistribution& dist, const BruteForceOptions& options);

/// OpenMP version of brute_force_partition; identical result.
BruteForceResult brute_force_partition_parallel(const EmpiricalDistribution& dist,
                                                const BruteForceOptions& options);

/// PAMA exact rate of the discretized config for a partition, or +inf when
/// every block rounds to zero users. Quiet: emits no warnings.
double partition_rate(const EmpiricalDistribution& dist, const LevelPartition& partition,
                      std::int64_t num_caches, std::int64_t total_users,
                      std::span<const std::int64_t> degrees, double memory);

}  // namespace mlcache::popularity
