#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mlcache/model.hpp"

// Information-theoretic lower bounds on the optimal broadcast rate.
namespace mlcache::bounds {

enum class BoundKind { kTrivialZero, kCutset, kNonCutset, kCorollary };

std::string to_string(BoundKind kind);

/// A lower-bound value with the parameters that produced it. Level indices
/// are 0-based; unused fields are left at their defaults.
struct BoundWitness {
  double value = 0.0;
  BoundKind kind = BoundKind::kTrivialZero;
  std::size_t level = 0;             // cut-set level i, or non-cut-set level l
  std::int64_t users = 0;            // cut-set v
  std::vector<std::size_t> set;      // A
  std::int64_t window = 0;           // s
  std::int64_t divisor = 0;          // b

  /// "i=1;v=72" / "l=2;A=1;s=4;b=2" / "A=1,2;b=100" with 1-based levels.
  std::string params() const;
};

/// gamma = 1/(1 - e^-1) and the large-K threshold k0 = 16 (D+1)^2 (gamma L + 1).
struct GapConstants {
  double gamma = 0.0;
  double k0 = 0.0;
};

GapConstants gap_constants(const SystemConfig& config);

/// The multiplicative envelope 37 (D+1)^3 L^3.
double order_optimality_factor(const SystemConfig& config);

/// v - (ceil(v/U_i) + d_i - 1)/floor(N_i/v) * M, floored at 0.
/// Requires 1 <= v <= min(K U_i, N_i).
BoundWitness cutset_bound(const SystemConfig& config, std::size_t level, std::int64_t v);

/// (1/(D+1)) min{(s - d_l + 1) U_l, N_l/(s b)} + sum_{j in A} min{U_j, N_j/(b d_j)} - M/b,
/// floored at 0. Requires l not in A, d_l <= s <= K, b >= 1.
BoundWitness noncutset_bound(const SystemConfig& config, std::size_t l,
                             std::span<const std::size_t> set, std::int64_t s, std::int64_t b);

/// sum_{j in A} min{U_j, N_j/(b d_j)} - M/b, floored at 0. A non-empty, b >= 1.
BoundWitness corollary_bound(const SystemConfig& config, std::span<const std::size_t> set,
                             std::int64_t b);

/// Maximum over the cut-set, non-cut-set and corollary families (and 0).
/// Non-cut-set pairs only use A made of levels more popular than l with
/// d_j <= d_l.
BoundWitness best_lower_bound(const SystemConfig& config);

/// The b values at which some min{} term of the l-, A- or corollary families
/// switches branch, plus 1 and powers of two. Exposed for tests.
std::vector<std::int64_t> critical_divisors(const SystemConfig& config, std::size_t l, std::int64_t s);

struct GapPoint {
  double memory = 0.0;
  double achievable = 0.0;
  BoundWitness bound;
  double ratio = 1.0;
};

struct GapProfile {
  std::vector<GapPoint> points;
  double max_ratio = 1.0;
  std::size_t argmax = 0;
};

/// PAMA exact rate over best lower bound at each memory value. Points where
/// the achievable rate is 0 report ratio 1. Serial reference.
GapProfile gap_profile(const SystemConfig& config, std::span<const double> memory_grid);

/// OpenMP version of gap_profile; identical result.
GapProfile gap_profile_parallel(const SystemConfig& config, std::span<const double> memory_grid);

}  // namespace mlcache::bounds
