#pragma once

#include <cstdint>

#include "mlcache/model.hpp"

// Achievable broadcast rates, in files per delivery round.
namespace mlcache::rate {

/// Coded single-access rate factor (1/mu - 1)(1 - (1 - mu)^k) for a stored
/// fraction mu in [0,1] and k single-access users. Its mu -> 0 limit is k.
double coded_factor(double fraction, double users);

/// Multi-access single-level rate dU (N/(dM) - 1)(1 - (1 - dM/N)^(K/d)).
/// K/d is a real exponent. M = 0 gives KU, M >= N/d gives 0 (values above
/// N/d are clamped with a warning). Throws std::invalid_argument on M < 0.
double single_level_rate(double memory, std::int64_t num_caches, std::int64_t n_files,
                         std::int64_t users_per_cache, std::int64_t degree);

/// Same as single_level_rate but silently clamps memory into [0, N/d].
double single_level_rate_clamped(double memory, std::int64_t num_caches, const LevelSpec& level);

/// Classic decentralized coded caching rate, one user per cache, d = 1.
double single_access_rate(double memory, std::int64_t num_caches, std::int64_t n_files);

/// Worst-case rate of caching the floor(M) most popular whole files in every
/// cache: sum_i min(K U_i, N_i - c_i).
double lfu_rate(const SystemConfig& config);

/// Number of level-i files stored by LFU, in level order.
std::vector<std::int64_t> lfu_stored_counts(const SystemConfig& config);

/// Store levels 1..i*-1 fully, cache level i* linearly (uncoded), give the
/// rest nothing.
double small_k_rate(const SystemConfig& config);

}  // namespace mlcache::rate
