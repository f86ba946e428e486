#include "mlcache/rate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "mlcache/diagnostics.hpp"

namespace mlcache::rate {

double coded_factor(double fraction, double users) {
  if (fraction <= 0.0) return users;
  if (fraction >= 1.0) return 0.0;
  // 1 - (1-mu)^k computed as -expm1(k log1p(-mu)) to stay accurate as mu -> 0.
  const double miss_all = -std::expm1(users * std::log1p(-fraction));
  return std::max(0.0, (1.0 / fraction - 1.0) * miss_all);
}

namespace {

double level_rate(double memory, double K, double N, double U, double d) {
  if (memory <= 0.0) return K * U;
  if (memory >= N / d) return 0.0;
  const double mu = d * memory / N;
  if (mu >= 1.0) return 0.0;
  return d * U * coded_factor(mu, K / d);
}

}  // namespace

double single_level_rate(double memory, std::int64_t num_caches, std::int64_t n_files,
                         std::int64_t users_per_cache, std::int64_t degree) {
  if (memory < 0.0 || std::isnan(memory))
    throw std::invalid_argument("single_level_rate: memory must be non-negative");
  if (num_caches < 1 || n_files < 1 || users_per_cache < 1 || degree < 1)
    throw std::invalid_argument("single_level_rate: parameters must be positive");
  const double cap = static_cast<double>(n_files) / static_cast<double>(degree);
  if (memory > cap) {
    warn("single_level_rate: memory " + std::to_string(memory) + " exceeds N/d=" +
         std::to_string(cap) + ", clamped");
    return 0.0;
  }
  return level_rate(memory, static_cast<double>(num_caches), static_cast<double>(n_files),
                    static_cast<double>(users_per_cache), static_cast<double>(degree));
}

double single_level_rate_clamped(double memory, std::int64_t num_caches, const LevelSpec& level) {
  return level_rate(std::max(memory, 0.0), static_cast<double>(num_caches),
                    static_cast<double>(level.n_files), static_cast<double>(level.users_per_cache),
                    static_cast<double>(level.access_degree));
}

double single_access_rate(double memory, std::int64_t num_caches, std::int64_t n_files) {
  return single_level_rate(memory, num_caches, n_files, 1, 1);
}

std::vector<std::int64_t> lfu_stored_counts(const SystemConfig& config) {
  // Whole files only: fractional memory is truncated.
  auto budget = static_cast<std::int64_t>(std::floor(std::max(config.memory, 0.0)));
  std::vector<std::int64_t> counts;
  counts.reserve(config.levels.size());
  for (const auto& l : config.levels) {
    const auto c = std::min(budget, l.n_files);
    counts.push_back(c);
    budget -= c;
  }
  return counts;
}

double lfu_rate(const SystemConfig& config) {
  const auto counts = lfu_stored_counts(config);
  double r = 0.0;
  for (std::size_t i = 0; i < config.levels.size(); ++i) {
    const auto& l = config.levels[i];
    const auto demanded = config.num_caches * l.users_per_cache;
    r += static_cast<double>(std::min(demanded, l.n_files - counts[i]));
  }
  return r;
}

double small_k_rate(const SystemConfig& config) {
  const double K = static_cast<double>(config.num_caches);
  double stored = 0.0;  // T_J, cumulative N_i/d_i of fully stored levels
  for (std::size_t i = 0; i < config.levels.size(); ++i) {
    const auto& l = config.levels[i];
    const double full = l.full_storage();
    if (config.memory < stored + full) {
      double r = K * static_cast<double>(l.users_per_cache) * (1.0 - (config.memory - stored) / full);
      for (std::size_t h = i + 1; h < config.levels.size(); ++h)
        r += K * static_cast<double>(config.levels[h].users_per_cache);
      return std::max(r, 0.0);
    }
    stored += full;
  }
  return 0.0;
}

}  // namespace mlcache::rate
