#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace mlcache {

/// One popularity level: N_i equally popular files, U_i users per cache
/// asking for them, each user reading d_i consecutive caches.
struct LevelSpec {
  std::int64_t n_files = 1;
  std::int64_t users_per_cache = 1;
  std::int64_t access_degree = 1;

  /// Per-file popularity U/N; only for display, comparisons use cross products.
  double popularity() const {
    return static_cast<double>(users_per_cache) / static_cast<double>(n_files);
  }
  /// N/d, the per-cache memory that stores the level entirely.
  double full_storage() const {
    return static_cast<double>(n_files) / static_cast<double>(access_degree);
  }

  friend bool operator==(const LevelSpec&, const LevelSpec&) = default;
};

/// A problem instance. Memory is in file units and may be fractional.
struct SystemConfig {
  std::int64_t num_caches = 1;
  double memory = 0.0;
  std::vector<LevelSpec> levels;
  std::optional<double> separation_ratio;

  std::size_t num_levels() const { return levels.size(); }
  /// D = max_i d_i. Derived on demand, never stored.
  std::int64_t max_degree() const;
  /// Sum over levels of N_i/d_i; at or above this memory the rate is 0.
  double total_storage() const;
  /// Sum over levels of K*U_i, the uncached broadcast cost.
  double uncached_rate() const;
  std::int64_t total_files() const;

  SystemConfig with_memory(double m) const {
    SystemConfig c = *this;
    c.memory = m;
    return c;
  }

  friend bool operator==(const SystemConfig&, const SystemConfig&) = default;
};

/// One (group, color) delivery subsystem of a level.
struct Subsystem {
  std::int64_t num_caches = 1;  // K/d, floored
  std::int64_t n_files = 1;
  double memory = 0.0;          // per-cache memory devoted to the level
  double subfile_fraction = 0.0;  // d*memory/N, clamped to [0,1]
};

Subsystem make_subsystem(std::int64_t num_caches, const LevelSpec& level, double memory);

class ValidationError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

struct ValidateOptions {
  /// When false, N_i < K*U_i is reported as a warning instead of an error.
  /// Used for configs derived from empirical popularity data.
  bool regularity_is_fatal = true;
};

/// True if level a is strictly more popular than b: U_a*N_b > U_b*N_a.
bool more_popular(const LevelSpec& a, const LevelSpec& b);

/// Stable permutation sorting levels by decreasing popularity; ties keep
/// input order.
std::vector<std::size_t> popularity_order(std::span<const LevelSpec> levels);

/// Checks the instance, re-sorts levels into popularity order and warns on
/// soft violations (separation ratio, d not dividing K). Throws
/// ValidationError on hard violations.
SystemConfig validate(SystemConfig config, const ValidateOptions& options = {});

void to_json(nlohmann::json& j, const LevelSpec& level);
void from_json(const nlohmann::json& j, LevelSpec& level);
void to_json(nlohmann::json& j, const SystemConfig& config);
void from_json(const nlohmann::json& j, SystemConfig& config);

SystemConfig load_config(const std::string& path);

}  // namespace mlcache
