#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mlcache/model.hpp"

// Popularity-aware memory sharing across levels.
namespace mlcache::pama {

/// H: no memory, I: shares the remaining memory, J: stored entirely.
enum class Role : std::uint8_t { kZero, kShared, kFull };

/// An (H, I, J) split of the levels. Disjoint and covering by construction:
/// every level carries exactly one role.
class Partition {
public:
  Partition() = default;
  explicit Partition(std::size_t num_levels) : roles_(num_levels, Role::kZero) {}

  std::size_t size() const { return roles_.size(); }
  Role role(std::size_t level) const { return roles_.at(level); }
  void set(std::size_t level, Role r) { roles_.at(level) = r; }

  /// 0-based level indices with the given role, ascending.
  std::vector<std::size_t> members(Role r) const;
  std::vector<std::size_t> zero() const { return members(Role::kZero); }
  std::vector<std::size_t> shared() const { return members(Role::kShared); }
  std::vector<std::size_t> full() const { return members(Role::kFull); }

  /// "H=3;I=1,2;J=" with 1-based level numbers.
  std::string to_string() const;

  friend bool operator==(const Partition&, const Partition&) = default;

private:
  std::vector<Role> roles_;
};

/// S_A = sum over A of sqrt(N_i U_i).
double sqrt_mass(const SystemConfig& config, const std::vector<std::size_t>& set);
/// T_A = sum over A of N_i/d_i.
double storage(const SystemConfig& config, const std::vector<std::size_t>& set);

enum class ThresholdKind : std::uint8_t {
  kEnterShared,  // m~_i = (1/K) sqrt(N_i/U_i): level joins I
  kEnterFull,    // M~_i = (1/d_i) sqrt(N_i/U_i): level moves from I to J
};

struct Breakpoint {
  double x = 0.0;  // normalized threshold m~_i or M~_i
  double y = 0.0;  // memory at which the step happens
  ThresholdKind kind = ThresholdKind::kEnterShared;
  std::size_t level = 0;
  Partition after;
};

/// The 2L memory breakpoints of the partition algorithm. Immutable once built.
class ThresholdTable {
public:
  ThresholdTable() = default;
  explicit ThresholdTable(std::vector<Breakpoint> points, std::size_t num_levels)
      : points_(std::move(points)), num_levels_(num_levels) {}

  const std::vector<Breakpoint>& points() const { return points_; }
  std::size_t num_levels() const { return num_levels_; }

private:
  std::vector<Breakpoint> points_;
  std::size_t num_levels_ = 0;
};

/// Sorts the 2L thresholds (ties: enter-shared before enter-full, then lower
/// level first) and maps each through f^{I,J}(x) = x S_I + T_J using the
/// sets before the step.
ThresholdTable build_threshold_table(const SystemConfig& config);

/// Partition for the last breakpoint with y_t <= memory; all-H below y_1.
Partition get_partition(const ThresholdTable& table, double memory);

struct Allocation {
  std::vector<double> shares;  // per-level memory alpha_i M, file units
  Partition partition;

  double total() const;
};

/// Zero for H, N_j/d_j for J, remaining memory split proportionally to
/// sqrt(N_i U_i) inside I. Leftover memory is unused when I is empty.
Allocation pama_allocate(const SystemConfig& config, const Partition& partition);

/// Convenience: table + partition + allocation at config.memory.
Allocation pama(const SystemConfig& config);
Allocation pama(const SystemConfig& config, const ThresholdTable& table, double memory);

struct RateBreakdown {
  double total = 0.0;
  std::vector<double> per_level;
};

/// Sum of exact single-level rates for the given shares.
RateBreakdown total_rate_exact(const SystemConfig& config, const Allocation& allocation);
RateBreakdown total_rate_exact(const SystemConfig& config, const std::vector<double>& shares);

struct ClosedFormRate {
  double value = 0.0;
  /// False when the partition violates the strict M-feasibility inequalities
  /// (small-memory degeneracy); the value is then only a clamped formula.
  bool in_validity = true;
};

/// sum_H K U_h + S_I^2/(M - T_J) - sum_I d_i U_i, clamped into
/// [0, sum_i K U_i]. Throws std::domain_error if I is non-empty and M = T_J.
ClosedFormRate total_rate_closed_form(const SystemConfig& config, const Partition& partition);

/// Checks the M-feasibility inequalities verbatim at config.memory. With I
/// empty the H inequalities are undefined and the partition is accepted.
bool is_m_feasible(const SystemConfig& config, const Partition& partition);

struct GridSearchResult {
  Allocation allocation;
  double rate = 0.0;
  /// Largest |R(neighbor) - R(best)| over single-coordinate grid moves from
  /// the best point: a local Lipschitz constant times the step.
  double lipschitz_slack = 0.0;
  std::size_t evaluated = 0;
};

/// Exhaustive search over alpha on the grid {0, step, ..., 1} with
/// sum alpha <= 1 and shares capped at N_i/d_i. Serial reference.
GridSearchResult grid_search_alpha(const SystemConfig& config, double grid_step);

/// OpenMP version of grid_search_alpha; identical result.
GridSearchResult grid_search_alpha_parallel(const SystemConfig& config, double grid_step);

struct AccessStructure {
  std::vector<std::int64_t> degrees;
  double rate = 0.0;
};

/// Enumerates d in {1..max_degree}^L with sum U_i d_i / sum U_i <= avg_degree
/// and d_i <= K; returns the one with the smallest PAMA rate (ties: smaller
/// sum of d, then lexicographic). Throws std::invalid_argument if none fit.
AccessStructure optimize_access_structure(const SystemConfig& config, std::int64_t max_degree,
                                          double avg_degree);

}  // namespace mlcache::pama
