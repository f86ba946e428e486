#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mlcache/model.hpp"
#include "mlcache/pama.hpp"

// Memory sweeps, the grid-point kernel shared by the CLI and the benchmarks.
namespace mlcache::kernels {

/// MIN:MAX:POINTS[:log]. Invariants: min >= 0, points >= 2, max >= min,
/// min > 0 for log spacing.
struct SweepSpec {
  double min = 0.0;
  double max = 0.0;
  std::int64_t points = 2;
  bool log_scale = false;
};

/// Throws std::invalid_argument on malformed input.
SweepSpec parse_sweep_spec(std::string_view text);

/// points values from min to max inclusive, linear or geometric.
std::vector<double> memory_grid(const SweepSpec& spec);

struct SweepRow {
  double memory = 0.0;
  double rate_exact = 0.0;
  double rate_closed = 0.0;  // NaN where the closed form is undefined
  bool in_validity = true;
  pama::Allocation allocation;
  std::vector<double> per_level;
};

/// PAMA at every grid point. Serial reference.
std::vector<SweepRow> sweep(const SystemConfig& config, std::span<const double> memory_grid);

/// OpenMP over grid points, gathered by index; identical result.
std::vector<SweepRow> sweep_parallel(const SystemConfig& config, std::span<const double> memory_grid);

}  // namespace mlcache::kernels
