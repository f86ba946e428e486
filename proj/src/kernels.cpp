#include "mlcache/kernels.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <omp.h>

namespace mlcache::kernels {

namespace {

double parse_double(std::string_view s) {
  const std::string text(s);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || !std::isfinite(v))
    throw std::invalid_argument("bad number '" + text + "' in memory sweep");
  return v;
}

SweepRow evaluate(const SystemConfig& config, const pama::ThresholdTable& table, double m) {
  SweepRow row;
  row.memory = m;
  const auto at = config.with_memory(m);
  row.allocation = pama::pama(config, table, m);
  const auto exact = pama::total_rate_exact(at, row.allocation);
  row.rate_exact = exact.total;
  row.per_level = exact.per_level;
  try {
    const auto closed = pama::total_rate_closed_form(at, row.allocation.partition);
    row.rate_closed = closed.value;
    row.in_validity = closed.in_validity;
  } catch (const std::domain_error&) {
    row.rate_closed = std::numeric_limits<double>::quiet_NaN();
    row.in_validity = false;
  }
  return row;
}

}  // namespace

SweepSpec parse_sweep_spec(std::string_view text) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (;;) {
    const auto colon = text.find(':', start);
    parts.push_back(text.substr(start, colon == std::string_view::npos ? std::string_view::npos : colon - start));
    if (colon == std::string_view::npos) break;
    start = colon + 1;
  }
  if (parts.size() != 3 && parts.size() != 4)
    throw std::invalid_argument("memory sweep must be MIN:MAX:POINTS[:log]");
  SweepSpec s;
  s.min = parse_double(parts[0]);
  s.max = parse_double(parts[1]);
  const auto& p = parts[2];
  if (std::from_chars(p.data(), p.data() + p.size(), s.points).ptr != p.data() + p.size() || p.empty())
    throw std::invalid_argument("bad point count in memory sweep");
  if (parts.size() == 4) {
    if (parts[3] == "log")
      s.log_scale = true;
    else if (parts[3] != "lin" && parts[3] != "linear")
      throw std::invalid_argument("memory sweep scale must be 'log' or 'linear'");
  }
  if (s.min < 0.0) throw std::invalid_argument("memory sweep: MIN must be >= 0");
  if (s.max < s.min) throw std::invalid_argument("memory sweep: MAX must be >= MIN");
  if (s.points < 2) throw std::invalid_argument("memory sweep: POINTS must be >= 2");
  if (s.log_scale && s.min <= 0.0) throw std::invalid_argument("memory sweep: log spacing needs MIN > 0");
  return s;
}

std::vector<double> memory_grid(const SweepSpec& spec) {
  std::vector<double> g(static_cast<std::size_t>(spec.points));
  const double last = static_cast<double>(spec.points - 1);
  for (std::int64_t k = 0; k < spec.points; ++k) {
    const double t = static_cast<double>(k) / last;
    g[static_cast<std::size_t>(k)] =
        spec.log_scale ? spec.min * std::pow(spec.max / spec.min, t) : spec.min + (spec.max - spec.min) * t;
  }
  g.back() = spec.max;
  return g;
}

std::vector<SweepRow> sweep(const SystemConfig& config, std::span<const double> memory_grid) {
  const auto table = pama::build_threshold_table(config);
  std::vector<SweepRow> rows;
  rows.reserve(memory_grid.size());
  for (double m : memory_grid) rows.push_back(evaluate(config, table, m));
  return rows;
}

std::vector<SweepRow> sweep_parallel(const SystemConfig& config, std::span<const double> memory_grid) {
  const auto table = pama::build_threshold_table(config);
  std::vector<SweepRow> rows(memory_grid.size());
  const auto n = static_cast<std::int64_t>(memory_grid.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t k = 0; k < n; ++k)
    rows[static_cast<std::size_t>(k)] = evaluate(config, table, memory_grid[static_cast<std::size_t>(k)]);
  return rows;
}

}  // namespace mlcache::kernels
