#include "mlcache/pama.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <omp.h>

#include "mlcache/rate.hpp"

namespace mlcache::pama {

std::vector<std::size_t> Partition::members(Role r) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < roles_.size(); ++i)
    if (roles_[i] == r) out.push_back(i);
  return out;
}

std::string Partition::to_string() const {
  auto join = [](const std::vector<std::size_t>& v) {
    std::string s;
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (k) s += ',';
      s += std::to_string(v[k] + 1);
    }
    return s;
  };
  return "H=" + join(zero()) + ";I=" + join(shared()) + ";J=" + join(full());
}

double sqrt_mass(const SystemConfig& config, const std::vector<std::size_t>& set) {
  double s = 0.0;
  for (auto i : set) {
    const auto& l = config.levels.at(i);
    s += std::sqrt(static_cast<double>(l.n_files) * static_cast<double>(l.users_per_cache));
  }
  return s;
}

double storage(const SystemConfig& config, const std::vector<std::size_t>& set) {
  double t = 0.0;
  for (auto i : set) t += config.levels.at(i).full_storage();
  return t;
}

namespace {

double sqrt_ratio(const LevelSpec& l) {
  return std::sqrt(static_cast<double>(l.n_files) / static_cast<double>(l.users_per_cache));
}

double lower_threshold(const SystemConfig& c, std::size_t i) {
  return sqrt_ratio(c.levels[i]) / static_cast<double>(c.num_caches);
}

double upper_threshold(const SystemConfig& c, std::size_t i) {
  return sqrt_ratio(c.levels[i]) / static_cast<double>(c.levels[i].access_degree);
}

}  // namespace

ThresholdTable build_threshold_table(const SystemConfig& config) {
  const std::size_t L = config.levels.size();
  std::vector<Breakpoint> pts;
  pts.reserve(2 * L);
  for (std::size_t i = 0; i < L; ++i) {
    pts.push_back({lower_threshold(config, i), 0.0, ThresholdKind::kEnterShared, i, {}});
    pts.push_back({upper_threshold(config, i), 0.0, ThresholdKind::kEnterFull, i, {}});
  }
  std::stable_sort(pts.begin(), pts.end(), [](const Breakpoint& a, const Breakpoint& b) {
    if (a.x != b.x) return a.x < b.x;
    if (a.kind != b.kind) return a.kind == ThresholdKind::kEnterShared;
    return a.level < b.level;
  });

  // Running S_I and T_J are updated incrementally: O(L) per step after sort.
  Partition current(L);
  double s_shared = 0.0;
  double t_full = 0.0;
  for (auto& p : pts) {
    p.y = p.x * s_shared + t_full;
    const auto& l = config.levels[p.level];
    const double root = std::sqrt(static_cast<double>(l.n_files) * static_cast<double>(l.users_per_cache));
    if (p.kind == ThresholdKind::kEnterShared) {
      current.set(p.level, Role::kShared);
      s_shared += root;
    } else {
      current.set(p.level, Role::kFull);
      t_full += l.full_storage();
      // Recompute rather than subtract so S_I is exactly 0 once I empties.
      s_shared = sqrt_mass(config, current.shared());
    }
    p.after = current;
  }
  return ThresholdTable(std::move(pts), L);
}

Partition get_partition(const ThresholdTable& table, double memory) {
  const auto& pts = table.points();
  auto it = std::upper_bound(pts.begin(), pts.end(), memory,
                             [](double m, const Breakpoint& b) { return m < b.y; });
  if (it == pts.begin()) return Partition(table.num_levels());
  return std::prev(it)->after;
}

double Allocation::total() const { return std::accumulate(shares.begin(), shares.end(), 0.0); }

Allocation pama_allocate(const SystemConfig& config, const Partition& partition) {
  Allocation a;
  a.partition = partition;
  a.shares.assign(config.levels.size(), 0.0);
  const auto shared = partition.shared();
  const auto full = partition.full();
  for (auto j : full) a.shares[j] = config.levels[j].full_storage();
  if (!shared.empty()) {
    const double s = sqrt_mass(config, shared);
    const double remaining = std::max(0.0, config.memory - storage(config, full));
    for (auto i : shared) {
      const auto& l = config.levels[i];
      a.shares[i] = std::sqrt(static_cast<double>(l.n_files) * static_cast<double>(l.users_per_cache)) /
                    s * remaining;
    }
  }
  return a;
}

Allocation pama(const SystemConfig& config, const ThresholdTable& table, double memory) {
  return pama_allocate(config.with_memory(memory), get_partition(table, memory));
}

Allocation pama(const SystemConfig& config) {
  return pama(config, build_threshold_table(config), config.memory);
}

RateBreakdown total_rate_exact(const SystemConfig& config, const std::vector<double>& shares) {
  if (shares.size() != config.levels.size())
    throw std::invalid_argument("total_rate_exact: one share per level required");
  RateBreakdown out;
  out.per_level.reserve(shares.size());
  for (std::size_t i = 0; i < shares.size(); ++i) {
    const double r = rate::single_level_rate_clamped(shares[i], config.num_caches, config.levels[i]);
    out.per_level.push_back(r);
    out.total += r;
  }
  return out;
}

RateBreakdown total_rate_exact(const SystemConfig& config, const Allocation& allocation) {
  return total_rate_exact(config, allocation.shares);
}

bool is_m_feasible(const SystemConfig& config, const Partition& partition) {
  const auto shared = partition.shared();
  if (shared.empty()) return true;
  const auto full = partition.full();
  const double s = sqrt_mass(config, shared);
  const double normalized = (config.memory - storage(config, full)) / s;
  const double K = static_cast<double>(config.num_caches);
  for (auto h : partition.zero()) {
    const double slack = (static_cast<double>(config.levels[h].n_files) / K) / s;
    if (!(normalized < lower_threshold(config, h) + slack)) return false;
  }
  for (auto i : shared)
    if (!(lower_threshold(config, i) <= normalized && normalized <= upper_threshold(config, i)))
      return false;
  for (auto j : full)
    if (!(upper_threshold(config, j) < normalized)) return false;
  return true;
}

ClosedFormRate total_rate_closed_form(const SystemConfig& config, const Partition& partition) {
  const double K = static_cast<double>(config.num_caches);
  const auto shared = partition.shared();
  double value = 0.0;
  for (auto h : partition.zero()) value += K * static_cast<double>(config.levels[h].users_per_cache);
  if (!shared.empty()) {
    const double denom = config.memory - storage(config, partition.full());
    if (denom == 0.0)
      throw std::domain_error("closed-form rate undefined at M = T_J with a non-empty shared set");
    const double s = sqrt_mass(config, shared);
    value += s * s / denom;
    for (auto i : shared)
      value -= static_cast<double>(config.levels[i].access_degree * config.levels[i].users_per_cache);
  }
  ClosedFormRate out;
  out.value = std::clamp(value, 0.0, config.uncached_rate());
  out.in_validity = is_m_feasible(config, partition);
  return out;
}

namespace {

struct GridContext {
  const SystemConfig* config;
  std::int64_t n;  // grid points per unit: alpha = count / n
  std::vector<double> caps;

  double share(std::size_t level, std::int64_t count) const {
    return std::min(static_cast<double>(count) / static_cast<double>(n) * config->memory, caps[level]);
  }

  double evaluate(const std::vector<std::int64_t>& counts) const {
    double r = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i)
      r += rate::single_level_rate_clamped(share(i, counts[i]), config->num_caches, config->levels[i]);
    return r;
  }
};

struct GridBest {
  double rate = std::numeric_limits<double>::infinity();
  std::vector<std::int64_t> counts;
  std::size_t evaluated = 0;
};

// Depth-first enumeration in lexicographic order of the count vector; the
// first strict minimum wins so the result is order-deterministic.
void enumerate_grid(const GridContext& ctx, std::vector<std::int64_t>& counts, std::size_t pos,
                    std::int64_t remaining, GridBest& best) {
  if (pos == counts.size()) {
    const double r = ctx.evaluate(counts);
    ++best.evaluated;
    if (r < best.rate) {
      best.rate = r;
      best.counts = counts;
    }
    return;
  }
  for (std::int64_t c = 0; c <= remaining; ++c) {
    counts[pos] = c;
    enumerate_grid(ctx, counts, pos + 1, remaining - c, best);
  }
  counts[pos] = 0;
}

GridContext make_grid_context(const SystemConfig& config, double grid_step) {
  if (!(grid_step > 0.0) || grid_step > 1.0)
    throw std::invalid_argument("grid_search_alpha: grid step must be in (0, 1]");
  GridContext ctx{&config, std::max<std::int64_t>(1, std::llround(1.0 / grid_step)), {}};
  for (const auto& l : config.levels) ctx.caps.push_back(l.full_storage());
  return ctx;
}

GridSearchResult finish_grid(const GridContext& ctx, const GridBest& best) {
  GridSearchResult out;
  out.rate = best.rate;
  out.evaluated = best.evaluated;
  const std::size_t L = best.counts.size();
  out.allocation.shares.resize(L);
  out.allocation.partition = Partition(L);
  std::int64_t used = 0;
  for (std::size_t i = 0; i < L; ++i) {
    const double s = ctx.share(i, best.counts[i]);
    out.allocation.shares[i] = s;
    used += best.counts[i];
    if (s >= ctx.caps[i])
      out.allocation.partition.set(i, Role::kFull);
    else if (s > 0.0)
      out.allocation.partition.set(i, Role::kShared);
  }
  auto neighbor = best.counts;
  for (std::size_t i = 0; i < L; ++i) {
    for (int delta : {-1, +1}) {
      const auto c = best.counts[i] + delta;
      if (c < 0 || used + delta > ctx.n) continue;
      neighbor[i] = c;
      out.lipschitz_slack = std::max(out.lipschitz_slack, std::abs(ctx.evaluate(neighbor) - best.rate));
      neighbor[i] = best.counts[i];
    }
  }
  return out;
}

}  // namespace

GridSearchResult grid_search_alpha(const SystemConfig& config, double grid_step) {
  const auto ctx = make_grid_context(config, grid_step);
  std::vector<std::int64_t> counts(config.levels.size(), 0);
  GridBest best;
  enumerate_grid(ctx, counts, 0, ctx.n, best);
  return finish_grid(ctx, best);
}

GridSearchResult grid_search_alpha_parallel(const SystemConfig& config, double grid_step) {
  const auto ctx = make_grid_context(config, grid_step);
  const std::size_t L = config.levels.size();
  if (L < 2) return grid_search_alpha(config, grid_step);

  // One slice per value of the first coordinate, merged in slice order.
  std::vector<GridBest> slices(static_cast<std::size_t>(ctx.n + 1));
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t c0 = 0; c0 <= ctx.n; ++c0) {
    std::vector<std::int64_t> counts(L, 0);
    counts[0] = c0;
    enumerate_grid(ctx, counts, 1, ctx.n - c0, slices[static_cast<std::size_t>(c0)]);
  }
  GridBest best;
  for (auto& s : slices) {
    best.evaluated += s.evaluated;
    if (s.rate < best.rate) {
      best.rate = s.rate;
      best.counts = std::move(s.counts);
    }
  }
  return finish_grid(ctx, best);
}

AccessStructure optimize_access_structure(const SystemConfig& config, std::int64_t max_degree,
                                          double avg_degree) {
  if (max_degree < 1) throw std::invalid_argument("optimize_access_structure: max_degree must be >= 1");
  const std::size_t L = config.levels.size();
  const std::int64_t top = std::min(max_degree, config.num_caches);
  double total_users = 0.0;
  for (const auto& l : config.levels) total_users += static_cast<double>(l.users_per_cache);
  const double budget = avg_degree * total_users * (1.0 + 1e-12);

  std::vector<std::int64_t> degrees(L, 1);
  AccessStructure best;
  bool found = false;
  std::int64_t best_sum = 0;

  std::function<void(std::size_t, double)> visit = [&](std::size_t pos, double weighted) {
    if (pos == L) {
      if (weighted > budget) return;
      SystemConfig c = config;
      for (std::size_t i = 0; i < L; ++i) c.levels[i].access_degree = degrees[i];
      const double r = total_rate_exact(c, pama(c)).total;
      const auto sum = std::accumulate(degrees.begin(), degrees.end(), std::int64_t{0});
      const double tol = 1e-12 * std::max(1.0, std::abs(best.rate));
      // Lexicographic order of the enumeration settles the last tie.
      if (!found || r < best.rate - tol || (std::abs(r - best.rate) <= tol && sum < best_sum)) {
        best.degrees = degrees;
        best.rate = r;
        best_sum = sum;
        found = true;
      }
      return;
    }
    const double u = static_cast<double>(config.levels[pos].users_per_cache);
    for (std::int64_t d = 1; d <= top; ++d) {
      degrees[pos] = d;
      visit(pos + 1, weighted + u * static_cast<double>(d));
    }
    degrees[pos] = 1;
  };
  visit(0, 0.0);
  if (!found)
    throw std::invalid_argument("optimize_access_structure: no degree vector satisfies the constraints");
  return best;
}

}  // namespace mlcache::pama
