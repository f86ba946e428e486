#include "mlcache/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <omp.h>

#include "mlcache/pama.hpp"

namespace mlcache::bounds {

namespace {

constexpr std::int64_t kExhaustiveCutsetLimit = 10'000;

std::string join_levels(std::span<const std::size_t> set) {
  std::string s;
  for (std::size_t k = 0; k < set.size(); ++k) {
    if (k) s += ',';
    s += std::to_string(set[k] + 1);
  }
  return s;
}

double dbl(std::int64_t x) { return static_cast<double>(x); }

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

void push_floor_ceil(std::vector<std::int64_t>& out, double x) {
  if (!(x > 0.0) || x > 9e15) return;
  out.push_back(static_cast<std::int64_t>(std::floor(x)));
  out.push_back(static_cast<std::int64_t>(std::ceil(x)));
}

void normalize_divisors(std::vector<std::int64_t>& b) {
  std::erase_if(b, [](std::int64_t x) { return x < 1; });
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
}

std::vector<std::int64_t> base_divisors(const SystemConfig& config) {
  std::vector<std::int64_t> b{1};
  std::int64_t max_n = 1;
  for (const auto& l : config.levels) {
    push_floor_ceil(b, dbl(l.n_files) / (dbl(l.access_degree) * dbl(l.users_per_cache)));
    max_n = std::max(max_n, l.n_files);
  }
  for (std::int64_t p = 2; p <= max_n; p *= 2) b.push_back(p);
  return b;
}

// Right endpoints of the pieces on which ceil(v/U) and floor(N/v) are both
// constant. The cut-set bound grows with v inside a piece, so its maximum
// over v is attained on this set.
std::vector<std::int64_t> cutset_candidates(const LevelSpec& l, std::int64_t K) {
  const std::int64_t vmax = std::min(K * l.users_per_cache, l.n_files);
  std::vector<std::int64_t> v;
  if (vmax <= kExhaustiveCutsetLimit) {
    v.resize(static_cast<std::size_t>(vmax));
    std::iota(v.begin(), v.end(), std::int64_t{1});
    return v;
  }
  for (std::int64_t k = 1; k * l.users_per_cache <= vmax; ++k) v.push_back(k * l.users_per_cache);
  for (std::int64_t x = 1; x <= vmax;) {
    const std::int64_t q = l.n_files / x;
    const std::int64_t right = std::min(vmax, l.n_files / q);
    v.push_back(right);
    x = right + 1;
  }
  v.push_back(vmax);
  normalize_divisors(v);
  return v;
}

std::vector<std::size_t> admissible_set(const SystemConfig& config, std::size_t l) {
  // Every min{} term is non-negative, so the largest admissible A dominates
  // all of its subsets.
  std::vector<std::size_t> a;
  for (std::size_t j = 0; j < config.levels.size(); ++j) {
    if (j == l) continue;
    if (more_popular(config.levels[j], config.levels[l]) &&
        config.levels[j].access_degree <= config.levels[l].access_degree)
      a.push_back(j);
  }
  return a;
}

double set_term(const SystemConfig& config, std::span<const std::size_t> set, std::int64_t b) {
  double sum = 0.0;
  for (auto j : set) {
    const auto& lv = config.levels[j];
    sum += std::min(dbl(lv.users_per_cache), dbl(lv.n_files) / (dbl(b) * dbl(lv.access_degree)));
  }
  return sum;
}

void offer(BoundWitness& best, BoundWitness&& candidate) {
  if (candidate.value > best.value) best = std::move(candidate);
}

}  // namespace

std::string to_string(BoundKind kind) {
  switch (kind) {
    case BoundKind::kTrivialZero: return "trivial_zero";
    case BoundKind::kCutset: return "cutset";
    case BoundKind::kNonCutset: return "noncutset";
    case BoundKind::kCorollary: return "corollary";
  }
  return "unknown";
}

std::string BoundWitness::params() const {
  switch (kind) {
    case BoundKind::kTrivialZero: return "";
    case BoundKind::kCutset:
      return "i=" + std::to_string(level + 1) + ";v=" + std::to_string(users);
    case BoundKind::kNonCutset:
      return "l=" + std::to_string(level + 1) + ";A=" + join_levels(set) + ";s=" +
             std::to_string(window) + ";b=" + std::to_string(divisor);
    case BoundKind::kCorollary:
      return "A=" + join_levels(set) + ";b=" + std::to_string(divisor);
  }
  return "";
}

GapConstants gap_constants(const SystemConfig& config) {
  GapConstants c;
  c.gamma = 1.0 / (1.0 - std::exp(-1.0));
  const double D = dbl(config.max_degree());
  const double L = dbl(static_cast<std::int64_t>(config.num_levels()));
  c.k0 = 16.0 * (D + 1.0) * (D + 1.0) * (c.gamma * L + 1.0);
  return c;
}

double order_optimality_factor(const SystemConfig& config) {
  const double D = dbl(config.max_degree());
  const double L = dbl(static_cast<std::int64_t>(config.num_levels()));
  return 37.0 * std::pow(D + 1.0, 3) * std::pow(L, 3);
}

BoundWitness cutset_bound(const SystemConfig& config, std::size_t level, std::int64_t v) {
  const auto& l = config.levels.at(level);
  if (v < 1 || v > config.num_caches * l.users_per_cache || v > l.n_files)
    throw std::invalid_argument("cutset_bound: v must lie in [1, min(K U_i, N_i)]");
  const double coeff = dbl(ceil_div(v, l.users_per_cache) + l.access_degree - 1) / dbl(l.n_files / v);
  BoundWitness w;
  w.kind = BoundKind::kCutset;
  w.level = level;
  w.users = v;
  w.value = std::max(0.0, dbl(v) - coeff * config.memory);
  return w;
}

BoundWitness noncutset_bound(const SystemConfig& config, std::size_t l,
                             std::span<const std::size_t> set, std::int64_t s, std::int64_t b) {
  const auto& lv = config.levels.at(l);
  if (std::find(set.begin(), set.end(), l) != set.end())
    throw std::invalid_argument("noncutset_bound: l must not belong to A");
  for (auto j : set)
    if (j >= config.levels.size()) throw std::invalid_argument("noncutset_bound: level out of range");
  if (s < lv.access_degree || s > config.num_caches)
    throw std::invalid_argument("noncutset_bound: s must lie in [d_l, K]");
  if (b < 1) throw std::invalid_argument("noncutset_bound: b must be >= 1");
  const double D = dbl(config.max_degree());
  const double l_term =
      std::min(dbl(s - lv.access_degree + 1) * dbl(lv.users_per_cache), dbl(lv.n_files) / (dbl(s) * dbl(b)));
  BoundWitness w;
  w.kind = BoundKind::kNonCutset;
  w.level = l;
  w.set.assign(set.begin(), set.end());
  w.window = s;
  w.divisor = b;
  w.value = std::max(0.0, l_term / (D + 1.0) + set_term(config, set, b) - config.memory / dbl(b));
  return w;
}

BoundWitness corollary_bound(const SystemConfig& config, std::span<const std::size_t> set,
                             std::int64_t b) {
  if (set.empty()) throw std::invalid_argument("corollary_bound: A must be non-empty");
  for (auto j : set)
    if (j >= config.levels.size()) throw std::invalid_argument("corollary_bound: level out of range");
  if (b < 1) throw std::invalid_argument("corollary_bound: b must be >= 1");
  BoundWitness w;
  w.kind = BoundKind::kCorollary;
  w.set.assign(set.begin(), set.end());
  w.divisor = b;
  w.value = std::max(0.0, set_term(config, set, b) - config.memory / dbl(b));
  return w;
}

std::vector<std::int64_t> critical_divisors(const SystemConfig& config, std::size_t l, std::int64_t s) {
  auto b = base_divisors(config);
  const auto& lv = config.levels.at(l);
  const double n_over_u = dbl(lv.n_files) / dbl(lv.users_per_cache);
  push_floor_ceil(b, n_over_u / (dbl(s) * dbl(s - lv.access_degree + 1)));
  const auto sq = static_cast<std::int64_t>(std::floor(n_over_u / (dbl(s) * dbl(s))));
  for (auto x : {sq - 1, sq, sq + 1}) b.push_back(x);
  normalize_divisors(b);
  return b;
}

BoundWitness best_lower_bound(const SystemConfig& config) {
  BoundWitness best;  // trivial zero
  const std::size_t L = config.levels.size();

  for (std::size_t i = 0; i < L; ++i) {
    const auto& l = config.levels[i];
    for (auto v : cutset_candidates(l, config.num_caches)) offer(best, cutset_bound(config, i, v));
  }

  for (std::size_t l = 0; l < L; ++l) {
    const auto set = admissible_set(config, l);
    for (std::int64_t s = config.levels[l].access_degree; s <= config.num_caches; ++s)
      for (auto b : critical_divisors(config, l, s)) offer(best, noncutset_bound(config, l, set, s, b));
  }

  std::vector<std::size_t> all(L);
  std::iota(all.begin(), all.end(), std::size_t{0});
  auto divisors = base_divisors(config);
  normalize_divisors(divisors);
  for (auto b : divisors) offer(best, corollary_bound(config, all, b));
  return best;
}

namespace {

GapPoint evaluate_gap_point(const SystemConfig& config, const pama::ThresholdTable& table, double m) {
  GapPoint p;
  p.memory = m;
  const auto at = config.with_memory(m);
  p.achievable = pama::total_rate_exact(at, pama::pama(config, table, m)).total;
  p.bound = best_lower_bound(at);
  if (p.achievable <= 0.0)
    p.ratio = 1.0;
  else if (p.bound.value <= 0.0)
    p.ratio = std::numeric_limits<double>::infinity();
  else
    p.ratio = p.achievable / p.bound.value;
  return p;
}

void summarize(GapProfile& g) {
  g.max_ratio = g.points.empty() ? 1.0 : g.points.front().ratio;
  g.argmax = 0;
  for (std::size_t k = 1; k < g.points.size(); ++k)
    if (g.points[k].ratio > g.max_ratio) {
      g.max_ratio = g.points[k].ratio;
      g.argmax = k;
    }
}

}  // namespace

GapProfile gap_profile(const SystemConfig& config, std::span<const double> memory_grid) {
  const auto table = pama::build_threshold_table(config);
  GapProfile g;
  g.points.reserve(memory_grid.size());
  for (double m : memory_grid) g.points.push_back(evaluate_gap_point(config, table, m));
  summarize(g);
  return g;
}

GapProfile gap_profile_parallel(const SystemConfig& config, std::span<const double> memory_grid) {
  const auto table = pama::build_threshold_table(config);
  GapProfile g;
  g.points.resize(memory_grid.size());
  const auto n = static_cast<std::int64_t>(memory_grid.size());
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t k = 0; k < n; ++k)
    g.points[static_cast<std::size_t>(k)] =
        evaluate_gap_point(config, table, memory_grid[static_cast<std::size_t>(k)]);
  summarize(g);
  return g;
}

}  // namespace mlcache::bounds
