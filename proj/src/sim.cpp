#include "mlcache/sim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>

#include <omp.h>

#include "mlcache/pama.hpp"
#include "mlcache/rate.hpp"
#include "mlcache/rng.hpp"

namespace mlcache::sim {

std::int64_t Coloring::num_edge() const { return std::count(edge.begin(), edge.end(), true); }

std::int64_t Coloring::cache_of_color(std::int64_t cache, std::int64_t color) const {
  for (std::int64_t j = 0; j < degree; ++j) {
    const auto k = (cache + j) % num_caches;
    if (cache_colors[static_cast<std::size_t>(k)] == color) return k;
  }
  return -1;
}

Coloring build_coloring(std::int64_t num_caches, std::int64_t users_per_cache, std::int64_t degree) {
  if (num_caches < 1 || users_per_cache < 1 || degree < 1)
    throw std::invalid_argument("build_coloring: K, U and d must be positive");
  if (degree > num_caches) throw std::invalid_argument("build_coloring: d must not exceed K");
  Coloring c;
  c.num_caches = num_caches;
  c.users_per_cache = users_per_cache;
  c.degree = degree;
  const auto first_edge = num_caches - num_caches % degree;
  for (std::int64_t k = 0; k < num_caches; ++k) {
    c.cache_colors.push_back(k % degree);
    c.edge.push_back(k >= first_edge);
  }
  return c;
}

DemandProfile worst_case_demands(const SystemConfig& config) {
  DemandProfile d;
  for (std::size_t i = 0; i < config.levels.size(); ++i) {
    const auto& l = config.levels[i];
    if (l.n_files < config.num_caches * l.users_per_cache)
      throw std::invalid_argument("worst_case_demands: level " + std::to_string(i + 1) +
                                  " has fewer files than users");
    for (std::int64_t c = 0; c < config.num_caches; ++c)
      for (std::int64_t u = 0; u < l.users_per_cache; ++u) d.push_back({c, u, i, c * l.users_per_cache + u});
  }
  return d;
}

DemandProfile random_demands(const SystemConfig& config, std::uint64_t seed) {
  DemandProfile d;
  for (std::size_t i = 0; i < config.levels.size(); ++i) {
    const auto& l = config.levels[i];
    RandomStream rng(seed, {stream::kDemand, i});
    for (std::int64_t c = 0; c < config.num_caches; ++c)
      for (std::int64_t u = 0; u < l.users_per_cache; ++u)
        d.push_back({c, u, i, static_cast<std::int64_t>(rng.uniform_index(static_cast<std::uint64_t>(l.n_files)))});
  }
  return d;
}

std::int64_t BitSet::count() const {
  std::int64_t n = 0;
  for (auto w : words_) n += std::popcount(w);
  return n;
}

SubfileRange subfile_range(std::int64_t file_bits, std::int64_t degree, std::int64_t color) {
  return {color * file_bits / degree, (color + 1) * file_bits / degree};
}

std::int64_t PlacementState::stored_bits(std::int64_t cache) const {
  std::int64_t n = 0;
  for (const auto& l : levels)
    for (std::int64_t f = 0; f < l.n_files; ++f) n += l.at(cache, f).count();
  return n;
}

PlacementState place(const SystemConfig& config, std::span<const double> shares, std::int64_t file_bits,
                     std::uint64_t seed) {
  if (file_bits < 64) throw std::invalid_argument("place: F must be at least 64 bits");
  if (shares.size() != config.levels.size()) throw std::invalid_argument("place: one share per level required");
  PlacementState p;
  p.file_size_bits = file_bits;
  p.seed = seed;
  p.num_caches = config.num_caches;
  for (std::size_t i = 0; i < config.levels.size(); ++i) {
    const auto& l = config.levels[i];
    const double raw = static_cast<double>(l.access_degree) * shares[i] / static_cast<double>(l.n_files);
    if (raw > 1.0 + 1e-9 || raw < 0.0)
      throw std::invalid_argument("place: level " + std::to_string(i + 1) + " stored fraction " +
                                  std::to_string(raw) + " outside [0, 1]");
    PlacementState::Level pl;
    pl.n_files = l.n_files;
    pl.degree = l.access_degree;
    pl.fraction = std::clamp(raw, 0.0, 1.0);
    pl.stored.reserve(static_cast<std::size_t>(config.num_caches * l.n_files));
    for (std::int64_t c = 0; c < config.num_caches; ++c) {
      const auto range = subfile_range(file_bits, l.access_degree, c % l.access_degree);
      for (std::int64_t f = 0; f < l.n_files; ++f) {
        BitSet bits(range.size());
        if (pl.fraction >= 1.0) {
          for (std::int64_t b = 0; b < range.size(); ++b) bits.set(b);
        } else if (pl.fraction > 0.0) {
          RandomStream rng(seed, {stream::kPlacement, static_cast<std::uint64_t>(c), i,
                                  static_cast<std::uint64_t>(f)});
          for (std::int64_t b = 0; b < range.size(); ++b)
            if (rng.bernoulli(pl.fraction)) bits.set(b);
        }
        pl.stored.push_back(std::move(bits));
      }
    }
    p.levels.push_back(std::move(pl));
  }
  return p;
}

BitSet file_content(std::uint64_t seed, std::size_t level, std::int64_t file, std::int64_t file_bits) {
  BitSet bits(file_bits);
  RandomStream rng(seed, {stream::kFileContent, level, static_cast<std::uint64_t>(file)});
  for (std::int64_t b = 0; b < file_bits; b += 64) {
    const auto word = rng.next();
    for (std::int64_t j = 0; j < 64 && b + j < file_bits; ++j)
      if ((word >> j) & 1U) bits.set(b + j);
  }
  return bits;
}

namespace {

struct Member {
  std::size_t demand;
  std::int64_t cache;
};

struct Fallback {
  std::size_t demand;
  std::int64_t color;
  std::int64_t cache;  // -1: no cache of this color in reach
};

struct LevelPlan {
  Coloring coloring;
  std::map<std::pair<std::int64_t, std::int64_t>, std::vector<Member>> subsystems;  // (group, color)
  std::vector<Fallback> uncoded;
};

// Splits the level's demands into (group, color) subsystems plus uncoded
// fallbacks for edge users and colors missing from a user's window.
LevelPlan plan_level(const SystemConfig& config, std::size_t level, const DemandProfile& demands,
                     std::int64_t slots) {
  const auto& l = config.levels[level];
  LevelPlan plan{build_coloring(config.num_caches, slots, l.access_degree), {}, {}};
  for (std::size_t k = 0; k < demands.size(); ++k) {
    const auto& dm = demands[k];
    if (dm.level != level) continue;
    const bool edge = plan.coloring.is_edge(dm.cache);
    for (std::int64_t color = 0; color < l.access_degree; ++color) {
      const auto cache = plan.coloring.cache_of_color(dm.cache, color);
      if (edge || cache < 0)
        plan.uncoded.push_back({k, color, cache});
      else
        plan.subsystems[{plan.coloring.group(dm.cache, dm.slot), color}].push_back({k, cache});
    }
  }
  return plan;
}

void check_profile(const SystemConfig& config, const DemandProfile& demands, bool exact_slots) {
  std::set<std::tuple<std::size_t, std::int64_t, std::int64_t>> seen;
  for (const auto& d : demands) {
    if (d.level >= config.levels.size()) throw std::invalid_argument("demand for an unknown level");
    const auto& l = config.levels[d.level];
    if (d.cache < 0 || d.cache >= config.num_caches) throw std::invalid_argument("demand at an unknown cache");
    if (d.file < 0 || d.file >= l.n_files) throw std::invalid_argument("demand for a file that does not exist");
    if (d.slot < 0 || (exact_slots && d.slot >= l.users_per_cache))
      throw std::invalid_argument("demand slot out of range");
    if (!seen.insert({d.level, d.cache, d.slot}).second)
      throw std::invalid_argument("two demands for the same user");
  }
  if (exact_slots) {
    std::size_t expected = 0;
    for (const auto& l : config.levels) expected += static_cast<std::size_t>(config.num_caches * l.users_per_cache);
    if (seen.size() != expected) throw std::invalid_argument("missing demand: every user must request a file");
  }
}

std::int64_t max_slots(const DemandProfile& demands, std::size_t level) {
  std::int64_t s = 1;
  for (const auto& d : demands)
    if (d.level == level) s = std::max(s, d.slot + 1);
  return s;
}

[[noreturn]] void decode_failure(const std::string& what) {
  throw std::logic_error("bit-exact delivery: " + what);
}

}  // namespace

DeliveryLog deliver_bit_exact(const SystemConfig& config, const PlacementState& placement,
                              const DemandProfile& demands) {
  check_profile(config, demands, true);
  if (placement.levels.size() != config.levels.size() || placement.num_caches != config.num_caches)
    throw std::invalid_argument("deliver_bit_exact: placement does not match the config");
  const auto F = placement.file_size_bits;

  std::map<std::pair<std::size_t, std::int64_t>, BitSet> content;
  for (const auto& d : demands)
    if (!content.count({d.level, d.file}))
      content.emplace(std::pair{d.level, d.file}, file_content(placement.seed, d.level, d.file, F));

  // recovered[k][b] = -1 unknown, else the decoded bit of demand k.
  std::vector<std::vector<std::int8_t>> recovered(demands.size(), std::vector<std::int8_t>(F, -1));
  DeliveryLog log;

  for (std::size_t i = 0; i < config.levels.size(); ++i) {
    const auto& pl = placement.levels[i];
    const auto plan = plan_level(config, i, demands, config.levels[i].users_per_cache);

    for (const auto& [key, members] : plan.subsystems) {
      const auto [group, color] = key;
      const auto range = subfile_range(F, pl.degree, color);
      const auto n = members.size();
      if (n > 64) throw std::invalid_argument("deliver_bit_exact: more than 64 users in one subsystem");
      // segments[mask][u]: offsets wanted by u and stored exactly at the
      // caches of mask \ {u}.
      std::map<std::uint64_t, std::vector<std::vector<std::int64_t>>> segments;
      for (std::size_t u = 0; u < n; ++u) {
        const auto file = demands[members[u].demand].file;
        for (std::int64_t b = 0; b < range.size(); ++b) {
          if (pl.at(members[u].cache, file).test(b)) continue;
          std::uint64_t mask = std::uint64_t{1} << u;
          for (std::size_t w = 0; w < n; ++w)
            if (w != u && pl.at(members[w].cache, file).test(b)) mask |= std::uint64_t{1} << w;
          auto& seg = segments[mask];
          if (seg.empty()) seg.resize(n);
          seg[u].push_back(b);
        }
      }
      std::int64_t bits = 0;
      for (const auto& [mask, seg] : segments) {
        std::size_t len = 0;
        for (const auto& s : seg) len = std::max(len, s.size());
        std::vector<std::uint8_t> payload(len, 0);
        for (std::size_t u = 0; u < n; ++u) {
          const auto& truth = content.at({i, demands[members[u].demand].file});
          for (std::size_t j = 0; j < seg[u].size(); ++j) payload[j] ^= truth.test(range.begin + seg[u][j]);
        }
        bits += static_cast<std::int64_t>(len);
        // Every member of the mask cancels the others' segments with what
        // its own cache holds.
        for (std::size_t v = 0; v < n; ++v) {
          if (!((mask >> v) & 1U) || seg[v].empty()) continue;
          for (std::size_t j = 0; j < seg[v].size(); ++j) {
            std::uint8_t bit = payload[j];
            for (std::size_t u = 0; u < n; ++u) {
              if (u == v || j >= seg[u].size()) continue;
              const auto file = demands[members[u].demand].file;
              if (!pl.at(members[v].cache, file).test(seg[u][j])) decode_failure("interfering bit not cached");
              bit ^= content.at({i, file}).test(range.begin + seg[u][j]);
            }
            recovered[members[v].demand][static_cast<std::size_t>(range.begin + seg[v][j])] =
                static_cast<std::int8_t>(bit);
          }
        }
      }
      log.loads.push_back({i, group, color, static_cast<std::int64_t>(n), bits});
      log.broadcast_bits += bits;
    }

    for (const auto& fb : plan.uncoded) {
      const auto range = subfile_range(F, pl.degree, fb.color);
      const auto file = demands[fb.demand].file;
      const auto& truth = content.at({i, file});
      for (std::int64_t b = 0; b < range.size(); ++b) {
        if (fb.cache >= 0 && pl.at(fb.cache, file).test(b)) continue;
        recovered[fb.demand][static_cast<std::size_t>(range.begin + b)] =
            static_cast<std::int8_t>(truth.test(range.begin + b));
        ++log.uncoded_bits;
        ++log.broadcast_bits;
      }
    }

    // Reassemble: the remaining bits come from the caches the user reads.
    const auto& coloring = plan.coloring;
    for (std::size_t k = 0; k < demands.size(); ++k) {
      const auto& d = demands[k];
      if (d.level != i) continue;
      const auto& truth = content.at({i, d.file});
      for (std::int64_t color = 0; color < pl.degree; ++color) {
        const auto range = subfile_range(F, pl.degree, color);
        const auto cache = coloring.cache_of_color(d.cache, color);
        for (std::int64_t b = 0; b < range.size(); ++b) {
          auto& slot = recovered[k][static_cast<std::size_t>(range.begin + b)];
          if (slot < 0) {
            if (cache < 0 || !pl.at(cache, d.file).test(b)) decode_failure("bit neither cached nor delivered");
            slot = static_cast<std::int8_t>(truth.test(range.begin + b));
          }
          if (static_cast<bool>(slot) != truth.test(range.begin + b)) decode_failure("wrong bit decoded");
        }
      }
      ++log.decoded_users;
    }
  }
  log.empirical_rate = static_cast<double>(log.broadcast_bits) / static_cast<double>(F);
  return log;
}

double expected_rate(const SystemConfig& config, std::span<const double> shares, const DemandProfile& demands) {
  check_profile(config, demands, false);
  if (shares.size() != config.levels.size()) throw std::invalid_argument("expected_rate: one share per level required");
  double total = 0.0;
  std::set<std::pair<std::size_t, std::int64_t>> distinct;
  for (const auto& d : demands) distinct.insert({d.level, d.file});
  for (std::size_t i = 0; i < config.levels.size(); ++i) {
    const auto& l = config.levels[i];
    const double d = static_cast<double>(l.access_degree);
    const double mu = std::clamp(d * shares[i] / static_cast<double>(l.n_files), 0.0, 1.0);
    const auto plan = plan_level(config, i, demands, max_slots(demands, i));
    for (const auto& [key, members] : plan.subsystems) {
      std::set<std::int64_t> files;
      for (const auto& m : members) files.insert(demands[m.demand].file);
      total += rate::coded_factor(mu, static_cast<double>(files.size())) / d;
    }
    for (const auto& fb : plan.uncoded) total += (fb.cache >= 0 ? 1.0 - mu : 1.0) / d;
  }
  return std::min(total, static_cast<double>(distinct.size()));
}

DemandProfile stochastic_demands(const popularity::Discretized& levels,
                                 const popularity::EmpiricalDistribution& dist, std::int64_t total_users,
                                 std::uint64_t seed, std::int64_t trial) {
  const auto& config = levels.config;
  RandomStream rng(seed, {stream::kTrial, static_cast<std::uint64_t>(trial)});
  std::map<std::pair<std::size_t, std::int64_t>, std::int64_t> next_slot;
  DemandProfile out;
  out.reserve(static_cast<std::size_t>(total_users));
  for (std::int64_t u = 0; u < total_users; ++u) {
    const auto cache = static_cast<std::int64_t>(rng.uniform_index(static_cast<std::uint64_t>(config.num_caches)));
    const auto rank = dist.rank_for(rng.uniform01());
    std::size_t level = levels.block_first.size();
    for (std::size_t i = 0; i < levels.block_first.size(); ++i)
      if (rank >= levels.block_first[i] && rank < levels.block_first[i] + levels.block_size[i]) level = i;
    if (level == levels.block_first.size()) throw std::invalid_argument("stochastic_demands: rank outside every level");
    out.push_back({cache, next_slot[{level, cache}]++, level, rank - levels.block_first[level]});
  }
  return out;
}

TrialStatistics summarize(std::vector<double> rates) {
  TrialStatistics s;
  s.rates = std::move(rates);
  if (s.rates.empty()) return s;
  long double sum = 0.0L;
  for (double r : s.rates) sum += r;
  s.mean = static_cast<double>(sum / static_cast<long double>(s.rates.size()));
  auto sorted = s.rates;
  std::sort(sorted.begin(), sorted.end());
  // Nearest-rank percentiles.
  auto pct = [&](double p) {
    const auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(sorted.size())));
    return sorted[std::clamp<std::size_t>(rank, 1, sorted.size()) - 1];
  };
  s.p05 = pct(0.05);
  s.p50 = pct(0.50);
  s.p95 = pct(0.95);
  return s;
}

namespace {

double stochastic_trial(const popularity::Discretized& levels, const popularity::EmpiricalDistribution& dist,
                        std::span<const double> shares, std::int64_t total_users, std::uint64_t seed,
                        std::int64_t trial) {
  return expected_rate(levels.config, shares, stochastic_demands(levels, dist, total_users, seed, trial));
}

void check_trials(std::int64_t trials) {
  if (trials < 1) throw std::invalid_argument("simulate_stochastic: trials must be >= 1");
}

}  // namespace

TrialStatistics simulate_stochastic(const popularity::Discretized& levels,
                                    const popularity::EmpiricalDistribution& dist, std::int64_t total_users,
                                    std::int64_t trials, std::uint64_t seed) {
  check_trials(trials);
  const auto shares = pama::pama(levels.config).shares;
  std::vector<double> rates;
  for (std::int64_t t = 0; t < trials; ++t)
    rates.push_back(stochastic_trial(levels, dist, shares, total_users, seed, t));
  return summarize(std::move(rates));
}

TrialStatistics simulate_stochastic_parallel(const popularity::Discretized& levels,
                                             const popularity::EmpiricalDistribution& dist,
                                             std::int64_t total_users, std::int64_t trials, std::uint64_t seed) {
  check_trials(trials);
  const auto shares = pama::pama(levels.config).shares;
  std::vector<double> rates(static_cast<std::size_t>(trials));
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t t = 0; t < trials; ++t)
    rates[static_cast<std::size_t>(t)] = stochastic_trial(levels, dist, shares, total_users, seed, t);
  return summarize(std::move(rates));
}

TrialStatistics lfu_simulate(const popularity::Discretized& levels, const popularity::EmpiricalDistribution& dist,
                             std::int64_t total_users, std::int64_t trials, std::uint64_t seed) {
  check_trials(trials);
  const auto stored = static_cast<std::int64_t>(std::floor(std::max(levels.config.memory, 0.0)));
  std::vector<double> rates;
  for (std::int64_t t = 0; t < trials; ++t) {
    std::set<std::int64_t> missing;
    for (const auto& d : stochastic_demands(levels, dist, total_users, seed, t)) {
      const auto rank = levels.block_first[d.level] + d.file;
      if (rank >= stored) missing.insert(rank);
    }
    rates.push_back(static_cast<double>(missing.size()));
  }
  return summarize(std::move(rates));
}

double lfu_rate_for(const SystemConfig& config, const DemandProfile& demands) {
  check_profile(config, demands, false);
  const auto counts = rate::lfu_stored_counts(config);
  std::set<std::pair<std::size_t, std::int64_t>> missing;
  for (const auto& d : demands)
    if (d.file >= counts[d.level]) missing.insert({d.level, d.file});
  return static_cast<double>(missing.size());
}

}  // namespace mlcache::sim
