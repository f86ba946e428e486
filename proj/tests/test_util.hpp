#pragma once

#include <cstdint>

#include "mlcache/diagnostics.hpp"
#include "mlcache/model.hpp"
#include "mlcache/rng.hpp"

namespace mlcache::testing {

inline SystemConfig example1(double memory = 100.0) {
  SystemConfig c;
  c.num_caches = 8;
  c.memory = memory;
  c.levels = {{100, 9, 1}, {100, 1, 1}};
  return c;
}

inline SystemConfig gap3() {
  SystemConfig c;
  c.num_caches = 10;
  c.levels = {{500, 9, 1}, {1500, 5, 3}, {8000, 1, 5}};
  return c;
}

inline std::int64_t draw(RandomStream& rng, std::int64_t lo, std::int64_t hi) {
  return lo + static_cast<std::int64_t>(rng.uniform_index(static_cast<std::uint64_t>(hi - lo + 1)));
}

// Random regular instance (N_i >= K U_i), validated, with memory drawn in
// [0, sum N_i/d_i].
inline SystemConfig random_config(RandomStream& rng, std::int64_t max_k = 12, std::int64_t max_levels = 3,
                                  std::int64_t max_d = 3) {
  SystemConfig c;
  c.num_caches = draw(rng, 1, max_k);
  const auto L = draw(rng, 1, max_levels);
  for (std::int64_t i = 0; i < L; ++i) {
    LevelSpec l;
    l.access_degree = draw(rng, 1, std::min(c.num_caches, max_d));
    l.users_per_cache = draw(rng, 1, 5);
    l.n_files = c.num_caches * l.users_per_cache * draw(rng, 1, 15) + draw(rng, 0, 5);
    c.levels.push_back(l);
  }
  {
    ScopedWarningCapture quiet;
    c = validate(c);
  }
  c.memory = rng.uniform01() * c.total_storage();
  return c;
}

}  // namespace mlcache::testing
