#include "mlcache/model.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include "mlcache/diagnostics.hpp"

namespace mlcache {

std::int64_t SystemConfig::max_degree() const {
  std::int64_t d = 0;
  for (const auto& l : levels) d = std::max(d, l.access_degree);
  return d;
}

double SystemConfig::total_storage() const {
  double t = 0.0;
  for (const auto& l : levels) t += l.full_storage();
  return t;
}

double SystemConfig::uncached_rate() const {
  double r = 0.0;
  for (const auto& l : levels)
    r += static_cast<double>(num_caches) * static_cast<double>(l.users_per_cache);
  return r;
}

std::int64_t SystemConfig::total_files() const {
  std::int64_t n = 0;
  for (const auto& l : levels) n += l.n_files;
  return n;
}

Subsystem make_subsystem(std::int64_t num_caches, const LevelSpec& level, double memory) {
  Subsystem s;
  s.num_caches = num_caches / level.access_degree;
  s.n_files = level.n_files;
  s.memory = memory;
  const double frac = static_cast<double>(level.access_degree) * memory /
                      static_cast<double>(level.n_files);
  s.subfile_fraction = std::clamp(frac, 0.0, 1.0);
  return s;
}

bool more_popular(const LevelSpec& a, const LevelSpec& b) {
  // Products stay well inside int64 for any realistic instance; fall back to
  // long double when they would not.
  constexpr std::int64_t lim = 3'000'000'000LL;
  if (a.users_per_cache < lim && b.n_files < lim && b.users_per_cache < lim && a.n_files < lim)
    return a.users_per_cache * b.n_files > b.users_per_cache * a.n_files;
  return static_cast<long double>(a.users_per_cache) * b.n_files >
         static_cast<long double>(b.users_per_cache) * a.n_files;
}

std::vector<std::size_t> popularity_order(std::span<const LevelSpec> levels) {
  std::vector<std::size_t> order(levels.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return more_popular(levels[a], levels[b]);
  });
  return order;
}

SystemConfig validate(SystemConfig config, const ValidateOptions& options) {
  if (config.num_caches < 1) throw ValidationError("K must be a positive integer");
  if (!(config.memory >= 0.0)) throw ValidationError("M must be non-negative");
  if (config.levels.empty()) throw ValidationError("at least one level is required");
  if (config.separation_ratio && !(*config.separation_ratio > 1.0))
    throw ValidationError("separation ratio q must exceed 1");

  const auto K = config.num_caches;
  for (std::size_t i = 0; i < config.levels.size(); ++i) {
    const auto& l = config.levels[i];
    const auto tag = "level " + std::to_string(i + 1) + ": ";
    if (l.n_files < 1 || l.users_per_cache < 1 || l.access_degree < 1)
      throw ValidationError(tag + "N, U and d must be positive integers");
    if (l.access_degree > K)
      throw ValidationError(tag + "access degree d=" + std::to_string(l.access_degree) +
                            " exceeds K=" + std::to_string(K));
    if (l.n_files < K * l.users_per_cache) {
      std::ostringstream msg;
      msg << tag << "N=" << l.n_files << " < K*U=" << K * l.users_per_cache;
      if (options.regularity_is_fatal) throw ValidationError(msg.str());
      warn(msg.str());
    }
    if (K % l.access_degree != 0)
      warn(tag + "d=" + std::to_string(l.access_degree) + " does not divide K=" +
           std::to_string(K) + "; edge caches are served uncoded");
  }

  const auto order = popularity_order(config.levels);
  if (!std::is_sorted(order.begin(), order.end())) {
    std::vector<LevelSpec> sorted;
    sorted.reserve(order.size());
    for (auto idx : order) sorted.push_back(config.levels[idx]);
    config.levels = std::move(sorted);
  }

  if (config.separation_ratio) {
    const long double q = *config.separation_ratio;
    const auto& lv = config.levels;
    for (std::size_t i = 0; i < lv.size(); ++i)
      for (std::size_t j = i + 1; j < lv.size(); ++j) {
        const long double lhs = static_cast<long double>(lv[i].users_per_cache) * lv[j].n_files;
        const long double rhs = q * lv[j].users_per_cache * lv[i].n_files;
        if (lhs < rhs)
          warn("levels " + std::to_string(i + 1) + " and " + std::to_string(j + 1) +
               " are closer in popularity than the separation ratio q");
      }
  }
  return config;
}

void to_json(nlohmann::json& j, const LevelSpec& level) {
  j = nlohmann::json{{"N", level.n_files}, {"U", level.users_per_cache}, {"d", level.access_degree}};
}

void from_json(const nlohmann::json& j, LevelSpec& level) {
  j.at("N").get_to(level.n_files);
  j.at("U").get_to(level.users_per_cache);
  j.at("d").get_to(level.access_degree);
}

void to_json(nlohmann::json& j, const SystemConfig& config) {
  j = nlohmann::json{{"K", config.num_caches}, {"M", config.memory}, {"levels", config.levels}};
  if (config.separation_ratio) j["q"] = *config.separation_ratio;
}

void from_json(const nlohmann::json& j, SystemConfig& config) {
  try {
    j.at("K").get_to(config.num_caches);
    config.memory = j.value("M", 0.0);
    j.at("levels").get_to(config.levels);
    if (j.contains("q") && !j.at("q").is_null())
      config.separation_ratio = j.at("q").get<double>();
    else
      config.separation_ratio.reset();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed instance JSON: ") + e.what());
  }
}

SystemConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("cannot parse " + path + ": " + e.what());
  }
  return j.get<SystemConfig>();
}

}  // namespace mlcache
