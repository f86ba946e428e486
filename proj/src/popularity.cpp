#include "mlcache/popularity.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>

#include <omp.h>

#include "mlcache/diagnostics.hpp"
#include "mlcache/pama.hpp"

namespace mlcache::popularity {

EmpiricalDistribution::EmpiricalDistribution(std::vector<double> weights) : probs_(std::move(weights)) {
  if (probs_.empty()) throw std::invalid_argument("popularity distribution is empty");
  long double total = 0.0L;
  for (double w : probs_) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("popularity weights must be finite and >= 0");
    total += w;
  }
  if (total <= 0.0L) throw std::invalid_argument("popularity weights are all zero");
  std::sort(probs_.begin(), probs_.end(), std::greater<>());
  for (double& p : probs_) p = static_cast<double>(p / total);
  cumulative_.resize(probs_.size() + 1);
  cumulative_[0] = 0.0;
  long double run = 0.0L;
  for (std::size_t k = 0; k < probs_.size(); ++k) {
    run += probs_[k];
    cumulative_[k + 1] = static_cast<double>(run);
  }
}

double EmpiricalDistribution::mass(std::int64_t first, std::int64_t last) const {
  first = std::clamp<std::int64_t>(first, 0, n_files());
  last = std::clamp<std::int64_t>(last, first, n_files());
  return cumulative_[static_cast<std::size_t>(last)] - cumulative_[static_cast<std::size_t>(first)];
}

std::int64_t EmpiricalDistribution::rank_for(double u) const {
  const double target = u * cumulative_.back();
  auto it = std::upper_bound(cumulative_.begin() + 1, cumulative_.end(), target);
  const auto rank = static_cast<std::int64_t>(it - cumulative_.begin()) - 1;
  return std::clamp<std::int64_t>(rank, 0, n_files() - 1);
}

namespace {

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

double parse_count(const std::string& field, std::size_t line_no) {
  const auto t = trim(field);
  bool ok = !t.empty() && std::all_of(t.begin(), t.end(), [](unsigned char c) { return std::isdigit(c); });
  if (!ok)
    throw std::invalid_argument("count file line " + std::to_string(line_no) +
                                ": expected a non-negative integer, got '" + t + "'");
  return std::stod(t);
}

}  // namespace

EmpiricalDistribution load_counts(std::istream& in) {
  std::vector<double> counts;
  std::string line;
  std::size_t line_no = 0;
  std::size_t zeros = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    std::string field = t;
    if (const auto comma = t.find(','); comma != std::string::npos) {
      if (counts.empty() && zeros == 0 && lower(t) == "id,count") continue;
      field = t.substr(comma + 1);
      if (field.find(',') != std::string::npos)
        throw std::invalid_argument("count file line " + std::to_string(line_no) + ": expected two columns");
    }
    const double c = parse_count(field, line_no);
    if (c == 0.0) {
      ++zeros;
      continue;
    }
    counts.push_back(c);
  }
  if (zeros > 0) warn("load_counts: dropped " + std::to_string(zeros) + " zero-count rows");
  if (counts.empty()) throw std::invalid_argument("count file has no positive counts");
  return EmpiricalDistribution(std::move(counts));
}

EmpiricalDistribution load_counts_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open count file " + path);
  return load_counts(in);
}

EmpiricalDistribution zipf_distribution(double s, std::int64_t n) {
  if (n < 1) throw std::invalid_argument("zipf_distribution: n must be >= 1");
  std::vector<double> w(static_cast<std::size_t>(n));
  for (std::int64_t r = 1; r <= n; ++r) w[static_cast<std::size_t>(r - 1)] = std::pow(static_cast<double>(r), -s);
  return EmpiricalDistribution(std::move(w));
}

double fit_zipf(const EmpiricalDistribution& dist) {
  const auto n = dist.n_files();
  if (n < 10) throw std::invalid_argument("fit_zipf: at least 10 files are required");
  // Centered sums for a numerically stable slope.
  double mean_x = 0.0, mean_y = 0.0;
  for (std::int64_t r = 1; r <= n; ++r) {
    mean_x += std::log(static_cast<double>(r));
    mean_y += std::log(dist.probability(r - 1));
  }
  mean_x /= static_cast<double>(n);
  mean_y /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0;
  for (std::int64_t r = 1; r <= n; ++r) {
    const double dx = std::log(static_cast<double>(r)) - mean_x;
    sxy += dx * (std::log(dist.probability(r - 1)) - mean_y);
    sxx += dx * dx;
  }
  return -sxy / sxx;
}

LevelPartition::LevelPartition(std::int64_t n_files, std::vector<std::int64_t> cuts)
    : n_files_(n_files), cuts_(std::move(cuts)) {
  if (n_files_ < 1) throw std::invalid_argument("LevelPartition: N must be >= 1");
  std::int64_t prev = 0;
  for (auto c : cuts_) {
    if (c <= prev || c >= n_files_)
      throw std::invalid_argument("LevelPartition: cuts must be strictly increasing inside (0, N)");
    prev = c;
  }
}

std::vector<std::int64_t> LevelPartition::block_sizes() const {
  std::vector<std::int64_t> sizes;
  for (std::size_t k = 0; k < num_blocks(); ++k) sizes.push_back(block_end(k) - block_begin(k));
  return sizes;
}

LevelPartition zipf_split_heuristic(double s, std::int64_t n_files, std::int64_t num_caches, double memory) {
  if (!(s > 0.0)) throw std::invalid_argument("zipf_split_heuristic: s must be positive");
  if (n_files < 2) throw std::invalid_argument("zipf_split_heuristic: N must be >= 2");
  const double N = static_cast<double>(n_files);
  const double K = static_cast<double>(num_caches);
  const double M = memory;
  double n = 0.0;
  if (s < 1.0) {
    n = (1.0 - s) / (2.0 - s) * std::min(M * K, N);
  } else {
    const double root_n = std::pow(N, 1.0 / s);
    double m1 = N / K;
    double m2 = root_n;
    if (s > 1.0) {
      const double k_pow = std::pow(K, 1.0 / (s - 1.0));
      m1 = std::min(N / K, k_pow);
      m2 = std::max(root_n, k_pow);
    }
    if (M <= m1)
      n = std::pow(M * K, 1.0 / s);
    else if (M < m2)
      n = root_n;
    else
      n = 0.1 * M;
  }
  const auto rounded = static_cast<std::int64_t>(std::floor(n + 0.5));
  return LevelPartition(n_files, {std::clamp<std::int64_t>(rounded, 1, n_files - 1)});
}

namespace {

std::int64_t round_half_up(double x) { return static_cast<std::int64_t>(std::floor(x + 0.5)); }

struct Blocks {
  std::vector<std::int64_t> first, size, users, degree;
};

std::vector<std::int64_t> assign_users(const EmpiricalDistribution& dist, const Blocks& b, std::int64_t K,
                                       std::int64_t total_users) {
  const std::size_t n = b.first.size();
  std::vector<std::int64_t> u(n, 0);
  const double per_cache = static_cast<double>(total_users) / static_cast<double>(K);
  std::int64_t assigned = 0;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    u[k] = round_half_up(per_cache * dist.mass(b.first[k], b.first[k] + b.size[k]));
    assigned += u[k];
  }
  u[n - 1] = std::max<std::int64_t>(0, round_half_up(per_cache - static_cast<double>(assigned)));
  return u;
}

// Builds blocks with user counts, merging zero-user blocks. std::nullopt if
// nothing is left with users.
std::optional<Blocks> build_blocks(const EmpiricalDistribution& dist, const LevelPartition& partition,
                                   std::int64_t K, std::int64_t total_users,
                                   std::span<const std::int64_t> degrees, bool quiet) {
  Blocks b;
  for (std::size_t k = 0; k < partition.num_blocks(); ++k) {
    b.first.push_back(partition.block_begin(k));
    b.size.push_back(partition.block_end(k) - partition.block_begin(k));
    b.degree.push_back(degrees.empty() ? 1 : degrees[k]);
  }
  for (;;) {
    b.users = assign_users(dist, b, K, total_users);
    auto zero = std::find(b.users.begin(), b.users.end(), 0);
    if (zero == b.users.end()) break;
    if (b.first.size() == 1) return std::nullopt;
    const auto k = static_cast<std::size_t>(zero - b.users.begin());
    const std::size_t into = k == 0 ? 1 : k - 1;
    if (!quiet)
      warn("discretize: block " + std::to_string(k + 1) + " rounds to zero users, merged into block " +
           std::to_string(into + 1));
    b.size[into] += b.size[k];
    b.first[into] = std::min(b.first[into], b.first[k]);
    b.first.erase(b.first.begin() + static_cast<std::ptrdiff_t>(k));
    b.size.erase(b.size.begin() + static_cast<std::ptrdiff_t>(k));
    b.degree.erase(b.degree.begin() + static_cast<std::ptrdiff_t>(k));
  }
  return b;
}

Discretized to_config(const Blocks& b, std::int64_t K, double memory) {
  std::vector<LevelSpec> levels;
  for (std::size_t k = 0; k < b.first.size(); ++k) levels.push_back({b.size[k], b.users[k], b.degree[k]});
  const auto order = popularity_order(levels);
  Discretized d;
  d.config.num_caches = K;
  d.config.memory = memory;
  for (auto k : order) {
    d.config.levels.push_back(levels[k]);
    d.block_first.push_back(b.first[k]);
    d.block_size.push_back(b.size[k]);
  }
  return d;
}

void check_degrees(const LevelPartition& partition, std::span<const std::int64_t> degrees) {
  if (!degrees.empty() && degrees.size() != partition.num_blocks())
    throw std::invalid_argument("discretize: one access degree per block required");
}

}  // namespace

Discretized discretize(const EmpiricalDistribution& dist, const LevelPartition& partition,
                       std::int64_t num_caches, std::int64_t total_users,
                       std::span<const std::int64_t> degrees, double memory) {
  check_degrees(partition, degrees);
  if (partition.n_files() != dist.n_files())
    throw std::invalid_argument("discretize: partition and distribution disagree on N");
  if (num_caches < 1 || total_users < 1) throw std::invalid_argument("discretize: K and users must be positive");
  auto blocks = build_blocks(dist, partition, num_caches, total_users, degrees, false);
  if (!blocks) throw std::invalid_argument("discretize: every level rounds to zero users");
  auto d = to_config(*blocks, num_caches, memory);
  d.config = validate(d.config, ValidateOptions{.regularity_is_fatal = false});
  return d;
}

double partition_rate(const EmpiricalDistribution& dist, const LevelPartition& partition,
                      std::int64_t num_caches, std::int64_t total_users,
                      std::span<const std::int64_t> degrees, double memory) {
  check_degrees(partition, degrees);
  auto blocks = build_blocks(dist, partition, num_caches, total_users, degrees, true);
  if (!blocks) return std::numeric_limits<double>::infinity();
  const auto d = to_config(*blocks, num_caches, memory);
  return pama::total_rate_exact(d.config, pama::pama(d.config)).total;
}

namespace {

struct SearchSpace {
  std::int64_t step;
  std::int64_t positions;  // cut k*step for k = 1..positions
  std::size_t cuts;        // L - 1
};

SearchSpace make_space(const EmpiricalDistribution& dist, const BruteForceOptions& o) {
  if (o.num_levels < 1) throw std::invalid_argument("brute_force_partition: L must be >= 1");
  if (!o.degrees.empty() && o.degrees.size() != o.num_levels)
    throw std::invalid_argument("brute_force_partition: one access degree per level required");
  const auto n = dist.n_files();
  SearchSpace sp;
  sp.step = o.coarsening > 0 ? o.coarsening : std::max<std::int64_t>(1, n / 200);
  sp.positions = (n - 1) / sp.step;
  sp.cuts = o.num_levels - 1;
  // C(positions, cuts) in floating point: only compared against the budget.
  double count = 1.0;
  for (std::size_t k = 0; k < sp.cuts; ++k)
    count *= static_cast<double>(sp.positions - static_cast<std::int64_t>(k)) / static_cast<double>(k + 1);
  if (static_cast<std::int64_t>(sp.cuts) > sp.positions)
    throw std::invalid_argument("brute_force_partition: too few files for L levels at this coarsening");
  if (count > static_cast<double>(o.budget))
    throw std::invalid_argument("brute_force_partition: " + std::to_string(static_cast<long double>(count)) +
                                " candidates exceed the budget");
  return sp;
}

struct SliceBest {
  double rate = std::numeric_limits<double>::infinity();
  std::vector<std::int64_t> cuts;
  std::uint64_t candidates = 0;
};

void search(const EmpiricalDistribution& dist, const BruteForceOptions& o, const SearchSpace& sp,
            std::vector<std::int64_t>& cuts, std::size_t pos, std::int64_t min_position, SliceBest& best) {
  if (pos == sp.cuts) {
    ++best.candidates;
    const LevelPartition part(dist.n_files(), cuts);
    const double r = partition_rate(dist, part, o.num_caches, o.total_users, o.degrees, o.memory);
    if (r < best.rate) {
      best.rate = r;
      best.cuts = cuts;
    }
    return;
  }
  const auto last_position = sp.positions - static_cast<std::int64_t>(sp.cuts - pos - 1);
  for (std::int64_t p = min_position; p <= last_position; ++p) {
    cuts[pos] = p * sp.step;
    search(dist, o, sp, cuts, pos + 1, p + 1, best);
  }
}

BruteForceResult finish(const EmpiricalDistribution& dist, const SliceBest& best) {
  if (!std::isfinite(best.rate))
    throw std::invalid_argument("brute_force_partition: no candidate has any users");
  BruteForceResult r;
  r.partition = LevelPartition(dist.n_files(), best.cuts);
  r.rate = best.rate;
  r.candidates = best.candidates;
  return r;
}

}  // namespace

BruteForceResult brute_force_partition(const EmpiricalDistribution& dist, const BruteForceOptions& options) {
  const auto sp = make_space(dist, options);
  std::vector<std::int64_t> cuts(sp.cuts);
  SliceBest best;
  search(dist, options, sp, cuts, 0, 1, best);
  return finish(dist, best);
}

BruteForceResult brute_force_partition_parallel(const EmpiricalDistribution& dist,
                                                const BruteForceOptions& options) {
  const auto sp = make_space(dist, options);
  if (sp.cuts == 0) return brute_force_partition(dist, options);
  const auto first_positions = sp.positions - static_cast<std::int64_t>(sp.cuts) + 1;
  std::vector<SliceBest> slices(static_cast<std::size_t>(std::max<std::int64_t>(first_positions, 0)));
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t p = 1; p <= first_positions; ++p) {
    std::vector<std::int64_t> cuts(sp.cuts);
    cuts[0] = p * sp.step;
    search(dist, options, sp, cuts, 1, p + 1, slices[static_cast<std::size_t>(p - 1)]);
  }
  SliceBest best;
  for (auto& s : slices) {
    best.candidates += s.candidates;
    if (s.rate < best.rate) {
      best.rate = s.rate;
      best.cuts = std::move(s.cuts);
    }
  }
  return finish(dist, best);
}

}  // namespace mlcache::popularity
