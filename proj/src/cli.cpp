#include "mlcache/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

#include "mlcache/acceptance.hpp"
#include "mlcache/bounds.hpp"
#include "mlcache/diagnostics.hpp"
#include "mlcache/kernels.hpp"
#include "mlcache/model.hpp"
#include "mlcache/pama.hpp"
#include "mlcache/popularity.hpp"
#include "mlcache/rate.hpp"
#include "mlcache/rng.hpp"
#include "mlcache/sim.hpp"

namespace mlcache::cli {

std::string format_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

namespace {

using nlohmann::json;

struct Options {
  std::string config;
  std::string counts;
  std::string m;
  std::uint64_t seed = 1;
  std::int64_t trials = 100;
  std::string out;
  std::string summary;
  double grid_step = 0.0;
  std::int64_t coarsen = 0;
  std::int64_t dmax = 3;
  double davg = 2.0;
  std::uint64_t budget = 10'000'000;
  // Popularity and simulation inputs.
  std::optional<double> zipf;
  std::int64_t files = 10'000;
  std::int64_t caches = 10;
  std::int64_t users = 100;
  std::optional<double> memory;
  std::size_t levels = 2;
  std::vector<std::int64_t> degrees;
  std::string method = "brute";
  std::string mode = "stochastic";
  std::int64_t bits = 1 << 14;
  std::string demands = "worst";
};

// Collects the CSV body and writes it to --out or the given stream.
class Table {
public:
  void comment(const std::string& line) { text_ += "# " + line + "\n"; }
  void header(std::initializer_list<std::string> cols) { row(std::vector<std::string>(cols)); }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) {
      if (k) text_ += ',';
      text_ += cells[k];
    }
    text_ += '\n';
  }
  const std::string& text() const { return text_; }

private:
  std::string text_;
};

std::string num(double x) { return format_number(x); }
std::string num(std::int64_t x) { return std::to_string(x); }

void write_output(const Options& o, const std::string& text, std::ostream& out) {
  if (o.out.empty()) {
    out << text;
    return;
  }
  std::ofstream f(o.out, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + o.out);
  f << text;
}

// The JSON summary goes to --summary, else to the diagnostic stream.
void write_summary(const Options& o, const json& summary, std::ostream& err) {
  if (o.summary.empty()) {
    err << summary.dump(2) << '\n';
    return;
  }
  std::ofstream f(o.summary, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + o.summary);
  f << summary.dump(2) << '\n';
}

SystemConfig require_config(const Options& o) {
  if (o.config.empty()) throw ValidationError("--config is required");
  auto c = validate(load_config(o.config));
  if (o.memory) c.memory = *o.memory;
  if (c.memory < 0.0) throw ValidationError("memory must be non-negative");
  return c;
}

std::vector<double> grid_or(const Options& o, const SystemConfig& c) {
  if (o.m.empty()) return {c.memory};
  return kernels::memory_grid(kernels::parse_sweep_spec(o.m));
}

void describe(Table& t, const SystemConfig& c) {
  std::string levels;
  for (const auto& l : c.levels)
    levels += "(" + num(l.n_files) + "," + num(l.users_per_cache) + "," + num(l.access_degree) + ")";
  t.comment("K=" + num(c.num_caches) + " levels(N,U,d)=" + levels);
}

json partition_json(const pama::Partition& p) {
  auto one_based = [](const std::vector<std::size_t>& v) {
    std::vector<std::size_t> r;
    for (auto x : v) r.push_back(x + 1);
    return r;
  };
  return {{"H", one_based(p.zero())}, {"I", one_based(p.shared())}, {"J", one_based(p.full())}};
}

std::string partition_label(const pama::Partition& p) {
  auto part = [](const char* name, const std::vector<std::size_t>& v) {
    std::string s = std::string(name) + "={";
    for (std::size_t k = 0; k < v.size(); ++k) s += (k ? "," : "") + std::to_string(v[k] + 1);
    return s + "}";
  };
  return part("H", p.zero()) + " " + part("I", p.shared()) + " " + part("J", p.full());
}

// ---- subcommands ---------------------------------------------------------

int cmd_rate(const Options& o, std::ostream& out, std::ostream&) {
  const auto c = require_config(o);
  Table t;
  t.comment("mlcache rate");
  describe(t, c);
  t.header({"M", "pama_exact", "pama_closed", "lfu", "small_k", "uncached"});
  const auto table = pama::build_threshold_table(c);
  for (double m : grid_or(o, c)) {
    const auto at = c.with_memory(m);
    const auto alloc = pama::pama(c, table, m);
    double closed = std::numeric_limits<double>::quiet_NaN();
    try {
      closed = pama::total_rate_closed_form(at, alloc.partition).value;
    } catch (const std::domain_error&) {
    }
    t.row({num(m), num(pama::total_rate_exact(at, alloc).total), num(closed), num(rate::lfu_rate(at)),
           num(rate::small_k_rate(at)), num(at.uncached_rate())});
  }
  write_output(o, t.text(), out);
  return kExitOk;
}

int cmd_pama(const Options& o, std::ostream& out, std::ostream& err) {
  const auto c = require_config(o);
  const auto alloc = pama::pama(c);
  const auto exact = pama::total_rate_exact(c, alloc);
  json summary;
  summary["M"] = c.memory;
  summary["partition"] = partition_json(alloc.partition);
  summary["partition_label"] = partition_label(alloc.partition);
  summary["shares"] = alloc.shares;
  summary["R_exact"] = exact.total;
  summary["m_feasible"] = pama::is_m_feasible(c, alloc.partition);
  try {
    const auto closed = pama::total_rate_closed_form(c, alloc.partition);
    summary["R_closed"] = closed.value;
    summary["in_validity"] = closed.in_validity;
  } catch (const std::domain_error&) {
    summary["R_closed"] = nullptr;
    summary["in_validity"] = false;
  }
  if (o.grid_step > 0.0) {
    const auto g = pama::grid_search_alpha_parallel(c, o.grid_step);
    summary["grid"] = {{"step", o.grid_step}, {"rate", g.rate}, {"shares", g.allocation.shares},
                       {"lipschitz_slack", g.lipschitz_slack}, {"evaluated", g.evaluated}};
  }
  Table t;
  t.comment("mlcache pama");
  describe(t, c);
  t.comment("M=" + num(c.memory) + " partition " + partition_label(alloc.partition));
  t.header({"level", "N", "U", "d", "role", "share", "rate"});
  static const char* roles[] = {"H", "I", "J"};
  for (std::size_t i = 0; i < c.levels.size(); ++i) {
    const auto& l = c.levels[i];
    t.row({num(static_cast<std::int64_t>(i + 1)), num(l.n_files), num(l.users_per_cache), num(l.access_degree),
           roles[static_cast<int>(alloc.partition.role(i))], num(alloc.shares[i]), num(exact.per_level[i])});
  }
  write_output(o, t.text(), out);
  write_summary(o, summary, err);
  return kExitOk;
}

int cmd_sweep(const Options& o, std::ostream& out, std::ostream&) {
  if (o.m.empty()) throw ValidationError("sweep needs --m MIN:MAX:POINTS[:log]");
  const auto c = require_config(o);
  const auto grid = kernels::memory_grid(kernels::parse_sweep_spec(o.m));
  const auto rows = kernels::sweep_parallel(c, grid);
  Table t;
  t.comment("mlcache sweep");
  describe(t, c);
  std::vector<std::string> header{"M", "R_exact", "R_closed", "in_validity", "partition"};
  for (std::size_t i = 0; i < c.levels.size(); ++i) header.push_back("share_" + std::to_string(i + 1));
  for (std::size_t i = 0; i < c.levels.size(); ++i) header.push_back("rate_" + std::to_string(i + 1));
  t.row(header);
  for (const auto& r : rows) {
    std::vector<std::string> cells{num(r.memory), num(r.rate_exact), num(r.rate_closed), r.in_validity ? "1" : "0",
                                   r.allocation.partition.to_string()};
    for (double s : r.allocation.shares) cells.push_back(num(s));
    for (double s : r.per_level) cells.push_back(num(s));
    t.row(cells);
  }
  write_output(o, t.text(), out);
  return kExitOk;
}

void gap_rows(Table& t, const bounds::GapProfile& g) {
  t.header({"M", "achievable", "bound", "ratio", "kind", "params"});
  for (const auto& p : g.points)
    t.row({num(p.memory), num(p.achievable), num(p.bound.value), num(p.ratio), bounds::to_string(p.bound.kind),
           p.bound.params()});
}

int cmd_bounds(const Options& o, std::ostream& out, std::ostream&) {
  const auto c = require_config(o);
  const auto g = bounds::gap_profile_parallel(c, grid_or(o, c));
  Table t;
  t.comment("mlcache bounds");
  describe(t, c);
  gap_rows(t, g);
  write_output(o, t.text(), out);
  return kExitOk;
}

int cmd_gap(const Options& o, std::ostream& out, std::ostream& err) {
  const auto c = require_config(o);
  std::vector<double> grid;
  if (o.m.empty()) {
    grid = kernels::memory_grid({1.0, 0.999 * c.total_storage(), 50, true});
  } else {
    grid = kernels::memory_grid(kernels::parse_sweep_spec(o.m));
  }
  const auto g = bounds::gap_profile_parallel(c, grid);
  const auto k = bounds::gap_constants(c);
  Table t;
  t.comment("mlcache gap");
  describe(t, c);
  t.comment("gamma=" + num(k.gamma) + " k0=" + num(k.k0) + " envelope=" + num(bounds::order_optimality_factor(c)));
  gap_rows(t, g);
  t.comment("max_ratio=" + num(g.max_ratio) + " at M=" + num(g.points.empty() ? 0.0 : g.points[g.argmax].memory));
  write_output(o, t.text(), out);
  json summary{{"max_ratio", g.max_ratio},
               {"argmax_M", g.points.empty() ? 0.0 : g.points[g.argmax].memory},
               {"gamma", k.gamma},
               {"k0", k.k0},
               {"envelope", bounds::order_optimality_factor(c)},
               {"K_at_least_k0", static_cast<double>(c.num_caches) >= k.k0}};
  if (!o.summary.empty()) write_summary(o, summary, err);
  return kExitOk;
}

popularity::EmpiricalDistribution load_popularity(const Options& o) {
  if (!o.counts.empty()) return popularity::load_counts_file(o.counts);
  if (o.zipf) return popularity::zipf_distribution(*o.zipf, o.files);
  throw ValidationError("give --counts PATH or --zipf S");
}

std::vector<std::int64_t> degrees_for(const Options& o, std::size_t blocks) {
  if (o.degrees.empty()) return std::vector<std::int64_t>(blocks, 1);
  if (o.degrees.size() != blocks) throw ValidationError("--degrees needs one value per level");
  return o.degrees;
}

struct LevelMap {
  popularity::Discretized levels;
  double partition_rate = 0.0;
};

LevelMap build_levels(const Options& o, const popularity::EmpiricalDistribution& dist, double memory) {
  if (o.levels < 1) throw ValidationError("--levels must be >= 1");
  popularity::LevelPartition partition(dist.n_files(), {});
  const auto degrees = degrees_for(o, o.levels);
  if (o.method == "heuristic") {
    if (o.levels != 2) throw ValidationError("the heuristic produces exactly two levels");
    const double s = o.zipf ? *o.zipf : popularity::fit_zipf(dist);
    partition = popularity::zipf_split_heuristic(s, dist.n_files(), o.caches, memory);
  } else if (o.method == "brute") {
    popularity::BruteForceOptions b;
    b.num_levels = o.levels;
    b.num_caches = o.caches;
    b.total_users = o.users;
    b.degrees = degrees;
    b.memory = memory;
    b.coarsening = o.coarsen;
    b.budget = o.budget;
    partition = popularity::brute_force_partition_parallel(dist, b).partition;
  } else {
    throw ValidationError("--method must be 'brute' or 'heuristic'");
  }
  LevelMap m{popularity::discretize(dist, partition, o.caches, o.users, degrees, memory), 0.0};
  m.partition_rate = pama::total_rate_exact(m.levels.config, pama::pama(m.levels.config)).total;
  return m;
}

double require_memory(const Options& o) {
  if (!o.memory) throw ValidationError("--memory is required");
  if (*o.memory < 0.0) throw ValidationError("memory must be non-negative");
  return *o.memory;
}

int cmd_discretize(const Options& o, std::ostream& out, std::ostream& err) {
  const auto dist = load_popularity(o);
  const double memory = require_memory(o);
  const auto m = build_levels(o, dist, memory);
  json instance = m.levels.config;
  std::string text = instance.dump(2) + "\n";
  write_output(o, text, out);
  json summary{{"method", o.method},
               {"n_files", dist.n_files()},
               {"block_first", m.levels.block_first},
               {"block_size", m.levels.block_size},
               {"rate", m.partition_rate}};
  if (!o.counts.empty()) summary["fitted_zipf"] = dist.n_files() >= 10 ? popularity::fit_zipf(dist) : 0.0;
  if (!o.summary.empty()) write_summary(o, summary, err);
  return kExitOk;
}

int cmd_access_opt(const Options& o, std::ostream& out, std::ostream&) {
  const auto c = require_config(o);
  Table t;
  t.comment("mlcache access-opt dmax=" + num(o.dmax) + " davg=" + num(o.davg));
  describe(t, c);
  std::vector<std::string> header{"M"};
  for (std::size_t i = 0; i < c.levels.size(); ++i) header.push_back("d_" + std::to_string(i + 1));
  header.push_back("rate");
  t.row(header);
  for (double m : grid_or(o, c)) {
    const auto a = pama::optimize_access_structure(c.with_memory(m), o.dmax, o.davg);
    std::vector<std::string> cells{num(m)};
    for (auto d : a.degrees) cells.push_back(num(d));
    cells.push_back(num(a.rate));
    t.row(cells);
  }
  write_output(o, t.text(), out);
  return kExitOk;
}

double ratio_of(double theoretical, double empirical) {
  if (empirical == 0.0) return theoretical == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  return theoretical / empirical;
}

int simulate_bit_exact(const Options& o, std::ostream& out, std::ostream& err) {
  const auto base = require_config(o);
  Table t;
  t.comment("mlcache simulate mode=bit-exact seed=" + std::to_string(o.seed) + " F=" + num(o.bits) +
            " demands=" + o.demands);
  describe(t, base);
  t.header({"trial", "M", "empirical_rate", "theoretical_rate", "ratio"});
  json summary = json::array();
  for (double m : grid_or(o, base)) {
    const auto c = base.with_memory(m);
    const auto alloc = pama::pama(c);
    const double theory = pama::total_rate_exact(c, alloc).total;
    std::vector<double> rates;
    for (std::int64_t trial = 0; trial < o.trials; ++trial) {
      const auto seed = derive_seed(o.seed, {stream::kTrial, static_cast<std::uint64_t>(trial)});
      const auto placement = sim::place(c, alloc.shares, o.bits, seed);
      sim::DemandProfile demands;
      if (o.demands == "worst")
        demands = sim::worst_case_demands(c);
      else if (o.demands == "random")
        demands = sim::random_demands(c, seed);
      else
        throw ValidationError("--demands must be 'worst' or 'random'");
      const auto log = sim::deliver_bit_exact(c, placement, demands);
      rates.push_back(log.empirical_rate);
      t.row({num(trial), num(m), num(log.empirical_rate), num(theory), num(ratio_of(theory, log.empirical_rate))});
    }
    const auto s = sim::summarize(rates);
    summary.push_back({{"M", m}, {"mean", s.mean}, {"p05", s.p05}, {"p50", s.p50}, {"p95", s.p95},
                       {"theoretical", theory}});
  }
  write_output(o, t.text(), out);
  if (!o.summary.empty()) write_summary(o, summary, err);
  return kExitOk;
}

int simulate_stochastic(const Options& o, std::ostream& out, std::ostream& err) {
  const auto dist = load_popularity(o);
  if (o.m.empty() && !o.memory) throw ValidationError("give --m or --memory");
  const auto grid = o.m.empty() ? std::vector<double>{*o.memory} : kernels::memory_grid(kernels::parse_sweep_spec(o.m));
  Table t;
  t.comment("mlcache simulate mode=stochastic seed=" + std::to_string(o.seed) + " trials=" + num(o.trials) +
            " K=" + num(o.caches) + " users=" + num(o.users) + " levels=" + num(static_cast<std::int64_t>(o.levels)) +
            " method=" + o.method + " N=" + num(dist.n_files()));
  t.header({"trial", "M", "empirical_rate", "theoretical_rate", "ratio"});
  json summary = json::array();
  for (double m : grid) {
    const auto levels = build_levels(o, dist, m);
    const double theory = levels.partition_rate;
    const auto s = sim::simulate_stochastic_parallel(levels.levels, dist, o.users, o.trials, o.seed);
    for (std::size_t k = 0; k < s.rates.size(); ++k)
      t.row({num(static_cast<std::int64_t>(k)), num(m), num(s.rates[k]), num(theory), num(ratio_of(theory, s.rates[k]))});
    summary.push_back({{"M", m}, {"mean", s.mean}, {"p05", s.p05}, {"p50", s.p50}, {"p95", s.p95},
                       {"theoretical", theory}, {"ratio_of_means", ratio_of(theory, s.mean)}});
  }
  write_output(o, t.text(), out);
  if (!o.summary.empty()) write_summary(o, summary, err);
  return kExitOk;
}

int cmd_simulate(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.trials < 1) throw ValidationError("--trials must be >= 1");
  if (o.mode == "bit-exact") return simulate_bit_exact(o, out, err);
  if (o.mode == "stochastic") return simulate_stochastic(o, out, err);
  throw ValidationError("--mode must be 'stochastic' or 'bit-exact'");
}

int cmd_lfu(const Options& o, std::ostream& out, std::ostream&) {
  Table t;
  t.comment("mlcache lfu seed=" + std::to_string(o.seed));
  if (!o.config.empty()) {
    const auto c = require_config(o);
    describe(t, c);
    t.header({"M", "lfu_rate", "pama_exact", "gain"});
    const auto table = pama::build_threshold_table(c);
    for (double m : grid_or(o, c)) {
      const auto at = c.with_memory(m);
      const double lfu = rate::lfu_rate(at);
      const double pe = pama::total_rate_exact(at, pama::pama(c, table, m)).total;
      t.row({num(m), num(lfu), num(pe), num(ratio_of(lfu, pe))});
    }
  } else {
    const auto dist = load_popularity(o);
    if (o.m.empty() && !o.memory) throw ValidationError("give --m or --memory");
    if (o.trials < 1) throw ValidationError("--trials must be >= 1");
    const auto grid =
        o.m.empty() ? std::vector<double>{*o.memory} : kernels::memory_grid(kernels::parse_sweep_spec(o.m));
    t.comment("K=" + num(o.caches) + " users=" + num(o.users) + " trials=" + num(o.trials) + " method=" + o.method);
    t.header({"M", "lfu_rate", "pama_exact", "gain", "lfu_empirical", "pama_empirical"});
    for (double m : grid) {
      const auto levels = build_levels(o, dist, m);
      const double lfu = rate::lfu_rate(levels.levels.config);
      const auto le = sim::lfu_simulate(levels.levels, dist, o.users, o.trials, o.seed);
      const auto pe = sim::simulate_stochastic_parallel(levels.levels, dist, o.users, o.trials, o.seed);
      t.row({num(m), num(lfu), num(levels.partition_rate), num(ratio_of(lfu, levels.partition_rate)), num(le.mean),
             num(pe.mean)});
    }
  }
  write_output(o, t.text(), out);
  return kExitOk;
}

int cmd_selftest(const Options&, std::ostream& out, std::ostream&) {
  const auto results = acceptance::run_all(out);
  const bool ok = std::all_of(results.begin(), results.end(), [](const auto& r) { return r.pass; });
  out << (ok ? "selftest: all criteria passed\n" : "selftest: some criteria failed\n");
  return ok ? kExitOk : kExitRuntime;
}

// ---- wiring --------------------------------------------------------------

enum Flag : unsigned {
  kConfig = 1u << 0,
  kCounts = 1u << 1,
  kM = 1u << 2,
  kSeed = 1u << 3,
  kTrials = 1u << 4,
  kGridStep = 1u << 5,
  kCoarsen = 1u << 6,
  kAccess = 1u << 7,
  kBudget = 1u << 8,
  kPopularity = 1u << 9,  // --zipf --files --caches --users --levels --degrees --method
  kMemory = 1u << 10,
  kSim = 1u << 11,  // --mode --bits --demands
};

void add_flags(CLI::App* sub, Options& o, unsigned flags) {
  sub->add_option("--out", o.out, "Write CSV here instead of stdout");
  sub->add_option("--summary", o.summary, "Write the JSON summary here");
  if (flags & kConfig) sub->add_option("--config", o.config, "Instance JSON");
  if (flags & kCounts) sub->add_option("--counts", o.counts, "Request-count file");
  if (flags & kM) sub->add_option("--m", o.m, "Memory sweep MIN:MAX:POINTS[:log]");
  if (flags & kSeed) sub->add_option("--seed", o.seed, "Root random seed");
  if (flags & kTrials) sub->add_option("--trials", o.trials, "Number of trials");
  if (flags & kGridStep) sub->add_option("--grid-step", o.grid_step, "Also run the alpha grid search");
  if (flags & kCoarsen) sub->add_option("--coarsen", o.coarsen, "Brute-force cut step (0: N/200)");
  if (flags & kAccess) {
    sub->add_option("--dmax", o.dmax, "Largest access degree");
    sub->add_option("--davg", o.davg, "Bound on the user-weighted mean degree");
  }
  if (flags & kBudget) sub->add_option("--budget", o.budget, "Brute-force candidate budget");
  if (flags & kMemory) sub->add_option("--memory", o.memory, "Cache memory in files");
  if (flags & kPopularity) {
    sub->add_option("--zipf", o.zipf, "Synthetic Zipf exponent");
    sub->add_option("--files", o.files, "Number of files for --zipf");
    sub->add_option("--caches", o.caches, "Number of caches K");
    sub->add_option("--users", o.users, "Total number of users");
    sub->add_option("--levels", o.levels, "Number of popularity levels");
    sub->add_option("--degrees", o.degrees, "Access degree per level")->delimiter(',');
    sub->add_option("--method", o.method, "brute or heuristic");
  }
  if (flags & kSim) {
    sub->add_option("--mode", o.mode, "stochastic or bit-exact");
    sub->add_option("--bits", o.bits, "File size F in bits (bit-exact)");
    sub->add_option("--demands", o.demands, "worst or random (bit-exact)");
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-level multi-access coded caching toolkit", "mlcache_cli"};
  app.require_subcommand(1);
  Options o;
  using Handler = std::function<int(const Options&, std::ostream&, std::ostream&)>;
  std::vector<std::pair<CLI::App*, Handler>> commands;
  auto add = [&](const char* name, const char* help, unsigned flags, Handler h) {
    auto* sub = app.add_subcommand(name, help);
    add_flags(sub, o, flags);
    commands.emplace_back(sub, std::move(h));
  };
  add("rate", "Achievable rates of PAMA and the baselines", kConfig | kM | kMemory, cmd_rate);
  add("pama", "Memory allocation, partition and rates at one memory", kConfig | kGridStep | kMemory, cmd_pama);
  add("sweep", "PAMA over a memory grid", kConfig | kM | kMemory, cmd_sweep);
  add("bounds", "Best lower bound with its witness", kConfig | kM | kMemory, cmd_bounds);
  add("gap", "Achievable over lower bound on a memory grid", kConfig | kM | kMemory, cmd_gap);
  add("discretize", "Popularity counts to a level instance", kCounts | kCoarsen | kBudget | kPopularity | kMemory,
      cmd_discretize);
  add("access-opt", "Best access degrees under a budget", kConfig | kM | kAccess | kMemory, cmd_access_opt);
  add("simulate", "Bit-exact or stochastic delivery simulation",
      kConfig | kCounts | kM | kSeed | kTrials | kCoarsen | kBudget | kPopularity | kMemory | kSim, cmd_simulate);
  add("lfu", "LFU baseline against PAMA",
      kConfig | kCounts | kM | kSeed | kTrials | kCoarsen | kBudget | kPopularity | kMemory, cmd_lfu);
  add("selftest", "Run the acceptance suite", 0, cmd_selftest);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, err, err);
    err << app.help();
    return kExitUsage;
  }

  ScopedWarningCapture warnings;
  auto flush = [&] {
    for (const auto& w : warnings.messages()) err << "warning: " << w << '\n';
  };
  try {
    for (auto& [sub, handler] : commands) {
      if (!sub->parsed()) continue;
      const int code = handler(o, out, err);
      flush();
      return code;
    }
  } catch (const std::invalid_argument& e) {
    flush();
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    flush();
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace mlcache::cli
