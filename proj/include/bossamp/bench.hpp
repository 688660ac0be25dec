#pragma once

#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "bossamp/metrics.hpp"
#include "bossamp/model.hpp"
#include "bossamp/recover.hpp"

namespace bossamp {

// Configuration-driven experiment harness: variable-SNR and variable-M sweeps
// and success-probability grids for empirical phase transitions, with seeded
// realizations that are independent of the worker count.

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Family { VariableSnr, VariableM, PhaseTransition };
enum class Algorithm { Amp, Bamp, BossampGroup, BossampJoint };

struct ExperimentConfig {
  Family family = Family::VariableSnr;
  Algorithm algorithm = Algorithm::Bamp;
  PriorKind prior_kind = PriorKind::SparseBinary;
  Index n = 1000;
  Index k = 160;
  Index group_size = 1;
  Index blocks = 1;
  bool shared_matrix = false;
  std::vector<Index> m;          // single value or sweep
  std::vector<double> snr_db;    // single value or sweep
  std::vector<double> undersampling;  // phase-transition axes
  std::vector<double> sparsity;
  Index realizations = 100;
  std::uint64_t master_seed = 1;
  double eps_tol = 1e-4;
  int t_max = 100;
  double sigma_x_sq = 1.0;
  double lambda = 0.0;  // 0 = use the K-dependent default
};

inline const char* family_name(Family f) {
  switch (f) {
    case Family::VariableSnr: return "variable-snr";
    case Family::VariableM: return "variable-m";
    default: return "phase-transition";
  }
}

// --- strict key=value config parsing -----------------------------------------

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

inline double parse_double(const std::string& raw, const std::string& key) {
  const std::string s = trim(raw);
  if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': cannot parse number '" + s + "'");
  }
}

inline long long parse_int(const std::string& raw, const std::string& key) {
  const std::string s = trim(raw);
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': cannot parse integer '" + s + "'");
  }
}

// Sweep syntax: a single number, a comma list "a,b,c", or a range "lo:step:hi"
// (inclusive of hi up to a half-step slack).
inline std::vector<double> parse_sweep(const std::string& raw, const std::string& key) {
  const std::string s = trim(raw);
  std::vector<double> out;
  if (s.find(':') != std::string::npos) {
    std::stringstream ss(s);
    std::string lo_s, step_s, hi_s;
    if (!std::getline(ss, lo_s, ':') || !std::getline(ss, step_s, ':') ||
        !std::getline(ss, hi_s) || ss.rdbuf()->in_avail() != 0)
      throw ConfigError("config key '" + key + "': range must be lo:step:hi");
    const double lo = parse_double(lo_s, key);
    const double step = parse_double(step_s, key);
    const double hi = parse_double(hi_s, key);
    if (!(step > 0.0) || hi < lo)
      throw ConfigError("config key '" + key + "': range needs step > 0 and hi >= lo");
    const long long count = static_cast<long long>(std::floor((hi - lo) / step + 0.5)) + 1;
    for (long long i = 0; i < count; ++i) {
      const double v = lo + static_cast<double>(i) * step;
      if (v <= hi + 0.5 * step) out.push_back(v);
    }
  } else {
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_double(item, key));
  }
  if (out.empty()) throw ConfigError("config key '" + key + "': empty sweep");
  return out;
}

struct RawConfig {
  std::map<std::string, std::string> values;
  std::vector<std::string> consumed;

  bool has(const std::string& key) const { return values.count(key) != 0; }

  std::optional<std::string> take(const std::string& key) {
    auto it = values.find(key);
    if (it == values.end()) return std::nullopt;
    std::string v = it->second;
    values.erase(it);
    return v;
  }

  std::string require(const std::string& key) {
    auto v = take(key);
    if (!v) throw ConfigError("missing required config key '" + key + "'");
    return *v;
  }

  void reject_remaining() const {
    if (values.empty()) return;
    std::string keys;
    for (const auto& [k, unused] : values) keys += (keys.empty() ? "" : ", ") + k;
    throw ConfigError("unknown or misplaced config keys: " + keys);
  }
};

inline RawConfig read_key_value_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  RawConfig raw;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key = value");
    if (!raw.values.emplace(key, value).second)
      throw ConfigError(path + ":" + std::to_string(line_no) + ": duplicate key '" + key + "'");
  }
  return raw;
}

inline Algorithm parse_algorithm(const std::string& s) {
  if (s == "amp") return Algorithm::Amp;
  if (s == "bamp") return Algorithm::Bamp;
  if (s == "bossamp-group") return Algorithm::BossampGroup;
  if (s == "bossamp-joint") return Algorithm::BossampJoint;
  throw ConfigError("unknown algorithm '" + s +
                    "' (expected amp | bamp | bossamp-group | bossamp-joint)");
}

inline PriorKind parse_prior(const std::string& s) {
  if (s == "sparse-binary") return PriorKind::SparseBinary;
  if (s == "sparse-gaussian") return PriorKind::SparseGaussian;
  throw ConfigError("unknown prior '" + s + "' (expected sparse-binary | sparse-gaussian)");
}

}  // namespace detail

inline void validate_config(const ExperimentConfig& cfg) {
  if (cfg.n < 1) throw ConfigError("n must be >= 1");
  if (cfg.group_size < 1) throw ConfigError("group_size must be >= 1");
  if (cfg.n % cfg.group_size != 0) throw ConfigError("group_size must divide n");
  if (cfg.realizations < 1) throw ConfigError("realizations must be >= 1");
  if (!(cfg.eps_tol > 0.0)) throw ConfigError("eps_tol must be > 0");
  if (cfg.t_max < 1) throw ConfigError("t_max must be >= 1");
  if (cfg.algorithm == Algorithm::BossampJoint && cfg.blocks < 1)
    throw ConfigError("blocks must be >= 1");
  if (cfg.prior_kind == PriorKind::SparseGaussian && !(cfg.sigma_x_sq > 0.0))
    throw ConfigError("sigma_x_sq must be > 0");
  if (cfg.family == Family::PhaseTransition) {
    if (cfg.algorithm == Algorithm::BossampJoint)
      throw ConfigError("phase-transition runs support amp, bamp and bossamp-group only");
    if (cfg.undersampling.empty() || cfg.sparsity.empty())
      throw ConfigError("phase-transition needs undersampling and sparsity axes");
    for (const auto* axis : {&cfg.undersampling, &cfg.sparsity}) {
      for (std::size_t i = 0; i < axis->size(); ++i) {
        if (!((*axis)[i] > 0.0 && (*axis)[i] < 1.0))
          throw ConfigError("grid axis values must lie strictly inside (0, 1)");
        if (i > 0 && !((*axis)[i - 1] < (*axis)[i]))
          throw ConfigError("grid axes must be strictly increasing");
      }
    }
    if (cfg.snr_db.size() != 1)
      throw ConfigError("phase-transition uses a single snr_db value");
    // M = round(u*N) <= round(0.95*N) < N: undersampled by construction.
  } else {
    if (cfg.k < 1 || cfg.k > cfg.n) throw ConfigError("k must lie in [1, n]");
    if (cfg.k % cfg.group_size != 0)
      throw ConfigError("k must be divisible by group_size");
    if (cfg.m.empty() || cfg.snr_db.empty())
      throw ConfigError("m and snr_db are required");
    if (cfg.family == Family::VariableSnr && cfg.m.size() != 1)
      throw ConfigError("variable-snr expects a single m and an snr_db sweep");
    if (cfg.family == Family::VariableM && cfg.snr_db.size() != 1)
      throw ConfigError("variable-m expects a single snr_db and an m sweep");
    if (cfg.family == Family::VariableSnr && cfg.snr_db.size() < 1)
      throw ConfigError("variable-snr needs an snr_db sweep");
    for (Index m : cfg.m)
      if (m < 1) throw ConfigError("m must be >= 1");
  }
}

inline ExperimentConfig parse_config_file(const std::string& path, Family family) {
  auto raw = detail::read_key_value_file(path);
  ExperimentConfig cfg;
  cfg.family = family;

  if (auto fam = raw.take("family")) {
    if (*fam != family_name(family))
      throw ConfigError("config family '" + *fam + "' does not match subcommand '" +
                        family_name(family) + "'");
  }
  cfg.algorithm = detail::parse_algorithm(detail::trim(raw.require("algorithm")));
  cfg.prior_kind = detail::parse_prior(detail::trim(raw.require("prior")));
  cfg.n = detail::parse_int(raw.require("n"), "n");
  cfg.realizations = detail::parse_int(raw.require("realizations"), "realizations");
  if (auto v = raw.take("master_seed"))
    cfg.master_seed = static_cast<std::uint64_t>(detail::parse_int(*v, "master_seed"));
  if (auto v = raw.take("eps_tol")) cfg.eps_tol = detail::parse_double(*v, "eps_tol");
  if (auto v = raw.take("t_max")) cfg.t_max = static_cast<int>(detail::parse_int(*v, "t_max"));
  if (auto v = raw.take("group_size"))
    cfg.group_size = detail::parse_int(*v, "group_size");

  if (cfg.prior_kind == PriorKind::SparseGaussian) {
    if (auto v = raw.take("sigma_x_sq")) cfg.sigma_x_sq = detail::parse_double(*v, "sigma_x_sq");
  } else if (raw.has("sigma_x_sq")) {
    throw ConfigError("sigma_x_sq is only valid with prior = sparse-gaussian");
  }
  if (cfg.algorithm == Algorithm::Amp) {
    if (auto v = raw.take("lambda")) cfg.lambda = detail::parse_double(*v, "lambda");
  } else if (raw.has("lambda")) {
    throw ConfigError("lambda is only valid for algorithm = amp");
  }
  if (cfg.algorithm == Algorithm::BossampJoint) {
    cfg.blocks = detail::parse_int(raw.require("blocks"), "blocks");
    if (auto v = raw.take("shared_matrix"))
      cfg.shared_matrix = (*v == "true" || *v == "1");
  } else if (raw.has("blocks") || raw.has("shared_matrix")) {
    throw ConfigError("blocks/shared_matrix are only valid for algorithm = bossamp-joint");
  }

  if (family == Family::PhaseTransition) {
    cfg.undersampling = raw.has("undersampling")
                            ? detail::parse_sweep(*raw.take("undersampling"), "undersampling")
                            : detail::parse_sweep("0.05:0.05:0.95", "undersampling");
    cfg.sparsity = raw.has("sparsity") ? detail::parse_sweep(*raw.take("sparsity"), "sparsity")
                                       : detail::parse_sweep("0.05:0.05:0.95", "sparsity");
    cfg.snr_db = {raw.has("snr_db") ? detail::parse_double(*raw.take("snr_db"), "snr_db")
                                    : std::numeric_limits<double>::infinity()};
  } else {
    cfg.k = detail::parse_int(raw.require("k"), "k");
    const std::string m_raw = raw.require("m");
    const std::string snr_raw = raw.require("snr_db");
    for (double v : detail::parse_sweep(m_raw, "m")) {
      const Index mi = static_cast<Index>(std::llround(v));
      if (std::abs(v - static_cast<double>(mi)) > 1e-9)
        throw ConfigError("m values must be integers");
      cfg.m.push_back(mi);
    }
    cfg.snr_db = detail::parse_sweep(snr_raw, "snr_db");
  }

  raw.reject_remaining();
  validate_config(cfg);
  return cfg;
}

// --- deterministic parallel runner -------------------------------------------

namespace detail {

template <class F>
void parallel_for(Index count, int threads, F&& body) {
  threads = std::max(1, threads);
  if (threads == 1 || count <= 1) {
    for (Index i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<Index> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const Index i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < threads; ++w) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

struct RealizationOutcome {
  bool divergent = false;
  RealizationMetrics metrics;
};

}  // namespace detail

struct DivergenceLog {
  Index count = 0;
  std::vector<std::string> notes;
};

namespace detail {

inline RealizationMetrics run_single(const ExperimentConfig& cfg, Index m_rows, Index k,
                                     double snr_db, std::uint64_t seed) {
  const StoppingRule stop{cfg.eps_tol, cfg.t_max};
  RealizationMetrics out;
  out.seed = seed;
  if (cfg.algorithm == Algorithm::BossampJoint) {
    const auto inst = make_joint_instance(m_rows, cfg.n, k, cfg.group_size, cfg.prior_kind,
                                          snr_db, seed, cfg.blocks, cfg.shared_matrix,
                                          cfg.sigma_x_sq);
    const auto results = bossamp_joint(inst.ys, inst.as, inst.prior, stop);
    double nm = 0.0, fa = 0.0;
    for (Index b = 0; b < cfg.blocks; ++b) {
      nm += nmse(inst.xs[static_cast<std::size_t>(b)], results[static_cast<std::size_t>(b)].x_hat);
      fa += fanmse(inst.xs[static_cast<std::size_t>(b)],
                   results[static_cast<std::size_t>(b)].x_hat);
    }
    out.nmse = nm / static_cast<double>(cfg.blocks);
    out.fanmse = fa / static_cast<double>(cfg.blocks);
    out.iterations = results.front().iterations;
  } else {
    const auto inst = make_instance(m_rows, cfg.n, k, cfg.group_size, cfg.prior_kind, snr_db,
                                    seed, cfg.sigma_x_sq);
    RecoveryResult res;
    switch (cfg.algorithm) {
      case Algorithm::Amp: {
        const double lambda = cfg.lambda > 0.0 ? cfg.lambda : default_amp_lambda(k);
        res = amp(inst.y, inst.a, lambda, stop);
        break;
      }
      case Algorithm::Bamp:
        res = bamp(inst.y, inst.a, inst.prior, stop);
        break;
      default:
        res = bossamp_group(inst.y, inst.a, inst.prior, inst.groups, stop);
        break;
    }
    out.nmse = nmse(inst.x_true, res.x_hat);
    out.fanmse = fanmse(inst.x_true, res.x_hat);
    out.iterations = res.iterations;
  }
  out.success = success_indicator(out.nmse);
  return out;
}

}  // namespace detail

// --- result tables and CSV ----------------------------------------------------

struct ResultTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// Fixed-point with 10 fractional digits; the CSV contract is byte-exact.
inline std::string format_fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10f", v);
  return buf;
}

inline std::string to_csv_string(const ResultTable& table) {
  std::string out;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (c) out += ',';
    out += table.header[c];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += row[c];
    }
    out += '\n';
  }
  return out;
}

inline void write_csv(const ResultTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file for writing: " + path);
  out << to_csv_string(table);
  if (!out) throw std::runtime_error("failed while writing: " + path);
}

inline double to_db(double linear) { return 10.0 * std::log10(linear); }

// Aggregate of one sweep point; means exclude divergent realizations.
struct SweepPointSummary {
  double mean_nmse = 0.0;
  double mean_fanmse = 0.0;
  double mean_iterations = 0.0;
  double avg_success = 0.0;
  Index included = 0;
  Index divergent = 0;
};

namespace detail {

inline SweepPointSummary summarize(const std::vector<RealizationOutcome>& outcomes) {
  SweepPointSummary s;
  for (const auto& o : outcomes) {
    if (o.divergent) {
      ++s.divergent;
      continue;
    }
    s.mean_nmse += o.metrics.nmse;
    s.mean_fanmse += o.metrics.fanmse;
    s.mean_iterations += static_cast<double>(o.metrics.iterations);
    s.avg_success += o.metrics.success ? 1.0 : 0.0;
    ++s.included;
  }
  if (s.included > 0) {
    const double inv = 1.0 / static_cast<double>(s.included);
    s.mean_nmse *= inv;
    s.mean_fanmse *= inv;
    s.mean_iterations *= inv;
    s.avg_success *= inv;
  }
  return s;
}

}  // namespace detail

// Runs the configured sweep; rows follow sweep order. Deterministic for a
// fixed config: per-realization seeds depend only on (master_seed, index).
inline ResultTable run_experiment(const ExperimentConfig& cfg, int threads = 1,
                                  DivergenceLog* divergence_log = nullptr) {
  validate_config(cfg);
  if (cfg.family == Family::PhaseTransition)
    throw ConfigError("run_experiment handles variable-snr / variable-m; use run_phase_transition");

  const bool snr_sweep = cfg.family == Family::VariableSnr;
  const Index points = snr_sweep ? static_cast<Index>(cfg.snr_db.size())
                                 : static_cast<Index>(cfg.m.size());
  const Index r = cfg.realizations;
  std::vector<std::vector<detail::RealizationOutcome>> outcomes(
      static_cast<std::size_t>(points),
      std::vector<detail::RealizationOutcome>(static_cast<std::size_t>(r)));

  detail::parallel_for(points * r, threads, [&](Index task) {
    const Index p = task / r;
    const Index j = task % r;
    const Index m_rows = snr_sweep ? cfg.m.front() : cfg.m[static_cast<std::size_t>(p)];
    const double snr = snr_sweep ? cfg.snr_db[static_cast<std::size_t>(p)] : cfg.snr_db.front();
    const std::uint64_t seed =
        derive_seed(cfg.master_seed, SeedRole::Realization, static_cast<std::uint64_t>(task));
    auto& slot = outcomes[static_cast<std::size_t>(p)][static_cast<std::size_t>(j)];
    try {
      slot.metrics = detail::run_single(cfg, m_rows, cfg.k, snr, seed);
    } catch (const DivergenceError&) {
      slot.divergent = true;
    }
  });

  ResultTable table;
  table.header = {snr_sweep ? "snr_db" : "m", "mean_nmse_db", "mean_fanmse_db",
                  "mean_iterations", "avg_success", "realizations", "master_seed"};
  for (Index p = 0; p < points; ++p) {
    const auto s = detail::summarize(outcomes[static_cast<std::size_t>(p)]);
    if (divergence_log && s.divergent > 0) {
      divergence_log->count += s.divergent;
      divergence_log->notes.push_back("sweep point " + std::to_string(p) + ": " +
                                      std::to_string(s.divergent) + " divergent realization(s)");
    }
    std::vector<std::string> row;
    row.push_back(snr_sweep ? format_fixed(cfg.snr_db[static_cast<std::size_t>(p)])
                            : std::to_string(cfg.m[static_cast<std::size_t>(p)]));
    row.push_back(format_fixed(to_db(s.mean_nmse)));
    row.push_back(format_fixed(to_db(s.mean_fanmse)));
    row.push_back(format_fixed(s.mean_iterations));
    row.push_back(format_fixed(s.avg_success));
    row.push_back(std::to_string(s.included));
    row.push_back(std::to_string(cfg.master_seed));
    table.rows.push_back(std::move(row));
  }
  return table;
}

// --- phase transition ----------------------------------------------------------

struct ExperimentGrid {
  struct Cell {
    Index m = 0;
    Index k = 0;
    double avg_success = 0.0;
    Index realizations = 0;
    Index divergent = 0;
  };
  std::vector<double> undersampling_axis;
  std::vector<double> sparsity_axis;
  std::vector<std::vector<Cell>> cells;  // [undersampling][sparsity]
  std::uint64_t master_seed = 0;

  SuccessGrid to_success_grid() const {
    SuccessGrid g;
    g.xs = undersampling_axis;
    g.ys = sparsity_axis;
    g.values.resize(static_cast<Index>(g.xs.size()), static_cast<Index>(g.ys.size()));
    for (std::size_t i = 0; i < cells.size(); ++i)
      for (std::size_t j = 0; j < cells[i].size(); ++j)
        g.values(static_cast<Index>(i), static_cast<Index>(j)) = cells[i][j].avg_success;
    return g;
  }
};

// Per-cell problem size: M = round(u*N); K = round(s*M) rounded down to a
// multiple of the group size, at least one group.
inline std::pair<Index, Index> phase_transition_cell_size(Index n, Index group_size,
                                                          double undersampling,
                                                          double sparsity) {
  const Index m_rows = std::max<Index>(1, static_cast<Index>(std::llround(undersampling * n)));
  Index k = static_cast<Index>(std::llround(sparsity * m_rows));
  k = (k / group_size) * group_size;
  k = std::max(k, group_size);
  k = std::min(k, (n / group_size) * group_size);
  return {m_rows, k};
}

inline ExperimentGrid run_phase_transition(const ExperimentConfig& cfg, int threads = 1,
                                           DivergenceLog* divergence_log = nullptr) {
  validate_config(cfg);
  if (cfg.family != Family::PhaseTransition)
    throw ConfigError("run_phase_transition needs family = phase-transition");

  const Index p = static_cast<Index>(cfg.undersampling.size());
  const Index q = static_cast<Index>(cfg.sparsity.size());
  const Index r = cfg.realizations;
  const double snr = cfg.snr_db.front();

  std::vector<std::vector<std::vector<detail::RealizationOutcome>>> outcomes(
      static_cast<std::size_t>(p),
      std::vector<std::vector<detail::RealizationOutcome>>(
          static_cast<std::size_t>(q),
          std::vector<detail::RealizationOutcome>(static_cast<std::size_t>(r))));

  detail::parallel_for(p * q * r, threads, [&](Index task) {
    const Index cell = task / r;
    const Index j = task % r;
    const Index ui = cell / q;
    const Index sj = cell % q;
    const auto [m_rows, k] = phase_transition_cell_size(
        cfg.n, cfg.group_size, cfg.undersampling[static_cast<std::size_t>(ui)],
        cfg.sparsity[static_cast<std::size_t>(sj)]);
    const std::uint64_t seed =
        derive_seed(cfg.master_seed, SeedRole::Realization, static_cast<std::uint64_t>(task));
    auto& slot = outcomes[static_cast<std::size_t>(ui)][static_cast<std::size_t>(sj)]
                         [static_cast<std::size_t>(j)];
    try {
      slot.metrics = detail::run_single(cfg, m_rows, k, snr, seed);
    } catch (const DivergenceError&) {
      slot.divergent = true;
    }
  });

  ExperimentGrid grid;
  grid.undersampling_axis = cfg.undersampling;
  grid.sparsity_axis = cfg.sparsity;
  grid.master_seed = cfg.master_seed;
  grid.cells.resize(static_cast<std::size_t>(p));
  for (Index ui = 0; ui < p; ++ui) {
    grid.cells[static_cast<std::size_t>(ui)].resize(static_cast<std::size_t>(q));
    for (Index sj = 0; sj < q; ++sj) {
      const auto s = detail::summarize(outcomes[static_cast<std::size_t>(ui)]
                                               [static_cast<std::size_t>(sj)]);
      auto& cell = grid.cells[static_cast<std::size_t>(ui)][static_cast<std::size_t>(sj)];
      const auto [m_rows, k] = phase_transition_cell_size(
          cfg.n, cfg.group_size, cfg.undersampling[static_cast<std::size_t>(ui)],
          cfg.sparsity[static_cast<std::size_t>(sj)]);
      cell.m = m_rows;
      cell.k = k;
      cell.avg_success = s.avg_success;
      cell.realizations = s.included;
      cell.divergent = s.divergent;
      if (divergence_log && s.divergent > 0) {
        divergence_log->count += s.divergent;
        divergence_log->notes.push_back(
            "cell (" + std::to_string(ui) + "," + std::to_string(sj) + "): " +
            std::to_string(s.divergent) + " divergent realization(s)");
      }
    }
  }
  return grid;
}

inline ResultTable grid_table(const ExperimentGrid& grid) {
  ResultTable table;
  table.header = {"undersampling", "sparsity", "m", "k", "avg_success", "realizations",
                  "master_seed"};
  for (std::size_t i = 0; i < grid.cells.size(); ++i) {
    for (std::size_t j = 0; j < grid.cells[i].size(); ++j) {
      const auto& cell = grid.cells[i][j];
      table.rows.push_back({format_fixed(grid.undersampling_axis[i]),
                            format_fixed(grid.sparsity_axis[j]), std::to_string(cell.m),
                            std::to_string(cell.k), format_fixed(cell.avg_success),
                            std::to_string(cell.realizations),
                            std::to_string(grid.master_seed)});
    }
  }
  return table;
}

inline std::vector<Polyline> contour_half(const ExperimentGrid& grid) {
  return contour_half(grid.to_success_grid());
}

inline ResultTable contour_table(const std::vector<Polyline>& polylines) {
  ResultTable table;
  table.header = {"polyline", "undersampling", "sparsity"};
  for (std::size_t id = 0; id < polylines.size(); ++id)
    for (const auto& pt : polylines[id])
      table.rows.push_back({std::to_string(id), format_fixed(pt[0]), format_fixed(pt[1])});
  return table;
}

}  // namespace bossamp
