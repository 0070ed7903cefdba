#pragma once

// Data ingestion, synthetic generators and the experiment drivers.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <future>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "hrc/algorithms.hpp"
#include "hrc/hiertree.hpp"
#include "hrc/metricspace.hpp"
#include "hrc/objectives.hpp"
#include "hrc/rng.hpp"
#include "hrc/ultrametric.hpp"

namespace hrc {

// Malformed or unusable input data (as opposed to a bad invocation).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// CSV

struct CsvOptions {
  char delimiter = ',';
  bool skip_header = false;
  // Explicit column selection; empty means every column numeric in all rows.
  std::vector<std::size_t> columns;
};

struct CsvIngest {
  PointSet points;
  std::vector<std::size_t> used_columns;
  std::vector<std::size_t> dropped_columns;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v))
    return std::nullopt;
  return v;
}

inline std::vector<std::string_view> split_fields(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

}  // namespace detail

inline CsvIngest parse_points_csv(std::istream& in, const CsvOptions& options) {
  std::vector<std::string> lines;
  std::vector<std::size_t> line_numbers;
  std::string line;
  std::size_t number = 0;
  bool header_skipped = !options.skip_header;
  while (std::getline(in, line)) {
    ++number;
    if (detail::trim(line).empty()) continue;
    if (!header_skipped) {
      header_skipped = true;
      continue;
    }
    lines.push_back(line);
    line_numbers.push_back(number);
  }
  if (lines.empty()) throw DataError("csv: no data rows");

  std::vector<std::vector<std::string_view>> rows;
  rows.reserve(lines.size());
  for (std::size_t r = 0; r < lines.size(); ++r) {
    rows.push_back(detail::split_fields(lines[r], options.delimiter));
    if (rows[r].size() != rows.front().size())
      throw DataError("csv: line " + std::to_string(line_numbers[r]) + " has " +
                      std::to_string(rows[r].size()) + " columns, expected " +
                      std::to_string(rows.front().size()));
  }
  const std::size_t width = rows.front().size();

  CsvIngest out{PointSet(1, {0.0}), {}, {}};
  if (!options.columns.empty()) {
    for (std::size_t c : options.columns)
      if (c >= width)
        throw DataError("csv: selected column " + std::to_string(c) + " but rows have " +
                        std::to_string(width) + " columns");
    out.used_columns = options.columns;
  } else {
    for (std::size_t c = 0; c < width; ++c) {
      const bool numeric = std::all_of(rows.begin(), rows.end(), [c](const auto& row) {
        return detail::parse_number(row[c]).has_value();
      });
      (numeric ? out.used_columns : out.dropped_columns).push_back(c);
    }
  }
  if (out.used_columns.empty()) throw DataError("csv: no numeric columns selected");

  std::vector<double> flat;
  flat.reserve(rows.size() * out.used_columns.size());
  std::vector<std::size_t> bad_lines;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    bool ok = true;
    for (std::size_t c : out.used_columns) {
      auto v = detail::parse_number(rows[r][c]);
      if (!v) {
        ok = false;
        break;
      }
      flat.push_back(*v);
    }
    if (!ok) bad_lines.push_back(line_numbers[r]);
  }
  if (!bad_lines.empty()) {
    std::string msg = "csv: unparseable selected cells on line(s)";
    for (std::size_t k = 0; k < bad_lines.size() && k < 10; ++k)
      msg += (k ? ", " : " ") + std::to_string(bad_lines[k]);
    if (bad_lines.size() > 10) msg += ", ...";
    throw DataError(msg);
  }
  out.points = PointSet(out.used_columns.size(), std::move(flat));
  return out;
}

inline CsvIngest ingest_csv(const std::string& path, const CsvOptions& options = {}) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return parse_points_csv(in, options);
}

inline void write_points_csv(std::ostream& os, const PointSet& points) {
  std::string line;
  for (Index i = 0; i < points.size(); ++i) {
    line.clear();
    auto p = points[i];
    for (std::size_t k = 0; k < p.size(); ++k) {
      if (k) line += ',';
      append_double(line, p[k]);
    }
    line += '\n';
    os << line;
  }
}

// Square matrix CSV, one row per line.
inline DistanceMatrix parse_matrix_csv(std::istream& in, char delimiter = ',') {
  std::vector<double> flat;
  std::string line;
  std::size_t rows = 0, width = 0, number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (detail::trim(line).empty()) continue;
    auto fields = detail::split_fields(line, delimiter);
    if (rows == 0) width = fields.size();
    if (fields.size() != width)
      throw DataError("matrix: line " + std::to_string(number) + " has wrong column count");
    for (auto f : fields) {
      auto v = detail::parse_number(f);
      if (!v) throw DataError("matrix: unparseable entry on line " + std::to_string(number));
      flat.push_back(*v);
    }
    ++rows;
  }
  if (rows == 0 || rows != width) throw DataError("matrix: expected a nonempty square matrix");
  try {
    return DistanceMatrix(rows, std::move(flat));
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("matrix: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Synthetic instances

// k unit-variance spherical Gaussians centred on a cubic lattice with spacing
// `separation`, so centres are pairwise at least `separation` apart. Cluster
// sizes differ by at most one; points are grouped by cluster.
inline PointSet synth_gaussian_mixture(std::size_t k, std::size_t n, std::size_t dim,
                                       double separation, RngStream& rng) {
  if (k == 0 || n == 0 || dim == 0)
    throw std::invalid_argument("synth_gaussian_mixture: k, n and dim must be positive");
  if (separation < 0.0) throw std::invalid_argument("synth_gaussian_mixture: negative separation");
  std::size_t side = 1;
  while (true) {
    std::size_t cells = 1;
    for (std::size_t d = 0; d < dim && cells < k; ++d) cells *= side;
    if (cells >= k) break;
    ++side;
  }
  std::vector<double> flat;
  flat.reserve(n * dim);
  for (std::size_t c = 0; c < k; ++c) {
    std::vector<double> center(dim, 0.0);
    std::size_t code = c;
    for (std::size_t d = 0; d < dim; ++d) {
      center[d] = separation * static_cast<double>(code % side);
      code /= side;
    }
    const std::size_t count = n / k + (c < n % k ? 1 : 0);
    for (std::size_t p = 0; p < count; ++p)
      for (std::size_t d = 0; d < dim; ++d) flat.push_back(center[d] + rng.normal());
  }
  return PointSet(dim, std::move(flat));
}

struct RandomBadInstanceSpec {
  std::size_t n = 2;
  double inter_cluster_distance = 1.0;
};

// n^2 coincident points at the origin followed by n coincident points at
// distance D on the first axis.
inline PointSet build_random_bad_instance(const RandomBadInstanceSpec& spec) {
  if (spec.n < 2) throw std::invalid_argument("random-bad instance: n must be at least 2");
  if (!(spec.inter_cluster_distance > 0.0))
    throw std::invalid_argument("random-bad instance: distance must be positive");
  std::vector<double> flat(spec.n * spec.n, 0.0);
  flat.resize(spec.n * spec.n + spec.n, spec.inter_cluster_distance);
  return PointSet(1, std::move(flat));
}

// Uniform sample of `m` distinct indices, returned sorted.
inline IndexSet subsample(std::size_t n, std::size_t m, RngStream& rng) {
  if (m > n) throw std::invalid_argument("subsample: sample larger than population");
  IndexSet idx(n);
  std::iota(idx.begin(), idx.end(), Index{0});
  for (std::size_t i = 0; i < m; ++i) std::swap(idx[i], idx[i + rng.below(n - i)]);
  idx.resize(m);
  std::sort(idx.begin(), idx.end());
  return idx;
}

// ---------------------------------------------------------------------------
// Aggregates

struct StatsRow {
  std::string algorithm;
  std::string objective;
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
};

inline std::pair<double, double> mean_and_std(const std::vector<double>& xs) {
  if (xs.empty()) return {0.0, 0.0};
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(xs.size()))};
}

// ---------------------------------------------------------------------------
// Table-1 style comparison

inline constexpr std::string_view kUpperBoundName = "upper_bound";

struct ExperimentConfig {
  PointSet dataset{1, {0.0}};
  std::size_t subsample_size = 1000;
  std::size_t num_runs = 5;
  std::vector<Algorithm> algorithms{Algorithm::bkm, Algorithm::avg, Algorithm::single,
                                    Algorithm::random};
  std::vector<ObjectiveKind> objectives{ObjectiveKind::revenue, ObjectiveKind::ckmm};
  std::uint64_t base_seed = 0;
  TwoMeansSolverConfig solver{};  // seed is overridden per run
  bool parallel = true;
};

struct RawRow {
  std::string algorithm;
  std::string objective;
  std::size_t run = 0;
  double value = 0.0;
};

struct Table1Result {
  std::vector<RawRow> raw;
  std::vector<StatsRow> summary;
};

inline void validate(const ExperimentConfig& c) {
  if (c.num_runs == 0) throw std::invalid_argument("experiment: runs must be at least 1");
  if (c.subsample_size == 0) throw std::invalid_argument("experiment: subsample must be positive");
  if (c.subsample_size > c.dataset.size())
    throw std::invalid_argument("experiment: subsample " + std::to_string(c.subsample_size) +
                                " exceeds dataset size " + std::to_string(c.dataset.size()));
  if (c.algorithms.empty()) throw std::invalid_argument("experiment: no algorithms");
  if (c.objectives.empty()) throw std::invalid_argument("experiment: no objectives");
  for (auto o : c.objectives)
    if (o == ObjectiveKind::dasgupta)
      throw std::invalid_argument("experiment: dasgupta needs similarity weights, not points");
}

namespace detail {

inline std::vector<RawRow> table1_run(const ExperimentConfig& config, std::size_t run) {
  // Each run draws from its own stream keyed by base_seed + run.
  const RngStream run_rng(derive_seed(config.base_seed + run, 0));
  RngStream sample_rng = run_rng.substream(0);
  const IndexSet chosen = subsample(config.dataset.size(), config.subsample_size, sample_rng);
  const PointSet points = config.dataset.select(chosen);
  const DistanceMatrix dist = pairwise_distances(points);

  std::vector<RawRow> rows;
  for (std::size_t a = 0; a < config.algorithms.size(); ++a) {
    TwoMeansSolverConfig solver = config.solver;
    solver.seed = run_rng.substream(1 + a).seed();
    const Algorithm algo = config.algorithms[a];
    const HierTree tree = run_algorithm(algo, points, solver, &dist);
    for (ObjectiveKind o : config.objectives) {
      const double v = o == ObjectiveKind::revenue ? tree_revenue(points, tree).total
                                                   : ckmm_value(dist, tree).total;
      rows.push_back({std::string(to_string(algo)), std::string(to_string(o)), run, v});
    }
  }
  for (ObjectiveKind o : config.objectives) {
    const double bound = o == ObjectiveKind::revenue
                             ? revenue_upper_bound(points.size())
                             : static_cast<double>(points.size()) * dist.pair_sum();
    rows.push_back({std::string(kUpperBoundName), std::string(to_string(o)), run, bound});
  }
  return rows;
}

}  // namespace detail

inline Table1Result run_table1(const ExperimentConfig& config) {
  validate(config);
  std::vector<std::vector<RawRow>> per_run(config.num_runs);
  if (config.parallel && config.num_runs > 1) {
    std::vector<std::future<std::vector<RawRow>>> jobs;
    for (std::size_t r = 0; r < config.num_runs; ++r)
      jobs.push_back(std::async(std::launch::async, [&config, r] { return detail::table1_run(config, r); }));
    for (std::size_t r = 0; r < config.num_runs; ++r) per_run[r] = jobs[r].get();
  } else {
    for (std::size_t r = 0; r < config.num_runs; ++r) per_run[r] = detail::table1_run(config, r);
  }

  Table1Result result;
  for (auto& rows : per_run)
    for (auto& row : rows) result.raw.push_back(std::move(row));
  std::stable_sort(result.raw.begin(), result.raw.end(), [](const RawRow& a, const RawRow& b) {
    return std::tie(a.algorithm, a.objective, a.run) < std::tie(b.algorithm, b.objective, b.run);
  });

  std::map<std::pair<std::string, std::string>, std::vector<double>> groups;
  for (const auto& row : result.raw) groups[{row.algorithm, row.objective}].push_back(row.value);
  for (const auto& [key, values] : groups) {
    auto [mean, sd] = mean_and_std(values);
    result.summary.push_back({key.first, key.second, mean, sd});
  }
  return result;
}

inline void write_table1_csv(std::ostream& os, const Table1Result& result) {
  os << "algorithm,objective,run,value\n";
  for (const auto& r : result.raw)
    os << r.algorithm << ',' << r.objective << ',' << r.run << ',' << format_double(r.value) << '\n';
  os << "# summary\n";
  os << "algorithm,objective,mean,std\n";
  for (const auto& s : result.summary)
    os << s.algorithm << ',' << s.objective << ',' << format_double(s.mean) << ','
       << format_double(s.std) << '\n';
}

inline const StatsRow* find_stats(const Table1Result& result, std::string_view algorithm,
                                  std::string_view objective) {
  for (const auto& s : result.summary)
    if (s.algorithm == algorithm && s.objective == objective) return &s;
  return nullptr;
}

// ---------------------------------------------------------------------------
// Random on the unbalanced two-cluster instance

struct RandomBadRow {
  std::size_t n = 0;
  std::size_t points = 0;
  double optimum = 0.0;
  double mean_ratio = 0.0;
  double std_ratio = 0.0;
  double reference_ratio = 0.0;  // generating (clean-first) tree
};

inline std::vector<RandomBadRow> run_random_bad(const std::vector<std::size_t>& sizes,
                                                std::size_t trials, std::uint64_t seed,
                                                double inter_cluster_distance = 1.0) {
  if (trials == 0) throw std::invalid_argument("random-bad: trials must be at least 1");
  std::vector<RandomBadRow> out;
  const RngStream root(seed);
  for (std::size_t s = 0; s < sizes.size(); ++s) {
    const std::size_t n = sizes[s];
    const PointSet points = build_random_bad_instance({n, inter_cluster_distance});
    const double opt = revenue_upper_bound(points.size());
    const RngStream size_rng = root.substream(n);
    std::vector<double> ratios;
    ratios.reserve(trials);
    for (std::size_t t = 0; t < trials; ++t) {
      RngStream rng = size_rng.substream(t);
      ratios.push_back(tree_revenue(points, random_tree(points.size(), rng)).total / opt);
    }
    auto [mean, sd] = mean_and_std(ratios);
    const HierTree reference = build_generating_tree(pairwise_distances(points));
    out.push_back({n, points.size(), opt, mean, sd, tree_revenue(points, reference).total / opt});
  }
  return out;
}

inline void write_random_bad_csv(std::ostream& os, const std::vector<RandomBadRow>& rows) {
  os << "n,points,optimum,mean_ratio,std_ratio,reference_ratio\n";
  for (const auto& r : rows)
    os << r.n << ',' << r.points << ',' << format_double(r.optimum) << ','
       << format_double(r.mean_ratio) << ',' << format_double(r.std_ratio) << ','
       << format_double(r.reference_ratio) << '\n';
}

}  // namespace hrc
