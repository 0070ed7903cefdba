// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "hrc/hrc.hpp"

using namespace hrc;
namespace fs = std::filesystem;

namespace {

// Tolerances and budgets.
constexpr double kModeRelTol = 1e-9;
constexpr double kFullRevenueAbsTol = 1e-6;
constexpr double kEmbedRelTol = 1e-9;
constexpr double kApproxSlack = 1e-9;
constexpr double kTriangleRelTol = 1e-9;
constexpr double kReferenceTol = 1e-9;
constexpr double kSplitBoundDenominator = 35.0;
constexpr double kHighRevenueFraction = 4.0 / 7.0;
constexpr double kBkmFractionOfBound = 0.99;

struct Outcome {
  bool ok = true;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double budget_seconds;
  std::function<Outcome()> body;
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

PointSet random_instance(RngStream& rng, std::size_t n, std::size_t dim) {
  std::vector<double> flat(n * dim);
  switch (rng.below(3)) {
    case 0:
      for (double& x : flat) x = rng.normal();
      break;
    case 1:
      for (double& x : flat) x = 10.0 * rng.uniform();
      break;
    default: {
      // a few tight blobs at random offsets
      const std::size_t blobs = 1 + rng.below(3);
      std::vector<double> centres(blobs * dim);
      for (double& c : centres) c = 20.0 * rng.uniform();
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t b = rng.below(blobs);
        for (std::size_t k = 0; k < dim; ++k) flat[i * dim + k] = centres[b * dim + k] + 0.5 * rng.normal();
      }
    }
  }
  return PointSet(dim, std::move(flat));
}

// Shortest-path closure of random edge lengths.
DistanceMatrix random_graph_metric(RngStream& rng, std::size_t n) {
  std::vector<double> d(n * n, 0.0);
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) d[i * n + j] = d[j * n + i] = 0.1 + 10.0 * rng.uniform();
  for (Index k = 0; k < n; ++k)
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) d[i * n + j] = std::min(d[i * n + j], d[i * n + k] + d[k * n + j]);
  return DistanceMatrix(n, std::move(d));
}

std::vector<UltrametricSpec> ultrametric_specs() {
  RngStream rng(derive_seed(20, 2));
  std::vector<UltrametricSpec> specs;
  for (int k = 0; k < 100; ++k) {
    const std::size_t n = k == 0 ? 64 : 2 + rng.below(63);
    specs.push_back(generate_random(n, rng, k % 2 ? WeightMode::with_ties : WeightMode::strict));
  }
  return specs;
}

std::vector<DistanceMatrix> six_point_metrics() {
  RngStream rng(derive_seed(20, 5));
  std::vector<DistanceMatrix> out;
  for (int k = 0; k < 50; ++k)
    out.push_back(k % 2 ? random_graph_metric(rng, 6)
                        : pairwise_distances(random_instance(rng, 6, 1 + rng.below(5))));
  return out;
}

Outcome mode_equivalence() {
  RngStream rng(derive_seed(20, 1));
  double worst = 0.0;
  std::size_t checked = 0;
  for (int inst = 0; inst < 200; ++inst) {
    const std::size_t n = 2 + rng.below(29), dim = 1 + rng.below(5);
    const PointSet p = random_instance(rng, n, dim);
    for (int t = 0; t < 5; ++t) {
      const HierTree tree = random_tree(n, rng);
      const double a = tree_revenue(p, tree, RevenueMode::split_sum).total;
      const double b = tree_revenue(p, tree, RevenueMode::pair_sum).total;
      worst = std::max(worst, std::abs(a - b) / std::max(1.0, std::abs(a)));
      ++checked;
    }
  }
  return {worst <= kModeRelTol, std::to_string(checked) + " trees, max rel diff " + fmt("%.3g", worst)};
}

Outcome generating_full_revenue(const std::vector<UltrametricSpec>& specs) {
  double worst = 0.0;
  std::size_t largest = 0;
  for (const auto& spec : specs) {
    const PointSet p = embed_euclidean(spec);
    const HierTree tree = build_generating_tree(pairwise_distances(p));
    const double gap = std::abs(tree_revenue(p, tree).total - revenue_upper_bound(p.size()));
    worst = std::max(worst, gap);
    largest = std::max(largest, p.size());
  }
  return {worst <= kFullRevenueAbsTol, std::to_string(specs.size()) + " specs up to n=" +
                                           std::to_string(largest) + ", max |rev - C(n,2)| " +
                                           fmt("%.3g", worst)};
}

Outcome embedding_exact(const std::vector<UltrametricSpec>& specs) {
  double worst = 0.0;
  for (const auto& spec : specs) {
    const PointSet p = embed_euclidean(spec);
    const LcaIndex lca(spec.topology);
    for (Index i = 0; i < p.size(); ++i)
      for (Index j = i + 1; j < p.size(); ++j) {
        const double w = spec.weights[lca.lca_of_leaves(i, j)];
        worst = std::max(worst, std::abs(distance(p, i, j) - w) / w);
      }
  }
  return {worst <= kEmbedRelTol, "max rel error " + fmt("%.3g", worst)};
}

Outcome bisecting_bound() {
  RngStream rng(derive_seed(20, 4));
  TwoMeansSolverConfig config;
  config.kind = TwoMeansKind::exhaustive;
  double min_ratio = INFINITY, min_fraction = INFINITY, min_tree = INFINITY;
  std::size_t split_count = 0, failures = 0;
  for (int inst = 0; inst < 500; ++inst) {
    const std::size_t n = 2 + rng.below(11), dim = 1 + rng.below(4);
    const PointSet p = random_instance(rng, n, dim);
    const HierTree tree = bisecting_kmeans(p, config);
    for (const Split& s : splits(tree)) {
      const double bound = double(s.left.size() * s.right.size()) / kSplitBoundDenominator;
      const double rev = split_revenue(p, s.left, s.right);
      const double fraction = high_revenue_stats(p, s.left, s.right).fraction;
      min_ratio = std::min(min_ratio, rev / (bound * kSplitBoundDenominator));
      min_fraction = std::min(min_fraction, fraction);
      if (rev < bound || fraction < kHighRevenueFraction) ++failures;
      ++split_count;
    }
    const double total = tree_revenue(p, tree).total;
    min_tree = std::min(min_tree, total / revenue_upper_bound(n));
    if (total < revenue_upper_bound(n) / kSplitBoundDenominator) ++failures;
  }
  return {failures == 0, std::to_string(split_count) + " splits, " + std::to_string(failures) +
                             " violations; min rev/(|A||B|) " + fmt("%.3f", min_ratio) +
                             ", min high-revenue fraction " + fmt("%.3f", min_fraction) +
                             ", min tree ratio " + fmt("%.3f", min_tree)};
}

Outcome half_approximation(const std::vector<DistanceMatrix>& metrics, const std::vector<HierTree>& trees) {
  double ckmm_worst = INFINITY, das_worst = 0.0;
  std::size_t failures = 0;
  for (const auto& d : metrics) {
    if (!check_metric(d, 1e-9).ok) ++failures;
    const double opt = brute_force_opt(d, ObjectiveKind::ckmm).value;
    double lo = INFINITY, hi = 0.0;
    for (const auto& t : trees) {
      const double v = ckmm_value(d, t).total;
      ckmm_worst = std::min(ckmm_worst, v / opt);
      if (v < 0.5 * opt - kApproxSlack) ++failures;
      const double c = dasgupta_cost(d, t).total;
      lo = std::min(lo, c);
      hi = std::max(hi, c);
    }
    das_worst = std::max(das_worst, hi / lo);
    if (hi > 2.0 * lo + kApproxSlack) ++failures;
  }
  return {failures == 0, std::to_string(metrics.size()) + " metrics x " + std::to_string(trees.size()) +
                             " trees; min ckmm/opt " + fmt("%.4f", ckmm_worst) +
                             ", max dasgupta cost ratio " + fmt("%.4f", das_worst)};
}

Outcome triangle_identity(const std::vector<DistanceMatrix>& metrics, const std::vector<HierTree>& trees) {
  double worst = 0.0;
  std::size_t checked = 0;
  auto check = [&](const DistanceMatrix& d, const HierTree& t) {
    const double total = triangle_decompose(d, t).reconstructed_total;
    const double a = ckmm_value(d, t).total, b = dasgupta_cost(d, t).total;
    worst = std::max({worst, std::abs(total - a) / std::max(1.0, std::abs(a)),
                      std::abs(total - b) / std::max(1.0, std::abs(b))});
    ++checked;
  };
  for (const auto& d : metrics)
    for (const auto& t : trees) check(d, t);
  RngStream rng(derive_seed(20, 6));
  for (int k = 0; k < 100; ++k) {
    const PointSet p = random_instance(rng, 40, 1 + rng.below(5));
    check(pairwise_distances(p), random_tree(40, rng));
  }
  return {worst <= kTriangleRelTol, std::to_string(checked) + " (instance, tree) pairs, max rel diff " +
                                        fmt("%.3g", worst)};
}

Outcome random_is_bad() {
  const auto rows = run_random_bad({4, 8, 12}, 200, 20);
  bool ok = true;
  std::string detail = "mean ratios";
  for (std::size_t k = 0; k < rows.size(); ++k) {
    detail += " n=" + std::to_string(rows[k].n) + ":" + fmt("%.4f", rows[k].mean_ratio);
    if (std::abs(rows[k].reference_ratio - 1.0) > kReferenceTol) ok = false;
    if (k > 0 && !(rows[k].mean_ratio < rows[k - 1].mean_ratio)) ok = false;
  }
  double ref_gap = 0.0;
  for (const auto& r : rows) ref_gap = std::max(ref_gap, std::abs(r.reference_ratio - 1.0));
  return {ok, detail + "; max |reference - 1| " + fmt("%.3g", ref_gap)};
}

// ---------------------------------------------------------------------------
// CLI-driven criteria

struct CliRun {
  int code;
  std::string err;
};

CliRun run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "hrclust");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Summary rows keyed "algorithm,objective" -> (mean, std).
std::map<std::string, std::pair<double, double>> read_summary(const std::string& text) {
  std::map<std::string, std::pair<double, double>> out;
  std::istringstream in(text);
  std::string line;
  bool in_summary = false;
  while (std::getline(in, line)) {
    if (line == "# summary") {
      in_summary = true;
      std::getline(in, line);  // header
      continue;
    }
    if (!in_summary) continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
    if (f.size() == 4) out[f[0] + "," + f[1]] = {std::stod(f[2]), std::stod(f[3])};
  }
  return out;
}

const std::vector<std::string> kUpperBoundArgs{"experiment", "table1", "--subsample", "1000", "--seed", "20"};
const std::vector<std::string> kMixtureArgs{"experiment", "table1", "--synth-k", "8", "--separation", "20",
                                            "--subsample", "500", "--runs", "5", "--seed", "20"};
const std::vector<std::string> kRandomBadArgs{"experiment", "random-bad", "--sizes", "4,8,12",
                                              "--trials", "200", "--seed", "20"};

Outcome table1_rows(const fs::path& dir) {
  auto with_out = [](std::vector<std::string> a, const fs::path& p) {
    a.push_back("--out");
    a.push_back(p.string());
    return a;
  };
  const CliRun ub = run_cli(with_out(kUpperBoundArgs, dir / "ub.csv"));
  if (ub.code != 0) return {false, "table1 --subsample 1000 exited " + std::to_string(ub.code) + ": " + ub.err};
  const auto ub_summary = read_summary(slurp(dir / "ub.csv"));
  const auto it = ub_summary.find("upper_bound,revenue");
  const bool bound_ok = it != ub_summary.end() && it->second.first == 499500.0 && it->second.second == 0.0;
  const std::string ub_text = it == ub_summary.end()
                                  ? "missing upper_bound row"
                                  : "upper_bound (" + fmt("%.0f", it->second.first) + ", " +
                                        fmt("%g", it->second.second) + ")";

  const CliRun mix = run_cli(with_out(kMixtureArgs, dir / "mix.csv"));
  if (mix.code != 0) return {false, "mixture run exited " + std::to_string(mix.code) + ": " + mix.err};
  const auto s = read_summary(slurp(dir / "mix.csv"));
  const double bound = revenue_upper_bound(500);
  const double bkm = s.at("bkm,revenue").first;
  const double rnd = s.at("random,revenue").first;
  bool ranking_ok = bkm >= kBkmFractionOfBound * bound;
  for (const char* a : {"bkm", "avg", "single"}) ranking_ok = ranking_ok && rnd < s.at(std::string(a) + ",revenue").first;
  return {bound_ok && ranking_ok,
          ub_text + "; mixture bkm/C(500,2) " + fmt("%.4f", bkm / bound) + ", avg " +
              fmt("%.4f", s.at("avg,revenue").first / bound) + ", single " +
              fmt("%.4f", s.at("single,revenue").first / bound) + ", random " + fmt("%.4f", rnd / bound)};
}

Outcome determinism(const fs::path& dir) {
  const fs::path spec = dir / "spec.txt", pts = dir / "pts.csv", tree = dir / "tree.txt";
  std::vector<std::pair<std::string, std::vector<std::string>>> jobs{
      {"table1-ub", kUpperBoundArgs},
      {"table1-mix", kMixtureArgs},
      {"random-bad", kRandomBadArgs},
      {"gen", {"gen-ultrametric", "--n", "40", "--ties", "--seed", "20"}},
      {"synth", {"synth", "--seed", "20"}},
  };
  std::size_t compared = 0;
  for (auto& [name, args] : jobs) {
    std::string first;
    for (int rep = 0; rep < 2; ++rep) {
      auto a = args;
      const fs::path out = dir / (name + "_" + std::to_string(rep) + ".txt");
      a.push_back("--out");
      a.push_back(out.string());
      if (run_cli(a).code != 0) return {false, name + " failed"};
      if (rep == 0) first = slurp(out);
      else if (slurp(out) != first) return {false, name + " reports differ between runs"};
    }
    ++compared;
  }
  // a cluster + eval pipeline on generated data
  std::string first;
  for (int rep = 0; rep < 2; ++rep) {
    const fs::path report = dir / ("report_" + std::to_string(rep) + ".csv");
    if (run_cli({"synth", "--n", "300", "--seed", "20", "--out", pts.string()}).code != 0 ||
        run_cli({"cluster", "--points", pts.string(), "--algo", "bkm", "--seed", "20", "--out", tree.string()}).code != 0 ||
        run_cli({"eval", "--objective", "revenue", "--points", pts.string(), "--tree-file", tree.string(), "--out",
                 report.string()}).code != 0)
      return {false, "cluster/eval pipeline failed"};
    if (rep == 0) first = slurp(report);
    else if (slurp(report) != first) return {false, "cluster/eval reports differ between runs"};
  }
  ++compared;
  return {true, std::to_string(compared) + " report kinds byte-identical across repeated runs"};
}

}  // namespace

int main() {
  const fs::path dir = fs::temp_directory_path() / "hrclust_acceptance";
  fs::create_directories(dir);

  const auto specs = ultrametric_specs();
  const auto metrics = six_point_metrics();
  const auto trees = enumerate_trees(6);

  const std::vector<Criterion> criteria{
      {1, "split-sum and pair-sum revenue agree", 10, mode_equivalence},
      {2, "generating tree earns full revenue", 30, [&] { return generating_full_revenue(specs); }},
      {3, "embedding distances equal LCA weights", 30, [&] { return embedding_exact(specs); }},
      {4, "bisecting k-means split revenue bound", 60, bisecting_bound},
      {5, "every tree is a CKMM 1/2 and Dasgupta 2 approximation", 60,
       [&] { return half_approximation(metrics, trees); }},
      {6, "triangle decomposition reproduces the objective", 60,
       [&] { return triangle_identity(metrics, trees); }},
      {7, "random tree revenue decays on the unbalanced instance", 60, random_is_bad},
      {8, "table1 upper-bound row and mixture ranking", 120, [&] { return table1_rows(dir); }},
      {9, "reports are byte-identical across runs", 240, [&] { return determinism(dir); }},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.body();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_budget = secs < c.budget_seconds;
    const bool pass = o.ok && in_budget;
    if (!pass) ++failed;
    std::cout << (pass ? "[PASS] " : "[FAIL] ") << c.id << ". " << c.name << ": " << o.detail << " ("
              << fmt("%.2f", secs) << " s, budget " << fmt("%.0f", c.budget_seconds) << " s"
              << (in_budget ? "" : ", over budget") << ")\n";
  }
  fs::remove_all(dir);
  std::cout << (failed ? "acceptance: " + std::to_string(failed) + " criterion(s) failed\n"
                       : std::string("acceptance: all criteria passed\n"));
  return failed ? 1 : 0;
}
