#pragma once

// hrclust command line. Exit codes: 0 ok, 1 usage error, 2 data error.

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hrc/hrc.hpp"

namespace hrc::cli {

inline constexpr int kOk = 0;
inline constexpr int kUsageError = 1;
inline constexpr int kDataError = 2;

namespace detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Writes to `path` when set, otherwise to `fallback`.
class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) {
    if (path.empty()) {
      os_ = &fallback;
      return;
    }
    file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
    if (!*file_) throw DataError("cannot write '" + path + "'");
    os_ = file_.get();
  }
  std::ostream& operator*() { return *os_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* os_ = nullptr;
};

inline PointSet load_points(const std::string& path, bool skip_header, std::ostream& err) {
  CsvOptions opts;
  opts.skip_header = skip_header;
  CsvIngest in = ingest_csv(path, opts);
  if (!in.dropped_columns.empty())
    err << "note: dropped " << in.dropped_columns.size() << " non-numeric column(s)\n";
  return std::move(in.points);
}

inline DistanceMatrix load_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return parse_matrix_csv(in);
}

inline HierTree load_tree(const std::string& path) {
  const std::string text = read_file(path);
  try {
    return parse(text);
  } catch (const std::exception& e) {
    throw DataError(path + ": " + e.what());
  }
}

inline TwoMeansKind parse_solver(const std::string& s) {
  return s == "exhaustive" ? TwoMeansKind::exhaustive : TwoMeansKind::lloyd;
}

}  // namespace detail

inline int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hierarchical clustering objectives, algorithms and experiments", "hrclust"};
  app.require_subcommand(1);

  const std::vector<std::string> algos{"bkm", "avg", "single", "random"};
  const std::vector<std::string> solvers{"exhaustive", "lloyd"};
  const std::vector<std::string> objectives{"revenue", "ckmm", "dasgupta"};

  std::uint64_t seed = 0;
  std::string out_path;
  bool skip_header = false;

  // gen-ultrametric
  auto* gen = app.add_subcommand("gen-ultrametric", "Random weighted tree in annotated format");
  std::size_t gen_n = 8;
  bool gen_ties = false;
  gen->add_option("--n", gen_n, "Number of leaves")->check(CLI::PositiveNumber);
  gen->add_flag("--ties", gen_ties, "Allow equal weights along root paths");
  gen->add_option("--seed", seed);
  gen->add_option("--out", out_path);

  // embed
  auto* embed = app.add_subcommand("embed", "Euclidean points realizing an ultrametric spec");
  std::string spec_file;
  embed->add_option("--spec-file", spec_file, "Annotated tree file")->required();
  embed->add_option("--out", out_path);

  // cluster
  auto* cluster = app.add_subcommand("cluster", "Build a tree from a points CSV");
  std::string points_file, algo = "bkm", solver = "lloyd";
  std::size_t restarts = 10;
  cluster->add_option("--points", points_file)->required();
  cluster->add_flag("--skip-header", skip_header);
  cluster->add_option("--algo", algo)->check(CLI::IsMember(algos));
  cluster->add_option("--solver", solver)->check(CLI::IsMember(solvers));
  cluster->add_option("--restarts", restarts)->check(CLI::PositiveNumber);
  cluster->add_option("--seed", seed);
  cluster->add_option("--out", out_path);

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate an objective on a tree");
  std::string objective = "revenue", tree_file, matrix_file, mode = "split_sum";
  eval->add_option("--objective", objective)->check(CLI::IsMember(objectives));
  auto* eval_points = eval->add_option("--points", points_file, "Points CSV");
  auto* eval_matrix =
      eval->add_option("--matrix", matrix_file, "Square dissimilarity / similarity matrix CSV");
  eval_points->excludes(eval_matrix);
  eval->add_option("--tree-file", tree_file)->required();
  eval->add_option("--mode", mode)->check(CLI::IsMember({"split_sum", "pair_sum"}));
  eval->add_flag("--skip-header", skip_header);
  eval->add_option("--out", out_path);

  // enumerate-opt
  auto* opt = app.add_subcommand("enumerate-opt", "Exact optimum by enumerating all trees (n <= 7)");
  opt->add_option("--objective", objective)->check(CLI::IsMember(objectives));
  auto* opt_points = opt->add_option("--points", points_file);
  auto* opt_matrix = opt->add_option("--matrix", matrix_file);
  opt_points->excludes(opt_matrix);
  opt->add_flag("--skip-header", skip_header);
  opt->add_option("--out", out_path);

  // synth
  auto* synth = app.add_subcommand("synth", "Gaussian mixture points CSV");
  std::size_t synth_k = 8, synth_n = 2000, synth_dim = 2;
  double separation = 20.0;
  synth->add_option("--k", synth_k)->check(CLI::PositiveNumber);
  synth->add_option("--n", synth_n)->check(CLI::PositiveNumber);
  synth->add_option("--dim", synth_dim)->check(CLI::PositiveNumber);
  synth->add_option("--separation", separation)->check(CLI::NonNegativeNumber);
  synth->add_option("--seed", seed);
  synth->add_option("--out", out_path);

  // experiment
  auto* experiment = app.add_subcommand("experiment", "Run an experiment");
  experiment->require_subcommand(1);

  auto* table1 = experiment->add_subcommand("table1", "Compare the four algorithms");
  std::string input_file;
  std::size_t subsample_size = 1000, runs = 5;
  std::vector<std::string> t1_algos = algos;
  std::vector<std::string> t1_objectives{"revenue", "ckmm"};
  bool serial = false;
  table1->add_option("--input", input_file, "Points CSV (default: synthetic mixture)");
  table1->add_flag("--skip-header", skip_header);
  table1->add_option("--synth-k", synth_k)->check(CLI::PositiveNumber);
  table1->add_option("--synth-n", synth_n)->check(CLI::PositiveNumber);
  table1->add_option("--synth-dim", synth_dim)->check(CLI::PositiveNumber);
  table1->add_option("--separation", separation)->check(CLI::NonNegativeNumber);
  table1->add_option("--subsample", subsample_size)->check(CLI::PositiveNumber);
  table1->add_option("--runs", runs)->check(CLI::PositiveNumber);
  table1->add_option("--algo", t1_algos)->check(CLI::IsMember(algos))->delimiter(',');
  table1->add_option("--objective", t1_objectives)
      ->check(CLI::IsMember({"revenue", "ckmm"}))
      ->delimiter(',');
  table1->add_option("--solver", solver)->check(CLI::IsMember(solvers));
  table1->add_option("--restarts", restarts)->check(CLI::PositiveNumber);
  table1->add_option("--seed", seed);
  table1->add_flag("--serial", serial, "Run repetitions sequentially");
  table1->add_option("--out", out_path);

  auto* random_bad = experiment->add_subcommand("random-bad", "Random on the unbalanced instance");
  std::vector<std::size_t> sizes{4, 8, 12};
  std::size_t trials = 200;
  double inter_distance = 1.0;
  random_bad->add_option("--sizes", sizes)->delimiter(',')->check(CLI::Range(2, 1000));
  random_bad->add_option("--trials", trials)->check(CLI::PositiveNumber);
  random_bad->add_option("--distance", inter_distance)->check(CLI::PositiveNumber);
  random_bad->add_option("--seed", seed);
  random_bad->add_option("--out", out_path);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    if (gen->parsed()) {
      RngStream rng(seed);
      const UltrametricSpec spec =
          generate_random(gen_n, rng, gen_ties ? WeightMode::with_ties : WeightMode::strict);
      detail::Output o(out_path, out);
      *o << serialize_spec(spec) << '\n';
    } else if (embed->parsed()) {
      UltrametricSpec spec = [&] {
        try {
          return parse_spec(detail::read_file(spec_file));
        } catch (const std::invalid_argument& e) {
          throw DataError(spec_file + ": " + e.what());
        } catch (const ParseError& e) {
          throw DataError(spec_file + ": " + e.what());
        }
      }();
      detail::Output o(out_path, out);
      write_points_csv(*o, embed_euclidean(spec));
    } else if (cluster->parsed()) {
      const PointSet points = detail::load_points(points_file, skip_header, err);
      TwoMeansSolverConfig config;
      config.kind = detail::parse_solver(solver);
      config.lloyd_restarts = restarts;
      config.seed = seed;
      const HierTree tree = run_algorithm(parse_algorithm(algo), points, config);
      detail::Output o(out_path, out);
      *o << serialize(tree) << '\n';
    } else if (eval->parsed()) {
      if (points_file.empty() && matrix_file.empty()) {
        err << "eval: one of --points or --matrix is required\n";
        return kUsageError;
      }
      const ObjectiveKind kind = parse_objective_kind(objective);
      const HierTree tree = detail::load_tree(tree_file);
      ObjectiveReport report;
      if (kind == ObjectiveKind::revenue) {
        if (points_file.empty()) {
          err << "eval: the revenue objective needs --points\n";
          return kUsageError;
        }
        const PointSet points = detail::load_points(points_file, skip_header, err);
        report = tree_revenue(points, tree,
                              mode == "pair_sum" ? RevenueMode::pair_sum : RevenueMode::split_sum);
      } else {
        const DistanceMatrix d = matrix_file.empty()
                                     ? pairwise_distances(detail::load_points(points_file, skip_header, err))
                                     : detail::load_matrix(matrix_file);
        report = kind == ObjectiveKind::ckmm ? ckmm_value(d, tree) : dasgupta_cost(d, tree);
      }
      detail::Output o(out_path, out);
      write_report_csv(*o, report);
    } else if (opt->parsed()) {
      if (points_file.empty() && matrix_file.empty()) {
        err << "enumerate-opt: one of --points or --matrix is required\n";
        return kUsageError;
      }
      const ObjectiveKind kind = parse_objective_kind(objective);
      if (kind == ObjectiveKind::revenue && points_file.empty()) {
        err << "enumerate-opt: the revenue objective needs --points\n";
        return kUsageError;
      }
      const OptimalTree best =
          points_file.empty()
              ? brute_force_opt(detail::load_matrix(matrix_file), kind)
              : brute_force_opt(detail::load_points(points_file, skip_header, err), kind);
      detail::Output o(out_path, out);
      *o << "value " << format_double(best.value) << '\n' << "tree " << serialize(best.tree) << '\n';
    } else if (synth->parsed()) {
      RngStream rng(seed);
      detail::Output o(out_path, out);
      write_points_csv(*o, synth_gaussian_mixture(synth_k, synth_n, synth_dim, separation, rng));
    } else if (table1->parsed()) {
      ExperimentConfig config;
      if (input_file.empty()) {
        RngStream rng(derive_seed(seed, 0x5e7));
        config.dataset = synth_gaussian_mixture(synth_k, synth_n, synth_dim, separation, rng);
      } else {
        config.dataset = detail::load_points(input_file, skip_header, err);
      }
      config.subsample_size = subsample_size;
      config.num_runs = runs;
      config.algorithms.clear();
      for (const auto& a : t1_algos) config.algorithms.push_back(parse_algorithm(a));
      config.objectives.clear();
      for (const auto& ob : t1_objectives) config.objectives.push_back(parse_objective_kind(ob));
      config.base_seed = seed;
      config.solver.kind = detail::parse_solver(solver);
      config.solver.lloyd_restarts = restarts;
      config.parallel = !serial;
      const Table1Result result = run_table1(config);
      detail::Output o(out_path, out);
      write_table1_csv(*o, result);
    } else if (random_bad->parsed()) {
      const auto rows = run_random_bad(sizes, trials, seed, inter_distance);
      detail::Output o(out_path, out);
      write_random_bad_csv(*o, rows);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
  return kOk;
}

}  // namespace hrc::cli
