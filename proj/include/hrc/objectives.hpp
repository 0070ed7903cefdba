#pragma once

// Hierarchical-Revenue, CKMM and Dasgupta objectives over a HierTree.

#include <algorithm>
#include <cstddef>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hrc/hiertree.hpp"
#include "hrc/metricspace.hpp"

namespace hrc {

enum class ObjectiveKind { revenue, ckmm, dasgupta };

inline std::string_view to_string(ObjectiveKind k) {
  switch (k) {
    case ObjectiveKind::revenue: return "revenue";
    case ObjectiveKind::ckmm: return "ckmm";
    case ObjectiveKind::dasgupta: return "dasgupta";
  }
  return "?";
}

inline ObjectiveKind parse_objective_kind(std::string_view s) {
  if (s == "revenue") return ObjectiveKind::revenue;
  if (s == "ckmm") return ObjectiveKind::ckmm;
  if (s == "dasgupta") return ObjectiveKind::dasgupta;
  throw std::invalid_argument("unknown objective '" + std::string(s) + "'");
}

// Value earned at one internal node. `node` refers to the evaluated tree.
struct SplitValue {
  Index node = kNone;
  std::size_t parent_size = 0;
  std::size_t left_size = 0;
  std::size_t right_size = 0;
  double value = 0.0;
};

struct ObjectiveReport {
  ObjectiveKind kind = ObjectiveKind::revenue;
  double total = 0.0;
  std::vector<SplitValue> per_split;  // root-first, canonical child as "left"
  // Revenue: C(n,2). CKMM: n * sum d. Dasgupta: the lower bound 2 * sum w.
  double upper_bound = 0.0;
};

// parent_size,left_size,right_size,value rows plus a closing totals row.
inline void write_report_csv(std::ostream& os, const ObjectiveReport& report) {
  os << "parent_size,left_size,right_size,value\n";
  for (const auto& s : report.per_split)
    os << s.parent_size << ',' << s.left_size << ',' << s.right_size << ','
       << format_double(s.value) << '\n';
  os << "total,,," << format_double(report.total) << '\n';
}

inline double revenue_upper_bound(std::size_t n) {
  const double m = static_cast<double>(n);
  return m * (m - 1.0) / 2.0;
}

// min(d / delta, 1) with delta = max(d_i, d_j); a zero delta earns 1.
inline double revenue_from_distances(double d_ij, double d_i_to_centroid, double d_j_to_centroid) {
  const double delta = std::max(d_i_to_centroid, d_j_to_centroid);
  if (delta == 0.0) return 1.0;
  return std::min(d_ij / delta, 1.0);
}

namespace detail {

inline void require_disjoint_nonempty(std::size_t n, std::span<const Index> a,
                                      std::span<const Index> b, const char* who) {
  if (a.empty() || b.empty()) throw std::invalid_argument(std::string(who) + ": empty side");
  std::vector<char> mark(n, 0);
  for (Index i : a) {
    if (i >= n) throw std::out_of_range(std::string(who) + ": index out of range");
    mark[i] = 1;
  }
  for (Index j : b) {
    if (j >= n) throw std::out_of_range(std::string(who) + ": index out of range");
    if (mark[j]) throw std::invalid_argument(std::string(who) + ": sides overlap");
  }
}

inline void require_tree_matches(std::size_t n, const HierTree& tree, const char* who) {
  if (tree.n_leaves() != n)
    throw std::invalid_argument(std::string(who) + ": tree has " +
                                std::to_string(tree.n_leaves()) + " leaves but instance has " +
                                std::to_string(n) + " points");
}

// Flat (n_nodes x dim) table of subtree centroids.
inline std::vector<double> node_centroids(const PointSet& points, const HierTree& tree) {
  const std::size_t dim = points.dim();
  std::vector<double> sums(tree.n_nodes() * dim, 0.0);
  // Children are visited before parents when ids are processed by decreasing depth.
  std::vector<Index> order(tree.n_nodes());
  for (Index v = 0; v < order.size(); ++v) order[v] = v;
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return tree.depth(a) > tree.depth(b); });
  for (Index v : order) {
    const auto& nd = tree.node(v);
    double* s = sums.data() + v * dim;
    if (nd.is_leaf()) {
      auto p = points[nd.leaf];
      std::copy(p.begin(), p.end(), s);
    } else {
      const double* a = sums.data() + nd.left * dim;
      const double* b = sums.data() + nd.right * dim;
      for (std::size_t k = 0; k < dim; ++k) s[k] = a[k] + b[k];
    }
  }
  for (Index v = 0; v < tree.n_nodes(); ++v) {
    const double cnt = static_cast<double>(tree.leaf_count(v));
    for (std::size_t k = 0; k < dim; ++k) sums[v * dim + k] /= cnt;
  }
  return sums;
}

// Revenue earned across one split given both sides and their centroids.
inline double split_revenue(const PointSet& points, std::span<const Index> left,
                            std::span<const double> left_center, std::span<const Index> right,
                            std::span<const double> right_center) {
  std::vector<double> dr(right.size());
  for (std::size_t b = 0; b < right.size(); ++b) dr[b] = euclidean(points[right[b]], right_center);
  double total = 0.0;
  for (Index i : left) {
    const auto pi = points[i];
    const double di = euclidean(pi, left_center);
    for (std::size_t b = 0; b < right.size(); ++b)
      total += revenue_from_distances(euclidean(pi, points[right[b]]), di, dr[b]);
  }
  return total;
}

}  // namespace detail

inline double pair_revenue(const PointSet& points, std::span<const Index> left_set,
                           std::span<const Index> right_set, Index i, Index j) {
  detail::require_disjoint_nonempty(points.size(), left_set, right_set, "pair_revenue");
  if (std::find(left_set.begin(), left_set.end(), i) == left_set.end())
    throw std::invalid_argument("pair_revenue: i is not in the left set");
  if (std::find(right_set.begin(), right_set.end(), j) == right_set.end())
    throw std::invalid_argument("pair_revenue: j is not in the right set");
  const Coords cl = centroid(points, left_set);
  const Coords cr = centroid(points, right_set);
  return revenue_from_distances(distance(points, i, j), euclidean(points[i], cl),
                                euclidean(points[j], cr));
}

// rev(S1, S2): revenue summed over all pairs separated by the split.
inline double split_revenue(const PointSet& points, std::span<const Index> left_set,
                            std::span<const Index> right_set) {
  detail::require_disjoint_nonempty(points.size(), left_set, right_set, "split_revenue");
  const Coords cl = centroid(points, left_set);
  const Coords cr = centroid(points, right_set);
  return detail::split_revenue(points, left_set, cl, right_set, cr);
}

enum class RevenueMode { split_sum, pair_sum };

inline ObjectiveReport tree_revenue(const PointSet& points, const HierTree& tree,
                                    RevenueMode mode = RevenueMode::split_sum) {
  detail::require_tree_matches(points.size(), tree, "tree_revenue");
  const std::size_t dim = points.dim();
  const std::vector<double> centers = detail::node_centroids(points, tree);
  auto center = [&](Index v) { return std::span<const double>(centers.data() + v * dim, dim); };

  ObjectiveReport report;
  report.kind = ObjectiveKind::revenue;
  report.upper_bound = revenue_upper_bound(points.size());

  const std::vector<Index> order = tree.internal_preorder();
  report.per_split.reserve(order.size());

  if (mode == RevenueMode::split_sum) {
    for (Index v : order) {
      auto [first, second] = tree.ordered_children(v);
      const IndexSet a = tree.leaves(first);
      const IndexSet b = tree.leaves(second);
      const double value = detail::split_revenue(points, a, center(first), b, center(second));
      report.per_split.push_back({v, a.size() + b.size(), a.size(), b.size(), value});
      report.total += value;
    }
    return report;
  }

  // pair_sum: attribute each pair to the split at its LCA.
  const std::size_t n = points.size();
  const LcaIndex lca(tree);
  std::vector<double> node_value(tree.n_nodes(), 0.0);
  for (Index i = 0; i < n; ++i) {
    const Index li = tree.leaf_node(i);
    for (Index j = i + 1; j < n; ++j) {
      const Index lj = tree.leaf_node(j);
      const Index top = lca.lca(li, lj);
      const Index side_i = lca.ancestor_at_depth(li, tree.depth(top) + 1);
      const Index side_j = lca.ancestor_at_depth(lj, tree.depth(top) + 1);
      const double r = revenue_from_distances(euclidean(points[i], points[j]),
                                              euclidean(points[i], center(side_i)),
                                              euclidean(points[j], center(side_j)));
      node_value[top] += r;
      report.total += r;
    }
  }
  for (Index v : order) {
    auto [first, second] = tree.ordered_children(v);
    report.per_split.push_back({v, tree.leaf_count(v), tree.leaf_count(first),
                                tree.leaf_count(second), node_value[v]});
  }
  return report;
}

namespace detail {

// Per split: |S| * sum of cross weights. Shared by CKMM and Dasgupta.
inline ObjectiveReport lca_weighted_sum(const DistanceMatrix& d, const HierTree& tree,
                                        ObjectiveKind kind, const char* who) {
  require_tree_matches(d.size(), tree, who);
  ObjectiveReport report;
  report.kind = kind;
  for (Index v : tree.internal_preorder()) {
    auto [first, second] = tree.ordered_children(v);
    const IndexSet a = tree.leaves(first);
    const IndexSet b = tree.leaves(second);
    double cross = 0.0;
    for (Index i : a)
      for (Index j : b) cross += d(i, j);
    const double value = static_cast<double>(a.size() + b.size()) * cross;
    report.per_split.push_back({v, a.size() + b.size(), a.size(), b.size(), value});
    report.total += value;
  }
  return report;
}

}  // namespace detail

inline ObjectiveReport ckmm_value(const DistanceMatrix& dist, const HierTree& tree) {
  ObjectiveReport r = detail::lca_weighted_sum(dist, tree, ObjectiveKind::ckmm, "ckmm_value");
  r.upper_bound = static_cast<double>(dist.size()) * dist.pair_sum();
  return r;
}

inline ObjectiveReport dasgupta_cost(const DistanceMatrix& weights, const HierTree& tree) {
  ObjectiveReport r =
      detail::lca_weighted_sum(weights, tree, ObjectiveKind::dasgupta, "dasgupta_cost");
  r.upper_bound = 2.0 * weights.pair_sum();
  return r;
}

// ---------------------------------------------------------------------------
// Triangle decomposition: sum_{pairs} d * |leaves(lca)| =
//   sum_{triples} tri(i,j,k) + 2 * sum_{pairs} d
// where tri keeps the two sides touching the point split off first.

struct TriangleDecomposition {
  double triple_sum = 0.0;
  double pair_term = 0.0;
  double reconstructed_total = 0.0;
};

// Depth of lca(i, j) for every pair, row-major n x n.
inline std::vector<std::size_t> lca_depths(const HierTree& tree) {
  const std::size_t n = tree.n_leaves();
  const LcaIndex lca(tree);
  std::vector<std::size_t> out(n * n, 0);
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j)
      out[i * n + j] = out[j * n + i] = tree.depth(lca.lca_of_leaves(i, j));
  return out;
}

// Revenue (or cost) of one triangle given the pairwise LCA depths.
inline double triangle_term(const DistanceMatrix& d, std::span<const std::size_t> depths,
                            Index i, Index j, Index k) {
  const std::size_t n = d.size();
  const std::size_t ij = depths[i * n + j];
  const std::size_t ik = depths[i * n + k];
  const std::size_t jk = depths[j * n + k];
  if (ij > ik && ij > jk) return d(i, k) + d(j, k);  // k split off first
  if (ik > ij && ik > jk) return d(i, j) + d(j, k);  // j split off first
  return d(i, j) + d(i, k);                          // i split off first
}

inline TriangleDecomposition triangle_decompose(const DistanceMatrix& d, const HierTree& tree) {
  const std::size_t n = d.size();
  if (n < 3) throw std::invalid_argument("triangle_decompose: need at least 3 points");
  detail::require_tree_matches(n, tree, "triangle_decompose");
  const std::vector<std::size_t> depths = lca_depths(tree);
  TriangleDecomposition out;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j)
      for (Index k = j + 1; k < n; ++k) out.triple_sum += triangle_term(d, depths, i, j, k);
  out.pair_term = 2.0 * d.pair_sum();
  out.reconstructed_total = out.triple_sum + out.pair_term;
  return out;
}

// ---------------------------------------------------------------------------
// High-revenue points of the larger side of a split.

inline constexpr double kHighRevenueThreshold = 0.1;

struct HighRevenueStats {
  IndexSet side_a;  // larger side (left on ties)
  IndexSet side_b;
  IndexSet high_revenue_points_in_larger;
  double fraction = 0.0;
};

inline HighRevenueStats high_revenue_stats(const PointSet& points, std::span<const Index> left_set,
                                           std::span<const Index> right_set) {
  detail::require_disjoint_nonempty(points.size(), left_set, right_set, "high_revenue_stats");
  HighRevenueStats out;
  if (left_set.size() >= right_set.size()) {
    out.side_a.assign(left_set.begin(), left_set.end());
    out.side_b.assign(right_set.begin(), right_set.end());
  } else {
    out.side_a.assign(right_set.begin(), right_set.end());
    out.side_b.assign(left_set.begin(), left_set.end());
  }
  const Coords ca = centroid(points, out.side_a);
  const Coords cb = centroid(points, out.side_b);
  std::vector<double> db(out.side_b.size());
  for (std::size_t b = 0; b < db.size(); ++b) db[b] = euclidean(points[out.side_b[b]], cb);
  for (Index u : out.side_a) {
    const double du = euclidean(points[u], ca);
    std::size_t high = 0;
    for (std::size_t b = 0; b < db.size(); ++b)
      if (revenue_from_distances(distance(points, u, out.side_b[b]), du, db[b]) >=
          kHighRevenueThreshold)
        ++high;
    if (2 * high >= out.side_b.size()) out.high_revenue_points_in_larger.push_back(u);
  }
  out.fraction = static_cast<double>(out.high_revenue_points_in_larger.size()) /
                 static_cast<double>(out.side_a.size());
  return out;
}

// ---------------------------------------------------------------------------
// Exhaustive optimum for tiny instances.

struct OptimalTree {
  HierTree tree;
  double value;
};

namespace detail {

template <class Eval>
OptimalTree brute_force(std::size_t n, bool maximize, Eval eval) {
  if (n > kMaxEnumerateLeaves)
    throw std::invalid_argument("brute_force_opt: n must be at most " +
                                std::to_string(kMaxEnumerateLeaves));
  if (n == 1) {
    HierTree t = single_leaf_tree();
    const double v = eval(t);
    return {std::move(t), v};
  }
  std::optional<OptimalTree> best;
  for (HierTree& t : enumerate_trees(n)) {
    const double v = eval(t);
    if (!best) {
      best.emplace(OptimalTree{std::move(t), v});
      continue;
    }
    const bool better = maximize ? v > best->value : v < best->value;
    if (better && !approx_equal(v, best->value)) best.emplace(OptimalTree{std::move(t), v});
  }
  return std::move(*best);
}

}  // namespace detail

inline OptimalTree brute_force_opt(const DistanceMatrix& d, ObjectiveKind kind) {
  switch (kind) {
    case ObjectiveKind::ckmm:
      return detail::brute_force(d.size(), true,
                                 [&](const HierTree& t) { return ckmm_value(d, t).total; });
    case ObjectiveKind::dasgupta:
      return detail::brute_force(d.size(), false,
                                 [&](const HierTree& t) { return dasgupta_cost(d, t).total; });
    case ObjectiveKind::revenue:
      break;
  }
  throw std::invalid_argument("brute_force_opt: revenue needs point coordinates");
}

inline OptimalTree brute_force_opt(const PointSet& points, ObjectiveKind kind) {
  if (kind == ObjectiveKind::revenue)
    return detail::brute_force(points.size(), true,
                               [&](const HierTree& t) { return tree_revenue(points, t).total; });
  if (points.size() > kMaxEnumerateLeaves)
    throw std::invalid_argument("brute_force_opt: n must be at most " +
                                std::to_string(kMaxEnumerateLeaves));
  return brute_force_opt(pairwise_distances(points), kind);
}

}  // namespace hrc
