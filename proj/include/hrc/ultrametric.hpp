#pragma once

// Ground-truth instances: ultrametric checks, random weighted trees, exact
// Euclidean embeddings and generating trees.

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hrc/hiertree.hpp"
#include "hrc/metricspace.hpp"
#include "hrc/rng.hpp"

namespace hrc {

// Weighted dendrogram; weights are indexed by node id and are 0 on leaves.
struct UltrametricSpec {
  HierTree topology;
  std::vector<double> weights;
};

struct UltrametricCheck {
  bool ok = true;
  // (x, y, z) with d(x,y) > max(d(x,z), d(y,z)) + tol.
  std::optional<Triple> violation;
};

inline UltrametricCheck check_ultrametric(const DistanceMatrix& d, double tol = 0.0) {
  const std::size_t n = d.size();
  for (Index x = 0; x < n; ++x)
    for (Index y = x + 1; y < n; ++y)
      for (Index z = 0; z < n; ++z)
        if (z != x && z != y && d(x, y) > std::max(d(x, z), d(y, z)) + tol)
          return {false, Triple{x, y, z}};
  return {};
}

// Throws if weights are missing, negative, nonzero on leaves or not monotone.
inline void validate_spec(const UltrametricSpec& spec) {
  const HierTree& t = spec.topology;
  if (spec.weights.size() != t.n_nodes())
    throw std::invalid_argument("UltrametricSpec: one weight per node required");
  for (Index v = 0; v < t.n_nodes(); ++v) {
    const double w = spec.weights[v];
    if (t.node(v).is_leaf()) {
      if (w != 0.0) throw std::invalid_argument("UltrametricSpec: leaf weights must be 0");
      continue;
    }
    if (!std::isfinite(w) || w <= 0.0)
      throw std::invalid_argument("UltrametricSpec: internal weights must be positive");
    if (v != t.root() && spec.weights[t.parent(v)] < w)
      throw std::invalid_argument("UltrametricSpec: weight of node " + std::to_string(v) +
                                  " exceeds its parent's");
  }
}

// d(x, y) = W(LCA(x, y)).
inline DistanceMatrix induced_distances(const UltrametricSpec& spec) {
  const HierTree& t = spec.topology;
  const std::size_t n = t.n_leaves();
  DistanceMatrix d(n);
  const LcaIndex lca(t);
  for (Index x = 0; x < n; ++x)
    for (Index y = x + 1; y < n; ++y) d.set(x, y, spec.weights[lca.lca_of_leaves(x, y)]);
  return d;
}

enum class WeightMode { strict, with_ties };

// Random sequential merges of uniformly chosen cluster pairs. Each new node's
// weight is max(child weights) + increment, the increment drawn from (0,1];
// in with_ties mode it is 0 with probability 1/4 unless that would give a
// nonpositive weight.
inline UltrametricSpec generate_random(std::size_t n, RngStream& rng,
                                       WeightMode mode = WeightMode::strict) {
  if (n == 0) throw std::invalid_argument("generate_random: n must be positive");
  TreeBuilder builder;
  std::vector<Index> roots(n);
  std::vector<double> w;
  for (Index i = 0; i < n; ++i) {
    roots[i] = builder.add_leaf(i);
    w.push_back(0.0);
  }
  while (roots.size() > 1) {
    const std::size_t a = rng.below(roots.size());
    std::size_t b = rng.below(roots.size() - 1);
    if (b >= a) ++b;
    const double base = std::max(w[roots[a]], w[roots[b]]);
    double inc = 1.0 - rng.uniform();  // (0, 1]
    if (mode == WeightMode::with_ties && base > 0.0 && rng.below(4) == 0) inc = 0.0;
    const Index joined = builder.join(roots[a], roots[b]);
    w.push_back(base + inc);
    roots[std::min(a, b)] = joined;
    roots.erase(roots.begin() + static_cast<std::ptrdiff_t>(std::max(a, b)));
  }
  return {std::move(builder).build(roots.front()), std::move(w)};
}

// One coordinate axis per tree edge P -> C; every leaf below C sits at
// sqrt((W(P)^2 - W(C)^2) / 2) on that axis. Path sums telescope so
// |x - y|^2 = W(LCA(x, y))^2.
inline PointSet embed_euclidean(const UltrametricSpec& spec) {
  validate_spec(spec);
  const HierTree& t = spec.topology;
  const std::size_t n = t.n_leaves();
  const std::size_t dim = std::max<std::size_t>(1, 2 * (n - 1));
  std::vector<double> flat(n * dim, 0.0);
  std::size_t axis = 0;
  for (Index child = 0; child < t.n_nodes(); ++child) {
    if (child == t.root()) continue;
    const double wp = spec.weights[t.parent(child)];
    const double wc = spec.weights[child];
    const double sq = (wp * wp - wc * wc) / 2.0;
    if (sq < 0.0) throw std::invalid_argument("embed_euclidean: weights are not monotone");
    const double value = std::sqrt(sq);
    for (Index leaf : t.leaves(child)) flat[leaf * dim + axis] = value;
    ++axis;
  }
  return PointSet(dim, std::move(flat));
}

inline std::string serialize_spec(const UltrametricSpec& spec) {
  return serialize_weighted(spec.topology, spec.weights);
}

inline UltrametricSpec parse_spec(std::string_view text) {
  auto [tree, weights] = parse_weighted(text);
  UltrametricSpec spec{std::move(tree), std::move(weights)};
  validate_spec(spec);
  return spec;
}

class NotUltrametricError : public std::invalid_argument {
 public:
  explicit NotUltrametricError(Triple t)
      : std::invalid_argument("input is not an ultrametric: d(" + std::to_string(t.i) + "," +
                              std::to_string(t.j) + ") > max(d(" + std::to_string(t.i) + "," +
                              std::to_string(t.k) + "), d(" + std::to_string(t.j) + "," +
                              std::to_string(t.k) + "))"),
        triple_(t) {}
  Triple triple() const { return triple_; }

 private:
  Triple triple_;
};

// Absolute tolerance for distance equality: 1e-9 x the largest distance.
inline double ultrametric_tolerance(const DistanceMatrix& d) { return 1e-9 * d.max_entry(); }

namespace detail {

inline Index build_generating(const DistanceMatrix& d, const IndexSet& set, double tol,
                              TreeBuilder& builder) {
  if (set.size() == 1) return builder.add_leaf(set.front());
  // Lexicographically first farthest pair.
  Index bi = set[0], bj = set[1];
  double best = d(bi, bj);
  for (std::size_t a = 0; a < set.size(); ++a)
    for (std::size_t b = a + 1; b < set.size(); ++b)
      if (d(set[a], set[b]) > best + tol) {
        best = d(set[a], set[b]);
        bi = set[a];
        bj = set[b];
      }
  IndexSet left, right;
  for (Index x : set) {
    if (x == bi) left.push_back(x);
    else if (x == bj || std::abs(d(bi, x) - best) <= tol) right.push_back(x);
    else left.push_back(x);
  }
  const Index l = build_generating(d, left, tol, builder);
  const Index r = build_generating(d, right, tol, builder);
  return builder.join(l, r);
}

}  // namespace detail

// Repeatedly separates the farthest pair (i, j): points at distance d(i,j)
// from i go with j, the rest with i.
inline HierTree build_generating_tree(const DistanceMatrix& d) {
  const double tol = ultrametric_tolerance(d);
  if (auto check = check_ultrametric(d, tol); !check.ok) throw NotUltrametricError(*check.violation);
  IndexSet all(d.size());
  for (Index i = 0; i < all.size(); ++i) all[i] = i;
  TreeBuilder builder;
  const Index root = detail::build_generating(d, all, tol, builder);
  return std::move(builder).build(root);
}

struct GeneratingCheck {
  bool ok = true;
  std::optional<Split> violation;
};

// Every split must cut only pairs at the parent set's maximum distance.
inline GeneratingCheck verify_generating_tree(const DistanceMatrix& d, const HierTree& tree,
                                              double tol) {
  if (tree.n_leaves() != d.size())
    throw std::invalid_argument("verify_generating_tree: tree/matrix size mismatch");
  for (Index v : tree.internal_preorder()) {
    auto [first, second] = tree.ordered_children(v);
    const IndexSet parent = tree.leaves(v);
    double top = 0.0;
    for (std::size_t a = 0; a < parent.size(); ++a)
      for (std::size_t b = a + 1; b < parent.size(); ++b) top = std::max(top, d(parent[a], parent[b]));
    const IndexSet left = tree.leaves(first);
    const IndexSet right = tree.leaves(second);
    for (Index i : left)
      for (Index j : right)
        if (std::abs(d(i, j) - top) > tol) return {false, Split{parent, left, right}};
  }
  return {};
}

inline GeneratingCheck verify_generating_tree(const DistanceMatrix& d, const HierTree& tree) {
  return verify_generating_tree(d, tree, ultrametric_tolerance(d));
}

// Recovers W(N) as the common cross distance at each split, requiring it to be
// constant across the split, monotone toward the root and to reproduce every
// distance as W(LCA). Returns nullopt when no such weight function exists.
inline std::optional<std::vector<double>> recover_generating_weights(const DistanceMatrix& d,
                                                                     const HierTree& tree,
                                                                     double tol) {
  if (tree.n_leaves() != d.size())
    throw std::invalid_argument("recover_generating_weights: tree/matrix size mismatch");
  std::vector<double> w(tree.n_nodes(), 0.0);
  for (Index v : tree.internal_preorder()) {
    auto [first, second] = tree.ordered_children(v);
    const IndexSet left = tree.leaves(first);
    const IndexSet right = tree.leaves(second);
    const double value = d(left.front(), right.front());
    for (Index i : left)
      for (Index j : right)
        if (std::abs(d(i, j) - value) > tol) return std::nullopt;
    w[v] = value;
  }
  for (Index v : tree.internal_preorder())
    if (v != tree.root() && w[v] > w[tree.parent(v)] + tol) return std::nullopt;
  return w;
}

}  // namespace hrc
