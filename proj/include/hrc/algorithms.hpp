#pragma once

// Tree-building algorithms: bisecting k-means (exact or Lloyd 2-means),
// average linkage, single linkage and the Random coin-flip baseline.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hrc/hiertree.hpp"
#include "hrc/metricspace.hpp"
#include "hrc/rng.hpp"

namespace hrc {

enum class TwoMeansKind { exhaustive, lloyd };

struct TwoMeansSolverConfig {
  TwoMeansKind kind = TwoMeansKind::lloyd;
  std::size_t max_exhaustive_n = 20;
  std::size_t lloyd_restarts = 10;
  std::size_t lloyd_max_iters = 100;
  // Stop when no centroid moves more than lloyd_tol * bounding-box diagonal.
  double lloyd_tol = 1e-9;
  std::uint64_t seed = 0;
};

struct TwoMeansResult {
  Split split;  // left holds min(S)
  double cost = 0.0;
};

namespace detail {

inline std::vector<double> gather(const PointSet& points, std::span<const Index> set) {
  std::vector<double> out;
  out.reserve(set.size() * points.dim());
  for (Index i : set) {
    auto p = points[i];
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

// Cost of the bipartition encoded by `mask` (bit b set: element b+1 on side 2)
// over a gathered local coordinate buffer. `scratch` holds 2*dim doubles.
inline double bipartition_cost(const std::vector<double>& xs, std::size_t m, std::size_t dim,
                               std::uint64_t mask, std::vector<double>& scratch) {
  double* c1 = scratch.data();
  double* c2 = scratch.data() + dim;
  std::fill(scratch.begin(), scratch.end(), 0.0);
  std::size_t n1 = 0, n2 = 0;
  for (std::size_t e = 0; e < m; ++e) {
    const bool second = e > 0 && ((mask >> (e - 1)) & 1U);
    double* c = second ? c2 : c1;
    (second ? n2 : n1)++;
    const double* x = xs.data() + e * dim;
    for (std::size_t k = 0; k < dim; ++k) c[k] += x[k];
  }
  for (std::size_t k = 0; k < dim; ++k) {
    c1[k] /= static_cast<double>(n1);
    c2[k] /= static_cast<double>(n2);
  }
  double cost = 0.0;
  for (std::size_t e = 0; e < m; ++e) {
    const bool second = e > 0 && ((mask >> (e - 1)) & 1U);
    const double* c = second ? c2 : c1;
    const double* x = xs.data() + e * dim;
    for (std::size_t k = 0; k < dim; ++k) {
      const double t = x[k] - c[k];
      cost += t * t;
    }
  }
  return cost;
}

// Is side 1 of mask `a` lexicographically before side 1 of mask `b`?
// Side 1 lists the elements whose bit is clear (element 0 always included).
inline bool side_one_before(std::uint64_t a, std::uint64_t b, std::size_t m) {
  // Walk both sorted side-1 sequences in lockstep.
  std::size_t ia = 1, ib = 1;
  auto next = [m](std::uint64_t mask, std::size_t from) {
    while (from < m && ((mask >> (from - 1)) & 1U)) ++from;
    return from;
  };
  while (true) {
    ia = next(a, ia);
    ib = next(b, ib);
    if (ia >= m || ib >= m) return ia >= m && ib < m;
    if (ia != ib) return ia < ib;
    ++ia;
    ++ib;
  }
}

inline TwoMeansResult make_result(std::span<const Index> sorted_set,
                                  const std::vector<char>& on_second, double cost) {
  TwoMeansResult r;
  r.split.parent.assign(sorted_set.begin(), sorted_set.end());
  for (std::size_t e = 0; e < sorted_set.size(); ++e)
    (on_second[e] ? r.split.right : r.split.left).push_back(sorted_set[e]);
  if (r.split.left.front() != sorted_set.front()) std::swap(r.split.left, r.split.right);
  r.cost = cost;
  return r;
}

inline TwoMeansResult two_means_exhaustive(const PointSet& points, std::span<const Index> sorted,
                                           const TwoMeansSolverConfig& config) {
  const std::size_t m = sorted.size();
  if (m > config.max_exhaustive_n || m > 63)
    throw std::invalid_argument("two_means: exhaustive solver limited to " +
                                std::to_string(std::min<std::size_t>(config.max_exhaustive_n, 63)) +
                                " points, got " + std::to_string(m));
  const std::size_t dim = points.dim();
  const std::vector<double> xs = gather(points, sorted);
  std::vector<double> scratch(2 * dim);
  const std::uint64_t end = std::uint64_t{1} << (m - 1);
  std::uint64_t best_mask = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::uint64_t mask = 1; mask < end; ++mask) {
    const double cost = bipartition_cost(xs, m, dim, mask, scratch);
    if (best_mask == 0 || (cost < best && !approx_equal(cost, best))) {
      best = cost;
      best_mask = mask;
    } else if (approx_equal(cost, best) && side_one_before(mask, best_mask, m)) {
      best = std::min(best, cost);
      best_mask = mask;
    }
  }
  std::vector<char> on_second(m, 0);
  for (std::size_t e = 1; e < m; ++e) on_second[e] = (best_mask >> (e - 1)) & 1U;
  return make_result(sorted, on_second, best);
}

// One k-means++-seeded Lloyd run; returns side flags per local element.
inline std::vector<char> lloyd_run(const std::vector<double>& xs, std::size_t m, std::size_t dim,
                                   double diameter, const TwoMeansSolverConfig& config,
                                   RngStream& rng) {
  auto x = [&](std::size_t e) { return std::span<const double>(xs.data() + e * dim, dim); };
  std::vector<double> centers(2 * dim);
  auto center = [&](int c) { return std::span<double>(centers.data() + c * dim, dim); };

  const std::size_t first = rng.below(m);
  std::copy(x(first).begin(), x(first).end(), center(0).begin());
  std::vector<double> d2(m);
  double total = 0.0;
  for (std::size_t e = 0; e < m; ++e) total += d2[e] = squared_distance(x(e), center(0));
  std::size_t second = first;
  if (total > 0.0) {
    const double target = rng.uniform() * total;
    double acc = 0.0;
    for (std::size_t e = 0; e < m; ++e) {
      if (d2[e] == 0.0) continue;
      acc += d2[e];
      second = e;
      if (acc > target) break;
    }
  } else {
    second = (first + 1 + rng.below(m - 1)) % m;
  }
  std::copy(x(second).begin(), x(second).end(), center(1).begin());

  std::vector<char> side(m, 0);
  std::vector<double> next(2 * dim);
  for (std::size_t iter = 0; iter < config.lloyd_max_iters; ++iter) {
    std::size_t count[2] = {0, 0};
    for (std::size_t e = 0; e < m; ++e) {
      side[e] = squared_distance(x(e), center(1)) < squared_distance(x(e), center(0)) ? 1 : 0;
      ++count[static_cast<int>(side[e])];
    }
    if (count[0] == 0 || count[1] == 0) {
      // Move the point farthest from its center into the empty cluster.
      const char full = count[0] == 0 ? 1 : 0;
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t e = 0; e < m; ++e) {
        const double d = squared_distance(x(e), center(full));
        if (d > far_d) {
          far_d = d;
          far = e;
        }
      }
      side[far] = static_cast<char>(1 - full);
      count[static_cast<int>(full)]--;
      count[1 - full]++;
    }
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t e = 0; e < m; ++e) {
      double* c = next.data() + side[e] * dim;
      for (std::size_t k = 0; k < dim; ++k) c[k] += xs[e * dim + k];
    }
    double moved = 0.0;
    for (int c = 0; c < 2; ++c) {
      double* nc = next.data() + c * dim;
      for (std::size_t k = 0; k < dim; ++k) nc[k] /= static_cast<double>(count[c]);
      moved = std::max(moved, euclidean(std::span<const double>(nc, dim), center(c)));
    }
    centers.swap(next);
    if (moved <= config.lloyd_tol * diameter) break;
  }
  return side;
}

inline TwoMeansResult two_means_lloyd(const PointSet& points, std::span<const Index> sorted,
                                      const TwoMeansSolverConfig& config, RngStream& rng) {
  const std::size_t m = sorted.size();
  const std::size_t dim = points.dim();
  const std::vector<double> xs = gather(points, sorted);
  std::vector<double> lo(xs.begin(), xs.begin() + dim), hi = lo;
  for (std::size_t e = 1; e < m; ++e)
    for (std::size_t k = 0; k < dim; ++k) {
      lo[k] = std::min(lo[k], xs[e * dim + k]);
      hi[k] = std::max(hi[k], xs[e * dim + k]);
    }
  const double diameter = euclidean(lo, hi);

  const std::size_t restarts = std::max<std::size_t>(1, config.lloyd_restarts);
  std::vector<char> best_side;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < restarts; ++r) {
    std::vector<char> side = lloyd_run(xs, m, dim, diameter, config, rng);
    IndexSet a, b;
    for (std::size_t e = 0; e < m; ++e) (side[e] == side[0] ? a : b).push_back(sorted[e]);
    const double cost = one_means_cost(points, a) + one_means_cost(points, b);
    if (cost < best) {
      best = cost;
      best_side = std::move(side);
    }
  }
  std::vector<char> on_second(m, 0);
  for (std::size_t e = 0; e < m; ++e) on_second[e] = best_side[e] != best_side[0];
  return make_result(sorted, on_second, best);
}

}  // namespace detail

inline TwoMeansResult two_means(const PointSet& points, std::span<const Index> set,
                                const TwoMeansSolverConfig& config, RngStream& rng) {
  if (set.size() < 2) throw std::invalid_argument("two_means: need at least two points");
  IndexSet sorted(set.begin(), set.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw std::invalid_argument("two_means: duplicate index");
  if (sorted.back() >= points.size()) throw std::out_of_range("two_means: index out of range");
  if (config.kind == TwoMeansKind::exhaustive)
    return detail::two_means_exhaustive(points, sorted, config);
  return detail::two_means_lloyd(points, sorted, config, rng);
}

inline TwoMeansResult two_means(const PointSet& points, std::span<const Index> set,
                                const TwoMeansSolverConfig& config) {
  RngStream rng(config.seed);
  return two_means(points, set, config, rng);
}

namespace detail {

inline Index bisect(const PointSet& points, const IndexSet& set,
                    const TwoMeansSolverConfig& config, RngStream& rng, TreeBuilder& builder) {
  if (set.size() == 1) return builder.add_leaf(set.front());
  TwoMeansResult r = two_means(points, set, config, rng);
  const Index a = bisect(points, r.split.left, config, rng, builder);
  const Index b = bisect(points, r.split.right, config, rng, builder);
  return builder.join(a, b);
}

}  // namespace detail

// Top-down: split every node with a 2-means solution until singletons.
inline HierTree bisecting_kmeans(const PointSet& points, const TwoMeansSolverConfig& config) {
  IndexSet all(points.size());
  for (Index i = 0; i < all.size(); ++i) all[i] = i;
  RngStream rng(config.seed);
  TreeBuilder builder;
  const Index root = detail::bisect(points, all, config, rng, builder);
  return std::move(builder).build(root);
}

// ---------------------------------------------------------------------------
// Agglomerative linkage.

enum class Linkage { average, single };

namespace detail {

// Clusters live in the slot of their smallest leaf, so scanning slots in
// order and keeping the first strict minimum breaks ties by (min-leaf, min-leaf).
inline HierTree agglomerate(const DistanceMatrix& dist, Linkage linkage) {
  const std::size_t n = dist.size();
  TreeBuilder builder;
  std::vector<Index> node(n);
  for (Index i = 0; i < n; ++i) node[i] = builder.add_leaf(i);
  if (n == 1) return std::move(builder).build(node[0]);

  std::vector<double> d(dist.flat());
  auto at = [&](Index i, Index j) -> double& { return d[i * n + j]; };
  std::vector<std::size_t> size(n, 1);
  std::vector<char> active(n, 1);
  std::vector<Index> nn(n, kNone);
  std::vector<double> nnd(n, std::numeric_limits<double>::infinity());

  auto refresh = [&](Index i) {
    nn[i] = kNone;
    nnd[i] = std::numeric_limits<double>::infinity();
    for (Index j = i + 1; j < n; ++j)
      if (active[j] && at(i, j) < nnd[i]) {
        nnd[i] = at(i, j);
        nn[i] = j;
      }
  };
  for (Index i = 0; i < n; ++i) refresh(i);

  for (std::size_t step = 0; step + 1 < n; ++step) {
    Index a = kNone;
    double best = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < n; ++i)
      if (active[i] && nn[i] != kNone && (a == kNone || nnd[i] < best)) {
        best = nnd[i];
        a = i;
      }
    const Index b = nn[a];

    for (Index k = 0; k < n; ++k) {
      if (!active[k] || k == a || k == b) continue;
      double v;
      if (linkage == Linkage::single) {
        v = std::min(at(a, k), at(b, k));
      } else {
        v = (static_cast<double>(size[a]) * at(a, k) + static_cast<double>(size[b]) * at(b, k)) /
            static_cast<double>(size[a] + size[b]);
      }
      at(a, k) = at(k, a) = v;
    }
    size[a] += size[b];
    active[b] = 0;
    node[a] = builder.join(node[a], node[b]);

    for (Index i = 0; i < n; ++i) {
      if (!active[i]) continue;
      if (i == a || nn[i] == a || nn[i] == b) {
        refresh(i);
      } else if (i < a && (at(i, a) < nnd[i] || (at(i, a) == nnd[i] && a < nn[i]))) {
        nnd[i] = at(i, a);
        nn[i] = a;
      }
    }
  }
  return std::move(builder).build(node[0]);
}

}  // namespace detail

// Merges the pair of clusters with the smallest mean inter-cluster distance.
inline HierTree average_linkage(const DistanceMatrix& dist) {
  return detail::agglomerate(dist, Linkage::average);
}

// Merges the pair of clusters with the smallest closest-pair distance.
inline HierTree single_linkage(const DistanceMatrix& dist) {
  return detail::agglomerate(dist, Linkage::single);
}

// ---------------------------------------------------------------------------
// Random: every point of a node picks a side by a fair coin. A flip that
// leaves a side empty is redrawn in full.

namespace detail {

inline Index random_split(const IndexSet& set, RngStream& rng, TreeBuilder& builder) {
  if (set.size() == 1) return builder.add_leaf(set.front());
  IndexSet heads, tails;
  do {
    heads.clear();
    tails.clear();
    for (Index i : set) (rng.coin() ? heads : tails).push_back(i);
  } while (heads.empty() || tails.empty());
  const Index a = random_split(heads, rng, builder);
  const Index b = random_split(tails, rng, builder);
  return builder.join(a, b);
}

}  // namespace detail

inline HierTree random_tree(std::size_t n, RngStream& rng) {
  if (n == 0) throw std::invalid_argument("random_tree: n must be positive");
  IndexSet all(n);
  for (Index i = 0; i < n; ++i) all[i] = i;
  TreeBuilder builder;
  const Index root = detail::random_split(all, rng, builder);
  return std::move(builder).build(root);
}

inline HierTree random_tree(std::size_t n, std::uint64_t seed) {
  RngStream rng(seed);
  return random_tree(n, rng);
}

// ---------------------------------------------------------------------------

enum class Algorithm { bkm, avg, single, random };

inline std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::bkm: return "bkm";
    case Algorithm::avg: return "avg";
    case Algorithm::single: return "single";
    case Algorithm::random: return "random";
  }
  return "?";
}

inline Algorithm parse_algorithm(std::string_view s) {
  if (s == "bkm") return Algorithm::bkm;
  if (s == "avg") return Algorithm::avg;
  if (s == "single") return Algorithm::single;
  if (s == "random") return Algorithm::random;
  throw std::invalid_argument("unknown algorithm '" + std::string(s) + "'");
}

// `dist` must be pairwise_distances(points) when given; computed on demand otherwise.
inline HierTree run_algorithm(Algorithm algo, const PointSet& points,
                              const TwoMeansSolverConfig& config,
                              const DistanceMatrix* dist = nullptr) {
  switch (algo) {
    case Algorithm::bkm: return bisecting_kmeans(points, config);
    case Algorithm::avg: return average_linkage(dist ? *dist : pairwise_distances(points));
    case Algorithm::single: return single_linkage(dist ? *dist : pairwise_distances(points));
    case Algorithm::random: return random_tree(points.size(), config.seed);
  }
  throw std::invalid_argument("run_algorithm: unknown algorithm");
}

}  // namespace hrc
