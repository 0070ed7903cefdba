#pragma once

// Euclidean point sets, dissimilarity matrices, centroids and k-means costs.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hrc {

using Index = std::size_t;
using IndexSet = std::vector<Index>;
using Coords = std::vector<double>;

inline constexpr double kRelTol = 1e-9;
inline constexpr double kAbsTol = 1e-12;

// |a - b| <= max(abs_floor, rel * max(|a|, |b|))
inline bool approx_equal(double a, double b, double rel = kRelTol, double abs_floor = kAbsTol) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return std::abs(a - b) <= std::max(abs_floor, rel * scale);
}

// Points in R^dim stored row-major. Immutable once built.
class PointSet {
 public:
  PointSet(std::size_t dim, std::vector<double> flat) : dim_(dim), data_(std::move(flat)) {
    if (dim_ == 0) throw std::invalid_argument("PointSet: dimension must be positive");
    if (data_.empty()) throw std::invalid_argument("PointSet: at least one point required");
    if (data_.size() % dim_ != 0)
      throw std::invalid_argument("PointSet: coordinate count is not a multiple of dim");
    for (double v : data_)
      if (!std::isfinite(v)) throw std::invalid_argument("PointSet: non-finite coordinate");
  }

  static PointSet from_rows(const std::vector<Coords>& rows) {
    if (rows.empty()) throw std::invalid_argument("PointSet: at least one point required");
    const std::size_t dim = rows.front().size();
    std::vector<double> flat;
    flat.reserve(rows.size() * dim);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != dim)
        throw std::invalid_argument("PointSet: row " + std::to_string(r) + " has " +
                                    std::to_string(rows[r].size()) + " coordinates, expected " +
                                    std::to_string(dim));
      flat.insert(flat.end(), rows[r].begin(), rows[r].end());
    }
    return PointSet(dim, std::move(flat));
  }

  std::size_t size() const { return data_.size() / dim_; }
  std::size_t dim() const { return dim_; }

  std::span<const double> operator[](Index i) const { return {data_.data() + i * dim_, dim_}; }

  std::span<const double> at(Index i) const {
    if (i >= size())
      throw std::out_of_range("PointSet: index " + std::to_string(i) + " out of range (n=" +
                              std::to_string(size()) + ")");
    return (*this)[i];
  }

  const std::vector<double>& flat() const { return data_; }

  // Points restricted to `subset`, re-indexed 0..|subset|-1 in the given order.
  PointSet select(std::span<const Index> subset) const {
    std::vector<double> flat;
    flat.reserve(subset.size() * dim_);
    for (Index i : subset) {
      auto p = at(i);
      flat.insert(flat.end(), p.begin(), p.end());
    }
    return PointSet(dim_, std::move(flat));
  }

 private:
  std::size_t dim_;
  std::vector<double> data_;
};

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double t = a[k] - b[k];
    s += t * t;
  }
  return s;
}

inline double euclidean(std::span<const double> a, std::span<const double> b) {
  return std::sqrt(squared_distance(a, b));
}

inline double distance(const PointSet& points, Index i, Index j) {
  return euclidean(points.at(i), points.at(j));
}

inline Coords centroid(const PointSet& points, std::span<const Index> set) {
  if (set.empty()) throw std::invalid_argument("centroid: empty index set");
  Coords c(points.dim(), 0.0);
  for (Index i : set) {
    auto p = points.at(i);
    for (std::size_t k = 0; k < c.size(); ++k) c[k] += p[k];
  }
  const double inv = static_cast<double>(set.size());
  for (double& v : c) v /= inv;
  return c;
}

// Sum of squared distances of the members of `set` to `center`.
inline double one_means_cost(const PointSet& points, std::span<const Index> set,
                             std::span<const double> center) {
  double s = 0.0;
  for (Index i : set) s += squared_distance(points.at(i), center);
  return s;
}

inline double one_means_cost(const PointSet& points, std::span<const Index> set) {
  if (set.empty()) return 0.0;
  const Coords c = centroid(points, set);
  return one_means_cost(points, set, c);
}

// Throws unless `parts` are nonempty, disjoint and cover 0..n-1.
inline void require_partition(std::size_t n, const std::vector<IndexSet>& parts) {
  std::vector<char> seen(n, 0);
  std::size_t covered = 0;
  for (const auto& part : parts) {
    if (part.empty()) throw std::invalid_argument("partition: empty part");
    for (Index i : part) {
      if (i >= n)
        throw std::invalid_argument("partition: index " + std::to_string(i) + " out of range");
      if (seen[i]) throw std::invalid_argument("partition: index " + std::to_string(i) +
                                               " appears in more than one part");
      seen[i] = 1;
      ++covered;
    }
  }
  if (covered != n)
    throw std::invalid_argument("partition: " + std::to_string(n - covered) +
                                " indices not covered");
}

inline double kmeans_cost(const PointSet& points, const std::vector<IndexSet>& parts) {
  require_partition(points.size(), parts);
  double total = 0.0;
  for (const auto& part : parts) total += one_means_cost(points, part);
  return total;
}

struct KMeansSolution {
  std::vector<IndexSet> parts;
  double cost = 0.0;
};

inline KMeansSolution make_kmeans_solution(const PointSet& points, std::vector<IndexSet> parts) {
  const double cost = kmeans_cost(points, parts);
  return {std::move(parts), cost};
}

// Full symmetric n x n matrix with zero diagonal and nonnegative entries.
// Used both for dissimilarities and (flagged by the caller) similarity weights.
class DistanceMatrix {
 public:
  explicit DistanceMatrix(std::size_t n) : n_(n), data_(n * n, 0.0) {
    if (n == 0) throw std::invalid_argument("DistanceMatrix: n must be positive");
  }

  DistanceMatrix(std::size_t n, std::vector<double> entries) : n_(n), data_(std::move(entries)) {
    if (n == 0) throw std::invalid_argument("DistanceMatrix: n must be positive");
    if (data_.size() != n * n) throw std::invalid_argument("DistanceMatrix: expected n*n entries");
    for (std::size_t i = 0; i < n; ++i) {
      if ((*this)(i, i) != 0.0)
        throw std::invalid_argument("DistanceMatrix: nonzero diagonal at " + std::to_string(i));
      for (std::size_t j = 0; j < n; ++j) {
        const double v = (*this)(i, j);
        if (!std::isfinite(v) || v < 0.0)
          throw std::invalid_argument("DistanceMatrix: negative or non-finite entry at (" +
                                      std::to_string(i) + "," + std::to_string(j) + ")");
        if (v != (*this)(j, i))
          throw std::invalid_argument("DistanceMatrix: asymmetric entry at (" +
                                      std::to_string(i) + "," + std::to_string(j) + ")");
      }
    }
  }

  std::size_t size() const { return n_; }
  double operator()(Index i, Index j) const { return data_[i * n_ + j]; }

  // Sets both (i,j) and (j,i).
  void set(Index i, Index j, double v) {
    if (i >= n_ || j >= n_) throw std::out_of_range("DistanceMatrix: index out of range");
    if (i == j) {
      if (v != 0.0) throw std::invalid_argument("DistanceMatrix: diagonal must be zero");
      return;
    }
    if (!std::isfinite(v) || v < 0.0)
      throw std::invalid_argument("DistanceMatrix: entries must be finite and nonnegative");
    data_[i * n_ + j] = v;
    data_[j * n_ + i] = v;
  }

  const std::vector<double>& flat() const { return data_; }

  double max_entry() const { return data_.empty() ? 0.0 : *std::max_element(data_.begin(), data_.end()); }

  // Sum over unordered pairs p < q.
  double pair_sum() const {
    double s = 0.0;
    for (Index p = 0; p < n_; ++p)
      for (Index q = p + 1; q < n_; ++q) s += (*this)(p, q);
    return s;
  }

 private:
  std::size_t n_;
  std::vector<double> data_;
};

inline DistanceMatrix pairwise_distances(const PointSet& points) {
  const std::size_t n = points.size();
  DistanceMatrix m(n);
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) m.set(i, j, euclidean(points[i], points[j]));
  return m;
}

struct Triple {
  Index i, j, k;
  bool operator==(const Triple&) const = default;
};

struct MetricCheck {
  bool ok = true;
  // (i, j, k) with d(i,k) > d(i,j) + d(j,k) + tol.
  std::optional<Triple> violation;
};

inline MetricCheck check_metric(const DistanceMatrix& d, double tol = 1e-9) {
  const std::size_t n = d.size();
  for (Index i = 0; i < n; ++i)
    for (Index k = 0; k < n; ++k)
      for (Index j = 0; j < n; ++j)
        if (d(i, k) > d(i, j) + d(j, k) + tol) return {false, Triple{i, j, k}};
  return {};
}

}  // namespace hrc
