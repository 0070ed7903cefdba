#pragma once

// Rooted binary dendrograms over labeled leaves 0..n-1.
//
// Children are semantically unordered. Wherever an order is observable
// (serialization, split listing) the child holding the smaller minimum leaf
// comes first, which makes `serialize` a topology invariant.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hrc/metricspace.hpp"

namespace hrc {

inline constexpr Index kNone = std::numeric_limits<Index>::max();

struct Split {
  IndexSet parent;
  IndexSet left;
  IndexSet right;
};

class HierTree {
 public:
  struct Node {
    Index left = kNone;
    Index right = kNone;
    Index leaf = kNone;  // point index for leaves
    bool is_leaf() const { return leaf != kNone; }
  };

  HierTree(std::vector<Node> nodes, Index root) : nodes_(std::move(nodes)), root_(root) {
    validate_and_index();
  }

  std::size_t n_leaves() const { return n_leaves_; }
  std::size_t n_nodes() const { return nodes_.size(); }
  Index root() const { return root_; }
  const Node& node(Index id) const { return nodes_.at(id); }
  const std::vector<Node>& nodes() const { return nodes_; }

  Index parent(Index id) const { return parent_[id]; }
  std::size_t depth(Index id) const { return depth_[id]; }
  std::size_t leaf_count(Index id) const { return leaf_count_[id]; }
  Index min_leaf(Index id) const { return min_leaf_[id]; }
  Index leaf_node(Index point) const { return leaf_node_.at(point); }

  // Children of an internal node, smaller-minimum-leaf child first.
  std::pair<Index, Index> ordered_children(Index id) const {
    const Node& nd = nodes_[id];
    if (min_leaf_[nd.left] < min_leaf_[nd.right]) return {nd.left, nd.right};
    return {nd.right, nd.left};
  }

  // Sorted point indices below `id`.
  IndexSet leaves(Index id) const {
    IndexSet out;
    out.reserve(leaf_count_[id]);
    std::vector<Index> stack{id};
    while (!stack.empty()) {
      const Index v = stack.back();
      stack.pop_back();
      const Node& nd = nodes_[v];
      if (nd.is_leaf()) {
        out.push_back(nd.leaf);
      } else {
        stack.push_back(nd.left);
        stack.push_back(nd.right);
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  // Internal node ids in root-first depth-first order, canonical child first.
  std::vector<Index> internal_preorder() const {
    std::vector<Index> order;
    order.reserve(n_leaves_ > 0 ? n_leaves_ - 1 : 0);
    std::vector<Index> stack{root_};
    while (!stack.empty()) {
      const Index v = stack.back();
      stack.pop_back();
      if (nodes_[v].is_leaf()) continue;
      order.push_back(v);
      auto [first, second] = ordered_children(v);
      stack.push_back(second);
      stack.push_back(first);
    }
    return order;
  }

 private:
  void validate_and_index() {
    const std::size_t m = nodes_.size();
    if (m == 0) throw std::invalid_argument("HierTree: no nodes");
    if (root_ >= m) throw std::invalid_argument("HierTree: root id out of range");
    std::size_t leaves = 0;
    for (const Node& nd : nodes_) {
      if (nd.is_leaf()) {
        if (nd.left != kNone || nd.right != kNone)
          throw std::invalid_argument("HierTree: leaf node with children");
        ++leaves;
      } else if (nd.left == kNone || nd.right == kNone) {
        throw std::invalid_argument("HierTree: internal node needs exactly two children");
      } else if (nd.left >= m || nd.right >= m || nd.left == nd.right) {
        throw std::invalid_argument("HierTree: invalid child id");
      }
    }
    n_leaves_ = leaves;
    if (m != 2 * leaves - 1)
      throw std::invalid_argument("HierTree: expected " + std::to_string(leaves - 1) +
                                  " internal nodes for " + std::to_string(leaves) + " leaves");

    leaf_node_.assign(leaves, kNone);
    for (Index id = 0; id < m; ++id) {
      const Node& nd = nodes_[id];
      if (!nd.is_leaf()) continue;
      if (nd.leaf >= leaves)
        throw std::invalid_argument("HierTree: leaf index " + std::to_string(nd.leaf) +
                                    " out of range 0.." + std::to_string(leaves - 1));
      if (leaf_node_[nd.leaf] != kNone)
        throw std::invalid_argument("HierTree: duplicate leaf index " + std::to_string(nd.leaf));
      leaf_node_[nd.leaf] = id;
    }

    parent_.assign(m, kNone);
    for (Index id = 0; id < m; ++id) {
      const Node& nd = nodes_[id];
      if (nd.is_leaf()) continue;
      for (Index c : {nd.left, nd.right}) {
        if (c == root_) throw std::invalid_argument("HierTree: root has a parent");
        if (parent_[c] != kNone) throw std::invalid_argument("HierTree: node with two parents");
        parent_[c] = id;
      }
    }

    // Every node reached exactly once from the root rules out cycles and forests.
    depth_.assign(m, 0);
    leaf_count_.assign(m, 0);
    min_leaf_.assign(m, kNone);
    std::vector<Index> order;
    order.reserve(m);
    std::vector<Index> stack{root_};
    std::vector<char> seen(m, 0);
    while (!stack.empty()) {
      const Index v = stack.back();
      stack.pop_back();
      if (seen[v]) throw std::invalid_argument("HierTree: cycle detected");
      seen[v] = 1;
      order.push_back(v);
      const Node& nd = nodes_[v];
      if (!nd.is_leaf()) {
        depth_[nd.left] = depth_[v] + 1;
        depth_[nd.right] = depth_[v] + 1;
        stack.push_back(nd.left);
        stack.push_back(nd.right);
      }
    }
    if (order.size() != m) throw std::invalid_argument("HierTree: unreachable nodes");
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const Node& nd = nodes_[*it];
      if (nd.is_leaf()) {
        leaf_count_[*it] = 1;
        min_leaf_[*it] = nd.leaf;
      } else {
        leaf_count_[*it] = leaf_count_[nd.left] + leaf_count_[nd.right];
        min_leaf_[*it] = std::min(min_leaf_[nd.left], min_leaf_[nd.right]);
      }
    }
  }

  std::vector<Node> nodes_;
  Index root_;
  std::size_t n_leaves_ = 0;
  std::vector<Index> parent_;
  std::vector<std::size_t> depth_;
  std::vector<std::size_t> leaf_count_;
  std::vector<Index> min_leaf_;
  std::vector<Index> leaf_node_;
};

// Bottom-up construction helper used by every algorithm.
class TreeBuilder {
 public:
  Index add_leaf(Index point) {
    nodes_.push_back({kNone, kNone, point});
    return nodes_.size() - 1;
  }
  Index join(Index a, Index b) {
    nodes_.push_back({a, b, kNone});
    return nodes_.size() - 1;
  }
  HierTree build(Index root) && { return HierTree(std::move(nodes_), root); }

 private:
  std::vector<HierTree::Node> nodes_;
};

inline std::vector<Split> splits(const HierTree& tree) {
  std::vector<Split> out;
  for (Index v : tree.internal_preorder()) {
    auto [first, second] = tree.ordered_children(v);
    out.push_back({tree.leaves(v), tree.leaves(first), tree.leaves(second)});
  }
  return out;
}

inline Index lca_node(const HierTree& tree, Index i, Index j) {
  Index a = tree.leaf_node(i);
  Index b = tree.leaf_node(j);
  while (tree.depth(a) > tree.depth(b)) a = tree.parent(a);
  while (tree.depth(b) > tree.depth(a)) b = tree.parent(b);
  while (a != b) {
    a = tree.parent(a);
    b = tree.parent(b);
  }
  return a;
}

inline std::size_t lca_leaf_count(const HierTree& tree, Index i, Index j) {
  if (i >= tree.n_leaves() || j >= tree.n_leaves())
    throw std::out_of_range("lca_leaf_count: leaf index out of range");
  if (i == j) throw std::invalid_argument("lca_leaf_count: i and j must differ");
  return tree.leaf_count(lca_node(tree, i, j));
}

// Binary-lifting ancestor table for O(log n) LCA queries on large trees.
class LcaIndex {
 public:
  explicit LcaIndex(const HierTree& tree) : tree_(&tree) {
    const std::size_t m = tree.n_nodes();
    std::size_t levels = 1;
    while ((std::size_t{1} << levels) < m) ++levels;
    up_.assign(levels, std::vector<Index>(m));
    for (Index v = 0; v < m; ++v) up_[0][v] = v == tree.root() ? v : tree.parent(v);
    for (std::size_t k = 1; k < levels; ++k)
      for (Index v = 0; v < m; ++v) up_[k][v] = up_[k - 1][up_[k - 1][v]];
  }

  Index ancestor_at_depth(Index v, std::size_t depth) const {
    std::size_t diff = tree_->depth(v) - depth;
    for (std::size_t k = 0; diff != 0; ++k, diff >>= 1)
      if (diff & 1) v = up_[k][v];
    return v;
  }

  Index lca(Index a, Index b) const {
    if (tree_->depth(a) > tree_->depth(b)) a = ancestor_at_depth(a, tree_->depth(b));
    if (tree_->depth(b) > tree_->depth(a)) b = ancestor_at_depth(b, tree_->depth(a));
    if (a == b) return a;
    for (std::size_t k = up_.size(); k-- > 0;) {
      if (up_[k][a] != up_[k][b]) {
        a = up_[k][a];
        b = up_[k][b];
      }
    }
    return up_[0][a];
  }

  Index lca_of_leaves(Index i, Index j) const {
    return lca(tree_->leaf_node(i), tree_->leaf_node(j));
  }

 private:
  const HierTree* tree_;
  std::vector<std::vector<Index>> up_;
};

// ---------------------------------------------------------------------------
// Text format: leaf = decimal index, internal = "(" subtree "," subtree ")",
// optionally followed by ":" weight for annotated (ultrametric) trees.

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : std::runtime_error(what + " at position " + std::to_string(position)),
        position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

inline void append_double(std::string& out, double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

inline std::string format_double(double v) {
  std::string s;
  append_double(s, v);
  return s;
}

namespace detail {

inline void serialize_node(const HierTree& tree, Index v, const std::vector<double>* weights,
                           std::string& out) {
  const auto& nd = tree.node(v);
  if (nd.is_leaf()) {
    out += std::to_string(nd.leaf);
    return;
  }
  auto [first, second] = tree.ordered_children(v);
  out += '(';
  serialize_node(tree, first, weights, out);
  out += ',';
  serialize_node(tree, second, weights, out);
  out += ')';
  if (weights) {
    out += ':';
    append_double(out, (*weights)[v]);
  }
}

class TreeParser {
 public:
  TreeParser(std::string_view text, bool allow_weights)
      : text_(text), allow_weights_(allow_weights) {}

  std::pair<HierTree, std::vector<double>> run() {
    skip_ws();
    const Index root = parse_subtree();
    skip_ws();
    if (pos_ != text_.size()) throw ParseError("unexpected trailing input", pos_);
    const std::size_t n = leaf_pos_.size();
    std::vector<std::size_t> at(n, kNone);
    for (std::size_t k = 0; k < n; ++k) {
      const Index leaf = nodes_[leaf_ids_[k]].leaf;
      if (leaf >= n)
        throw ParseError("leaf index " + std::to_string(leaf) + " out of range for " +
                             std::to_string(n) + " leaves",
                         leaf_pos_[k]);
      if (at[leaf] != kNone)
        throw ParseError("duplicate leaf index " + std::to_string(leaf), leaf_pos_[k]);
      at[leaf] = k;
    }
    HierTree tree(std::move(nodes_), root);
    return {std::move(tree), std::move(weights_)};
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  void expect(char c) {
    skip_ws();
    if (pos_ >= text_.size() || text_[pos_] != c)
      throw ParseError(std::string("expected '") + c + "'", pos_);
    ++pos_;
  }

  Index parse_subtree() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of input", pos_);
    if (text_[pos_] == '(') {
      ++pos_;
      const Index a = parse_subtree();
      expect(',');
      const Index b = parse_subtree();
      expect(')');
      nodes_.push_back({a, b, kNone});
      weights_.push_back(std::numeric_limits<double>::quiet_NaN());
      const Index id = nodes_.size() - 1;
      skip_ws();
      if (pos_ < text_.size() && text_[pos_] == ':') {
        if (!allow_weights_) throw ParseError("weight annotation not allowed", pos_);
        ++pos_;
        skip_ws();
        double w = 0.0;
        auto res = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), w);
        if (res.ec != std::errc() || !std::isfinite(w)) throw ParseError("expected weight", pos_);
        weights_[id] = w;
        pos_ = static_cast<std::size_t>(res.ptr - text_.data());
      } else if (allow_weights_) {
        throw ParseError("expected ':' weight after internal node", pos_);
      }
      return id;
    }
    if (!std::isdigit(static_cast<unsigned char>(text_[pos_])))
      throw ParseError(std::string("unexpected character '") + text_[pos_] + "'", pos_);
    const std::size_t start = pos_;
    Index leaf = 0;
    auto res = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), leaf);
    if (res.ec != std::errc()) throw ParseError("invalid leaf index", start);
    pos_ = static_cast<std::size_t>(res.ptr - text_.data());
    nodes_.push_back({kNone, kNone, leaf});
    weights_.push_back(0.0);
    leaf_ids_.push_back(nodes_.size() - 1);
    leaf_pos_.push_back(start);
    return nodes_.size() - 1;
  }

  std::string_view text_;
  bool allow_weights_;
  std::size_t pos_ = 0;
  std::vector<HierTree::Node> nodes_;
  std::vector<double> weights_;
  std::vector<Index> leaf_ids_;
  std::vector<std::size_t> leaf_pos_;
};

}  // namespace detail

inline std::string serialize(const HierTree& tree) {
  std::string out;
  detail::serialize_node(tree, tree.root(), nullptr, out);
  return out;
}

// `weights` is indexed by node id; leaf entries are ignored.
inline std::string serialize_weighted(const HierTree& tree, const std::vector<double>& weights) {
  if (weights.size() != tree.n_nodes())
    throw std::invalid_argument("serialize_weighted: one weight per node required");
  std::string out;
  detail::serialize_node(tree, tree.root(), &weights, out);
  return out;
}

inline HierTree parse(std::string_view text) {
  return detail::TreeParser(text, false).run().first;
}

// Returns the tree and per-node weights (0 for leaves).
inline std::pair<HierTree, std::vector<double>> parse_weighted(std::string_view text) {
  return detail::TreeParser(text, true).run();
}

// ---------------------------------------------------------------------------
// Exhaustive enumeration.

inline constexpr std::size_t kMaxEnumerateLeaves = 7;

// (2n-3)!! for n >= 2, 1 for n = 1.
inline std::uint64_t count_trees(std::size_t n) {
  std::uint64_t c = 1;
  if (n < 3) return c;
  for (std::size_t k = 3; k <= 2 * n - 3; k += 2) c *= k;
  return c;
}

// Every unordered binary dendrogram on leaves 0..n-1 exactly once, sorted by
// canonical serialization so "first in enumeration order" is well defined.
inline std::vector<HierTree> enumerate_trees(std::size_t n) {
  if (n < 2 || n > kMaxEnumerateLeaves)
    throw std::invalid_argument("enumerate_trees: n must be in [2, " +
                                std::to_string(kMaxEnumerateLeaves) + "]");
  // Grow by inserting leaf k on each of the 2k-1 edges (including above the
  // root) of every tree on leaves 0..k-1.
  struct Shape {
    std::vector<HierTree::Node> nodes;
    Index root;
  };
  std::vector<Shape> current{{{{kNone, kNone, 0}, {kNone, kNone, 1}, {0, 1, kNone}}, 2}};
  for (Index leaf = 2; leaf < n; ++leaf) {
    std::vector<Shape> next;
    next.reserve(current.size() * (2 * leaf - 1));
    for (const Shape& s : current) {
      for (Index target = 0; target < s.nodes.size(); ++target) {
        Shape t = s;
        t.nodes.push_back({kNone, kNone, leaf});
        const Index new_leaf = t.nodes.size() - 1;
        t.nodes.push_back({target, new_leaf, kNone});
        const Index joint = t.nodes.size() - 1;
        if (target == s.root) {
          t.root = joint;
        } else {
          for (auto& nd : t.nodes) {
            if (&nd == &t.nodes[joint]) continue;
            if (nd.left == target) nd.left = joint;
            else if (nd.right == target) nd.right = joint;
          }
        }
        next.push_back(std::move(t));
      }
    }
    current = std::move(next);
  }
  std::vector<std::pair<std::string, HierTree>> keyed;
  keyed.reserve(current.size());
  for (Shape& s : current) {
    HierTree t(std::move(s.nodes), s.root);
    std::string key = serialize(t);
    keyed.emplace_back(std::move(key), std::move(t));
  }
  std::sort(keyed.begin(), keyed.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<HierTree> out;
  out.reserve(keyed.size());
  for (auto& [key, t] : keyed) out.push_back(std::move(t));
  return out;
}

inline void for_each_tree(std::size_t n, const std::function<void(const HierTree&)>& visit) {
  for (const HierTree& t : enumerate_trees(n)) visit(t);
}

inline HierTree single_leaf_tree() {
  TreeBuilder b;
  const Index r = b.add_leaf(0);
  return std::move(b).build(r);
}

}  // namespace hrc
