/*
 * Copyright 2026 The cartforest Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "cartforest/random.hpp"
#include "cartforest/splitter.hpp"

namespace cartforest {

// Direction reported for cuts a path does not have.
inline constexpr std::size_t kInfiniteDirection = std::numeric_limits<std::size_t>::max();

struct TreeNode {
  static constexpr std::int32_t kNone = -1;

  std::int32_t left = kNone;
  std::int32_t right = kNone;
  Cut cut;                 // meaningful for internal nodes only
  std::uint32_t depth = 0;  // number of cuts above this node
  // Rows of the node's cell are GrownTree::rows()[begin, end).
  std::uint32_t begin = 0;
  std::uint32_t end = 0;
  double mean = 0.0;

  bool is_leaf() const { return left == kNone; }
  std::size_t count() const { return end - begin; }
  bool operator==(const TreeNode&) const = default;
};

/// A partition of [0,1]^p grown by level-order CART splits.
///
/// Nodes are stored in creation order (root first, then the two children of
/// each split, left before right). Cells are left-closed/right-open per
/// coordinate, except that the global upper face x = 1 belongs to the cell
/// touching it. Immutable after construction.
class GrownTree {
 public:
  GrownTree() = default;
  // Rebuilds bounds from the cuts and validates the structure. Used by
  // deserialization; throws ValidationError on inconsistent input.
  GrownTree(std::size_t p, std::vector<TreeNode> nodes, std::vector<std::size_t> rows,
            std::vector<std::size_t> subsample);

  std::size_t dimension() const { return p_; }
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  const TreeNode& node(std::size_t id) const { return nodes_[id]; }
  std::size_t leaf_count() const { return leaf_count_; }
  std::span<const std::size_t> subsample() const { return subsample_; }
  std::span<const std::size_t> rows() const { return rows_; }
  std::span<const std::size_t> node_rows(std::size_t id) const {
    return std::span<const std::size_t>(rows_).subspan(nodes_[id].begin, nodes_[id].count());
  }
  std::span<const double> lower(std::size_t id) const { return {lower_.data() + id * p_, p_}; }
  std::span<const double> upper(std::size_t id) const { return {upper_.data() + id * p_, p_}; }
  double volume(std::size_t id) const;

  // Index of the leaf whose cell holds x. Throws DomainError outside [0,1]^p.
  std::size_t find_leaf(std::span<const double> x) const;
  double predict(std::span<const double> x) const;
  // Cuts on the root-to-leaf path of x, in order.
  std::vector<Cut> path_cuts(std::span<const double> x) const;
  // First k cut directions on x's path, padded with kInfiniteDirection.
  std::vector<std::size_t> cut_directions(std::span<const double> x, std::size_t k) const;

  bool operator==(const GrownTree&) const = default;

 private:
  friend GrownTree grow_tree(const PointsView&, std::span<const std::size_t>, std::size_t, std::size_t,
                             RandomStream&);
  void finalize(const PointsView* points);
  void check_query(std::span<const double> x) const;

  std::size_t p_ = 0;
  std::vector<TreeNode> nodes_;
  std::vector<std::size_t> rows_;
  std::vector<std::size_t> subsample_;
  std::vector<double> lower_;
  std::vector<double> upper_;
  std::size_t leaf_count_ = 0;
};

/// Grows one tree on `subsample` (distinct row indices of `points`).
///
/// Cells wait in per-level FIFO queues. While fewer than t_n leaves exist,
/// the first cell of the current level is taken: a single-point cell, or one
/// whose drawn directions admit no cut, moves unchanged to the next level;
/// otherwise a fresh mtry-subset is drawn, the best cut splits the cell, both
/// children join the next level and the leaf count grows by one. An empty
/// level advances to the next. Growth also stops when a whole level passes
/// without a split and none of its cells could ever be split.
///
/// Throws ConfigError if the subsample is empty, t_n is outside [1, a_n],
/// mtry is outside [1, p], or subsample indices repeat or exceed the table.
GrownTree grow_tree(const PointsView& points, std::span<const std::size_t> subsample, std::size_t t_n,
                    std::size_t mtry, RandomStream& rng);

/// Post-growth structural checks: partition of every internal cell, cuts
/// strictly inside cells at midpoints of consecutive distinct coordinates,
/// leaf means, leaf count, membership of rows in their cells. Returns one
/// message per violation (empty when the tree is sound).
std::vector<std::string> audit_tree(const GrownTree& tree, const PointsView& points);

}  // namespace cartforest
