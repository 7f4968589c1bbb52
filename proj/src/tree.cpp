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

#include "cartforest/tree.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "cartforest/errors.hpp"
#include "cartforest/io.hpp"

namespace cartforest {

namespace {

std::int32_t to_id(std::size_t index) { return static_cast<std::int32_t>(index); }

}  // namespace

GrownTree::GrownTree(std::size_t p, std::vector<TreeNode> nodes, std::vector<std::size_t> rows,
                     std::vector<std::size_t> subsample)
    : p_(p), nodes_(std::move(nodes)), rows_(std::move(rows)), subsample_(std::move(subsample)) {
  if (p_ == 0) throw ValidationError("tree: p must be positive");
  if (nodes_.empty()) throw ValidationError("tree: no nodes");
  if (rows_.size() != subsample_.size()) throw ValidationError("tree: rows and subsample differ in size");
  std::vector<std::size_t> a(rows_), b(subsample_);
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  if (a != b) throw ValidationError("tree: rows are not a permutation of the subsample");
  if (nodes_[0].begin != 0 || nodes_[0].end != rows_.size() || nodes_[0].depth != 0)
    throw ValidationError("tree: root must cover all rows at depth 0");
  std::vector<int> parents(nodes_.size(), 0);
  for (std::size_t id = 0; id < nodes_.size(); ++id) {
    const TreeNode& node = nodes_[id];
    if (node.begin > node.end || node.end > rows_.size()) throw ValidationError("tree: node row range out of bounds");
    if (node.is_leaf() != (node.right == TreeNode::kNone))
      throw ValidationError("tree: node " + std::to_string(id) + " has exactly one child");
    if (node.is_leaf()) continue;
    if (node.cut.direction >= p_) throw ValidationError("tree: cut direction out of range");
    for (std::int32_t child : {node.left, node.right}) {
      if (child <= static_cast<std::int32_t>(id) || child >= static_cast<std::int32_t>(nodes_.size()))
        throw ValidationError("tree: child ids must point forward");
      if (++parents[static_cast<std::size_t>(child)] > 1) throw ValidationError("tree: node with two parents");
      if (nodes_[static_cast<std::size_t>(child)].depth != node.depth + 1)
        throw ValidationError("tree: child depth mismatch");
    }
    const TreeNode& l = nodes_[static_cast<std::size_t>(node.left)];
    const TreeNode& r = nodes_[static_cast<std::size_t>(node.right)];
    if (l.begin != node.begin || l.end != r.begin || r.end != node.end)
      throw ValidationError("tree: children do not split the parent's row range");
  }
  for (std::size_t id = 1; id < nodes_.size(); ++id)
    if (parents[id] != 1) throw ValidationError("tree: node " + std::to_string(id) + " is unreachable");
  finalize(nullptr);
}

void GrownTree::finalize(const PointsView* points) {
  lower_.assign(nodes_.size() * p_, 0.0);
  upper_.assign(nodes_.size() * p_, 1.0);
  leaf_count_ = 0;
  for (std::size_t id = 0; id < nodes_.size(); ++id) {
    TreeNode& node = nodes_[id];
    if (points != nullptr) {
      double sum = 0.0;
      for (std::size_t k = node.begin; k < node.end; ++k) sum += points->y(rows_[k]);
      node.mean = node.count() > 0 ? sum / static_cast<double>(node.count()) : 0.0;
    }
    if (node.is_leaf()) {
      ++leaf_count_;
      continue;
    }
    for (std::int32_t child : {node.left, node.right}) {
      const auto c = static_cast<std::size_t>(child);
      std::copy_n(lower_.begin() + static_cast<std::ptrdiff_t>(id * p_), p_,
                  lower_.begin() + static_cast<std::ptrdiff_t>(c * p_));
      std::copy_n(upper_.begin() + static_cast<std::ptrdiff_t>(id * p_), p_,
                  upper_.begin() + static_cast<std::ptrdiff_t>(c * p_));
    }
    upper_[static_cast<std::size_t>(node.left) * p_ + node.cut.direction] = node.cut.position;
    lower_[static_cast<std::size_t>(node.right) * p_ + node.cut.direction] = node.cut.position;
  }
}

double GrownTree::volume(std::size_t id) const {
  double v = 1.0;
  for (std::size_t j = 0; j < p_; ++j) v *= upper_[id * p_ + j] - lower_[id * p_ + j];
  return v;
}

void GrownTree::check_query(std::span<const double> x) const {
  if (x.size() != p_)
    throw DomainError("query has " + std::to_string(x.size()) + " coordinates, tree expects " + std::to_string(p_));
  for (double v : x)
    if (!(v >= 0.0 && v <= 1.0)) throw DomainError("query coordinate " + format_double(v) + " outside [0,1]");
}

std::size_t GrownTree::find_leaf(std::span<const double> x) const {
  check_query(x);
  std::size_t id = 0;
  while (!nodes_[id].is_leaf()) {
    const TreeNode& node = nodes_[id];
    id = static_cast<std::size_t>(x[node.cut.direction] < node.cut.position ? node.left : node.right);
  }
  return id;
}

double GrownTree::predict(std::span<const double> x) const { return nodes_[find_leaf(x)].mean; }

std::vector<Cut> GrownTree::path_cuts(std::span<const double> x) const {
  check_query(x);
  std::vector<Cut> cuts;
  std::size_t id = 0;
  while (!nodes_[id].is_leaf()) {
    const TreeNode& node = nodes_[id];
    cuts.push_back(node.cut);
    id = static_cast<std::size_t>(x[node.cut.direction] < node.cut.position ? node.left : node.right);
  }
  return cuts;
}

std::vector<std::size_t> GrownTree::cut_directions(std::span<const double> x, std::size_t k) const {
  const auto cuts = path_cuts(x);
  std::vector<std::size_t> directions(k, kInfiniteDirection);
  for (std::size_t q = 0; q < k && q < cuts.size(); ++q) directions[q] = cuts[q].direction;
  return directions;
}

GrownTree grow_tree(const PointsView& points, std::span<const std::size_t> subsample, std::size_t t_n,
                    std::size_t mtry, RandomStream& rng) {
  const std::size_t a_n = subsample.size();
  if (a_n == 0) throw ConfigError("grow: empty subsample");
  if (t_n < 1 || t_n > a_n)
    throw ConfigError("grow: t_n must lie in {1.." + std::to_string(a_n) + "}, got " + std::to_string(t_n));
  if (mtry < 1 || mtry > points.p)
    throw ConfigError("grow: mtry must lie in {1.." + std::to_string(points.p) + "}, got " + std::to_string(mtry));
  const std::size_t n = points.responses.size();
  {
    std::vector<std::size_t> sorted(subsample.begin(), subsample.end());
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw ConfigError("grow: subsample indices must be distinct");
    if (sorted.back() >= n) throw ConfigError("grow: subsample index out of range");
  }

  GrownTree tree;
  tree.p_ = points.p;
  tree.subsample_.assign(subsample.begin(), subsample.end());
  tree.rows_ = tree.subsample_;
  TreeNode root;
  root.begin = 0;
  root.end = static_cast<std::uint32_t>(a_n);
  tree.nodes_.push_back(root);

  SplitScratch scratch;
  std::vector<std::deque<std::size_t>> levels(1);
  levels[0].push_back(0);
  std::size_t leaves = 1;
  std::size_t level = 0;
  bool level_split = false;
  bool level_frozen = true;  // every cell seen in this level can never be split

  while (leaves < t_n) {
    if (levels[level].empty()) {
      if (!level_split && level_frozen) break;
      ++level;
      level_split = false;
      level_frozen = true;
      continue;
    }
    if (levels.size() <= level + 1) levels.resize(level + 2);
    const std::size_t id = levels[level].front();
    levels[level].pop_front();

    const auto rows = std::span<const std::size_t>(tree.rows_).subspan(tree.nodes_[id].begin, tree.nodes_[id].count());
    if (rows.size() == 1) {
      levels[level + 1].push_back(id);
      continue;
    }
    const auto directions = draw_mtry(points.p, mtry, rng);
    const auto split = best_cut(points, rows, directions, &scratch);
    if (!split) {
      levels[level + 1].push_back(id);
      level_frozen = level_frozen && !is_splittable(points, rows);
      continue;
    }

    const Cut cut = split->cut;
    auto first = tree.rows_.begin() + tree.nodes_[id].begin;
    auto last = tree.rows_.begin() + tree.nodes_[id].end;
    const auto middle = std::stable_partition(
        first, last, [&](std::size_t row) { return points.x(row, cut.direction) < cut.position; });

    TreeNode left;
    left.depth = tree.nodes_[id].depth + 1;
    left.begin = tree.nodes_[id].begin;
    left.end = static_cast<std::uint32_t>(middle - tree.rows_.begin());
    TreeNode right = left;
    right.begin = left.end;
    right.end = tree.nodes_[id].end;

    const std::size_t left_id = tree.nodes_.size();
    tree.nodes_.push_back(left);
    tree.nodes_.push_back(right);
    tree.nodes_[id].cut = cut;
    tree.nodes_[id].left = to_id(left_id);
    tree.nodes_[id].right = to_id(left_id + 1);
    levels[level + 1].push_back(left_id);
    levels[level + 1].push_back(left_id + 1);
    ++leaves;
    level_split = true;
  }

  tree.finalize(&points);
  return tree;
}

std::vector<std::string> audit_tree(const GrownTree& tree, const PointsView& points) {
  std::vector<std::string> problems;
  const std::size_t p = tree.dimension();
  std::size_t leaves = 0;
  for (std::size_t id = 0; id < tree.nodes().size(); ++id) {
    const TreeNode& node = tree.node(id);
    const auto rows = tree.node_rows(id);
    const auto lo = tree.lower(id);
    const auto hi = tree.upper(id);
    const std::string where = "node " + std::to_string(id) + ": ";
    for (std::size_t row : rows) {
      for (std::size_t j = 0; j < p; ++j) {
        const double x = points.x(row, j);
        const bool inside = x >= lo[j] && (x < hi[j] || (hi[j] == 1.0 && x == 1.0));
        if (!inside) problems.push_back(where + "row " + std::to_string(row) + " lies outside the cell");
      }
    }
    if (node.is_leaf()) {
      ++leaves;
      if (rows.empty()) problems.push_back(where + "empty leaf");
      double sum = 0.0;
      for (std::size_t row : rows) sum += points.y(row);
      const double mean = rows.empty() ? 0.0 : sum / static_cast<double>(rows.size());
      if (std::fabs(mean - node.mean) > 1e-12 * (1.0 + std::fabs(mean))) problems.push_back(where + "leaf mean mismatch");
      continue;
    }
    const std::size_t j = node.cut.direction;
    const double z = node.cut.position;
    if (!(z > lo[j] && z < hi[j])) problems.push_back(where + "cut not strictly inside the cell");
    double left_max = -1.0;
    double right_min = 2.0;
    for (std::size_t row : tree.node_rows(static_cast<std::size_t>(node.left)))
      left_max = std::max(left_max, points.x(row, j));
    for (std::size_t row : tree.node_rows(static_cast<std::size_t>(node.right)))
      right_min = std::min(right_min, points.x(row, j));
    if (!(left_max < z && z <= right_min)) problems.push_back(where + "children do not respect the cut");
    const double midpoint = 0.5 * (left_max + right_min);
    if (z != midpoint && !(midpoint <= left_max && z == right_min))
      problems.push_back(where + "cut is not the midpoint of consecutive coordinates");
  }
  if (leaves != tree.leaf_count()) problems.push_back("leaf count mismatch");
  return problems;
}

}  // namespace cartforest
