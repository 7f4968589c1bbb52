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

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <vector>

#include "../support/oracles.hpp"
#include "cartforest/dataset.hpp"
#include "cartforest/errors.hpp"
#include "cartforest/tree.hpp"

namespace cartforest {
namespace {

std::vector<std::size_t> iota_rows(std::size_t n) {
  std::vector<std::size_t> r(n);
  std::iota(r.begin(), r.end(), std::size_t{0});
  return r;
}

Dataset noisy(std::size_t n, std::size_t p, std::uint64_t seed) {
  std::vector<Component> comps{Component::linear(0.0, 2.0)};
  if (p > 1) comps.push_back(Component::sine(1.0, 1.0));
  return sample_dataset(AdditiveModel(p, comps.size(), 0.5, comps), n, seed);
}

TEST(GrowTree, ReplayOracleAgreesNodeForNode) {
  RandomStream meta(2024);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t p = 1 + meta.below(4);
    const std::size_t n = 2 + meta.below(80);
    const Dataset d = noisy(n, p, 1000 + trial);
    const std::size_t mtry = 1 + meta.below(p);
    const std::size_t t_n = 1 + meta.below(n);
    const auto rows = iota_rows(n);
    RandomStream a(500 + trial), b(500 + trial);
    const GrownTree tree = grow_tree(d, rows, t_n, mtry, a);
    const auto replay = testing::replay_algorithm1(d, rows, t_n, mtry, b);
    EXPECT_EQ(testing::compare_with_replay(tree, replay), "") << "trial " << trial;
    EXPECT_EQ(tree.leaf_count(), t_n);
  }
}

TEST(GrowTree, FourPointsThreeLeaves) {
  const Dataset d(2, {0.1, 0.7, 0.4, 0.2, 0.6, 0.9, 0.85, 0.35}, {0.0, 1.0, 3.0, 2.5});
  const auto rows = iota_rows(4);
  RandomStream a(9), b(9);
  const GrownTree tree = grow_tree(d, rows, 3, 1, a);
  EXPECT_EQ(tree.leaf_count(), 3u);
  EXPECT_EQ(tree.nodes().size(), 5u);
  EXPECT_EQ(testing::compare_with_replay(tree, testing::replay_algorithm1(d, rows, 3, 1, b)), "");
}

TEST(GrowTree, SingleLeafPredictsMean) {
  const Dataset d = noisy(50, 2, 3);
  RandomStream rng(1);
  const auto rows = iota_rows(50);
  const GrownTree tree = grow_tree(d, rows, 1, 2, rng);
  EXPECT_EQ(tree.nodes().size(), 1u);
  double mean = 0.0;
  for (double y : d.responses()) mean += y;
  mean /= 50.0;
  const std::vector<double> x{0.3, 0.9};
  EXPECT_NEAR(tree.predict(x), mean, 1e-14);
  EXPECT_EQ(tree.cut_directions(x, 3),
            (std::vector<std::size_t>{kInfiniteDirection, kInfiniteDirection, kInfiniteDirection}));
  EXPECT_TRUE(tree.path_cuts(x).empty());
}

TEST(GrowTree, FullyGrownInterpolates) {
  const Dataset d = noisy(200, 3, 4);
  RandomStream rng(2);
  const auto rows = iota_rows(200);
  const GrownTree tree = grow_tree(d, rows, 200, 2, rng);
  EXPECT_EQ(tree.leaf_count(), 200u);
  for (std::size_t id = 0; id < tree.nodes().size(); ++id)
    if (tree.node(id).is_leaf()) EXPECT_EQ(tree.node(id).count(), 1u);
  for (std::size_t i = 0; i < d.size(); ++i) EXPECT_EQ(tree.predict(d.row(i)), d.response(i));
}

TEST(GrowTree, ConstantResponsesPredictConstant) {
  const std::vector<double> x{0.1, 0.5, 0.9, 0.3, 0.7};
  const Dataset d(1, x, std::vector<double>(5, 2.5));
  RandomStream rng(3);
  const GrownTree tree = grow_tree(d, iota_rows(5), 4, 1, rng);
  for (double q = 0.0; q <= 1.0; q += 0.05) EXPECT_EQ(tree.predict(std::vector<double>{q}), 2.5);
}

TEST(GrowTree, OneDimensionalDirections) {
  const Dataset d = noisy(30, 1, 5);
  RandomStream rng(4);
  const GrownTree tree = grow_tree(d, iota_rows(30), 5, 1, rng);
  EXPECT_EQ(tree.cut_directions(std::vector<double>{0.42}, 1), (std::vector<std::size_t>{0}));
}

TEST(GrowTree, CutDirectionsFollowPath) {
  const Dataset d = noisy(60, 3, 6);
  RandomStream rng(5);
  const GrownTree tree = grow_tree(d, iota_rows(60), 3, 3, rng);
  const std::vector<double> x{0.2, 0.8, 0.5};
  const auto cuts = tree.path_cuts(x);
  const auto dirs = tree.cut_directions(x, 3);
  ASSERT_EQ(dirs.size(), 3u);
  for (std::size_t q = 0; q < 3; ++q)
    EXPECT_EQ(dirs[q], q < cuts.size() ? cuts[q].direction : kInfiniteDirection);
  EXPECT_LE(cuts.size(), 2u);
}

TEST(GrowTree, LeavesPartitionTheCube) {
  RandomStream meta(8);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t p = 1 + meta.below(3);
    const std::size_t n = 10 + meta.below(100);
    const Dataset d = noisy(n, p, 70 + trial);
    RandomStream rng(trial);
    const GrownTree tree = grow_tree(d, iota_rows(n), 1 + meta.below(n), 1 + meta.below(p), rng);
    double volume = 0.0;
    std::size_t points = 0;
    for (std::size_t id = 0; id < tree.nodes().size(); ++id) {
      if (!tree.node(id).is_leaf()) continue;
      volume += tree.volume(id);
      points += tree.node(id).count();
      EXPECT_GT(tree.node(id).count(), 0u);
    }
    EXPECT_NEAR(volume, 1.0, 1e-12);
    EXPECT_EQ(points, n);
    EXPECT_TRUE(audit_tree(tree, d).empty());
    // Every training point lands in the leaf that holds its row.
    for (std::size_t i = 0; i < n; ++i) {
      const auto leaf = tree.find_leaf(d.row(i));
      const auto rows = tree.node_rows(leaf);
      EXPECT_NE(std::find(rows.begin(), rows.end(), i), rows.end());
    }
  }
}

TEST(GrowTree, UpperFaceBelongsToACell) {
  const Dataset d = noisy(40, 2, 9);
  RandomStream rng(6);
  const GrownTree tree = grow_tree(d, iota_rows(40), 10, 2, rng);
  EXPECT_NO_THROW(tree.find_leaf(std::vector<double>{1.0, 1.0}));
  EXPECT_NO_THROW(tree.find_leaf(std::vector<double>{0.0, 1.0}));
  EXPECT_THROW(tree.find_leaf(std::vector<double>{1.01, 0.5}), DomainError);
  EXPECT_THROW(tree.find_leaf(std::vector<double>{0.5}), DomainError);
}

TEST(GrowTree, DeterministicForEqualStreams) {
  const Dataset d = noisy(120, 3, 10);
  RandomStream a(77), b(77);
  EXPECT_EQ(grow_tree(d, iota_rows(120), 40, 1, a), grow_tree(d, iota_rows(120), 40, 1, b));
}

TEST(GrowTree, DuplicatedRowsTerminate) {
  // Three distinct locations, many copies: at most three leaves are possible.
  std::vector<double> x, y;
  for (int i = 0; i < 30; ++i) {
    x.push_back((i % 3) * 0.4);
    y.push_back(i);
  }
  const Dataset d(1, x, y);
  RandomStream rng(5);
  const GrownTree tree = grow_tree(d, iota_rows(30), 30, 1, rng);
  EXPECT_EQ(tree.leaf_count(), 3u);
  EXPECT_TRUE(audit_tree(tree, d).empty());
}

TEST(GrowTree, FrozenDirectionsWithMtryOne) {
  // Direction 1 is constant; with mtry = 1 half the draws find no cut and the
  // cell must be retried on a later level rather than stalling.
  std::vector<double> x, y;
  for (int i = 0; i < 16; ++i) {
    x.push_back((i + 0.5) / 16.0);
    x.push_back(0.5);
    y.push_back(i * i);
  }
  const Dataset d(2, x, y);
  RandomStream a(3), b(3);
  const GrownTree tree = grow_tree(d, iota_rows(16), 16, 1, a);
  EXPECT_EQ(tree.leaf_count(), 16u);
  EXPECT_EQ(testing::compare_with_replay(tree, testing::replay_algorithm1(d, iota_rows(16), 16, 1, b)), "");
}

TEST(GrowTree, RejectsBadArguments) {
  const Dataset d = noisy(10, 2, 11);
  RandomStream rng(1);
  EXPECT_THROW(grow_tree(d, {}, 1, 1, rng), ConfigError);
  EXPECT_THROW(grow_tree(d, iota_rows(10), 0, 1, rng), ConfigError);
  EXPECT_THROW(grow_tree(d, iota_rows(10), 11, 1, rng), ConfigError);
  EXPECT_THROW(grow_tree(d, iota_rows(10), 2, 3, rng), ConfigError);
  EXPECT_THROW(grow_tree(d, std::vector<std::size_t>{1, 1}, 1, 1, rng), ConfigError);
  EXPECT_THROW(grow_tree(d, std::vector<std::size_t>{3, 10}, 1, 1, rng), ConfigError);
}

TEST(GrownTree, RebuildFromPartsValidates) {
  const Dataset d = noisy(30, 2, 12);
  RandomStream rng(2);
  const GrownTree tree = grow_tree(d, iota_rows(30), 7, 2, rng);
  const std::vector<std::size_t> rows(tree.rows().begin(), tree.rows().end());
  const std::vector<std::size_t> sub(tree.subsample().begin(), tree.subsample().end());
  const GrownTree copy(2, tree.nodes(), rows, sub);
  EXPECT_EQ(copy, tree);
  auto broken = tree.nodes();
  broken[0].left = 99;
  EXPECT_THROW(GrownTree(2, broken, rows, sub), ValidationError);
}

}  // namespace
}  // namespace cartforest
