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

#include "cartforest/forest.hpp"

#include <algorithm>
#include <numeric>

#include "cartforest/errors.hpp"
#include "cartforest/io.hpp"
#include "cartforest/parallel.hpp"

namespace cartforest {

void ForestParams::validate(std::size_t n, std::size_t p) const {
  if (trees < 1) throw ConfigError("forest: M (trees) must be at least 1");
  if (mtry < 1 || mtry > p)
    throw ConfigError("forest: mtry must lie in {1.." + std::to_string(p) + "}, got " + std::to_string(mtry));
  if (subsample < 1 || subsample > n)
    throw ConfigError("forest: a_n must lie in {1.." + std::to_string(n) + "}, got " + std::to_string(subsample));
  if (leaves < 1 || leaves > subsample)
    throw ConfigError("forest: t_n must lie in {1.." + std::to_string(subsample) + "}, got " + std::to_string(leaves));
}

std::vector<std::size_t> draw_subsample(std::size_t n, std::size_t a_n, RandomStream& rng) {
  if (a_n < 1 || a_n > n) throw ConfigError("subsample: a_n must lie in {1.." + std::to_string(n) + "}");
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t i = 0; i < a_n; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(a_n);
  std::sort(pool.begin(), pool.end());
  return pool;
}

Forest::Forest(ForestParams params, std::size_t p, std::size_t n_train, std::vector<GrownTree> trees)
    : params_(params), p_(p), n_train_(n_train), trees_(std::move(trees)) {
  if (trees_.size() != params_.trees) throw ValidationError("forest: tree count differs from M");
  for (const auto& tree : trees_) {
    if (tree.dimension() != p_) throw ValidationError("forest: tree dimension differs from p");
    if (tree.subsample().size() != params_.subsample) throw ValidationError("forest: subsample size differs from a_n");
    for (std::size_t row : tree.subsample())
      if (row >= n_train_) throw ValidationError("forest: subsample index beyond training size");
  }
}

double Forest::predict(std::span<const double> x) const {
  double sum = 0.0;
  for (const auto& tree : trees_) sum += tree.predict(x);
  return sum / static_cast<double>(trees_.size());
}

ConnectionWeights Forest::connection_weights(std::span<const double> x) const {
  std::vector<long double> accum(n_train_, 0.0L);
  ConnectionWeights out;
  out.leaf_sizes.reserve(trees_.size());
  for (const auto& tree : trees_) {
    const auto rows = tree.node_rows(tree.find_leaf(x));
    out.leaf_sizes.push_back(rows.size());
    if (rows.empty()) continue;
    const long double share = 1.0L / static_cast<long double>(rows.size());
    for (std::size_t row : rows) accum[row] += share;
  }
  out.weights.resize(n_train_);
  const auto m = static_cast<long double>(trees_.size());
  for (std::size_t i = 0; i < n_train_; ++i) out.weights[i] = static_cast<double>(accum[i] / m);
  return out;
}

Forest fit_forest(const Dataset& dataset, const ForestParams& params, std::size_t threads) {
  params.validate(dataset.size(), dataset.dimension());
  std::vector<GrownTree> trees(params.trees);
  const PointsView points(dataset);
  parallel_for(params.trees, threads, [&](std::size_t j) {
    RandomStream rng(derive_key(params.master_seed, {static_cast<std::uint64_t>(j)}));
    const auto subsample = draw_subsample(dataset.size(), params.subsample, rng);
    trees[j] = grow_tree(points, subsample, params.leaves, params.mtry, rng);
  });
  return Forest(params, dataset.dimension(), dataset.size(), std::move(trees));
}

nlohmann::json Forest::to_json() const {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& tree : trees_) {
    nlohmann::json nodes = nlohmann::json::array();
    nlohmann::json leaves = nlohmann::json::array();
    for (std::size_t id = 0; id < tree.nodes().size(); ++id) {
      const TreeNode& node = tree.node(id);
      nodes.push_back({node.left, node.right, node.is_leaf() ? 0 : node.cut.direction,
                       node.is_leaf() ? 0.0 : node.cut.position, node.depth, node.begin, node.end, node.mean});
      if (node.is_leaf()) {
        const auto lo = tree.lower(id);
        const auto hi = tree.upper(id);
        leaves.push_back({{"node", id},
                          {"lower", std::vector<double>(lo.begin(), lo.end())},
                          {"upper", std::vector<double>(hi.begin(), hi.end())}});
      }
    }
    trees.push_back({{"subsample", std::vector<std::size_t>(tree.subsample().begin(), tree.subsample().end())},
                     {"rows", std::vector<std::size_t>(tree.rows().begin(), tree.rows().end())},
                     {"nodes", std::move(nodes)},
                     {"leaves", std::move(leaves)}});
  }
  return {{"format", "cartforest.forest"},
          {"version", kForestFormatVersion},
          {"params",
           {{"M", params_.trees},
            {"mtry", params_.mtry},
            {"a_n", params_.subsample},
            {"t_n", params_.leaves},
            {"master_seed", params_.master_seed}}},
          {"p", p_},
          {"n_train", n_train_},
          {"trees", std::move(trees)}};
}

Forest Forest::from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("format") != "cartforest.forest") throw ValidationError("forest file: unknown format tag");
    if (doc.at("version").get<int>() != kForestFormatVersion)
      throw ValidationError("forest file: unsupported version " + doc.at("version").dump());
    ForestParams params;
    const auto& pj = doc.at("params");
    params.trees = pj.at("M").get<std::size_t>();
    params.mtry = pj.at("mtry").get<std::size_t>();
    params.subsample = pj.at("a_n").get<std::size_t>();
    params.leaves = pj.at("t_n").get<std::size_t>();
    params.master_seed = pj.at("master_seed").get<std::uint64_t>();
    const auto p = doc.at("p").get<std::size_t>();
    const auto n_train = doc.at("n_train").get<std::size_t>();
    params.validate(n_train, p);

    std::vector<GrownTree> trees;
    for (const auto& tj : doc.at("trees")) {
      std::vector<TreeNode> nodes;
      for (const auto& nj : tj.at("nodes")) {
        TreeNode node;
        node.left = nj.at(0).get<std::int32_t>();
        node.right = nj.at(1).get<std::int32_t>();
        node.cut = {nj.at(2).get<std::size_t>(), nj.at(3).get<double>()};
        node.depth = nj.at(4).get<std::uint32_t>();
        node.begin = nj.at(5).get<std::uint32_t>();
        node.end = nj.at(6).get<std::uint32_t>();
        node.mean = nj.at(7).get<double>();
        if (node.is_leaf()) node.cut = {};
        nodes.push_back(node);
      }
      GrownTree tree(p, std::move(nodes), tj.at("rows").get<std::vector<std::size_t>>(),
                     tj.at("subsample").get<std::vector<std::size_t>>());
      for (const auto& lj : tj.at("leaves")) {
        const auto id = lj.at("node").get<std::size_t>();
        if (id >= tree.nodes().size() || !tree.node(id).is_leaf())
          throw ValidationError("forest file: leaf bounds refer to a non-leaf node");
        const auto lo = lj.at("lower").get<std::vector<double>>();
        const auto hi = lj.at("upper").get<std::vector<double>>();
        if (!std::equal(lo.begin(), lo.end(), tree.lower(id).begin(), tree.lower(id).end()) ||
            !std::equal(hi.begin(), hi.end(), tree.upper(id).begin(), tree.upper(id).end()))
          throw ValidationError("forest file: stored leaf bounds disagree with the cuts");
      }
      trees.push_back(std::move(tree));
    }
    return Forest(params, p, n_train, std::move(trees));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("forest file: ") + e.what());
  }
}

void Forest::save(const std::filesystem::path& path) const { write_file_atomic(path, to_json().dump() + "\n"); }

Forest Forest::load(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("forest file not found: " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("forest file " + path.string() + ": " + e.what(), 0);
  }
  return from_json(doc);
}

}  // namespace cartforest
