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
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "cartforest/dataset.hpp"
#include "cartforest/tree.hpp"
#include "json.hpp"

namespace cartforest {

struct ForestParams {
  std::size_t trees = 1;    // M
  std::size_t mtry = 1;
  std::size_t subsample = 1;  // a_n
  std::size_t leaves = 1;     // t_n
  std::uint64_t master_seed = 0;

  // Throws ConfigError naming the first violated range for n rows and p features.
  void validate(std::size_t n, std::size_t p) const;
  bool operator==(const ForestParams&) const = default;
};

struct ConnectionWeights {
  // weights[i]: average over trees of 1{row i shares x's leaf} / |leaf|.
  std::vector<double> weights;
  // Size of the leaf holding x, per tree.
  std::vector<std::size_t> leaf_sizes;
};

/// M trees, tree j grown on its own without-replacement subsample.
///
/// Tree j draws everything from RandomStream(derive_key(master_seed, {j})):
/// first a_n distinct rows by partial Fisher-Yates over 0..n-1 (stored sorted),
/// then the mtry draws of its growth. Forests are therefore identical for any
/// thread count and tree j does not depend on M.
class Forest {
 public:
  Forest(ForestParams params, std::size_t p, std::size_t n_train, std::vector<GrownTree> trees);

  const ForestParams& params() const { return params_; }
  std::size_t dimension() const { return p_; }
  std::size_t training_size() const { return n_train_; }
  const std::vector<GrownTree>& trees() const { return trees_; }

  // Arithmetic mean of the tree predictions. Throws DomainError outside [0,1]^p.
  double predict(std::span<const double> x) const;
  ConnectionWeights connection_weights(std::span<const double> x) const;

  nlohmann::json to_json() const;
  static Forest from_json(const nlohmann::json& doc);
  void save(const std::filesystem::path& path) const;
  static Forest load(const std::filesystem::path& path);

  bool operator==(const Forest&) const = default;

 private:
  ForestParams params_;
  std::size_t p_;
  std::size_t n_train_;
  std::vector<GrownTree> trees_;
};

// a_n distinct indices of {0..n-1}, sorted.
std::vector<std::size_t> draw_subsample(std::size_t n, std::size_t a_n, RandomStream& rng);

Forest fit_forest(const Dataset& dataset, const ForestParams& params, std::size_t threads = 1);

inline constexpr int kForestFormatVersion = 1;

}  // namespace cartforest
