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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cartforest/model.hpp"

namespace cartforest {

struct Provenance {
  double sigma = 0.0;
  std::uint64_t seed = 0;
  bool operator==(const Provenance&) const = default;
};

/// Immutable n x p table of features in [0,1] plus one finite response per row.
/// Features are stored row-major.
class Dataset {
 public:
  Dataset(std::size_t p, std::vector<double> features, std::vector<double> responses,
          std::optional<Provenance> provenance = std::nullopt);

  std::size_t size() const { return responses_.size(); }
  std::size_t dimension() const { return p_; }
  std::span<const double> row(std::size_t i) const { return {features_.data() + i * p_, p_}; }
  double feature(std::size_t i, std::size_t j) const { return features_[i * p_ + j]; }
  double response(std::size_t i) const { return responses_[i]; }
  std::span<const double> responses() const { return responses_; }
  std::span<const double> features() const { return features_; }
  const std::optional<Provenance>& provenance() const { return provenance_; }

  bool operator==(const Dataset&) const = default;

 private:
  std::size_t p_;
  std::vector<double> features_;
  std::vector<double> responses_;
  std::optional<Provenance> provenance_;
};

// Stream ids under the sampling seed. Features and noise use disjoint streams
// so that changing sigma leaves X untouched.
inline constexpr std::uint64_t kFeatureStream = 1;
inline constexpr std::uint64_t kNoiseStream = 2;

/// Draws n rows: X uniform on [0,1]^p (row-major from the feature stream),
/// Y = m(X) + sigma * Z with Z from the noise stream by inverse transform.
Dataset sample_dataset(const AdditiveModel& model, std::size_t n, std::uint64_t seed);

// Uniform query points, row-major n x p.
std::vector<double> sample_uniform_points(std::size_t n, std::size_t p, std::uint64_t seed);

// Delimited text: first line "n,p,sigma,seed" (sigma/seed may be "na"),
// then n rows "x1,...,xp,y" with 17 significant digits.
std::string dataset_to_text(const Dataset& dataset);
Dataset dataset_from_text(const std::string& text);
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace cartforest
