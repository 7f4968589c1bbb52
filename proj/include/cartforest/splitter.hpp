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

// Empirical CART split criterion for regression.
//
// For a cell A holding N points and a cut (j, z), the criterion is
//
//   L(j, z) = 1/N sum_{i in A} (Y_i - mean_A)^2
//           - 1/N sum_{i in A} (Y_i - mean_L 1[X_ij < z] - mean_R 1[X_ij >= z])^2
//
// with the convention 0/0 = 0 for the mean of an empty side. Directions are
// 0-based throughout the library.

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "cartforest/dataset.hpp"
#include "cartforest/random.hpp"

namespace cartforest {

struct Cut {
  std::size_t direction = 0;
  double position = 0.0;
  bool operator==(const Cut&) const = default;
};

struct SplitEvaluation {
  Cut cut;
  double criterion = 0.0;
  std::size_t left_count = 0;
  std::size_t right_count = 0;
};

// Non-owning row-major point table. Unlike Dataset it does not validate, so
// callers can hand the splitter arbitrary values.
struct PointsView {
  std::span<const double> features;
  std::span<const double> responses;
  std::size_t p = 0;

  PointsView(std::span<const double> features_in, std::span<const double> responses_in, std::size_t p_in)
      : features(features_in), responses(responses_in), p(p_in) {}
  PointsView(const Dataset& dataset)  // NOLINT(google-explicit-constructor)
      : features(dataset.features()), responses(dataset.responses()), p(dataset.dimension()) {}

  double x(std::size_t row, std::size_t direction) const { return features[row * p + direction]; }
  double y(std::size_t row) const { return responses[row]; }
};

/// Criterion of one cut over the points `rows` of `points`, by two passes
/// (means, then centred sums of squares). Rounding can push the difference of
/// two equal sums below zero; the result is clamped at 0.
/// Throws DomainError on an empty cell, a bad direction or a non-finite response.
SplitEvaluation evaluate_cut(const PointsView& points, std::span<const std::size_t> rows, Cut cut);

// Reusable buffers for best_cut.
struct SplitScratch {
  std::vector<std::pair<double, double>> sorted;  // (coordinate, centred response)
};

/// Best cut over `directions` (each in [0, p)). Positions are midpoints of
/// consecutive distinct sorted coordinates; equal coordinates admit no cut.
/// The scan maximises  (S_L^2 / n_L + S_R^2 / n_R) / N  over prefix sums S of
/// centred responses, which equals the criterion above. Exact ties keep the
/// smallest direction, then the smallest position. The returned evaluation is
/// recomputed with evaluate_cut. Absent when no direction admits a cut.
std::optional<SplitEvaluation> best_cut(const PointsView& points, std::span<const std::size_t> rows,
                                        std::span<const std::size_t> directions, SplitScratch* scratch = nullptr);

// True when some direction in [0, p) holds two distinct coordinates.
bool is_splittable(const PointsView& points, std::span<const std::size_t> rows);

/// Uniform `mtry`-subset of {0..p-1} by partial Fisher-Yates, returned sorted.
/// Throws ConfigError unless 1 <= mtry <= p.
std::vector<std::size_t> draw_mtry(std::size_t p, std::size_t mtry, RandomStream& rng);

}  // namespace cartforest
