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
#include <span>
#include <vector>

namespace cartforest {

// Axis-aligned box  prod_j [lower_j, upper_j)  inside [0,1]^p.
struct Cell {
  std::vector<double> lower;
  std::vector<double> upper;

  static Cell unit(std::size_t p) { return {std::vector<double>(p, 0.0), std::vector<double>(p, 1.0)}; }
  static Cell from_bounds(std::span<const double> lo, std::span<const double> hi) {
    return {std::vector<double>(lo.begin(), lo.end()), std::vector<double>(hi.begin(), hi.end())};
  }

  std::size_t dimension() const { return lower.size(); }
  double volume() const {
    double v = 1.0;
    for (std::size_t j = 0; j < lower.size(); ++j) v *= upper[j] - lower[j];
    return v;
  }
  bool has_positive_volume() const {
    if (lower.size() != upper.size() || lower.empty()) return false;
    for (std::size_t j = 0; j < lower.size(); ++j)
      if (!(upper[j] > lower[j])) return false;
    return true;
  }
  bool operator==(const Cell&) const = default;
};

}  // namespace cartforest
