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

#include "cartforest/splitter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cartforest/errors.hpp"

namespace cartforest {

SplitEvaluation evaluate_cut(const PointsView& points, std::span<const std::size_t> rows, Cut cut) {
  if (rows.empty()) throw DomainError("evaluate_cut: empty cell");
  if (cut.direction >= points.p) throw DomainError("evaluate_cut: direction out of range");

  double sum = 0.0;
  double sum_left = 0.0;
  double sum_right = 0.0;
  std::size_t left = 0;
  for (std::size_t row : rows) {
    const double y = points.y(row);
    if (!std::isfinite(y)) throw DomainError("evaluate_cut: non-finite response");
    sum += y;
    if (points.x(row, cut.direction) < cut.position) {
      sum_left += y;
      ++left;
    } else {
      sum_right += y;
    }
  }
  const std::size_t n = rows.size();
  const std::size_t right = n - left;
  const double mean = sum / static_cast<double>(n);
  const double mean_left = left > 0 ? sum_left / static_cast<double>(left) : 0.0;
  const double mean_right = right > 0 ? sum_right / static_cast<double>(right) : 0.0;

  double parent_ss = 0.0;
  double child_ss = 0.0;
  for (std::size_t row : rows) {
    const double y = points.y(row);
    parent_ss += (y - mean) * (y - mean);
    const double fitted = points.x(row, cut.direction) < cut.position ? mean_left : mean_right;
    child_ss += (y - fitted) * (y - fitted);
  }
  const double criterion = std::max(0.0, (parent_ss - child_ss) / static_cast<double>(n));
  return {cut, criterion, left, right};
}

std::optional<SplitEvaluation> best_cut(const PointsView& points, std::span<const std::size_t> rows,
                                        std::span<const std::size_t> directions, SplitScratch* scratch) {
  if (rows.empty()) throw DomainError("best_cut: empty cell");
  if (rows.size() < 2) return std::nullopt;

  SplitScratch local;
  auto& sorted = (scratch != nullptr ? scratch : &local)->sorted;

  double sum = 0.0;
  for (std::size_t row : rows) {
    const double y = points.y(row);
    if (!std::isfinite(y)) throw DomainError("best_cut: non-finite response");
    sum += y;
  }
  const std::size_t n = rows.size();
  const double mean = sum / static_cast<double>(n);
  double spread = 0.0;
  for (std::size_t row : rows) spread += (points.y(row) - mean) * (points.y(row) - mean);
  // Scan values within this band of the incumbent are settled by evaluate_cut,
  // whose summation order does not depend on the direction. Two directions that
  // induce the same partition then tie exactly and the earlier one is kept.
  const double band = 64.0 * std::numeric_limits<double>::epsilon() * spread / static_cast<double>(n);

  std::vector<std::size_t> ordered(directions.begin(), directions.end());
  std::sort(ordered.begin(), ordered.end());

  bool found = false;
  double best_value = 0.0;
  double best_exact = -1.0;  // evaluate_cut value of `best`; negative until needed
  Cut best{};
  for (std::size_t direction : ordered) {
    if (direction >= points.p) throw DomainError("best_cut: direction out of range");
    sorted.clear();
    for (std::size_t row : rows) sorted.emplace_back(points.x(row, direction), points.y(row) - mean);
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    if (!(sorted.front().first < sorted.back().first)) continue;

    double total = 0.0;
    for (const auto& entry : sorted) total += entry.second;
    double prefix = 0.0;
    for (std::size_t k = 0; k + 1 < n; ++k) {
      prefix += sorted[k].second;
      const double lo = sorted[k].first;
      const double hi = sorted[k + 1].first;
      if (!(lo < hi)) continue;
      const auto n_left = static_cast<double>(k + 1);
      const auto n_right = static_cast<double>(n - k - 1);
      const double suffix = total - prefix;
      const double value = (prefix * prefix / n_left + suffix * suffix / n_right) / static_cast<double>(n);
      if (found && value <= best_value - band) continue;
      double position = 0.5 * (lo + hi);
      // Adjacent doubles: the midpoint rounds onto an endpoint. `hi` still
      // separates the same two groups under the x < z rule.
      if (!(position > lo)) position = hi;
      const Cut candidate{direction, position};
      if (found && value <= best_value + band) {
        if (best_exact < 0.0) best_exact = evaluate_cut(points, rows, best).criterion;
        const double exact = evaluate_cut(points, rows, candidate).criterion;
        if (!(exact > best_exact)) continue;
        best_exact = exact;
      } else {
        best_exact = -1.0;
      }
      found = true;
      best_value = std::max(best_value, value);
      best = candidate;
    }
  }
  if (!found) return std::nullopt;
  return evaluate_cut(points, rows, best);
}

bool is_splittable(const PointsView& points, std::span<const std::size_t> rows) {
  if (rows.size() < 2) return false;
  const std::size_t first = rows.front();
  for (std::size_t j = 0; j < points.p; ++j) {
    const double x0 = points.x(first, j);
    for (std::size_t row : rows)
      if (points.x(row, j) != x0) return true;
  }
  return false;
}

std::vector<std::size_t> draw_mtry(std::size_t p, std::size_t mtry, RandomStream& rng) {
  if (mtry < 1 || mtry > p)
    throw ConfigError("mtry must lie in {1.." + std::to_string(p) + "}, got " + std::to_string(mtry));
  std::vector<std::size_t> pool(p);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t i = 0; i < mtry; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(p - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(mtry);
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace cartforest
