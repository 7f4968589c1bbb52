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

#include "cartforest/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <tuple>

#include "cartforest/errors.hpp"
#include "cartforest/quadrature.hpp"

namespace cartforest {

namespace {

constexpr double kInvPhi = 0.6180339887498948482;
constexpr std::size_t kMaxTheoreticalNodes = 1u << 20;

template <typename F>
double golden_argmax(F&& f, double a, double b, double tolerance) {
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tolerance) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

void require_cell(const Cell& cell, std::size_t p, const char* who) {
  if (cell.dimension() != p) throw DomainError(std::string(who) + ": cell dimension differs from the model's p");
  if (!cell.has_positive_volume()) throw DomainError(std::string(who) + ": cell has zero volume");
}

// Numeric range: dense grid, then golden refinement around the best points.
std::pair<double, double> grid_range(const Component& c, double a, double b, const OracleOptions& options) {
  const std::size_t g = std::max<std::size_t>(options.extrema_grid, 2);
  const double step = (b - a) / static_cast<double>(g - 1);
  std::size_t i_min = 0;
  std::size_t i_max = 0;
  double v_min = c.value(a);
  double v_max = v_min;
  for (std::size_t i = 1; i < g; ++i) {
    const double v = c.value(i + 1 == g ? b : a + step * static_cast<double>(i));
    if (v < v_min) v_min = v, i_min = i;
    if (v > v_max) v_max = v, i_max = i;
  }
  auto refine = [&](std::size_t i, double sign) {
    const double lo = std::max(a, a + step * (static_cast<double>(i) - 1.0));
    const double hi = std::min(b, a + step * (static_cast<double>(i) + 1.0));
    const double z = golden_argmax([&](double x) { return sign * c.value(x); }, lo, hi, 1e-12);
    return c.value(z);
  };
  return {std::min(v_min, refine(i_min, -1.0)), std::max(v_max, refine(i_max, 1.0))};
}

}  // namespace

double component_mean(const Component& component, double a, double b, const OracleOptions& options) {
  const double integral = options.numeric
                              ? adaptive_simpson([&](double x) { return component.value(x); }, a, b,
                                                 options.quadrature_tolerance)
                              : component.integral(a, b);
  return integral / (b - a);
}

double theoretical_criterion(const AdditiveModel& model, const Cell& cell, Cut cut, const OracleOptions& options) {
  require_cell(cell, model.dimension(), "theoretical_criterion");
  if (cut.direction >= model.dimension()) throw DomainError("theoretical_criterion: direction out of range");
  const double lo = cell.lower[cut.direction];
  const double hi = cell.upper[cut.direction];
  const double z = cut.position;
  if (!(z > lo && z < hi)) throw DomainError("theoretical_criterion: cut must lie strictly inside the cell");

  const Component& m = model.component(cut.direction);
  if (m.is_constant()) return 0.0;
  const double p_left = (z - lo) / (hi - lo);
  const double p_right = (hi - z) / (hi - lo);
  const double mean = component_mean(m, lo, hi, options);
  const double mean_left = component_mean(m, lo, z, options);
  const double mean_right = component_mean(m, z, hi, options);
  return p_left * (mean_left - mean) * (mean_left - mean) + p_right * (mean_right - mean) * (mean_right - mean);
}

TheoreticalSplit best_theoretical_cut(const AdditiveModel& model, const Cell& cell,
                                      std::span<const std::size_t> directions, const OracleOptions& options) {
  require_cell(cell, model.dimension(), "best_theoretical_cut");
  if (directions.empty()) throw ConfigError("best_theoretical_cut: no candidate directions");
  std::vector<std::size_t> ordered(directions.begin(), directions.end());
  std::sort(ordered.begin(), ordered.end());
  ordered.erase(std::unique(ordered.begin(), ordered.end()), ordered.end());

  struct Candidate {
    Cut cut;
    double value;
  };
  std::vector<Candidate> candidates;
  const std::size_t g = std::max<std::size_t>(options.search_grid, 4);
  for (std::size_t j : ordered) {
    if (j >= model.dimension()) throw DomainError("best_theoretical_cut: direction out of range");
    if (model.component(j).is_constant()) continue;
    const double lo = cell.lower[j];
    const double hi = cell.upper[j];
    auto f = [&](double z) { return theoretical_criterion(model, cell, {j, z}, options); };
    const double step = (hi - lo) / static_cast<double>(g);
    std::vector<double> values(g + 1, 0.0);
    for (std::size_t i = 1; i < g; ++i) values[i] = f(lo + step * static_cast<double>(i));
    for (std::size_t i = 1; i < g; ++i) {
      if (!(values[i] >= values[i - 1] && values[i] > values[i + 1])) continue;
      if (values[i] <= options.flat_tolerance) continue;
      const double a = lo + step * static_cast<double>(i - 1);
      const double b = lo + step * static_cast<double>(i + 1);
      double z = golden_argmax(f, std::max(a, std::nextafter(lo, hi)), std::min(b, std::nextafter(hi, lo)),
                               options.position_tolerance);
      double v = f(z);
      if (values[i] > v) {
        z = lo + step * static_cast<double>(i);
        v = values[i];
      }
      candidates.push_back({{j, z}, v});
    }
  }

  TheoreticalSplit out;
  double best = 0.0;
  for (const auto& c : candidates) best = std::max(best, c.value);
  if (candidates.empty() || best <= options.flat_tolerance) {
    const std::size_t j = ordered.front();
    out.cut = {j, 0.5 * (cell.lower[j] + cell.upper[j])};
    out.value = 0.0;
    out.optimal_cuts = {out.cut};
    out.degenerate = true;
    return out;
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    return std::tie(a.cut.direction, a.cut.position) < std::tie(b.cut.direction, b.cut.position);
  });
  bool primary_set = false;
  for (const auto& c : candidates) {
    if (c.value < best - options.optimum_tolerance) continue;
    // Neighbouring grid maxima on a flat top converge to the same point.
    if (!out.optimal_cuts.empty() && out.optimal_cuts.back().direction == c.cut.direction &&
        std::fabs(out.optimal_cuts.back().position - c.cut.position) <= 10.0 * options.position_tolerance)
      continue;
    out.optimal_cuts.push_back(c.cut);
    if (!primary_set && c.value == best) {
      out.cut = c.cut;
      out.value = c.value;
      primary_set = true;
    }
  }
  if (!primary_set) {
    // The maximiser was folded into a neighbour; fall back to the first optimum.
    out.cut = out.optimal_cuts.front();
    out.value = theoretical_criterion(model, cell, out.cut, options);
  }
  return out;
}

TheoreticalTree::TheoreticalTree(const AdditiveModel& model, std::size_t k, const OracleOptions& options) : k_(k) {
  if (k < 1) throw ConfigError("theoretical_tree: k must be at least 1");
  const std::size_t p = model.dimension();
  std::vector<std::size_t> all(p);
  std::iota(all.begin(), all.end(), std::size_t{0});
  nodes_.push_back({Cell::unit(p), 0, false, {}});
  for (std::size_t id = 0; id < nodes_.size(); ++id) {
    if (nodes_[id].depth >= k_) continue;
    const Cell cell = nodes_[id].cell;
    const std::size_t depth = nodes_[id].depth;
    const auto split = best_theoretical_cut(model, cell, all, options);
    nodes_[id].degenerate = split.degenerate;
    for (const Cut& cut : split.optimal_cuts) {
      Cell left = cell;
      Cell right = cell;
      left.upper[cut.direction] = cut.position;
      right.lower[cut.direction] = cut.position;
      const std::size_t left_id = nodes_.size();
      nodes_.push_back({std::move(left), depth + 1, false, {}});
      nodes_.push_back({std::move(right), depth + 1, false, {}});
      nodes_[id].branches.push_back({cut, left_id, left_id + 1});
    }
    if (nodes_.size() > kMaxTheoreticalNodes) throw ConfigError("theoretical_tree: too many optimal branches");
  }
}

bool TheoreticalTree::any_degenerate() const {
  return std::any_of(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.degenerate; });
}

bool TheoreticalTree::all_degenerate() const {
  return std::all_of(nodes_.begin(), nodes_.end(),
                     [&](const Node& n) { return n.depth >= k_ || n.degenerate; });
}

void TheoreticalTree::collect(std::size_t id, std::span<const double> x, CutSequence& prefix,
                              std::vector<CutSequence>& out) const {
  const Node& node = nodes_[id];
  if (node.branches.empty()) {
    out.push_back(prefix);
    return;
  }
  for (const Branch& b : node.branches) {
    prefix.push_back(b.cut);
    collect(x[b.cut.direction] < b.cut.position ? b.left : b.right, x, prefix, out);
    prefix.pop_back();
  }
}

std::vector<CutSequence> TheoreticalTree::optimal_sequences(std::span<const double> x) const {
  if (x.size() != nodes_[0].cell.dimension()) throw DomainError("theoretical_tree: query dimension mismatch");
  std::vector<CutSequence> out;
  CutSequence prefix;
  collect(0, x, prefix, out);
  return out;
}

CutSequence TheoreticalTree::primary_sequence(std::span<const double> x) const {
  if (x.size() != nodes_[0].cell.dimension()) throw DomainError("theoretical_tree: query dimension mismatch");
  CutSequence seq;
  std::size_t id = 0;
  while (!nodes_[id].branches.empty()) {
    const Branch& b = nodes_[id].branches.front();
    seq.push_back(b.cut);
    id = x[b.cut.direction] < b.cut.position ? b.left : b.right;
  }
  return seq;
}

double cut_distance(const CutSequence& empirical, std::span<const CutSequence> theoretical) {
  if (theoretical.empty()) throw DomainError("cut_distance: empty theoretical set");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& seq : theoretical) {
    if (seq.size() != empirical.size()) throw DomainError("cut_distance: sequence lengths differ");
    double sup = 0.0;
    for (std::size_t q = 0; q < seq.size(); ++q) {
      const double d_dir =
          std::fabs(static_cast<double>(empirical[q].direction) - static_cast<double>(seq[q].direction));
      const double d_pos = std::fabs(empirical[q].position - seq[q].position);
      sup = std::max(sup, std::max(d_dir, d_pos));
    }
    best = std::min(best, sup);
  }
  return best;
}

double cell_variation(const AdditiveModel& model, const Cell& cell, const OracleOptions& options) {
  require_cell(cell, model.dimension(), "cell_variation");
  double total = 0.0;
  for (std::size_t j = 0; j < model.dimension(); ++j) {
    const Component& c = model.component(j);
    if (c.is_constant()) continue;
    const auto [lo, hi] = options.numeric ? grid_range(c, cell.lower[j], cell.upper[j], options)
                                          : c.range(cell.lower[j], cell.upper[j]);
    total += hi - lo;
  }
  return total;
}

}  // namespace cartforest
