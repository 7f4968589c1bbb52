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

// Population-level counterparts of the empirical splitter for additive
// models with uniform inputs.
//
// With X uniform on a cell A and m additive, only component j moves when A
// is cut along j, and every other component (and the noise) contributes the
// same variance to the parent and both children. The theoretical criterion
//
//   L*(j, z) = V[Y | A] - P_L V[Y | A_L] - P_R V[Y | A_R]
//
// therefore reduces to the between-child variance of m_j on [l_j, u_j):
//
//   L*(j, z) = P_L (mu_L - mu)^2 + P_R (mu_R - mu)^2,
//
// with mu, mu_L, mu_R the means of m_j over [l, u), [l, z), [z, u) and
// P_L = (z - l) / (u - l). Interval means come from closed forms, or from
// adaptive Simpson quadrature when OracleOptions::numeric is set.

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cartforest/cell.hpp"
#include "cartforest/model.hpp"
#include "cartforest/splitter.hpp"

namespace cartforest {

using CutSequence = std::vector<Cut>;

struct OracleOptions {
  // Quadrature for integrals and a dense grid for extrema instead of closed forms.
  bool numeric = false;
  double quadrature_tolerance = 1e-10;
  std::size_t extrema_grid = 10000;
  // Bracketing grid per direction for the theoretical argmax.
  std::size_t search_grid = 2000;
  double position_tolerance = 1e-8;
  // Local maxima within this of the global maximum count as optimal.
  double optimum_tolerance = 1e-8;
  // Below this the criterion is treated as identically zero.
  double flat_tolerance = 1e-14;
};

/// Throws DomainError for a zero-volume cell, a bad direction, or a cut not
/// strictly inside the cell.
double theoretical_criterion(const AdditiveModel& model, const Cell& cell, Cut cut,
                             const OracleOptions& options = {});

struct TheoreticalSplit {
  Cut cut;                        // the maximiser, ties to smallest direction then position
  double value = 0.0;             // L* at `cut`
  std::vector<Cut> optimal_cuts;  // every local maximum within optimum_tolerance, sorted
  bool degenerate = false;        // L* vanishes on every candidate direction
};

/// Maximises L* over `directions` by grid bracketing plus golden-section
/// refinement. A degenerate cell yields the smallest direction at the cell
/// midpoint with `degenerate` set.
TheoreticalSplit best_theoretical_cut(const AdditiveModel& model, const Cell& cell,
                                      std::span<const std::size_t> directions, const OracleOptions& options = {});

/// Population tree stopped at level k, mtry = p. A node with several optimal
/// cuts branches once per optimum, so the tree encodes every optimal k-tuple.
class TheoreticalTree {
 public:
  struct Branch {
    Cut cut;
    std::size_t left = 0;
    std::size_t right = 0;
  };
  struct Node {
    Cell cell;
    std::size_t depth = 0;
    bool degenerate = false;
    std::vector<Branch> branches;  // empty at depth k
  };

  TheoreticalTree(const AdditiveModel& model, std::size_t k, const OracleOptions& options = {});

  std::size_t depth() const { return k_; }
  const std::vector<Node>& nodes() const { return nodes_; }
  // True when some split node was degenerate.
  bool any_degenerate() const;
  // True when every split node was degenerate.
  bool all_degenerate() const;
  // Every optimal k-tuple of cuts leading to x.
  std::vector<CutSequence> optimal_sequences(std::span<const double> x) const;
  // The tie-broken k-tuple leading to x (first branch at each node).
  CutSequence primary_sequence(std::span<const double> x) const;

 private:
  void collect(std::size_t id, std::span<const double> x, CutSequence& prefix, std::vector<CutSequence>& out) const;

  std::size_t k_;
  std::vector<Node> nodes_;
};

/// inf over `theoretical` of  max_q max(|dir_q - dir'_q|, |pos_q - pos'_q|).
/// Throws DomainError on a length mismatch or an empty set.
double cut_distance(const CutSequence& empirical, std::span<const CutSequence> theoretical);

/// sup - inf of m over the cell, i.e. the sum of per-component ranges.
double cell_variation(const AdditiveModel& model, const Cell& cell, const OracleOptions& options = {});

// Mean of component over [a, b] (closed form or quadrature per options).
double component_mean(const Component& component, double a, double b, const OracleOptions& options = {});

}  // namespace cartforest
