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

// Monte Carlo drivers for the consistency, sparsity, cut-distance and
// cell-variation studies.
//
// Seeding: replicate r draws its training rows from
// sample_dataset(model, n, derive_key(seed, {kTrainTag, r})), so the samples
// for increasing n are nested prefixes of one stream. The forest seed and
// the query points of replicate r do not depend on n either. Comparisons
// across the n grid are therefore paired.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cartforest/model.hpp"
#include "json.hpp"

namespace cartforest {

enum class RegimeRule {
  kRegime1,   // a_n = n, t_n = ceil(a_n / (log a_n)^10)
  kRegime2,   // a_n = ceil(n / (log n)^2), t_n = a_n
  kExplicit,  // every n supplies (a_n, t_n)
};

struct ScheduleEntry {
  std::size_t n = 0;
  std::size_t subsample = 0;  // a_n
  std::size_t leaves = 0;     // t_n
  bool operator==(const ScheduleEntry&) const = default;
};

struct ScheduleCheck {
  bool ok = true;
  std::vector<std::string> violations;
  // Per grid point: t_n (log a_n)^9 / a_n for REGIME1, a_n log n / n for REGIME2.
  std::vector<double> condition_values;
};

struct RegimeSchedule {
  RegimeRule rule = RegimeRule::kRegime2;
  std::vector<std::size_t> n_grid;
  // Per-n replacements of the rule's (a_n, t_n).
  std::vector<ScheduleEntry> overrides;

  ScheduleEntry at(std::size_t n) const;
  std::vector<ScheduleEntry> entries() const;
  // Ranges plus the theorem-side condition, which must strictly decrease
  // along the grid.
  ScheduleCheck check() const;

  nlohmann::json to_json() const;
  static RegimeSchedule from_json(const nlohmann::json& spec);
};

std::string rule_name(RegimeRule rule);

struct MetricsRecord {
  std::string experiment;
  std::size_t n = 0;
  std::size_t subsample = 0;
  std::size_t leaves = 0;
  std::size_t trees = 0;
  std::size_t mtry = 0;
  std::optional<std::size_t> replicate;  // absent for the across-replicate aggregate
  std::string metric;
  double value = 0.0;
  double std_error = 0.0;
  std::size_t replicates = 1;
  double wall_seconds = 0.0;
};

// Append-only, serialized record store.
class MetricsSink {
 public:
  void append(MetricsRecord record);
  std::vector<MetricsRecord> records() const;

 private:
  mutable std::mutex mutex_;
  std::vector<MetricsRecord> records_;
};

struct ExperimentConfig {
  explicit ExperimentConfig(AdditiveModel m) : model(std::move(m)) {}

  AdditiveModel model;
  RegimeSchedule schedule;
  std::size_t trees = 100;
  std::size_t replicates = 1;
  std::size_t queries = 1000;
  std::optional<std::size_t> mtry;  // defaults to p
  std::size_t k = 1;
  std::vector<double> xi_grid{0.5};
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  bool validate_schedule = true;
  bool audit_trees = true;

  std::size_t effective_mtry() const { return mtry.value_or(model.dimension()); }
};

inline constexpr std::uint64_t kTrainTag = 0x7472;
inline constexpr std::uint64_t kForestTag = 0x666f;
inline constexpr std::uint64_t kQueryTag = 0x7179;

/// Squared error against the true m over fresh uniform points, per replicate
/// ("mse") and aggregated (mean, standard error across replicates).
std::vector<MetricsRecord> run_consistency(const ExperimentConfig& config);
/// Share of the first k cut directions on query paths that fall in {0..S-1};
/// per depth ("informative_fraction_q<q>") and pooled ("informative_fraction").
std::vector<MetricsRecord> run_sparsity(const ExperimentConfig& config);
/// d_inf between empirical first-k cuts and the optimal theoretical k-tuples
/// ("median_distance", "p90_distance", "excluded_paths").
std::vector<MetricsRecord> run_cut_distance(const ExperimentConfig& config);
/// Variation of m over the leaf holding each query ("median_delta",
/// "prob_delta_le_<xi>").
std::vector<MetricsRecord> run_cell_variation(const ExperimentConfig& config);

struct AggregatePoint {
  std::size_t n = 0;
  double value = 0.0;
  double std_error = 0.0;
};
// Across-replicate rows for `metric`, in grid order.
std::vector<AggregatePoint> aggregates(const std::vector<MetricsRecord>& records, const std::string& metric);

struct TrendCheck {
  bool pass = true;
  std::vector<std::string> details;
};
/// Each step must drop by more than se_multiplier * sqrt(se_a^2 + se_b^2).
TrendCheck check_strict_decrease(const std::vector<AggregatePoint>& points, double se_multiplier);
TrendCheck check_nondecreasing(const std::vector<AggregatePoint>& points);

// metrics.csv: experiment,n,a_n,t_n,M,mtry,replicate,metric,value,std_error,replicates
// Wall times are kept out so that reruns are byte-identical.
std::string metrics_to_csv(const std::vector<MetricsRecord>& records);
std::string timings_to_csv(const std::vector<MetricsRecord>& records);
nlohmann::json metrics_summary(const std::string& experiment, const ExperimentConfig& config,
                               const std::vector<MetricsRecord>& records);
// Writes metrics.csv, summary.json, timing.csv and one plot_<metric>.dat per
// aggregate metric (columns: n value std_error).
void write_experiment_outputs(const std::filesystem::path& directory, const std::string& experiment,
                              const ExperimentConfig& config, const std::vector<MetricsRecord>& records);

}  // namespace cartforest
