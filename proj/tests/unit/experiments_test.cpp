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

#include <cmath>
#include <filesystem>
#include <thread>

#include "cartforest/errors.hpp"
#include "cartforest/experiments.hpp"
#include "cartforest/io.hpp"

namespace cartforest {
namespace {

AdditiveModel additive(double sigma) {
  return AdditiveModel(2, 2, sigma, {Component::linear(0.0, 1.0), Component::polynomial({0.0, 0.0, 1.0})});
}

RegimeSchedule regime2(std::vector<std::size_t> grid) {
  RegimeSchedule s;
  s.rule = RegimeRule::kRegime2;
  s.n_grid = std::move(grid);
  return s;
}

ExperimentConfig small_config(AdditiveModel model, std::vector<std::size_t> grid) {
  ExperimentConfig c(std::move(model));
  c.schedule = regime2(std::move(grid));
  c.trees = 10;
  c.replicates = 2;
  c.queries = 1000;
  c.seed = 42;
  return c;
}

const MetricsRecord* find(const std::vector<MetricsRecord>& records, std::size_t n, const std::string& metric) {
  for (const auto& r : records)
    if (!r.replicate && r.n == n && r.metric == metric) return &r;
  return nullptr;
}

TEST(Schedule, Regime2Values) {
  const auto s = regime2({500, 2000, 8000});
  const auto e = s.entries();
  ASSERT_EQ(e.size(), 3u);
  EXPECT_EQ(e[0], (ScheduleEntry{500, 13, 13}));
  EXPECT_EQ(e[1], (ScheduleEntry{2000, 35, 35}));
  EXPECT_EQ(e[2], (ScheduleEntry{8000, 100, 100}));
  const auto check = s.check();
  EXPECT_TRUE(check.ok);
  ASSERT_EQ(check.condition_values.size(), 3u);
  EXPECT_NEAR(check.condition_values[0], 13.0 * std::log(500.0) / 500.0, 1e-15);
}

TEST(Schedule, Regime1IsRejectedBelowEToTheNine) {
  RegimeSchedule s;
  s.rule = RegimeRule::kRegime1;
  s.n_grid = {500, 2000, 8000};
  for (const auto& e : s.entries()) {
    EXPECT_EQ(e.subsample, e.n);
    EXPECT_EQ(e.leaves, 1u);
  }
  const auto check = s.check();
  EXPECT_FALSE(check.ok);
  ASSERT_EQ(check.condition_values.size(), 3u);
  EXPECT_LT(check.condition_values[0], check.condition_values[1]);
  EXPECT_FALSE(check.violations.empty());
}

TEST(Schedule, Regime1AcceptedWhereConditionDecays) {
  // Explicit leaves with t_n (log a_n)^9 / a_n decreasing.
  RegimeSchedule s;
  s.rule = RegimeRule::kRegime1;
  s.n_grid = {10000, 40000};
  s.overrides = {{10000, 10000, 1}, {40000, 40000, 1}};
  EXPECT_TRUE(s.check().ok);
}

TEST(Schedule, ExplicitAndStructuralChecks) {
  RegimeSchedule s;
  s.rule = RegimeRule::kExplicit;
  s.n_grid = {100, 200};
  s.overrides = {{100, 50, 10}};
  EXPECT_FALSE(s.check().ok);
  s.overrides.push_back({200, 80, 90});
  EXPECT_FALSE(s.check().ok);
  s.overrides.back() = {200, 80, 40};
  EXPECT_TRUE(s.check().ok);
  EXPECT_EQ(s.at(200), (ScheduleEntry{200, 80, 40}));
  auto unsorted = regime2({2000, 500});
  EXPECT_FALSE(unsorted.check().ok);
  EXPECT_FALSE(regime2({}).check().ok);
}

TEST(Schedule, JsonRoundTrip) {
  RegimeSchedule s;
  s.rule = RegimeRule::kExplicit;
  s.n_grid = {10, 20};
  s.overrides = {{10, 5, 2}, {20, 9, 3}};
  const auto back = RegimeSchedule::from_json(s.to_json());
  EXPECT_EQ(back.entries(), s.entries());
  EXPECT_THROW(RegimeSchedule::from_json({{"rule", "regime3"}, {"n_grid", {1}}}), ConfigError);
  EXPECT_THROW(RegimeSchedule::from_json({{"rule", "regime2"}}), ConfigError);
}

TEST(Consistency, ConstantNoiselessModelHasZeroError) {
  auto c = small_config(AdditiveModel(2, 2, 0.0, {Component::constant(2.0), Component::zero()}), {50, 100});
  const auto records = run_consistency(c);
  for (const auto& r : records) EXPECT_EQ(r.value, 0.0);
  // One row per (n, replicate) plus one aggregate per n.
  EXPECT_EQ(records.size(), 6u);
}

TEST(Consistency, LinearModelDecreases) {
  auto c = small_config(AdditiveModel(1, 1, 0.0, {Component::linear(0.0, 1.0)}), {500, 2000, 8000});
  c.replicates = 4;
  c.trees = 50;
  const auto trend = check_strict_decrease(aggregates(run_consistency(c), "mse"), 2.0);
  EXPECT_TRUE(trend.pass) << trend.details.front();
}

TEST(Consistency, RequiresThousandQueries) {
  auto c = small_config(additive(0.1), {100});
  c.queries = 999;
  EXPECT_THROW(run_consistency(c), ConfigError);
}

TEST(Consistency, RejectsInvalidSchedule) {
  auto c = small_config(additive(0.1), {500, 2000});
  c.schedule.rule = RegimeRule::kRegime1;
  EXPECT_THROW(run_consistency(c), ConfigError);
  c.validate_schedule = false;
  EXPECT_NO_THROW(run_consistency(c));
}

TEST(Consistency, StandardErrorShrinksWithReplicates) {
  auto c = small_config(additive(0.5), {200});
  c.queries = 1000;
  c.replicates = 4;
  const double se4 = find(run_consistency(c), 200, "mse")->std_error;
  c.replicates = 64;
  const double se64 = find(run_consistency(c), 200, "mse")->std_error;
  // Expected ratio 1/4; allow for the sampling noise of SE estimates.
  EXPECT_GT(se4, 0.0);
  EXPECT_LT(se64 / se4, 0.5);
  EXPECT_GT(se64 / se4, 0.1);
}

TEST(Sparsity, RequiresUninformativeDirections) {
  auto c = small_config(additive(1.0), {100});
  EXPECT_THROW(run_sparsity(c), ConfigError);
  auto flat = small_config(AdditiveModel(3, 2, 1.0, {Component::linear(0, 1), Component::constant(1)}), {100});
  EXPECT_THROW(run_sparsity(flat), ConfigError);
}

TEST(Sparsity, StrongSignalConcentratesOnInformativeDirections) {
  auto c = small_config(AdditiveModel(6, 2, 1.0, {Component::linear(0, 10), Component::polynomial({0, 0, 10})}),
                        {1000, 4000});
  c.k = 2;
  c.queries = 100;
  const auto records = run_sparsity(c);
  const auto* small = find(records, 1000, "informative_fraction");
  const auto* large = find(records, 4000, "informative_fraction");
  ASSERT_TRUE(small && large);
  EXPECT_GT(large->value, 0.9);
  EXPECT_GE(large->value, small->value);
  for (const auto& r : records)
    if (r.metric.rfind("informative_fraction", 0) == 0) {
      EXPECT_GE(r.value, 0.0);
      EXPECT_LE(r.value, 1.0);
    }
}

TEST(Sparsity, NoSignalGivesUniformBaseline) {
  // Informative components are negligible next to the noise: direction
  // choice is close to uniform, so the fraction is near S/p = 1/3. Cells
  // must hold enough points that exact ties (which go to the smallest
  // direction) are rare.
  auto c = small_config(AdditiveModel(6, 2, 1.0, {Component::linear(0, 1e-6), Component::linear(0, 1e-6)}), {2000});
  c.k = 2;
  c.trees = 100;
  c.replicates = 5;
  c.queries = 50;
  const auto* r = find(run_sparsity(c), 2000, "informative_fraction");
  ASSERT_TRUE(r);
  EXPECT_NEAR(r->value, 1.0 / 3.0, 0.06);
}

TEST(CutDistance, RefusesDegenerateModel) {
  auto c = small_config(AdditiveModel(1, 1, 0.0, {Component::constant(3.0)}), {100});
  EXPECT_THROW(run_cut_distance(c), ConfigError);
  auto deep = small_config(AdditiveModel(1, 1, 0.0, {Component::linear(0, 1)}), {100});
  deep.k = 4;
  EXPECT_THROW(run_cut_distance(deep), ConfigError);
  deep.k = 1;
  deep.mtry = 1;
  EXPECT_NO_THROW(run_cut_distance(deep));
}

TEST(CutDistance, LinearMedianDecreases) {
  auto c = small_config(AdditiveModel(1, 1, 0.0, {Component::linear(0, 1)}), {500, 2000, 8000});
  c.trees = 50;
  c.queries = 100;
  const auto records = run_cut_distance(c);
  const auto trend = check_strict_decrease(aggregates(records, "median_distance"), 0.0);
  EXPECT_TRUE(trend.pass);
  EXPECT_EQ(find(records, 500, "excluded_paths")->value, 0.0);
}

TEST(CutDistance, ShortPathsAreExcludedAndCounted) {
  auto c = small_config(AdditiveModel(1, 1, 0.0, {Component::linear(0, 1)}), {50});
  c.schedule.rule = RegimeRule::kExplicit;
  c.schedule.overrides = {{50, 50, 2}};
  c.k = 2;
  c.queries = 20;
  const auto records = run_cut_distance(c);
  // A two-leaf tree has one cut: every path is shorter than k = 2.
  EXPECT_EQ(find(records, 50, "excluded_paths")->value, 20.0 * 10.0 * 2.0);
  EXPECT_EQ(find(records, 50, "median_distance"), nullptr);
}

TEST(CellVariation, ConstantModel) {
  auto c = small_config(AdditiveModel(2, 2, 0.3, {Component::constant(1.0), Component::zero()}), {100, 400});
  c.xi_grid = {0.01, 0.5};
  c.queries = 50;
  for (const auto& r : run_cell_variation(c)) {
    if (r.metric == "median_delta") EXPECT_EQ(r.value, 0.0);
    if (r.metric.rfind("prob_delta_le_", 0) == 0) EXPECT_EQ(r.value, 1.0);
  }
}

TEST(CellVariation, LargeXiAlwaysHolds) {
  auto c = small_config(additive(0.1), {100, 400});
  c.xi_grid = {2.5};
  c.queries = 50;
  for (const auto& r : run_cell_variation(c))
    if (r.metric == "prob_delta_le_2.5") EXPECT_EQ(r.value, 1.0);
}

TEST(CellVariation, MedianDecreases) {
  auto c = small_config(additive(0.1), {500, 2000, 8000});
  c.queries = 200;
  const auto records = run_cell_variation(c);
  EXPECT_TRUE(check_strict_decrease(aggregates(records, "median_delta"), 0.0).pass);
  EXPECT_TRUE(check_nondecreasing(aggregates(records, "prob_delta_le_0.5")).pass);
}

TEST(Drivers, ThreadCountDoesNotChangeRecords) {
  auto c = small_config(additive(0.3), {200, 400});
  c.threads = 1;
  const auto a = metrics_to_csv(run_cell_variation(c));
  c.threads = 5;
  EXPECT_EQ(metrics_to_csv(run_cell_variation(c)), a);
  c.threads = 1;
  const auto b = metrics_to_csv(run_consistency(c));
  c.threads = 3;
  EXPECT_EQ(metrics_to_csv(run_consistency(c)), b);
}

TEST(Trend, StrictDecreaseUsesCombinedError) {
  EXPECT_TRUE(check_strict_decrease({{1, 1.0, 0.1}, {2, 0.5, 0.1}}, 2.0).pass);
  // Drop 0.2 against 2 * sqrt(0.01 + 0.01) = 0.283.
  EXPECT_FALSE(check_strict_decrease({{1, 1.0, 0.1}, {2, 0.8, 0.1}}, 2.0).pass);
  EXPECT_FALSE(check_strict_decrease({{1, 1.0, 0.0}, {2, 1.0, 0.0}}, 2.0).pass);
  EXPECT_FALSE(check_strict_decrease({{1, 1.0, 0.0}}, 2.0).pass);
  EXPECT_TRUE(check_nondecreasing({{1, 0.2, 0}, {2, 0.2, 0}, {3, 0.4, 0}}).pass);
  EXPECT_FALSE(check_nondecreasing({{1, 0.2, 0}, {2, 0.1, 0}}).pass);
}

TEST(Output, CsvAndFiles) {
  auto c = small_config(additive(0.1), {100});
  c.replicates = 1;
  const auto records = run_consistency(c);
  const std::string csv = metrics_to_csv(records);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "experiment,n,a_n,t_n,M,mtry,replicate,metric,value,std_error,replicates");
  EXPECT_NE(csv.find("consistency,100,5,5,10,2,0,mse,"), std::string::npos);
  EXPECT_NE(csv.find("consistency,100,5,5,10,2,all,mse,"), std::string::npos);
  const auto dir = std::filesystem::temp_directory_path() / "cartforest_experiment_outputs";
  std::filesystem::remove_all(dir);
  write_experiment_outputs(dir, "consistency", c, records);
  EXPECT_EQ(read_file(dir / "metrics.csv"), csv);
  EXPECT_TRUE(std::filesystem::exists(dir / "summary.json"));
  EXPECT_TRUE(std::filesystem::exists(dir / "timing.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "plot_mse.dat"));
  const auto summary = nlohmann::json::parse(read_file(dir / "summary.json"));
  EXPECT_EQ(summary.at("aggregates").size(), 1u);
  EXPECT_TRUE(summary.at("schedule_check").at("ok").get<bool>());
}

TEST(MetricsSink, AppendsFromManyThreads) {
  MetricsSink sink;
  std::vector<std::thread> workers;
  for (int t = 0; t < 8; ++t)
    workers.emplace_back([&sink] {
      for (int i = 0; i < 1000; ++i) sink.append({});
    });
  for (auto& w : workers) w.join();
  EXPECT_EQ(sink.records().size(), 8000u);
}

}  // namespace
}  // namespace cartforest
