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

#include "cartforest/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>

#include "cartforest/cell.hpp"
#include "cartforest/dataset.hpp"
#include "cartforest/errors.hpp"
#include "cartforest/forest.hpp"
#include "cartforest/io.hpp"
#include "cartforest/oracle.hpp"
#include "cartforest/parallel.hpp"

namespace cartforest {

// ---------------------------------------------------------------------------
// Schedules
// ---------------------------------------------------------------------------

std::string rule_name(RegimeRule rule) {
  switch (rule) {
    case RegimeRule::kRegime1: return "regime1";
    case RegimeRule::kRegime2: return "regime2";
    case RegimeRule::kExplicit: return "explicit";
  }
  return "unknown";
}

ScheduleEntry RegimeSchedule::at(std::size_t n) const {
  for (const auto& o : overrides)
    if (o.n == n) return o;
  if (n == 0) throw ConfigError("schedule: n must be positive");
  const double log_n = std::log(static_cast<double>(n));
  switch (rule) {
    case RegimeRule::kRegime1: {
      const double raw = std::ceil(static_cast<double>(n) / std::pow(log_n, 10.0));
      const auto leaves = std::isfinite(raw) ? static_cast<std::size_t>(std::clamp(raw, 1.0, static_cast<double>(n))) : n;
      return {n, n, leaves};
    }
    case RegimeRule::kRegime2: {
      const double raw = std::ceil(static_cast<double>(n) / (log_n * log_n));
      const auto a_n = std::isfinite(raw) ? static_cast<std::size_t>(std::clamp(raw, 1.0, static_cast<double>(n))) : n;
      return {n, a_n, a_n};
    }
    case RegimeRule::kExplicit:
      break;
  }
  throw ConfigError("schedule: explicit rule has no entry for n = " + std::to_string(n));
}

std::vector<ScheduleEntry> RegimeSchedule::entries() const {
  std::vector<ScheduleEntry> out;
  for (std::size_t n : n_grid) out.push_back(at(n));
  return out;
}

ScheduleCheck RegimeSchedule::check() const {
  ScheduleCheck result;
  auto fail = [&](std::string message) {
    result.ok = false;
    result.violations.push_back(std::move(message));
  };
  if (n_grid.empty()) fail("n_grid is empty");
  for (std::size_t i = 1; i < n_grid.size(); ++i)
    if (!(n_grid[i] > n_grid[i - 1])) fail("n_grid must be strictly increasing");
  if (!result.ok) return result;

  std::vector<ScheduleEntry> grid;
  try {
    grid = entries();
  } catch (const ConfigError& e) {
    fail(e.what());
    return result;
  }
  for (const auto& e : grid) {
    if (e.subsample < 1 || e.subsample > e.n)
      fail("n = " + std::to_string(e.n) + ": a_n = " + std::to_string(e.subsample) + " outside {1..n}");
    if (e.leaves < 1 || e.leaves > e.subsample)
      fail("n = " + std::to_string(e.n) + ": t_n = " + std::to_string(e.leaves) + " outside {1..a_n}");
  }
  if (!result.ok || rule == RegimeRule::kExplicit) return result;

  for (const auto& e : grid) {
    const double a = static_cast<double>(e.subsample);
    const double value = rule == RegimeRule::kRegime1
                             ? static_cast<double>(e.leaves) * std::pow(std::log(a), 9.0) / a
                             : a * std::log(static_cast<double>(e.n)) / static_cast<double>(e.n);
    result.condition_values.push_back(value);
    if (rule == RegimeRule::kRegime2 && e.leaves != e.subsample)
      fail("regime2 requires t_n = a_n (n = " + std::to_string(e.n) + ")");
  }
  const std::string quantity = rule == RegimeRule::kRegime1 ? "t_n (log a_n)^9 / a_n" : "a_n log n / n";
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(result.condition_values[i] < result.condition_values[i - 1]))
      fail(quantity + " does not decrease from n = " + std::to_string(grid[i - 1].n) + " (" +
           format_double(result.condition_values[i - 1]) + ") to n = " + std::to_string(grid[i].n) + " (" +
           format_double(result.condition_values[i]) + ")");
  }
  return result;
}

nlohmann::json RegimeSchedule::to_json() const {
  nlohmann::json overrides_json = nlohmann::json::array();
  for (const auto& o : overrides) overrides_json.push_back({{"n", o.n}, {"a_n", o.subsample}, {"t_n", o.leaves}});
  return {{"rule", rule_name(rule)}, {"n_grid", n_grid}, {"overrides", overrides_json}};
}

RegimeSchedule RegimeSchedule::from_json(const nlohmann::json& spec) {
  RegimeSchedule schedule;
  try {
    const std::string rule = spec.at("rule").get<std::string>();
    if (rule == "regime1") {
      schedule.rule = RegimeRule::kRegime1;
    } else if (rule == "regime2") {
      schedule.rule = RegimeRule::kRegime2;
    } else if (rule == "explicit") {
      schedule.rule = RegimeRule::kExplicit;
    } else {
      throw ConfigError("schedule.rule: unknown rule '" + rule + "'");
    }
    schedule.n_grid = spec.at("n_grid").get<std::vector<std::size_t>>();
    if (spec.contains("overrides")) {
      for (const auto& o : spec.at("overrides"))
        schedule.overrides.push_back(
            {o.at("n").get<std::size_t>(), o.at("a_n").get<std::size_t>(), o.at("t_n").get<std::size_t>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("schedule: ") + e.what());
  }
  return schedule;
}

// ---------------------------------------------------------------------------
// Sink and summaries
// ---------------------------------------------------------------------------

void MetricsSink::append(MetricsRecord record) {
  std::lock_guard<std::mutex> lock(mutex_);
  records_.push_back(std::move(record));
}

std::vector<MetricsRecord> MetricsSink::records() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return records_;
}

namespace {

using Clock = std::chrono::steady_clock;

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double standard_error(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

double median_of(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

// Nearest-rank quantile.
double quantile_of(std::vector<double> v, double q) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(v.size())));
  return v[std::clamp<std::size_t>(rank, 1, v.size()) - 1];
}

std::string xi_label(double xi) { return "prob_delta_le_" + format_double(xi); }

struct Trial {
  Dataset data;
  Forest forest;
  std::vector<double> queries;
  double seconds;
};

void prepare(const ExperimentConfig& config) {
  if (config.replicates < 1) throw ConfigError("replicates must be at least 1");
  if (config.trees < 1) throw ConfigError("M (trees) must be at least 1");
  if (config.queries < 1) throw ConfigError("query count must be at least 1");
  const std::size_t mtry = config.effective_mtry();
  if (mtry < 1 || mtry > config.model.dimension())
    throw ConfigError("mtry must lie in {1.." + std::to_string(config.model.dimension()) + "}");
  if (config.validate_schedule) {
    const auto check = config.schedule.check();
    if (!check.ok) {
      std::string message = "schedule rejected (" + rule_name(config.schedule.rule) + "):";
      for (const auto& v : check.violations) message += " " + v + ";";
      throw ConfigError(message);
    }
  }
}

Trial run_trial(const ExperimentConfig& config, const ScheduleEntry& entry, std::size_t replicate) {
  const auto start = Clock::now();
  const auto r = static_cast<std::uint64_t>(replicate);
  Dataset data = sample_dataset(config.model, entry.n, derive_key(config.seed, {kTrainTag, r}));
  ForestParams params;
  params.trees = config.trees;
  params.mtry = config.effective_mtry();
  params.subsample = entry.subsample;
  params.leaves = entry.leaves;
  params.master_seed = derive_key(config.seed, {kForestTag, r});
  Forest forest = fit_forest(data, params, config.threads);
  if (config.audit_trees) {
    const PointsView points(data);
    for (std::size_t t = 0; t < forest.trees().size(); ++t) {
      const auto problems = audit_tree(forest.trees()[t], points);
      if (!problems.empty())
        throw InvariantViolation("tree " + std::to_string(t) + " at n = " + std::to_string(entry.n) + ": " +
                                 problems.front());
    }
  }
  auto queries = sample_uniform_points(config.queries, config.model.dimension(),
                                       derive_key(config.seed, {kQueryTag, r}));
  const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return {std::move(data), std::move(forest), std::move(queries), seconds};
}

MetricsRecord make_record(const std::string& experiment, const ExperimentConfig& config, const ScheduleEntry& entry,
                          std::optional<std::size_t> replicate, std::string metric, double value, double se,
                          std::size_t replicates, double seconds) {
  MetricsRecord rec;
  rec.experiment = experiment;
  rec.n = entry.n;
  rec.subsample = entry.subsample;
  rec.leaves = entry.leaves;
  rec.trees = config.trees;
  rec.mtry = config.effective_mtry();
  rec.replicate = replicate;
  rec.metric = std::move(metric);
  rec.value = value;
  rec.std_error = se;
  rec.replicates = replicates;
  rec.wall_seconds = seconds;
  return rec;
}

void require_probability(double p, const std::string& what) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvariantViolation(what + " = " + format_double(p) + " is not a probability");
}

std::span<const double> query_row(const Trial& trial, std::size_t q, std::size_t p) {
  return {trial.queries.data() + q * p, p};
}

}  // namespace

std::vector<AggregatePoint> aggregates(const std::vector<MetricsRecord>& records, const std::string& metric) {
  std::vector<AggregatePoint> out;
  for (const auto& r : records)
    if (!r.replicate && r.metric == metric) out.push_back({r.n, r.value, r.std_error});
  return out;
}

TrendCheck check_strict_decrease(const std::vector<AggregatePoint>& points, double se_multiplier) {
  TrendCheck result;
  if (points.size() < 2) {
    result.pass = false;
    result.details.push_back("fewer than two grid points");
    return result;
  }
  for (std::size_t i = 1; i < points.size(); ++i) {
    const double drop = points[i - 1].value - points[i].value;
    const double required =
        se_multiplier * std::sqrt(points[i - 1].std_error * points[i - 1].std_error +
                                  points[i].std_error * points[i].std_error);
    const bool ok = drop > 0.0 && drop > required;
    result.pass = result.pass && ok;
    result.details.push_back("n " + std::to_string(points[i - 1].n) + " -> " + std::to_string(points[i].n) +
                             ": " + format_double(points[i - 1].value) + " -> " + format_double(points[i].value) +
                             ", drop " + format_double(drop) + " vs required " + format_double(required) +
                             (ok ? " ok" : " FAIL"));
  }
  return result;
}

TrendCheck check_nondecreasing(const std::vector<AggregatePoint>& points) {
  TrendCheck result;
  for (std::size_t i = 1; i < points.size(); ++i) {
    const bool ok = points[i].value >= points[i - 1].value;
    result.pass = result.pass && ok;
    result.details.push_back("n " + std::to_string(points[i - 1].n) + " -> " + std::to_string(points[i].n) +
                             ": " + format_double(points[i - 1].value) + " -> " + format_double(points[i].value) +
                             (ok ? " ok" : " FAIL"));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Drivers
// ---------------------------------------------------------------------------

std::vector<MetricsRecord> run_consistency(const ExperimentConfig& config) {
  prepare(config);
  if (config.queries < 1000) throw ConfigError("consistency: n_test must be at least 1000");
  const std::string name = "consistency";
  const std::size_t p = config.model.dimension();
  MetricsSink sink;
  for (const auto& entry : config.schedule.entries()) {
    std::vector<double> per_replicate;
    double seconds = 0.0;
    for (std::size_t r = 0; r < config.replicates; ++r) {
      const Trial trial = run_trial(config, entry, r);
      const auto start = Clock::now();
      std::vector<double> squared(config.queries);
      parallel_for(config.queries, config.threads, [&](std::size_t q) {
        const auto x = query_row(trial, q, p);
        const double diff = trial.forest.predict(x) - config.model.regression(x);
        squared[q] = diff * diff;
      });
      const double mse = mean_of(squared);
      if (!(mse >= 0.0) || !std::isfinite(mse)) throw InvariantViolation("consistency: invalid MSE estimate");
      const double elapsed = trial.seconds + std::chrono::duration<double>(Clock::now() - start).count();
      seconds += elapsed;
      per_replicate.push_back(mse);
      sink.append(make_record(name, config, entry, r, "mse", mse, 0.0, 1, elapsed));
    }
    sink.append(make_record(name, config, entry, std::nullopt, "mse", mean_of(per_replicate),
                            standard_error(per_replicate), config.replicates, seconds));
  }
  return sink.records();
}

std::vector<MetricsRecord> run_sparsity(const ExperimentConfig& config) {
  const std::size_t p = config.model.dimension();
  const std::size_t s = config.model.informative();
  if (s >= p) throw ConfigError("sparsity: requires S < p (S = " + std::to_string(s) + ", p = " + std::to_string(p) + ")");
  for (std::size_t j = 0; j < s; ++j)
    if (config.model.component(j).is_constant())
      throw ConfigError("sparsity: informative component " + std::to_string(j + 1) + " is constant");
  if (config.k < 1) throw ConfigError("sparsity: k must be at least 1");
  prepare(config);
  const std::string name = "sparsity";
  const std::size_t k = config.k;
  MetricsSink sink;
  for (const auto& entry : config.schedule.entries()) {
    std::vector<std::vector<double>> per_depth(k);
    std::vector<double> pooled;
    double seconds = 0.0;
    for (std::size_t r = 0; r < config.replicates; ++r) {
      const Trial trial = run_trial(config, entry, r);
      const auto start = Clock::now();
      // Per query: informative and finite counts for each depth.
      std::vector<std::vector<std::size_t>> informative(config.queries, std::vector<std::size_t>(k, 0));
      std::vector<std::vector<std::size_t>> finite(config.queries, std::vector<std::size_t>(k, 0));
      parallel_for(config.queries, config.threads, [&](std::size_t q) {
        const auto x = query_row(trial, q, p);
        for (const auto& tree : trial.forest.trees()) {
          const auto dirs = tree.cut_directions(x, k);
          for (std::size_t d = 0; d < k; ++d) {
            if (dirs[d] == kInfiniteDirection) continue;
            ++finite[q][d];
            if (dirs[d] < s) ++informative[q][d];
          }
        }
      });
      std::size_t pooled_informative = 0;
      std::size_t pooled_finite = 0;
      const double elapsed = trial.seconds + std::chrono::duration<double>(Clock::now() - start).count();
      seconds += elapsed;
      for (std::size_t d = 0; d < k; ++d) {
        std::size_t inf_d = 0;
        std::size_t fin_d = 0;
        for (std::size_t q = 0; q < config.queries; ++q) {
          inf_d += informative[q][d];
          fin_d += finite[q][d];
        }
        pooled_informative += inf_d;
        pooled_finite += fin_d;
        if (fin_d == 0) continue;
        const double fraction = static_cast<double>(inf_d) / static_cast<double>(fin_d);
        require_probability(fraction, "informative fraction");
        per_depth[d].push_back(fraction);
        sink.append(make_record(name, config, entry, r, "informative_fraction_q" + std::to_string(d + 1), fraction,
                                0.0, 1, elapsed));
      }
      const std::size_t excluded = config.queries * config.trees * k - pooled_finite;
      sink.append(make_record(name, config, entry, r, "excluded_cuts", static_cast<double>(excluded), 0.0, 1, elapsed));
      if (pooled_finite > 0) {
        const double fraction = static_cast<double>(pooled_informative) / static_cast<double>(pooled_finite);
        require_probability(fraction, "informative fraction");
        pooled.push_back(fraction);
        sink.append(make_record(name, config, entry, r, "informative_fraction", fraction, 0.0, 1, elapsed));
      }
    }
    for (std::size_t d = 0; d < k; ++d) {
      if (per_depth[d].empty()) continue;
      sink.append(make_record(name, config, entry, std::nullopt, "informative_fraction_q" + std::to_string(d + 1),
                              mean_of(per_depth[d]), standard_error(per_depth[d]), per_depth[d].size(), seconds));
    }
    if (!pooled.empty())
      sink.append(make_record(name, config, entry, std::nullopt, "informative_fraction", mean_of(pooled),
                              standard_error(pooled), pooled.size(), seconds));
  }
  return sink.records();
}

std::vector<MetricsRecord> run_cut_distance(const ExperimentConfig& config) {
  if (config.k < 1 || config.k > 3) throw ConfigError("cutdist: k must lie in {1, 2, 3}");
  if (config.effective_mtry() != config.model.dimension())
    throw ConfigError("cutdist: mtry must equal p so that empirical and theoretical candidates coincide");
  prepare(config);
  const TheoreticalTree theory(config.model, config.k);
  if (theory.any_degenerate())
    throw ConfigError("cutdist: the theoretical tree is degenerate (L* vanishes in some cell); refusing to run");
  const std::string name = "cutdist";
  const std::size_t p = config.model.dimension();
  const std::size_t k = config.k;
  MetricsSink sink;
  for (const auto& entry : config.schedule.entries()) {
    std::vector<double> pooled;
    std::vector<double> replicate_medians;
    double seconds = 0.0;
    std::size_t excluded_total = 0;
    for (std::size_t r = 0; r < config.replicates; ++r) {
      const Trial trial = run_trial(config, entry, r);
      const auto start = Clock::now();
      std::vector<std::vector<double>> distances(config.queries);
      std::vector<std::size_t> excluded(config.queries, 0);
      parallel_for(config.queries, config.threads, [&](std::size_t q) {
        const auto x = query_row(trial, q, p);
        const auto optimal = theory.optimal_sequences(x);
        for (const auto& tree : trial.forest.trees()) {
          auto path = tree.path_cuts(x);
          if (path.size() < k) {
            ++excluded[q];
            continue;
          }
          path.resize(k);
          distances[q].push_back(cut_distance(path, optimal));
        }
      });
      std::vector<double> all;
      std::size_t excluded_count = 0;
      for (std::size_t q = 0; q < config.queries; ++q) {
        all.insert(all.end(), distances[q].begin(), distances[q].end());
        excluded_count += excluded[q];
      }
      const double elapsed = trial.seconds + std::chrono::duration<double>(Clock::now() - start).count();
      seconds += elapsed;
      excluded_total += excluded_count;
      sink.append(make_record(name, config, entry, r, "excluded_paths", static_cast<double>(excluded_count), 0.0, 1,
                              elapsed));
      if (all.empty()) continue;
      const double median = median_of(all);
      replicate_medians.push_back(median);
      sink.append(make_record(name, config, entry, r, "median_distance", median, 0.0, 1, elapsed));
      sink.append(make_record(name, config, entry, r, "p90_distance", quantile_of(all, 0.9), 0.0, 1, elapsed));
      pooled.insert(pooled.end(), all.begin(), all.end());
    }
    sink.append(make_record(name, config, entry, std::nullopt, "excluded_paths", static_cast<double>(excluded_total),
                            0.0, config.replicates, seconds));
    if (pooled.empty()) continue;
    sink.append(make_record(name, config, entry, std::nullopt, "median_distance", median_of(pooled),
                            standard_error(replicate_medians), replicate_medians.size(), seconds));
    sink.append(make_record(name, config, entry, std::nullopt, "p90_distance", quantile_of(pooled, 0.9), 0.0,
                            replicate_medians.size(), seconds));
  }
  return sink.records();
}

std::vector<MetricsRecord> run_cell_variation(const ExperimentConfig& config) {
  prepare(config);
  for (double xi : config.xi_grid)
    if (!(xi > 0.0) || !std::isfinite(xi)) throw ConfigError("cellvar: xi values must be positive");
  const std::string name = "cellvar";
  const std::size_t p = config.model.dimension();
  const double bound = config.model.total_range();
  MetricsSink sink;
  for (const auto& entry : config.schedule.entries()) {
    std::vector<double> pooled;
    std::vector<double> replicate_medians;
    std::vector<std::vector<double>> replicate_probs(config.xi_grid.size());
    double seconds = 0.0;
    for (std::size_t r = 0; r < config.replicates; ++r) {
      const Trial trial = run_trial(config, entry, r);
      const auto start = Clock::now();
      const auto& trees = trial.forest.trees();
      // Variation per (tree, leaf), computed once.
      std::vector<std::vector<double>> leaf_delta(trees.size());
      parallel_for(trees.size(), config.threads, [&](std::size_t t) {
        const auto& tree = trees[t];
        leaf_delta[t].assign(tree.nodes().size(), 0.0);
        for (std::size_t id = 0; id < tree.nodes().size(); ++id)
          if (tree.node(id).is_leaf())
            leaf_delta[t][id] = cell_variation(config.model, Cell::from_bounds(tree.lower(id), tree.upper(id)));
      });
      std::vector<double> deltas(config.queries * trees.size());
      parallel_for(config.queries, config.threads, [&](std::size_t q) {
        const auto x = query_row(trial, q, p);
        for (std::size_t t = 0; t < trees.size(); ++t) deltas[q * trees.size() + t] = leaf_delta[t][trees[t].find_leaf(x)];
      });
      for (double d : deltas)
        if (!(d >= 0.0 && d <= bound + 1e-9)) throw InvariantViolation("cellvar: variation outside [0, total range]");
      const double elapsed = trial.seconds + std::chrono::duration<double>(Clock::now() - start).count();
      seconds += elapsed;
      const double median = median_of(deltas);
      replicate_medians.push_back(median);
      sink.append(make_record(name, config, entry, r, "median_delta", median, 0.0, 1, elapsed));
      for (std::size_t x = 0; x < config.xi_grid.size(); ++x) {
        const double xi = config.xi_grid[x];
        const auto hits = std::count_if(deltas.begin(), deltas.end(), [&](double d) { return d <= xi; });
        const double prob = static_cast<double>(hits) / static_cast<double>(deltas.size());
        require_probability(prob, "P[delta <= xi]");
        replicate_probs[x].push_back(prob);
        sink.append(make_record(name, config, entry, r, xi_label(xi), prob, 0.0, 1, elapsed));
      }
      pooled.insert(pooled.end(), deltas.begin(), deltas.end());
    }
    sink.append(make_record(name, config, entry, std::nullopt, "median_delta", median_of(pooled),
                            standard_error(replicate_medians), config.replicates, seconds));
    for (std::size_t x = 0; x < config.xi_grid.size(); ++x)
      sink.append(make_record(name, config, entry, std::nullopt, xi_label(config.xi_grid[x]),
                              mean_of(replicate_probs[x]), standard_error(replicate_probs[x]), config.replicates,
                              seconds));
  }
  return sink.records();
}

// ---------------------------------------------------------------------------
// Output
// ---------------------------------------------------------------------------

std::string metrics_to_csv(const std::vector<MetricsRecord>& records) {
  std::string out = "experiment,n,a_n,t_n,M,mtry,replicate,metric,value,std_error,replicates\n";
  for (const auto& r : records) {
    out += r.experiment + "," + std::to_string(r.n) + "," + std::to_string(r.subsample) + "," +
           std::to_string(r.leaves) + "," + std::to_string(r.trees) + "," + std::to_string(r.mtry) + "," +
           (r.replicate ? std::to_string(*r.replicate) : std::string("all")) + "," + r.metric + "," +
           format_double(r.value) + "," + format_double(r.std_error) + "," + std::to_string(r.replicates) + "\n";
  }
  return out;
}

std::string timings_to_csv(const std::vector<MetricsRecord>& records) {
  std::string out = "experiment,n,replicate,metric,wall_seconds\n";
  for (const auto& r : records) {
    out += r.experiment + "," + std::to_string(r.n) + "," +
           (r.replicate ? std::to_string(*r.replicate) : std::string("all")) + "," + r.metric + "," +
           format_double(r.wall_seconds) + "\n";
  }
  return out;
}

nlohmann::json metrics_summary(const std::string& experiment, const ExperimentConfig& config,
                               const std::vector<MetricsRecord>& records) {
  nlohmann::json aggregate = nlohmann::json::array();
  for (const auto& r : records) {
    if (r.replicate) continue;
    aggregate.push_back({{"n", r.n},
                         {"a_n", r.subsample},
                         {"t_n", r.leaves},
                         {"metric", r.metric},
                         {"value", r.value},
                         {"std_error", r.std_error},
                         {"replicates", r.replicates}});
  }
  const auto check = config.schedule.check();
  return {{"experiment", experiment},
          {"model", config.model.to_json()},
          {"schedule", config.schedule.to_json()},
          {"schedule_check", {{"ok", check.ok}, {"violations", check.violations}, {"condition", check.condition_values}}},
          {"M", config.trees},
          {"mtry", config.effective_mtry()},
          {"replicates", config.replicates},
          {"queries", config.queries},
          {"k", config.k},
          {"xi_grid", config.xi_grid},
          {"seed", config.seed},
          {"aggregates", aggregate}};
}

void write_experiment_outputs(const std::filesystem::path& directory, const std::string& experiment,
                              const ExperimentConfig& config, const std::vector<MetricsRecord>& records) {
  std::filesystem::create_directories(directory);
  write_file_atomic(directory / "metrics.csv", metrics_to_csv(records));
  write_file_atomic(directory / "summary.json", metrics_summary(experiment, config, records).dump(2) + "\n");
  write_file_atomic(directory / "timing.csv", timings_to_csv(records));
  std::map<std::string, std::string> plots;
  for (const auto& r : records) {
    if (r.replicate) continue;
    auto& text = plots[r.metric];
    if (text.empty()) text = "# n value std_error\n";
    text += std::to_string(r.n) + " " + format_double(r.value) + " " + format_double(r.std_error) + "\n";
  }
  for (const auto& [metric, text] : plots) write_file_atomic(directory / ("plot_" + metric + ".dat"), text);
}

}  // namespace cartforest
