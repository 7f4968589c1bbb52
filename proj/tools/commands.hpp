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

// Command-line front end. Each run is described by one JSON config file;
// --seed, --threads and --out override the corresponding config fields.
// Relative paths inside a config resolve against the config's directory.
//
//   gen:      {"model": <file|object>, "n": N, "seed": S, "sigma"?: s, "output": DIR}
//             -> DIR/dataset.csv
//   fit:      {"dataset": FILE, "forest": {"M", "mtry", "a_n", "t_n"}, "seed": S, "output": DIR}
//             -> DIR/forest.json
//   predict:  {"forest_file": FILE, "queries": FILE, "output": DIR}
//             -> DIR/predictions.csv
//   exp <kind>: {"model": ..., "schedule": {...}, "M", "replicates", "n_query",
//             "k"?, "xi_grid"?, "mtry"?, "validate_schedule"?, "seed", "output"}
//             -> DIR/metrics.csv, summary.json, timing.csv, plot_*.dat
//
// A queries file is either a dataset file (its responses are ignored) or
// "n,p" on the first line followed by n rows of p features.

#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cartforest/dataset.hpp"
#include "cartforest/experiments.hpp"
#include "json.hpp"

namespace cartforest::cli {

inline constexpr int kExitSuccess = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitInvariant = 3;

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::optional<std::filesystem::path> out;
};

struct CommandOutput {
  std::filesystem::path path;  // the primary output file
  std::string digest;          // content digest of that file
};

CommandOutput cmd_gen(const std::filesystem::path& config_path, const Overrides& overrides);
CommandOutput cmd_fit(const std::filesystem::path& config_path, const Overrides& overrides);
CommandOutput cmd_predict(const std::filesystem::path& config_path, const Overrides& overrides);
CommandOutput cmd_experiment(const std::string& kind, const std::filesystem::path& config_path,
                             const Overrides& overrides);

// Builds the experiment configuration from a parsed config document.
ExperimentConfig experiment_config_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir);

// Query points (row-major) and their dimension.
struct QueryTable {
  std::size_t p = 0;
  std::vector<double> points;
};
QueryTable load_queries(const std::filesystem::path& path);

// Parses argv, runs the command and maps failures to exit codes.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cartforest::cli
