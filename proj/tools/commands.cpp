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

#include "commands.hpp"

#include <algorithm>
#include <ostream>
#include <set>

#include "CLI11.hpp"
#include "cartforest/errors.hpp"
#include "cartforest/forest.hpp"
#include "cartforest/io.hpp"

namespace cartforest::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct LoadedConfig {
  json doc;
  fs::path base_dir;
  std::string raw;
};

LoadedConfig read_config(const fs::path& path) {
  if (path.empty()) throw ConfigError("--config is required");
  if (!fs::exists(path)) throw ConfigError("config file not found: " + path.string());
  LoadedConfig config;
  config.raw = read_file(path);
  try {
    config.doc = json::parse(config.raw);
  } catch (const json::parse_error& e) {
    throw ParseError("config " + path.string() + ": " + e.what(), 0);
  }
  if (!config.doc.is_object()) throw ConfigError("config " + path.string() + ": top level must be an object");
  config.base_dir = fs::absolute(path).parent_path();
  return config;
}

void require_keys(const json& doc, std::initializer_list<const char*> allowed, const std::string& where) {
  const std::set<std::string> names(allowed.begin(), allowed.end());
  for (const auto& [key, value] : doc.items())
    if (!names.contains(key)) throw ConfigError(where + ": unknown field '" + key + "'");
}

const json& field(const json& doc, const std::string& name) {
  if (!doc.contains(name)) throw ConfigError("missing field '" + name + "'");
  return doc.at(name);
}

std::uint64_t get_u64(const json& doc, const std::string& name) {
  const json& v = field(doc, name);
  if (!v.is_number_unsigned()) throw ConfigError("field '" + name + "' must be a non-negative integer");
  return v.get<std::uint64_t>();
}

std::size_t get_size(const json& doc, const std::string& name, std::size_t minimum) {
  const std::uint64_t v = get_u64(doc, name);
  if (v < minimum)
    throw ConfigError("field '" + name + "' must be at least " + std::to_string(minimum) + " (got " +
                      std::to_string(v) + ")");
  return static_cast<std::size_t>(v);
}

std::size_t get_size_or(const json& doc, const std::string& name, std::size_t minimum, std::size_t fallback) {
  return doc.contains(name) ? get_size(doc, name, minimum) : fallback;
}

double get_double(const json& doc, const std::string& name) {
  const json& v = field(doc, name);
  if (!v.is_number()) throw ConfigError("field '" + name + "' must be a number");
  return v.get<double>();
}

bool get_bool_or(const json& doc, const std::string& name, bool fallback) {
  if (!doc.contains(name)) return fallback;
  if (!doc.at(name).is_boolean()) throw ConfigError("field '" + name + "' must be true or false");
  return doc.at(name).get<bool>();
}

fs::path resolve(const fs::path& base, const fs::path& p) { return p.is_absolute() ? p : (base / p).lexically_normal(); }

fs::path get_path(const json& doc, const std::string& name, const fs::path& base) {
  const json& v = field(doc, name);
  if (!v.is_string() || v.get<std::string>().empty())
    throw ConfigError("field '" + name + "' must be a non-empty path");
  return resolve(base, v.get<std::string>());
}

fs::path existing_path(const json& doc, const std::string& name, const fs::path& base) {
  const fs::path p = get_path(doc, name, base);
  if (!fs::exists(p)) throw ConfigError("field '" + name + "': file not found: " + p.string());
  return p;
}

AdditiveModel model_from(const json& doc, const fs::path& base) {
  const json& m = field(doc, "model");
  if (m.is_string()) return AdditiveModel::load(existing_path(doc, "model", base));
  if (m.is_object()) return AdditiveModel::from_json(m);
  throw ConfigError("field 'model' must be a file path or an inline model object");
}

std::uint64_t seed_from(const json& doc, const Overrides& o) { return o.seed ? *o.seed : get_u64(doc, "seed"); }

std::size_t threads_from(const json& doc, const Overrides& o) {
  const std::size_t threads = o.threads ? *o.threads : get_size_or(doc, "threads", 1, 1);
  if (threads < 1) throw ConfigError("threads must be at least 1");
  return threads;
}

fs::path output_dir(const json& doc, const fs::path& base, const Overrides& o) {
  const fs::path dir = o.out ? *o.out : get_path(doc, "output", base);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ConfigError("output directory not writable: " + dir.string());
  return dir;
}

CommandOutput finish(const fs::path& path) { return {path, content_digest(read_file(path))}; }

void audit_forest(const Forest& forest, const Dataset& data) {
  const PointsView points(data);
  for (std::size_t t = 0; t < forest.trees().size(); ++t) {
    const auto problems = audit_tree(forest.trees()[t], points);
    if (!problems.empty()) throw InvariantViolation("tree " + std::to_string(t) + ": " + problems.front());
  }
}

}  // namespace

CommandOutput cmd_gen(const fs::path& config_path, const Overrides& overrides) {
  const auto config = read_config(config_path);
  const json& doc = config.doc;
  require_keys(doc, {"model", "n", "seed", "sigma", "output"}, "gen config");
  AdditiveModel model = model_from(doc, config.base_dir);
  const std::size_t n = get_size(doc, "n", 1);
  const std::uint64_t seed = seed_from(doc, overrides);
  if (doc.contains("sigma")) {
    const double sigma = get_double(doc, "sigma");
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ConfigError("field 'sigma' must be finite and >= 0");
    model = model.with_noise(sigma);
  }
  const fs::path dir = output_dir(doc, config.base_dir, overrides);
  const fs::path path = dir / "dataset.csv";
  save_dataset(sample_dataset(model, n, seed), path);
  return finish(path);
}

CommandOutput cmd_fit(const fs::path& config_path, const Overrides& overrides) {
  const auto config = read_config(config_path);
  const json& doc = config.doc;
  require_keys(doc, {"dataset", "forest", "seed", "threads", "output"}, "fit config");
  const fs::path data_path = existing_path(doc, "dataset", config.base_dir);
  const json& fp = field(doc, "forest");
  if (!fp.is_object()) throw ConfigError("field 'forest' must be an object");
  require_keys(fp, {"M", "mtry", "a_n", "t_n"}, "forest");
  ForestParams params;
  params.trees = get_size(fp, "M", 1);
  params.mtry = get_size(fp, "mtry", 1);
  params.subsample = get_size(fp, "a_n", 1);
  params.leaves = get_size(fp, "t_n", 1);
  params.master_seed = seed_from(doc, overrides);
  const std::size_t threads = threads_from(doc, overrides);
  const fs::path dir = output_dir(doc, config.base_dir, overrides);

  const Dataset data = load_dataset(data_path);
  params.validate(data.size(), data.dimension());
  const Forest forest = fit_forest(data, params, threads);
  audit_forest(forest, data);
  const fs::path path = dir / "forest.json";
  forest.save(path);
  return finish(path);
}

QueryTable load_queries(const fs::path& path) {
  if (!fs::exists(path)) throw ConfigError("queries file not found: " + path.string());
  const std::string text = read_file(path);
  const auto first_end = text.find('\n');
  const auto header = split_fields(std::string_view(text).substr(0, first_end));
  if (header.size() == 4) {
    const Dataset data = dataset_from_text(text);
    return {data.dimension(), std::vector<double>(data.features().begin(), data.features().end())};
  }
  if (header.size() != 2) throw ParseError("queries: header must be 'n,p' or a dataset header", 1);
  const std::size_t n = parse_u64(header[0], 1);
  const std::size_t p = parse_u64(header[1], 1);
  if (n < 1 || p < 1) throw ParseError("queries: n and p must be positive", 1);
  QueryTable table{p, {}};
  table.points.reserve(n * p);
  std::size_t line_no = 1;
  std::size_t rows = 0;
  std::size_t pos = first_end == std::string::npos ? text.size() : first_end + 1;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string_view line(text.data() + pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != p)
      throw ParseError("queries: expected " + std::to_string(p) + " fields, found " + std::to_string(fields.size()),
                       line_no);
    for (const auto f : fields) {
      const double v = parse_double(f, line_no);
      if (!(v >= 0.0 && v <= 1.0))
        throw ValidationError("queries: feature " + format_double(v) + " outside [0,1] (line " +
                              std::to_string(line_no) + ")");
      table.points.push_back(v);
    }
    ++rows;
  }
  if (rows != n)
    throw ParseError("queries: header announces " + std::to_string(n) + " rows, found " + std::to_string(rows), 0);
  return table;
}

CommandOutput cmd_predict(const fs::path& config_path, const Overrides& overrides) {
  const auto config = read_config(config_path);
  const json& doc = config.doc;
  require_keys(doc, {"forest_file", "queries", "threads", "output"}, "predict config");
  const fs::path forest_path = existing_path(doc, "forest_file", config.base_dir);
  const fs::path query_path = existing_path(doc, "queries", config.base_dir);
  const fs::path dir = output_dir(doc, config.base_dir, overrides);

  const Forest forest = Forest::load(forest_path);
  const QueryTable queries = load_queries(query_path);
  if (queries.p != forest.dimension())
    throw ValidationError("schema mismatch: forest expects p = " + std::to_string(forest.dimension()) +
                          ", queries have p = " + std::to_string(queries.p));
  const std::size_t count = queries.points.size() / queries.p;
  std::string text = "prediction\n";
  for (std::size_t i = 0; i < count; ++i)
    text += format_double(forest.predict({queries.points.data() + i * queries.p, queries.p})) + "\n";
  const fs::path path = dir / "predictions.csv";
  write_file_atomic(path, text);
  return finish(path);
}

ExperimentConfig experiment_config_from_json(const json& doc, const fs::path& base_dir) {
  require_keys(doc,
               {"model", "schedule", "M", "replicates", "n_query", "k", "xi_grid", "mtry", "validate_schedule",
                "audit_trees", "seed", "threads", "output"},
               "experiment config");
  ExperimentConfig config{model_from(doc, base_dir)};
  const json& schedule = field(doc, "schedule");
  if (!schedule.is_object()) throw ConfigError("field 'schedule' must be an object");
  config.schedule = RegimeSchedule::from_json(schedule);
  config.trees = get_size(doc, "M", 1);
  config.replicates = get_size(doc, "replicates", 1);
  config.queries = get_size(doc, "n_query", 1);
  config.k = get_size_or(doc, "k", 1, 1);
  if (doc.contains("mtry")) config.mtry = get_size(doc, "mtry", 1);
  if (doc.contains("xi_grid")) {
    const json& xi = doc.at("xi_grid");
    if (!xi.is_array() || xi.empty()) throw ConfigError("field 'xi_grid' must be a non-empty array");
    config.xi_grid.clear();
    for (const auto& v : xi) {
      if (!v.is_number()) throw ConfigError("field 'xi_grid' must hold numbers");
      config.xi_grid.push_back(v.get<double>());
    }
  }
  config.validate_schedule = get_bool_or(doc, "validate_schedule", true);
  config.audit_trees = get_bool_or(doc, "audit_trees", true);
  if (doc.contains("seed")) config.seed = get_u64(doc, "seed");
  config.threads = get_size_or(doc, "threads", 1, 1);
  return config;
}

CommandOutput cmd_experiment(const std::string& kind, const fs::path& config_path, const Overrides& overrides) {
  const auto loaded = read_config(config_path);
  ExperimentConfig config = experiment_config_from_json(loaded.doc, loaded.base_dir);
  config.seed = seed_from(loaded.doc, overrides);
  config.threads = threads_from(loaded.doc, overrides);
  const fs::path dir = output_dir(loaded.doc, loaded.base_dir, overrides);

  std::vector<MetricsRecord> records;
  if (kind == "consistency") {
    records = run_consistency(config);
  } else if (kind == "sparsity") {
    records = run_sparsity(config);
  } else if (kind == "cutdist") {
    records = run_cut_distance(config);
  } else if (kind == "cellvar") {
    records = run_cell_variation(config);
  } else {
    throw ConfigError("unknown experiment '" + kind + "'");
  }
  write_experiment_outputs(dir, kind, config, records);
  write_file_atomic(dir / "config.json", loaded.raw);
  return finish(dir / "metrics.csv");
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Breiman-style regression forests and their asymptotic checks", "cartforest_cli"};
  app.require_subcommand(1);
  std::string config;
  std::uint64_t seed = 0;
  std::size_t threads = 0;
  std::string out_dir;
  auto* seed_opt = app.add_option("--seed", seed, "Override the config seed");
  auto* threads_opt = app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  auto* out_opt = app.add_option("--out", out_dir, "Output directory (overrides the config)");
  app.add_option("--config", config, "Run configuration (JSON)");
  app.fallthrough();

  auto* gen = app.add_subcommand("gen", "Sample a dataset from an additive model");
  auto* fit = app.add_subcommand("fit", "Fit a forest and save it");
  auto* predict = app.add_subcommand("predict", "Predict query points with a saved forest");
  auto* exp = app.add_subcommand("exp", "Run a Monte Carlo experiment");
  exp->require_subcommand(1);
  std::string kind;
  for (const char* name : {"consistency", "sparsity", "cutdist", "cellvar"}) {
    exp->add_subcommand(name)->fallthrough()->callback([&kind, name] { kind = name; });
  }
  for (auto* sub : {gen, fit, predict, exp}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitSuccess : kExitValidation;
  }

  Overrides overrides;
  if (*seed_opt) overrides.seed = seed;
  if (*threads_opt) overrides.threads = threads;
  if (*out_opt) overrides.out = fs::path(out_dir);

  try {
    CommandOutput result;
    if (*gen) {
      result = cmd_gen(config, overrides);
    } else if (*fit) {
      result = cmd_fit(config, overrides);
    } else if (*predict) {
      result = cmd_predict(config, overrides);
    } else {
      result = cmd_experiment(kind, config, overrides);
    }
    out << result.path.string() << "\n" << "digest " << result.digest << "\n";
    return kExitSuccess;
  } catch (const InvariantViolation& e) {
    err << "invariant violated: " << e.what() << "\n";
    return kExitInvariant;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const DomainError& e) {
    err << "domain error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const nlohmann::json::exception& e) {
    err << "configuration error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace cartforest::cli
