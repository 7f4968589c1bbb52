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

#include "cartforest/dataset.hpp"

#include <cmath>
#include <string_view>

#include "cartforest/errors.hpp"
#include "cartforest/io.hpp"
#include "cartforest/random.hpp"

namespace cartforest {

Dataset::Dataset(std::size_t p, std::vector<double> features, std::vector<double> responses,
                 std::optional<Provenance> provenance)
    : p_(p), features_(std::move(features)), responses_(std::move(responses)), provenance_(provenance) {
  if (p_ == 0) throw ValidationError("dataset: p must be at least 1");
  if (responses_.empty()) throw ValidationError("dataset: n must be at least 1");
  if (features_.size() != responses_.size() * p_)
    throw ValidationError("dataset: feature matrix size does not match n * p");
  for (std::size_t i = 0; i < responses_.size(); ++i) {
    if (!std::isfinite(responses_[i]))
      throw ValidationError("dataset: row " + std::to_string(i + 1) + " has a non-finite response");
    for (std::size_t j = 0; j < p_; ++j) {
      const double x = features_[i * p_ + j];
      if (!(x >= 0.0 && x <= 1.0))
        throw ValidationError("dataset: row " + std::to_string(i + 1) + " column " + std::to_string(j + 1) +
                              " holds " + format_double(x) + ", outside [0,1]");
    }
  }
}

Dataset sample_dataset(const AdditiveModel& model, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw ConfigError("sample: n must be at least 1");
  const std::size_t p = model.dimension();
  RandomStream feature_stream(seed, kFeatureStream);
  RandomStream noise_stream(seed, kNoiseStream);
  std::vector<double> features(n * p);
  for (double& x : features) x = feature_stream.uniform();
  std::vector<double> responses(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double noise = noise_stream.gaussian();
    responses[i] = model.regression({features.data() + i * p, p}) + model.noise_sigma() * noise;
  }
  return Dataset(p, std::move(features), std::move(responses), Provenance{model.noise_sigma(), seed});
}

std::vector<double> sample_uniform_points(std::size_t n, std::size_t p, std::uint64_t seed) {
  RandomStream stream(seed, kFeatureStream);
  std::vector<double> points(n * p);
  for (double& x : points) x = stream.uniform();
  return points;
}

std::string dataset_to_text(const Dataset& dataset) {
  std::string out;
  out += std::to_string(dataset.size()) + "," + std::to_string(dataset.dimension()) + ",";
  if (dataset.provenance()) {
    out += format_double(dataset.provenance()->sigma) + "," + std::to_string(dataset.provenance()->seed);
  } else {
    out += "na,na";
  }
  out += "\n";
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    for (double x : dataset.row(i)) {
      out += format_double(x);
      out += ',';
    }
    out += format_double(dataset.response(i));
    out += '\n';
  }
  return out;
}

Dataset dataset_from_text(const std::string& text) {
  std::string_view rest(text);
  std::size_t line_number = 0;
  auto next_line = [&]() -> std::optional<std::string_view> {
    if (rest.empty()) return std::nullopt;
    const std::size_t pos = rest.find('\n');
    std::string_view line = rest.substr(0, pos);
    rest = pos == std::string_view::npos ? std::string_view{} : rest.substr(pos + 1);
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
  };

  const auto header = next_line();
  if (!header) throw ParseError("dataset: empty file", 1);
  const auto fields = split_fields(*header);
  if (fields.size() != 4) throw ParseError("dataset: header must be n,p,sigma,seed", line_number);
  const std::size_t n = parse_u64(fields[0], line_number);
  const std::size_t p = parse_u64(fields[1], line_number);
  if (n == 0 || p == 0) throw ParseError("dataset: n and p must be positive", line_number);
  std::optional<Provenance> provenance;
  if (fields[2] != "na" || fields[3] != "na")
    provenance = Provenance{parse_double(fields[2], line_number), parse_u64(fields[3], line_number)};

  std::vector<double> features;
  std::vector<double> responses;
  features.reserve(n * p);
  responses.reserve(n);
  while (auto line = next_line()) {
    if (line->empty()) continue;
    const auto row = split_fields(*line);
    if (row.size() != p + 1)
      throw ParseError("dataset: expected " + std::to_string(p + 1) + " fields (p = " + std::to_string(p) +
                           "), found " + std::to_string(row.size()),
                       line_number);
    if (responses.size() == n) throw ParseError("dataset: more rows than the header's n", line_number);
    for (std::size_t j = 0; j < p; ++j) {
      const double x = parse_double(row[j], line_number);
      if (!(x >= 0.0 && x <= 1.0))
        throw ValidationError("dataset: row " + std::to_string(responses.size() + 1) + " column " +
                              std::to_string(j + 1) + " holds " + std::string(row[j]) + ", outside [0,1] (line " +
                              std::to_string(line_number) + ")");
      features.push_back(x);
    }
    responses.push_back(parse_double(row[p], line_number));
  }
  if (responses.size() != n)
    throw ParseError("dataset: header declares " + std::to_string(n) + " rows, found " +
                         std::to_string(responses.size()),
                     line_number);
  return Dataset(p, std::move(features), std::move(responses), provenance);
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  write_file_atomic(path, dataset_to_text(dataset));
}

Dataset load_dataset(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("dataset file not found: " + path.string());
  return dataset_from_text(read_file(path));
}

}  // namespace cartforest
