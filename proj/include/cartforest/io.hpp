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

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace cartforest {

// 17 significant digits ("%.17g"); parses back to the same double.
std::string format_double(double value);

// Strict decimal parse of the whole field; throws ParseError on failure.
double parse_double(std::string_view field, std::size_t line);
std::uint64_t parse_u64(std::string_view field, std::size_t line);

std::vector<std::string_view> split_fields(std::string_view line, char delimiter = ',');

// Writes to `<path>.tmp` then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
std::string read_file(const std::filesystem::path& path);

// 64-bit FNV-1a, rendered as 16 hex digits.
std::string content_digest(std::string_view bytes);

}  // namespace cartforest
