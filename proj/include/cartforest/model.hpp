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

// Additive regression models  Y = sum_j m_j(X_j) + eps  with X uniform on
// [0,1]^p and eps ~ N(0, sigma^2). Components come from a small catalog with
// closed-form integrals of m_j and m_j^2 and exact extrema on intervals.

#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace cartforest {

enum class ComponentKind { kConstant, kLinear, kPolynomial, kSine, kPiecewiseLinear };

class Component {
 public:
  static Component zero() { return constant(0.0); }
  static Component constant(double value);
  static Component linear(double intercept, double slope);
  // coefficients[i] multiplies x^i; at most degree 4.
  static Component polynomial(std::vector<double> coefficients);
  // amplitude * sin(2 pi frequency x + phase)
  static Component sine(double amplitude, double frequency, double phase = 0.0);
  // Knots strictly increasing with knots.front() == 0 and knots.back() == 1.
  static Component piecewise_linear(std::vector<double> knots, std::vector<double> values);

  ComponentKind kind() const { return kind_; }
  std::string kind_name() const;

  double value(double x) const;
  // Closed-form integral of m_j over [a, b].
  double integral(double a, double b) const;
  // Closed-form integral of m_j^2 over [a, b].
  double integral_of_square(double a, double b) const;
  // (min, max) of m_j over [a, b].
  std::pair<double, double> range(double a, double b) const;
  // True when m_j is identically zero on [0, 1].
  bool is_zero() const;
  // True when m_j is constant on [0, 1].
  bool is_constant() const;

  nlohmann::json to_json() const;
  static Component from_json(const nlohmann::json& spec);

 private:
  Component(ComponentKind kind, std::vector<double> a, std::vector<double> b = {})
      : kind_(kind), a_(std::move(a)), b_(std::move(b)) {}

  ComponentKind kind_;
  // Polynomial family: a_ holds coefficients. Sine: {amplitude, frequency, phase}.
  // Piecewise linear: a_ knots, b_ values.
  std::vector<double> a_;
  std::vector<double> b_;
};

class AdditiveModel {
 public:
  // `components` may hold S entries (the rest are zero) or p entries whose
  // tail beyond S is identically zero.
  AdditiveModel(std::size_t p, std::size_t informative, double noise_sigma,
                std::vector<Component> components);

  std::size_t dimension() const { return components_.size(); }
  std::size_t informative() const { return informative_; }
  double noise_sigma() const { return noise_sigma_; }
  const Component& component(std::size_t j) const { return components_.at(j); }
  const std::vector<Component>& components() const { return components_; }

  double regression(std::span<const double> x) const;
  // Sum of component ranges over [0,1]; an upper bound on any cell variation.
  double total_range() const;
  // True when every component is constant.
  bool is_constant() const;
  AdditiveModel with_noise(double sigma) const;

  nlohmann::json to_json() const;
  static AdditiveModel from_json(const nlohmann::json& spec);
  static AdditiveModel load(const std::filesystem::path& path);

 private:
  std::vector<Component> components_;
  std::size_t informative_;
  double noise_sigma_;
};

}  // namespace cartforest
