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

#include "cartforest/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "cartforest/errors.hpp"

namespace cartforest {

namespace {

double horner(const std::vector<double>& c, double x) {
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
  return acc;
}

std::vector<double> trim(std::vector<double> c) {
  while (c.size() > 1 && c.back() == 0.0) c.pop_back();
  if (c.empty()) c.push_back(0.0);
  return c;
}

std::vector<double> derivative(const std::vector<double>& c) {
  std::vector<double> d;
  for (std::size_t i = 1; i < c.size(); ++i) d.push_back(static_cast<double>(i) * c[i]);
  return trim(d);
}

std::vector<double> antiderivative(const std::vector<double>& c) {
  std::vector<double> f(c.size() + 1, 0.0);
  for (std::size_t i = 0; i < c.size(); ++i) f[i + 1] = c[i] / static_cast<double>(i + 1);
  return f;
}

std::vector<double> square(const std::vector<double>& c) {
  std::vector<double> s(2 * c.size() - 1, 0.0);
  for (std::size_t i = 0; i < c.size(); ++i)
    for (std::size_t j = 0; j < c.size(); ++j) s[i + j] += c[i] * c[j];
  return s;
}

// Root of a polynomial on [lo, hi] where it changes sign.
double bisect_root(const std::vector<double>& c, double lo, double hi) {
  double f_lo = horner(c, lo);
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double f_mid = horner(c, mid);
    if (f_mid == 0.0) return mid;
    if ((f_mid < 0.0) == (f_lo < 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Real roots of `c` strictly inside (a, b). The roots of the derivative split
// the interval into monotone pieces, each holding at most one sign change.
std::vector<double> interior_roots(const std::vector<double>& c, double a, double b) {
  const std::vector<double> poly = trim(c);
  if (poly.size() <= 1) return {};
  if (poly.size() == 2) {
    const double root = -poly[0] / poly[1];
    if (root > a && root < b) return {root};
    return {};
  }
  std::vector<double> breaks{a};
  for (double r : interior_roots(derivative(poly), a, b)) breaks.push_back(r);
  breaks.push_back(b);
  std::vector<double> roots;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double lo = breaks[i];
    const double hi = breaks[i + 1];
    const double f_lo = horner(poly, lo);
    const double f_hi = horner(poly, hi);
    if (f_lo == 0.0 && lo > a) roots.push_back(lo);
    if ((f_lo < 0.0 && f_hi > 0.0) || (f_lo > 0.0 && f_hi < 0.0)) roots.push_back(bisect_root(poly, lo, hi));
  }
  return roots;
}

double require_number(const nlohmann::json& spec, const char* field) {
  if (!spec.contains(field) || !spec.at(field).is_number())
    throw ConfigError(std::string("model component: missing numeric field '") + field + "'");
  const double v = spec.at(field).get<double>();
  if (!std::isfinite(v)) throw ConfigError(std::string("model component: field '") + field + "' is not finite");
  return v;
}

std::vector<double> require_vector(const nlohmann::json& spec, const char* field) {
  if (!spec.contains(field) || !spec.at(field).is_array())
    throw ConfigError(std::string("model component: missing array field '") + field + "'");
  std::vector<double> out;
  for (const auto& v : spec.at(field)) {
    if (!v.is_number()) throw ConfigError(std::string("model component: non-numeric entry in '") + field + "'");
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace

Component Component::constant(double value) { return Component(ComponentKind::kConstant, {value}); }

Component Component::linear(double intercept, double slope) {
  return Component(ComponentKind::kLinear, {intercept, slope});
}

Component Component::polynomial(std::vector<double> coefficients) {
  if (coefficients.empty()) coefficients.push_back(0.0);
  if (coefficients.size() > 5) throw ConfigError("polynomial component: degree must be at most 4");
  for (double c : coefficients)
    if (!std::isfinite(c)) throw ConfigError("polynomial component: non-finite coefficient");
  return Component(ComponentKind::kPolynomial, std::move(coefficients));
}

Component Component::sine(double amplitude, double frequency, double phase) {
  if (!std::isfinite(amplitude) || !std::isfinite(frequency) || !std::isfinite(phase))
    throw ConfigError("sine component: non-finite parameter");
  return Component(ComponentKind::kSine, {amplitude, frequency, phase});
}

Component Component::piecewise_linear(std::vector<double> knots, std::vector<double> values) {
  if (knots.size() < 2 || knots.size() != values.size())
    throw ConfigError("piecewise_linear component: need at least two knots and one value per knot");
  if (knots.front() != 0.0 || knots.back() != 1.0)
    throw ConfigError("piecewise_linear component: knots must start at 0 and end at 1");
  for (std::size_t i = 1; i < knots.size(); ++i)
    if (!(knots[i] > knots[i - 1])) throw ConfigError("piecewise_linear component: knots must be strictly increasing");
  for (double v : values)
    if (!std::isfinite(v)) throw ConfigError("piecewise_linear component: non-finite value");
  return Component(ComponentKind::kPiecewiseLinear, std::move(knots), std::move(values));
}

std::string Component::kind_name() const {
  switch (kind_) {
    case ComponentKind::kConstant: return "constant";
    case ComponentKind::kLinear: return "linear";
    case ComponentKind::kPolynomial: return "polynomial";
    case ComponentKind::kSine: return "sine";
    case ComponentKind::kPiecewiseLinear: return "piecewise_linear";
  }
  return "unknown";
}

double Component::value(double x) const {
  switch (kind_) {
    case ComponentKind::kConstant:
    case ComponentKind::kLinear:
    case ComponentKind::kPolynomial:
      return horner(a_, x);
    case ComponentKind::kSine:
      return a_[0] * std::sin(2.0 * std::numbers::pi * a_[1] * x + a_[2]);
    case ComponentKind::kPiecewiseLinear: {
      if (x <= a_.front()) return b_.front();
      if (x >= a_.back()) return b_.back();
      const auto it = std::upper_bound(a_.begin(), a_.end(), x);
      const std::size_t i = static_cast<std::size_t>(it - a_.begin()) - 1;
      const double t = (x - a_[i]) / (a_[i + 1] - a_[i]);
      return b_[i] + t * (b_[i + 1] - b_[i]);
    }
  }
  return 0.0;
}

double Component::integral(double a, double b) const {
  switch (kind_) {
    case ComponentKind::kConstant:
    case ComponentKind::kLinear:
    case ComponentKind::kPolynomial: {
      const auto f = antiderivative(a_);
      return horner(f, b) - horner(f, a);
    }
    case ComponentKind::kSine: {
      const double amplitude = a_[0];
      const double omega = 2.0 * std::numbers::pi * a_[1];
      const double phase = a_[2];
      if (omega == 0.0) return amplitude * std::sin(phase) * (b - a);
      return -amplitude / omega * (std::cos(omega * b + phase) - std::cos(omega * a + phase));
    }
    case ComponentKind::kPiecewiseLinear: {
      double total = 0.0;
      for (std::size_t i = 0; i + 1 < a_.size(); ++i) {
        const double lo = std::max(a, a_[i]);
        const double hi = std::min(b, a_[i + 1]);
        if (hi <= lo) continue;
        total += 0.5 * (hi - lo) * (value(lo) + value(hi));
      }
      return total;
    }
  }
  return 0.0;
}

double Component::integral_of_square(double a, double b) const {
  switch (kind_) {
    case ComponentKind::kConstant:
    case ComponentKind::kLinear:
    case ComponentKind::kPolynomial: {
      const auto f = antiderivative(square(a_));
      return horner(f, b) - horner(f, a);
    }
    case ComponentKind::kSine: {
      const double amplitude = a_[0];
      const double omega = 2.0 * std::numbers::pi * a_[1];
      const double phase = a_[2];
      if (omega == 0.0) {
        const double v = amplitude * std::sin(phase);
        return v * v * (b - a);
      }
      const double sin_term = (std::sin(2.0 * (omega * b + phase)) - std::sin(2.0 * (omega * a + phase))) /
                              (2.0 * omega);
      return 0.5 * amplitude * amplitude * ((b - a) - sin_term);
    }
    case ComponentKind::kPiecewiseLinear: {
      double total = 0.0;
      for (std::size_t i = 0; i + 1 < a_.size(); ++i) {
        const double lo = std::max(a, a_[i]);
        const double hi = std::min(b, a_[i + 1]);
        if (hi <= lo) continue;
        const double y0 = value(lo);
        const double y1 = value(hi);
        total += (hi - lo) / 3.0 * (y0 * y0 + y0 * y1 + y1 * y1);
      }
      return total;
    }
  }
  return 0.0;
}

std::pair<double, double> Component::range(double a, double b) const {
  std::vector<double> candidates{a, b};
  switch (kind_) {
    case ComponentKind::kConstant:
    case ComponentKind::kLinear:
    case ComponentKind::kPolynomial:
      for (double r : interior_roots(derivative(a_), a, b)) candidates.push_back(r);
      break;
    case ComponentKind::kSine: {
      const double omega = 2.0 * std::numbers::pi * a_[1];
      const double phase = a_[2];
      if (omega != 0.0 && a_[0] != 0.0) {
        // Critical points: omega x + phase = pi/2 + k pi.
        const double u0 = (std::min(omega * a, omega * b) + phase - std::numbers::pi / 2) / std::numbers::pi;
        const double u1 = (std::max(omega * a, omega * b) + phase - std::numbers::pi / 2) / std::numbers::pi;
        for (double k = std::ceil(u0); k <= std::floor(u1); k += 1.0) {
          const double x = (std::numbers::pi / 2 + k * std::numbers::pi - phase) / omega;
          if (x > a && x < b) candidates.push_back(x);
        }
      }
      break;
    }
    case ComponentKind::kPiecewiseLinear:
      for (double knot : a_)
        if (knot > a && knot < b) candidates.push_back(knot);
      break;
  }
  double lo = value(candidates.front());
  double hi = lo;
  for (double x : candidates) {
    const double v = value(x);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return {lo, hi};
}

bool Component::is_constant() const {
  switch (kind_) {
    case ComponentKind::kConstant:
    case ComponentKind::kLinear:
    case ComponentKind::kPolynomial:
      return trim(a_).size() == 1;
    case ComponentKind::kSine:
      return a_[0] == 0.0 || a_[1] == 0.0;
    case ComponentKind::kPiecewiseLinear:
      return std::all_of(b_.begin(), b_.end(), [&](double v) { return v == b_.front(); });
  }
  return false;
}

bool Component::is_zero() const { return is_constant() && value(0.0) == 0.0; }

nlohmann::json Component::to_json() const {
  switch (kind_) {
    case ComponentKind::kConstant:
      return {{"kind", "constant"}, {"value", a_[0]}};
    case ComponentKind::kLinear:
      return {{"kind", "linear"}, {"intercept", a_[0]}, {"slope", a_[1]}};
    case ComponentKind::kPolynomial:
      return {{"kind", "polynomial"}, {"coefficients", a_}};
    case ComponentKind::kSine:
      return {{"kind", "sine"}, {"amplitude", a_[0]}, {"frequency", a_[1]}, {"phase", a_[2]}};
    case ComponentKind::kPiecewiseLinear:
      return {{"kind", "piecewise_linear"}, {"knots", a_}, {"values", b_}};
  }
  return {};
}

Component Component::from_json(const nlohmann::json& spec) {
  if (!spec.is_object() || !spec.contains("kind") || !spec.at("kind").is_string())
    throw ConfigError("model component: expected an object with a string 'kind'");
  const std::string kind = spec.at("kind").get<std::string>();
  if (kind == "zero") return zero();
  if (kind == "constant") return constant(require_number(spec, "value"));
  if (kind == "linear") {
    const double intercept = spec.contains("intercept") ? require_number(spec, "intercept") : 0.0;
    return linear(intercept, require_number(spec, "slope"));
  }
  if (kind == "polynomial") return polynomial(require_vector(spec, "coefficients"));
  if (kind == "sine") {
    const double phase = spec.contains("phase") ? require_number(spec, "phase") : 0.0;
    return sine(require_number(spec, "amplitude"), require_number(spec, "frequency"), phase);
  }
  if (kind == "piecewise_linear") return piecewise_linear(require_vector(spec, "knots"), require_vector(spec, "values"));
  throw ConfigError("model component: unknown kind '" + kind + "'");
}

AdditiveModel::AdditiveModel(std::size_t p, std::size_t informative, double noise_sigma,
                             std::vector<Component> components)
    : components_(std::move(components)), informative_(informative), noise_sigma_(noise_sigma) {
  if (p == 0) throw ConfigError("model: p must be at least 1");
  if (informative > p) throw ConfigError("model: S must not exceed p");
  if (!std::isfinite(noise_sigma) || noise_sigma < 0.0) throw ConfigError("model: noise_sigma must be finite and >= 0");
  if (components_.size() != informative && components_.size() != p)
    throw ConfigError("model: expected S or p components, got " + std::to_string(components_.size()));
  for (std::size_t j = informative; j < components_.size(); ++j)
    if (!components_[j].is_zero())
      throw ConfigError("model: component " + std::to_string(j + 1) + " lies beyond S and must be zero");
  components_.resize(p, Component::zero());
}

double AdditiveModel::regression(std::span<const double> x) const {
  double total = 0.0;
  for (std::size_t j = 0; j < informative_; ++j) total += components_[j].value(x[j]);
  return total;
}

double AdditiveModel::total_range() const {
  double total = 0.0;
  for (const auto& c : components_) {
    const auto [lo, hi] = c.range(0.0, 1.0);
    total += hi - lo;
  }
  return total;
}

bool AdditiveModel::is_constant() const {
  return std::all_of(components_.begin(), components_.end(), [](const Component& c) { return c.is_constant(); });
}

AdditiveModel AdditiveModel::with_noise(double sigma) const {
  return AdditiveModel(dimension(), informative_, sigma, components_);
}

nlohmann::json AdditiveModel::to_json() const {
  nlohmann::json components = nlohmann::json::array();
  for (std::size_t j = 0; j < informative_; ++j) components.push_back(components_[j].to_json());
  return {{"p", dimension()}, {"S", informative_}, {"noise_sigma", noise_sigma_}, {"components", components}};
}

AdditiveModel AdditiveModel::from_json(const nlohmann::json& spec) {
  if (!spec.is_object()) throw ConfigError("model: expected a JSON object");
  if (!spec.contains("p") || !spec.at("p").is_number_unsigned()) throw ConfigError("model: missing positive integer 'p'");
  if (!spec.contains("components") || !spec.at("components").is_array())
    throw ConfigError("model: missing array 'components'");
  const auto p = spec.at("p").get<std::size_t>();
  std::vector<Component> components;
  for (const auto& c : spec.at("components")) components.push_back(Component::from_json(c));
  std::size_t informative = components.size();
  if (spec.contains("S")) {
    if (!spec.at("S").is_number_unsigned()) throw ConfigError("model: 'S' must be a non-negative integer");
    informative = spec.at("S").get<std::size_t>();
  }
  double sigma = 0.0;
  if (spec.contains("noise_sigma")) {
    if (!spec.at("noise_sigma").is_number()) throw ConfigError("model: 'noise_sigma' must be a number");
    sigma = spec.at("noise_sigma").get<double>();
  }
  return AdditiveModel(p, informative, sigma, std::move(components));
}

AdditiveModel AdditiveModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("model file not found or unreadable: " + path.string());
  nlohmann::json spec;
  try {
    spec = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("model file " + path.string() + ": " + e.what(), 0);
  }
  return from_json(spec);
}

}  // namespace cartforest
