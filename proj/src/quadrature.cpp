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

#include "cartforest/quadrature.hpp"

#include <cmath>

namespace cartforest {

namespace {

double simpson_step(const std::function<double(double)>& f, double a, double fa, double b, double fb,
                    double m, double fm, double whole, double tolerance, int depth) {
  const double left_mid = 0.5 * (a + m);
  const double right_mid = 0.5 * (m + b);
  const double f_left_mid = f(left_mid);
  const double f_right_mid = f(right_mid);
  const double left = (m - a) / 6.0 * (fa + 4.0 * f_left_mid + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * f_right_mid + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * tolerance) return left + right + delta / 15.0;
  return simpson_step(f, a, fa, m, fm, left_mid, f_left_mid, left, 0.5 * tolerance, depth - 1) +
         simpson_step(f, m, fm, b, fb, right_mid, f_right_mid, right, 0.5 * tolerance, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double abs_tolerance, int max_depth) {
  if (a == b) return 0.0;
  const double fa = f(a);
  const double fb = f(b);
  const double m = 0.5 * (a + b);
  const double fm = f(m);
  // A single Simpson panel can be exact by accident on oscillating integrands
  // (e.g. a sine sampled at its zeros); always split once.
  const double left_mid = 0.5 * (a + m);
  const double right_mid = 0.5 * (m + b);
  const double fl = f(left_mid);
  const double fr = f(right_mid);
  const double left = (m - a) / 6.0 * (fa + 4.0 * fl + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * fr + fb);
  return simpson_step(f, a, fa, m, fm, left_mid, fl, left, 0.5 * abs_tolerance, max_depth) +
         simpson_step(f, m, fm, b, fb, right_mid, fr, right, 0.5 * abs_tolerance, max_depth);
}

}  // namespace cartforest
