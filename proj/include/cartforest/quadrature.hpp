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

#include <functional>

namespace cartforest {

/// Adaptive Simpson integration of `f` over [a, b].
///
/// The interval is bisected until the Richardson-corrected local estimate
/// changes by less than 15 * tolerance, with the tolerance halved per level.
/// `max_depth` bounds recursion; reaching it returns the best estimate.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double abs_tolerance = 1e-10, int max_depth = 48);

}  // namespace cartforest
