// Copyright 2026 The CWT Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <span>
#include <string>
#include <vector>

#include "cwt/volume.hpp"

namespace cwt {

/// 2|A n B| / (|A| + |B|); two empty masks score 1.
double dice(const SegmentationMask& a, const SegmentationMask& b);
double dice(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b);

/// Product-moment correlation; throws UndefinedCorrelationError when either
/// input has zero variance.
double pearson(std::span<const double> x, std::span<const double> y);

struct PairedScore {
  std::string case_id;
  double a = 0.0;
  double b = 0.0;
};

struct WilcoxonResult {
  double statistic = 0.0;  // W+ - W-, negated when the models swap
  double w_plus = 0.0;
  double w_minus = 0.0;
  std::size_t n = 0;       // nonzero differences
  double p_value = 1.0;    // two-sided
  bool exact = true;
};

inline constexpr std::size_t kWilcoxonExactLimit = 25;

/// Signed-rank test on d = a - b. Zero differences are dropped, tied |d|
/// share their average rank. Exact null distribution up to 25 pairs, normal
/// approximation with tie correction above.
WilcoxonResult wilcoxon_signed_rank(std::span<const PairedScore> pairs);

}  // namespace cwt
