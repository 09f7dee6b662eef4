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

#include "cwt/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "cwt/error.hpp"

namespace cwt {

double dice(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  if (a.size() != b.size()) {
    throw ContractViolation("dice: masks hold " + std::to_string(a.size()) + " and " +
                            std::to_string(b.size()) + " voxels");
  }
  std::size_t na = 0, nb = 0, both = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    na += a[i];
    nb += b[i];
    both += a[i] & b[i];
  }
  if (na + nb == 0) return 1.0;
  return 2.0 * static_cast<double>(both) / static_cast<double>(na + nb);
}

double dice(const SegmentationMask& a, const SegmentationMask& b) {
  require_congruent(a, b);
  return dice(std::span<const std::uint8_t>(a.voxels), std::span<const std::uint8_t>(b.voxels));
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ContractViolation("pearson: inputs differ in length");
  if (x.size() < 3) throw ContractViolation("pearson: need at least 3 observations");
  const auto n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw UndefinedCorrelationError("pearson: zero variance in " + std::string(sxx == 0.0 ? "x" : "y"));
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

WilcoxonResult wilcoxon_signed_rank(std::span<const PairedScore> pairs) {
  std::set<std::string> ids;
  std::vector<double> d;
  for (const PairedScore& p : pairs) {
    if (!std::isfinite(p.a) || !std::isfinite(p.b)) {
      throw ContractViolation("wilcoxon: non-finite score for case " + p.case_id);
    }
    if (!ids.insert(p.case_id).second) throw ContractViolation("wilcoxon: duplicate case id " + p.case_id);
    if (p.a != p.b) d.push_back(p.a - p.b);
  }
  if (d.empty()) throw DegenerateSampleError("wilcoxon: all paired differences are zero");

  const std::size_t n = d.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return std::fabs(d[i]) < std::fabs(d[j]); });

  // Doubled ranks stay integral under tie averaging.
  std::vector<std::uint64_t> rank2(n);
  double tie_term = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && std::fabs(d[order[j + 1]]) == std::fabs(d[order[i]])) ++j;
    const std::uint64_t r2 = static_cast<std::uint64_t>(i + 1 + j + 1);
    for (std::size_t k = i; k <= j; ++k) rank2[order[k]] = r2;
    const auto t = static_cast<double>(j - i + 1);
    tie_term += t * t * t - t;
    i = j + 1;
  }

  WilcoxonResult r;
  r.n = n;
  std::uint64_t plus2 = 0, total2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    total2 += rank2[i];
    if (d[i] > 0.0) plus2 += rank2[i];
  }
  r.w_plus = static_cast<double>(plus2) / 2.0;
  r.w_minus = static_cast<double>(total2 - plus2) / 2.0;
  r.statistic = r.w_plus - r.w_minus;

  if (n <= kWilcoxonExactLimit) {
    // counts[s] = number of sign assignments with doubled W+ equal to s.
    std::vector<double> counts(total2 + 1, 0.0);
    counts[0] = 1.0;
    std::uint64_t reach = 0;
    for (const std::uint64_t w : rank2) {
      reach += w;
      for (std::uint64_t s = reach; s >= w; --s) {
        counts[s] += counts[s - w];
        if (s == w) break;
      }
    }
    double lower = 0.0, upper = 0.0;
    for (std::uint64_t s = 0; s <= total2; ++s) {
      if (s <= plus2) lower += counts[s];
      if (s >= plus2) upper += counts[s];
    }
    const double all = std::ldexp(1.0, static_cast<int>(n));
    r.p_value = std::min(1.0, 2.0 * std::min(lower, upper) / all);
    r.exact = true;
  } else {
    const auto nn = static_cast<double>(n);
    const double mean = nn * (nn + 1.0) / 4.0;
    const double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term / 48.0;
    const double z = var > 0.0 ? (r.w_plus - mean) / std::sqrt(var) : 0.0;
    r.p_value = std::min(1.0, std::erfc(std::fabs(z) / std::sqrt(2.0)));
    r.exact = false;
  }
  return r;
}

}  // namespace cwt
