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

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cwt/checkpoint.hpp"

namespace cwt {

/// Early-stopping rule: a loss counts as an improvement only when it is
/// strictly below best - min_delta.
class ConvergenceMonitor {
 public:
  explicit ConvergenceMonitor(double min_delta = 1e-4, std::size_t patience = 10);

  /// Incorporates a loss; true once epochs_since_improvement >= patience.
  bool observe(double loss);

  bool converged() const noexcept { return since_ >= patience_; }
  std::optional<double> best() const noexcept { return best_; }
  std::size_t epochs_since_improvement() const noexcept { return since_; }
  double min_delta() const noexcept { return min_delta_; }
  std::size_t patience() const noexcept { return patience_; }

 private:
  double min_delta_;
  std::size_t patience_;
  std::optional<double> best_;
  std::size_t since_ = 0;
};

enum class ConvergenceMode {
  kGlobal,   // one monitor over the interleaved multi-site stream
  kPerSite,  // one monitor per site; converged when every site has fired
};

std::string to_string(ConvergenceMode mode);
ConvergenceMode parse_convergence_mode(const std::string& text);

/// Replays a checkpoint history. For kPerSite, roster lists the sites that
/// must all have converged.
bool history_converged(std::span<const SiteEpoch> history, ConvergenceMode mode, double min_delta,
                       std::size_t patience, std::span<const std::string> roster);

}  // namespace cwt
