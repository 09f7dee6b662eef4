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

#include "cwt/convergence.hpp"

#include <cmath>
#include <map>

#include "cwt/error.hpp"

namespace cwt {

ConvergenceMonitor::ConvergenceMonitor(double min_delta, std::size_t patience)
    : min_delta_(min_delta), patience_(patience) {
  if (!(min_delta >= 0.0) || !std::isfinite(min_delta)) {
    throw ContractViolation("convergence: min_delta must be finite and non-negative");
  }
  if (patience == 0) throw ContractViolation("convergence: patience must be positive");
}

bool ConvergenceMonitor::observe(double loss) {
  if (!std::isfinite(loss)) throw NumericError("convergence: non-finite validation loss");
  if (!best_ || loss < *best_ - min_delta_) {
    best_ = loss;
    since_ = 0;
  } else {
    ++since_;
  }
  return converged();
}

std::string to_string(ConvergenceMode mode) {
  return mode == ConvergenceMode::kGlobal ? "global" : "per_site";
}

ConvergenceMode parse_convergence_mode(const std::string& text) {
  if (text == "global") return ConvergenceMode::kGlobal;
  if (text == "per_site") return ConvergenceMode::kPerSite;
  throw ConfigError("unknown convergence mode '" + text + "' (expected global or per_site)");
}

bool history_converged(std::span<const SiteEpoch> history, ConvergenceMode mode, double min_delta,
                       std::size_t patience, std::span<const std::string> roster) {
  if (mode == ConvergenceMode::kGlobal) {
    ConvergenceMonitor m(min_delta, patience);
    bool fired = false;
    for (const SiteEpoch& h : history) fired = m.observe(h.validation_loss);
    return fired;
  }
  std::map<std::string, ConvergenceMonitor> monitors;
  for (const SiteEpoch& h : history) {
    monitors.try_emplace(h.site_id, min_delta, patience).first->second.observe(h.validation_loss);
  }
  for (const std::string& site : roster) {
    const auto it = monitors.find(site);
    if (it == monitors.end() || !it->second.converged()) return false;
  }
  return !roster.empty();
}

}  // namespace cwt
