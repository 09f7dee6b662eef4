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

// Small experiment configurations shared by the protocol, pipeline and
// acceptance tests.

#pragma once

#include <algorithm>
#include <mutex>
#include <string>
#include <vector>

#include "cwt/experiment.hpp"

namespace cwt::fixture {

// Two phantom sites small enough for an epoch to take milliseconds.
inline ExperimentConfig tiny_experiment(std::uint64_t seed = 7) {
  ExperimentConfig c = profile_config("ci");
  c.master_seed = seed;
  c.width_divisor = 8;
  c.batch_size = 4;
  c.patches = PatchOptions{5, 16, 0.5, 200};
  c.protocol.patience = 2;
  c.protocol.max_epochs = 6;
  c.protocol.poll_interval = std::chrono::milliseconds(1);
  c.protocol.timeout = std::chrono::seconds(60);
  const std::pair<const char*, double> sites[] = {{"A", 120.0}, {"B", 360.0}};
  c.sites.clear();
  for (const auto& [id, median] : sites) {
    SiteConfig s;
    s.id = id;
    s.train_count = 2;
    s.test_count = 2;
    SitePhantomParams p;
    p.dims = {48, 48, 4};
    p.lesion_median_mm3 = median;
    p.lesion_log_sd = 0.25;
    s.phantom = p;
    c.sites.push_back(s);
  }
  validate(c);
  return c;
}

inline std::vector<SiteData> materialize_all(const ExperimentConfig& c) {
  std::vector<SiteData> out;
  for (const SiteConfig& s : c.sites) out.push_back(materialize_site(c, s.id));
  return out;
}

// Audit lines without the wall-clock field, merged across sites by global
// epoch. Workers report after their token swap, so arrival order at a
// shared callback can differ from epoch order.
struct AuditLog {
  std::mutex mutex;
  std::vector<AuditRecord> records;

  AuditCallback callback() {
    return [this](const AuditRecord& r) {
      std::lock_guard lock(mutex);
      records.push_back(r);
    };
  }

  std::vector<std::string> lines() {
    std::lock_guard lock(mutex);
    std::vector<AuditRecord> sorted = records;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const AuditRecord& a, const AuditRecord& b) { return a.epoch < b.epoch; });
    std::vector<std::string> out;
    for (AuditRecord r : sorted) {
      r.wall_seconds = 0.0;
      out.push_back(r.to_line());
    }
    return out;
  }
};

}  // namespace cwt::fixture
