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

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cwt/architecture.hpp"
#include "cwt/evaluation.hpp"
#include "cwt/patches.hpp"
#include "cwt/phantom.hpp"
#include "cwt/protocol.hpp"

namespace cwt {

namespace fs = std::filesystem;

struct SiteConfig {
  std::string id;
  std::size_t train_count = 0;
  std::size_t test_count = 0;
  /// Synthetic site when set; otherwise cases come from nifti_dir as
  /// <case>_image.nii / <case>_mask.nii.
  std::optional<SitePhantomParams> phantom;
  fs::path nifti_dir;
  std::vector<std::string> train_cases, test_cases;
};

struct ExperimentConfig {
  std::string profile = "ci";
  std::uint64_t master_seed = 1;
  std::size_t width_divisor = 4;           // reference architecture width
  std::optional<std::string> architecture_text;  // overrides width_divisor
  AdamConfig adam;
  std::size_t batch_size = 8;
  double threshold = 0.5;
  ProtocolOptions protocol;
  PatchOptions patches;
  std::vector<SiteConfig> sites;
  std::optional<fs::path> store;

  ArchitectureSpec architecture() const;
  const SiteConfig& site(const std::string& id) const;
  std::vector<std::string> roster() const;
};

/// Built-in profiles: "paper" (full-size volumes and the reference
/// network) and "ci" (small volumes, slim network, short patience).
ExperimentConfig profile_config(const std::string& name);

/// JSON document; "profile" selects the base and other keys override it.
ExperimentConfig config_from_json(const std::string& text,
                                  const std::optional<std::string>& profile_override = std::nullopt);
ExperimentConfig load_config(const fs::path& path,
                             const std::optional<std::string>& profile_override = std::nullopt);
std::string config_to_json(const ExperimentConfig& c);
void validate(const ExperimentConfig& c);

/// The derived seeds for one site's phantom volumes and patch sampling.
std::uint64_t phantom_seed(std::uint64_t master, const std::string& site);
std::uint64_t patch_seed(std::uint64_t master, const std::string& site, std::size_t volume_index);

struct CaseData {
  std::string id;
  std::size_t volume_index = 0;
  std::shared_ptr<const VolumeImage> image;
  std::shared_ptr<const SegmentationMask> mask;
};

struct SiteData {
  std::string id;
  std::vector<CaseData> train;
  std::vector<CaseData> test;
};

/// Phantom sites are generated in memory; NIfTI sites are read from disk.
SiteData materialize_site(const ExperimentConfig& c, const std::string& site_id);

/// Writes per-site NIfTI files and manifest.json; returns the manifest path.
fs::path generate_data(const ExperimentConfig& c, const fs::path& out_dir);
SiteData load_site(const ExperimentConfig& c, const fs::path& data_dir, const std::string& site_id);

std::vector<PatchSet> site_patches(const ExperimentConfig& c, const SiteData& site);
TestSet test_set(const SiteData& site);

using AuditCallback = std::function<void(const AuditRecord&)>;

SiteRuntime make_runtime(const ExperimentConfig& c, const SiteData& site, ExchangeStore* store,
                         AuditCallback audit = {});

Bytes train_ssl(const ExperimentConfig& c, const SiteData& site, AuditCallback audit = {});

/// One worker thread per site against a shared store. All workers must
/// finish with the same checkpoint.
Bytes train_msl(const ExperimentConfig& c, const std::vector<SiteData>& sites, ExchangeStore& store,
                AuditCallback audit = {});

/// Deployment mode: initializes the store if nobody has, then runs this
/// site's worker.
Bytes join_msl(const ExperimentConfig& c, const SiteData& site, ExchangeStore& store, AuditCallback audit = {});

struct ModelCheckpoint {
  std::string name;
  Bytes bytes;
};

EvaluationReport evaluate(const ExperimentConfig& c, const std::vector<ModelCheckpoint>& models,
                          const std::vector<SiteData>& sites, const MaskSink& sink = {});

/// report.csv, cases.csv, pvalues.csv and report.txt under out_dir.
void write_report(const EvaluationReport& r, const fs::path& out_dir);

}  // namespace cwt
