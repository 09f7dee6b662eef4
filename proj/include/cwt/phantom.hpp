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

#include <cstdint>
#include <string>

#include "cwt/volume.hpp"

namespace cwt {

struct SitePhantomParams {
  std::string site_id = "site";
  std::size_t volume_count = 1;
  Dims3 dims{256, 256, 20};
  Spacing3 spacing_mm{0.5f, 0.5f, 5.0f};
  double lesion_median_mm3 = 13700.0;
  double lesion_log_sd = 0.5;
  std::size_t lesion_count_min = 1;
  std::size_t lesion_count_max = 3;
  double tissue_hu_mean = 30.0;
  double tissue_hu_sd = 5.0;
  double lesion_hu_min = 50.0;
  double lesion_hu_max = 90.0;
  double noise_sd = 3.0;
  std::uint64_t seed = 0;
};

void validate(const SitePhantomParams& p);

struct Phantom {
  VolumeImage image;
  SegmentationMask mask;
  double target_lesion_mm3 = 0.0;  // drawn from the site's log-normal
  /// Image values before additive noise, kept only when requested.
  std::vector<float> noiseless;
};

inline constexpr float kBackgroundHu = -1000.0f;

/// Skull-stripped head phantom: an ellipsoidal brain of smoothly varying
/// tissue density on air, with blobby hyperdense lesions. Deterministic in
/// (params, volume_index).
Phantom generate_phantom(const SitePhantomParams& params, std::size_t volume_index,
                         bool keep_noiseless = false);

}  // namespace cwt
