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
#include <memory>
#include <string>
#include <vector>

#include "cwt/tensor.hpp"
#include "cwt/volume.hpp"

namespace cwt {

/// Top-left corner of a square patch on axial slice z.
struct PatchRef {
  std::uint32_t z = 0, y = 0, x = 0;
  friend bool operator==(const PatchRef&, const PatchRef&) = default;
};

struct PatchOptions {
  std::size_t count = 1000;
  std::size_t size = 255;
  double lesion_fraction = 0.5;
  std::size_t max_rejections = 200;
};

/// Patches are views into one shared source volume; tensors are cut on demand.
struct PatchSet {
  std::size_t size = 0;
  std::string volume_id;
  std::uint64_t seed = 0;
  std::shared_ptr<const VolumeImage> image;
  std::shared_ptr<const SegmentationMask> mask;
  std::vector<PatchRef> training;
  std::vector<PatchRef> validation;

  Tensor image_patch(const PatchRef& r) const;
  Tensor mask_patch(const PatchRef& r) const;
};

/// Centres are drawn from brain voxels; lesion_fraction of the patches are
/// resampled until they contain a lesion voxel. The last 20% of the shuffled
/// order (rounded down) is held out for validation.
PatchSet extract_patches(std::shared_ptr<const VolumeImage> image,
                         std::shared_ptr<const SegmentationMask> mask,
                         const PatchOptions& options, std::uint64_t seed,
                         std::string volume_id = {});

inline constexpr float kBrainThresholdHu = -500.0f;

}  // namespace cwt
