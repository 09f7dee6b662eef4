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
#include <span>

#include "cwt/adam.hpp"
#include "cwt/network.hpp"
#include "cwt/patches.hpp"
#include "cwt/volume.hpp"

namespace cwt {

struct TrainReport {
  std::size_t epoch = 0;
  double train_loss = 0.0;       // mean of per-batch pooled cDC losses
  double validation_loss = 0.0;  // pooled over all validation patches
  double wall_seconds = 0.0;
};

/// One pass over every training patch of every set in a seeded order. Each
/// batch pools its cDC terms into a single loss before one Adam update.
TrainReport train_epoch(Network& net, AdamState& adam, std::span<const PatchSet> data,
                        std::size_t batch_size, std::uint64_t shuffle_seed, std::size_t epoch);

/// Pooled cDC loss over all validation patches, read-only. Falls back to the
/// training patches when no set has a validation split.
double validation_loss(const Network& net, std::span<const PatchSet> data);

/// Slice-wise inference; voxel = 1 iff probability >= threshold.
SegmentationMask predict_volume(const Network& net, const VolumeImage& volume,
                                double threshold = 0.5);

}  // namespace cwt
