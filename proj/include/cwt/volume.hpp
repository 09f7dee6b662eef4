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

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "cwt/tensor.hpp"

namespace cwt {

using Dims3 = std::array<std::size_t, 3>;
using Spacing3 = std::array<float, 3>;

/// Scalar CT volume in Hounsfield units, x fastest, then y, then z.
struct VolumeImage {
  Dims3 dims{1, 1, 1};
  Spacing3 spacing_mm{1.0f, 1.0f, 1.0f};
  std::vector<float> voxels;

  VolumeImage() = default;
  VolumeImage(Dims3 d, Spacing3 s, float fill = 0.0f);

  std::size_t index(std::size_t x, std::size_t y, std::size_t z) const noexcept {
    return (z * dims[1] + y) * dims[0] + x;
  }
  std::size_t slice_size() const noexcept { return dims[0] * dims[1]; }

  friend bool operator==(const VolumeImage&, const VolumeImage&) = default;
};

struct SegmentationMask {
  Dims3 dims{1, 1, 1};
  Spacing3 spacing_mm{1.0f, 1.0f, 1.0f};
  std::vector<std::uint8_t> voxels;

  SegmentationMask() = default;
  SegmentationMask(Dims3 d, Spacing3 s);

  std::size_t index(std::size_t x, std::size_t y, std::size_t z) const noexcept {
    return (z * dims[1] + y) * dims[0] + x;
  }
  std::size_t slice_size() const noexcept { return dims[0] * dims[1]; }
  std::size_t count() const noexcept;

  friend bool operator==(const SegmentationMask&, const SegmentationMask&) = default;
};

void validate(const VolumeImage& v);
void validate(const SegmentationMask& m);
void require_congruent(const VolumeImage& v, const SegmentationMask& m);
void require_congruent(const SegmentationMask& a, const SegmentationMask& b);

double lesion_volume_mm3(const SegmentationMask& m);

/// Axial slice z as a [1, ny, nx] tensor.
Tensor axial_slice(const VolumeImage& v, std::size_t z);

}  // namespace cwt
