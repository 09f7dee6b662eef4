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

#include "cwt/digest.hpp"
#include "cwt/volume.hpp"

namespace cwt {

// Single-file NIfTI-1 (.nii), uncompressed, no extensions. Reads int16,
// uint8 and float32 payloads in either byte order; writes little-endian.

VolumeImage parse_nifti(std::span<const std::uint8_t> bytes);

/// As parse_nifti, then requires every voxel to be exactly 0 or 1.
SegmentationMask parse_nifti_mask(std::span<const std::uint8_t> bytes);

Bytes write_nifti(const VolumeImage& volume);  // float32
Bytes write_nifti(const SegmentationMask& mask);  // uint8

inline constexpr std::size_t kNiftiHeaderSize = 348;
inline constexpr std::size_t kNiftiVoxOffset = 352;

}  // namespace cwt
