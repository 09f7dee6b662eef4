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

#include "cwt/volume.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cwt/error.hpp"

namespace cwt {
namespace {

std::string dims_text(const Dims3& d) {
  return std::to_string(d[0]) + "x" + std::to_string(d[1]) + "x" + std::to_string(d[2]);
}

void check_geometry(const Dims3& d, const Spacing3& s, std::size_t n, const char* what) {
  for (std::size_t i = 0; i < 3; ++i) {
    if (d[i] == 0) throw ValidationError(std::string(what) + ": zero extent in dims " + dims_text(d));
    if (!(s[i] > 0.0f) || !std::isfinite(s[i])) {
      throw ValidationError(std::string(what) + ": spacing must be positive and finite");
    }
  }
  if (n != d[0] * d[1] * d[2]) {
    throw ValidationError(std::string(what) + ": " + std::to_string(n) +
                          " voxels for dims " + dims_text(d));
  }
}

}  // namespace

VolumeImage::VolumeImage(Dims3 d, Spacing3 s, float fill)
    : dims(d), spacing_mm(s), voxels(d[0] * d[1] * d[2], fill) {
  validate(*this);
}

SegmentationMask::SegmentationMask(Dims3 d, Spacing3 s)
    : dims(d), spacing_mm(s), voxels(d[0] * d[1] * d[2], 0) {
  validate(*this);
}

std::size_t SegmentationMask::count() const noexcept {
  return static_cast<std::size_t>(std::count(voxels.begin(), voxels.end(), std::uint8_t{1}));
}

void validate(const VolumeImage& v) {
  check_geometry(v.dims, v.spacing_mm, v.voxels.size(), "volume");
}

void validate(const SegmentationMask& m) {
  check_geometry(m.dims, m.spacing_mm, m.voxels.size(), "mask");
  for (const std::uint8_t x : m.voxels) {
    if (x > 1) throw ValidationError("mask: voxel value " + std::to_string(x) + " is not 0 or 1");
  }
}

void require_congruent(const VolumeImage& v, const SegmentationMask& m) {
  if (v.dims != m.dims || v.spacing_mm != m.spacing_mm) {
    throw ContractViolation("mask geometry " + dims_text(m.dims) +
                            " does not match volume " + dims_text(v.dims));
  }
}

void require_congruent(const SegmentationMask& a, const SegmentationMask& b) {
  if (a.dims != b.dims) {
    throw ContractViolation("mask dims " + dims_text(a.dims) + " vs " + dims_text(b.dims));
  }
}

double lesion_volume_mm3(const SegmentationMask& m) {
  const double voxel = static_cast<double>(m.spacing_mm[0]) * m.spacing_mm[1] * m.spacing_mm[2];
  return static_cast<double>(m.count()) * voxel;
}

Tensor axial_slice(const VolumeImage& v, std::size_t z) {
  if (z >= v.dims[2]) {
    throw ContractViolation("axial slice " + std::to_string(z) + " outside " + dims_text(v.dims));
  }
  const auto first = v.voxels.begin() + static_cast<std::ptrdiff_t>(z * v.slice_size());
  return Tensor({1, v.dims[1], v.dims[0]},
                std::vector<float>(first, first + static_cast<std::ptrdiff_t>(v.slice_size())));
}

}  // namespace cwt
