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

#include "cwt/patches.hpp"

#include <algorithm>
#include <string>

#include "cwt/error.hpp"
#include "cwt/rng.hpp"

namespace cwt {
namespace {

// Per-slice 2-D prefix sums of the mask for O(1) "contains lesion" queries.
class LesionIndex {
 public:
  explicit LesionIndex(const SegmentationMask& m)
      : nx_(m.dims[0]), ny_(m.dims[1]), sums_((nx_ + 1) * (ny_ + 1) * m.dims[2], 0) {
    for (std::size_t z = 0; z < m.dims[2]; ++z) {
      std::uint32_t* s = sums_.data() + z * (nx_ + 1) * (ny_ + 1);
      for (std::size_t y = 0; y < ny_; ++y) {
        std::uint32_t row = 0;
        for (std::size_t x = 0; x < nx_; ++x) {
          row += m.voxels[m.index(x, y, z)];
          s[(y + 1) * (nx_ + 1) + x + 1] = s[y * (nx_ + 1) + x + 1] + row;
        }
      }
    }
  }

  std::uint32_t count(const PatchRef& r, std::size_t size) const {
    const std::uint32_t* s = sums_.data() + r.z * (nx_ + 1) * (ny_ + 1);
    const std::size_t x0 = r.x, y0 = r.y, x1 = r.x + size, y1 = r.y + size;
    return s[y1 * (nx_ + 1) + x1] - s[y0 * (nx_ + 1) + x1] - s[y1 * (nx_ + 1) + x0] +
           s[y0 * (nx_ + 1) + x0];
  }

 private:
  std::size_t nx_, ny_;
  std::vector<std::uint32_t> sums_;
};

std::uint32_t corner(std::size_t centre, std::size_t size, std::size_t extent) {
  const std::size_t half = size / 2;
  const std::size_t lo = centre > half ? centre - half : 0;
  return static_cast<std::uint32_t>(std::min(lo, extent - size));
}

template <typename T>
Tensor cut(const std::vector<T>& voxels, const Dims3& dims, const PatchRef& r, std::size_t size) {
  if (r.z >= dims[2] || r.y + size > dims[1] || r.x + size > dims[0]) {
    throw ContractViolation("patch at z=" + std::to_string(r.z) + " y=" + std::to_string(r.y) +
                            " x=" + std::to_string(r.x) + " leaves the volume");
  }
  Tensor t({1, size, size});
  float* out = t.data();
  for (std::size_t y = 0; y < size; ++y) {
    const std::size_t row = (static_cast<std::size_t>(r.z) * dims[1] + r.y + y) * dims[0] + r.x;
    for (std::size_t x = 0; x < size; ++x) out[y * size + x] = static_cast<float>(voxels[row + x]);
  }
  return t;
}

}  // namespace

Tensor PatchSet::image_patch(const PatchRef& r) const { return cut(image->voxels, image->dims, r, size); }
Tensor PatchSet::mask_patch(const PatchRef& r) const { return cut(mask->voxels, mask->dims, r, size); }

PatchSet extract_patches(std::shared_ptr<const VolumeImage> image,
                         std::shared_ptr<const SegmentationMask> mask,
                         const PatchOptions& options, std::uint64_t seed, std::string volume_id) {
  if (!image || !mask) throw ContractViolation("extract_patches: missing volume or mask");
  require_congruent(*image, *mask);
  const Dims3& d = image->dims;
  if (options.size == 0 || d[0] < options.size || d[1] < options.size) {
    throw ContractViolation("extract_patches: slice " + std::to_string(d[0]) + "x" +
                            std::to_string(d[1]) + " is smaller than patch size " +
                            std::to_string(options.size));
  }
  if (options.count == 0) throw ContractViolation("extract_patches: patch count is zero");
  if (!(options.lesion_fraction >= 0.0 && options.lesion_fraction <= 1.0)) {
    throw ContractViolation("extract_patches: lesion fraction outside [0, 1]");
  }

  std::vector<std::size_t> brain, lesion;
  for (std::size_t i = 0; i < image->voxels.size(); ++i) {
    if (image->voxels[i] > kBrainThresholdHu) brain.push_back(i);
    if (mask->voxels[i]) lesion.push_back(i);
  }
  if (brain.empty()) {
    for (std::size_t i = 0; i < image->voxels.size(); ++i) brain.push_back(i);
  }

  const LesionIndex index(*mask);
  Rng rng(seed);
  auto ref_at = [&](std::size_t voxel) {
    const std::size_t x = voxel % d[0], y = (voxel / d[0]) % d[1], z = voxel / (d[0] * d[1]);
    return PatchRef{static_cast<std::uint32_t>(z), corner(y, options.size, d[1]),
                    corner(x, options.size, d[0])};
  };
  auto draw_brain = [&] { return ref_at(brain[static_cast<std::size_t>(rng.below(brain.size()))]); };

  const auto wanted = static_cast<std::size_t>(
      std::llround(options.lesion_fraction * static_cast<double>(options.count)));
  std::vector<PatchRef> refs;
  refs.reserve(options.count);
  for (std::size_t i = 0; i < options.count; ++i) {
    PatchRef r = draw_brain();
    if (i < wanted && !lesion.empty()) {
      std::size_t tries = 0;
      while (index.count(r, options.size) == 0 && tries++ < options.max_rejections) r = draw_brain();
      if (index.count(r, options.size) == 0) {
        r = ref_at(lesion[static_cast<std::size_t>(rng.below(lesion.size()))]);
      }
    }
    refs.push_back(r);
  }
  rng.shuffle(std::span(refs));

  PatchSet set;
  set.size = options.size;
  set.volume_id = std::move(volume_id);
  set.seed = seed;
  set.image = std::move(image);
  set.mask = std::move(mask);
  const std::size_t held_out = options.count / 5;
  const auto split = static_cast<std::ptrdiff_t>(options.count - held_out);
  set.training.assign(refs.begin(), refs.begin() + split);
  set.validation.assign(refs.begin() + split, refs.end());
  return set;
}

}  // namespace cwt
