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

#include "cwt/nifti.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <string>

#include "cwt/error.hpp"

namespace cwt {
namespace {

constexpr std::size_t kDimOffset = 40;
constexpr std::size_t kDatatypeOffset = 70;
constexpr std::size_t kBitpixOffset = 72;
constexpr std::size_t kPixdimOffset = 76;
constexpr std::size_t kVoxOffsetOffset = 108;
constexpr std::size_t kSlopeOffset = 112;
constexpr std::size_t kInterOffset = 116;
constexpr std::size_t kXyztUnitsOffset = 123;
constexpr std::size_t kMagicOffset = 344;

constexpr std::int16_t kUint8 = 2;
constexpr std::int16_t kInt16 = 4;
constexpr std::int16_t kFloat32 = 16;

[[noreturn]] void fail(const std::string& field, std::size_t offset, const std::string& detail) {
  throw ParseError("nifti", field, offset, detail);
}

class Reader {
 public:
  Reader(std::span<const std::uint8_t> bytes, bool swap) : bytes_(bytes), swap_(swap) {}

  template <typename T>
  T get(std::size_t offset) const {
    std::array<std::uint8_t, sizeof(T)> raw{};
    std::memcpy(raw.data(), bytes_.data() + offset, sizeof(T));
    if (swap_) std::reverse(raw.begin(), raw.end());
    return std::bit_cast<T>(raw);
  }

 private:
  std::span<const std::uint8_t> bytes_;
  bool swap_;
};

class Writer {
 public:
  explicit Writer(Bytes& out) : out_(out) {}

  template <typename T>
  void put(std::size_t offset, T value) {
    const auto raw = std::bit_cast<std::array<std::uint8_t, sizeof(T)>>(value);
    if constexpr (std::endian::native == std::endian::big) {
      std::copy(raw.rbegin(), raw.rend(), out_.begin() + static_cast<std::ptrdiff_t>(offset));
    } else {
      std::copy(raw.begin(), raw.end(), out_.begin() + static_cast<std::ptrdiff_t>(offset));
    }
  }

 private:
  Bytes& out_;
};

Bytes header(const Dims3& dims, const Spacing3& spacing, std::int16_t datatype,
             std::int16_t bitpix, std::size_t payload) {
  Bytes out(kNiftiVoxOffset + payload, 0);
  Writer w(out);
  w.put<std::int32_t>(0, static_cast<std::int32_t>(kNiftiHeaderSize));
  w.put<std::int16_t>(kDimOffset, 3);
  for (std::size_t i = 0; i < 3; ++i) {
    w.put<std::int16_t>(kDimOffset + 2 * (i + 1), static_cast<std::int16_t>(dims[i]));
  }
  for (std::size_t i = 4; i < 8; ++i) w.put<std::int16_t>(kDimOffset + 2 * i, 1);
  w.put<std::int16_t>(kDatatypeOffset, datatype);
  w.put<std::int16_t>(kBitpixOffset, bitpix);
  w.put<float>(kPixdimOffset, 1.0f);
  for (std::size_t i = 0; i < 3; ++i) w.put<float>(kPixdimOffset + 4 * (i + 1), spacing[i]);
  w.put<float>(kVoxOffsetOffset, static_cast<float>(kNiftiVoxOffset));
  w.put<float>(kSlopeOffset, 1.0f);
  w.put<float>(kInterOffset, 0.0f);
  out[kXyztUnitsOffset] = 2;  // millimetres
  std::memcpy(out.data() + kMagicOffset, "n+1\0", 4);
  return out;
}

void check_writable_dims(const Dims3& dims) {
  for (const std::size_t d : dims) {
    if (d > 32767) throw ContractViolation("nifti: extent " + std::to_string(d) + " exceeds int16 range");
  }
}

}  // namespace

VolumeImage parse_nifti(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kNiftiHeaderSize) {
    fail("sizeof_hdr", 0, "stream of " + std::to_string(bytes.size()) +
                              " bytes is shorter than the 348-byte header");
  }
  // The sentinel reads as 348 only in the file's own byte order.
  bool swap = false;
  if (Reader(bytes, false).get<std::int32_t>(0) != 348) {
    if (Reader(bytes, true).get<std::int32_t>(0) != 348) {
      fail("sizeof_hdr", 0, "expected 348 in either byte order");
    }
    swap = true;
  }
  const Reader r(bytes, swap);

  if (std::memcmp(bytes.data() + kMagicOffset, "n+1\0", 4) != 0) {
    if (std::memcmp(bytes.data() + kMagicOffset, "ni1\0", 4) == 0) {
      fail("magic", kMagicOffset, "header/image pairs are not supported");
    }
    fail("magic", kMagicOffset, "expected \"n+1\0\"");
  }

  const auto ndim = r.get<std::int16_t>(kDimOffset);
  if (ndim < 3 || ndim > 7) {
    fail("dim[0]", kDimOffset, "expected a 3-D volume, got dim[0]=" + std::to_string(ndim));
  }
  Dims3 dims{};
  for (std::size_t i = 0; i < 3; ++i) {
    const auto d = r.get<std::int16_t>(kDimOffset + 2 * (i + 1));
    if (d < 1) {
      fail("dim[" + std::to_string(i + 1) + "]", kDimOffset + 2 * (i + 1),
           "extent " + std::to_string(d) + " is not positive");
    }
    dims[i] = static_cast<std::size_t>(d);
  }
  for (std::size_t i = 4; i <= static_cast<std::size_t>(ndim); ++i) {
    if (r.get<std::int16_t>(kDimOffset + 2 * i) != 1) {
      fail("dim[" + std::to_string(i) + "]", kDimOffset + 2 * i, "only single-frame volumes are supported");
    }
  }

  const auto datatype = r.get<std::int16_t>(kDatatypeOffset);
  std::int16_t expected_bitpix = 0;
  switch (datatype) {
    case kUint8: expected_bitpix = 8; break;
    case kInt16: expected_bitpix = 16; break;
    case kFloat32: expected_bitpix = 32; break;
    default:
      fail("datatype", kDatatypeOffset, "unsupported datatype code " + std::to_string(datatype));
  }
  const auto bitpix = r.get<std::int16_t>(kBitpixOffset);
  if (bitpix != expected_bitpix) {
    fail("bitpix", kBitpixOffset, std::to_string(bitpix) + " does not match datatype " +
                                      std::to_string(datatype));
  }

  Spacing3 spacing{};
  for (std::size_t i = 0; i < 3; ++i) {
    const std::size_t off = kPixdimOffset + 4 * (i + 1);
    const float s = r.get<float>(off);
    if (!(s > 0.0f) || !std::isfinite(s)) {
      fail("pixdim[" + std::to_string(i + 1) + "]", off, "voxel spacing must be positive");
    }
    spacing[i] = s;
  }

  const float vox_offset = r.get<float>(kVoxOffsetOffset);
  if (!std::isfinite(vox_offset) || vox_offset < static_cast<float>(kNiftiVoxOffset) ||
      vox_offset != std::floor(vox_offset)) {
    fail("vox_offset", kVoxOffsetOffset, "must be an integer >= 352");
  }
  float slope = r.get<float>(kSlopeOffset);
  const float inter = r.get<float>(kInterOffset);
  if (slope == 0.0f) slope = 1.0f;
  if (!std::isfinite(slope)) fail("scl_slope", kSlopeOffset, "not finite");
  if (!std::isfinite(inter)) fail("scl_inter", kInterOffset, "not finite");

  const auto data_start = static_cast<std::size_t>(vox_offset);
  const std::size_t count = dims[0] * dims[1] * dims[2];
  const std::size_t width = static_cast<std::size_t>(bitpix) / 8;
  const std::size_t needed = count * width;
  if (data_start > bytes.size() || bytes.size() - data_start < needed) {
    fail("data", data_start, "truncated payload: need " + std::to_string(needed) + " bytes, have " +
                                 std::to_string(bytes.size() > data_start ? bytes.size() - data_start : 0));
  }

  VolumeImage v(dims, spacing);
  const bool identity = slope == 1.0f && inter == 0.0f;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t off = data_start + i * width;
    double raw = 0.0;
    switch (datatype) {
      case kUint8: raw = bytes[off]; break;
      case kInt16: raw = r.get<std::int16_t>(off); break;
      default: {
        const float f = r.get<float>(off);
        if (identity) {
          v.voxels[i] = f;
          continue;
        }
        raw = f;
      }
    }
    v.voxels[i] = static_cast<float>(raw * slope + inter);
  }
  return v;
}

SegmentationMask parse_nifti_mask(std::span<const std::uint8_t> bytes) {
  const VolumeImage v = parse_nifti(bytes);
  SegmentationMask m(v.dims, v.spacing_mm);
  for (std::size_t i = 0; i < v.voxels.size(); ++i) {
    const float x = v.voxels[i];
    if (x != 0.0f && x != 1.0f) {
      fail("data", kNiftiVoxOffset, "mask voxel " + std::to_string(i) + " has value " +
                                        std::to_string(x) + ", expected 0 or 1");
    }
    m.voxels[i] = x == 1.0f ? 1 : 0;
  }
  return m;
}

Bytes write_nifti(const VolumeImage& volume) {
  validate(volume);
  check_writable_dims(volume.dims);
  Bytes out = header(volume.dims, volume.spacing_mm, kFloat32, 32, volume.voxels.size() * 4);
  Writer w(out);
  for (std::size_t i = 0; i < volume.voxels.size(); ++i) {
    w.put<float>(kNiftiVoxOffset + 4 * i, volume.voxels[i]);
  }
  return out;
}

Bytes write_nifti(const SegmentationMask& mask) {
  validate(mask);
  check_writable_dims(mask.dims);
  Bytes out = header(mask.dims, mask.spacing_mm, kUint8, 8, mask.voxels.size());
  std::copy(mask.voxels.begin(), mask.voxels.end(),
            out.begin() + static_cast<std::ptrdiff_t>(kNiftiVoxOffset));
  return out;
}

}  // namespace cwt
