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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cwt/adam.hpp"
#include "cwt/digest.hpp"
#include "cwt/network.hpp"

namespace cwt {

struct SiteEpoch {
  std::string site_id;
  std::uint32_t epoch = 0;
  double validation_loss = 0.0;
  friend bool operator==(const SiteEpoch&, const SiteEpoch&) = default;
};

struct NamedTensor {
  std::string name;
  Tensor tensor;
  friend bool operator==(const NamedTensor&, const NamedTensor&) = default;
};

/// Binary layout, little-endian:
///   "MSLW" | u32 version | 32-byte architecture hash | u32 global_epoch |
///   u32 n, n x (u16 len, site id, u32 epoch, f64 loss) |
///   u32 m, m x (u16 len, name, u8 ndim, ndim x u32, f32 payload) | u32 crc32
/// global_epoch counts completed epochs. Optimizer moments travel as
/// "adam.m.<param>" / "adam.v.<param>" plus "adam.step" (two 24-bit halves).
struct Checkpoint {
  std::uint32_t version = 1;
  Digest architecture_hash{};
  std::uint32_t global_epoch = 0;
  std::vector<SiteEpoch> history;
  std::vector<NamedTensor> tensors;
  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

Bytes serialize(const Checkpoint& c);
Checkpoint parse_checkpoint(std::span<const std::uint8_t> bytes);

/// Snapshot of weights (and optimizer state, if given). Throws NumericError
/// on non-finite weights.
Checkpoint make_checkpoint(const Network& net, const AdamState* adam, std::uint32_t global_epoch,
                           std::vector<SiteEpoch> history);

struct Restored {
  Network network;
  AdamState adam;
};

/// Rebuilds a network for the expected architecture. Missing optimizer
/// tensors yield a fresh optimizer state.
Restored restore(const Checkpoint& c, const ArchitectureSpec& expected, const AdamConfig& adam);

Bytes save_checkpoint(const Network& net, const AdamState* adam, std::uint32_t global_epoch,
                      std::vector<SiteEpoch> history);
Restored load_checkpoint(std::span<const std::uint8_t> bytes, const ArchitectureSpec& expected,
                         const AdamConfig& adam = {});

}  // namespace cwt
