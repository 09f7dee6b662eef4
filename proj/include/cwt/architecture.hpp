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

// Declarative description of a fully convolutional segmentation network.
//
// Canonical text form, one descriptor per line:
//
//   cwt-architecture 1
//   input_channels <n>
//   window <lo> <hi>               fixed intensity window onto [0, 1]
//   conv <out_channels> <k>        same-padded k x k convolution, k odd
//   relu | sigmoid
//   avgpool <k> | maxpool <k>      stride-k pooling, floor edge handling
//   upsample <k>                   nearest-neighbour upsampling
//   avgpool_same <k>               stride-1 centred average pooling
//   inception                      parallel branches on the same input,
//   branch <desc> | <desc> ...     concatenated along channels in order
//   end
//
// Blank lines and '#' comments are ignored when parsing. The hash used by
// checkpoints is the SHA-256 of the canonical rendering, so formatting
// differences in a source file do not change it.

#include <cstddef>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cwt/digest.hpp"
#include "cwt/ops.hpp"

namespace cwt {

struct ConvDesc {
  std::size_t out_channels = 1;
  std::size_t kernel = 1;
  friend bool operator==(const ConvDesc&, const ConvDesc&) = default;
};
struct ReluDesc {
  friend bool operator==(const ReluDesc&, const ReluDesc&) = default;
};
struct SigmoidDesc {
  friend bool operator==(const SigmoidDesc&, const SigmoidDesc&) = default;
};
struct PoolDesc {
  ops::PoolKind kind = ops::PoolKind::kMax;
  std::size_t k = 2;
  friend bool operator==(const PoolDesc&, const PoolDesc&) = default;
};
struct AvgPoolSameDesc {
  std::size_t k = 3;
  friend bool operator==(const AvgPoolSameDesc&, const AvgPoolSameDesc&) = default;
};
struct UpsampleDesc {
  std::size_t k = 2;
  friend bool operator==(const UpsampleDesc&, const UpsampleDesc&) = default;
};
struct WindowDesc {
  float lo = 0.0f;
  float hi = 1.0f;
  friend bool operator==(const WindowDesc&, const WindowDesc&) = default;
};

struct LayerDesc;

struct InceptionDesc {
  std::vector<std::vector<LayerDesc>> branches;
  friend bool operator==(const InceptionDesc&, const InceptionDesc&);
};

struct LayerDesc {
  std::variant<ConvDesc, ReluDesc, SigmoidDesc, PoolDesc, AvgPoolSameDesc,
               UpsampleDesc, WindowDesc, InceptionDesc>
      op;
  friend bool operator==(const LayerDesc&, const LayerDesc&) = default;
};

inline bool operator==(const InceptionDesc& a, const InceptionDesc& b) {
  return a.branches == b.branches;
}

struct ArchitectureSpec {
  std::size_t input_channels = 1;
  std::vector<LayerDesc> layers;
  friend bool operator==(const ArchitectureSpec&, const ArchitectureSpec&) = default;
};

namespace layers {
inline LayerDesc conv(std::size_t out, std::size_t k) { return {ConvDesc{out, k}}; }
inline LayerDesc relu() { return {ReluDesc{}}; }
inline LayerDesc sigmoid() { return {SigmoidDesc{}}; }
inline LayerDesc avgpool(std::size_t k) { return {PoolDesc{ops::PoolKind::kAvg, k}}; }
inline LayerDesc maxpool(std::size_t k) { return {PoolDesc{ops::PoolKind::kMax, k}}; }
inline LayerDesc avgpool_same(std::size_t k) { return {AvgPoolSameDesc{k}}; }
inline LayerDesc upsample(std::size_t k) { return {UpsampleDesc{k}}; }
inline LayerDesc window(float lo, float hi) { return {WindowDesc{lo, hi}}; }
inline LayerDesc inception(std::vector<std::vector<LayerDesc>> branches) {
  return {InceptionDesc{std::move(branches)}};
}
}  // namespace layers

/// Throws ValidationError naming the offending descriptor path, e.g.
/// "layers[3] inception branch[1][2]: conv kernel 4 must be odd".
void validate(const ArchitectureSpec& spec);

std::string canonical_text(const ArchitectureSpec& spec);
ArchitectureSpec parse_architecture(std::string_view text);
Digest architecture_hash(const ArchitectureSpec& spec);

/// Main-path spatial granularity: input extents must be multiples of this
/// (product of the pooling factors on the main path).
std::size_t spatial_multiple(const ArchitectureSpec& spec);

/// The default segmentation network: a windowed stem convolution, two
/// modified Inception blocks separated by a 3x3 convolution, a 3x3 head and a
/// 1x1 sigmoid output. Channel widths are divided by width_divisor (minimum
/// one channel) for the scaled-down CI profile.
ArchitectureSpec reference_architecture(std::size_t width_divisor = 1);

/// Modified Inception block: 1x1 | 1x1->3x3 | 1x1->5x5 | avgpool_same(3)->1x1,
/// ReLU after every convolution.
LayerDesc modified_inception(std::size_t branch_width);

}  // namespace cwt
