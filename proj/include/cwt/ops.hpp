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

// Differentiable kernels over single-image [C,H,W] tensors. Every forward
// op has a paired backward that takes the same primal inputs plus the
// upstream gradient and returns gradients congruent with the primals.

#include <cstddef>
#include <span>
#include <vector>

#include "cwt/tensor.hpp"

namespace cwt::ops {

enum class Padding { kSame, kValid };
enum class Activation { kRelu, kSigmoid };
enum class PoolKind { kAvg, kMax };

// Convolution (cross-correlation, no kernel flip). kernels: [Co,Ci,k,k] with
// odd k, bias: [Co]. Same padding zero-pads by (k-1)/2 on every side.
Tensor conv2d(const Tensor& input, const Tensor& kernels, const Tensor& bias,
              Padding padding);

struct ConvGrads {
  Tensor input;
  Tensor kernels;
  Tensor bias;
};

ConvGrads conv2d_backward(const Tensor& input, const Tensor& kernels,
                          const Tensor& upstream, Padding padding);

Tensor activation(const Tensor& x, Activation kind);
Tensor activation_backward(const Tensor& x, const Tensor& upstream,
                           Activation kind);

float sigmoid(float x) noexcept;

// Non-overlapping k x k windows with stride k. Partial edge windows are
// dropped, so output extents are floor(H/k) x floor(W/k).
Tensor pool2d(const Tensor& input, PoolKind kind, std::size_t k);
Tensor pool2d_backward(const Tensor& input, const Tensor& upstream,
                       PoolKind kind, std::size_t k);

// Stride-1 average pooling with a centred k x k window (k odd). Border
// windows average only the in-bounds elements.
Tensor avg_pool_same(const Tensor& input, std::size_t k);
Tensor avg_pool_same_backward(const Tensor& input, const Tensor& upstream,
                              std::size_t k);

// Nearest-neighbour upsampling by an integer factor.
Tensor upsample2d(const Tensor& input, std::size_t k);
Tensor upsample2d_backward(const Tensor& input, const Tensor& upstream,
                           std::size_t k);

// Fixed intensity window: clamp to [lo, hi] then map linearly onto [0, 1].
Tensor intensity_window(const Tensor& input, float lo, float hi);
Tensor intensity_window_backward(const Tensor& input, const Tensor& upstream,
                                 float lo, float hi);

Tensor concat_channels(std::span<const Tensor> inputs);
std::vector<Tensor> concat_channels_backward(
    const Tensor& upstream, std::span<const std::size_t> channel_counts);

}  // namespace cwt::ops
