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
#include <vector>

#include "cwt/tensor.hpp"

namespace cwt {

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

void validate(const AdamConfig& config);

/// Bias-corrected Adam moments for an ordered parameter list. Moment tensors
/// are shape-congruent with the parameters they were created for.
struct AdamState {
  AdamState(const AdamConfig& config, std::span<const Tensor> params);

  AdamConfig config;
  std::uint64_t step_count = 0;
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;
};

/// One update over every parameter. Throws NumericError (without touching
/// params or state) if any gradient value is non-finite.
void adam_step(std::span<Tensor> params, std::span<const Tensor> grads,
               AdamState& state);

}  // namespace cwt
