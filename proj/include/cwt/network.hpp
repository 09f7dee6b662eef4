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
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "cwt/architecture.hpp"
#include "cwt/tensor.hpp"

namespace cwt {

/// Layer inputs recorded by a training forward pass, consumed by backward().
/// Inception entries keep one nested tape per branch.
struct Tape {
  struct Entry {
    Tensor input;
    std::vector<Tape> branches;
  };
  std::vector<Entry> entries;
};

/// A network instantiated from an ArchitectureSpec. The compiled layer plan
/// is immutable and shared between copies; copies own their parameters.
class Network {
 public:
  /// He-uniform fan-in initialisation of every conv kernel, zero biases.
  /// Deterministic in (spec, seed).
  static Network build(const ArchitectureSpec& spec, std::uint64_t seed);

  const ArchitectureSpec& architecture() const noexcept;
  const Digest& architecture_hash() const noexcept;

  std::span<Tensor> parameters() noexcept { return params_; }
  std::span<const Tensor> parameters() const noexcept { return params_; }
  const std::vector<std::string>& parameter_names() const noexcept;
  std::size_t parameter_count() const noexcept;

  /// Smallest accepted spatial extent; inputs must also be multiples of it.
  std::size_t minimum_extent() const noexcept;

  /// Full-size inference on a [C,H,W] image. Returns a [1,H,W] probability
  /// map with every value strictly inside (0, 1).
  Tensor forward(const Tensor& image) const;

  Tensor forward(const Tensor& image, Tape& tape) const;

  /// Accumulates d(loss)/d(param) into grads (same order as parameters()).
  void backward(const Tape& tape, const Tensor& upstream,
                std::span<Tensor> grads) const;

  std::vector<Tensor> zero_gradients() const;

  struct Plan;

 private:
  Network(std::shared_ptr<const Plan> plan, std::vector<Tensor> params)
      : plan_(std::move(plan)), params_(std::move(params)) {}

  void check_input(const Tensor& image) const;

  std::shared_ptr<const Plan> plan_;
  std::vector<Tensor> params_;
};

}  // namespace cwt
