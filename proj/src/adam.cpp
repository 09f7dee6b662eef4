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

#include "cwt/adam.hpp"

#include <cmath>
#include <string>

#include "cwt/error.hpp"

namespace cwt {

void validate(const AdamConfig& config) {
  if (!(config.learning_rate > 0.0) || !std::isfinite(config.learning_rate)) {
    throw ConfigError("adam: learning_rate must be positive");
  }
  if (!(config.beta1 > 0.0 && config.beta1 < 1.0) ||
      !(config.beta2 > 0.0 && config.beta2 < 1.0)) {
    throw ConfigError("adam: beta1 and beta2 must lie in (0, 1)");
  }
  if (!(config.epsilon > 0.0)) throw ConfigError("adam: epsilon must be positive");
}

AdamState::AdamState(const AdamConfig& cfg, std::span<const Tensor> params)
    : config(cfg) {
  validate(config);
  first_moment.reserve(params.size());
  second_moment.reserve(params.size());
  for (const Tensor& p : params) {
    first_moment.push_back(Tensor::zeros_like(p));
    second_moment.push_back(Tensor::zeros_like(p));
  }
}

void adam_step(std::span<Tensor> params, std::span<const Tensor> grads,
               AdamState& state) {
  if (params.size() != grads.size() || params.size() != state.first_moment.size()) {
    throw ContractViolation("adam_step: " + std::to_string(params.size()) +
                            " params, " + std::to_string(grads.size()) +
                            " grads, " + std::to_string(state.first_moment.size()) +
                            " moment slots");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i].same_shape(grads[i]) ||
        !params[i].same_shape(state.first_moment[i])) {
      throw ContractViolation("adam_step: parameter " + std::to_string(i) +
                              " shape " + shape_string(params[i].shape()) +
                              " incongruent with gradient " +
                              shape_string(grads[i].shape()));
    }
    if (!grads[i].all_finite()) {
      throw NumericError("adam_step: non-finite gradient in parameter " +
                         std::to_string(i) + " at step " +
                         std::to_string(state.step_count + 1));
    }
  }

  const AdamConfig& c = state.config;
  const std::uint64_t t = ++state.step_count;
  const double bias1 = 1.0 - std::pow(c.beta1, static_cast<double>(t));
  const double bias2 = 1.0 - std::pow(c.beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    float* p = params[i].data();
    const float* g = grads[i].data();
    float* m = state.first_moment[i].data();
    float* v = state.second_moment[i].data();
    for (std::size_t j = 0; j < params[i].size(); ++j) {
      const double gj = g[j];
      const double mj = c.beta1 * m[j] + (1.0 - c.beta1) * gj;
      const double vj = c.beta2 * v[j] + (1.0 - c.beta2) * gj * gj;
      m[j] = static_cast<float>(mj);
      v[j] = static_cast<float>(vj);
      const double m_hat = mj / bias1;
      const double v_hat = vj / bias2;
      p[j] = static_cast<float>(p[j] - c.learning_rate * m_hat /
                                           (std::sqrt(v_hat) + c.epsilon));
    }
  }
}

}  // namespace cwt
