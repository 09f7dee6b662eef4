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

#include "cwt/cdc_loss.hpp"

#include <string>

#include "cwt/error.hpp"

namespace cwt {
namespace {

void check_pair(const Tensor& prediction, const Tensor& truth) {
  if (!prediction.same_shape(truth)) {
    throw ContractViolation("cdc loss: prediction " + shape_string(prediction.shape()) +
                            " vs truth " + shape_string(truth.shape()));
  }
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] != 0.0f && truth[i] != 1.0f) {
      throw ContractViolation("cdc loss: truth value " + std::to_string(truth[i]) + " at index " +
                              std::to_string(i) + " is not binary");
    }
  }
}

double sign(float v) { return v > 0.0f ? 1.0 : (v < 0.0f ? -1.0 : 0.0); }

}  // namespace

double CdcTerms::coefficient() const {
  return (2.0 * overlap + kCdcSmoothing) / (correction() * truth + prediction + kCdcSmoothing);
}

CdcTerms cdc_terms(const Tensor& prediction, const Tensor& truth) {
  check_pair(prediction, truth);
  CdcTerms t;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double a = truth[i], b = prediction[i];
    t.overlap += a * b;
    t.truth += a;
    t.prediction += b;
    t.support += a * sign(prediction[i]);
  }
  return t;
}

Tensor cdc_gradient(const Tensor& prediction, const Tensor& truth, const CdcTerms& pooled) {
  check_pair(prediction, truth);
  const double numerator = 2.0 * pooled.overlap + kCdcSmoothing;
  const double denominator = pooled.correction() * pooled.truth + pooled.prediction + kCdcSmoothing;
  // d(c*A)/d(b_i) = a_i * A / D when D > 0; c is constant otherwise.
  const double ca_slope = pooled.support == 0.0 ? 0.0 : pooled.truth / pooled.support;
  const double q2 = denominator * denominator;
  Tensor g = Tensor::zeros_like(prediction);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double a = truth[i];
    const double d_num = 2.0 * a;
    const double d_den = a * ca_slope + 1.0;
    g[i] = static_cast<float>(-(d_num * denominator - numerator * d_den) / q2);
  }
  return g;
}

CdcResult cdc_loss(const Tensor& prediction, const Tensor& truth) {
  const CdcTerms t = cdc_terms(prediction, truth);
  return {t.loss(), cdc_gradient(prediction, truth, t)};
}

}  // namespace cwt
