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

#include "cwt/tensor.hpp"

namespace cwt {

inline constexpr double kCdcSmoothing = 1e-7;

/// Sufficient statistics of the continuous Dice coefficient, a = truth and
/// b = prediction. Terms from several maps can be pooled by addition.
struct CdcTerms {
  double overlap = 0.0;      // sum a*b
  double truth = 0.0;        // sum a
  double prediction = 0.0;   // sum b
  double support = 0.0;      // sum a*sign(b)

  CdcTerms& operator+=(const CdcTerms& o) {
    overlap += o.overlap;
    truth += o.truth;
    prediction += o.prediction;
    support += o.support;
    return *this;
  }
  double correction() const { return support == 0.0 ? 1.0 : overlap / support; }
  double coefficient() const;
  double loss() const { return 1.0 - coefficient(); }
};

CdcTerms cdc_terms(const Tensor& prediction, const Tensor& truth);

/// d(1 - cDC)/d(prediction) for one map whose terms are part of the pooled
/// total. The correction coefficient is differentiated through its overlap
/// sum; sign(b) is piecewise constant.
Tensor cdc_gradient(const Tensor& prediction, const Tensor& truth, const CdcTerms& pooled);

struct CdcResult {
  double loss;
  Tensor gradient;
};

CdcResult cdc_loss(const Tensor& prediction, const Tensor& truth);

}  // namespace cwt
