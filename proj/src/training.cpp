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

#include "cwt/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>
#include <vector>

#include "cwt/cdc_loss.hpp"
#include "cwt/error.hpp"
#include "cwt/rng.hpp"

namespace cwt {
namespace {

struct Sample {
  std::size_t set;
  std::size_t index;
};

}  // namespace

TrainReport train_epoch(Network& net, AdamState& adam, std::span<const PatchSet> data,
                        std::size_t batch_size, std::uint64_t shuffle_seed, std::size_t epoch) {
  const auto start = std::chrono::steady_clock::now();
  if (batch_size == 0) throw ContractViolation("train_epoch: batch size is zero");
  std::vector<Sample> order;
  for (std::size_t s = 0; s < data.size(); ++s) {
    for (std::size_t i = 0; i < data[s].training.size(); ++i) order.push_back({s, i});
  }
  if (order.empty()) throw ContractViolation("train_epoch: no training patches");
  Rng rng(shuffle_seed);
  rng.shuffle(std::span(order));

  std::vector<Tape> tapes(batch_size);
  std::vector<Tensor> predictions, truths;
  double loss_sum = 0.0;
  std::size_t batches = 0;
  for (std::size_t first = 0; first < order.size(); first += batch_size) {
    const std::size_t n = std::min(batch_size, order.size() - first);
    predictions.clear();
    truths.clear();
    CdcTerms pooled;
    for (std::size_t k = 0; k < n; ++k) {
      const PatchSet& set = data[order[first + k].set];
      const PatchRef& ref = set.training[order[first + k].index];
      predictions.push_back(net.forward(set.image_patch(ref), tapes[k]));
      truths.push_back(set.mask_patch(ref));
      pooled += cdc_terms(predictions.back(), truths.back());
    }
    const double loss = pooled.loss();
    if (!std::isfinite(loss)) {
      throw NumericError("training loss is not finite in epoch " + std::to_string(epoch), epoch);
    }
    std::vector<Tensor> grads = net.zero_gradients();
    for (std::size_t k = 0; k < n; ++k) {
      net.backward(tapes[k], cdc_gradient(predictions[k], truths[k], pooled), grads);
    }
    try {
      adam_step(net.parameters(), grads, adam);
    } catch (const NumericError& e) {
      throw NumericError(std::string(e.what()) + " in epoch " + std::to_string(epoch), epoch);
    }
    loss_sum += loss;
    ++batches;
  }

  TrainReport report;
  report.epoch = epoch;
  report.train_loss = loss_sum / static_cast<double>(batches);
  report.validation_loss = validation_loss(net, data);
  if (!std::isfinite(report.validation_loss)) {
    throw NumericError("validation loss is not finite in epoch " + std::to_string(epoch), epoch);
  }
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

double validation_loss(const Network& net, std::span<const PatchSet> data) {
  bool any = false;
  for (const PatchSet& s : data) any = any || !s.validation.empty();
  CdcTerms pooled;
  std::size_t used = 0;
  for (const PatchSet& s : data) {
    for (const PatchRef& r : any ? s.validation : s.training) {
      pooled += cdc_terms(net.forward(s.image_patch(r)), s.mask_patch(r));
      ++used;
    }
  }
  if (used == 0) throw ContractViolation("validation_loss: no patches");
  return pooled.loss();
}

SegmentationMask predict_volume(const Network& net, const VolumeImage& volume, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw ContractViolation("predict_volume: threshold " + std::to_string(threshold) + " outside (0, 1)");
  }
  validate(volume);
  SegmentationMask mask(volume.dims, volume.spacing_mm);
  const std::size_t plane = volume.slice_size();
  for (std::size_t z = 0; z < volume.dims[2]; ++z) {
    const Tensor p = net.forward(axial_slice(volume, z));
    for (std::size_t i = 0; i < plane; ++i) {
      mask.voxels[z * plane + i] = static_cast<double>(p[i]) >= threshold ? 1 : 0;
    }
  }
  return mask;
}

}  // namespace cwt
