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

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cwt/network.hpp"
#include "cwt/volume.hpp"

namespace cwt {

struct TestCase {
  std::string case_id;
  std::shared_ptr<const VolumeImage> image;
  std::shared_ptr<const SegmentationMask> truth;
};

struct TestSet {
  std::string name;
  std::vector<TestCase> cases;
};

struct NamedModel {
  std::string name;
  Network network;
};

struct CaseScore {
  std::string model, test_set, case_id;
  double dice = 0.0;
  double predicted_mm3 = 0.0;
  double true_mm3 = 0.0;
};

struct SetSummary {
  std::string model, test_set;
  std::size_t cases = 0;
  double mean_dice = 0.0;
  std::optional<double> pearson;  // empty when volumes have zero variance
};

struct PairwiseComparison {
  std::string test_set, model_a, model_b;
  std::optional<double> statistic;
  std::optional<double> p_value;  // empty for degenerate samples
  std::string note;
};

struct PooledSummary {
  std::string model;
  double mean_dice = 0.0;          // unweighted mean of per-set means
  std::optional<double> pearson;   // mean of defined per-set correlations
};

struct EvaluationReport {
  std::vector<std::string> models;
  std::vector<std::string> test_sets;
  std::vector<CaseScore> cases;       // sorted by (model, set, case id)
  std::vector<SetSummary> summaries;  // model-major
  std::vector<PooledSummary> pooled;
  std::vector<PairwiseComparison> pairwise;

  const SetSummary& summary(const std::string& model, const std::string& test_set) const;
  const PooledSummary& pooled_for(const std::string& model) const;
};

using MaskSink = std::function<void(const std::string& model, const std::string& test_set,
                                    const std::string& case_id, const SegmentationMask& mask)>;

/// Scores every model on every test set. Results do not depend on the
/// order of cases within a set.
EvaluationReport evaluate_models(const std::vector<NamedModel>& models, const std::vector<TestSet>& sets,
                                 double threshold = 0.5, const MaskSink& sink = {});

std::string report_csv(const EvaluationReport& r);
std::string cases_csv(const EvaluationReport& r);
std::string pvalue_matrix_csv(const EvaluationReport& r);
std::string report_table(const EvaluationReport& r);

/// Rebuilds a pretty table from report_csv output.
std::string table_from_report_csv(const std::string& csv);

}  // namespace cwt
