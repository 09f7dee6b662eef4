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

#include <doctest.h>

#include <unistd.h>

#include <filesystem>

#include "cwt/checkpoint.hpp"
#include "cwt/error.hpp"
#include "cwt/experiment.hpp"
#include "cwt/io.hpp"
#include "support/fixtures.hpp"

using namespace cwt;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& tag) {
  fs::path p = fs::temp_directory_path() / ("cwt_exp_" + tag + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_SUITE("experiment") {

TEST_CASE("profiles carry the documented hyperparameters") {
  const ExperimentConfig paper = profile_config("paper");
  CHECK(paper.adam.learning_rate == 1e-4);
  CHECK(paper.protocol.min_delta == 1e-4);
  CHECK(paper.protocol.patience == 10);
  CHECK(paper.threshold == 0.5);
  CHECK(paper.patches.count == 1000);
  CHECK(paper.patches.size == 255);
  CHECK(paper.width_divisor == 1);
  CHECK(paper.site("NIH").train_count == 17);
  CHECK(paper.site("VUMC").test_count == 8);
  CHECK(paper.site("VUMC").phantom->lesion_median_mm3 / paper.site("NIH").phantom->lesion_median_mm3 ==
        doctest::Approx(41000.0 / 13700.0));
  const ExperimentConfig ci = profile_config("ci");
  CHECK(ci.site("VUMC").phantom->lesion_median_mm3 / ci.site("NIH").phantom->lesion_median_mm3 ==
        doctest::Approx(3.0).epsilon(0.01));
  CHECK_THROWS_AS(profile_config("fast"), ConfigError);
}

TEST_CASE("json configuration round-trips and is strict") {
  const ExperimentConfig c = fixture::tiny_experiment();
  const std::string text = config_to_json(c);
  const ExperimentConfig back = config_from_json(text);
  CHECK(config_to_json(back) == text);
  CHECK(back.site("B").phantom->lesion_median_mm3 == 360.0);
  CHECK_THROWS_AS(config_from_json(R"({"trianing": {}})"), ConfigError);
  CHECK_THROWS_AS(config_from_json(R"({"training": {"learning_rate": "fast"}})"), ConfigError);
  CHECK_THROWS_AS(config_from_json(R"({"training": {"patience": 0}})"), ConfigError);
  CHECK_THROWS_AS(config_from_json("{not json"), ConfigError);
  CHECK(config_from_json(R"({"profile": "ci"})", std::string("paper")).profile == "paper");
  CHECK_THROWS_AS(load_config("/nonexistent/cwt.json"), ConfigError);
}

TEST_CASE("derived seeds separate sites, phases and volumes") {
  CHECK(phantom_seed(1, "A") != phantom_seed(1, "B"));
  CHECK(phantom_seed(1, "A") != phantom_seed(2, "A"));
  CHECK(patch_seed(1, "A", 0) != patch_seed(1, "A", 1));
  CHECK(patch_seed(1, "A", 0) != phantom_seed(1, "A"));
}

TEST_CASE("generated data on disk matches the in-memory phantoms") {
  const ExperimentConfig c = fixture::tiny_experiment();
  const fs::path dir = scratch("gen");
  const fs::path manifest = generate_data(c, dir);
  CHECK(fs::exists(manifest));
  CHECK(fs::exists(dir / "A" / "A_000_image.nii"));
  CHECK(fs::exists(dir / "B" / "B_003_mask.nii"));
  for (const SiteConfig& s : c.sites) {
    const SiteData mem = materialize_site(c, s.id);
    const SiteData disk = load_site(c, dir, s.id);
    REQUIRE(mem.train.size() == disk.train.size());
    REQUIRE(mem.test.size() == disk.test.size());
    for (std::size_t i = 0; i < mem.test.size(); ++i) {
      CHECK(mem.test[i].id == disk.test[i].id);
      CHECK(*mem.test[i].image == *disk.test[i].image);
      CHECK(*mem.test[i].mask == *disk.test[i].mask);
    }
  }
  fs::remove_all(dir);
}

TEST_CASE("nifti sites train and evaluate like phantom sites") {
  const ExperimentConfig c = fixture::tiny_experiment();
  const fs::path dir = scratch("nifti");
  generate_data(c, dir);
  ExperimentConfig n = c;
  for (SiteConfig& s : n.sites) {
    s.nifti_dir = dir / s.id;
    for (std::size_t i = 0; i < s.train_count + s.test_count; ++i) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%s_%03zu", s.id.c_str(), i);
      (i < s.train_count ? s.train_cases : s.test_cases).push_back(buf);
    }
    s.phantom.reset();
  }
  validate(n);
  const SiteData disk = materialize_site(n, "A");
  const SiteData mem = materialize_site(c, "A");
  CHECK(train_ssl(n, disk) == train_ssl(c, mem));
  fs::remove_all(dir);
}

TEST_CASE("reports are written as csv and text") {
  const ExperimentConfig c = fixture::tiny_experiment();
  const auto data = fixture::materialize_all(c);
  const Bytes a = train_ssl(c, data[0]);
  const EvaluationReport r = evaluate(c, {{"ssl_A", a}, {"also_A", a}}, data);
  CHECK(r.pooled_for("ssl_A").mean_dice == r.pooled_for("also_A").mean_dice);
  const fs::path dir = scratch("report");
  write_report(r, dir);
  for (const char* f : {"report.csv", "cases.csv", "pvalues.csv", "report.txt"}) CHECK(fs::exists(dir / f));
  const Bytes csv = read_file(dir / "report.csv");
  CHECK(table_from_report_csv(std::string(csv.begin(), csv.end())) == report_table(r));
  CHECK_THROWS_AS(evaluate(c, {}, data), ConfigError);
  fs::remove_all(dir);
}

}  // TEST_SUITE
