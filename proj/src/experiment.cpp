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

#include "cwt/experiment.hpp"

#include <algorithm>
#include <exception>
#include <set>
#include <thread>

#include <json.hpp>

#include "cwt/error.hpp"
#include "cwt/io.hpp"
#include "cwt/log.hpp"
#include "cwt/nifti.hpp"
#include "cwt/rng.hpp"

namespace cwt {
namespace {

using nlohmann::json;

void reject_unknown(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return key == k; })) {
      throw ConfigError("unknown key '" + key + "' in " + where);
    }
  }
}

template <typename T>
void read(const json& j, const char* key, T& into, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    into = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + " has the wrong type");
  }
}

SitePhantomParams phantom_from_json(const json& j, SitePhantomParams p, const std::string& where) {
  reject_unknown(j, {"dims", "spacing_mm", "lesion_median_mm3", "lesion_log_sd", "lesion_count_min",
                     "lesion_count_max", "tissue_hu_mean", "tissue_hu_sd", "lesion_hu_min", "lesion_hu_max",
                     "noise_sd"},
                 where);
  read(j, "dims", p.dims, where);
  read(j, "spacing_mm", p.spacing_mm, where);
  read(j, "lesion_median_mm3", p.lesion_median_mm3, where);
  read(j, "lesion_log_sd", p.lesion_log_sd, where);
  read(j, "lesion_count_min", p.lesion_count_min, where);
  read(j, "lesion_count_max", p.lesion_count_max, where);
  read(j, "tissue_hu_mean", p.tissue_hu_mean, where);
  read(j, "tissue_hu_sd", p.tissue_hu_sd, where);
  read(j, "lesion_hu_min", p.lesion_hu_min, where);
  read(j, "lesion_hu_max", p.lesion_hu_max, where);
  read(j, "noise_sd", p.noise_sd, where);
  return p;
}

json phantom_to_json(const SitePhantomParams& p) {
  return {{"dims", p.dims},
          {"spacing_mm", p.spacing_mm},
          {"lesion_median_mm3", p.lesion_median_mm3},
          {"lesion_log_sd", p.lesion_log_sd},
          {"lesion_count_min", p.lesion_count_min},
          {"lesion_count_max", p.lesion_count_max},
          {"tissue_hu_mean", p.tissue_hu_mean},
          {"tissue_hu_sd", p.tissue_hu_sd},
          {"lesion_hu_min", p.lesion_hu_min},
          {"lesion_hu_max", p.lesion_hu_max},
          {"noise_sd", p.noise_sd}};
}

SiteConfig phantom_site(const std::string& id, std::size_t train, std::size_t test, Dims3 dims, double median) {
  SiteConfig s;
  s.id = id;
  s.train_count = train;
  s.test_count = test;
  SitePhantomParams p;
  p.site_id = id;
  p.dims = dims;
  p.lesion_median_mm3 = median;
  s.phantom = p;
  return s;
}

std::string case_id(const std::string& site, std::size_t index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%03zu", index);
  return site + "_" + buf;
}

SitePhantomParams resolved_phantom(const ExperimentConfig& c, const SiteConfig& s) {
  SitePhantomParams p = *s.phantom;
  p.site_id = s.id;
  p.volume_count = s.train_count + s.test_count;
  p.seed = phantom_seed(c.master_seed, s.id);
  return p;
}

std::shared_ptr<const VolumeImage> read_volume(const fs::path& p) {
  return std::make_shared<const VolumeImage>(parse_nifti(read_file(p)));
}

std::shared_ptr<const SegmentationMask> read_mask(const fs::path& p) {
  return std::make_shared<const SegmentationMask>(parse_nifti_mask(read_file(p)));
}

CaseData nifti_case(const std::string& id, std::size_t index, const fs::path& image, const fs::path& mask) {
  CaseData c{id, index, read_volume(image), read_mask(mask)};
  require_congruent(*c.image, *c.mask);
  return c;
}

}  // namespace

// ---- configuration ----

ArchitectureSpec ExperimentConfig::architecture() const {
  if (architecture_text) return parse_architecture(*architecture_text);
  return reference_architecture(width_divisor);
}

const SiteConfig& ExperimentConfig::site(const std::string& id) const {
  for (const SiteConfig& s : sites) {
    if (s.id == id) return s;
  }
  throw ConfigError("unknown site '" + id + "'");
}

std::vector<std::string> ExperimentConfig::roster() const {
  std::vector<std::string> r;
  for (const SiteConfig& s : sites) r.push_back(s.id);
  return r;
}

ExperimentConfig profile_config(const std::string& name) {
  ExperimentConfig c;
  c.profile = name;
  if (name == "paper") {
    c.width_divisor = 1;
    c.adam.learning_rate = 1e-4;
    c.batch_size = 8;
    c.protocol.patience = 10;
    c.protocol.max_epochs = 0;
    c.protocol.poll_interval = std::chrono::milliseconds(500);
    c.patches = PatchOptions{1000, 255, 0.5, 200};
    c.sites = {phantom_site("NIH", 17, 10, {256, 256, 20}, 13700.0),
               phantom_site("VUMC", 10, 8, {256, 256, 20}, 41000.0)};
  } else if (name == "ci") {
    c.width_divisor = 4;
    c.adam.learning_rate = 3e-4;
    c.batch_size = 4;
    c.protocol.patience = 2;
    c.protocol.max_epochs = 40;
    c.protocol.poll_interval = std::chrono::milliseconds(5);
    c.protocol.timeout = std::chrono::hours(1);
    c.patches = PatchOptions{10, 95, 0.5, 200};
    c.sites = {phantom_site("NIH", 6, 5, {96, 96, 10}, 1370.0), phantom_site("VUMC", 6, 5, {96, 96, 10}, 4100.0)};
    // A narrower spread keeps the upper tail inside the smaller brain.
    for (SiteConfig& s : c.sites) s.phantom->lesion_log_sd = 0.4;
  } else {
    throw ConfigError("unknown profile '" + name + "' (expected ci or paper)");
  }
  validate(c);
  return c;
}

void validate(const ExperimentConfig& c) {
  if (c.sites.empty()) throw ConfigError("config lists no sites");
  std::set<std::string> ids;
  for (const SiteConfig& s : c.sites) {
    if (s.id.empty() || s.id.find_first_of(" \t\n/,") != std::string::npos) {
      throw ConfigError("site id '" + s.id + "' must be non-empty without spaces, commas or '/'");
    }
    if (!ids.insert(s.id).second) throw ConfigError("duplicate site id '" + s.id + "'");
    if (s.phantom) {
      if (s.train_count == 0) throw ConfigError("site " + s.id + " has no training volumes");
      try {
        SitePhantomParams p = *s.phantom;
        p.volume_count = s.train_count + s.test_count;
        validate(p);
      } catch (const ValidationError& e) {
        throw ConfigError(e.what());
      }
    } else {
      if (s.nifti_dir.empty()) throw ConfigError("site " + s.id + " needs either phantom params or a nifti_dir");
      if (s.train_cases.empty()) throw ConfigError("site " + s.id + " lists no training cases");
      std::set<std::string> train(s.train_cases.begin(), s.train_cases.end());
      for (const std::string& t : s.test_cases) {
        if (train.count(t)) throw ConfigError("site " + s.id + ": case " + t + " is in both train and test");
      }
    }
  }
  if (c.batch_size == 0) throw ConfigError("batch_size must be positive");
  if (!(c.threshold > 0.0 && c.threshold < 1.0)) throw ConfigError("threshold must lie in (0, 1)");
  if (c.protocol.patience == 0) throw ConfigError("patience must be positive");
  if (!(c.protocol.min_delta >= 0.0)) throw ConfigError("min_delta must be non-negative");
  if (c.patches.count == 0 || c.patches.size == 0) throw ConfigError("patch count and size must be positive");
  if (!(c.patches.lesion_fraction >= 0.0 && c.patches.lesion_fraction <= 1.0)) {
    throw ConfigError("lesion_fraction must lie in [0, 1]");
  }
  if (!c.architecture_text && c.width_divisor == 0) throw ConfigError("width_divisor must be positive");
  try {
    validate(c.adam);
    (void)c.architecture();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

ExperimentConfig config_from_json(const std::string& text, const std::optional<std::string>& profile_override) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  reject_unknown(j, {"profile", "master_seed", "architecture", "training", "protocol", "patches", "sites", "store"},
                 "config");
  std::string profile = "ci";
  read(j, "profile", profile, "config");
  if (profile_override) profile = *profile_override;
  ExperimentConfig c = profile_config(profile);
  read(j, "master_seed", c.master_seed, "config");

  if (j.contains("architecture")) {
    const json& a = j["architecture"];
    reject_unknown(a, {"width_divisor", "text"}, "architecture");
    read(a, "width_divisor", c.width_divisor, "architecture");
    if (a.contains("text")) {
      std::string t;
      read(a, "text", t, "architecture");
      c.architecture_text = t;
    }
  }
  if (j.contains("training")) {
    const json& t = j["training"];
    reject_unknown(t, {"learning_rate", "batch_size", "min_delta", "patience", "max_epochs", "convergence",
                       "threshold"},
                   "training");
    read(t, "learning_rate", c.adam.learning_rate, "training");
    read(t, "batch_size", c.batch_size, "training");
    read(t, "min_delta", c.protocol.min_delta, "training");
    read(t, "patience", c.protocol.patience, "training");
    read(t, "max_epochs", c.protocol.max_epochs, "training");
    read(t, "threshold", c.threshold, "training");
    if (t.contains("convergence")) {
      std::string mode;
      read(t, "convergence", mode, "training");
      c.protocol.mode = parse_convergence_mode(mode);
    }
  }
  if (j.contains("protocol")) {
    const json& p = j["protocol"];
    reject_unknown(p, {"poll_interval_ms", "timeout_s"}, "protocol");
    std::int64_t poll = c.protocol.poll_interval.count();
    std::int64_t timeout = std::chrono::duration_cast<std::chrono::seconds>(c.protocol.timeout).count();
    read(p, "poll_interval_ms", poll, "protocol");
    read(p, "timeout_s", timeout, "protocol");
    if (poll < 0 || timeout <= 0) throw ConfigError("protocol intervals must be positive");
    c.protocol.poll_interval = std::chrono::milliseconds(poll);
    c.protocol.timeout = std::chrono::seconds(timeout);
  }
  if (j.contains("patches")) {
    const json& p = j["patches"];
    reject_unknown(p, {"count", "size", "lesion_fraction"}, "patches");
    read(p, "count", c.patches.count, "patches");
    read(p, "size", c.patches.size, "patches");
    read(p, "lesion_fraction", c.patches.lesion_fraction, "patches");
  }
  if (j.contains("sites")) {
    if (!j["sites"].is_array()) throw ConfigError("sites must be an array");
    const ExperimentConfig base = c;
    c.sites.clear();
    for (const json& sj : j["sites"]) {
      std::string id;
      if (!sj.is_object()) throw ConfigError("each site must be an object");
      read(sj, "id", id, "site");
      const std::string where = "site " + id;
      reject_unknown(sj, {"id", "train", "test", "phantom", "nifti_dir", "train_cases", "test_cases"}, where);
      SiteConfig s;
      const auto known = std::find_if(base.sites.begin(), base.sites.end(),
                                      [&](const SiteConfig& b) { return b.id == id; });
      if (known != base.sites.end()) {
        s = *known;
      } else {
        s = base.sites.front();
        s.id = id;
        if (s.phantom) s.phantom->site_id = id;
      }
      read(sj, "train", s.train_count, where);
      read(sj, "test", s.test_count, where);
      if (sj.contains("nifti_dir")) {
        std::string dir;
        read(sj, "nifti_dir", dir, where);
        s.nifti_dir = dir;
        s.phantom.reset();
        read(sj, "train_cases", s.train_cases, where);
        read(sj, "test_cases", s.test_cases, where);
        s.train_count = s.train_cases.size();
        s.test_count = s.test_cases.size();
      } else if (sj.contains("phantom")) {
        s.phantom = phantom_from_json(sj["phantom"], s.phantom.value_or(SitePhantomParams{}), where + " phantom");
      }
      c.sites.push_back(std::move(s));
    }
  }
  if (j.contains("store")) {
    std::string store;
    read(j, "store", store, "config");
    c.store = fs::path(store);
  }
  validate(c);
  return c;
}

ExperimentConfig load_config(const fs::path& path, const std::optional<std::string>& profile_override) {
  Bytes b;
  try {
    b = read_file(path);
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
  return config_from_json(std::string(b.begin(), b.end()), profile_override);
}

std::string config_to_json(const ExperimentConfig& c) {
  json j;
  j["profile"] = c.profile;
  j["master_seed"] = c.master_seed;
  j["architecture"] = c.architecture_text ? json{{"text", *c.architecture_text}}
                                          : json{{"width_divisor", c.width_divisor}};
  j["training"] = {{"learning_rate", c.adam.learning_rate}, {"batch_size", c.batch_size},
                   {"min_delta", c.protocol.min_delta},     {"patience", c.protocol.patience},
                   {"max_epochs", c.protocol.max_epochs},   {"convergence", to_string(c.protocol.mode)},
                   {"threshold", c.threshold}};
  j["protocol"] = {{"poll_interval_ms", c.protocol.poll_interval.count()},
                   {"timeout_s", std::chrono::duration_cast<std::chrono::seconds>(c.protocol.timeout).count()}};
  j["patches"] = {{"count", c.patches.count}, {"size", c.patches.size},
                  {"lesion_fraction", c.patches.lesion_fraction}};
  j["sites"] = json::array();
  for (const SiteConfig& s : c.sites) {
    json sj{{"id", s.id}, {"train", s.train_count}, {"test", s.test_count}};
    if (s.phantom) {
      sj["phantom"] = phantom_to_json(*s.phantom);
    } else {
      sj["nifti_dir"] = s.nifti_dir.string();
      sj["train_cases"] = s.train_cases;
      sj["test_cases"] = s.test_cases;
    }
    j["sites"].push_back(sj);
  }
  if (c.store) j["store"] = c.store->string();
  return j.dump(2) + "\n";
}

// ---- data ----

std::uint64_t phantom_seed(std::uint64_t master, const std::string& site) {
  return derive_seed(derive_seed(master, "phantom"), site);
}

std::uint64_t patch_seed(std::uint64_t master, const std::string& site, std::size_t volume_index) {
  return derive_seed(derive_seed(master, "patches"), site, volume_index);
}

SiteData materialize_site(const ExperimentConfig& c, const std::string& site_id) {
  const SiteConfig& s = c.site(site_id);
  SiteData d{s.id, {}, {}};
  if (s.phantom) {
    const SitePhantomParams p = resolved_phantom(c, s);
    for (std::size_t i = 0; i < s.train_count + s.test_count; ++i) {
      Phantom ph = generate_phantom(p, i);
      CaseData cd{case_id(s.id, i), i, std::make_shared<const VolumeImage>(std::move(ph.image)),
                  std::make_shared<const SegmentationMask>(std::move(ph.mask))};
      (i < s.train_count ? d.train : d.test).push_back(std::move(cd));
    }
    return d;
  }
  std::size_t index = 0;
  for (const std::string& id : s.train_cases) {
    d.train.push_back(nifti_case(id, index++, s.nifti_dir / (id + "_image.nii"), s.nifti_dir / (id + "_mask.nii")));
  }
  for (const std::string& id : s.test_cases) {
    d.test.push_back(nifti_case(id, index++, s.nifti_dir / (id + "_image.nii"), s.nifti_dir / (id + "_mask.nii")));
  }
  return d;
}

fs::path generate_data(const ExperimentConfig& c, const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (!fs::is_directory(out_dir)) throw IoError("cannot create output directory " + out_dir.string());
  json manifest{{"format", "cwt-manifest 1"}, {"profile", c.profile}, {"master_seed", c.master_seed}};
  manifest["sites"] = json::array();
  for (const SiteConfig& s : c.sites) {
    json sj{{"id", s.id}};
    sj["cases"] = json::array();
    if (s.phantom) {
      sj["phantom_seed"] = resolved_phantom(c, s).seed;
      fs::create_directories(out_dir / s.id, ec);
      const SiteData d = materialize_site(c, s.id);
      for (const auto* list : {&d.train, &d.test}) {
        for (const CaseData& cd : *list) {
          const std::string image = s.id + "/" + cd.id + "_image.nii";
          const std::string mask = s.id + "/" + cd.id + "_mask.nii";
          write_file_atomic(out_dir / image, write_nifti(*cd.image));
          write_file_atomic(out_dir / mask, write_nifti(*cd.mask));
          sj["cases"].push_back({{"id", cd.id},
                                 {"split", list == &d.train ? "train" : "test"},
                                 {"volume_index", cd.volume_index},
                                 {"image", image},
                                 {"mask", mask},
                                 {"lesion_mm3", lesion_volume_mm3(*cd.mask)},
                                 {"patch_seed", patch_seed(c.master_seed, s.id, cd.volume_index)}});
        }
      }
    } else {
      std::size_t index = 0;
      for (const auto* list : {&s.train_cases, &s.test_cases}) {
        for (const std::string& id : *list) {
          sj["cases"].push_back({{"id", id},
                                 {"split", list == &s.train_cases ? "train" : "test"},
                                 {"volume_index", index},
                                 {"image", fs::absolute(s.nifti_dir / (id + "_image.nii")).string()},
                                 {"mask", fs::absolute(s.nifti_dir / (id + "_mask.nii")).string()},
                                 {"patch_seed", patch_seed(c.master_seed, s.id, index)}});
          ++index;
        }
      }
    }
    manifest["sites"].push_back(sj);
    log(LogLevel::kInfo, "generated site " + s.id);
  }
  const fs::path path = out_dir / "manifest.json";
  write_file_atomic(path, manifest.dump(2) + "\n");
  return path;
}

SiteData load_site(const ExperimentConfig& c, const fs::path& data_dir, const std::string& site_id) {
  c.site(site_id);
  json manifest;
  try {
    const Bytes b = read_file(data_dir / "manifest.json");
    manifest = json::parse(std::string(b.begin(), b.end()));
  } catch (const IoError& e) {
    throw ConfigError(std::string("missing data manifest: ") + e.what());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("corrupt data manifest: ") + e.what());
  }
  if (manifest.value("master_seed", c.master_seed) != c.master_seed) {
    log(LogLevel::kWarning, "data manifest was generated with a different master seed");
  }
  for (const json& sj : manifest.at("sites")) {
    if (sj.at("id").get<std::string>() != site_id) continue;
    SiteData d{site_id, {}, {}};
    for (const json& cj : sj.at("cases")) {
      fs::path image = cj.at("image").get<std::string>();
      fs::path mask = cj.at("mask").get<std::string>();
      if (image.is_relative()) image = data_dir / image;
      if (mask.is_relative()) mask = data_dir / mask;
      CaseData cd = nifti_case(cj.at("id").get<std::string>(), cj.at("volume_index").get<std::size_t>(), image, mask);
      (cj.at("split").get<std::string>() == "train" ? d.train : d.test).push_back(std::move(cd));
    }
    return d;
  }
  throw ConfigError("data manifest has no site '" + site_id + "'");
}

std::vector<PatchSet> site_patches(const ExperimentConfig& c, const SiteData& site) {
  std::vector<PatchSet> sets;
  for (const CaseData& cd : site.train) {
    sets.push_back(extract_patches(cd.image, cd.mask, c.patches, patch_seed(c.master_seed, site.id, cd.volume_index),
                                   cd.id));
  }
  return sets;
}

TestSet test_set(const SiteData& site) {
  TestSet t{site.id, {}};
  for (const CaseData& cd : site.test) t.cases.push_back({cd.id, cd.image, cd.mask});
  return t;
}

// ---- training ----

SiteRuntime make_runtime(const ExperimentConfig& c, const SiteData& site, ExchangeStore* store,
                         AuditCallback audit) {
  SiteRuntime rt;
  rt.site_id = site.id;
  rt.roster = c.roster();
  rt.data = site_patches(c, site);
  rt.spec = c.architecture();
  rt.adam = c.adam;
  rt.batch_size = c.batch_size;
  rt.master_seed = c.master_seed;
  rt.store = store;
  rt.options = c.protocol;
  rt.audit = std::move(audit);
  return rt;
}

Bytes train_ssl(const ExperimentConfig& c, const SiteData& site, AuditCallback audit) {
  return run_ssl(make_runtime(c, site, nullptr, std::move(audit)));
}

Bytes train_msl(const ExperimentConfig& c, const std::vector<SiteData>& sites, ExchangeStore& store,
                AuditCallback audit) {
  if (sites.size() != c.sites.size()) throw ContractViolation("train_msl: expected data for every roster site");
  init_msl(store, c.roster(), initial_checkpoint(c.architecture(), c.adam, c.master_seed));
  std::vector<SiteRuntime> runtimes;
  for (const SiteData& s : sites) runtimes.push_back(make_runtime(c, s, &store, audit));
  std::vector<Bytes> results(sites.size());
  std::vector<std::exception_ptr> errors(sites.size());
  std::vector<std::thread> workers;
  for (std::size_t i = 0; i < sites.size(); ++i) {
    workers.emplace_back([&, i] {
      try {
        results[i] = run_site_worker(runtimes[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    });
  }
  for (std::thread& t : workers) t.join();
  // Report the originating fault rather than a peer's abort notice.
  std::exception_ptr first, origin;
  for (const std::exception_ptr& e : errors) {
    if (!e) continue;
    if (!first) first = e;
    try {
      std::rethrow_exception(e);
    } catch (const ProtocolError& pe) {
      if (!origin && std::string(pe.what()).rfind("run was aborted", 0) != 0) origin = e;
    } catch (...) {
      if (!origin) origin = e;
    }
  }
  if (origin) std::rethrow_exception(origin);
  if (first) std::rethrow_exception(first);
  for (const Bytes& r : results) {
    if (r != results.front()) throw ProtocolError("workers finished with different final checkpoints");
  }
  return results.front();
}

Bytes join_msl(const ExperimentConfig& c, const SiteData& site, ExchangeStore& store, AuditCallback audit) {
  if (!store.read_token()) {
    try {
      init_msl(store, c.roster(), initial_checkpoint(c.architecture(), c.adam, c.master_seed));
      log(LogLevel::kInfo, "initialized exchange store");
    } catch (const ProtocolError&) {
      if (!store.read_token()) throw;  // not a lost initialization race
    }
  }
  return run_site_worker(make_runtime(c, site, &store, std::move(audit)));
}

// ---- evaluation ----

EvaluationReport evaluate(const ExperimentConfig& c, const std::vector<ModelCheckpoint>& models,
                          const std::vector<SiteData>& sites, const MaskSink& sink) {
  if (models.empty()) throw ConfigError("evaluate: no checkpoints given");
  const ArchitectureSpec spec = c.architecture();
  std::vector<NamedModel> nets;
  for (const ModelCheckpoint& m : models) nets.push_back({m.name, load_checkpoint(m.bytes, spec, c.adam).network});
  std::vector<TestSet> sets;
  for (const SiteData& s : sites) sets.push_back(test_set(s));
  return evaluate_models(nets, sets, c.threshold, sink);
}

void write_report(const EvaluationReport& r, const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  write_file_atomic(out_dir / "report.csv", report_csv(r));
  write_file_atomic(out_dir / "cases.csv", cases_csv(r));
  write_file_atomic(out_dir / "pvalues.csv", pvalue_matrix_csv(r));
  write_file_atomic(out_dir / "report.txt", report_table(r));
}

}  // namespace cwt
