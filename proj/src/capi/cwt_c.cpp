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

#include "cwt/cwt.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cwt/checkpoint.hpp"
#include "cwt/error.hpp"
#include "cwt/experiment.hpp"
#include "cwt/io.hpp"
#include "cwt/log.hpp"
#include "cwt/nifti.hpp"

struct cwt_config {
  cwt::ExperimentConfig config;
};

struct cwt_network {
  cwt::Network network;
};

namespace {

thread_local std::string g_last_error;

cwt_status status_of(cwt::ErrorKind kind) {
  using cwt::ErrorKind;
  switch (kind) {
    case ErrorKind::kContractViolation: return CWT_ERR_CONTRACT;
    case ErrorKind::kValidation: return CWT_ERR_VALIDATION;
    case ErrorKind::kParse: return CWT_ERR_PARSE;
    case ErrorKind::kIncompatible: return CWT_ERR_INCOMPATIBLE;
    case ErrorKind::kNumeric: return CWT_ERR_NUMERIC;
    case ErrorKind::kProtocol: return CWT_ERR_PROTOCOL;
    case ErrorKind::kTimeout: return CWT_ERR_TIMEOUT;
    case ErrorKind::kConfig: return CWT_ERR_CONFIG;
    case ErrorKind::kIo: return CWT_ERR_IO;
    case ErrorKind::kGeneration: return CWT_ERR_GENERATION;
    case ErrorKind::kDegenerateSample: return CWT_ERR_DEGENERATE;
    case ErrorKind::kUndefinedCorrelation: return CWT_ERR_UNDEFINED_CORRELATION;
  }
  return CWT_ERR_INTERNAL;
}

template <typename F>
cwt_status guard(F&& f) noexcept {
  try {
    g_last_error.clear();
    f();
    return CWT_OK;
  } catch (const cwt::Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const std::invalid_argument& e) {
    g_last_error = e.what();
    return CWT_ERR_INVALID_ARGUMENT;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return CWT_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return CWT_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown exception";
    return CWT_ERR_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void put(char** out, const std::string& s) {
  if (out) *out = dup(s);
}

cwt::fs::path out_path(const char* dir) {
  cwt::fs::path p = dir && *dir ? dir : ".";
  std::error_code ec;
  cwt::fs::create_directories(p, ec);
  if (!cwt::fs::is_directory(p)) throw cwt::IoError("cannot create output directory " + p.string());
  return p;
}

// Serializes appends from concurrent worker threads.
class AuditFiles {
 public:
  AuditFiles(cwt::fs::path dir, std::string prefix) : dir_(std::move(dir)), prefix_(std::move(prefix)) {}

  cwt::AuditCallback callback() {
    return [this](const cwt::AuditRecord& r) {
      const std::string line = r.to_line();
      std::lock_guard lock(mutex_);
      std::ofstream out(dir_ / (prefix_ + r.site + ".log"), std::ios::app);
      out << line << "\n";
      cwt::log(cwt::LogLevel::kInfo, line);
    };
  }

 private:
  cwt::fs::path dir_;
  std::string prefix_;
  std::mutex mutex_;
};

std::vector<cwt::SiteData> all_sites(const cwt::ExperimentConfig& c, const char* data_dir) {
  std::vector<cwt::SiteData> sites;
  for (const cwt::SiteConfig& s : c.sites) sites.push_back(cwt::load_site(c, data_dir, s.id));
  return sites;
}

std::string save(const cwt::fs::path& dir, const std::string& name, const cwt::Bytes& bytes) {
  const cwt::fs::path p = dir / name;
  cwt::write_file_atomic(p, bytes);
  return p.string();
}

}  // namespace

extern "C" {

const char* cwt_version(void) { return "1.0.0"; }

const char* cwt_last_error(void) { return g_last_error.c_str(); }

const char* cwt_status_name(cwt_status status) {
  switch (status) {
    case CWT_OK: return "ok";
    case CWT_ERR_INVALID_ARGUMENT: return "invalid argument";
    case CWT_ERR_CONTRACT: return "contract violation";
    case CWT_ERR_VALIDATION: return "validation error";
    case CWT_ERR_PARSE: return "parse error";
    case CWT_ERR_INCOMPATIBLE: return "incompatible checkpoint";
    case CWT_ERR_NUMERIC: return "numeric fault";
    case CWT_ERR_PROTOCOL: return "protocol fault";
    case CWT_ERR_TIMEOUT: return "timeout";
    case CWT_ERR_CONFIG: return "config error";
    case CWT_ERR_IO: return "io error";
    case CWT_ERR_GENERATION: return "generation error";
    case CWT_ERR_DEGENERATE: return "degenerate sample";
    case CWT_ERR_UNDEFINED_CORRELATION: return "undefined correlation";
    case CWT_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

int cwt_exit_code(cwt_status status) {
  switch (status) {
    case CWT_OK: return CWT_EXIT_OK;
    case CWT_ERR_CONFIG:
    case CWT_ERR_INVALID_ARGUMENT: return CWT_EXIT_CONFIG;
    case CWT_ERR_PROTOCOL:
    case CWT_ERR_TIMEOUT: return CWT_EXIT_PROTOCOL;
    case CWT_ERR_NUMERIC: return CWT_EXIT_NUMERIC;
    default: return CWT_EXIT_FAILURE;
  }
}

void cwt_string_free(char* s) { std::free(s); }

void cwt_set_log_handler(cwt_log_fn fn, void* user) {
  if (!fn) {
    cwt::set_log_sink({});
    return;
  }
  cwt::set_log_sink([fn, user](cwt::LogLevel level, const std::string& msg) {
    fn(static_cast<cwt_log_level>(level), msg.c_str(), user);
  });
}

cwt_status cwt_config_profile(const char* profile, cwt_config** out) {
  return guard([&] {
    require(profile && out, "cwt_config_profile: null argument");
    *out = new cwt_config{cwt::profile_config(profile)};
  });
}

cwt_status cwt_config_load(const char* path, const char* profile_override, cwt_config** out) {
  return guard([&] {
    require(path && out, "cwt_config_load: null argument");
    std::optional<std::string> profile;
    if (profile_override) profile = profile_override;
    *out = new cwt_config{cwt::load_config(path, profile)};
  });
}

cwt_status cwt_config_from_json(const char* json, cwt_config** out) {
  return guard([&] {
    require(json && out, "cwt_config_from_json: null argument");
    *out = new cwt_config{cwt::config_from_json(json)};
  });
}

void cwt_config_free(cwt_config* cfg) { delete cfg; }

cwt_status cwt_config_set_seed(cwt_config* cfg, uint64_t seed) {
  return guard([&] {
    require(cfg, "cwt_config_set_seed: null config");
    cfg->config.master_seed = seed;
  });
}

cwt_status cwt_config_set_store(cwt_config* cfg, const char* path) {
  return guard([&] {
    require(cfg, "cwt_config_set_store: null config");
    if (path && *path) {
      cfg->config.store = cwt::fs::path(path);
    } else {
      cfg->config.store.reset();
    }
  });
}

cwt_status cwt_config_to_json(const cwt_config* cfg, char** json_out) {
  return guard([&] {
    require(cfg && json_out, "cwt_config_to_json: null argument");
    put(json_out, cwt::config_to_json(cfg->config));
  });
}

cwt_status cwt_generate_data(const cwt_config* cfg, const char* out_dir, char** manifest_out) {
  return guard([&] {
    require(cfg && out_dir, "cwt_generate_data: null argument");
    put(manifest_out, cwt::generate_data(cfg->config, out_dir).string());
  });
}

cwt_status cwt_train_ssl(const cwt_config* cfg, const char* data_dir, const char* site, const char* out_dir,
                         char** path_out) {
  return guard([&] {
    require(cfg && data_dir && site, "cwt_train_ssl: null argument");
    const cwt::fs::path out = out_path(out_dir);
    const cwt::SiteData data = cwt::load_site(cfg->config, data_dir, site);
    AuditFiles audit(out, "audit_ssl_");
    const cwt::Bytes ckpt = cwt::train_ssl(cfg->config, data, audit.callback());
    put(path_out, save(out, std::string("ssl_") + site + ".ckpt", ckpt));
  });
}

cwt_status cwt_train_msl(const cwt_config* cfg, const char* data_dir, const char* out_dir, char** path_out) {
  return guard([&] {
    require(cfg && data_dir, "cwt_train_msl: null argument");
    const cwt::fs::path out = out_path(out_dir);
    const auto sites = all_sites(cfg->config, data_dir);
    AuditFiles audit(out, "audit_msl_");
    std::unique_ptr<cwt::ExchangeStore> store;
    if (cfg->config.store) {
      store = std::make_unique<cwt::DirectoryStore>(*cfg->config.store);
    } else {
      store = std::make_unique<cwt::MemoryStore>();
    }
    const cwt::Bytes ckpt = cwt::train_msl(cfg->config, sites, *store, audit.callback());
    put(path_out, save(out, "msl.ckpt", ckpt));
  });
}

cwt_status cwt_run_site_worker(const cwt_config* cfg, const char* data_dir, const char* site, const char* out_dir,
                               char** path_out) {
  return guard([&] {
    require(cfg && data_dir && site, "cwt_run_site_worker: null argument");
    if (!cfg->config.store) throw cwt::ConfigError("a site worker needs a store directory");
    const cwt::fs::path out = out_path(out_dir);
    const cwt::SiteData data = cwt::load_site(cfg->config, data_dir, site);
    cwt::DirectoryStore store(*cfg->config.store);
    AuditFiles audit(out, "audit_msl_");
    const cwt::Bytes ckpt = cwt::join_msl(cfg->config, data, store, audit.callback());
    put(path_out, save(out, "msl.ckpt", ckpt));
  });
}

cwt_status cwt_evaluate(const cwt_config* cfg, const char* data_dir, size_t count, const char* const* names,
                        const char* const* checkpoint_paths, const char* out_dir, char** table_out) {
  return guard([&] {
    require(cfg && data_dir && out_dir, "cwt_evaluate: null argument");
    if (count == 0) throw cwt::ConfigError("evaluate needs at least one checkpoint");
    require(names && checkpoint_paths, "cwt_evaluate: null checkpoint list");
    std::vector<cwt::ModelCheckpoint> models;
    for (size_t i = 0; i < count; ++i) {
      require(names[i] && checkpoint_paths[i], "cwt_evaluate: null checkpoint entry");
      models.push_back({names[i], cwt::read_file(checkpoint_paths[i])});
    }
    const cwt::fs::path out = out_path(out_dir);
    const auto sites = all_sites(cfg->config, data_dir);
    const auto sink = [&](const std::string& model, const std::string& set, const std::string& id,
                          const cwt::SegmentationMask& mask) {
      const cwt::fs::path dir = out / "masks" / model / set;
      std::error_code ec;
      cwt::fs::create_directories(dir, ec);
      cwt::write_file_atomic(dir / (id + "_pred.nii"), cwt::write_nifti(mask));
    };
    const cwt::EvaluationReport report = cwt::evaluate(cfg->config, models, sites, sink);
    cwt::write_report(report, out);
    put(table_out, cwt::report_table(report));
  });
}

cwt_status cwt_report(const char* report_dir, char** table_out) {
  return guard([&] {
    require(report_dir && table_out, "cwt_report: null argument");
    const cwt::Bytes csv = cwt::read_file(cwt::fs::path(report_dir) / "report.csv");
    put(table_out, cwt::table_from_report_csv(std::string(csv.begin(), csv.end())));
  });
}

cwt_status cwt_network_load(const cwt_config* cfg, const char* checkpoint_path, cwt_network** out) {
  return guard([&] {
    require(cfg && checkpoint_path && out, "cwt_network_load: null argument");
    const cwt::Bytes bytes = cwt::read_file(checkpoint_path);
    *out = new cwt_network{cwt::load_checkpoint(bytes, cfg->config.architecture(), cfg->config.adam).network};
  });
}

void cwt_network_free(cwt_network* net) { delete net; }

size_t cwt_network_parameter_count(const cwt_network* net) { return net ? net->network.parameter_count() : 0; }

cwt_status cwt_network_save(const cwt_network* net, const char* path) {
  return guard([&] {
    require(net && path, "cwt_network_save: null argument");
    cwt::write_file_atomic(path, cwt::save_checkpoint(net->network, nullptr, 0, {}));
  });
}

cwt_status cwt_network_predict(const cwt_network* net, const float* image, size_t height, size_t width,
                               float* probabilities) {
  return guard([&] {
    require(net && image && probabilities && height > 0 && width > 0, "cwt_network_predict: invalid argument");
    const cwt::Tensor in({1, height, width}, std::vector<float>(image, image + height * width));
    const cwt::Tensor p = net->network.forward(in);
    std::memcpy(probabilities, p.data(), p.size() * sizeof(float));
  });
}

}  // extern "C"
