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

// Command-line harness over the C API: gen-data, train, evaluate, report.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cwt/cwt.h"

namespace {

struct Options {
  std::string config_path;
  std::string profile;
  std::string store;
  std::string out;
  std::string data = "data";
  std::string mode;
  std::string site;
  std::vector<std::string> checkpoints;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool verbose = false;
};

int fail(cwt_status s) {
  std::fprintf(stderr, "cwt: %s: %s\n", cwt_status_name(s), cwt_last_error());
  return cwt_exit_code(s);
}

void log_to_stderr(cwt_log_level level, const char* message, void*) {
  static const char* kNames[] = {"debug", "info", "warning", "error"};
  std::fprintf(stderr, "[%s] %s\n", kNames[level], message);
}

class Config {
 public:
  ~Config() { cwt_config_free(cfg_); }

  cwt_status open(const Options& o) {
    cwt_status s = CWT_OK;
    if (!o.config_path.empty()) {
      s = cwt_config_load(o.config_path.c_str(), o.profile.empty() ? nullptr : o.profile.c_str(), &cfg_);
    } else {
      s = cwt_config_profile(o.profile.empty() ? "ci" : o.profile.c_str(), &cfg_);
    }
    if (s != CWT_OK) return s;
    if (o.seed_set && (s = cwt_config_set_seed(cfg_, o.seed)) != CWT_OK) return s;
    std::string store = o.store;
    if (store.empty()) {
      if (const char* env = std::getenv("CWT_STORE")) store = env;
    }
    if (!store.empty()) s = cwt_config_set_store(cfg_, store.c_str());
    return s;
  }

  const cwt_config* get() const { return cfg_; }

 private:
  cwt_config* cfg_ = nullptr;
};

int print_and_free(char* text) {
  if (text) std::cout << text << (text[0] && text[std::char_traits<char>::length(text) - 1] == '\n' ? "" : "\n");
  cwt_string_free(text);
  return CWT_EXIT_OK;
}

int run_gen_data(const Options& o) {
  Config cfg;
  if (cwt_status s = cfg.open(o); s != CWT_OK) return fail(s);
  char* manifest = nullptr;
  if (cwt_status s = cwt_generate_data(cfg.get(), o.out.empty() ? "data" : o.out.c_str(), &manifest); s != CWT_OK) {
    return fail(s);
  }
  return print_and_free(manifest);
}

int run_train(const Options& o) {
  Config cfg;
  if (cwt_status s = cfg.open(o); s != CWT_OK) return fail(s);
  const char* out = o.out.empty() ? "runs" : o.out.c_str();
  char* path = nullptr;
  cwt_status s = CWT_OK;
  if (o.mode == "ssl") {
    if (o.site.empty()) {
      std::fprintf(stderr, "cwt: train --mode ssl requires --site\n");
      return CWT_EXIT_CONFIG;
    }
    s = cwt_train_ssl(cfg.get(), o.data.c_str(), o.site.c_str(), out, &path);
  } else if (o.site.empty()) {
    s = cwt_train_msl(cfg.get(), o.data.c_str(), out, &path);
  } else {
    s = cwt_run_site_worker(cfg.get(), o.data.c_str(), o.site.c_str(), out, &path);
  }
  if (s != CWT_OK) return fail(s);
  return print_and_free(path);
}

int run_evaluate(const Options& o) {
  if (o.checkpoints.empty()) {
    std::fprintf(stderr, "cwt: evaluate needs at least one checkpoint (name=path or path)\n");
    return CWT_EXIT_CONFIG;
  }
  Config cfg;
  if (cwt_status s = cfg.open(o); s != CWT_OK) return fail(s);
  std::vector<std::string> names, paths;
  for (const std::string& spec : o.checkpoints) {
    const auto eq = spec.find('=');
    if (eq != std::string::npos) {
      names.push_back(spec.substr(0, eq));
      paths.push_back(spec.substr(eq + 1));
    } else {
      std::string stem = spec.substr(spec.find_last_of('/') + 1);
      if (const auto dot = stem.rfind(".ckpt"); dot != std::string::npos) stem.resize(dot);
      names.push_back(stem);
      paths.push_back(spec);
    }
  }
  std::vector<const char*> cn, cp;
  for (std::size_t i = 0; i < names.size(); ++i) {
    cn.push_back(names[i].c_str());
    cp.push_back(paths[i].c_str());
  }
  char* table = nullptr;
  const cwt_status s = cwt_evaluate(cfg.get(), o.data.c_str(), names.size(), cn.data(), cp.data(),
                                    o.out.empty() ? "report" : o.out.c_str(), &table);
  if (s != CWT_OK) return fail(s);
  return print_and_free(table);
}

int run_report(const Options& o) {
  char* table = nullptr;
  if (cwt_status s = cwt_report(o.out.empty() ? "report" : o.out.c_str(), &table); s != CWT_OK) return fail(s);
  return print_and_free(table);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cyclic weight transfer: multi-site segmentation training over a shared store"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* cmd) {
    cmd->add_option("--config", o.config_path, "Experiment config (JSON)")->check(CLI::ExistingFile);
    cmd->add_option("--profile", o.profile, "Base profile")->check(CLI::IsMember({"ci", "paper"}));
    cmd->add_option("--seed", o.seed, "Master seed")->each([&](const std::string&) { o.seed_set = true; });
    cmd->add_option("--store", o.store, "Exchange store directory (or CWT_STORE)");
    cmd->add_flag("-v,--verbose", o.verbose, "Log progress to stderr");
  };

  CLI::App* gen = app.add_subcommand("gen-data", "Generate per-site phantom volumes and a manifest");
  common(gen);
  gen->add_option("--out", o.out, "Output directory (default data)");

  CLI::App* train = app.add_subcommand("train", "Train SSL or MSL models");
  common(train);
  train->add_option("--mode", o.mode, "ssl or msl")->required()->check(CLI::IsMember({"ssl", "msl"}));
  train->add_option("--site", o.site, "Site id (ssl: site to train; msl: join the store as this site)");
  train->add_option("--data", o.data, "Generated data directory (default data)");
  train->add_option("--out", o.out, "Directory for checkpoints and audit logs (default runs)");

  CLI::App* eval = app.add_subcommand("evaluate", "Score checkpoints on every site's test set");
  common(eval);
  eval->add_option("--data", o.data, "Generated data directory (default data)");
  eval->add_option("--out", o.out, "Report directory (default report)");
  eval->add_option("checkpoints", o.checkpoints, "Checkpoints as name=path or path");

  CLI::App* report = app.add_subcommand("report", "Print the table of a written report");
  report->add_option("--out", o.out, "Report directory (default report)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? CWT_EXIT_OK : CWT_EXIT_CONFIG;
  }
  if (o.verbose) cwt_set_log_handler(log_to_stderr, nullptr);

  if (gen->parsed()) return run_gen_data(o);
  if (train->parsed()) return run_train(o);
  if (eval->parsed()) return run_evaluate(o);
  return run_report(o);
}
