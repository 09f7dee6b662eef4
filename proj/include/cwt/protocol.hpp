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

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cwt/adam.hpp"
#include "cwt/architecture.hpp"
#include "cwt/checkpoint.hpp"
#include "cwt/convergence.hpp"
#include "cwt/patches.hpp"
#include "cwt/store.hpp"
#include "cwt/training.hpp"

namespace cwt {

enum class TokenStatus { kRunning, kConverged, kAborted };

std::string to_string(TokenStatus status);

/// Single-line token record "<site_id> <global_epoch> <status>".
struct TurnToken {
  std::string site;
  std::uint32_t global_epoch = 0;
  TokenStatus status = TokenStatus::kRunning;

  std::string serialize() const;
  static TurnToken parse(const std::string& text);
  friend bool operator==(const TurnToken&, const TurnToken&) = default;
};

inline constexpr const char* kInitialCheckpointName = "checkpoints/initial.ckpt";
inline constexpr const char* kLossLogName = "loss_log.csv";

std::string checkpoint_name(std::uint32_t global_epoch, const std::string& site);

struct ProtocolOptions {
  double min_delta = 1e-4;
  std::size_t patience = 10;
  ConvergenceMode mode = ConvergenceMode::kGlobal;
  std::size_t max_epochs = 0;  // 0: no cap
  std::chrono::milliseconds poll_interval{500};
  std::chrono::milliseconds timeout{std::chrono::hours(24)};
};

/// One line per completed epoch; rendered as key=value pairs.
struct AuditRecord {
  std::string site;
  std::uint32_t epoch = 0;
  double train_loss = 0.0;
  double validation_loss = 0.0;
  double wall_seconds = 0.0;
  TurnToken next;

  std::string to_line() const;
};

enum class CrashPoint {
  kBeforeCheckpoint,  // turn acquired and epoch trained, nothing written
  kAfterCheckpoint,   // checkpoint stored, loss log not yet appended
  kAfterLossLog,      // loss log appended, token not yet swapped
};

/// Thrown by crash hooks to abandon a worker without touching the store.
struct SimulatedCrash {
  CrashPoint point;
  std::uint32_t epoch;
};

struct SiteRuntime {
  std::string site_id;
  std::vector<std::string> roster;
  std::vector<PatchSet> data;  // private to this site
  ArchitectureSpec spec;
  AdamConfig adam;
  std::size_t batch_size = 8;
  std::uint64_t master_seed = 0;
  ExchangeStore* store = nullptr;
  ProtocolOptions options;
  std::function<void(const AuditRecord&)> audit;
  std::function<void(CrashPoint, std::uint32_t epoch)> crash_hook;
};

/// Seed of the initial network shared by every site and strategy.
std::uint64_t initial_network_seed(std::uint64_t master_seed);
std::uint64_t shuffle_seed(std::uint64_t master_seed, const std::string& site, std::uint32_t epoch);

/// Fresh network plus zeroed optimizer state, serialized.
Bytes initial_checkpoint(const ArchitectureSpec& spec, const AdamConfig& adam, std::uint64_t master_seed);

TurnToken init_msl(ExchangeStore& store, const std::vector<std::string>& roster, std::span<const std::uint8_t> initial);

struct Turn {
  enum class Kind { kTrain, kConverged } kind = Kind::kTrain;
  TurnToken token;
  Bytes checkpoint;  // latest stored checkpoint
};

Turn acquire_turn(const SiteRuntime& rt);
TurnToken release_turn(const SiteRuntime& rt, const TurnToken& held, std::span<const std::uint8_t> trained,
                       double validation_loss);

/// acquire -> train -> release until the run converges. Returns the final
/// stored checkpoint. Protocol and numeric faults mark the token aborted.
Bytes run_site_worker(const SiteRuntime& rt);

/// Local train-to-convergence with the same rule and seeds, no store.
Bytes run_ssl(const SiteRuntime& rt);

/// Trains one epoch of rt's data from a checkpoint; returns the new
/// checkpoint bytes. Shared by the worker and the local loop.
struct EpochResult {
  Bytes checkpoint;
  TrainReport report;
  bool converged = false;
};
EpochResult run_epoch(const SiteRuntime& rt, std::span<const std::uint8_t> from, std::uint32_t global_epoch);

}  // namespace cwt
