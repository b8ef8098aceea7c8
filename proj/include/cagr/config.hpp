// Copyright 2026 The CAGR Authors.
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

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cagr/centrality.hpp"

namespace cagr {

enum class TrainMode { kSimple, kTwoStage, kJoint };
enum class NoiseKind { kClassicDegree, kGroupAware };
enum class Pooling { kMean, kSum };
enum class MemberInput { kFused, kBase };
enum class AttentionScale { kModelDim, kPerHead };

/// Every knob of a training run. Text form is `key = value` per line.
struct TrainingConfig {
  TrainMode mode = TrainMode::kJoint;
  std::int32_t d = 128;
  std::int32_t heads = 16;
  std::int32_t negatives = 6;              // M
  std::int64_t iterations = 4'000'000;     // N
  std::int64_t stage1_iterations = 0;      // two-stage only; 0 means N
  std::int64_t stage2_iterations = 0;
  double eta = 1.0;
  double gamma = 1.0;
  double lr0 = 0.025;
  double lr_floor = 1e-4;                  // fraction of lr0
  std::int32_t n_neighbors = 4;
  std::int32_t conv_layers = 1;
  std::vector<std::string> views = all_centrality_measures();
  NoiseKind neg_sampler = NoiseKind::kGroupAware;
  Pooling pooling = Pooling::kMean;
  MemberInput members = MemberInput::kFused;
  AttentionScale attention_scale = AttentionScale::kModelDim;
  std::uint64_t seed = 1;
  std::int32_t workers = 1;
  bool check_finite = false;
  bool holdout_validation = false;
  std::int64_t loss_window = 10'000;
  std::int64_t trace_every = 1'000;
  CentralityOptions centrality;

  /// Throws UsageError for unknown keys or unparsable values.
  void set(const std::string& key, const std::string& value);
  /// Throws UsageError when the combination is unusable (d % heads, M < 1, ...).
  void validate() const;
  std::string to_text() const;

  static TrainingConfig parse(const std::string& text);
  static TrainingConfig load(const std::filesystem::path& path);
};

const char* to_string(TrainMode mode);
const char* to_string(NoiseKind kind);

}  // namespace cagr
