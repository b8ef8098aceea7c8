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

// Directory-level operations shared by the command line tool and the Python
// module. A model directory holds model.bin, ids.tsv, config.txt,
// loss_trace.tsv and manifest.json.

#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "cagr/config.hpp"
#include "cagr/evaluator.hpp"
#include "cagr/graph_store.hpp"
#include "cagr/model_params.hpp"
#include "cagr/trainer.hpp"

namespace cagr {

/// Dataset plus its temporal split and the views the config asks for.
struct PreparedData {
  Dataset dataset;
  SplitSpec split;

  TrainingData training_view(const TrainingConfig& config, BipartiteGraph& fit_storage) const;
};

PreparedData prepare_data(const std::filesystem::path& data_dir, const TrainingConfig& config,
                          const IdMapping* ids = nullptr);

struct TrainSummary {
  TrainResult result;
  double seconds = 0.0;
};

/// Trains on `data_dir` and writes the model directory `out_dir`.
TrainSummary train_directory(const std::filesystem::path& data_dir, const TrainingConfig& config,
                             const std::filesystem::path& out_dir);

/// A trained model together with the data it was trained on.
class TrainedModel {
 public:
  TrainedModel(const std::filesystem::path& model_dir, const std::filesystem::path& data_dir);
  TrainedModel(ModelState state, PreparedData data, TrainingConfig config);

  const TrainingConfig& config() const { return config_; }
  const ModelState& state() const { return state_; }
  const PreparedData& data() const { return data_; }
  const Network<float>& network() const { return *network_; }

  /// Ranks the held-out test set ("test") or the validation records ("validation").
  EvalReport evaluate(const std::string& which = "test", std::vector<CaseRank>* ranks = nullptr) const;

  /// Top-n (original item id, score) for an ad-hoc group of original user ids.
  std::vector<std::pair<std::string, float>> recommend(const std::vector<std::string>& members,
                                                       std::size_t top_n) const;

 private:
  TrainingConfig config_;
  PreparedData data_;
  ModelState state_;
  std::unique_ptr<Network<float>> network_;
};

}  // namespace cagr
