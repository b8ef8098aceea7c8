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

#include "cagr/pipeline.hpp"

#include <chrono>
#include <fstream>

#include "cagr/errors.hpp"

namespace cagr {

TrainingData PreparedData::training_view(const TrainingConfig& config,
                                         BipartiteGraph& fit_storage) const {
  const BipartiteGraph* gv = &split.train;
  if (config.holdout_validation) {
    fit_storage = split.fit_set();
    gv = &fit_storage;
  }
  return {dataset.user_item, *gv, dataset.social, dataset.groups};
}

PreparedData prepare_data(const std::filesystem::path& data_dir, const TrainingConfig& config,
                          const IdMapping* ids) {
  PreparedData p;
  p.dataset = load_dataset(DatasetPaths::in_directory(data_dir), ids);
  p.split = temporal_split(p.dataset.group_item);
  prepare_views(p.dataset.social, config);
  return p;
}

TrainSummary train_directory(const std::filesystem::path& data_dir, const TrainingConfig& config,
                             const std::filesystem::path& out_dir) {
  config.validate();
  PreparedData data = prepare_data(data_dir, config);
  BipartiteGraph fit;
  const auto start = std::chrono::steady_clock::now();
  TrainSummary summary{train(data.training_view(config, fit), config), 0.0};
  summary.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  std::filesystem::create_directories(out_dir);
  save_model(summary.result.state, out_dir / "model.bin");
  data.dataset.ids.save(out_dir / "ids.tsv");
  std::ofstream(out_dir / "config.txt") << config.to_text();
  write_loss_trace(summary.result.trace, out_dir / "loss_trace.tsv");
  return summary;
}

TrainedModel::TrainedModel(const std::filesystem::path& model_dir,
                           const std::filesystem::path& data_dir) {
  config_ = TrainingConfig::load(model_dir / "config.txt");
  config_.validate();
  const IdMapping ids = IdMapping::load(model_dir / "ids.tsv");
  data_ = prepare_data(data_dir, config_, &ids);
  if (!(data_.dataset.ids == ids)) {
    throw DataError("dataset contains ids unknown to the model in " + model_dir.string());
  }
  const ModelShape expected =
      model_shape(data_.dataset.ids.users.size(), data_.dataset.ids.items.size(), config_);
  state_ = load_model(model_dir / "model.bin", &expected);
  network_ = std::make_unique<Network<float>>(state_, data_.dataset.social, config_);
}

TrainedModel::TrainedModel(ModelState state, PreparedData data, TrainingConfig config)
    : config_(std::move(config)), data_(std::move(data)), state_(std::move(state)) {
  network_ = std::make_unique<Network<float>>(state_, data_.dataset.social, config_);
}

EvalReport TrainedModel::evaluate(const std::string& which, std::vector<CaseRank>* ranks) const {
  EvalReport report;
  if (which == "test") {
    report = cagr::evaluate(*network_, data_.dataset.groups, data_.split.train, data_.split.test, ranks);
  } else if (which == "validation") {
    report = cagr::evaluate(*network_, data_.dataset.groups, data_.split.fit_set(), data_.split.validation,
                            ranks);
  } else {
    throw UsageError("unknown split '" + which + "' (expected test or validation)");
  }
  report.check_invariants();
  return report;
}

std::vector<std::pair<std::string, float>> TrainedModel::recommend(
    const std::vector<std::string>& members, std::size_t top_n) const {
  std::vector<NodeId> ids;
  for (const auto& name : members) {
    auto id = data_.dataset.ids.users.find(name);
    if (!id) throw DataError("unknown user id " + name);
    if (std::find(ids.begin(), ids.end(), *id) == ids.end()) ids.push_back(*id);
  }
  if (ids.empty()) throw UsageError("recommend needs at least one member");
  std::vector<std::pair<std::string, float>> out;
  for (const RankedItem& r : rank_items(*network_, ids, {}, top_n)) {
    out.emplace_back(data_.dataset.ids.items.name(r.item), r.score);
  }
  return out;
}

}  // namespace cagr
