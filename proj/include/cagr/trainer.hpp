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

// Negative-sampling objectives and the three SGD procedures:
//
//   st   group-item steps only
//   tst  user-item steps, then group-item steps starting from those parameters
//   jt   each step picks the group-item graph with probability 1/(1+eta),
//        the user-item graph otherwise
//
// A step on positive item j with negatives k_1..k_M and representation r
// (group vector or fused user vector) has loss
//
//   -log sigma(r . v_j) - sum_k log sigma(-r . v_k),
//
// with dot products clamped to [-30, 30].

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "cagr/attention_agg.hpp"
#include "cagr/centrality_conv.hpp"
#include "cagr/config.hpp"
#include "cagr/graph_store.hpp"
#include "cagr/model_params.hpp"
#include "cagr/samplers.hpp"

namespace cagr {

inline constexpr double kScoreClamp = 30.0;

/// Forward/backward for user and group representations over one parameter set.
template <class Real>
class Network {
 public:
  Network(const BasicModelState<Real>& state, const SocialGraph& social, const TrainingConfig& config);

  const BasicModelState<Real>& state() const { return state_; }
  const UserEncoder<Real>& users() const { return users_; }
  const GroupEncoder<Real>& groups() const { return groups_; }

  VectorR<Real> user_vector(NodeId user) const;
  VectorR<Real> group_vector(std::span<const NodeId> members) const;

  /// Loss of one group-item positive and its negatives. When `grads` is
  /// non-null the gradient of that loss is accumulated into it.
  Real sgv_step(std::span<const NodeId> members, NodeId positive, std::span<const NodeId> negatives,
                Gradients<Real>* grads) const;
  Real uv_step(NodeId user, NodeId positive, std::span<const NodeId> negatives,
               Gradients<Real>* grads) const;

 private:
  Real score_items(const VectorR<Real>& rep, NodeId positive, std::span<const NodeId> negatives,
                   Gradients<Real>* grads, VectorR<Real>* grad_rep) const;

  const BasicModelState<Real>& state_;
  UserEncoder<Real> users_;
  GroupEncoder<Real> groups_;
  MemberInput members_;
};

/// Model dimensions for `users` x `items` under the config.
ModelShape model_shape(std::int32_t users, std::int32_t items, const TrainingConfig& config);

/// Computes the configured centralities and installs them as views.
void prepare_views(SocialGraph& social, const TrainingConfig& config);

struct TrainingData {
  const BipartiteGraph& user_item;
  const BipartiteGraph& group_item;  // training interactions only
  const SocialGraph& social;         // views already built
  const GroupTable& groups;
};

struct StepLoss {
  std::int64_t iteration = 0;
  GraphChoice graph = GraphChoice::kGroupItem;
  double loss = 0.0;
};

struct TraceRow {
  std::int64_t step = 0;
  GraphChoice graph = GraphChoice::kGroupItem;
  double loss = 0.0;  // moving average over the last loss_window steps on `graph`
};

struct TrainResult {
  ModelState state;
  std::vector<TraceRow> trace;
  std::int64_t group_item_steps = 0;
  std::int64_t user_item_steps = 0;
};

struct TrainHooks {
  std::function<void(const StepLoss&)> on_step;  // single-worker mode only
};

/// Trains from a seeded initialization.
TrainResult train(const TrainingData& data, const TrainingConfig& config, const TrainHooks& hooks = {});
/// Trains starting from `initial`.
TrainResult train_from(ModelState initial, const TrainingData& data, const TrainingConfig& config,
                       const TrainHooks& hooks = {});

/// `step<TAB>graph<TAB>loss`, graph is "gv" or "uv".
void write_loss_trace(const std::vector<TraceRow>& trace, const std::filesystem::path& path);

}  // namespace cagr
