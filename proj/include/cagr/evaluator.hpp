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

// Temporal split of group-item interactions and top-n ranking metrics.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "cagr/graph_store.hpp"
#include "cagr/model_params.hpp"
#include "cagr/trainer.hpp"

namespace cagr {

struct SplitSpec {
  BipartiteGraph train;       // timestamp <= cutoff
  BipartiteGraph validation;  // latest ceil(0.1 * |train|) training records
  BipartiteGraph test;        // timestamp > cutoff
  std::int64_t cutoff = 0;
  std::vector<std::string> warnings;

  /// Training interactions minus the validation records.
  BipartiteGraph fit_set() const;
};

/// Cutoff is the 80th-percentile timestamp: the ceil(0.8 n)-th smallest.
/// Interactions at the cutoff go to train.
SplitSpec temporal_split(const BipartiteGraph& group_item);

inline constexpr std::array<int, 5> kHitCutoffs = {1, 5, 10, 15, 20};

struct EvalReport {
  std::array<double, kHitCutoffs.size()> hits{};  // aligned with kHitCutoffs
  double mrr = 0.0;
  std::int64_t cases = 0;

  double hits_at(int n) const;
  /// Throws NumericError unless hits are in [0,1], non-decreasing in n,
  /// 0 <= mrr <= 1 and mrr >= hits@k / k for every cutoff.
  void check_invariants() const;
  std::string to_json() const;
};

struct RankedItem {
  NodeId item = 0;
  float score = 0;
};

/// Items sorted by g . v descending (ties by ascending id), skipping `excluded`.
std::vector<RankedItem> rank_items(const Network<float>& net, std::span<const NodeId> members,
                                   std::span<const NodeId> excluded, std::size_t top_n = SIZE_MAX);

struct CaseRank {
  NodeId group = 0;
  NodeId item = 0;
  std::int64_t rank = 0;
};

/// Ranks each test item among all items except the group's training items.
EvalReport evaluate(const Network<float>& net, const GroupTable& groups, const BipartiteGraph& train,
                    const BipartiteGraph& test, std::vector<CaseRank>* ranks = nullptr);

}  // namespace cagr
