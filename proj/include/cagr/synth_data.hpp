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

// Planted-cluster benchmark data.
//
// Users and items are split into clusters. A user interacts with an item of
// its own cluster with probability p_in * f(item), where f is a linear
// popularity profile with mean 1 inside each cluster, and with any other
// item with probability p_out. Friendships follow the same block structure.
// Each group draws its members from one cluster and picks items from that
// cluster with weight (smoothing + summed member interactions^consensus), so
// groups mostly agree on the items their members like best.
// Test interactions carry later timestamps than every training interaction,
// so the 80th-percentile temporal split holds out exactly one item for each
// test group.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

namespace cagr {

struct SynthSpec {
  std::int32_t clusters = 2;
  std::int32_t users_per_cluster = 50;
  std::int32_t items_per_cluster = 40;
  double p_in = 0.2;
  double p_out = 0.01;
  double popularity_skew = 0.8;   // f ranges over [1 - skew, 1 + skew]
  std::int32_t groups = 60;
  std::int32_t group_size_min = 4;
  std::int32_t group_size_max = 4;
  std::int32_t group_train_items = 4;
  double group_item_smoothing = 0.1;
  double group_consensus = 3.0;   // exponent on the influence-weighted member count
  double leader_share = 0.0;      // 0: members have equal say; 1: the best-connected member decides
  double social_in = 0.1;
  double social_out = 0.002;
  std::uint64_t seed = 7;

  /// Throws UsageError for invalid probabilities or sizes.
  void validate() const;
};

struct SynthSummary {
  std::int64_t user_item_edges = 0;
  std::int64_t cross_cluster_edges = 0;
  std::int64_t social_edges = 0;
  std::int64_t group_item_edges = 0;
  std::int64_t test_groups = 0;
};

/// Writes user_item.tsv, group_item.tsv, groups.tsv and social.tsv into `dir`.
/// Byte-identical output for identical specs. Throws DataError when the spec
/// yields an empty user-item or group-item graph.
SynthSummary generate_synthetic(const SynthSpec& spec, const std::filesystem::path& dir);

}  // namespace cagr
