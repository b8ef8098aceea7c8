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

// Every random choice made during training: positive edges, the graph coin,
// and negative items.

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <span>
#include <vector>

#include "cagr/graph_store.hpp"

namespace cagr {

using Rng = std::mt19937_64;

/// Walker/Vose alias table: O(n) build, O(1) draw.
class AliasTable {
 public:
  AliasTable() = default;
  /// Throws DataError if a weight is negative/non-finite or all are zero.
  explicit AliasTable(std::span<const double> weights);

  std::int32_t draw(Rng& rng) const;
  std::int32_t size() const { return static_cast<std::int32_t>(prob_.size()); }
  double total_mass() const { return total_; }
  /// Normalized target probability of outcome i.
  double probability(std::int32_t i) const { return weight_[i] / total_; }

 private:
  std::vector<double> prob_;
  std::vector<std::int32_t> alias_;
  std::vector<double> weight_;
  double total_ = 0.0;
};

/// P(v) proportional to d_v^0.75 over the graph's item degrees.
AliasTable classic_noise(const BipartiteGraph& g);

/// Noise over all items with P(v) proportional to (d_v^G + gamma)^0.75, where
/// d_v^G sums the user-item weights of the group's members.
///
/// Stored as a two-part mixture: a uniform part carrying gamma^0.75 for every
/// item, plus an alias table over the members' items carrying the excess
/// (d + gamma)^0.75 - gamma^0.75. Memory is proportional to the members'
/// degrees rather than to the item count.
class GroupNoise {
 public:
  /// Throws UsageError if gamma <= 0.
  GroupNoise(const BipartiteGraph& user_item, std::span<const NodeId> members, double gamma);

  NodeId draw(Rng& rng) const;
  double probability(NodeId item) const;
  double gamma() const { return gamma_; }
  std::int32_t item_count() const { return item_count_; }

 private:
  std::int32_t item_count_ = 0;
  double gamma_ = 0.0;
  double base_ = 0.0;         // gamma^0.75
  double uniform_share_ = 0;  // uniform part / total mass
  double total_ = 0.0;
  std::vector<NodeId> touched_;
  std::vector<double> excess_;
  AliasTable excess_table_;
};

/// Lazily built, per-group GroupNoise tables; rebuilt if gamma changes.
/// Safe to share between worker threads.
class GroupNoiseCache {
 public:
  GroupNoiseCache(const BipartiteGraph& user_item, const GroupTable& groups, double gamma);

  std::shared_ptr<const GroupNoise> get(NodeId group);
  void set_gamma(double gamma);
  double gamma() const { return gamma_; }
  std::size_t cached() const;

 private:
  const BipartiteGraph& user_item_;
  const GroupTable& groups_;
  double gamma_;
  mutable std::mutex mutex_;
  std::map<NodeId, std::shared_ptr<const GroupNoise>> tables_;
};

/// Draws edges with probability proportional to their weight.
class EdgeSampler {
 public:
  /// Throws DataError for a graph with no edges.
  explicit EdgeSampler(const BipartiteGraph& g);
  const Edge& draw(Rng& rng) const;

 private:
  const BipartiteGraph& graph_;
  AliasTable table_;
};

enum class GraphChoice { kGroupItem, kUserItem };

/// Group-item with probability 1 / (1 + eta), user-item otherwise.
GraphChoice choose_graph(double eta, Rng& rng);

/// Redraws while the sample equals `positive`; gives up after `max_tries`
/// and returns the last draw (only reachable when the noise is concentrated
/// on the positive item).
template <class Noise>
NodeId draw_negative(const Noise& noise, NodeId positive, Rng& rng, int max_tries = 64) {
  NodeId v = noise.draw(rng);
  for (int t = 1; t < max_tries && v == positive; ++t) v = noise.draw(rng);
  return v;
}

}  // namespace cagr
