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

// Interaction graphs: user-item, group-item, user-user, plus group membership.
//
// Every node id is dense in [0, count). The string ids found in the input
// files are interned into an IdMapping that is saved next to a trained model,
// so recommendations can be reported in the caller's original ids.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace cagr {

using NodeId = std::int32_t;

struct Edge {
  NodeId left = 0;
  NodeId item = 0;
  double weight = 1.0;
  std::optional<std::int64_t> timestamp;

  bool operator==(const Edge&) const = default;
};

struct WeightedItem {
  NodeId item = 0;
  double weight = 0.0;

  bool operator==(const WeightedItem&) const = default;
};

/// Weighted bipartite graph between a left node set (users or groups) and items.
class BipartiteGraph {
 public:
  BipartiteGraph() = default;
  /// Throws DataError on out-of-range ids or non-positive weights.
  BipartiteGraph(std::int32_t left_count, std::int32_t right_count, std::vector<Edge> edges);

  std::int32_t left_count() const { return left_count_; }
  std::int32_t right_count() const { return right_count_; }
  std::span<const Edge> edges() const { return edges_; }
  std::span<const WeightedItem> adjacency(NodeId left) const { return adjacency_[left]; }
  /// d_m: sum of the weights leaving a left node.
  double left_degree(NodeId left) const { return left_degree_[left]; }
  /// d_v: sum of the weights incident to each item.
  std::span<const double> item_out_degree() const { return item_out_degree_; }

  bool operator==(const BipartiteGraph&) const = default;

 private:
  std::int32_t left_count_ = 0;
  std::int32_t right_count_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<WeightedItem>> adjacency_;
  std::vector<double> left_degree_;
  std::vector<double> item_out_degree_;
};

/// p(v | left) = w / d for every item adjacent to `left`, in adjacency order.
/// Throws DataError when the node has zero out-degree.
std::vector<double> empirical_distribution(const BipartiteGraph& g, NodeId left);

/// Undirected user-user graph with optional centrality-ranked neighbor views.
class SocialGraph {
 public:
  SocialGraph() = default;
  /// Builds a symmetric simple graph; self loops and duplicates are dropped.
  SocialGraph(std::int32_t user_count, std::span<const std::pair<NodeId, NodeId>> edges);

  std::int32_t user_count() const { return static_cast<std::int32_t>(adjacency_.size()); }
  std::span<const NodeId> neighbors(NodeId u) const { return adjacency_[u]; }
  std::size_t edge_count() const;

  /// Installs a ranked view. Each ranking must be a permutation of the
  /// user's adjacency list, ordered by non-increasing score.
  void set_view(const std::string& measure, std::vector<std::vector<NodeId>> ranking,
                std::vector<double> scores);
  bool has_view(const std::string& measure) const { return views_.count(measure) != 0; }
  std::span<const NodeId> ranked_neighbors(const std::string& measure, NodeId u) const;
  const std::vector<std::vector<NodeId>>& view(const std::string& measure) const;
  const std::vector<double>& view_scores(const std::string& measure) const;
  std::vector<std::string> view_names() const;

  /// Throws DataError if adjacency is asymmetric or a view is inconsistent.
  void check_invariants() const;

  bool operator==(const SocialGraph&) const = default;

 private:
  std::vector<std::vector<NodeId>> adjacency_;
  std::map<std::string, std::vector<std::vector<NodeId>>> views_;
  std::map<std::string, std::vector<double>> scores_;
};

/// Members of every group; each list non-empty and duplicate-free.
struct GroupTable {
  std::vector<std::vector<NodeId>> members;

  std::int32_t group_count() const { return static_cast<std::int32_t>(members.size()); }
  bool operator==(const GroupTable&) const = default;
};

/// Interns original string ids to dense integers in first-seen order.
class IdMap {
 public:
  NodeId intern(const std::string& name);
  std::optional<NodeId> find(const std::string& name) const;
  const std::string& name(NodeId id) const { return names_[id]; }
  std::int32_t size() const { return static_cast<std::int32_t>(names_.size()); }
  const std::vector<std::string>& names() const { return names_; }

  bool operator==(const IdMap& other) const { return names_ == other.names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, NodeId> index_;
};

struct IdMapping {
  IdMap users;
  IdMap items;
  IdMap groups;

  /// Writes `kind<TAB>original<TAB>dense` lines.
  void save(const std::filesystem::path& path) const;
  static IdMapping load(const std::filesystem::path& path);

  bool operator==(const IdMapping&) const = default;
};

struct DatasetPaths {
  std::filesystem::path user_item;
  std::filesystem::path group_item;
  std::filesystem::path groups;
  std::filesystem::path social;

  /// The four standard file names inside `dir`.
  static DatasetPaths in_directory(const std::filesystem::path& dir);
};

struct Dataset {
  IdMapping ids;
  BipartiteGraph user_item;
  BipartiteGraph group_item;
  SocialGraph social;
  GroupTable groups;
  std::vector<std::string> warnings;
};

/// Parses and validates the four TSV files. When `existing` is given its
/// dense ids are kept and unseen ids are appended after them.
Dataset load_dataset(const DatasetPaths& paths, const IdMapping* existing = nullptr);

}  // namespace cagr
