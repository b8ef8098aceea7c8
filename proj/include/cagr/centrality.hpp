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

// Node centrality on the social graph and the ranked neighbor views built from it.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cagr/graph_store.hpp"

namespace cagr {

struct CentralityScores {
  std::string measure;
  std::vector<double> score;
};

inline constexpr const char* kPageRank = "pagerank";
inline constexpr const char* kEigenvector = "eigenvector";
inline constexpr const char* kCloseness = "closeness";
inline constexpr const char* kBetweenness = "betweenness";

/// All measures in their default view order.
std::vector<std::string> all_centrality_measures();

/// Power iteration with uniform teleport; dangling mass is spread uniformly.
/// Throws NumericError carrying the L1 residual if `max_iter` is exhausted.
CentralityScores pagerank(const SocialGraph& g, double damping = 0.85, double tol = 1e-12,
                          int max_iter = 1000);

/// Power iteration on A + I (same eigenvectors as A, but no oscillation on
/// bipartite graphs). Output has unit L2 norm.
CentralityScores eigenvector_centrality(const SocialGraph& g, double tol = 1e-12,
                                        int max_iter = 10000);

/// (reachable - 1) / sum of distances within the node's component; 0 when isolated.
CentralityScores closeness_centrality(const SocialGraph& g);

/// Unnormalized Brandes betweenness (each unordered pair counted once). With
/// `sample_sources` set, runs from that many sources drawn without
/// replacement using `seed` and rescales by |V| / sample_sources.
CentralityScores betweenness_centrality(const SocialGraph& g,
                                        std::optional<std::int32_t> sample_sources = std::nullopt,
                                        std::uint64_t seed = 0);

struct CentralityOptions {
  double damping = 0.85;
  double tol = 1e-12;
  int max_iter = 10000;
  // Exact betweenness up to this many users, source-sampled above it.
  std::int32_t betweenness_exact_limit = 20000;
  std::int32_t betweenness_samples = 2000;
  std::uint64_t seed = 0;
};

/// Dispatches on the measure name. Throws UsageError for unknown names.
CentralityScores compute_centrality(const SocialGraph& g, const std::string& measure,
                                    const CentralityOptions& options = {});

/// Sorts every user's neighbors by descending score, ties by ascending id.
std::vector<std::vector<NodeId>> rank_neighbors(const SocialGraph& g, std::span<const double> score);

/// Installs one ranked view per score set.
void build_views(SocialGraph& g, std::span<const CentralityScores> scores);

}  // namespace cagr
