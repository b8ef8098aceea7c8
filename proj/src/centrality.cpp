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

#include "cagr/centrality.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <random>

#include "cagr/errors.hpp"

namespace cagr {

std::vector<std::string> all_centrality_measures() {
  return {kPageRank, kEigenvector, kCloseness, kBetweenness};
}

CentralityScores pagerank(const SocialGraph& g, double damping, double tol, int max_iter) {
  if (!(damping > 0.0 && damping < 1.0)) {
    throw UsageError("pagerank damping must lie in (0, 1)");
  }
  const std::int32_t n = g.user_count();
  CentralityScores out{kPageRank, {}};
  if (n == 0) return out;

  std::vector<double> x(n, 1.0 / n), next(n);
  double residual = 0.0;
  for (int iter = 0; iter < max_iter; ++iter) {
    double dangling = 0.0;
    for (NodeId u = 0; u < n; ++u) {
      if (g.neighbors(u).empty()) dangling += x[u];
    }
    const double base = (1.0 - damping) / n + damping * dangling / n;
    std::fill(next.begin(), next.end(), base);
    for (NodeId u = 0; u < n; ++u) {
      auto nb = g.neighbors(u);
      if (nb.empty()) continue;
      const double share = damping * x[u] / static_cast<double>(nb.size());
      for (NodeId v : nb) next[v] += share;
    }
    const double total = std::accumulate(next.begin(), next.end(), 0.0);
    residual = 0.0;
    for (NodeId u = 0; u < n; ++u) {
      next[u] /= total;
      residual += std::abs(next[u] - x[u]);
    }
    x.swap(next);
    if (residual < tol) {
      out.score = std::move(x);
      return out;
    }
  }
  throw NumericError("pagerank did not converge after " + std::to_string(max_iter) +
                     " iterations (L1 residual " + std::to_string(residual) + ")");
}

CentralityScores eigenvector_centrality(const SocialGraph& g, double tol, int max_iter) {
  const std::int32_t n = g.user_count();
  CentralityScores out{kEigenvector, {}};
  if (n == 0) return out;

  std::vector<double> x(n, 1.0 / std::sqrt(static_cast<double>(n))), next(n);
  double residual = 0.0;
  for (int iter = 0; iter < max_iter; ++iter) {
    for (NodeId u = 0; u < n; ++u) {
      double s = x[u];
      for (NodeId v : g.neighbors(u)) s += x[v];
      next[u] = s;
    }
    double norm = 0.0;
    for (double v : next) norm += v * v;
    norm = std::sqrt(norm);
    residual = 0.0;
    for (NodeId u = 0; u < n; ++u) {
      next[u] /= norm;
      residual += std::abs(next[u] - x[u]);
    }
    x.swap(next);
    if (residual < tol) {
      out.score = std::move(x);
      return out;
    }
  }
  throw NumericError("eigenvector centrality did not converge after " + std::to_string(max_iter) +
                     " iterations (L1 residual " + std::to_string(residual) + ")");
}

namespace {

// Unweighted single-source shortest paths.
struct Bfs {
  std::vector<std::int32_t> dist;
  std::vector<NodeId> order;

  Bfs(const SocialGraph& g, NodeId source) : dist(g.user_count(), -1) {
    std::queue<NodeId> queue;
    dist[source] = 0;
    queue.push(source);
    while (!queue.empty()) {
      NodeId u = queue.front();
      queue.pop();
      order.push_back(u);
      for (NodeId v : g.neighbors(u)) {
        if (dist[v] < 0) {
          dist[v] = dist[u] + 1;
          queue.push(v);
        }
      }
    }
  }
};

// Adds the dependency of every vertex on `source` (Brandes accumulation).
void accumulate_dependencies(const SocialGraph& g, NodeId source, std::vector<double>& acc) {
  const std::int32_t n = g.user_count();
  Bfs bfs(g, source);
  std::vector<double> sigma(n, 0.0), delta(n, 0.0);
  sigma[source] = 1.0;
  for (NodeId u : bfs.order) {
    for (NodeId v : g.neighbors(u)) {
      if (bfs.dist[v] == bfs.dist[u] + 1) sigma[v] += sigma[u];
    }
  }
  for (auto it = bfs.order.rbegin(); it != bfs.order.rend(); ++it) {
    NodeId w = *it;
    for (NodeId v : g.neighbors(w)) {
      if (bfs.dist[v] == bfs.dist[w] - 1) delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
    }
    if (w != source) acc[w] += delta[w];
  }
}

}  // namespace

CentralityScores closeness_centrality(const SocialGraph& g) {
  const std::int32_t n = g.user_count();
  CentralityScores out{kCloseness, std::vector<double>(n, 0.0)};
  for (NodeId u = 0; u < n; ++u) {
    Bfs bfs(g, u);
    double total = 0.0;
    for (NodeId v : bfs.order) total += bfs.dist[v];
    if (total > 0.0) out.score[u] = static_cast<double>(bfs.order.size() - 1) / total;
  }
  return out;
}

CentralityScores betweenness_centrality(const SocialGraph& g,
                                        std::optional<std::int32_t> sample_sources,
                                        std::uint64_t seed) {
  const std::int32_t n = g.user_count();
  CentralityScores out{kBetweenness, std::vector<double>(n, 0.0)};
  if (n == 0) return out;

  std::vector<NodeId> sources(n);
  std::iota(sources.begin(), sources.end(), 0);
  double scale = 0.5;  // each unordered pair is reached from both endpoints
  if (sample_sources && *sample_sources < n) {
    if (*sample_sources <= 0) throw UsageError("betweenness needs at least one sample source");
    std::mt19937_64 rng(seed);
    std::shuffle(sources.begin(), sources.end(), rng);
    sources.resize(*sample_sources);
    std::sort(sources.begin(), sources.end());
    scale *= static_cast<double>(n) / *sample_sources;
  }
  for (NodeId s : sources) accumulate_dependencies(g, s, out.score);
  for (double& v : out.score) v *= scale;
  return out;
}

CentralityScores compute_centrality(const SocialGraph& g, const std::string& measure,
                                    const CentralityOptions& options) {
  if (measure == kPageRank) return pagerank(g, options.damping, options.tol, options.max_iter);
  if (measure == kEigenvector) return eigenvector_centrality(g, options.tol, options.max_iter);
  if (measure == kCloseness) return closeness_centrality(g);
  if (measure == kBetweenness) {
    std::optional<std::int32_t> samples;
    if (g.user_count() > options.betweenness_exact_limit) samples = options.betweenness_samples;
    return betweenness_centrality(g, samples, options.seed);
  }
  throw UsageError("unknown centrality measure '" + measure + "'");
}

std::vector<std::vector<NodeId>> rank_neighbors(const SocialGraph& g, std::span<const double> score) {
  std::vector<std::vector<NodeId>> ranking(g.user_count());
  for (NodeId u = 0; u < g.user_count(); ++u) {
    auto nb = g.neighbors(u);
    ranking[u].assign(nb.begin(), nb.end());
    std::sort(ranking[u].begin(), ranking[u].end(), [&](NodeId a, NodeId b) {
      if (score[a] != score[b]) return score[a] > score[b];
      return a < b;
    });
  }
  return ranking;
}

void build_views(SocialGraph& g, std::span<const CentralityScores> scores) {
  for (const CentralityScores& s : scores) {
    if (static_cast<std::int32_t>(s.score.size()) != g.user_count()) {
      throw DataError("centrality '" + s.measure + "' has wrong length");
    }
    g.set_view(s.measure, rank_neighbors(g, s.score), s.score);
  }
}

}  // namespace cagr
