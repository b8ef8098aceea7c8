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

#include "cagr/evaluator.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

#include "cagr/errors.hpp"

namespace cagr {

BipartiteGraph SplitSpec::fit_set() const {
  std::vector<Edge> held(validation.edges().begin(), validation.edges().end());
  std::vector<Edge> kept;
  for (const Edge& e : train.edges()) {
    if (std::find(held.begin(), held.end(), e) == held.end()) kept.push_back(e);
  }
  return BipartiteGraph(train.left_count(), train.right_count(), std::move(kept));
}

SplitSpec temporal_split(const BipartiteGraph& gv) {
  SplitSpec split;
  std::vector<Edge> edges(gv.edges().begin(), gv.edges().end());
  for (const Edge& e : edges) {
    if (!e.timestamp) throw DataError("group-item interaction without timestamp");
  }
  std::vector<Edge> train, test;
  if (!edges.empty()) {
    std::vector<std::int64_t> times;
    for (const Edge& e : edges) times.push_back(*e.timestamp);
    std::sort(times.begin(), times.end());
    const auto index = static_cast<std::size_t>(std::ceil(0.8 * static_cast<double>(times.size()))) - 1;
    split.cutoff = times[index];
    for (const Edge& e : edges) (*e.timestamp <= split.cutoff ? train : test).push_back(e);
  }
  if (test.empty()) split.warnings.push_back("temporal split produced an empty test set");

  // validation: latest ceil(10%) of train, ties broken by position
  std::vector<std::size_t> order(train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return *train[a].timestamp < *train[b].timestamp; });
  const auto n_val = static_cast<std::size_t>(std::ceil(0.1 * static_cast<double>(train.size())));
  std::vector<Edge> validation;
  for (std::size_t i = order.size() - n_val; i < order.size(); ++i) validation.push_back(train[order[i]]);

  split.train = BipartiteGraph(gv.left_count(), gv.right_count(), std::move(train));
  split.validation = BipartiteGraph(gv.left_count(), gv.right_count(), std::move(validation));
  split.test = BipartiteGraph(gv.left_count(), gv.right_count(), std::move(test));
  return split;
}

double EvalReport::hits_at(int n) const {
  for (std::size_t i = 0; i < kHitCutoffs.size(); ++i) {
    if (kHitCutoffs[i] == n) return hits[i];
  }
  throw UsageError("no Hits@" + std::to_string(n) + " in report");
}

void EvalReport::check_invariants() const {
  constexpr double tol = 1e-12;
  for (std::size_t i = 0; i < hits.size(); ++i) {
    if (hits[i] < 0 || hits[i] > 1) throw NumericError("Hits@n outside [0, 1]");
    if (i > 0 && hits[i] + tol < hits[i - 1]) throw NumericError("Hits@n decreases with n");
    if (mrr + tol < hits[i] / kHitCutoffs[i]) throw NumericError("MRR below Hits@k / k");
  }
  if (mrr < 0 || mrr > 1) throw NumericError("MRR outside [0, 1]");
}

std::string EvalReport::to_json() const {
  nlohmann::ordered_json j;
  for (std::size_t i = 0; i < kHitCutoffs.size(); ++i) {
    j["hits@" + std::to_string(kHitCutoffs[i])] = hits[i];
  }
  j["mrr"] = mrr;
  j["cases"] = cases;
  return j.dump(2);
}

namespace {

std::vector<float> score_all(const Network<float>& net, std::span<const NodeId> members) {
  const ModelState& s = net.state();
  VectorR<float> g = net.group_vector(members);
  ConstMatMap<float> items(s.item_emb.data(), s.shape.items, s.shape.d);
  VectorR<float> scores = items * g;
  return {scores.data(), scores.data() + scores.size()};
}

}  // namespace

std::vector<RankedItem> rank_items(const Network<float>& net, std::span<const NodeId> members,
                                   std::span<const NodeId> excluded, std::size_t top_n) {
  std::vector<float> scores = score_all(net, members);
  std::vector<char> skip(scores.size(), 0);
  for (NodeId v : excluded) skip[v] = 1;
  std::vector<RankedItem> ranked;
  for (std::size_t v = 0; v < scores.size(); ++v) {
    if (!skip[v]) ranked.push_back({static_cast<NodeId>(v), scores[v]});
  }
  auto before = [](const RankedItem& a, const RankedItem& b) {
    return a.score != b.score ? a.score > b.score : a.item < b.item;
  };
  if (top_n < ranked.size()) {
    std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(top_n), ranked.end(), before);
    ranked.resize(top_n);
  } else {
    std::sort(ranked.begin(), ranked.end(), before);
  }
  return ranked;
}

EvalReport evaluate(const Network<float>& net, const GroupTable& groups, const BipartiteGraph& train,
                    const BipartiteGraph& test, std::vector<CaseRank>* ranks) {
  EvalReport report;
  std::vector<char> excluded(static_cast<std::size_t>(net.state().shape.items), 0);
  for (const Edge& e : test.edges()) {
    const auto& members = groups.members[e.left];
    std::vector<float> scores = score_all(net, members);
    for (const WeightedItem& w : train.adjacency(e.left)) excluded[w.item] = 1;
    const float target = scores[e.item];
    std::int64_t rank = 1;
    for (std::size_t v = 0; v < scores.size(); ++v) {
      if (excluded[v] || static_cast<NodeId>(v) == e.item) continue;
      if (scores[v] > target || (scores[v] == target && static_cast<NodeId>(v) < e.item)) ++rank;
    }
    for (const WeightedItem& w : train.adjacency(e.left)) excluded[w.item] = 0;

    for (std::size_t i = 0; i < kHitCutoffs.size(); ++i) {
      if (rank <= kHitCutoffs[i]) report.hits[i] += 1;
    }
    report.mrr += 1.0 / static_cast<double>(rank);
    ++report.cases;
    if (ranks != nullptr) ranks->push_back({e.left, e.item, rank});
  }
  if (report.cases > 0) {
    for (double& h : report.hits) h /= static_cast<double>(report.cases);
    report.mrr /= static_cast<double>(report.cases);
  }
  return report;
}

}  // namespace cagr
