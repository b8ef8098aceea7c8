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

#include "cagr/samplers.hpp"

#include <cmath>
#include <unordered_map>

#include "cagr/errors.hpp"
#include "cagr/model_params.hpp"

namespace cagr {

AliasTable::AliasTable(std::span<const double> weights)
    : prob_(weights.size()), alias_(weights.size(), 0), weight_(weights.begin(), weights.end()) {
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw DataError("alias table weight must be finite and >= 0");
    total_ += w;
  }
  if (!(total_ > 0.0)) throw DataError("alias table needs positive total mass");

  const std::size_t n = weights.size();
  std::vector<double> scaled(n);
  std::vector<std::int32_t> small, large;
  for (std::size_t i = 0; i < n; ++i) {
    scaled[i] = weights[i] * static_cast<double>(n) / total_;
    (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::int32_t>(i));
  }
  while (!small.empty() && !large.empty()) {
    const std::int32_t s = small.back();
    small.pop_back();
    const std::int32_t l = large.back();
    prob_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] = (scaled[l] + scaled[s]) - 1.0;
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  for (std::int32_t i : large) prob_[i] = 1.0;
  // leftovers from rounding
  for (std::int32_t i : small) prob_[i] = 1.0;
}

std::int32_t AliasTable::draw(Rng& rng) const {
  const double u = uniform01(rng) * static_cast<double>(prob_.size());
  auto column = static_cast<std::size_t>(u);
  if (column >= prob_.size()) column = prob_.size() - 1;
  const double frac = u - static_cast<double>(column);
  return frac < prob_[column] ? static_cast<std::int32_t>(column) : alias_[column];
}

AliasTable classic_noise(const BipartiteGraph& g) {
  std::vector<double> w;
  w.reserve(g.item_out_degree().size());
  for (double deg : g.item_out_degree()) w.push_back(std::pow(deg, 0.75));
  return AliasTable(w);
}

GroupNoise::GroupNoise(const BipartiteGraph& user_item, std::span<const NodeId> members,
                       double gamma)
    : item_count_(user_item.right_count()), gamma_(gamma) {
  if (!(gamma > 0.0)) throw UsageError("group-aware noise needs gamma > 0");
  if (item_count_ == 0) throw DataError("group-aware noise over zero items");
  base_ = std::pow(gamma, 0.75);

  std::unordered_map<NodeId, double> popularity;
  for (NodeId u : members) {
    for (const WeightedItem& e : user_item.adjacency(u)) popularity[e.item] += e.weight;
  }
  for (auto& [item, deg] : popularity) touched_.push_back(item);
  std::sort(touched_.begin(), touched_.end());
  double excess_total = 0.0;
  for (NodeId item : touched_) {
    excess_.push_back(std::pow(popularity[item] + gamma, 0.75) - base_);
    excess_total += excess_.back();
  }
  const double uniform_total = base_ * item_count_;
  total_ = uniform_total + excess_total;
  uniform_share_ = uniform_total / total_;
  if (excess_total > 0.0) excess_table_ = AliasTable(excess_);
}

NodeId GroupNoise::draw(Rng& rng) const {
  if (touched_.empty() || uniform01(rng) < uniform_share_) {
    auto v = static_cast<NodeId>(uniform01(rng) * item_count_);
    return v < item_count_ ? v : item_count_ - 1;
  }
  return touched_[excess_table_.draw(rng)];
}

double GroupNoise::probability(NodeId item) const {
  double mass = base_;
  auto it = std::lower_bound(touched_.begin(), touched_.end(), item);
  if (it != touched_.end() && *it == item) mass += excess_[it - touched_.begin()];
  return mass / total_;
}

GroupNoiseCache::GroupNoiseCache(const BipartiteGraph& user_item, const GroupTable& groups,
                                 double gamma)
    : user_item_(user_item), groups_(groups), gamma_(gamma) {
  if (!(gamma > 0.0)) throw UsageError("group-aware noise needs gamma > 0");
}

std::shared_ptr<const GroupNoise> GroupNoiseCache::get(NodeId group) {
  std::lock_guard lock(mutex_);
  auto it = tables_.find(group);
  if (it != tables_.end()) return it->second;
  auto table = std::make_shared<const GroupNoise>(user_item_, groups_.members[group], gamma_);
  tables_.emplace(group, table);
  return table;
}

void GroupNoiseCache::set_gamma(double gamma) {
  if (!(gamma > 0.0)) throw UsageError("group-aware noise needs gamma > 0");
  std::lock_guard lock(mutex_);
  if (gamma != gamma_) tables_.clear();
  gamma_ = gamma;
}

std::size_t GroupNoiseCache::cached() const {
  std::lock_guard lock(mutex_);
  return tables_.size();
}

EdgeSampler::EdgeSampler(const BipartiteGraph& g) : graph_(g) {
  if (g.edges().empty()) throw DataError("cannot sample edges from an empty graph");
  std::vector<double> w;
  w.reserve(g.edges().size());
  for (const Edge& e : g.edges()) w.push_back(e.weight);
  table_ = AliasTable(w);
}

const Edge& EdgeSampler::draw(Rng& rng) const { return graph_.edges()[table_.draw(rng)]; }

GraphChoice choose_graph(double eta, Rng& rng) {
  return uniform01(rng) < 1.0 / (1.0 + eta) ? GraphChoice::kGroupItem : GraphChoice::kUserItem;
}

}  // namespace cagr
