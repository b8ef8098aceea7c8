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

#include "cagr/synth_data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <vector>

#include "cagr/errors.hpp"
#include "cagr/model_params.hpp"
#include "cagr/samplers.hpp"

namespace cagr {

void SynthSpec::validate() const {
  auto prob = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) throw UsageError(std::string(name) + " must lie in [0, 1]");
  };
  prob(p_in, "p_in");
  prob(p_out, "p_out");
  prob(social_in, "social_in");
  prob(social_out, "social_out");
  if (!(p_in > p_out)) throw UsageError("p_in must exceed p_out");
  if (!(popularity_skew >= 0.0 && popularity_skew <= 1.0)) {
    throw UsageError("popularity_skew must lie in [0, 1]");
  }
  if (clusters < 1 || users_per_cluster < 1 || items_per_cluster < 1) {
    throw UsageError("clusters, users and items per cluster must be positive");
  }
  if (groups < 0 || group_train_items < 0) throw UsageError("group counts must be non-negative");
  if (group_size_min < 1 || group_size_max < group_size_min || group_size_max > users_per_cluster) {
    throw UsageError("group sizes must satisfy 1 <= min <= max <= users_per_cluster");
  }
  if (group_train_items + 1 > items_per_cluster) {
    throw UsageError("each group needs group_train_items + 1 distinct in-cluster items");
  }
  if (!(group_item_smoothing > 0.0)) throw UsageError("group_item_smoothing must be positive");
  if (!(group_consensus >= 0.0)) throw UsageError("group_consensus must be non-negative");
  if (!(leader_share >= 0.0 && leader_share <= 1.0)) throw UsageError("leader_share must lie in [0, 1]");
}

namespace {

bool flip(Rng& rng, double p) { return uniform01(rng) < p; }

std::int64_t uniform_int(Rng& rng, std::int64_t lo, std::int64_t hi) {
  return lo + static_cast<std::int64_t>(uniform01(rng) * static_cast<double>(hi - lo + 1));
}

// Draws one index proportionally to `weight` among entries not yet taken.
std::size_t draw_weighted(Rng& rng, const std::vector<double>& weight, const std::vector<char>& taken) {
  double total = 0.0;
  for (std::size_t i = 0; i < weight.size(); ++i) {
    if (!taken[i]) total += weight[i];
  }
  double u = uniform01(rng) * total;
  std::size_t last = 0;
  for (std::size_t i = 0; i < weight.size(); ++i) {
    if (taken[i]) continue;
    last = i;
    if (u < weight[i]) return i;
    u -= weight[i];
  }
  return last;
}

}  // namespace

SynthSummary generate_synthetic(const SynthSpec& spec, const std::filesystem::path& dir) {
  spec.validate();
  std::filesystem::create_directories(dir);
  Rng rng(spec.seed);
  SynthSummary summary;

  const std::int32_t n_users = spec.clusters * spec.users_per_cluster;
  const std::int32_t n_items = spec.clusters * spec.items_per_cluster;
  auto user_cluster = [&](std::int32_t u) { return u / spec.users_per_cluster; };
  auto item_cluster = [&](std::int32_t v) { return v / spec.items_per_cluster; };
  auto popularity = [&](std::int32_t v) {
    const std::int32_t j = v % spec.items_per_cluster;
    if (spec.items_per_cluster == 1) return 1.0;
    return 1.0 + spec.popularity_skew * (1.0 - 2.0 * j / (spec.items_per_cluster - 1.0));
  };

  constexpr std::int64_t kUserTimeEnd = 1'000'000;
  constexpr std::int64_t kTrainTimeEnd = 2'000'000;
  constexpr std::int64_t kTestTimeStart = 3'000'000;

  std::vector<std::vector<double>> counts(n_users, std::vector<double>(n_items, 0.0));
  {
    std::ofstream out(dir / "user_item.tsv");
    out << "# user\titem\tweight\ttimestamp\n";
    for (std::int32_t u = 0; u < n_users; ++u) {
      for (std::int32_t v = 0; v < n_items; ++v) {
        const bool same = user_cluster(u) == item_cluster(v);
        const double p = same ? std::min(1.0, spec.p_in * popularity(v)) : spec.p_out;
        if (!flip(rng, p)) continue;
        counts[u][v] = 1.0;
        out << 'u' << u << "\ti" << v << "\t1\t" << uniform_int(rng, 0, kUserTimeEnd - 1) << '\n';
        ++summary.user_item_edges;
        if (!same) ++summary.cross_cluster_edges;
      }
      // every user needs at least one record so group files can reference it
      const auto& row = counts[u];
      if (std::find(row.begin(), row.end(), 1.0) == row.end()) {
        const std::int32_t v = user_cluster(u) * spec.items_per_cluster;
        counts[u][v] = 1.0;
        out << 'u' << u << "\ti" << v << "\t1\t" << uniform_int(rng, 0, kUserTimeEnd - 1) << '\n';
        ++summary.user_item_edges;
      }
    }
  }
  if (summary.user_item_edges == 0) throw DataError("synthetic spec produced no user-item edges");

  std::vector<std::int32_t> social_degree(n_users, 0);
  {
    std::ofstream out(dir / "social.tsv");
    out << "# user\tuser\n";
    for (std::int32_t a = 0; a < n_users; ++a) {
      for (std::int32_t b = a + 1; b < n_users; ++b) {
        const double p = user_cluster(a) == user_cluster(b) ? spec.social_in : spec.social_out;
        if (!flip(rng, p)) continue;
        ++social_degree[a];
        ++social_degree[b];
        out << 'u' << a << "\tu" << b << '\n';
        ++summary.social_edges;
      }
    }
  }

  // every group contributes group_train_items training interactions; the
  // first floor(G * k / 4) groups add one later test interaction, which makes
  // the test share exactly what the 80th-percentile cutoff holds out
  const std::int64_t train_total = std::int64_t(spec.groups) * spec.group_train_items;
  const std::int64_t test_groups = std::min<std::int64_t>(spec.groups, train_total / 4);
  summary.test_groups = test_groups;
  {
    std::ofstream groups_out(dir / "groups.tsv");
    std::ofstream items_out(dir / "group_item.tsv");
    groups_out << "# group\tmembers\n";
    items_out << "# group\titem\ttimestamp\n";
    for (std::int32_t g = 0; g < spec.groups; ++g) {
      const std::int32_t c = g % spec.clusters;
      std::vector<std::int32_t> pool(spec.users_per_cluster);
      std::iota(pool.begin(), pool.end(), c * spec.users_per_cluster);
      const auto size = static_cast<std::int32_t>(uniform_int(rng, spec.group_size_min, spec.group_size_max));
      for (std::int32_t i = 0; i < size; ++i) {
        const auto j = static_cast<std::size_t>(uniform_int(rng, i, spec.users_per_cluster - 1));
        std::swap(pool[i], pool[j]);
      }
      pool.resize(size);
      groups_out << 'g' << g << '\t';
      for (std::int32_t i = 0; i < size; ++i) groups_out << (i ? "," : "") << 'u' << pool[i];
      groups_out << '\n';

      // the best-connected member (lowest id on ties) leads the group's choices
      std::int32_t leader = pool[0];
      for (std::int32_t u : pool) {
        if (social_degree[u] > social_degree[leader] || (social_degree[u] == social_degree[leader] && u < leader)) {
          leader = u;
        }
      }
      std::vector<double> weight(spec.items_per_cluster, spec.group_item_smoothing);
      for (std::int32_t j = 0; j < spec.items_per_cluster; ++j) {
        double shared = 0.0;
        for (std::int32_t u : pool) {
          const double say = (1.0 - spec.leader_share) / size + (u == leader ? spec.leader_share : 0.0);
          shared += size * say * counts[u][c * spec.items_per_cluster + j];
        }
        if (shared > 0.0) weight[j] += std::pow(shared, spec.group_consensus);
      }
      std::vector<char> taken(spec.items_per_cluster, 0);
      const std::int32_t picks = spec.group_train_items + (g < test_groups ? 1 : 0);
      for (std::int32_t k = 0; k < picks; ++k) {
        const std::size_t j = draw_weighted(rng, weight, taken);
        taken[j] = 1;
        const bool is_test = k == spec.group_train_items;
        const std::int64_t ts = is_test ? uniform_int(rng, kTestTimeStart, kTestTimeStart + kUserTimeEnd - 1)
                                        : uniform_int(rng, kUserTimeEnd, kTrainTimeEnd - 1);
        items_out << 'g' << g << "\ti" << (c * spec.items_per_cluster + static_cast<std::int32_t>(j)) << '\t'
                  << ts << '\n';
        ++summary.group_item_edges;
      }
    }
  }
  if (summary.group_item_edges == 0) throw DataError("synthetic spec produced no group-item edges");
  return summary;
}

}  // namespace cagr
