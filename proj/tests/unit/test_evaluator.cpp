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


#include <algorithm>

#include "doctest.h"
#include "json.hpp"

#include "cagr/errors.hpp"
#include "cagr/evaluator.hpp"

using namespace cagr;

namespace {

BipartiteGraph timed(const std::vector<std::int64_t>& times) {
  std::vector<Edge> e;
  for (std::size_t i = 0; i < times.size(); ++i) e.push_back({0, static_cast<NodeId>(i), 1.0, times[i]});
  return BipartiteGraph(1, static_cast<std::int32_t>(times.size()), e);
}

// Ten items, one group of two users; item embeddings are placed along the
// group vector so item v scores score[v] * |g|^2.
struct Scored {
  TrainingConfig config;
  SocialGraph social{2, std::vector<std::pair<NodeId, NodeId>>{{0, 1}}};
  GroupTable groups{{{0, 1}}};
  ModelState state;

  explicit Scored(const std::vector<float>& score) {
    config.d = 4;
    config.heads = 2;
    config.views = {};
    state = init_model<float>(model_shape(2, static_cast<std::int32_t>(score.size()), config), 5);
    const Network<float> net(state, social, config);
    const std::vector<NodeId> members = {0, 1};
    const auto g = net.group_vector(members);
    for (std::size_t v = 0; v < score.size(); ++v)
      for (int k = 0; k < 4; ++k) state.item(static_cast<NodeId>(v))[k] = score[v] * g[k];
  }
};

}  // namespace

TEST_CASE("temporal split at the 80th percentile") {
  SUBCASE("ten distinct timestamps") {
    const auto s = temporal_split(timed({5, 1, 9, 3, 7, 2, 10, 4, 8, 6}));
    CHECK(s.cutoff == 8);
    CHECK(s.train.edges().size() == 8);
    CHECK(s.test.edges().size() == 2);
    // validation is the latest ceil(0.8) = 1 training record
    CHECK(s.validation.edges().size() == 1);
    CHECK(s.validation.edges()[0].timestamp == 8);
    CHECK(s.fit_set().edges().size() == 7);
  }
  SUBCASE("five timestamps") {
    const auto s = temporal_split(timed({1, 2, 3, 4, 5}));
    CHECK(s.cutoff == 4);
    CHECK(s.train.edges().size() == 4);
    CHECK(s.test.edges().size() == 1);
  }
  SUBCASE("ties at the cutoff stay in train") {
    const auto s = temporal_split(timed({1, 2, 3, 3, 3}));
    CHECK(s.cutoff == 3);
    CHECK(s.test.edges().size() == 0);
    CHECK(s.warnings.size() == 1);
  }
  SUBCASE("identical timestamps") {
    const auto s = temporal_split(timed(std::vector<std::int64_t>(6, 42)));
    CHECK(s.train.edges().size() == 6);
    CHECK(s.test.edges().size() == 0);
  }
}

TEST_CASE("items rank by score, ties by ascending id") {
  const Scored m({0.5f, 2.0f, 2.0f, -1.0f, 3.0f, 0.0f, 0.0f, 0.0f, 0.0f, 0.0f});
  const Network<float> net(m.state, m.social, m.config);
  const std::vector<NodeId> members = {0, 1}, excluded = {4};
  const auto ranked = rank_items(net, members, excluded);
  std::vector<NodeId> order;
  for (const auto& r : ranked) order.push_back(r.item);
  CHECK(order == std::vector<NodeId>{1, 2, 0, 5, 6, 7, 8, 9, 3});
  CHECK(rank_items(net, members, excluded, 2).size() == 2);
  for (std::size_t i = 1; i < ranked.size(); ++i) CHECK(ranked[i - 1].score >= ranked[i].score);
}

TEST_CASE("hits and MRR from the target rank") {
  // target item 3 is beaten by items 0, 1 and 2 -> rank 4
  const Scored m({4.0f, 3.0f, 2.5f, 2.0f, 1.0f, 0.5f, 0.2f, 0.1f, -1.0f, -2.0f});
  const Network<float> net(m.state, m.social, m.config);
  const BipartiteGraph train(1, 10, {});
  const BipartiteGraph test(1, 10, {{0, 3, 1.0, {}}});
  std::vector<CaseRank> ranks;
  const auto r = evaluate(net, m.groups, train, test, &ranks);
  CHECK(r.cases == 1);
  CHECK(r.hits_at(1) == 0.0);
  CHECK(r.hits_at(5) == 1.0);
  CHECK(r.hits_at(20) == 1.0);
  CHECK(r.mrr == doctest::Approx(0.25));
  REQUIRE(ranks.size() == 1);
  CHECK(ranks[0].rank == 4);

  // excluding two of the better items moves the target to rank 2
  const BipartiteGraph seen(1, 10, {{0, 0, 1.0, {}}, {0, 2, 1.0, {}}});
  const auto r2 = evaluate(net, m.groups, seen, test);
  CHECK(r2.hits_at(1) == 0.0);
  CHECK(r2.mrr == doctest::Approx(0.5));
  CHECK_NOTHROW(r2.check_invariants());
}

TEST_CASE("report invariants and JSON") {
  EvalReport r;
  r.hits = {0.1, 0.3, 0.5, 0.6, 0.7};
  r.mrr = 0.2;
  r.cases = 10;
  CHECK_NOTHROW(r.check_invariants());
  const auto j = nlohmann::json::parse(r.to_json());
  CHECK(j["hits@10"] == 0.5);
  CHECK(j["cases"] == 10);

  EvalReport bad = r;
  bad.hits[2] = 0.2;  // not monotone
  CHECK_THROWS_AS(bad.check_invariants(), NumericError);
  bad = r;
  bad.mrr = 0.05;  // below hits@1 / 1
  CHECK_THROWS_AS(bad.check_invariants(), NumericError);
  CHECK_THROWS_AS(r.hits_at(3), UsageError);
}
