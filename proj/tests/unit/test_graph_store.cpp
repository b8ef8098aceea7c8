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
#include <stdexcept>

#include "doctest.h"

#include "cagr/errors.hpp"
#include "cagr/graph_store.hpp"
#include "test_util.hpp"

using namespace cagr;
using cagr::testing::TempDir;
using cagr::testing::write_file;

namespace {

void write_dataset(const TempDir& dir, const std::string& user_item, const std::string& groups,
                   const std::string& group_item, const std::string& social) {
  write_file(dir / "user_item.tsv", user_item);
  write_file(dir / "groups.tsv", groups);
  write_file(dir / "group_item.tsv", group_item);
  write_file(dir / "social.tsv", social);
}

std::string error_of(const DatasetPaths& paths) {
  try {
    load_dataset(paths);
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("item out-degree is the incident weight sum") {
  BipartiteGraph g(2, 3, {{0, 0, 2.0, {}}, {0, 2, 1.5, {}}, {1, 2, 0.5, {}}});
  const auto deg = g.item_out_degree();
  // recompute from the edge list
  std::vector<double> expect(3, 0.0);
  for (const Edge& e : g.edges()) expect[e.item] += e.weight;
  CHECK(std::vector<double>(deg.begin(), deg.end()) == expect);
  CHECK(g.left_degree(0) == doctest::Approx(3.5));
  CHECK(g.adjacency(1).size() == 1);
}

TEST_CASE("empirical distribution normalizes a left node's weights") {
  BipartiteGraph g(1, 3, {{0, 0, 1.0, {}}, {0, 2, 3.0, {}}});
  const auto p = empirical_distribution(g, 0);
  // one entry per adjacent item, in adjacency order
  REQUIRE(p.size() == 2);
  CHECK(p[0] == doctest::Approx(0.25));
  CHECK(p[1] == doctest::Approx(0.75));
  BipartiteGraph empty(2, 3, {{0, 0, 1.0, {}}});
  CHECK_THROWS_AS(empirical_distribution(empty, 1), DataError);
}

TEST_CASE("bipartite graph rejects bad edges") {
  CHECK_THROWS_AS(BipartiteGraph(1, 1, {{0, 1, 1.0, {}}}), DataError);
  CHECK_THROWS_AS(BipartiteGraph(1, 1, {{0, 0, 0.0, {}}}), DataError);
  CHECK_THROWS_AS(BipartiteGraph(1, 1, {{0, 0, -1.0, {}}}), DataError);
}

TEST_CASE("social graph is symmetric and drops self loops") {
  const std::vector<std::pair<NodeId, NodeId>> edges = {{0, 1}, {2, 1}, {1, 0}, {3, 3}};
  SocialGraph g(4, edges);
  CHECK(g.edge_count() == 2);
  CHECK(std::vector<NodeId>(g.neighbors(1).begin(), g.neighbors(1).end()) == std::vector<NodeId>{0, 2});
  CHECK(g.neighbors(3).empty());
  for (NodeId u = 0; u < 4; ++u) {
    for (NodeId v : g.neighbors(u)) {
      auto back = g.neighbors(v);
      CHECK(std::find(back.begin(), back.end(), u) != back.end());
    }
  }
  g.check_invariants();
}

TEST_CASE("views must be permutations of the adjacency") {
  const std::vector<std::pair<NodeId, NodeId>> edges = {{0, 1}, {0, 2}};
  SocialGraph g(3, edges);
  CHECK_THROWS_AS(g.set_view("pagerank", {{1}, {0}, {0}}, {0.5, 0.2, 0.3}), DataError);
  CHECK_THROWS_AS(g.set_view("pagerank", {{1, 2}, {0}, {0}}, {0.5, 0.2, 0.3}), DataError);  // wrong order
  CHECK_FALSE(g.has_view("pagerank"));
  g.set_view("pagerank", {{2, 1}, {0}, {0}}, {0.5, 0.2, 0.3});
  CHECK(g.has_view("pagerank"));
  CHECK(g.ranked_neighbors("pagerank", 0)[0] == 2);
  CHECK_THROWS_AS(g.view("closeness"), DataError);
}

TEST_CASE("load_dataset remaps ids and merges duplicates") {
  TempDir dir;
  write_dataset(dir,
                "# user\titem\tweight\ttimestamp\nalice\tbook\t1\t50\nbob\tbook\t2\t40\nalice\tbook\t2\t30\n"
                "alice\tpen\t0\t10\nbob\tlamp\t1\n",
                "g1\talice,bob\n", "g1\tbook\t100\ng1\tbook\t90\ng1\tlamp\t120\n", "alice\tbob\nbob\talice\n");
  const Dataset ds = load_dataset(DatasetPaths::in_directory(dir.path()));
  CHECK(ds.ids.users.size() == 2);
  CHECK(ds.ids.users.name(0) == "alice");
  // zero-weight record is skipped but its item id is still interned
  CHECK(ds.ids.items.size() == 3);
  CHECK(ds.user_item.edges().size() == 3);
  const Edge& merged = ds.user_item.edges()[0];
  CHECK(merged.left == 0);
  CHECK(merged.weight == 3.0);
  CHECK(merged.timestamp == 30);
  CHECK(ds.group_item.edges().size() == 2);
  CHECK(ds.group_item.edges()[0].timestamp == 90);
  for (const Edge& e : ds.group_item.edges()) CHECK(e.weight == 1.0);
  CHECK(ds.groups.members[0] == std::vector<NodeId>{0, 1});
  CHECK(ds.warnings.empty());
}

TEST_CASE("one-directional social edges are symmetrized with a warning") {
  TempDir dir;
  write_dataset(dir, "a\tx\t1\nb\tx\t1\nc\tx\t1\n", "g\ta,b\n", "g\tx\t1\n", "a\tb\nb\tc\nc\tc\n");
  const Dataset ds = load_dataset(DatasetPaths::in_directory(dir.path()));
  CHECK(ds.social.edge_count() == 2);
  REQUIRE(ds.warnings.size() == 2);
  CHECK(ds.warnings[0].find("symmetrized 2") != std::string::npos);
  CHECK(ds.warnings[1].find("self loop") != std::string::npos);
}

TEST_CASE("malformed input names the file and line") {
  TempDir dir;
  write_dataset(dir, "a\tx\t1\na\tx\n", "g\ta\n", "g\tx\t1\n", "");
  CHECK(error_of(DatasetPaths::in_directory(dir.path())).rfind("user_item.tsv:2:", 0) == 0);

  write_dataset(dir, "a\tx\t1\na\ty\tlots\n", "g\ta\n", "g\tx\t1\n", "");
  CHECK(error_of(DatasetPaths::in_directory(dir.path())).rfind("user_item.tsv:2:", 0) == 0);

  write_dataset(dir, "a\tx\t-1\n", "g\ta\n", "g\tx\t1\n", "");
  CHECK(error_of(DatasetPaths::in_directory(dir.path())).find("negative weight") != std::string::npos);

  write_dataset(dir, "a\tx\t1\n", "g\ta,zed\n", "g\tx\t1\n", "");
  CHECK(error_of(DatasetPaths::in_directory(dir.path())).find("unknown member id zed") != std::string::npos);

  write_dataset(dir, "a\tx\t1\n", "g\ta\n", "h\tx\t1\n", "");
  CHECK(error_of(DatasetPaths::in_directory(dir.path())).find("group_item.tsv:1:") != std::string::npos);

  CHECK_THROWS_AS(load_dataset(DatasetPaths::in_directory(dir / "missing")), DataError);
}

TEST_CASE("id mapping survives a save/load round trip") {
  TempDir dir;
  IdMapping ids;
  ids.users.intern("u9");
  ids.users.intern("u1");
  ids.items.intern("book");
  ids.groups.intern("team");
  ids.save(dir / "ids.tsv");
  const IdMapping back = IdMapping::load(dir / "ids.tsv");
  CHECK(back == ids);
  CHECK(back.users.find("u1") == 1);
  CHECK_FALSE(back.users.find("u2").has_value());
}

TEST_CASE("loading with an existing mapping keeps its ids") {
  TempDir dir;
  write_dataset(dir, "b\tx\t1\na\ty\t1\n", "g\ta,b\n", "g\tx\t1\n", "");
  IdMapping ids;
  ids.users.intern("a");
  ids.users.intern("b");
  ids.items.intern("y");
  ids.items.intern("x");
  ids.groups.intern("g");
  const Dataset ds = load_dataset(DatasetPaths::in_directory(dir.path()), &ids);
  CHECK(ds.ids == ids);
  CHECK(ds.groups.members[0] == std::vector<NodeId>{0, 1});
}
