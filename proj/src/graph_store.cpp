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

#include "cagr/graph_store.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "cagr/errors.hpp"

namespace cagr {

BipartiteGraph::BipartiteGraph(std::int32_t left_count, std::int32_t right_count,
                               std::vector<Edge> edges)
    : left_count_(left_count),
      right_count_(right_count),
      edges_(std::move(edges)),
      adjacency_(static_cast<std::size_t>(left_count)),
      left_degree_(static_cast<std::size_t>(left_count), 0.0),
      item_out_degree_(static_cast<std::size_t>(right_count), 0.0) {
  for (const Edge& e : edges_) {
    if (e.left < 0 || e.left >= left_count_ || e.item < 0 || e.item >= right_count_) {
      throw DataError("edge (" + std::to_string(e.left) + ", " + std::to_string(e.item) +
                      ") out of range");
    }
    if (!(e.weight > 0.0) || !std::isfinite(e.weight)) {
      throw DataError("edge weight must be positive and finite, got " + std::to_string(e.weight));
    }
    adjacency_[e.left].push_back({e.item, e.weight});
    left_degree_[e.left] += e.weight;
    item_out_degree_[e.item] += e.weight;
  }
}

std::vector<double> empirical_distribution(const BipartiteGraph& g, NodeId left) {
  const double degree = g.left_degree(left);
  if (!(degree > 0.0)) {
    throw DataError("node " + std::to_string(left) + " has zero out-degree");
  }
  std::vector<double> p;
  p.reserve(g.adjacency(left).size());
  for (const WeightedItem& n : g.adjacency(left)) p.push_back(n.weight / degree);
  return p;
}

SocialGraph::SocialGraph(std::int32_t user_count,
                         std::span<const std::pair<NodeId, NodeId>> edges)
    : adjacency_(static_cast<std::size_t>(user_count)) {
  for (auto [a, b] : edges) {
    if (a < 0 || b < 0 || a >= user_count || b >= user_count) {
      throw DataError("social edge (" + std::to_string(a) + ", " + std::to_string(b) +
                      ") out of range");
    }
    if (a == b) continue;
    adjacency_[a].push_back(b);
    adjacency_[b].push_back(a);
  }
  for (auto& list : adjacency_) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
}

std::size_t SocialGraph::edge_count() const {
  std::size_t total = 0;
  for (const auto& list : adjacency_) total += list.size();
  return total / 2;
}

void SocialGraph::set_view(const std::string& measure, std::vector<std::vector<NodeId>> ranking,
                           std::vector<double> scores) {
  if (ranking.size() != adjacency_.size() || scores.size() != adjacency_.size()) {
    throw DataError("view '" + measure + "' does not cover every user");
  }
  views_[measure] = std::move(ranking);
  scores_[measure] = std::move(scores);
  try {
    check_invariants();
  } catch (const DataError&) {
    views_.erase(measure);
    scores_.erase(measure);
    throw;
  }
}

std::span<const NodeId> SocialGraph::ranked_neighbors(const std::string& measure, NodeId u) const {
  return view(measure)[u];
}

const std::vector<std::vector<NodeId>>& SocialGraph::view(const std::string& measure) const {
  auto it = views_.find(measure);
  if (it == views_.end()) throw DataError("no centrality view named '" + measure + "'");
  return it->second;
}

const std::vector<double>& SocialGraph::view_scores(const std::string& measure) const {
  auto it = scores_.find(measure);
  if (it == scores_.end()) throw DataError("no centrality view named '" + measure + "'");
  return it->second;
}

std::vector<std::string> SocialGraph::view_names() const {
  std::vector<std::string> names;
  for (const auto& [name, unused] : views_) names.push_back(name);
  return names;
}

void SocialGraph::check_invariants() const {
  const auto n = static_cast<NodeId>(adjacency_.size());
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v : adjacency_[u]) {
      if (!std::binary_search(adjacency_[v].begin(), adjacency_[v].end(), u)) {
        throw DataError("social graph asymmetric at (" + std::to_string(u) + ", " +
                        std::to_string(v) + ")");
      }
    }
  }
  for (const auto& [measure, ranking] : views_) {
    const auto& scores = scores_.at(measure);
    for (NodeId u = 0; u < n; ++u) {
      std::vector<NodeId> sorted = ranking[u];
      std::sort(sorted.begin(), sorted.end());
      if (sorted != adjacency_[u]) {
        throw DataError("view '" + measure + "' of user " + std::to_string(u) +
                        " is not a permutation of its neighbors");
      }
      for (std::size_t k = 1; k < ranking[u].size(); ++k) {
        if (scores[ranking[u][k]] > scores[ranking[u][k - 1]]) {
          throw DataError("view '" + measure + "' of user " + std::to_string(u) +
                          " is not ranked by score");
        }
      }
    }
  }
}

NodeId IdMap::intern(const std::string& name) {
  auto [it, inserted] = index_.emplace(name, static_cast<NodeId>(names_.size()));
  if (inserted) names_.push_back(name);
  return it->second;
}

std::optional<NodeId> IdMap::find(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void IdMapping::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  auto dump = [&out](const char* kind, const IdMap& map) {
    for (NodeId i = 0; i < map.size(); ++i) out << kind << '\t' << map.name(i) << '\t' << i << '\n';
  };
  dump("user", users);
  dump("item", items);
  dump("group", groups);
}

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return fields;
}

// Calls `fn(fields, line_number)` for every non-comment, non-blank line.
template <class Fn>
void for_each_record(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    fn(split_tabs(line), line_no);
  }
}

[[noreturn]] void malformed(const std::filesystem::path& path, std::size_t line_no,
                            const std::string& what) {
  throw DataError(path.filename().string() + ":" + std::to_string(line_no) + ": " + what);
}

template <class T>
T parse_number(const std::string& text, const std::filesystem::path& path, std::size_t line_no,
               const char* field) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    malformed(path, line_no, std::string("bad ") + field + " '" + text + "'");
  }
  return value;
}

}  // namespace

IdMapping IdMapping::load(const std::filesystem::path& path) {
  IdMapping mapping;
  for_each_record(path, [&](const std::vector<std::string>& f, std::size_t line_no) {
    if (f.size() != 3) malformed(path, line_no, "expected kind, id, index");
    IdMap* map = f[0] == "user" ? &mapping.users
                 : f[0] == "item" ? &mapping.items
                 : f[0] == "group" ? &mapping.groups
                                   : nullptr;
    if (map == nullptr) malformed(path, line_no, "unknown id kind '" + f[0] + "'");
    const auto dense = parse_number<NodeId>(f[2], path, line_no, "index");
    if (map->intern(f[1]) != dense) malformed(path, line_no, "ids are not dense and ordered");
  });
  return mapping;
}

DatasetPaths DatasetPaths::in_directory(const std::filesystem::path& dir) {
  return {dir / "user_item.tsv", dir / "group_item.tsv", dir / "groups.tsv", dir / "social.tsv"};
}

Dataset load_dataset(const DatasetPaths& paths, const IdMapping* existing) {
  Dataset ds;
  if (existing != nullptr) ds.ids = *existing;

  // user-item: duplicates merge by summing weights, keeping the earliest timestamp
  std::map<std::pair<NodeId, NodeId>, Edge> uv;
  for_each_record(paths.user_item, [&](const std::vector<std::string>& f, std::size_t line_no) {
    if (f.size() != 3 && f.size() != 4) malformed(paths.user_item, line_no, "expected 3 or 4 fields");
    Edge e;
    e.left = ds.ids.users.intern(f[0]);
    e.item = ds.ids.items.intern(f[1]);
    e.weight = parse_number<double>(f[2], paths.user_item, line_no, "weight");
    if (e.weight < 0.0) malformed(paths.user_item, line_no, "negative weight " + f[2]);
    if (e.weight == 0.0) return;
    if (f.size() == 4) {
      e.timestamp = parse_number<std::int64_t>(f[3], paths.user_item, line_no, "timestamp");
    }
    auto [it, inserted] = uv.emplace(std::make_pair(e.left, e.item), e);
    if (!inserted) {
      it->second.weight += e.weight;
      if (e.timestamp && (!it->second.timestamp || *e.timestamp < *it->second.timestamp)) {
        it->second.timestamp = e.timestamp;
      }
    }
  });

  std::vector<std::pair<NodeId, NodeId>> social_edges;
  std::size_t self_loops = 0;
  for_each_record(paths.social, [&](const std::vector<std::string>& f, std::size_t line_no) {
    if (f.size() != 2) malformed(paths.social, line_no, "expected 2 fields");
    const NodeId a = ds.ids.users.intern(f[0]);
    const NodeId b = ds.ids.users.intern(f[1]);
    if (a == b) {
      ++self_loops;
      return;
    }
    social_edges.emplace_back(a, b);
  });

  std::vector<std::pair<NodeId, std::vector<std::string>>> raw_groups;
  for_each_record(paths.groups, [&](const std::vector<std::string>& f, std::size_t line_no) {
    if (f.size() != 2) malformed(paths.groups, line_no, "expected group and member list");
    std::vector<std::string> names;
    std::stringstream ss(f[1]);
    std::string name;
    while (std::getline(ss, name, ',')) {
      if (!name.empty()) names.push_back(name);
    }
    if (names.empty()) malformed(paths.groups, line_no, "group '" + f[0] + "' has no members");
    raw_groups.emplace_back(ds.ids.groups.intern(f[0]), std::move(names));
  });

  // group-item: unit weights, duplicates collapse onto the earliest timestamp
  std::map<std::pair<NodeId, NodeId>, Edge> gv;
  for_each_record(paths.group_item, [&](const std::vector<std::string>& f, std::size_t line_no) {
    if (f.size() != 3) malformed(paths.group_item, line_no, "expected group, item, timestamp");
    auto group = ds.ids.groups.find(f[0]);
    if (!group) malformed(paths.group_item, line_no, "unknown group id " + f[0]);
    Edge e;
    e.left = *group;
    e.item = ds.ids.items.intern(f[1]);
    e.weight = 1.0;
    e.timestamp = parse_number<std::int64_t>(f[2], paths.group_item, line_no, "timestamp");
    auto [it, inserted] = gv.emplace(std::make_pair(e.left, e.item), e);
    if (!inserted && *e.timestamp < *it->second.timestamp) it->second.timestamp = e.timestamp;
  });

  const std::int32_t user_count = ds.ids.users.size();
  const std::int32_t item_count = ds.ids.items.size();

  ds.groups.members.resize(static_cast<std::size_t>(ds.ids.groups.size()));
  for (auto& [group, names] : raw_groups) {
    std::vector<NodeId>& members = ds.groups.members[group];
    if (!members.empty()) {
      throw DataError(paths.groups.filename().string() + ": group " + ds.ids.groups.name(group) +
                      " listed twice");
    }
    for (const std::string& name : names) {
      auto user = ds.ids.users.find(name);
      if (!user) {
        throw DataError(paths.groups.filename().string() + ": group " + ds.ids.groups.name(group) +
                        " has unknown member id " + name);
      }
      if (std::find(members.begin(), members.end(), *user) == members.end()) {
        members.push_back(*user);
      }
    }
  }
  for (NodeId g = 0; g < ds.groups.group_count(); ++g) {
    if (ds.groups.members[g].empty()) {
      throw DataError("group " + ds.ids.groups.name(g) + " has no membership record");
    }
  }

  std::vector<Edge> uv_edges;
  uv_edges.reserve(uv.size());
  for (auto& [key, e] : uv) uv_edges.push_back(e);
  std::vector<Edge> gv_edges;
  gv_edges.reserve(gv.size());
  for (auto& [key, e] : gv) gv_edges.push_back(e);
  ds.user_item = BipartiteGraph(user_count, item_count, std::move(uv_edges));
  ds.group_item = BipartiteGraph(ds.groups.group_count(), item_count, std::move(gv_edges));

  std::set<std::pair<NodeId, NodeId>> directed(social_edges.begin(), social_edges.end());
  std::size_t one_sided = 0;
  for (auto [a, b] : directed) {
    if (!directed.count({b, a})) ++one_sided;
  }
  if (one_sided > 0) {
    ds.warnings.push_back("social graph: symmetrized " + std::to_string(one_sided) +
                          " one-directional edges");
  }
  if (self_loops > 0) {
    ds.warnings.push_back("social graph: dropped " + std::to_string(self_loops) + " self loops");
  }
  ds.social = SocialGraph(user_count, social_edges);
  ds.social.check_invariants();
  return ds;
}

}  // namespace cagr
