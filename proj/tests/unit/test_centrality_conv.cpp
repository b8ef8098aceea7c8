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


#include <cmath>

#include "doctest.h"

#include "cagr/centrality.hpp"
#include "cagr/centrality_conv.hpp"

using namespace cagr;
using Vec = VectorR<double>;

namespace {

// path 0-1-2-3 plus hub 4 linked to everyone; user 5 isolated
SocialGraph social_with_views() {
  const std::vector<std::pair<NodeId, NodeId>> e = {{0, 1}, {1, 2}, {2, 3}, {4, 0}, {4, 1}, {4, 2}, {4, 3}};
  SocialGraph g(6, e);
  std::vector<CentralityScores> all;
  for (const auto& m : {"eigenvector", "pagerank"}) all.push_back(compute_centrality(g, m));
  build_views(g, all);
  return g;
}

BasicModelState<double> state(int views, std::uint64_t seed = 4) {
  return init_model<double>({.d = 6, .heads = 2, .views = views, .users = 6, .items = 3}, seed);
}

Vec base(const BasicModelState<double>& s, NodeId u) {
  Vec x(s.shape.d);
  for (int k = 0; k < s.shape.d; ++k) x[k] = s.user(u)[k];
  return x;
}

// Straight-line transcription of one view with plain Eigen types.
Vec oracle_view(const BasicModelState<double>& s, const SocialGraph& g, const std::string& measure, int view,
                NodeId u, int n) {
  const int d = s.shape.d;
  const auto P = conv_P(s.layers.conv_P, s.shape, view);
  const auto W = conv_W(s.layers.conv_W, s.shape, view);
  const Vec p = segment(s.layers.conv_p, std::size_t(view) * d, d);
  const Vec w = segment(s.layers.conv_w, std::size_t(view) * d, d);
  const auto ranked = g.ranked_neighbors(measure, u);
  const int take = std::min<int>(n, static_cast<int>(ranked.size()));
  Vec h = Vec::Zero(d);
  for (int i = 0; i < take; ++i) h += (P * base(s, ranked[i]) + p).cwiseMax(0.0);
  if (take > 0) h /= take;
  Vec in(2 * d);
  in << base(s, u), h;
  const Vec r = (W * in + w).cwiseMax(0.0);
  return r.norm() > 0 ? Vec(r / r.norm()) : Vec(Vec::Zero(d));
}

}  // namespace

TEST_CASE("single view output matches a direct computation") {
  const auto g = social_with_views();
  const auto s = state(1);
  const UserEncoder<double> enc(s, g, {"pagerank"}, {.n_neighbors = 2});
  for (NodeId u = 0; u < 6; ++u) {
    const auto f = enc.forward(u);
    const Vec expect = oracle_view(s, g, "pagerank", 0, u, 2);
    CHECK((f.fused - expect).norm() < 1e-12);
    CHECK(f.alpha.size() == 1);
    CHECK(f.alpha[0] == doctest::Approx(1.0));
  }
}

TEST_CASE("receptive field is the top-n ranked neighbors") {
  const auto g = social_with_views();
  const auto s = state(1);
  const UserEncoder<double> enc(s, g, {"pagerank"}, {.n_neighbors = 2});
  // hub 4 outranks everyone, then 2 (three links) beats 0 (two)
  const auto v = enc.convolve_view(0, 1);
  CHECK(v.neighbors == std::vector<NodeId>{4, 2});
  CHECK(enc.convolve_view(0, 5).neighbors.empty());
  const UserEncoder<double> none(s, g, {"pagerank"}, {.n_neighbors = 0});
  CHECK(none.convolve_view(0, 1).neighbors.empty());
}

TEST_CASE("view outputs are unit norm and fusion weights a simplex") {
  const auto g = social_with_views();
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto s = state(2, seed);
    const UserEncoder<double> enc(s, g, {"eigenvector", "pagerank"}, {});
    for (NodeId u = 0; u < 6; ++u) {
      const auto f = enc.forward(u);
      for (const auto& v : f.views) {
        if (v.norm > 0) CHECK(std::abs(v.out.norm() - 1.0) < 1e-6);
      }
      CHECK(std::abs(f.alpha.sum() - 1.0) < 1e-6);
      CHECK(f.alpha.minCoeff() >= 0.0);
      // fused = sum_k alpha_k o_k
      Vec expect = Vec::Zero(6);
      for (int k = 0; k < 2; ++k) expect += f.alpha[k] * f.views[k].out;
      CHECK((f.fused - expect).norm() < 1e-12);
    }
  }
}

TEST_CASE("fusion is a softmax over z . concat") {
  const auto s = state(2);
  MatrixR<double> outputs(2, 6);
  outputs.setRandom();
  const auto [fused, alpha] = fuse_views(s.layers, s.shape, outputs);
  Vec concat(12);
  concat << outputs.row(0).transpose(), outputs.row(1).transpose();
  const double z0 = segment(s.layers.view_z, 0, 12).dot(concat);
  const double z1 = segment(s.layers.view_z, 12, 12).dot(concat);
  const double a0 = 1.0 / (1.0 + std::exp(z1 - z0));
  CHECK(alpha[0] == doctest::Approx(a0).epsilon(1e-12));
  CHECK((fused - (alpha[0] * outputs.row(0) + alpha[1] * outputs.row(1)).transpose()).norm() < 1e-12);
}

TEST_CASE("no views means the base embedding") {
  const auto g = social_with_views();
  const auto s = state(0);
  const UserEncoder<double> enc(s, g, {}, {});
  for (NodeId u = 0; u < 6; ++u) CHECK(enc.forward(u).fused == base(s, u));
}

TEST_CASE("zero parameters give a zero representation") {
  const auto g = social_with_views();
  const auto s = init_model<double>({.d = 6, .heads = 2, .views = 2, .users = 6, .items = 3}, 1, {.zero = true});
  const UserEncoder<double> enc(s, g, {"eigenvector", "pagerank"}, {});
  const auto f = enc.forward(2);
  CHECK(f.fused.norm() == 0.0);
  CHECK(f.alpha[0] == doctest::Approx(0.5));
}

TEST_CASE("missing view is rejected") {
  const auto g = social_with_views();
  const auto s = state(1);
  CHECK_THROWS(UserEncoder<double>(s, g, {"closeness"}, {}));
}

TEST_CASE("backward matches finite differences") {
  const auto g = social_with_views();
  auto s = state(2, 13);
  const std::vector<std::string> views = {"eigenvector", "pagerank"};
  Vec c(6);
  c << 0.3, -1.1, 0.7, 0.2, -0.4, 0.9;
  const NodeId user = 1;
  auto loss = [&] { return c.dot(UserEncoder<double>(s, g, views, {}).forward(user).fused); };

  Gradients<double> grads(s.shape);
  {
    const UserEncoder<double> enc(s, g, views, {});
    enc.backward(enc.forward(user), c, grads);
  }
  const double eps = 1e-6;
  double worst = 0.0;
  auto probe = [&](double& x, double analytic) {
    const double keep = x;
    x = keep + eps;
    const double up = loss();
    x = keep - eps;
    const double down = loss();
    x = keep;
    worst = std::max(worst, std::abs((up - down) / (2 * eps) - analytic));
  };
  for (std::size_t i = 0; i < s.layers.conv_W.size(); i += 7) probe(s.layers.conv_W[i], grads.layers.conv_W[i]);
  for (std::size_t i = 0; i < s.layers.conv_P.size(); i += 5) probe(s.layers.conv_P[i], grads.layers.conv_P[i]);
  for (std::size_t i = 0; i < s.layers.view_z.size(); ++i) probe(s.layers.view_z[i], grads.layers.view_z[i]);
  for (NodeId u : {NodeId(1), NodeId(4), NodeId(0)}) {
    const auto row = grads.users.find(u);
    for (int k = 0; k < 6; ++k) probe(s.user_base[std::size_t(u) * 6 + k], row.empty() ? 0.0 : row[k]);
  }
  CHECK(worst < 1e-6);
}
