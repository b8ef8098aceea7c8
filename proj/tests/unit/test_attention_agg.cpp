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

#include "cagr/attention_agg.hpp"
#include "cagr/errors.hpp"

using namespace cagr;
using Mat = MatrixR<double>;
using Vec = VectorR<double>;

namespace {

BasicModelState<double> state(std::uint64_t seed = 2, int d = 8, int heads = 2) {
  return init_model<double>({.d = d, .heads = heads, .views = 0, .users = 1, .items = 1}, seed);
}

Mat members(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Mat x(n, 8);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < 8; ++k) x(i, k) = 2.0 * uniform01(rng) - 1.0;
  return x;
}

Vec softmax(const Vec& z) {
  const Vec e = (z.array() - z.maxCoeff()).exp().matrix();
  return e / e.sum();
}

// Direct evaluation, one head and one row at a time.
Vec oracle_group(const BasicModelState<double>& s, const Mat& x, double scale) {
  const int n = static_cast<int>(x.rows()), d = s.shape.d, h = s.shape.heads, dh = s.shape.head_dim();
  Mat concat(n, d);
  for (int k = 0; k < h; ++k) {
    const Mat q = x * head_proj(s.layers.att_WQ, s.shape, k);
    const Mat kk = x * head_proj(s.layers.att_WK, s.shape, k);
    const Mat v = x * head_proj(s.layers.att_WV, s.shape, k);
    for (int i = 0; i < n; ++i) {
      Vec z(n);
      for (int j = 0; j < n; ++j) z[j] = q.row(i).dot(kk.row(j)) * scale;
      const Vec a = softmax(z);
      concat.block(i, k * dh, 1, dh) = a.transpose() * v;
    }
  }
  const Mat o = concat * square(s.layers.att_WO, s.shape);
  const auto ws = square(s.layers.pool_Ws, s.shape);
  const Vec bs = segment(s.layers.pool_bs, 0, d);
  const Vec as = segment(s.layers.pool_as, 0, d);
  Mat a(n, d);
  Vec score(n);
  for (int i = 0; i < n; ++i) {
    a.row(i) = (ws * o.row(i).transpose() + bs).array().tanh().matrix().transpose();
    score[i] = a.row(i).dot(as);
  }
  const Vec lambda = softmax(score);
  return a.transpose() * lambda;
}

}  // namespace

TEST_CASE("forward matches a direct computation") {
  for (auto scale : {AttentionScale::kModelDim, AttentionScale::kPerHead}) {
    const auto s = state(3);
    const GroupEncoder<double> enc(s, scale);
    const double expect_scale = 1.0 / std::sqrt(scale == AttentionScale::kModelDim ? 8.0 : 4.0);
    CHECK(enc.scale() == doctest::Approx(expect_scale));
    for (int n : {1, 2, 4, 7}) {
      const Mat x = members(n, n);
      CHECK((enc.forward(x).group - oracle_group(s, x, expect_scale)).norm() < 1e-12);
    }
  }
}

TEST_CASE("attention rows and lambda are simplexes") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto s = state(seed);
    const GroupEncoder<double> enc(s, AttentionScale::kModelDim);
    const auto f = enc.forward(members(5, seed + 100));
    for (const auto& a : f.attention) {
      for (int i = 0; i < a.rows(); ++i) CHECK(std::abs(a.row(i).sum() - 1.0) < 1e-6);
      CHECK(a.minCoeff() >= 0.0);
    }
    CHECK(std::abs(f.lambda.sum() - 1.0) < 1e-6);
    CHECK(f.lambda.minCoeff() >= 0.0);
  }
}

TEST_CASE("a singleton group attends only to itself") {
  const auto s = state(5);
  const GroupEncoder<double> enc(s, AttentionScale::kModelDim);
  const auto f = enc.forward(members(1, 9));
  for (const auto& a : f.attention) CHECK(a(0, 0) == doctest::Approx(1.0));
  CHECK(f.lambda[0] == doctest::Approx(1.0));
  CHECK((f.group - f.pooled.row(0).transpose()).norm() < 1e-12);
}

TEST_CASE("identical members share weight evenly") {
  const auto s = state(6);
  const GroupEncoder<double> enc(s, AttentionScale::kModelDim);
  Mat x(3, 8);
  for (int i = 0; i < 3; ++i) x.row(i) = members(1, 4).row(0);
  const auto f = enc.forward(x);
  for (int i = 0; i < 3; ++i) CHECK(f.lambda[i] == doctest::Approx(1.0 / 3.0));
  for (const auto& a : f.attention)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) CHECK(a(i, j) == doctest::Approx(1.0 / 3.0));
  CHECK((f.group - enc.forward(x.topRows(1)).group).norm() < 1e-12);
}

TEST_CASE("member order does not matter") {
  const auto s = state(7);
  const GroupEncoder<double> enc(s, AttentionScale::kModelDim);
  const Mat x = members(4, 3);
  const std::vector<int> perm = {2, 0, 3, 1};
  Mat y(4, 8);
  for (int i = 0; i < 4; ++i) y.row(i) = x.row(perm[i]);
  const auto fx = enc.forward(x);
  const auto fy = enc.forward(y);
  CHECK((fx.group - fy.group).norm() < 1e-6);
  for (int i = 0; i < 4; ++i) {
    CHECK((fy.output.row(i) - fx.output.row(perm[i])).norm() < 1e-6);
    CHECK(std::abs(fy.lambda[i] - fx.lambda[perm[i]]) < 1e-6);
  }
}

TEST_CASE("zero parameters give a zero group") {
  const auto s = init_model<double>({.d = 8, .heads = 2, .views = 0, .users = 1, .items = 1}, 1, {.zero = true});
  const GroupEncoder<double> enc(s, AttentionScale::kModelDim);
  const auto f = enc.forward(members(3, 1));
  CHECK(f.group.norm() == 0.0);
  for (int i = 0; i < 3; ++i) CHECK(f.lambda[i] == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("empty groups are rejected") {
  const auto s = state();
  const GroupEncoder<double> enc(s, AttentionScale::kModelDim);
  CHECK_THROWS_AS(enc.forward(Mat(0, 8)), UsageError);
}

TEST_CASE("backward matches finite differences") {
  auto s = state(11);
  const Mat x = members(3, 21);
  Vec c(8);
  c << 0.5, -0.2, 0.9, -1.3, 0.4, 0.1, -0.7, 0.6;
  auto loss = [&](const Mat& m) { return c.dot(GroupEncoder<double>(s, AttentionScale::kModelDim).forward(m).group); };

  Gradients<double> grads(s.shape);
  Mat grad_x;
  {
    const GroupEncoder<double> enc(s, AttentionScale::kModelDim);
    grad_x = enc.backward(enc.forward(x), c, grads);
  }
  const double eps = 1e-6;
  double worst = 0.0;
  std::vector<const std::vector<double>*> analytic;
  grads.layers.visit_attention([&](const char*, std::vector<double>& g) { analytic.push_back(&g); });
  std::size_t array = 0;
  s.layers.visit_attention([&](const char*, std::vector<double>& p) {
    const std::vector<double>* g = analytic[array++];
    for (std::size_t i = 0; i < p.size(); i += 3) {
      const double keep = p[i];
      p[i] = keep + eps;
      const double up = loss(x);
      p[i] = keep - eps;
      const double down = loss(x);
      p[i] = keep;
      worst = std::max(worst, std::abs((up - down) / (2 * eps) - (*g)[i]));
    }
  });
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 8; ++k) {
      Mat up = x, down = x;
      up(i, k) += eps;
      down(i, k) -= eps;
      worst = std::max(worst, std::abs((loss(up) - loss(down)) / (2 * eps) - grad_x(i, k)));
    }
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("baseline aggregators") {
  Mat x(2, 8);
  x.setZero();
  x(0, 0) = 1.0;
  x(1, 0) = 3.0;
  CHECK(baseline_aggregate<double>(x, BaselineStrategy::kMean)[0] == doctest::Approx(2.0));
  const std::vector<double> w = {1.0, 3.0};
  // weights renormalize to 1/4, 3/4
  CHECK(baseline_aggregate<double>(x, BaselineStrategy::kWeighted, w)[0] == doctest::Approx(2.5));
}
