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

#include "cagr/attention_agg.hpp"

#include <cmath>

namespace cagr {

namespace {

template <class Real>
void softmax_rows(MatrixR<Real>& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    row = (row.array() - row.maxCoeff()).exp();
    row /= row.sum();
  }
}

}  // namespace

template <class Real>
GroupEncoder<Real>::GroupEncoder(const BasicModelState<Real>& state, AttentionScale scale)
    : state_(state) {
  const double width = scale == AttentionScale::kModelDim ? state.shape.d : state.shape.head_dim();
  scale_ = static_cast<Real>(1.0 / std::sqrt(width));
}

template <class Real>
GroupForward<Real> GroupEncoder<Real>::forward(const MatrixR<Real>& members) const {
  const ModelShape& s = state_.shape;
  const Eigen::Index n = members.rows();
  if (n == 0) throw UsageError("cannot aggregate an empty group");
  const Eigen::Index dh = s.head_dim();
  const auto& L = state_.layers;

  GroupForward<Real> f;
  f.members = members;
  f.heads.resize(n, s.d);
  for (int k = 0; k < s.heads; ++k) {
    f.query.push_back(members * head_proj(L.att_WQ, s, k));
    f.key.push_back(members * head_proj(L.att_WK, s, k));
    f.value.push_back(members * head_proj(L.att_WV, s, k));
    MatrixR<Real> a = f.query.back() * f.key.back().transpose() * scale_;
    softmax_rows(a);
    f.heads.middleCols(k * dh, dh) = a * f.value.back();
    f.attention.push_back(std::move(a));
  }
  f.output = f.heads * square(L.att_WO, s);
  f.pooled = ((f.output * square(L.pool_Ws, s).transpose()).rowwise() +
              segment(L.pool_bs, 0, s.d).transpose())
                 .array()
                 .tanh()
                 .matrix();
  VectorR<Real> logits = f.pooled * segment(L.pool_as, 0, s.d);
  f.lambda = (logits.array() - logits.maxCoeff()).exp();
  f.lambda /= f.lambda.sum();
  f.group = f.pooled.transpose() * f.lambda;
  return f;
}

template <class Real>
MatrixR<Real> GroupEncoder<Real>::backward(const GroupForward<Real>& f,
                                           const VectorR<Real>& grad_group,
                                           Gradients<Real>& grads) const {
  const ModelShape& s = state_.shape;
  const Eigen::Index dh = s.head_dim();
  const auto& L = state_.layers;
  auto& G = grads.layers;
  grads.attention_touched = true;

  // g = sum_i lambda_i a_i,  lambda = softmax(a . as)
  VectorR<Real> grad_lambda = f.pooled * grad_group;
  MatrixR<Real> grad_pooled = f.lambda * grad_group.transpose();
  const Real mean = f.lambda.dot(grad_lambda);
  VectorR<Real> grad_logit = f.lambda.cwiseProduct((grad_lambda.array() - mean).matrix());
  grad_pooled += grad_logit * segment(L.pool_as, 0, s.d).transpose();
  segment(G.pool_as, 0, s.d) += f.pooled.transpose() * grad_logit;

  // a = tanh(O Ws^T + bs)
  MatrixR<Real> grad_pre =
      grad_pooled.cwiseProduct((Real(1) - f.pooled.array().square()).matrix());
  square(G.pool_Ws, s) += grad_pre.transpose() * f.output;
  segment(G.pool_bs, 0, s.d) += grad_pre.colwise().sum().transpose();
  MatrixR<Real> grad_output = grad_pre * square(L.pool_Ws, s);

  // O = heads Wo
  square(G.att_WO, s) += f.heads.transpose() * grad_output;
  MatrixR<Real> grad_heads = grad_output * square(L.att_WO, s).transpose();

  MatrixR<Real> grad_members = MatrixR<Real>::Zero(f.members.rows(), s.d);
  for (int k = 0; k < s.heads; ++k) {
    const MatrixR<Real>& a = f.attention[k];
    MatrixR<Real> grad_m = grad_heads.middleCols(k * dh, dh);
    MatrixR<Real> grad_a = grad_m * f.value[k].transpose();
    MatrixR<Real> grad_v = a.transpose() * grad_m;
    // row softmax backward
    VectorR<Real> row_dot = (grad_a.cwiseProduct(a)).rowwise().sum();
    MatrixR<Real> grad_scores = a.cwiseProduct((grad_a.colwise() - row_dot)) * scale_;
    MatrixR<Real> grad_q = grad_scores * f.key[k];
    MatrixR<Real> grad_k = grad_scores.transpose() * f.query[k];

    head_proj(G.att_WQ, s, k) += f.members.transpose() * grad_q;
    head_proj(G.att_WK, s, k) += f.members.transpose() * grad_k;
    head_proj(G.att_WV, s, k) += f.members.transpose() * grad_v;
    grad_members += grad_q * head_proj(L.att_WQ, s, k).transpose();
    grad_members += grad_k * head_proj(L.att_WK, s, k).transpose();
    grad_members += grad_v * head_proj(L.att_WV, s, k).transpose();
  }
  return grad_members;
}

template <class Real>
VectorR<Real> baseline_aggregate(const MatrixR<Real>& members, BaselineStrategy strategy,
                                 std::span<const Real> weights) {
  if (members.rows() == 0) throw UsageError("cannot aggregate an empty group");
  if (strategy == BaselineStrategy::kMean) return members.colwise().mean().transpose();
  if (static_cast<Eigen::Index>(weights.size()) != members.rows()) {
    throw UsageError("weighted aggregation needs one weight per member");
  }
  Real total = 0;
  for (Real w : weights) {
    if (w < Real(0)) throw UsageError("aggregation weights must be non-negative");
    total += w;
  }
  if (!(total > Real(0))) throw UsageError("aggregation weights sum to zero");
  ConstVecMap<Real> w(weights.data(), members.rows());
  return members.transpose() * w / total;
}

template class GroupEncoder<float>;
template class GroupEncoder<double>;
template VectorR<float> baseline_aggregate(const MatrixR<float>&, BaselineStrategy,
                                           std::span<const float>);
template VectorR<double> baseline_aggregate(const MatrixR<double>&, BaselineStrategy,
                                            std::span<const double>);

}  // namespace cagr
