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

#include "cagr/centrality_conv.hpp"

#include <algorithm>

namespace cagr {

template <class Real>
std::pair<VectorR<Real>, VectorR<Real>> fuse_views(const Layers<Real>& layers, const ModelShape& shape,
                                                    const MatrixR<Real>& outputs) {
  const Eigen::Index c = outputs.rows();
  const Eigen::Index d = shape.d;
  ConstMatMap<Real> z(layers.view_z.data(), c, c * d);
  // row-major [C][d] storage is exactly the concatenation
  ConstVecMap<Real> concat(outputs.data(), c * d);
  VectorR<Real> logits = z * concat;
  VectorR<Real> alpha = (logits.array() - logits.maxCoeff()).exp();
  alpha /= alpha.sum();
  VectorR<Real> fused = outputs.transpose() * alpha;
  return {std::move(fused), std::move(alpha)};
}

template <class Real>
UserEncoder<Real>::UserEncoder(const BasicModelState<Real>& state, const SocialGraph& social,
                               const std::vector<std::string>& views, ConvOptions options)
    : state_(state), options_(options) {
  if (static_cast<std::int32_t>(views.size()) != state.shape.views) {
    throw UsageError("model has " + std::to_string(state.shape.views) + " views but " +
                     std::to_string(views.size()) + " were configured");
  }
  if (!views.empty() && social.user_count() != state.shape.users) {
    throw DataError("social graph and model disagree on the user count");
  }
  for (const auto& name : views) rankings_.push_back(&social.view(name));
}

template <class Real>
ViewForward<Real> UserEncoder<Real>::convolve_view(int view, NodeId user) const {
  const ModelShape& s = state_.shape;
  const Eigen::Index d = s.d;
  const auto& ranked = (*rankings_[view])[user];
  const std::size_t take = std::min<std::size_t>(ranked.size(), std::size_t(options_.n_neighbors));

  ViewForward<Real> f;
  f.neighbors.assign(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(take));
  auto P = conv_P(state_.layers.conv_P, s, view);
  auto p = segment(state_.layers.conv_p, std::size_t(view) * d, d);
  f.neighbor_pre.resize(static_cast<Eigen::Index>(take), d);
  VectorR<Real> h = VectorR<Real>::Zero(d);
  for (std::size_t n = 0; n < take; ++n) {
    auto un = state_.user(f.neighbors[n]);
    VectorR<Real> t = P * ConstVecMap<Real>(un.data(), d) + p;
    f.neighbor_pre.row(static_cast<Eigen::Index>(n)) = t.transpose();
    h += t.cwiseMax(Real(0));
  }
  if (take > 0 && options_.pooling == Pooling::kMean) h /= static_cast<Real>(take);

  f.input.resize(2 * d);
  auto ui = state_.user(user);
  f.input.head(d) = ConstVecMap<Real>(ui.data(), d);
  f.input.tail(d) = h;
  auto W = conv_W(state_.layers.conv_W, s, view);
  auto w = segment(state_.layers.conv_w, std::size_t(view) * d, d);
  f.pre = W * f.input + w;
  f.out = f.pre.cwiseMax(Real(0));
  f.norm = f.out.norm();
  if (f.norm > Real(0)) f.out /= f.norm;
  return f;
}

template <class Real>
UserForward<Real> UserEncoder<Real>::forward(NodeId user) const {
  const Eigen::Index d = state_.shape.d;
  UserForward<Real> f;
  f.user = user;
  if (rankings_.empty()) {
    auto ui = state_.user(user);
    f.fused = ConstVecMap<Real>(ui.data(), d);
    return f;
  }
  const int c = view_count();
  MatrixR<Real> outputs(c, d);
  for (int k = 0; k < c; ++k) {
    f.views.push_back(convolve_view(k, user));
    outputs.row(k) = f.views.back().out.transpose();
  }
  f.concat = ConstVecMap<Real>(outputs.data(), c * d);
  std::tie(f.fused, f.alpha) = fuse_views(state_.layers, state_.shape, outputs);
  return f;
}

template <class Real>
void UserEncoder<Real>::backward(const UserForward<Real>& f, const VectorR<Real>& grad_fused,
                                 Gradients<Real>& grads) const {
  const Eigen::Index d = state_.shape.d;
  if (rankings_.empty()) {
    VecMap<Real>(grads.users.row(f.user).data(), d) += grad_fused;
    return;
  }
  grads.conv_touched = true;
  const int c = view_count();

  // fused = sum_k alpha_k o_k,  alpha = softmax(z . concat)
  VectorR<Real> grad_alpha(c);
  MatrixR<Real> grad_out(c, d);
  for (int k = 0; k < c; ++k) {
    grad_alpha[k] = grad_fused.dot(f.views[k].out);
    grad_out.row(k) = f.alpha[k] * grad_fused.transpose();
  }
  const Real mean = f.alpha.dot(grad_alpha);
  VectorR<Real> grad_logit = f.alpha.cwiseProduct((grad_alpha.array() - mean).matrix());
  ConstMatMap<Real> z(state_.layers.view_z.data(), c, c * d);
  MatMap<Real> grad_z(grads.layers.view_z.data(), c, c * d);
  grad_z += grad_logit * f.concat.transpose();
  VectorR<Real> grad_concat = z.transpose() * grad_logit;
  for (int k = 0; k < c; ++k) grad_out.row(k) += grad_concat.segment(k * d, d).transpose();

  for (int k = 0; k < c; ++k) view_backward(k, f.user, f.views[k], grad_out.row(k).transpose(), grads);
}

template <class Real>
void UserEncoder<Real>::view_backward(int view, NodeId user, const ViewForward<Real>& f,
                                      const VectorR<Real>& grad_out, Gradients<Real>& grads) const {
  const ModelShape& s = state_.shape;
  const Eigen::Index d = s.d;
  if (!(f.norm > Real(0))) return;  // relu(pre) == 0: no active unit upstream

  // out = y / ||y||  =>  dy = (I - out out^T) grad_out / ||y||
  VectorR<Real> grad_pre = (grad_out - f.out * f.out.dot(grad_out)) / f.norm;
  for (Eigen::Index r = 0; r < d; ++r) {
    if (!(f.pre[r] > Real(0))) grad_pre[r] = Real(0);
  }
  auto W = conv_W(state_.layers.conv_W, s, view);
  conv_W(grads.layers.conv_W, s, view) += grad_pre * f.input.transpose();
  segment(grads.layers.conv_w, std::size_t(view) * d, d) += grad_pre;
  VectorR<Real> grad_input = W.transpose() * grad_pre;
  VecMap<Real>(grads.users.row(user).data(), d) += grad_input.head(d);

  const auto take = static_cast<Eigen::Index>(f.neighbors.size());
  if (take == 0) return;
  VectorR<Real> grad_h = grad_input.tail(d);
  if (options_.pooling == Pooling::kMean) grad_h /= static_cast<Real>(take);
  auto P = conv_P(state_.layers.conv_P, s, view);
  auto grad_P = conv_P(grads.layers.conv_P, s, view);
  auto grad_p = segment(grads.layers.conv_p, std::size_t(view) * d, d);
  for (Eigen::Index n = 0; n < take; ++n) {
    VectorR<Real> grad_t = grad_h;
    for (Eigen::Index r = 0; r < d; ++r) {
      if (!(f.neighbor_pre(n, r) > Real(0))) grad_t[r] = Real(0);
    }
    const NodeId nb = f.neighbors[n];
    auto un = state_.user(nb);
    grad_P += grad_t * ConstVecMap<Real>(un.data(), d).transpose();
    grad_p += grad_t;
    VecMap<Real>(grads.users.row(nb).data(), d) += P.transpose() * grad_t;
  }
}

template std::pair<VectorR<float>, VectorR<float>> fuse_views(const Layers<float>&, const ModelShape&,
                                                               const MatrixR<float>&);
template std::pair<VectorR<double>, VectorR<double>> fuse_views(const Layers<double>&,
                                                                 const ModelShape&,
                                                                 const MatrixR<double>&);
template class UserEncoder<float>;
template class UserEncoder<double>;

}  // namespace cagr
