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

// Centrality-aware user representation.
//
// For every view k (one centrality ranking of the social graph):
//
//   h   = POOL_n relu(P_k u_n + p_k)        over the top-n ranked neighbors
//   o_k = normalize(relu(W_k [u_i; h] + w_k))
//
// and the views are fused with softmax weights
//
//   alpha_k = softmax_k(z_k . [o_1; ...; o_C]),   u_i = sum_k alpha_k o_k.
//
// With no views configured the representation is the base embedding itself.

#pragma once

#include <span>
#include <string>
#include <vector>

#include "cagr/config.hpp"
#include "cagr/graph_store.hpp"
#include "cagr/model_params.hpp"

namespace cagr {

template <class Real>
struct ViewForward {
  std::vector<NodeId> neighbors;  // receptive field, in rank order
  MatrixR<Real> neighbor_pre;     // [|neighbors|][d] P u_n + p
  VectorR<Real> input;            // [u_i; h], length 2d
  VectorR<Real> pre;              // W input + w
  Real norm = 0;                  // ||relu(pre)||
  VectorR<Real> out;              // unit vector (zero if relu(pre) == 0)
};

template <class Real>
struct UserForward {
  NodeId user = 0;
  std::vector<ViewForward<Real>> views;
  VectorR<Real> concat;  // [o_1; ...; o_C]
  VectorR<Real> alpha;
  VectorR<Real> fused;
};

struct ConvOptions {
  std::int32_t n_neighbors = 4;
  Pooling pooling = Pooling::kMean;
};

/// (fused, alpha) for the per-view outputs stacked as rows of `outputs`.
template <class Real>
std::pair<VectorR<Real>, VectorR<Real>> fuse_views(const Layers<Real>& layers, const ModelShape& shape,
                                                    const MatrixR<Real>& outputs);

template <class Real>
class UserEncoder {
 public:
  /// `views` name the social graph views in parameter order; each must exist.
  UserEncoder(const BasicModelState<Real>& state, const SocialGraph& social,
              const std::vector<std::string>& views, ConvOptions options);

  std::int32_t view_count() const { return static_cast<std::int32_t>(rankings_.size()); }

  ViewForward<Real> convolve_view(int view, NodeId user) const;
  UserForward<Real> forward(NodeId user) const;

  /// Accumulates d(loss)/d(params) given d(loss)/d(fused).
  void backward(const UserForward<Real>& fwd, const VectorR<Real>& grad_fused,
                Gradients<Real>& grads) const;

 private:
  void view_backward(int view, NodeId user, const ViewForward<Real>& fwd,
                     const VectorR<Real>& grad_out, Gradients<Real>& grads) const;

  const BasicModelState<Real>& state_;
  std::vector<const std::vector<std::vector<NodeId>>*> rankings_;
  ConvOptions options_;
};

}  // namespace cagr
