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

// Group embedding from member embeddings X ([members][d]):
//
//   M_k    = softmax(X Wq_k (X Wk_k)^T * scale) X Wv_k        per head
//   O      = [M_1 ... M_h] Wo
//   a_i    = tanh(Ws O_i + bs)
//   lambda = softmax_i(a_i . as)
//   g      = sum_i lambda_i a_i
//
// scale is 1/sqrt(d) by default; AttentionScale::kPerHead uses 1/sqrt(d/h).

#pragma once

#include <span>
#include <vector>

#include "cagr/config.hpp"
#include "cagr/model_params.hpp"

namespace cagr {

template <class Real>
struct GroupForward {
  MatrixR<Real> members;                  // X
  std::vector<MatrixR<Real>> query;       // per head [n][d/h]
  std::vector<MatrixR<Real>> key;
  std::vector<MatrixR<Real>> value;
  std::vector<MatrixR<Real>> attention;   // per head [n][n], row-stochastic
  MatrixR<Real> heads;                    // [M_1 ... M_h], [n][d]
  MatrixR<Real> output;                   // O
  MatrixR<Real> pooled;                   // rows a_i
  VectorR<Real> lambda;
  VectorR<Real> group;                    // g
};

template <class Real>
class GroupEncoder {
 public:
  GroupEncoder(const BasicModelState<Real>& state, AttentionScale scale);

  Real scale() const { return scale_; }

  /// Throws UsageError for an empty member matrix.
  GroupForward<Real> forward(const MatrixR<Real>& members) const;

  /// Accumulates parameter gradients and returns d(loss)/d(members).
  MatrixR<Real> backward(const GroupForward<Real>& fwd, const VectorR<Real>& grad_group,
                         Gradients<Real>& grads) const;

 private:
  const BasicModelState<Real>& state_;
  Real scale_;
};

enum class BaselineStrategy { kMean, kWeighted };

/// Fixed aggregation: plain average, or a weighted sum whose non-negative
/// weights are renormalized to sum to one.
template <class Real>
VectorR<Real> baseline_aggregate(const MatrixR<Real>& members, BaselineStrategy strategy,
                                 std::span<const Real> weights = {});

}  // namespace cagr
