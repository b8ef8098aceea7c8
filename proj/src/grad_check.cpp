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

#include "cagr/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "cagr/centrality_conv.hpp"
#include "cagr/errors.hpp"
#include "cagr/trainer.hpp"

namespace cagr {

double GradCheckReport::max_error() const {
  double worst = 0.0;
  for (const auto& e : entries) worst = std::max(worst, e.error);
  return worst;
}

namespace {

using State = BasicModelState<double>;

// Dense copy of a Gradients buffer laid out like the state arrays.
std::vector<std::vector<double>> densify(const Gradients<double>& g, const State& s) {
  std::vector<std::vector<double>> out;
  const std::size_t d = s.shape.d;
  std::vector<double> users(s.user_base.size(), 0.0), items(s.item_emb.size(), 0.0);
  for (NodeId u : g.users.ids()) {
    auto row = g.users.find(u);
    std::copy(row.begin(), row.end(), users.begin() + static_cast<std::ptrdiff_t>(u * d));
  }
  for (NodeId v : g.items.ids()) {
    auto row = g.items.find(v);
    std::copy(row.begin(), row.end(), items.begin() + static_cast<std::ptrdiff_t>(v * d));
  }
  out.push_back(std::move(users));
  out.push_back(std::move(items));
  g.layers.visit([&](const char*, const std::vector<double>& v) { out.push_back(v); });
  return out;
}

double min_abs_preactivation(const State& state, const SocialGraph& social, const TrainingConfig& config) {
  const UserEncoder<double> encoder(state, social, config.views, {config.n_neighbors, config.pooling});
  double lowest = std::numeric_limits<double>::infinity();
  for (NodeId u = 0; u < state.shape.users; ++u) {
    const UserForward<double> f = encoder.forward(u);
    for (const auto& view : f.views) {
      lowest = std::min(lowest, view.pre.cwiseAbs().minCoeff());
      if (view.neighbor_pre.size() > 0) lowest = std::min(lowest, view.neighbor_pre.cwiseAbs().minCoeff());
    }
  }
  return lowest;
}

}  // namespace

GradCheckReport run_grad_check(const GradCheckOptions& o) {
  if (o.views < 0 || o.views > 4) throw UsageError("grad-check supports 0 to 4 views");
  TrainingConfig config;
  config.d = o.d;
  config.heads = o.heads;
  config.negatives = o.negatives;
  config.pooling = o.pooling;
  config.attention_scale = o.scale;
  config.members = o.members;
  config.n_neighbors = 2;  // some neighbors fall outside the receptive field
  const auto measures = all_centrality_measures();
  config.views.assign(measures.begin(), measures.begin() + o.views);
  config.validate();

  const std::vector<std::pair<NodeId, NodeId>> ties = {{0, 1}, {0, 2}, {1, 2}, {2, 3},
                                                       {3, 4}, {4, 5}, {1, 5}};
  SocialGraph social(6, ties);
  prepare_views(social, config);
  const ModelShape shape = model_shape(6, 4, config);

  // Every entry is drawn away from zero so relu units and biases are exercised.
  // Central differences are meaningless across a relu kink, so draws that put
  // any pre-activation within the perturbation's reach of zero are redrawn.
  State state = init_model<double>(shape, o.seed);
  Rng rng(o.seed ^ 0x9e3779b97f4a7c15ULL);
  const double margin = 20.0 * o.eps;
  bool clear = false;
  for (int attempt = 0; attempt < 100000 && !clear; ++attempt) {
    state.visit([&](const char*, std::vector<double>& v) {
      for (double& x : v) x = -0.6 + 1.2 * uniform01(rng);
    });
    clear = min_abs_preactivation(state, social, config) > margin;
  }
  if (!clear) throw NumericError("could not draw parameters away from relu kinks");

  const std::vector<std::vector<NodeId>> groups = {{0, 1, 2}, {3, 5}};
  struct Case {
    std::string name;
    std::function<double(const Network<double>&, Gradients<double>*)> loss;
  };
  const std::vector<NodeId> neg_a = {1, 3}, neg_b = {0, 2};
  const std::vector<Case> cases = {
      {"sgv",
       [&](const Network<double>& net, Gradients<double>* g) {
         return net.sgv_step(groups[0], 2, std::span(neg_a).first(std::min<std::size_t>(o.negatives, 2)), g) +
                net.sgv_step(groups[1], 1, std::span(neg_b).first(std::min<std::size_t>(o.negatives, 2)), g);
       }},
      {"uv",
       [&](const Network<double>& net, Gradients<double>* g) {
         return net.uv_step(2, 1, std::span(neg_b).first(std::min<std::size_t>(o.negatives, 2)), g) +
                net.uv_step(4, 3, std::span(neg_a).first(std::min<std::size_t>(o.negatives, 2)), g);
       }},
  };

  GradCheckReport report;
  for (const Case& c : cases) {
    Network<double> net(state, social, config);
    Gradients<double> grads(shape);
    c.loss(net, &grads);
    const auto analytic = densify(grads, state);

    std::vector<std::pair<std::string, std::vector<double>*>> params;
    state.visit([&](const char* name, std::vector<double>& v) { params.emplace_back(name, &v); });
    for (std::size_t p = 0; p < params.size(); ++p) {
      std::vector<double>& values = *params[p].second;
      double worst_diff = 0.0, scale = 0.0;
      for (std::size_t i = 0; i < values.size(); ++i) {
        const double saved = values[i];
        auto at = [&](double offset) {
          values[i] = saved + offset;
          return c.loss(net, nullptr);
        };
        // five-point stencil has truncation error O(eps^4), two-point O(eps^2)
        const double numeric =
            o.five_point
                ? (at(-2.0 * o.eps) - 8.0 * at(-o.eps) + 8.0 * at(o.eps) - at(2.0 * o.eps)) / (12.0 * o.eps)
                : (at(o.eps) - at(-o.eps)) / (2.0 * o.eps);
        values[i] = saved;
        worst_diff = std::max(worst_diff, std::abs(numeric - analytic[p][i]));
        scale = std::max({scale, std::abs(numeric), std::abs(analytic[p][i])});
      }
      GradCheckEntry entry{c.name, params[p].first, 0.0, scale};
      // floor keeps round-off on a vanishing gradient from reading as a large relative error
      entry.error = worst_diff / std::max(scale, 1e-6);
      report.entries.push_back(entry);
    }
  }
  return report;
}

}  // namespace cagr
