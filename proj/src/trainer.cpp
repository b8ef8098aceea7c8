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

#include "cagr/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <thread>

#include "cagr/errors.hpp"

namespace cagr {

namespace {

template <class Real>
ConvOptions conv_options(const TrainingConfig& config) {
  return {config.n_neighbors, config.pooling};
}

// log(1 + exp(x)) without overflow
double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

template <class Real>
Network<Real>::Network(const BasicModelState<Real>& state, const SocialGraph& social,
                       const TrainingConfig& config)
    : state_(state),
      users_(state, social, config.views, conv_options<Real>(config)),
      groups_(state, config.attention_scale),
      members_(config.members) {}

template <class Real>
VectorR<Real> Network<Real>::user_vector(NodeId user) const {
  return users_.forward(user).fused;
}

template <class Real>
VectorR<Real> Network<Real>::group_vector(std::span<const NodeId> members) const {
  const Eigen::Index d = state_.shape.d;
  MatrixR<Real> x(static_cast<Eigen::Index>(members.size()), d);
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (members_ == MemberInput::kFused) {
      x.row(static_cast<Eigen::Index>(i)) = users_.forward(members[i]).fused.transpose();
    } else {
      auto u = state_.user(members[i]);
      x.row(static_cast<Eigen::Index>(i)) = ConstVecMap<Real>(u.data(), d).transpose();
    }
  }
  return groups_.forward(x).group;
}

template <class Real>
Real Network<Real>::score_items(const VectorR<Real>& rep, NodeId positive,
                                std::span<const NodeId> negatives, Gradients<Real>* grads,
                                VectorR<Real>* grad_rep) const {
  const Eigen::Index d = state_.shape.d;
  double loss = 0.0;
  auto term = [&](NodeId item, double sign) {
    auto v = state_.item(item);
    ConstVecMap<Real> vec(v.data(), d);
    const double s = std::clamp(static_cast<double>(rep.dot(vec)), -kScoreClamp, kScoreClamp);
    // -log sigma(sign * s) = softplus(-sign * s); derivative wrt s is -sign * sigma(-sign * s)
    loss += softplus(-sign * s);
    if (grads != nullptr) {
      const auto coeff = static_cast<Real>(-sign * sigmoid(-sign * s));
      *grad_rep += coeff * vec;
      VecMap<Real>(grads->items.row(item).data(), d) += coeff * rep;
    }
  };
  term(positive, 1.0);
  for (NodeId k : negatives) term(k, -1.0);
  return static_cast<Real>(loss);
}

template <class Real>
Real Network<Real>::sgv_step(std::span<const NodeId> members, NodeId positive,
                             std::span<const NodeId> negatives, Gradients<Real>* grads) const {
  const Eigen::Index d = state_.shape.d;
  const auto n = static_cast<Eigen::Index>(members.size());
  std::vector<UserForward<Real>> member_fwd;
  MatrixR<Real> x(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (members_ == MemberInput::kFused) {
      member_fwd.push_back(users_.forward(members[i]));
      x.row(i) = member_fwd.back().fused.transpose();
    } else {
      auto u = state_.user(members[i]);
      x.row(i) = ConstVecMap<Real>(u.data(), d).transpose();
    }
  }
  GroupForward<Real> gf = groups_.forward(x);
  VectorR<Real> grad_group = VectorR<Real>::Zero(d);
  const Real loss = score_items(gf.group, positive, negatives, grads, &grad_group);
  if (grads == nullptr) return loss;

  MatrixR<Real> grad_x = groups_.backward(gf, grad_group, *grads);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (members_ == MemberInput::kFused) {
      users_.backward(member_fwd[i], grad_x.row(i).transpose(), *grads);
    } else {
      VecMap<Real>(grads->users.row(members[i]).data(), d) += grad_x.row(i).transpose();
    }
  }
  return loss;
}

template <class Real>
Real Network<Real>::uv_step(NodeId user, NodeId positive, std::span<const NodeId> negatives,
                            Gradients<Real>* grads) const {
  const Eigen::Index d = state_.shape.d;
  UserForward<Real> uf = users_.forward(user);
  VectorR<Real> grad_user = VectorR<Real>::Zero(d);
  const Real loss = score_items(uf.fused, positive, negatives, grads, &grad_user);
  if (grads != nullptr) users_.backward(uf, grad_user, *grads);
  return loss;
}

template class Network<float>;
template class Network<double>;

ModelShape model_shape(std::int32_t users, std::int32_t items, const TrainingConfig& config) {
  ModelShape s;
  s.d = config.d;
  s.heads = config.heads;
  s.views = static_cast<std::int32_t>(config.views.size());
  s.users = users;
  s.items = items;
  s.validate();
  return s;
}

void prepare_views(SocialGraph& social, const TrainingConfig& config) {
  std::vector<CentralityScores> scores;
  for (const auto& measure : config.views) {
    if (!social.has_view(measure)) scores.push_back(compute_centrality(social, measure, config.centrality));
  }
  build_views(social, scores);
}

namespace {

enum class Phase { kJoint, kGroupOnly, kUserOnly };

class MovingAverage {
 public:
  explicit MovingAverage(std::int64_t window) : buffer_(static_cast<std::size_t>(window), 0.0) {}
  void add(double v) {
    auto& slot = buffer_[next_];
    sum_ += v - slot;
    slot = v;
    next_ = (next_ + 1) % buffer_.size();
    count_ = std::min(count_ + 1, buffer_.size());
  }
  bool empty() const { return count_ == 0; }
  double mean() const { return sum_ / static_cast<double>(count_); }

 private:
  std::vector<double> buffer_;
  std::size_t next_ = 0;
  std::size_t count_ = 0;
  double sum_ = 0.0;
};

class Trainer {
 public:
  Trainer(const TrainingData& data, const TrainingConfig& config, const TrainHooks& hooks,
          TrainResult& result)
      : data_(data), config_(config), hooks_(hooks), result_(result) {
    if (data.user_item.right_count() != result.state.shape.items ||
        data.user_item.left_count() != result.state.shape.users) {
      throw DataError("model shape does not match the user-item graph");
    }
    if (!data.user_item.edges().empty()) {
      uv_edges_.emplace(data.user_item);
      uv_noise_ = classic_noise(data.user_item);
    }
    if (!data.group_item.edges().empty()) {
      gv_edges_.emplace(data.group_item);
      if (config.neg_sampler == NoiseKind::kClassicDegree) {
        gv_noise_ = classic_noise(data.group_item);
      } else {
        group_noise_.emplace(data.user_item, data.groups, config.gamma);
      }
    }
  }

  void run(Phase phase, std::int64_t steps, std::int64_t step_offset) {
    if (steps == 0) return;
    if ((phase != Phase::kUserOnly) && !gv_edges_) {
      throw DataError("no group-item training interactions");
    }
    const bool needs_uv = phase == Phase::kUserOnly || (phase == Phase::kJoint && config_.eta > 0);
    if (needs_uv && !uv_edges_) throw DataError("no user-item interactions");

    std::atomic<std::int64_t> counter{0};
    std::vector<std::thread> pool;
    for (int w = 1; w < config_.workers; ++w) {
      pool.emplace_back([&, w] { worker(w, phase, steps, step_offset, counter); });
    }
    worker(0, phase, steps, step_offset, counter);
    for (auto& t : pool) t.join();
    ++phase_index_;
  }

 private:
  void worker(int id, Phase phase, std::int64_t steps, std::int64_t offset,
              std::atomic<std::int64_t>& counter) {
    const bool record = id == 0;
    ModelState& state = result_.state;
    Network<float> net(state, data_.social, config_);
    Gradients<float> grads(state.shape);
    Rng rng(config_.seed + static_cast<std::uint64_t>(id) +
            1000003ULL * static_cast<std::uint64_t>(phase_index_));
    std::vector<NodeId> negatives(static_cast<std::size_t>(config_.negatives));
    MovingAverage gv_avg(config_.loss_window), uv_avg(config_.loss_window);

    while (true) {
      const std::int64_t t = counter.fetch_add(1, std::memory_order_relaxed);
      if (t >= steps) break;
      const double lr =
          config_.lr0 * std::max(1.0 - static_cast<double>(t) / static_cast<double>(steps), config_.lr_floor);

      GraphChoice graph = phase == Phase::kGroupOnly ? GraphChoice::kGroupItem
                          : phase == Phase::kUserOnly ? GraphChoice::kUserItem
                                                      : choose_graph(config_.eta, rng);
      double loss = 0.0;
      if (graph == GraphChoice::kGroupItem) {
        const Edge& e = gv_edges_->draw(rng);
        if (group_noise_) {
          auto noise = group_noise_->get(e.left);
          for (auto& k : negatives) k = draw_negative(*noise, e.item, rng);
        } else {
          for (auto& k : negatives) k = draw_negative(gv_noise_, e.item, rng);
        }
        loss = net.sgv_step(data_.groups.members[e.left], e.item, negatives, &grads);
      } else {
        const Edge& e = uv_edges_->draw(rng);
        for (auto& k : negatives) k = draw_negative(uv_noise_, e.item, rng);
        loss = net.uv_step(e.left, e.item, negatives, &grads);
      }
      grads.apply(state, static_cast<float>(lr));

      if (config_.check_finite && !state.all_finite()) {
        throw NumericError("non-finite parameter after iteration " + std::to_string(offset + t));
      }
      if (!record) continue;
      (graph == GraphChoice::kGroupItem ? result_.group_item_steps : result_.user_item_steps) += 1;
      (graph == GraphChoice::kGroupItem ? gv_avg : uv_avg).add(loss);
      if (hooks_.on_step) hooks_.on_step({offset + t, graph, loss});
      if ((t + 1) % config_.trace_every == 0 || t + 1 == steps) {
        if (!gv_avg.empty()) result_.trace.push_back({offset + t + 1, GraphChoice::kGroupItem, gv_avg.mean()});
        if (!uv_avg.empty()) result_.trace.push_back({offset + t + 1, GraphChoice::kUserItem, uv_avg.mean()});
      }
    }
  }

  const TrainingData& data_;
  const TrainingConfig& config_;
  const TrainHooks& hooks_;
  TrainResult& result_;
  std::optional<EdgeSampler> uv_edges_;
  std::optional<EdgeSampler> gv_edges_;
  AliasTable uv_noise_;
  AliasTable gv_noise_;
  std::optional<GroupNoiseCache> group_noise_;
  int phase_index_ = 0;
};

}  // namespace

TrainResult train(const TrainingData& data, const TrainingConfig& config, const TrainHooks& hooks) {
  config.validate();
  const ModelShape shape = model_shape(data.user_item.left_count(), data.user_item.right_count(), config);
  return train_from(init_model<float>(shape, config.seed), data, config, hooks);
}

TrainResult train_from(ModelState initial, const TrainingData& data, const TrainingConfig& config,
                       const TrainHooks& hooks) {
  config.validate();
  if (initial.shape.d != config.d || initial.shape.heads != config.heads ||
      initial.shape.views != static_cast<std::int32_t>(config.views.size())) {
    throw DataError("initial model shape does not match the config");
  }
  TrainResult result;
  result.state = std::move(initial);
  Trainer trainer(data, config, hooks, result);
  const std::int64_t n = config.iterations;
  switch (config.mode) {
    case TrainMode::kSimple:
      trainer.run(Phase::kGroupOnly, n, 0);
      break;
    case TrainMode::kTwoStage: {
      const std::int64_t n1 = config.stage1_iterations > 0 ? config.stage1_iterations : n;
      const std::int64_t n2 = config.stage2_iterations > 0 ? config.stage2_iterations : n;
      trainer.run(Phase::kUserOnly, n1, 0);
      trainer.run(Phase::kGroupOnly, n2, n1);
      break;
    }
    case TrainMode::kJoint:
      trainer.run(Phase::kJoint, n, 0);
      break;
  }
  return result;
}

void write_loss_trace(const std::vector<TraceRow>& trace, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out.precision(9);
  out << "# step\tgraph\tloss\n";
  for (const TraceRow& r : trace) {
    out << r.step << '\t' << (r.graph == GraphChoice::kGroupItem ? "gv" : "uv") << '\t' << r.loss << '\n';
  }
}

}  // namespace cagr
