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

// Trainable arrays, their initialization, serialization, and the sparse
// gradient buffer used by one SGD step.
//
// All arrays are flat row-major std::vector<Real>; Eigen maps give matrix
// views. Training runs in float; the gradient checker instantiates double.

#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cagr/errors.hpp"
#include "cagr/graph_store.hpp"

namespace cagr {

template <class Real>
using MatrixR = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class Real>
using VectorR = Eigen::Matrix<Real, Eigen::Dynamic, 1>;
template <class Real>
using MatMap = Eigen::Map<MatrixR<Real>>;
template <class Real>
using ConstMatMap = Eigen::Map<const MatrixR<Real>>;
template <class Real>
using VecMap = Eigen::Map<VectorR<Real>>;
template <class Real>
using ConstVecMap = Eigen::Map<const VectorR<Real>>;

struct ModelShape {
  std::int32_t d = 0;
  std::int32_t heads = 1;
  std::int32_t views = 0;
  std::int32_t users = 0;
  std::int32_t items = 0;

  std::int32_t head_dim() const { return d / heads; }
  /// Throws UsageError unless d % heads == 0 and all counts are sane.
  void validate() const;
  bool operator==(const ModelShape&) const = default;
};

/// Dense shared layers: per-view convolution, view fusion, attention, pooling.
template <class Real>
struct Layers {
  std::vector<Real> conv_P;   // [views][d][d]
  std::vector<Real> conv_p;   // [views][d]
  std::vector<Real> conv_W;   // [views][d][2d]
  std::vector<Real> conv_w;   // [views][d]
  std::vector<Real> view_z;   // [views][views*d]
  std::vector<Real> att_WQ;   // [heads][d][d/heads]
  std::vector<Real> att_WK;
  std::vector<Real> att_WV;
  std::vector<Real> att_WO;   // [d][d]
  std::vector<Real> pool_Ws;  // [d][d]
  std::vector<Real> pool_bs;  // [d]
  std::vector<Real> pool_as;  // [d]

  void resize(const ModelShape& s) {
    const std::size_t d = s.d, c = s.views, h = s.heads, dh = s.head_dim();
    conv_P.assign(c * d * d, Real(0));
    conv_p.assign(c * d, Real(0));
    conv_W.assign(c * d * 2 * d, Real(0));
    conv_w.assign(c * d, Real(0));
    view_z.assign(c * c * d, Real(0));
    att_WQ.assign(h * d * dh, Real(0));
    att_WK.assign(h * d * dh, Real(0));
    att_WV.assign(h * d * dh, Real(0));
    att_WO.assign(d * d, Real(0));
    pool_Ws.assign(d * d, Real(0));
    pool_bs.assign(d, Real(0));
    pool_as.assign(d, Real(0));
  }

  template <class F>
  void visit_conv(F&& f) {
    f("conv_P", conv_P);
    f("conv_p", conv_p);
    f("conv_W", conv_W);
    f("conv_w", conv_w);
    f("view_z", view_z);
  }
  template <class F>
  void visit_attention(F&& f) {
    f("att_WQ", att_WQ);
    f("att_WK", att_WK);
    f("att_WV", att_WV);
    f("att_WO", att_WO);
    f("pool_Ws", pool_Ws);
    f("pool_bs", pool_bs);
    f("pool_as", pool_as);
  }
  template <class F>
  void visit(F&& f) {
    visit_conv(f);
    visit_attention(f);
  }
  template <class F>
  void visit(F&& f) const {
    const_cast<Layers*>(this)->visit([&](const char* name, std::vector<Real>& v) {
      f(name, static_cast<const std::vector<Real>&>(v));
    });
  }

  bool operator==(const Layers&) const = default;
};

template <class Real>
struct BasicModelState {
  ModelShape shape;
  std::vector<Real> user_base;  // [users][d]
  std::vector<Real> item_emb;   // [items][d]
  Layers<Real> layers;

  template <class F>
  void visit(F&& f) {
    f("user_base", user_base);
    f("item_emb", item_emb);
    layers.visit(f);
  }
  template <class F>
  void visit(F&& f) const {
    f("user_base", user_base);
    f("item_emb", item_emb);
    layers.visit(f);
  }

  std::span<Real> user(NodeId u) { return {user_base.data() + std::size_t(u) * shape.d, std::size_t(shape.d)}; }
  std::span<const Real> user(NodeId u) const {
    return {user_base.data() + std::size_t(u) * shape.d, std::size_t(shape.d)};
  }
  std::span<Real> item(NodeId v) { return {item_emb.data() + std::size_t(v) * shape.d, std::size_t(shape.d)}; }
  std::span<const Real> item(NodeId v) const {
    return {item_emb.data() + std::size_t(v) * shape.d, std::size_t(shape.d)};
  }

  bool all_finite() const {
    bool ok = true;
    visit([&](const char*, const std::vector<Real>& v) {
      for (Real x : v) ok = ok && std::isfinite(x);
    });
    return ok;
  }

  bool operator==(const BasicModelState&) const = default;
};

using ModelState = BasicModelState<float>;

// Matrix views over the flat layer arrays.
template <class Vec>
auto conv_P(Vec& v, const ModelShape& s, int view) {
  using Real = std::remove_const_t<typename Vec::value_type>;
  using Map = std::conditional_t<std::is_const_v<Vec>, ConstMatMap<Real>, MatMap<Real>>;
  return Map(v.data() + std::size_t(view) * s.d * s.d, s.d, s.d);
}
template <class Vec>
auto conv_W(Vec& v, const ModelShape& s, int view) {
  using Real = std::remove_const_t<typename Vec::value_type>;
  using Map = std::conditional_t<std::is_const_v<Vec>, ConstMatMap<Real>, MatMap<Real>>;
  return Map(v.data() + std::size_t(view) * s.d * 2 * s.d, s.d, 2 * s.d);
}
template <class Vec>
auto head_proj(Vec& v, const ModelShape& s, int head) {
  using Real = std::remove_const_t<typename Vec::value_type>;
  using Map = std::conditional_t<std::is_const_v<Vec>, ConstMatMap<Real>, MatMap<Real>>;
  return Map(v.data() + std::size_t(head) * s.d * s.head_dim(), s.d, s.head_dim());
}
template <class Vec>
auto square(Vec& v, const ModelShape& s) {
  using Real = std::remove_const_t<typename Vec::value_type>;
  using Map = std::conditional_t<std::is_const_v<Vec>, ConstMatMap<Real>, MatMap<Real>>;
  return Map(v.data(), s.d, s.d);
}
template <class Vec>
auto segment(Vec& v, std::size_t offset, std::size_t length) {
  using Real = std::remove_const_t<typename Vec::value_type>;
  using Map = std::conditional_t<std::is_const_v<Vec>, ConstVecMap<Real>, VecMap<Real>>;
  return Map(v.data() + offset, static_cast<Eigen::Index>(length));
}

/// Uniform [0, 1) with 53 random bits; identical across standard libraries.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

struct InitOptions {
  bool zero = false;  // every parameter exactly 0
};

/// Embeddings ~ U(-0.5/d, 0.5/d); weight matrices Glorot-uniform; biases 0.
/// Deterministic in `seed`; draws happen in visit() order.
template <class Real>
BasicModelState<Real> init_model(const ModelShape& shape, std::uint64_t seed,
                                 InitOptions options = {}) {
  shape.validate();
  BasicModelState<Real> s;
  s.shape = shape;
  const std::size_t d = shape.d;
  s.user_base.assign(std::size_t(shape.users) * d, Real(0));
  s.item_emb.assign(std::size_t(shape.items) * d, Real(0));
  s.layers.resize(shape);
  if (options.zero) return s;

  std::mt19937_64 rng(seed);
  auto fill = [&rng](std::vector<Real>& v, double bound) {
    for (Real& x : v) x = static_cast<Real>(-bound + 2.0 * bound * uniform01(rng));
  };
  auto glorot = [](double fan_in, double fan_out) { return std::sqrt(6.0 / (fan_in + fan_out)); };
  const double dd = static_cast<double>(d);
  const double c = shape.views;
  fill(s.user_base, 0.5 / dd);
  fill(s.item_emb, 0.5 / dd);
  fill(s.layers.conv_P, glorot(dd, dd));
  fill(s.layers.conv_W, glorot(2 * dd, dd));
  fill(s.layers.view_z, glorot(c * dd, c));
  fill(s.layers.att_WQ, glorot(dd, shape.head_dim()));
  fill(s.layers.att_WK, glorot(dd, shape.head_dim()));
  fill(s.layers.att_WV, glorot(dd, shape.head_dim()));
  fill(s.layers.att_WO, glorot(dd, dd));
  fill(s.layers.pool_Ws, glorot(dd, dd));
  fill(s.layers.pool_as, glorot(dd, 1));
  return s;
}

template <class To, class From>
BasicModelState<To> cast_state(const BasicModelState<From>& in) {
  BasicModelState<To> out;
  out.shape = in.shape;
  out.layers.resize(in.shape);
  auto copy = [](const std::vector<From>& src) { return std::vector<To>(src.begin(), src.end()); };
  out.user_base = copy(in.user_base);
  out.item_emb = copy(in.item_emb);
  std::vector<const std::vector<From>*> sources;
  in.layers.visit([&](const char*, const std::vector<From>& v) { sources.push_back(&v); });
  std::size_t i = 0;
  out.layers.visit([&](const char*, std::vector<To>& v) { v = copy(*sources[i++]); });
  return out;
}

/// Model file: "CAGRMODL", u32 version, u32 d, h, |C|, |U|, |V|, then for each
/// array u32 name length, name bytes, u64 element count, little-endian float32 data.
inline constexpr std::uint32_t kModelFormatVersion = 1;

void save_model(const ModelState& state, const std::filesystem::path& path);
/// Throws DataError on bad magic, version, truncation, or shape mismatch
/// with `expected` when given.
ModelState load_model(const std::filesystem::path& path, const ModelShape* expected = nullptr);

/// Gradient rows for a sparse subset of embedding rows (users or items).
template <class Real>
class SparseRows {
 public:
  void reset(std::int32_t count, std::int32_t dim) {
    dim_ = dim;
    slot_.assign(static_cast<std::size_t>(count), -1);
    ids_.clear();
    values_.clear();
  }

  std::span<Real> row(NodeId id) {
    if (slot_[id] < 0) {
      slot_[id] = static_cast<std::int32_t>(ids_.size());
      ids_.push_back(id);
      values_.resize(values_.size() + dim_, Real(0));
    }
    return {values_.data() + std::size_t(slot_[id]) * dim_, std::size_t(dim_)};
  }
  /// Empty span when the row has no gradient.
  std::span<const Real> find(NodeId id) const {
    if (slot_[id] < 0) return {};
    return {values_.data() + std::size_t(slot_[id]) * dim_, std::size_t(dim_)};
  }
  const std::vector<NodeId>& ids() const { return ids_; }

  void clear() {
    for (NodeId id : ids_) slot_[id] = -1;
    ids_.clear();
    values_.clear();
  }

 private:
  std::int32_t dim_ = 0;
  std::vector<std::int32_t> slot_;
  std::vector<NodeId> ids_;
  std::vector<Real> values_;
};

/// Accumulated gradient of one SGD step.
template <class Real>
struct Gradients {
  SparseRows<Real> users;
  SparseRows<Real> items;
  Layers<Real> layers;
  bool conv_touched = false;
  bool attention_touched = false;

  explicit Gradients(const ModelShape& s) {
    users.reset(s.users, s.d);
    items.reset(s.items, s.d);
    layers.resize(s);
  }

  void clear() {
    users.clear();
    items.clear();
    auto zero = [](const char*, std::vector<Real>& v) { std::fill(v.begin(), v.end(), Real(0)); };
    if (conv_touched) layers.visit_conv(zero);
    if (attention_touched) layers.visit_attention(zero);
    conv_touched = attention_touched = false;
  }

  /// state -= lr * gradient, then clears.
  void apply(BasicModelState<Real>& state, Real lr) {
    const std::size_t d = state.shape.d;
    for (NodeId u : users.ids()) {
      auto g = users.find(u);
      auto p = state.user(u);
      for (std::size_t k = 0; k < d; ++k) p[k] -= lr * g[k];
    }
    for (NodeId v : items.ids()) {
      auto g = items.find(v);
      auto p = state.item(v);
      for (std::size_t k = 0; k < d; ++k) p[k] -= lr * g[k];
    }
    std::vector<std::vector<Real>*> grads;
    auto collect = [&](const char*, std::vector<Real>& v) { grads.push_back(&v); };
    std::size_t i = 0;
    auto step = [&](const char*, std::vector<Real>& p) {
      const std::vector<Real>& g = *grads[i++];
      for (std::size_t k = 0; k < p.size(); ++k) p[k] -= lr * g[k];
    };
    if (conv_touched) {
      layers.visit_conv(collect);
      state.layers.visit_conv(step);
    }
    if (attention_touched) {
      grads.clear();
      i = 0;
      layers.visit_attention(collect);
      state.layers.visit_attention(step);
    }
    clear();
  }
};

}  // namespace cagr
