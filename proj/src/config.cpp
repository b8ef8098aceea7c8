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

#include "cagr/config.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "cagr/errors.hpp"

namespace cagr {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <class T>
T number(const std::string& key, const std::string& value) {
  T out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    // accept integer settings written in scientific notation, e.g. N = 4e6
    if constexpr (std::is_integral_v<T>) {
      double d = 0;
      auto [p2, e2] = std::from_chars(value.data(), value.data() + value.size(), d);
      if (e2 == std::errc() && p2 == value.data() + value.size() && d == static_cast<T>(d)) {
        return static_cast<T>(d);
      }
    }
    throw UsageError("bad value '" + value + "' for " + key);
  }
  return out;
}

bool boolean(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true" || value == "yes") return true;
  if (value == "0" || value == "false" || value == "no") return false;
  throw UsageError("bad value '" + value + "' for " + key);
}

std::vector<std::string> list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty() && item != "none") out.push_back(item);
  }
  return out;
}

}  // namespace

const char* to_string(TrainMode mode) {
  switch (mode) {
    case TrainMode::kSimple: return "st";
    case TrainMode::kTwoStage: return "tst";
    case TrainMode::kJoint: return "jt";
  }
  return "?";
}

const char* to_string(NoiseKind kind) {
  return kind == NoiseKind::kClassicDegree ? "classic" : "group_aware";
}

void TrainingConfig::set(const std::string& raw_key, const std::string& raw_value) {
  std::string key = trim(raw_key);
  for (char& c : key) {
    if (c == '-') c = '_';
  }
  const std::string value = trim(raw_value);
  if (key == "mode") {
    if (value == "st") mode = TrainMode::kSimple;
    else if (value == "tst") mode = TrainMode::kTwoStage;
    else if (value == "jt") mode = TrainMode::kJoint;
    else throw UsageError("mode must be st, tst or jt");
  } else if (key == "d") {
    d = number<std::int32_t>(key, value);
  } else if (key == "h" || key == "heads") {
    heads = number<std::int32_t>(key, value);
  } else if (key == "M" || key == "negatives") {
    negatives = number<std::int32_t>(key, value);
  } else if (key == "N" || key == "iterations") {
    iterations = number<std::int64_t>(key, value);
  } else if (key == "N1" || key == "stage1_iterations") {
    stage1_iterations = number<std::int64_t>(key, value);
  } else if (key == "N2" || key == "stage2_iterations") {
    stage2_iterations = number<std::int64_t>(key, value);
  } else if (key == "eta") {
    eta = number<double>(key, value);
  } else if (key == "gamma") {
    gamma = number<double>(key, value);
  } else if (key == "lr0" || key == "lr") {
    lr0 = number<double>(key, value);
  } else if (key == "lr_floor") {
    lr_floor = number<double>(key, value);
  } else if (key == "n_neighbors") {
    n_neighbors = number<std::int32_t>(key, value);
  } else if (key == "conv_layers") {
    conv_layers = number<std::int32_t>(key, value);
  } else if (key == "views") {
    views = list(value);
  } else if (key == "neg_sampler") {
    if (value == "classic") neg_sampler = NoiseKind::kClassicDegree;
    else if (value == "group_aware") neg_sampler = NoiseKind::kGroupAware;
    else throw UsageError("neg_sampler must be classic or group_aware");
  } else if (key == "pooling") {
    if (value == "mean") pooling = Pooling::kMean;
    else if (value == "sum") pooling = Pooling::kSum;
    else throw UsageError("pooling must be mean or sum");
  } else if (key == "members") {
    if (value == "fused") members = MemberInput::kFused;
    else if (value == "base") members = MemberInput::kBase;
    else throw UsageError("members must be fused or base");
  } else if (key == "scale") {
    if (value == "model_dim") attention_scale = AttentionScale::kModelDim;
    else if (value == "per_head") attention_scale = AttentionScale::kPerHead;
    else throw UsageError("scale must be model_dim or per_head");
  } else if (key == "seed") {
    seed = number<std::uint64_t>(key, value);
  } else if (key == "workers") {
    workers = number<std::int32_t>(key, value);
  } else if (key == "check_finite") {
    check_finite = boolean(key, value);
  } else if (key == "holdout_validation") {
    holdout_validation = boolean(key, value);
  } else if (key == "loss_window") {
    loss_window = number<std::int64_t>(key, value);
  } else if (key == "trace_every") {
    trace_every = number<std::int64_t>(key, value);
  } else if (key == "damping") {
    centrality.damping = number<double>(key, value);
  } else if (key == "centrality_tol") {
    centrality.tol = number<double>(key, value);
  } else if (key == "centrality_max_iter") {
    centrality.max_iter = number<int>(key, value);
  } else if (key == "betweenness_exact_limit") {
    centrality.betweenness_exact_limit = number<std::int32_t>(key, value);
  } else if (key == "betweenness_samples") {
    centrality.betweenness_samples = number<std::int32_t>(key, value);
  } else {
    throw UsageError("unknown setting '" + key + "'");
  }
}

void TrainingConfig::validate() const {
  if (d < 1 || heads < 1) throw UsageError("d and h must be positive");
  if (d % heads != 0) {
    throw UsageError("d (" + std::to_string(d) + ") must be divisible by h (" +
                     std::to_string(heads) + ")");
  }
  if (negatives < 1) throw UsageError("M must be at least 1");
  if (iterations < 1) throw UsageError("N must be at least 1");
  if (stage1_iterations < 0 || stage2_iterations < 0) throw UsageError("N1/N2 must be >= 0");
  if (eta < 0) throw UsageError("eta must be non-negative");
  if (!(gamma > 0)) throw UsageError("gamma must be positive");
  if (lr0 < 0) throw UsageError("lr0 must be non-negative");
  if (!(lr_floor > 0 && lr_floor <= 1)) throw UsageError("lr_floor must lie in (0, 1]");
  if (n_neighbors < 0) throw UsageError("n_neighbors must be non-negative");
  if (conv_layers != 1) throw UsageError("only one convolution layer is supported");
  if (workers < 1) throw UsageError("workers must be at least 1");
  if (loss_window < 1 || trace_every < 1) throw UsageError("loss_window and trace_every must be >= 1");
  for (std::size_t i = 0; i < views.size(); ++i) {
    bool known = false;
    for (const auto& m : all_centrality_measures()) known = known || m == views[i];
    if (!known) throw UsageError("unknown view '" + views[i] + "'");
    for (std::size_t j = 0; j < i; ++j) {
      if (views[j] == views[i]) throw UsageError("view '" + views[i] + "' listed twice");
    }
  }
}

std::string TrainingConfig::to_text() const {
  std::ostringstream out;
  out << std::setprecision(17);
  std::string view_list;
  for (const auto& v : views) view_list += (view_list.empty() ? "" : ",") + v;
  out << "mode = " << to_string(mode) << '\n'
      << "d = " << d << '\n'
      << "h = " << heads << '\n'
      << "M = " << negatives << '\n'
      << "N = " << iterations << '\n'
      << "N1 = " << stage1_iterations << '\n'
      << "N2 = " << stage2_iterations << '\n'
      << "eta = " << eta << '\n'
      << "gamma = " << gamma << '\n'
      << "lr0 = " << lr0 << '\n'
      << "lr_floor = " << lr_floor << '\n'
      << "n_neighbors = " << n_neighbors << '\n'
      << "conv_layers = " << conv_layers << '\n'
      << "views = " << (view_list.empty() ? "none" : view_list) << '\n'
      << "neg_sampler = " << to_string(neg_sampler) << '\n'
      << "pooling = " << (pooling == Pooling::kMean ? "mean" : "sum") << '\n'
      << "members = " << (members == MemberInput::kFused ? "fused" : "base") << '\n'
      << "scale = " << (attention_scale == AttentionScale::kModelDim ? "model_dim" : "per_head") << '\n'
      << "seed = " << seed << '\n'
      << "workers = " << workers << '\n'
      << "check_finite = " << (check_finite ? "true" : "false") << '\n'
      << "holdout_validation = " << (holdout_validation ? "true" : "false") << '\n'
      << "loss_window = " << loss_window << '\n'
      << "trace_every = " << trace_every << '\n'
      << "damping = " << centrality.damping << '\n'
      << "centrality_tol = " << centrality.tol << '\n'
      << "centrality_max_iter = " << centrality.max_iter << '\n'
      << "betweenness_exact_limit = " << centrality.betweenness_exact_limit << '\n'
      << "betweenness_samples = " << centrality.betweenness_samples << '\n';
  return out.str();
}

TrainingConfig TrainingConfig::parse(const std::string& text) {
  TrainingConfig config;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = trim(line.substr(0, line.find('#')));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw UsageError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    config.set(body.substr(0, eq), body.substr(eq + 1));
  }
  return config;
}

TrainingConfig TrainingConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

}  // namespace cagr
