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

// Central-difference check of both step losses on a small random instance,
// in double precision.
//
// The error of one parameter array is max_i |analytic_i - numeric_i| divided
// by max(max_i |analytic_i|, max_i |numeric_i|, 1e-6), so arrays whose
// gradient all but vanishes are judged on absolute error. Parameters are
// redrawn until no ReLU pre-activation lies within a few eps of its kink.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cagr/config.hpp"

namespace cagr {

struct GradCheckOptions {
  std::int32_t d = 6;
  std::int32_t heads = 2;
  std::int32_t views = 1;
  std::int32_t negatives = 2;
  double eps = 1e-3;
  bool five_point = true;  // false: plain (f(x+e) - f(x-e)) / 2e
  std::uint64_t seed = 3;
  Pooling pooling = Pooling::kMean;
  AttentionScale scale = AttentionScale::kModelDim;
  MemberInput members = MemberInput::kFused;
};

struct GradCheckEntry {
  std::string loss;   // "sgv" or "uv"
  std::string param;  // array name
  double error = 0.0;
  double max_abs_grad = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double max_error() const;
};

/// 6 users, 4 items, 2 groups. Throws UsageError for d % heads != 0 or
/// views outside [0, 4].
GradCheckReport run_grad_check(const GradCheckOptions& options);

}  // namespace cagr
