// Copyright 2026 The MLRN Authors.
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

#pragma once

#include <string>
#include <vector>

#include "optim.hpp"

namespace mlrn::testing {

// Snapshot of one tensor taken before an optimizer step.
struct LambTensorSnapshot {
  std::string name;
  std::vector<double> param;
  std::vector<double> grad;
  std::vector<double> m;
  std::vector<double> v;
};

struct LambSnapshot {
  std::uint64_t step = 0;  // completed steps before this one
  std::vector<LambTensorSnapshot> tensors;
};

LambSnapshot snapshot(const ModelParams<float>& params, const OptimizerState& state);

struct LambExpectation {
  std::vector<double> trust_ratio;
  std::vector<std::vector<double>> param_after;
};

// Straight from the update rule, in double, without any optimizer code.
LambExpectation expected_lamb_step(const LambSnapshot& before, const OptimizerConfig& cfg, double lr);

struct LambComparison {
  double max_ratio_rel_error = 0.0;
  double max_param_abs_error = 0.0;
};

LambComparison compare_lamb_step(const LambExpectation& want, const std::vector<LambTensorStats>& got_stats,
                                 const ModelParams<float>& got_params);

}  // namespace mlrn::testing
