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

#include "gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace mlrn {

namespace {

struct Probe {
  double loss;
  std::vector<std::uint8_t> pattern;
};

Probe evaluate(const LossBuilder& build) {
  Graph<double> g;
  Var loss = build(g);
  if (auto bad = g.first_non_finite()) fail(ErrorCode::kNumeric, "grad_check: non-finite value in " + *bad);
  return {g.value(loss)[0], g.relu_pattern()};
}

}  // namespace

GradCheckResult grad_check(const LossBuilder& build, const std::vector<Tensor<double>*>& params, double eps,
                           bool skip_kinks) {
  require(eps > 0.0, ErrorCode::kInvalidArgument, "grad_check eps must be positive");
  for (Tensor<double>* p : params) {
    p->enable_grad();
    p->zero_grad();
  }
  std::vector<std::uint8_t> base_pattern;
  {
    Graph<double> g;
    Var loss = build(g);
    if (auto bad = g.first_non_finite()) fail(ErrorCode::kNumeric, "grad_check: non-finite value in " + *bad);
    base_pattern = g.relu_pattern();
    g.backward(loss);
  }
  GradCheckResult result;
  for (Tensor<double>* p : params) {
    std::vector<double> analytic(p->grad().begin(), p->grad().end());
    for (double a : analytic)
      if (!std::isfinite(a)) fail(ErrorCode::kNumeric, "grad_check: non-finite analytic gradient");
    for (std::size_t i = 0; i < p->size(); ++i) {
      const double saved = (*p)[i];
      (*p)[i] = saved + eps;
      Probe up = evaluate(build);
      (*p)[i] = saved - eps;
      Probe down = evaluate(build);
      (*p)[i] = saved;
      if (skip_kinks && (up.pattern != base_pattern || down.pattern != base_pattern)) {
        ++result.skipped_kinks;
        continue;
      }
      const double numeric = (up.loss - down.loss) / (2.0 * eps);
      const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-8});
      result.max_relative_error = std::max(result.max_relative_error, std::abs(analytic[i] - numeric) / denom);
      ++result.checked;
    }
  }
  return result;
}

}  // namespace mlrn
