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

#include <cstddef>
#include <functional>
#include <vector>

#include "tensor.hpp"

namespace mlrn {

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t checked = 0;
  // Elements whose +/-eps stencil changed a relu activation pattern; the
  // central difference is not a derivative oracle there.
  std::size_t skipped_kinks = 0;
};

// Rebuilds the loss with `build` on a fresh graph for every probe, so `build`
// must be deterministic and bind exactly the tensors in `params`.
using LossBuilder = std::function<Var(Graph<double>&)>;

// Compares reverse-mode gradients with central differences
// (f(x+eps) - f(x-eps)) / (2 eps), element by element, using the relative
// error |a-b| / max(|a|, |b|, 1e-8). Throws kNumeric on non-finite values.
GradCheckResult grad_check(const LossBuilder& build, const std::vector<Tensor<double>*>& params, double eps,
                           bool skip_kinks = true);

}  // namespace mlrn
