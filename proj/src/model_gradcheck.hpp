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

#include <cstdint>

#include "gradcheck.hpp"
#include "model.hpp"

namespace mlrn {

enum class GradCheckScale { kTiny, kSmall };

// tiny: 16x16 panels, relation widths [16,16], one relation layer, raw pixels.
// small: adds a second relation layer, magnitude encoding and two samples.
ModelConfig gradcheck_model(GradCheckScale scale);

// End-to-end check in double precision of cross-entropy plus activation
// penalty over every model parameter, on random panels.
GradCheckResult model_grad_check(GradCheckScale scale, std::uint64_t seed = 7);

}  // namespace mlrn
