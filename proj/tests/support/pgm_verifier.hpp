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
#include <string>
#include <vector>

#include "generator.hpp"

namespace mlrn::testing {

// Symbolic re-check of a generated sample: completes the grid with each
// candidate and tests every row (or column) relation plus the distractor-free
// constancy contract directly on the panel descriptions.
bool completes_grid(const GeneratedSample& s, std::size_t candidate, const GeneratorConfig& cfg,
                    std::string* why = nullptr);
std::vector<std::size_t> satisfying_candidates(const GeneratedSample& s, const GeneratorConfig& cfg);

}  // namespace mlrn::testing
