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
#include <optional>
#include <string>
#include <vector>

#include "model.hpp"
#include "optim.hpp"

namespace mlrn {

inline constexpr std::uint16_t kCheckpointVersion = 1;

// Named float32 tensors: "MLRN" | version u16 | count u32 | per tensor:
// name u16+bytes, rank u8, dims u32..., values f32.
using NamedTensors = std::vector<std::pair<std::string, Tensor<float>>>;

std::vector<std::uint8_t> encode_tensors(const NamedTensors& tensors);
NamedTensors decode_tensors(const std::vector<std::uint8_t>& bytes);

// Model parameters under their own names; the model config as "meta/model"
// text; optimizer moments under "opt/m/<name>", "opt/v/<name>" and the step
// counter as "opt/step"; progress as "train/epoch" and "train/iteration".
struct Checkpoint {
  ModelConfig model;
  ModelParams<float> params;
  std::optional<OptimizerState> optimizer;
  std::uint64_t epoch = 0;  // completed epochs
  std::uint64_t iteration = 0;
};

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes);
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace mlrn
