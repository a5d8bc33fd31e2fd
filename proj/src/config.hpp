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
#include <cstdint>
#include <string>

#include "generator.hpp"
#include "model.hpp"
#include "optim.hpp"

namespace mlrn {

enum class TrainAccuracy { kRunning, kFull };

struct TrainConfig {
  ModelConfig model = micro_model();
  OptimizerConfig optimizer;
  GeneratorConfig generator;
  std::size_t batch_size = 128;
  std::size_t micro_batch = 32;  // samples per graph inside one batch
  std::size_t epochs = 10;
  std::uint64_t seed = 0;
  std::string train_path;
  std::string val_path;
  std::string checkpoint_path;
  std::string metrics_path;
  // Running accuracy over the epoch's batches, or a full pass after it.
  TrainAccuracy train_accuracy = TrainAccuracy::kRunning;
  double stop_at_val_acc = 0.0;  // > 0 ends training once reached
  // Dataset sizes when training data is generated in-process (multiseed).
  std::size_t train_count = 2000;
  std::size_t val_count = 500;

  static ModelConfig micro_model();
  void validate() const;
};

// key=value lines, '#' comments. optimizer.kind resets the optimizer
// defaults before the remaining optimizer keys apply.
TrainConfig parse_config(const std::string& text);
TrainConfig load_config(const std::string& path);
void set_config_value(TrainConfig& cfg, const std::string& key, const std::string& value);
std::string format_config(const TrainConfig& cfg);

// Model section only, with keys relative to "model.".
std::string format_model_config(const ModelConfig& cfg);
ModelConfig parse_model_config(const std::string& text);

}  // namespace mlrn
