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
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "checkpoint.hpp"
#include "config.hpp"
#include "report.hpp"

namespace mlrn {

struct MetricsRow {
  std::size_t epoch = 0;
  double training_acc = 0.0;
  double training_loss = 0.0;  // task + activation penalty (+ L2)
  double validation_acc = 0.0;
  double validation_loss = 0.0;  // task loss only
  // Components of training_loss; not part of the CSV.
  double task_loss = 0.0;
  double activation_loss = 0.0;
  double l2_loss = 0.0;
};

inline constexpr const char* kMetricsHeader = "epoch;training_acc;training_loss;validation_acc;validation_loss";

std::string format_metrics_csv(const std::vector<MetricsRow>& rows);
std::vector<MetricsRow> parse_metrics_csv(const std::string& text);
void emit_metrics_csv(const std::vector<MetricsRow>& rows, const std::string& path);

struct StepInfo {
  std::uint64_t iteration = 0;
  std::size_t epoch = 0;
  double lr = 0.0;
  double grad_norm = 0.0;  // before clipping
  double task_loss = 0.0;
  double activation_loss = 0.0;
  double l2_loss = 0.0;
  const ModelParams<float>* params = nullptr;  // grads are the clipped ones
  const OptimizerState* state = nullptr;
  std::vector<LambTensorStats> lamb;  // filled for after_step only
};

struct TrainObserver {
  std::function<void(const StepInfo&)> before_step;
  std::function<void(const StepInfo&)> after_step;
  std::function<void(const MetricsRow&)> on_epoch;
};

struct TrainResult {
  ModelParams<float> params;
  OptimizerState optimizer;
  std::vector<MetricsRow> metrics;
  std::uint64_t epochs_done = 0;
  std::uint64_t iteration = 0;
  bool stopped_early = false;
};

// Runs cfg.epochs full passes (or until cfg.stop_at_val_acc). Checkpoint and
// metrics files are rewritten after every epoch when their paths are set.
TrainResult train(const TrainConfig& cfg, const std::vector<SampleRecord>& train_set,
                  const std::vector<SampleRecord>& val_set, const TrainObserver& observer = {},
                  const Checkpoint* resume = nullptr);

struct EvalResult {
  std::vector<std::size_t> predictions;
  std::vector<bool> correct;
  double loss = 0.0;  // mean cross-entropy
  double accuracy = 0.0;
};

// Inference mode: dropout is never applied.
EvalResult evaluate(ModelParams<float>& params, const ModelConfig& model, const std::vector<SampleRecord>& samples,
                    std::size_t micro_batch = 32);

CategoryReport evaluate_by_category(ModelParams<float>& params, const ModelConfig& model,
                                    const std::vector<SampleRecord>& samples, std::size_t micro_batch = 32);
CategoryReport evaluate_by_category(const std::string& checkpoint_path, const std::string& dataset_path);

// Training and validation data from the configured paths, or generated from
// cfg.generator (validation uses the indices after the training ones).
struct DataSplits {
  std::vector<SampleRecord> train;
  std::vector<SampleRecord> val;
};
DataSplits load_or_generate(const TrainConfig& cfg);

struct TwoMeansSplit {
  std::vector<double> low;
  std::vector<double> high;
  double gap = 0.0;  // min(high) - max(low)
};

// Exact 1-d two-means over the sorted values (minimum within-cluster sum of
// squares; ties keep the earliest split).
TwoMeansSplit two_means(std::vector<double> values);

struct SeedRun {
  std::uint64_t seed = 0;
  double training_acc = 0.0;
  double validation_acc = 0.0;
};

struct MultiSeedSummary {
  std::vector<SeedRun> runs;
  TwoMeansSplit split;
};

MultiSeedSummary multi_seed_run(const TrainConfig& cfg, const std::vector<std::uint64_t>& seeds,
                                const DataSplits& data, const std::function<void(const SeedRun&)>& on_run = {});
MultiSeedSummary multi_seed_run(const TrainConfig& cfg, std::size_t n_seeds);
std::string format_multiseed(const MultiSeedSummary& s);

}  // namespace mlrn
