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
#include <vector>

#include "model.hpp"
#include "tensor.hpp"

namespace mlrn {

enum class OptimizerKind { kAdam, kLamb };
enum class ClipMode { kGlobalNorm, kPerElement };

std::string to_string(OptimizerKind k);
OptimizerKind parse_optimizer_kind(const std::string& s);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kLamb;
  double lr = 2e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 2e-1;  // decoupled, LAMB only, never on biases
  double trust_denominator_offset = 1e-6;
  double grad_clip_norm = 1e1;
  ClipMode clip_mode = ClipMode::kGlobalNorm;
  double warmup_epochs = 8.0;  // 0 disables warmup
  double l2 = 0.0;             // coupled L2 penalty coefficient (Adam runs)
  double activation_penalty = 2e-3;

  // Defaults per optimizer: LAMB with lr 2e-3, decay 0.2 and 8 warmup epochs;
  // Adam with lr 1e-4, L2 1e-4 and no warmup.
  static OptimizerConfig defaults(OptimizerKind kind);
  void validate() const;
};

struct Moments {
  std::string name;
  Tensor<float> m;
  Tensor<float> v;
};

struct OptimizerState {
  std::uint64_t step = 0;
  std::vector<Moments> moments;  // parallel to the parameter entries

  static OptimizerState create(const ModelParams<float>& params);
  void check_matches(const ModelParams<float>& params) const;
  friend bool operator==(const OptimizerState& a, const OptimizerState& b);
};

// Scales every gradient by max_norm / g when the global L2 norm g exceeds
// max_norm. Returns g (before clipping).
template <typename T>
double clip_global_norm(ModelParams<T>& params, double max_norm);
double clip_global_norm(std::vector<std::vector<double>>& grads, double max_norm);
// Clamps each gradient element to [-limit, limit]; returns the global norm.
template <typename T>
double clip_per_element(ModelParams<T>& params, double limit);
template <typename T>
double global_grad_norm(const ModelParams<T>& params);

// base_lr * min(1, (iteration + 1) / (warmup_epochs * iterations_per_epoch)).
double warmup_lr(double base_lr, std::uint64_t iteration, std::uint64_t iterations_per_epoch, double warmup_epochs);

void adam_step(ModelParams<float>& params, OptimizerState& state, const OptimizerConfig& cfg, double lr);

struct LambTensorStats {
  double param_norm = 0.0;
  double update_norm = 0.0;
  double trust_ratio = 0.0;
};

// One LAMB step; returns the per-tensor trust ratios actually applied.
std::vector<LambTensorStats> lamb_step(ModelParams<float>& params, OptimizerState& state, const OptimizerConfig& cfg,
                                       double lr);

// Dispatches on cfg.kind; the returned stats are empty for Adam.
std::vector<LambTensorStats> optimizer_step(ModelParams<float>& params, OptimizerState& state,
                                            const OptimizerConfig& cfg, double lr);

// 2e-3 * mean(x^2) over both activation sets, as a differentiable graph term.
template <typename T>
Var activation_penalty(Graph<T>& g, Var fphi_inputs, Var fphi_outputs, double coefficient, double count);
double activation_penalty(std::span<const double> fphi_inputs, std::span<const double> fphi_outputs,
                          double coefficient);

// coefficient * sum ||W||^2 over weight tensors (biases skipped).
template <typename T>
Var l2_penalty(Graph<T>& g, const Binding& p, const ModelParams<T>& params, double coefficient);
template <typename T>
double l2_penalty(const ModelParams<T>& params, double coefficient);

}  // namespace mlrn
