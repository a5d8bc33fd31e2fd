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

#include "optim.hpp"

#include <algorithm>
#include <cmath>

namespace mlrn {

std::string to_string(OptimizerKind k) { return k == OptimizerKind::kAdam ? "adam" : "lamb"; }

OptimizerKind parse_optimizer_kind(const std::string& s) {
  if (s == "adam") return OptimizerKind::kAdam;
  if (s == "lamb") return OptimizerKind::kLamb;
  fail(ErrorCode::kInvalidArgument, "unknown optimizer '" + s + "' (expected adam or lamb)");
}

OptimizerConfig OptimizerConfig::defaults(OptimizerKind kind) {
  OptimizerConfig cfg;
  cfg.kind = kind;
  if (kind == OptimizerKind::kAdam) {
    cfg.lr = 1e-4;
    cfg.weight_decay = 0.0;
    cfg.warmup_epochs = 0.0;
    cfg.l2 = 1e-4;
  }
  return cfg;
}

void OptimizerConfig::validate() const {
  require(lr >= 0.0 && std::isfinite(lr), ErrorCode::kInvalidArgument, "learning rate must be finite and >= 0");
  require(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0, ErrorCode::kInvalidArgument,
          "betas must lie in [0, 1)");
  require(eps > 0.0, ErrorCode::kInvalidArgument, "eps must be > 0");
  require(weight_decay >= 0.0, ErrorCode::kInvalidArgument, "weight_decay must be >= 0");
  require(trust_denominator_offset >= 0.0, ErrorCode::kInvalidArgument, "trust offset must be >= 0");
  require(grad_clip_norm > 0.0, ErrorCode::kInvalidArgument, "grad_clip_norm must be > 0");
  require(warmup_epochs >= 0.0, ErrorCode::kInvalidArgument, "warmup_epochs must be >= 0");
  require(l2 >= 0.0 && activation_penalty >= 0.0, ErrorCode::kInvalidArgument, "penalty coefficients must be >= 0");
}

OptimizerState OptimizerState::create(const ModelParams<float>& params) {
  OptimizerState s;
  for (const auto& [name, t] : params.entries()) s.moments.push_back({name, Tensor<float>(t.shape()), Tensor<float>(t.shape())});
  return s;
}

void OptimizerState::check_matches(const ModelParams<float>& params) const {
  require(moments.size() == params.size(), ErrorCode::kShapeMismatch, "optimizer state does not match parameters");
  for (std::size_t i = 0; i < moments.size(); ++i) {
    const auto& [name, t] = params.entries()[i];
    require(moments[i].name == name && moments[i].m.shape() == t.shape() && moments[i].v.shape() == t.shape(),
            ErrorCode::kShapeMismatch, "optimizer moments for '" + name + "' do not match the parameter");
  }
}

bool operator==(const OptimizerState& a, const OptimizerState& b) {
  if (a.step != b.step || a.moments.size() != b.moments.size()) return false;
  for (std::size_t i = 0; i < a.moments.size(); ++i) {
    const Moments& x = a.moments[i];
    const Moments& y = b.moments[i];
    if (x.name != y.name || x.m.storage() != y.m.storage() || x.v.storage() != y.v.storage()) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------

template <typename T>
double global_grad_norm(const ModelParams<T>& params) {
  double sq = 0.0;
  for (const auto& e : params.entries())
    for (T g : e.second.grad()) sq += static_cast<double>(g) * static_cast<double>(g);
  return std::sqrt(sq);
}

template <typename T>
double clip_global_norm(ModelParams<T>& params, double max_norm) {
  const double norm = global_grad_norm(params);
  require(std::isfinite(norm), ErrorCode::kNumeric, "gradient norm is not finite");
  if (norm > max_norm) {
    const double scale = max_norm / norm;
    for (auto& e : params.entries())
      for (T& g : e.second.grad()) g = static_cast<T>(static_cast<double>(g) * scale);
  }
  return norm;
}

double clip_global_norm(std::vector<std::vector<double>>& grads, double max_norm) {
  double sq = 0.0;
  for (const auto& t : grads)
    for (double g : t) sq += g * g;
  const double norm = std::sqrt(sq);
  require(std::isfinite(norm), ErrorCode::kNumeric, "gradient norm is not finite");
  if (norm > max_norm)
    for (auto& t : grads)
      for (double& g : t) g *= max_norm / norm;
  return norm;
}

template <typename T>
double clip_per_element(ModelParams<T>& params, double limit) {
  const double norm = global_grad_norm(params);
  require(std::isfinite(norm), ErrorCode::kNumeric, "gradient norm is not finite");
  for (auto& e : params.entries())
    for (T& g : e.second.grad()) g = std::clamp(g, static_cast<T>(-limit), static_cast<T>(limit));
  return norm;
}

double warmup_lr(double base_lr, std::uint64_t iteration, std::uint64_t iterations_per_epoch, double warmup_epochs) {
  const double span = warmup_epochs * static_cast<double>(iterations_per_epoch);
  if (span <= 0.0) return base_lr;
  return base_lr * std::min(1.0, static_cast<double>(iteration + 1) / span);
}

namespace {

struct BiasCorrection {
  double first;
  double second;
};

BiasCorrection advance(OptimizerState& state, const OptimizerConfig& cfg) {
  ++state.step;
  const double t = static_cast<double>(state.step);
  return {1.0 - std::pow(cfg.beta1, t), 1.0 - std::pow(cfg.beta2, t)};
}

// Updates the stored moments from the gradient; values are rounded to the
// float storage before any use so a restored state replays exactly.
void update_moments(Moments& mom, std::span<const float> grad, const OptimizerConfig& cfg) {
  auto m = mom.m.data();
  auto v = mom.v.data();
  for (std::size_t i = 0; i < grad.size(); ++i) {
    const double g = grad[i];
    m[i] = static_cast<float>(cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g);
    v[i] = static_cast<float>(cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g);
  }
}

}  // namespace

void adam_step(ModelParams<float>& params, OptimizerState& state, const OptimizerConfig& cfg, double lr) {
  state.check_matches(params);
  const BiasCorrection bc = advance(state, cfg);
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& [name, p] = params.entries()[k];
    if (!p.has_grad()) p.enable_grad();
    Moments& mom = state.moments[k];
    update_moments(mom, p.grad(), cfg);
    auto w = p.data();
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double mh = mom.m[i] / bc.first;
      const double vh = mom.v[i] / bc.second;
      const double next = w[i] - lr * mh / (std::sqrt(vh) + cfg.eps);
      require(std::isfinite(next), ErrorCode::kNumeric, "adam produced a non-finite value in '" + name + "'");
      w[i] = static_cast<float>(next);
    }
  }
}

std::vector<LambTensorStats> lamb_step(ModelParams<float>& params, OptimizerState& state, const OptimizerConfig& cfg,
                                       double lr) {
  state.check_matches(params);
  const BiasCorrection bc = advance(state, cfg);
  std::vector<LambTensorStats> stats;
  stats.reserve(params.size());
  std::vector<double> update;
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& [name, p] = params.entries()[k];
    if (!p.has_grad()) p.enable_grad();
    Moments& mom = state.moments[k];
    update_moments(mom, p.grad(), cfg);
    const double decay = is_bias_name(name) ? 0.0 : cfg.weight_decay;
    auto w = p.data();
    update.resize(w.size());
    double pn = 0.0, un = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double mh = mom.m[i] / bc.first;
      const double vh = mom.v[i] / bc.second;
      update[i] = mh / (std::sqrt(vh) + cfg.eps) + decay * w[i];
      pn += static_cast<double>(w[i]) * w[i];
      un += update[i] * update[i];
    }
    LambTensorStats s;
    s.param_norm = std::sqrt(pn);
    s.update_norm = std::sqrt(un);
    s.trust_ratio = s.param_norm / (s.update_norm + cfg.trust_denominator_offset);
    require(std::isfinite(s.trust_ratio), ErrorCode::kNumeric, "non-finite trust ratio for '" + name + "'");
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = static_cast<float>(w[i] - lr * s.trust_ratio * update[i]);
    stats.push_back(s);
  }
  return stats;
}

std::vector<LambTensorStats> optimizer_step(ModelParams<float>& params, OptimizerState& state,
                                            const OptimizerConfig& cfg, double lr) {
  if (cfg.kind == OptimizerKind::kLamb) return lamb_step(params, state, cfg, lr);
  adam_step(params, state, cfg, lr);
  return {};
}

// ---------------------------------------------------------------------------

template <typename T>
Var activation_penalty(Graph<T>& g, Var fphi_inputs, Var fphi_outputs, double coefficient, double count) {
  if (count <= 0.0) count = static_cast<double>(g.value(fphi_inputs).size() + g.value(fphi_outputs).size());
  Var sq = g.add(g.sum_squares(fphi_inputs), g.sum_squares(fphi_outputs));
  return g.scale(sq, static_cast<T>(coefficient / count));
}

double activation_penalty(std::span<const double> fphi_inputs, std::span<const double> fphi_outputs,
                          double coefficient) {
  const std::size_t n = fphi_inputs.size() + fphi_outputs.size();
  if (n == 0) return 0.0;
  double sq = 0.0;
  for (double x : fphi_inputs) sq += x * x;
  for (double x : fphi_outputs) sq += x * x;
  return coefficient * sq / static_cast<double>(n);
}

template <typename T>
Var l2_penalty(Graph<T>& g, const Binding& p, const ModelParams<T>& params, double coefficient) {
  Var total;
  for (const auto& [name, t] : params.entries()) {
    if (is_bias_name(name)) continue;
    Var sq = g.sum_squares(p.at(name));
    total = total.valid() ? g.add(total, sq) : sq;
  }
  require(total.valid(), ErrorCode::kInvalidArgument, "l2_penalty found no weight tensors");
  return g.scale(total, static_cast<T>(coefficient));
}

template <typename T>
double l2_penalty(const ModelParams<T>& params, double coefficient) {
  double sq = 0.0;
  for (const auto& [name, t] : params.entries()) {
    if (is_bias_name(name)) continue;
    for (T w : t.data()) sq += static_cast<double>(w) * static_cast<double>(w);
  }
  return coefficient * sq;
}

#define MLRN_INSTANTIATE(T)                                                                 \
  template double global_grad_norm<T>(const ModelParams<T>&);                               \
  template double clip_global_norm<T>(ModelParams<T>&, double);                             \
  template double clip_per_element<T>(ModelParams<T>&, double);                             \
  template Var activation_penalty<T>(Graph<T>&, Var, Var, double, double);                  \
  template Var l2_penalty<T>(Graph<T>&, const Binding&, const ModelParams<T>&, double);     \
  template double l2_penalty<T>(const ModelParams<T>&, double);

MLRN_INSTANTIATE(float)
MLRN_INSTANTIATE(double)

#undef MLRN_INSTANTIATE

}  // namespace mlrn
