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

#include "support/lamb_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mlrn::testing {

namespace {

std::vector<double> widen(std::span<const float> xs) { return std::vector<double>(xs.begin(), xs.end()); }

bool ends_with_bias(const std::string& name) {
  const std::string suffix = "/bias";
  return name.size() >= suffix.size() && std::equal(suffix.rbegin(), suffix.rend(), name.rbegin());
}

}  // namespace

LambSnapshot snapshot(const ModelParams<float>& params, const OptimizerState& state) {
  LambSnapshot s;
  s.step = state.step;
  for (std::size_t k = 0; k < params.size(); ++k) {
    const auto& [name, p] = params.entries()[k];
    LambTensorSnapshot t;
    t.name = name;
    t.param = widen(p.data());
    t.grad = p.has_grad() ? widen(p.grad()) : std::vector<double>(p.size(), 0.0);
    t.m = widen(state.moments.at(k).m.data());
    t.v = widen(state.moments.at(k).v.data());
    s.tensors.push_back(std::move(t));
  }
  return s;
}

LambExpectation expected_lamb_step(const LambSnapshot& before, const OptimizerConfig& cfg, double lr) {
  LambExpectation out;
  const double t = static_cast<double>(before.step + 1);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  for (const LambTensorSnapshot& s : before.tensors) {
    const double decay = ends_with_bias(s.name) ? 0.0 : cfg.weight_decay;
    std::vector<double> u(s.param.size());
    double pp = 0.0, uu = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double m = cfg.beta1 * s.m[i] + (1.0 - cfg.beta1) * s.grad[i];
      const double v = cfg.beta2 * s.v[i] + (1.0 - cfg.beta2) * s.grad[i] * s.grad[i];
      u[i] = (m / c1) / (std::sqrt(v / c2) + cfg.eps) + decay * s.param[i];
      pp += s.param[i] * s.param[i];
      uu += u[i] * u[i];
    }
    const double r = std::sqrt(pp) / (std::sqrt(uu) + cfg.trust_denominator_offset);
    std::vector<double> after(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) after[i] = s.param[i] - lr * r * u[i];
    out.trust_ratio.push_back(r);
    out.param_after.push_back(std::move(after));
  }
  return out;
}

LambComparison compare_lamb_step(const LambExpectation& want, const std::vector<LambTensorStats>& got_stats,
                                 const ModelParams<float>& got_params) {
  if (got_stats.size() != want.trust_ratio.size() || got_params.size() != want.param_after.size())
    throw std::runtime_error("LAMB comparison: tensor count differs");
  LambComparison c;
  for (std::size_t k = 0; k < got_stats.size(); ++k) {
    const double w = want.trust_ratio[k];
    const double rel = std::abs(got_stats[k].trust_ratio - w) / std::max(std::abs(w), 1e-12);
    c.max_ratio_rel_error = std::max(c.max_ratio_rel_error, rel);
    const auto p = got_params.entries()[k].second.data();
    for (std::size_t i = 0; i < p.size(); ++i)
      c.max_param_abs_error = std::max(c.max_param_abs_error, std::abs(p[i] - want.param_after[k][i]));
  }
  return c;
}

}  // namespace mlrn::testing
