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

#include "model_gradcheck.hpp"

#include "optim.hpp"

namespace mlrn {

ModelConfig gradcheck_model(GradCheckScale scale) {
  ModelConfig m;
  m.image_size = 16;
  m.conv_count = 2;
  m.conv_channels = 4;
  m.projection_dim = 7;
  m.relation_layers = 1;
  m.layer1_widths = {16, 16};
  m.deeper_widths = {16, 16};
  m.f_phi_widths = {16, 1};
  if (scale == GradCheckScale::kSmall) {
    m.relation_layers = 2;
    m.me = MEConfig{4, 0.28, EncodingVariant::kGaussian};
  }
  return m;
}

GradCheckResult model_grad_check(GradCheckScale scale, std::uint64_t seed) {
  const ModelConfig cfg = gradcheck_model(scale);
  const std::size_t batch = scale == GradCheckScale::kSmall ? 2 : 1;
  ModelParams<double> params = init_params<double>(cfg, seed);
  Rng rng = Rng::derive(seed, 1);
  std::vector<std::uint8_t> pixels(batch * kPanelsPerSample * cfg.image_size * cfg.image_size);
  for (auto& p : pixels) p = static_cast<std::uint8_t>(rng.below(256));
  std::vector<std::uint32_t> targets;
  for (std::size_t i = 0; i < batch; ++i) targets.push_back(static_cast<std::uint32_t>(rng.below(kCandidates)));
  const Tensor<double> input = panel_input<double>(pixels, batch * kPanelsPerSample, cfg);

  auto build = [&](Graph<double>& g) {
    Binding b = bind_params(g, params);
    ForwardResult r = forward_batch<double>(g, b, cfg, g.constant(input, "panels"), batch, nullptr);
    Var ce = g.softmax_cross_entropy(r.scores, targets);
    return g.add(ce, activation_penalty(g, r.fphi_input, r.fphi_output, 2e-3, 0.0));
  };
  std::vector<Tensor<double>*> tensors;
  for (auto& e : params.entries()) tensors.push_back(&e.second);
  return grad_check(build, tensors, 1e-4);
}

}  // namespace mlrn
