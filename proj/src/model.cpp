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

#include "model.hpp"

#include <cmath>

namespace mlrn {

std::size_t ModelConfig::conv_output_size() const {
  std::size_t s = image_size;
  for (std::size_t i = 0; i < conv_count; ++i) s = (s + 2 * kConvPadding - 3) / kConvStride + 1;
  return s;
}

std::size_t ModelConfig::flatten_dim() const {
  const std::size_t s = conv_output_size();
  return conv_channels * s * s;
}

std::size_t ModelConfig::relation_input_width(std::size_t layer) const {
  return layer == 0 ? embed_dim() : relation_output_width(layer - 1);
}

void ModelConfig::validate() const {
  auto check_widths = [](const std::vector<std::size_t>& w, const char* what) {
    require(!w.empty(), ErrorCode::kInvalidArgument, std::string(what) + " must not be empty");
    for (std::size_t v : w) require(v > 0, ErrorCode::kInvalidArgument, std::string(what) + " entries must be > 0");
  };
  require(relation_layers >= 1, ErrorCode::kInvalidArgument, "model needs at least one relation layer");
  check_widths(layer1_widths, "layer1_widths");
  if (relation_layers > 1) check_widths(deeper_widths, "deeper_widths");
  check_widths(f_phi_widths, "f_phi_widths");
  require(f_phi_widths.back() == 1, ErrorCode::kInvalidArgument, "f_phi must end in a single score unit");
  require(projection_dim >= 1, ErrorCode::kInvalidArgument, "projection_dim must be >= 1");
  require(conv_channels >= 1 && conv_count >= 1, ErrorCode::kInvalidArgument, "need at least one conv layer");
  require(image_size >= 3, ErrorCode::kInvalidArgument, "image_size too small for the conv cascade");
  require(dropout_rate >= 0.0 && dropout_rate < 1.0, ErrorCode::kInvalidArgument, "dropout rate must be in [0,1)");
  if (me) me->validate();
}

ModelConfig ModelConfig::full_scale(std::size_t relation_layers, bool magnitude_encoding) {
  ModelConfig cfg;
  cfg.relation_layers = relation_layers;
  if (magnitude_encoding) cfg.me = MEConfig{20, 0.28, EncodingVariant::kGaussian};
  return cfg;
}

// ---------------------------------------------------------------------------

template <typename T>
void ModelParams<T>::add(std::string name, Tensor<T> value) {
  require(!contains(name), ErrorCode::kInvalidArgument, "duplicate parameter name '" + name + "'");
  index_.emplace(name, entries_.size());
  entries_.emplace_back(std::move(name), std::move(value));
}

template <typename T>
Tensor<T>& ModelParams<T>::at(const std::string& name) {
  auto it = index_.find(name);
  require(it != index_.end(), ErrorCode::kInvalidArgument, "unknown parameter '" + name + "'");
  return entries_[it->second].second;
}

template <typename T>
const Tensor<T>& ModelParams<T>::at(const std::string& name) const {
  auto it = index_.find(name);
  require(it != index_.end(), ErrorCode::kInvalidArgument, "unknown parameter '" + name + "'");
  return entries_[it->second].second;
}

template <typename T>
std::size_t ModelParams<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.second.size();
  return n;
}

template <typename T>
void ModelParams<T>::zero_grad() {
  for (auto& e : entries_) {
    e.second.enable_grad();
    e.second.zero_grad();
  }
}

std::string conv_kernel_name(std::size_t i) { return "conv" + std::to_string(i) + "/kernel"; }
std::string conv_bias_name(std::size_t i) { return "conv" + std::to_string(i) + "/bias"; }
std::string relation_weight_name(std::size_t layer, std::size_t fc) {
  return "rel" + std::to_string(layer) + "/fc" + std::to_string(fc) + "/weight";
}
std::string relation_bias_name(std::size_t layer, std::size_t fc) {
  return "rel" + std::to_string(layer) + "/fc" + std::to_string(fc) + "/bias";
}
std::string fphi_weight_name(std::size_t fc) { return "fphi/fc" + std::to_string(fc) + "/weight"; }
std::string fphi_bias_name(std::size_t fc) { return "fphi/fc" + std::to_string(fc) + "/bias"; }

namespace {

struct ParamSpec {
  std::string name;
  Shape shape;
  std::size_t fan_in;
};

std::vector<ParamSpec> param_specs(const ModelConfig& cfg) {
  std::vector<ParamSpec> specs;
  std::size_t channels = cfg.input_channels();
  for (std::size_t i = 0; i < cfg.conv_count; ++i) {
    specs.push_back({conv_kernel_name(i), {cfg.conv_channels, channels, 3, 3}, channels * 9});
    specs.push_back({conv_bias_name(i), {cfg.conv_channels}, channels * 9});
    channels = cfg.conv_channels;
  }
  specs.push_back({"proj/weight", {cfg.projection_dim, cfg.flatten_dim()}, cfg.flatten_dim()});
  specs.push_back({"proj/bias", {cfg.projection_dim}, cfg.flatten_dim()});
  for (std::size_t l = 0; l < cfg.relation_layers; ++l) {
    std::size_t in = 2 * cfg.relation_input_width(l);
    const auto& widths = cfg.relation_widths(l);
    for (std::size_t k = 0; k < widths.size(); ++k) {
      specs.push_back({relation_weight_name(l, k), {widths[k], in}, in});
      specs.push_back({relation_bias_name(l, k), {widths[k]}, in});
      in = widths[k];
    }
  }
  std::size_t in = cfg.relation_output_width(cfg.relation_layers - 1);
  for (std::size_t k = 0; k < cfg.f_phi_widths.size(); ++k) {
    specs.push_back({fphi_weight_name(k), {cfg.f_phi_widths[k], in}, in});
    specs.push_back({fphi_bias_name(k), {cfg.f_phi_widths[k]}, in});
    in = cfg.f_phi_widths[k];
  }
  return specs;
}

std::vector<std::uint32_t> set_rows(std::size_t batch) {
  std::vector<std::uint32_t> rows;
  rows.reserve(batch * kCandidates * kGridCells);
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t k = 0; k < kCandidates; ++k) {
      for (std::size_t c = 0; c < kContextPanels; ++c) rows.push_back(static_cast<std::uint32_t>(b * kPanelsPerSample + c));
      rows.push_back(static_cast<std::uint32_t>(b * kPanelsPerSample + kContextPanels + k));
    }
  return rows;
}

}  // namespace

template <typename T>
ModelParams<T> init_params(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng(seed);
  ModelParams<T> params;
  for (const ParamSpec& s : param_specs(cfg)) {
    Tensor<T> t(s.shape);
    const double bound = 1.0 / std::sqrt(static_cast<double>(s.fan_in));
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<T>(rng.uniform(-bound, bound));
    params.add(s.name, std::move(t));
  }
  return params;
}

template <typename T>
void check_params(const ModelParams<T>& params, const ModelConfig& cfg) {
  const auto specs = param_specs(cfg);
  require(params.size() == specs.size(), ErrorCode::kShapeMismatch,
          "parameter set has " + std::to_string(params.size()) + " tensors, config needs " +
              std::to_string(specs.size()));
  for (const ParamSpec& s : specs) {
    require(params.contains(s.name), ErrorCode::kShapeMismatch, "missing parameter '" + s.name + "'");
    require(params.at(s.name).shape() == s.shape, ErrorCode::kShapeMismatch,
            "parameter '" + s.name + "' has shape " + shape_string(params.at(s.name).shape()) + ", expected " +
                shape_string(s.shape));
  }
}

Var Binding::at(const std::string& name) const {
  auto it = vars_.find(name);
  require(it != vars_.end(), ErrorCode::kInvalidArgument, "parameter '" + name + "' is not bound");
  return it->second;
}

template <typename T>
Binding bind_params(Graph<T>& g, ModelParams<T>& params) {
  Binding b;
  for (auto& [name, tensor] : params.entries()) b.set(name, g.parameter(tensor, name));
  return b;
}

template <typename T>
Tensor<T> panel_input(std::span<const std::uint8_t> pixels, std::size_t n_panels, const ModelConfig& cfg) {
  const std::size_t s = cfg.image_size;
  const std::size_t plane = s * s;
  require(pixels.size() == n_panels * plane, ErrorCode::kShapeMismatch,
          "panel buffer does not hold " + std::to_string(n_panels) + " panels of " + std::to_string(s) + "x" +
              std::to_string(s));
  const std::size_t c = cfg.input_channels();
  Tensor<T> out({n_panels, c, s, s});
  T* o = out.data().data();
  if (!cfg.me) {
    for (std::size_t i = 0; i < pixels.size(); ++i) o[i] = static_cast<T>(byte_to_unit(pixels[i]));
    return out;
  }
  const PixelEncodingTable table(*cfg.me);
  for (std::size_t n = 0; n < n_panels; ++n)
    for (std::size_t q = 0; q < plane; ++q) {
      const double* row = table.row(pixels[n * plane + q]);
      for (std::size_t j = 0; j < c; ++j) o[(n * c + j) * plane + q] = static_cast<T>(row[j]);
    }
  return out;
}

template <typename T>
Tensor<T> panel_input(const Tensor<T>& unit_images, const ModelConfig& cfg) {
  const std::size_t s = cfg.image_size;
  const std::size_t plane = s * s;
  require(unit_images.size() % plane == 0, ErrorCode::kShapeMismatch, "images do not match cfg.image_size");
  const std::size_t n = unit_images.size() / plane;
  if (!cfg.me) return unit_images.reshaped({n, 1, s, s});
  const std::size_t d = cfg.me->d;
  std::vector<double> x(unit_images.data().begin(), unit_images.data().end());
  const std::vector<double> enc = magnitude_encode(x, *cfg.me);
  Tensor<T> out({n, d, s, s});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t q = 0; q < plane; ++q)
      for (std::size_t j = 0; j < d; ++j)
        out[(i * d + j) * plane + q] = static_cast<T>(enc[(i * plane + q) * d + j]);
  return out;
}

template <typename T>
Var embed_panels(Graph<T>& g, const Binding& p, const ModelConfig& cfg, Var images,
                 std::span<const std::uint32_t> positions) {
  const Shape& is = g.shape(images);
  require(is.size() == 4, ErrorCode::kShapeMismatch, "embed_panels expects [N,C,S,S] images");
  require(is[1] == cfg.input_channels(), ErrorCode::kShapeMismatch,
          "panel has " + std::to_string(is[1]) + " channels, model expects " + std::to_string(cfg.input_channels()));
  require(is[2] == cfg.image_size && is[3] == cfg.image_size, ErrorCode::kShapeMismatch,
          "panel size " + std::to_string(is[2]) + "x" + std::to_string(is[3]) +
              " incompatible with the conv cascade for image_size " + std::to_string(cfg.image_size));
  const std::size_t n = is[0];
  require(positions.size() == n, ErrorCode::kInvalidArgument, "one grid position per panel required");
  Var h = images;
  for (std::size_t i = 0; i < cfg.conv_count; ++i)
    h = g.relu(g.conv2d(h, p.at(conv_kernel_name(i)), p.at(conv_bias_name(i)), kConvStride, kConvPadding));
  h = g.reshape(h, {n, cfg.flatten_dim()});
  h = g.linear(h, p.at("proj/weight"), p.at("proj/bias"));
  Tensor<T> onehot({n, kGridCells});
  for (std::size_t i = 0; i < n; ++i) {
    require(positions[i] < kGridCells, ErrorCode::kInvalidArgument, "grid position must be in 0..8");
    onehot[i * kGridCells + positions[i]] = T(1);
  }
  return g.concat_cols(h, g.constant(std::move(onehot), "position_onehot"));
}

template <typename T>
Var relation_layer(Graph<T>& g, const Binding& p, const ModelConfig& cfg, std::size_t layer, Var objects,
                   RelationMode mode) {
  const auto& widths = cfg.relation_widths(layer);
  require(g.shape(objects).size() == 2 && g.shape(objects)[1] == cfg.relation_input_width(layer),
          ErrorCode::kShapeMismatch,
          "relation layer " + std::to_string(layer) + " expects width " +
              std::to_string(cfg.relation_input_width(layer)) + ", got " + shape_string(g.shape(objects)));
  Var h = g.relu(g.pair_linear(objects, p.at(relation_weight_name(layer, 0)), p.at(relation_bias_name(layer, 0)),
                               kGridCells));
  for (std::size_t k = 1; k < widths.size(); ++k)
    h = g.relu(g.linear(h, p.at(relation_weight_name(layer, k)), p.at(relation_bias_name(layer, k))));
  const std::size_t group = mode == RelationMode::kPerBase ? kGridCells : kPairsPerSet;
  Var out = g.group_sum(h, group);
  if (cfg.aggregation == Aggregation::kMean) out = g.scale(out, T(1) / static_cast<T>(group));
  return out;
}

template <typename T>
ScoreHead score_sets(Graph<T>& g, const Binding& p, const ModelConfig& cfg, Var sets, const Tensor<T>* dropout_mask) {
  Var x = sets;
  for (std::size_t l = 0; l < cfg.relation_layers; ++l) {
    const RelationMode mode = l + 1 < cfg.relation_layers ? RelationMode::kPerBase : RelationMode::kGlobal;
    x = relation_layer(g, p, cfg, l, x, mode);
  }
  const Var fphi_input = x;
  const std::size_t layers = cfg.f_phi_widths.size();
  for (std::size_t k = 0; k < layers; ++k) {
    x = g.linear(x, p.at(fphi_weight_name(k)), p.at(fphi_bias_name(k)));
    if (k + 1 < layers) x = g.relu(x);
    if (dropout_mask && k + 2 == layers) x = g.mul_mask(x, *dropout_mask);
  }
  return {x, fphi_input};
}

std::optional<Shape> dropout_mask_shape(const ModelConfig& cfg, std::size_t batch) {
  if (cfg.f_phi_widths.size() < 2) return std::nullopt;
  return Shape{batch * kCandidates, cfg.f_phi_widths[cfg.f_phi_widths.size() - 2]};
}

template <typename T>
Tensor<T> make_dropout_mask(const Shape& shape, double rate, Rng& rng) {
  Tensor<T> mask(shape);
  const T keep = static_cast<T>(1.0 / (1.0 - rate));
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = rng.uniform() < rate ? T(0) : keep;
  return mask;
}

template <typename T>
ForwardResult forward_batch(Graph<T>& g, const Binding& p, const ModelConfig& cfg, Var panels, std::size_t batch,
                            const Tensor<T>* dropout_mask) {
  require(batch >= 1, ErrorCode::kInvalidArgument, "forward_batch needs at least one sample");
  require(g.shape(panels)[0] == batch * kPanelsPerSample, ErrorCode::kShapeMismatch,
          "forward_batch expects 16 panels per sample");
  std::vector<std::uint32_t> positions(batch * kPanelsPerSample);
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const std::size_t slot = i % kPanelsPerSample;
    positions[i] = static_cast<std::uint32_t>(slot < kContextPanels ? slot : kContextPanels);
  }
  Var emb = embed_panels(g, p, cfg, panels, positions);
  Var sets = g.gather_rows(emb, set_rows(batch));
  ScoreHead head = score_sets(g, p, cfg, sets, dropout_mask);
  Var scores = g.reshape(head.scores, {batch, kCandidates});
  return {scores, head.fphi_input, head.scores};
}

// ---------------------------------------------------------------------------
// single-sample conveniences

template <typename T>
PanelEmbedding<T> embed_panel(const Tensor<T>& image, std::size_t position, ModelParams<T>& params,
                              const ModelConfig& cfg) {
  require(image.rank() == 3, ErrorCode::kShapeMismatch, "embed_panel expects a [C,H,W] image");
  require(position < kGridCells, ErrorCode::kInvalidArgument, "grid position must be in 0..8");
  Graph<T> g;
  Binding b = bind_params(g, params);
  Var img = g.constant(image.reshaped({1, image.dim(0), image.dim(1), image.dim(2)}), "panel");
  const std::uint32_t pos = static_cast<std::uint32_t>(position);
  Var e = embed_panels(g, b, cfg, img, std::span<const std::uint32_t>(&pos, 1));
  const auto& v = g.value(e);
  return {std::vector<T>(v.data().begin(), v.data().end()), position};
}

template <typename T>
std::vector<std::vector<T>> form_pairs(const std::vector<std::vector<T>>& embeddings) {
  require(embeddings.size() == kGridCells, ErrorCode::kInvalidArgument,
          "form_pairs needs exactly 9 embeddings, got " + std::to_string(embeddings.size()));
  std::vector<std::vector<T>> pairs;
  pairs.reserve(kPairsPerSet);
  for (const auto& a : embeddings)
    for (const auto& b : embeddings) {
      std::vector<T> v(a);
      v.insert(v.end(), b.begin(), b.end());
      pairs.push_back(std::move(v));
    }
  return pairs;
}

namespace {
template <typename T>
Tensor<T> stack_rows(const std::vector<std::vector<T>>& rows) {
  require(!rows.empty(), ErrorCode::kInvalidArgument, "no rows to stack");
  const std::size_t w = rows[0].size();
  std::vector<T> data;
  data.reserve(rows.size() * w);
  for (const auto& r : rows) {
    require(r.size() == w, ErrorCode::kShapeMismatch, "rows must share one width");
    data.insert(data.end(), r.begin(), r.end());
  }
  return Tensor<T>({rows.size(), w}, std::move(data));
}
}  // namespace

template <typename T>
std::vector<std::vector<T>> relation_layer(const std::vector<std::vector<T>>& embeddings, std::size_t layer,
                                           ModelParams<T>& params, const ModelConfig& cfg, RelationMode mode) {
  require(embeddings.size() == kGridCells, ErrorCode::kInvalidArgument, "relation layer needs 9 inputs");
  require(layer < cfg.relation_layers, ErrorCode::kInvalidArgument, "relation layer index out of range");
  Graph<T> g;
  Binding b = bind_params(g, params);
  Var out = relation_layer(g, b, cfg, layer, g.constant(stack_rows(embeddings)), mode);
  const auto& v = g.value(out);
  const std::size_t rows = v.dim(0), w = v.dim(1);
  std::vector<std::vector<T>> result(rows);
  for (std::size_t r = 0; r < rows; ++r) result[r].assign(v.data().begin() + r * w, v.data().begin() + (r + 1) * w);
  return result;
}

template <typename T>
T score_candidate(const std::vector<PanelEmbedding<T>>& context, const PanelEmbedding<T>& candidate,
                  ModelParams<T>& params, const ModelConfig& cfg) {
  require(context.size() == kContextPanels, ErrorCode::kInvalidArgument, "score_candidate needs 8 context panels");
  require(candidate.position == kContextPanels, ErrorCode::kInvalidArgument, "candidate must carry position 8");
  std::vector<std::vector<T>> rows;
  for (const auto& c : context) rows.push_back(c.values);
  rows.push_back(candidate.values);
  Graph<T> g;
  Binding b = bind_params(g, params);
  ScoreHead head = score_sets<T>(g, b, cfg, g.constant(stack_rows(rows)), nullptr);
  return g.value(head.scores)[0];
}

template <typename T>
Tensor<T> wren_forward(const SampleRecord& sample, ModelParams<T>& params, const ModelConfig& cfg) {
  sample.validate();
  require(sample.image_size == cfg.image_size, ErrorCode::kShapeMismatch, "sample image size differs from model");
  Graph<T> g;
  Binding b = bind_params(g, params);
  Var panels = g.constant(panel_input<T>(sample.panels, kPanelsPerSample, cfg), "panels");
  ForwardResult r = forward_batch<T>(g, b, cfg, panels, 1, nullptr);
  return g.value(r.scores).reshaped({kCandidates});
}

template <typename T>
std::size_t predict(std::span<const T> scores) {
  require(!scores.empty(), ErrorCode::kInvalidArgument, "predict needs at least one score");
  std::size_t best = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    require(std::isfinite(scores[i]), ErrorCode::kNumeric, "predict received a non-finite score");
    if (scores[i] > scores[best]) best = i;
  }
  return best;
}

#define MLRN_INSTANTIATE(T)                                                                                        \
  template class ModelParams<T>;                                                                                   \
  template ModelParams<T> init_params<T>(const ModelConfig&, std::uint64_t);                                       \
  template void check_params<T>(const ModelParams<T>&, const ModelConfig&);                                        \
  template Binding bind_params<T>(Graph<T>&, ModelParams<T>&);                                                     \
  template Tensor<T> panel_input<T>(std::span<const std::uint8_t>, std::size_t, const ModelConfig&);              \
  template Tensor<T> panel_input<T>(const Tensor<T>&, const ModelConfig&);                                         \
  template Var embed_panels<T>(Graph<T>&, const Binding&, const ModelConfig&, Var, std::span<const std::uint32_t>); \
  template Var relation_layer<T>(Graph<T>&, const Binding&, const ModelConfig&, std::size_t, Var, RelationMode);   \
  template ScoreHead score_sets<T>(Graph<T>&, const Binding&, const ModelConfig&, Var, const Tensor<T>*);          \
  template ForwardResult forward_batch<T>(Graph<T>&, const Binding&, const ModelConfig&, Var, std::size_t,         \
                                          const Tensor<T>*);                                                       \
  template Tensor<T> make_dropout_mask<T>(const Shape&, double, Rng&);                                             \
  template PanelEmbedding<T> embed_panel<T>(const Tensor<T>&, std::size_t, ModelParams<T>&, const ModelConfig&);   \
  template std::vector<std::vector<T>> form_pairs<T>(const std::vector<std::vector<T>>&);                          \
  template std::vector<std::vector<T>> relation_layer<T>(const std::vector<std::vector<T>>&, std::size_t,          \
                                                         ModelParams<T>&, const ModelConfig&, RelationMode);       \
  template T score_candidate<T>(const std::vector<PanelEmbedding<T>>&, const PanelEmbedding<T>&, ModelParams<T>&,  \
                                const ModelConfig&);                                                               \
  template Tensor<T> wren_forward<T>(const SampleRecord&, ModelParams<T>&, const ModelConfig&);                    \
  template std::size_t predict<T>(std::span<const T>);

MLRN_INSTANTIATE(float)
MLRN_INSTANTIATE(double)

#undef MLRN_INSTANTIATE

}  // namespace mlrn
