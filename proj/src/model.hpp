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
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "encoding.hpp"
#include "record.hpp"
#include "rng.hpp"
#include "tensor.hpp"

namespace mlrn {

inline constexpr std::size_t kGridCells = 9;
inline constexpr std::size_t kPairsPerSet = kGridCells * kGridCells;
inline constexpr int kConvStride = 2;
inline constexpr int kConvPadding = 1;

enum class Aggregation { kSum, kMean };
enum class RelationMode { kPerBase, kGlobal };

struct ModelConfig {
  std::size_t relation_layers = 1;
  std::vector<std::size_t> layer1_widths{512, 512, 512, 256};
  std::vector<std::size_t> deeper_widths{256, 256, 256};
  std::vector<std::size_t> f_phi_widths{256, 256, 1};
  std::size_t projection_dim = 247;
  std::size_t conv_channels = 32;
  std::size_t conv_count = 4;
  std::size_t image_size = 80;
  std::optional<MEConfig> me;
  Aggregation aggregation = Aggregation::kSum;
  bool dropout = false;
  double dropout_rate = 0.5;

  std::size_t embed_dim() const { return projection_dim + kGridCells; }
  std::size_t input_channels() const { return me ? me->d : 1; }
  std::size_t conv_output_size() const;
  std::size_t flatten_dim() const;
  const std::vector<std::size_t>& relation_widths(std::size_t layer) const {
    return layer == 0 ? layer1_widths : deeper_widths;
  }
  std::size_t relation_input_width(std::size_t layer) const;
  std::size_t relation_output_width(std::size_t layer) const { return relation_widths(layer).back(); }
  void validate() const;

  // Full-scale shape: 80x80 panels, 4 convolutions, 512-wide first relation layer.
  static ModelConfig full_scale(std::size_t relation_layers, bool magnitude_encoding);
};

// Named parameter tensors in creation order. Names are unique.
template <typename T>
class ModelParams {
 public:
  using Entry = std::pair<std::string, Tensor<T>>;

  void add(std::string name, Tensor<T> value);
  bool contains(const std::string& name) const { return index_.count(name) != 0; }
  Tensor<T>& at(const std::string& name);
  const Tensor<T>& at(const std::string& name) const;
  std::vector<Entry>& entries() { return entries_; }
  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  std::size_t parameter_count() const;
  void zero_grad();

  template <typename U>
  ModelParams<U> cast() const {
    ModelParams<U> out;
    for (const auto& [name, t] : entries_) out.add(name, t.template cast<U>());
    return out;
  }

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

inline bool is_bias_name(const std::string& name) {
  return name.size() >= 5 && name.compare(name.size() - 5, 5, "/bias") == 0;
}

std::string conv_kernel_name(std::size_t i);
std::string conv_bias_name(std::size_t i);
std::string relation_weight_name(std::size_t layer, std::size_t fc);
std::string relation_bias_name(std::size_t layer, std::size_t fc);
std::string fphi_weight_name(std::size_t fc);
std::string fphi_bias_name(std::size_t fc);

// Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)] for every weight and bias.
template <typename T>
ModelParams<T> init_params(const ModelConfig& cfg, std::uint64_t seed);

// Checks names and shapes against cfg.
template <typename T>
void check_params(const ModelParams<T>& params, const ModelConfig& cfg);

// Graph variables for every parameter, bound once per graph.
class Binding {
 public:
  Var at(const std::string& name) const;
  void set(const std::string& name, Var v) { vars_[name] = v; }

 private:
  std::unordered_map<std::string, Var> vars_;
};

template <typename T>
Binding bind_params(Graph<T>& g, ModelParams<T>& params);

// Panels as network input [n, C, S, S]: raw intensities when ME is off,
// d encoded channels per pixel otherwise.
template <typename T>
Tensor<T> panel_input(std::span<const std::uint8_t> pixels, std::size_t n_panels, const ModelConfig& cfg);
template <typename T>
Tensor<T> panel_input(const Tensor<T>& unit_images, const ModelConfig& cfg);

// Graph-level building blocks. `images` is [N, C, S, S]; returns [N, embed].
template <typename T>
Var embed_panels(Graph<T>& g, const Binding& p, const ModelConfig& cfg, Var images,
                 std::span<const std::uint32_t> positions);

// objects: [K*9, w]. Per-base: [K*9, h]; global: [K, h].
template <typename T>
Var relation_layer(Graph<T>& g, const Binding& p, const ModelConfig& cfg, std::size_t layer, Var objects,
                   RelationMode mode);

struct ScoreHead {
  Var scores;      // [K, 1]
  Var fphi_input;  // [K, w]
};

// Relation stack then f_phi over K candidate sets of 9 embeddings.
template <typename T>
ScoreHead score_sets(Graph<T>& g, const Binding& p, const ModelConfig& cfg, Var sets,
                     const Tensor<T>* dropout_mask);

struct ForwardResult {
  Var scores;       // [B, 8]
  Var fphi_input;   // [B*8, w]
  Var fphi_output;  // [B*8, 1]
};

// Scores every candidate of B samples. panels: [B*16, C, S, S] in record order.
template <typename T>
ForwardResult forward_batch(Graph<T>& g, const Binding& p, const ModelConfig& cfg, Var panels, std::size_t batch,
                            const Tensor<T>* dropout_mask);

// Shape of the mask forward_batch expects for `batch` samples (empty when
// dropout cannot apply).
std::optional<Shape> dropout_mask_shape(const ModelConfig& cfg, std::size_t batch);
template <typename T>
Tensor<T> make_dropout_mask(const Shape& shape, double rate, Rng& rng);

// Single-sample conveniences on top of the graph ops.
template <typename T>
struct PanelEmbedding {
  std::vector<T> values;
  std::size_t position = 0;
};

template <typename T>
PanelEmbedding<T> embed_panel(const Tensor<T>& image, std::size_t position, ModelParams<T>& params,
                              const ModelConfig& cfg);

template <typename T>
std::vector<std::vector<T>> form_pairs(const std::vector<std::vector<T>>& embeddings);

template <typename T>
std::vector<std::vector<T>> relation_layer(const std::vector<std::vector<T>>& embeddings, std::size_t layer,
                                           ModelParams<T>& params, const ModelConfig& cfg, RelationMode mode);

template <typename T>
T score_candidate(const std::vector<PanelEmbedding<T>>& context, const PanelEmbedding<T>& candidate,
                  ModelParams<T>& params, const ModelConfig& cfg);

template <typename T>
Tensor<T> wren_forward(const SampleRecord& sample, ModelParams<T>& params, const ModelConfig& cfg);

// Argmax; ties resolve to the lowest index. Throws on non-finite scores.
template <typename T>
std::size_t predict(std::span<const T> scores);

}  // namespace mlrn
