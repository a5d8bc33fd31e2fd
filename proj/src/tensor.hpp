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

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"

namespace mlrn {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

// Dense row-major array with an optional gradient buffer of the same shape.
template <typename T>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape);
  Tensor(Shape shape, std::vector<T> data);

  static Tensor scalar(T v) { return Tensor({1}, {v}); }

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t i) const { return shape_.at(i); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }
  std::vector<T>& storage() { return data_; }
  const std::vector<T>& storage() const { return data_; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  bool has_grad() const { return !grad_.empty(); }
  void enable_grad() {
    if (grad_.size() != data_.size()) grad_.assign(data_.size(), T(0));
  }
  void zero_grad() { std::fill(grad_.begin(), grad_.end(), T(0)); }
  void drop_grad() { grad_.clear(); grad_.shrink_to_fit(); }
  std::span<T> grad() { return grad_; }
  std::span<const T> grad() const { return grad_; }

  // Same data, new shape of identical element count.
  Tensor reshaped(Shape shape) const;
  bool all_finite() const;

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> out(shape_);
    for (std::size_t i = 0; i < data_.size(); ++i) out[i] = static_cast<U>(data_[i]);
    return out;
  }

 private:
  Shape shape_;
  std::vector<T> data_;
  std::vector<T> grad_;
};

struct Var {
  std::uint32_t id = UINT32_MAX;
  bool valid() const { return id != UINT32_MAX; }
};

// Tape of executed primitives. Every op appends one node; backward() replays
// the adjoints in exact reverse order, then folds parameter adjoints into the
// bound tensors' grad buffers. A graph may be consumed once; reset() rearms it.
template <typename T>
class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(Tensor<T> value, std::string_view label = "const");
  // Binds an external tensor; its grad buffer receives d(loss)/d(param).
  Var parameter(Tensor<T>& param, std::string_view label);

  const Tensor<T>& value(Var v) const;
  const Shape& shape(Var v) const { return value(v).shape(); }
  std::span<const T> grad(Var v) const;
  const std::string& label(Var v) const;
  std::size_t node_count() const { return nodes_.size(); }

  // Input layout is NCHW; kernels are [C_out, C_in, 3, 3].
  Var conv2d(Var input, Var kernels, Var bias, int stride, int padding);
  // input [N, in] (or [in]), weight [out, in], bias [out].
  Var linear(Var input, Var weight, Var bias);
  Var relu(Var x);
  Var reshape(Var x, Shape shape);
  Var concat_cols(Var a, Var b);
  Var gather_rows(Var x, std::vector<std::uint32_t> rows);
  // x [K*n, w] holds K sets of n objects. Output [K*n*n, 2w] with row
  // (k, i, j) = concat(x[k,i], x[k,j]).
  Var form_pairs(Var x, std::size_t n);
  // Equivalent to linear(form_pairs(x, n), weight, bias) with weight [h, 2w],
  // computed as W_a x_i + W_b x_j + b without materialising the pairs.
  Var pair_linear(Var x, Var weight, Var bias, std::size_t n);
  // Sum of every consecutive block of `group` rows: [G*group, h] -> [G, h].
  Var group_sum(Var x, std::size_t group);
  Var scale(Var x, T factor);
  Var add(Var a, Var b);
  Var mul_mask(Var x, Tensor<T> mask);
  Var sum(Var x);
  Var sum_squares(Var x);
  // scores [B, K]; mean over the batch of -log softmax(scores_b)[target_b].
  Var softmax_cross_entropy(Var scores, std::vector<std::uint32_t> targets);

  void backward(Var loss);
  void reset();
  bool consumed() const { return consumed_; }

  // Label of the first node holding a NaN/Inf value, if any.
  std::optional<std::string> first_non_finite() const;
  // Concatenated sign pattern of every relu input; used to detect kinks.
  std::vector<std::uint8_t> relu_pattern() const;

 private:
  struct Node {
    std::string label;
    Tensor<T> own;
    const Tensor<T>* ref = nullptr;
    Tensor<T>* param = nullptr;
    std::vector<T> grad;
    bool requires_grad = false;
    std::function<void()> backward;
    const Tensor<T>& val() const { return ref ? *ref : own; }
  };

  Var push(std::string_view label, Tensor<T> value, bool requires_grad);
  Node& node(Var v);
  const Node& node(Var v) const;
  std::vector<T>& grad_buffer(Var v);

  std::deque<Node> nodes_;  // deque: value() references survive later ops
  std::vector<Var> relu_inputs_;
  bool consumed_ = false;
};

extern template class Tensor<float>;
extern template class Tensor<double>;
extern template class Graph<float>;
extern template class Graph<double>;

}  // namespace mlrn
