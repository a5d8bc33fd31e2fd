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

#include "tensor.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <sstream>

#include "blas.hpp"

namespace mlrn {

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ']';
  return os.str();
}

namespace {

void check_shape(const Shape& shape) {
  require(!shape.empty(), ErrorCode::kShapeMismatch, "tensor shape must have rank >= 1");
  for (std::size_t d : shape)
    require(d > 0, ErrorCode::kShapeMismatch, "tensor dims must be positive, got " + shape_string(shape));
}

}  // namespace

template <typename T>
Tensor<T>::Tensor(Shape shape) : shape_(std::move(shape)) {
  check_shape(shape_);
  data_.assign(shape_size(shape_), T(0));
}

template <typename T>
Tensor<T>::Tensor(Shape shape, std::vector<T> data) : shape_(std::move(shape)), data_(std::move(data)) {
  check_shape(shape_);
  require(shape_size(shape_) == data_.size(), ErrorCode::kShapeMismatch,
          "data length " + std::to_string(data_.size()) + " does not match shape " + shape_string(shape_));
}

template <typename T>
Tensor<T> Tensor<T>::reshaped(Shape shape) const {
  return Tensor(std::move(shape), data_);
}

template <typename T>
bool Tensor<T>::all_finite() const {
  for (T v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

// ---------------------------------------------------------------------------
// graph bookkeeping

template <typename T>
Var Graph<T>::push(std::string_view label, Tensor<T> value, bool requires_grad) {
  require(nodes_.size() < UINT32_MAX - 1, ErrorCode::kState, "graph too large");
  Node n;
  n.label = std::string(label);
  n.own = std::move(value);
  n.requires_grad = requires_grad;
  nodes_.push_back(std::move(n));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

template <typename T>
typename Graph<T>::Node& Graph<T>::node(Var v) {
  require(v.id < nodes_.size(), ErrorCode::kState, "variable does not belong to this graph");
  return nodes_[v.id];
}

template <typename T>
const typename Graph<T>::Node& Graph<T>::node(Var v) const {
  require(v.id < nodes_.size(), ErrorCode::kState, "variable does not belong to this graph");
  return nodes_[v.id];
}

template <typename T>
std::vector<T>& Graph<T>::grad_buffer(Var v) {
  Node& n = node(v);
  if (n.grad.empty()) n.grad.assign(n.val().size(), T(0));
  return n.grad;
}

template <typename T>
Var Graph<T>::constant(Tensor<T> value, std::string_view label) {
  return push(label, std::move(value), false);
}

template <typename T>
Var Graph<T>::parameter(Tensor<T>& param, std::string_view label) {
  Var v = push(label, Tensor<T>(), true);
  nodes_[v.id].ref = &param;
  nodes_[v.id].param = &param;
  return v;
}

template <typename T>
const Tensor<T>& Graph<T>::value(Var v) const {
  return node(v).val();
}

template <typename T>
std::span<const T> Graph<T>::grad(Var v) const {
  return node(v).grad;
}

template <typename T>
const std::string& Graph<T>::label(Var v) const {
  return node(v).label;
}

template <typename T>
void Graph<T>::reset() {
  nodes_.clear();
  relu_inputs_.clear();
  consumed_ = false;
}

template <typename T>
void Graph<T>::backward(Var loss) {
  require(!consumed_, ErrorCode::kState, "graph already consumed by backward(); call reset() first");
  require(value(loss).size() == 1, ErrorCode::kShapeMismatch, "backward() needs a scalar loss");
  consumed_ = true;
  if (!node(loss).requires_grad) return;
  grad_buffer(loss)[0] = T(1);
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.backward && !n.grad.empty()) n.backward();
  }
  for (Node& n : nodes_) {
    if (!n.param || n.grad.empty()) continue;
    n.param->enable_grad();
    auto g = n.param->grad();
    for (std::size_t k = 0; k < g.size(); ++k) g[k] += n.grad[k];
  }
}

template <typename T>
std::optional<std::string> Graph<T>::first_non_finite() const {
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (!nodes_[i].val().all_finite())
      return nodes_[i].label + " (node " + std::to_string(i) + ", shape " +
             shape_string(nodes_[i].val().shape()) + ")";
  return std::nullopt;
}

template <typename T>
std::vector<std::uint8_t> Graph<T>::relu_pattern() const {
  std::vector<std::uint8_t> out;
  for (Var v : relu_inputs_)
    for (T x : value(v).data()) out.push_back(x > T(0) ? 1 : 0);
  return out;
}

// ---------------------------------------------------------------------------
// primitives

template <typename T>
Var Graph<T>::conv2d(Var input, Var kernels, Var bias, int stride, int padding) {
  require(stride >= 1, ErrorCode::kInvalidArgument, "conv2d stride must be >= 1");
  require(padding >= 0, ErrorCode::kInvalidArgument, "conv2d padding must be >= 0");
  const Shape in_shape = shape(input);
  const Shape& ks = shape(kernels);
  require(in_shape.size() == 3 || in_shape.size() == 4, ErrorCode::kShapeMismatch,
          "conv2d input must be [C,H,W] or [N,C,H,W], got " + shape_string(in_shape));
  const bool batched = in_shape.size() == 4;
  const std::size_t n_img = batched ? in_shape[0] : 1;
  const std::size_t c_in = in_shape[batched ? 1 : 0];
  const std::size_t h = in_shape[batched ? 2 : 1];
  const std::size_t w = in_shape[batched ? 3 : 2];
  require(ks.size() == 4 && ks[2] == 3 && ks[3] == 3, ErrorCode::kShapeMismatch,
          "conv2d kernels must be [C_out,C_in,3,3], got " + shape_string(ks));
  require(ks[1] == c_in, ErrorCode::kShapeMismatch,
          "conv2d input has " + std::to_string(c_in) + " channels but kernels expect " + std::to_string(ks[1]));
  const std::size_t c_out = ks[0];
  require(shape(bias) == Shape{c_out}, ErrorCode::kShapeMismatch, "conv2d bias must be [C_out]");
  const long hp = static_cast<long>(h) + 2L * padding - 3;
  const long wp = static_cast<long>(w) + 2L * padding - 3;
  require(hp >= 0 && wp >= 0, ErrorCode::kShapeMismatch, "conv2d input smaller than the 3x3 kernel");
  const std::size_t ho = static_cast<std::size_t>(hp / stride) + 1;
  const std::size_t wo = static_cast<std::size_t>(wp / stride) + 1;
  const std::size_t kk = c_in * 9;
  const std::size_t pix = ho * wo;
  const std::size_t rows = n_img * pix;

  // Patch matrix: one row per output pixel (n, oy, ox), columns (c, ky, kx).
  auto patches = std::make_shared<std::vector<T>>(rows * kk, T(0));
  {
    const T* x = value(input).data().data();
    T* p = patches->data();
    for (std::size_t n = 0; n < n_img; ++n)
      for (std::size_t oy = 0; oy < ho; ++oy)
        for (std::size_t ox = 0; ox < wo; ++ox) {
          T* row = p + ((n * ho + oy) * wo + ox) * kk;
          for (std::size_t c = 0; c < c_in; ++c) {
            const T* plane = x + (n * c_in + c) * h * w;
            for (int ky = 0; ky < 3; ++ky) {
              const long iy = static_cast<long>(oy * stride) - padding + ky;
              if (iy < 0 || iy >= static_cast<long>(h)) continue;
              for (int kx = 0; kx < 3; ++kx) {
                const long ix = static_cast<long>(ox * stride) - padding + kx;
                if (ix < 0 || ix >= static_cast<long>(w)) continue;
                row[c * 9 + ky * 3 + kx] = plane[iy * static_cast<long>(w) + ix];
              }
            }
          }
        }
  }
  std::vector<T> pixel_major(rows * c_out);
  blas::gemm<T>(false, true, rows, c_out, kk, T(1), patches->data(), kk,
                value(kernels).data().data(), kk, T(0), pixel_major.data(), c_out);
  Shape out_shape = batched ? Shape{n_img, c_out, ho, wo} : Shape{c_out, ho, wo};
  Tensor<T> out(out_shape);
  {
    const T* b = value(bias).data().data();
    T* o = out.data().data();
    for (std::size_t n = 0; n < n_img; ++n)
      for (std::size_t q = 0; q < pix; ++q)
        for (std::size_t co = 0; co < c_out; ++co)
          o[(n * c_out + co) * pix + q] = pixel_major[(n * pix + q) * c_out + co] + b[co];
  }
  const bool rg = node(input).requires_grad || node(kernels).requires_grad || node(bias).requires_grad;
  Var y = push("conv2d", std::move(out), rg);
  if (!rg) return y;
  nodes_[y.id].backward = [=, this]() {
    const std::vector<T>& gy = nodes_[y.id].grad;
    std::vector<T> gpix(rows * c_out);
    for (std::size_t n = 0; n < n_img; ++n)
      for (std::size_t co = 0; co < c_out; ++co)
        for (std::size_t q = 0; q < pix; ++q)
          gpix[(n * pix + q) * c_out + co] = gy[(n * c_out + co) * pix + q];
    if (node(bias).requires_grad) {
      std::vector<T>& gb = grad_buffer(bias);
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t co = 0; co < c_out; ++co) gb[co] += gpix[r * c_out + co];
    }
    if (node(kernels).requires_grad) {
      std::vector<T>& gk = grad_buffer(kernels);
      blas::gemm<T>(true, false, c_out, kk, rows, T(1), gpix.data(), c_out, patches->data(), kk, T(1),
                    gk.data(), kk);
    }
    if (node(input).requires_grad) {
      std::vector<T> gpatch(rows * kk);
      blas::gemm<T>(false, false, rows, kk, c_out, T(1), gpix.data(), c_out, value(kernels).data().data(),
                    kk, T(0), gpatch.data(), kk);
      std::vector<T>& gx = grad_buffer(input);
      for (std::size_t n = 0; n < n_img; ++n)
        for (std::size_t oy = 0; oy < ho; ++oy)
          for (std::size_t ox = 0; ox < wo; ++ox) {
            const T* row = gpatch.data() + ((n * ho + oy) * wo + ox) * kk;
            for (std::size_t c = 0; c < c_in; ++c) {
              T* plane = gx.data() + (n * c_in + c) * h * w;
              for (int ky = 0; ky < 3; ++ky) {
                const long iy = static_cast<long>(oy * stride) - padding + ky;
                if (iy < 0 || iy >= static_cast<long>(h)) continue;
                for (int kx = 0; kx < 3; ++kx) {
                  const long ix = static_cast<long>(ox * stride) - padding + kx;
                  if (ix < 0 || ix >= static_cast<long>(w)) continue;
                  plane[iy * static_cast<long>(w) + ix] += row[c * 9 + ky * 3 + kx];
                }
              }
            }
          }
    }
  };
  return y;
}

template <typename T>
Var Graph<T>::linear(Var input, Var weight, Var bias) {
  const Shape& xs = shape(input);
  const Shape& ws = shape(weight);
  require(ws.size() == 2, ErrorCode::kShapeMismatch, "linear weight must be [out,in]");
  require(xs.size() == 1 || xs.size() == 2, ErrorCode::kShapeMismatch, "linear input must be [in] or [N,in]");
  const std::size_t n_in = xs.back();
  const std::size_t rows = xs.size() == 2 ? xs[0] : 1;
  const std::size_t n_out = ws[0];
  require(ws[1] == n_in, ErrorCode::kShapeMismatch,
          "linear weight " + shape_string(ws) + " does not accept input " + shape_string(xs));
  require(shape(bias) == Shape{n_out}, ErrorCode::kShapeMismatch, "linear bias must be [out]");
  Tensor<T> out(xs.size() == 2 ? Shape{rows, n_out} : Shape{n_out});
  {
    T* o = out.data().data();
    const T* b = value(bias).data().data();
    for (std::size_t r = 0; r < rows; ++r) std::copy(b, b + n_out, o + r * n_out);
    blas::gemm<T>(false, true, rows, n_out, n_in, T(1), value(input).data().data(), n_in,
                  value(weight).data().data(), n_in, T(1), o, n_out);
  }
  const bool rg = node(input).requires_grad || node(weight).requires_grad || node(bias).requires_grad;
  Var y = push("linear", std::move(out), rg);
  if (!rg) return y;
  nodes_[y.id].backward = [=, this]() {
    const std::vector<T>& gy = nodes_[y.id].grad;
    if (node(bias).requires_grad) {
      std::vector<T>& gb = grad_buffer(bias);
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t o = 0; o < n_out; ++o) gb[o] += gy[r * n_out + o];
    }
    if (node(weight).requires_grad)
      blas::gemm<T>(true, false, n_out, n_in, rows, T(1), gy.data(), n_out, value(input).data().data(), n_in,
                    T(1), grad_buffer(weight).data(), n_in);
    if (node(input).requires_grad)
      blas::gemm<T>(false, false, rows, n_in, n_out, T(1), gy.data(), n_out, value(weight).data().data(), n_in,
                    T(1), grad_buffer(input).data(), n_in);
  };
  return y;
}

template <typename T>
Var Graph<T>::relu(Var x) {
  const Tensor<T>& xv = value(x);
  Tensor<T> out(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = xv[i] > T(0) ? xv[i] : T(0);
  const bool rg = node(x).requires_grad;
  relu_inputs_.push_back(x);
  Var y = push("relu", std::move(out), rg);
  if (!rg) return y;
  nodes_[y.id].backward = [=, this]() {
    const std::vector<T>& gy = nodes_[y.id].grad;
    std::vector<T>& gx = grad_buffer(x);
    const Tensor<T>& in = value(x);
    for (std::size_t i = 0; i < gy.size(); ++i)
      if (in[i] > T(0)) gx[i] += gy[i];
  };
  return y;
}

template <typename T>
Var Graph<T>::reshape(Var x, Shape new_shape) {
  Tensor<T> out = value(x).reshaped(std::move(new_shape));
  const bool rg = node(x).requires_grad;
  Var y = push("reshape", std::move(out), rg);
  if (!rg) return y;
  nodes_[y.id].backward = [=, this]() {
    const std::vector<T>& gy = nodes_[y.id].grad;
    std::vector<T>& gx = grad_buffer(x);
    for (std::size_t i = 0; i < gy.size(); ++i) gx[i] += gy[i];
  };
  return y;
}

template <typename T>
Var Graph<T>::concat_cols(Var a, Var b) {
  const Shape& as = shape(a);
  const Shape& bs = shape(b);
  require(as.size() == 2 && bs.size() == 2 && as[0] == bs[0], ErrorCode::kShapeMismatch,
          "concat_cols needs [N,p] and [N,q], got " + shape_string(as) + " and " + shape_string(bs));
  const std::size_t rows = as[0], p = as[1], q = bs[1];
  Tensor<T> out({rows, p + q});
  const T* av = value(a).data().data();
  const T* bv = value(b).data().data();
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy(av + r * p, av + (r + 1) * p, out.data().data() + r * (p + q));
    std::copy(bv + r * q, bv + (r + 1) * q, out.data().data() + r * (p + q) + p);
  }
  const bool rg = node(a).requires_grad || node(b).requires_grad;
  Var y = push("concat_cols", std::move(out), rg);
  if (!rg) return y;
  nodes_[y.id].backward = [=, this]() {
    const std::vector<T>& gy = nodes_[y.id].grad;
    if (node(a).requires_grad) {
      std::vector<T>& ga = grad_buffer(a);
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t k = 0; k < p; ++k) ga[r * p + k] += gy[r * (p + q) + k];
    }
    if (node(b).requires_grad) {
      std::vector<T>& gb = grad_buffer(b);
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t k = 0; k < q; ++k) gb[r * q + k] += gy[r * (p + q) + p + k];
    }
  };
  return y;
}

template <typename T>
Var Graph<T>::gather_rows(Var x, std::vector<std::uint32_t> rows) {
  const Shape& xs = shape(x);
  require(xs.size() == 2, ErrorCode::kShapeMismatch, "gather_rows needs a rank-2 input");
  require(!rows.empty(), ErrorCode::kInvalidArgument, "gather_rows needs at least one row");
  const std::size_t width = xs[1];
  Tensor<T> out({rows.size(), width});
  const T* xv = value(x).data().data();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    require(rows[r] < xs[0], ErrorCode::kInvalidArgument, "gather_rows index out of range");
    std::copy(xv + rows[r] * width, xv + (rows[r] + 1) * width, out.data().data() + r * width);
  }
  const bool rg = node(x).requires_grad;
  Var y = push("gather_rows", std::move(out), rg);
  if (!rg) return y;
  nodes_[y.id].backward = [=, this, rows = std::move(rows)]() {
    const std::vector<T>& gy = nodes_[y.id].grad;
    std::vector<T>& gx = grad_buffer(x);
    for (std::size_t r = 0; r < rows.size(); ++r)
      for (std::size_t k = 0; k < width; ++k) gx[rows[r] * width + k] += gy[r * width + k];
  };
  return y;
}

template <typename T>
Var Graph<T>::form_pairs(Var x, std::size_t n) {
  const Shape& xs = shape(x);
  require(n > 0 && xs.size() == 2 && xs[0] % n == 0, ErrorCode::kShapeMismatch,
          "form_pairs needs [K*n, w] input, got " + shape_string(xs) + " with n=" + std::to_string(n));
  const std::size_t sets = xs[0] / n, w = xs[1];
  Tensor<T> out({sets * n * n, 2 * w});
  const T* xv = value(x).data().data();
  T* o = out.data().data();
  for (std::size_t k = 0; k < sets; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        T* row = o + ((k * n + i) * n + j) * 2 * w;
        std::copy(xv + (k * n + i) * w, xv + (k * n + i + 1) * w, row);
        std::copy(xv + (k * n + j) * w, xv + (k * n + j + 1) * w, row + w);
      }
  const bool rg = node(x).requires_grad;
  Var y = push("form_pairs", std::move(out), rg);
  if (!rg) return y;
  nodes_[y.id].backward = [=, this]() {
    const std::vector<T>& gy = nodes_[y.id].grad;
    std::vector<T>& gx = grad_buffer(x);
    for (std::size_t k = 0; k < sets; ++k)
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          const T* row = gy.data() + ((k * n + i) * n + j) * 2 * w;
          for (std::size_t c = 0; c < w; ++c) {
            gx[(k * n + i) * w + c] += row[c];
            gx[(k * n + j) * w + c] += row[w + c];
          }
        }
  };
  return y;
}

template <typename T>
Var Graph<T>::pair_linear(Var x, Var weight, Var bias, std::size_t n) {
  const Shape& xs = shape(x);
  const Shape& ws = shape(weight);
  require(n > 0 && xs.size() == 2 && xs[0] % n == 0, ErrorCode::kShapeMismatch,
          "pair_linear needs [K*n, w] input, got " + shape_string(xs));
  const std::size_t rows = xs[0], sets = rows / n, w = xs[1];
  require(ws.size() == 2 && ws[1] == 2 * w, ErrorCode::kShapeMismatch,
          "pair_linear weight " + shape_string(ws) + " needs input width 2*" + std::to_string(w));
  const std::size_t h = ws[0];
  require(shape(bias) == Shape{h}, ErrorCode::kShapeMismatch, "pair_linear bias must be [out]");
  const T* xv = value(x).data().data();
  const T* wv = value(weight).data().data();
  std::vector<T> left(rows * h), right(rows * h);
  blas::gemm<T>(false, true, rows, h, w, T(1), xv, w, wv, 2 * w, T(0), left.data(), h);
  blas::gemm<T>(false, true, rows, h, w, T(1), xv, w, wv + w, 2 * w, T(0), right.data(), h);
  Tensor<T> out({sets * n * n, h});
  {
    const T* b = value(bias).data().data();
    T* o = out.data().data();
    for (std::size_t k = 0; k < sets; ++k)
      for (std::size_t i = 0; i < n; ++i) {
        const T* li = left.data() + (k * n + i) * h;
        for (std::size_t j = 0; j < n; ++j) {
          const T* rj = right.data() + (k * n + j) * h;
          T* row = o + ((k * n + i) * n + j) * h;
          for (std::size_t c = 0; c < h; ++c) row[c] = li[c] + rj[c] + b[c];
        }
      }
  }
  const bool rg = node(x).requires_grad || node(weight).requires_grad || node(bias).requires_grad;
  Var y = push("pair_linear", std::move(out), rg);
  if (!rg) return y;
  nodes_[y.id].backward = [=, this]() {
    const std::vector<T>& gy = nodes_[y.id].grad;
    std::vector<T> gl(rows * h, T(0)), gr(rows * h, T(0));
    for (std::size_t k = 0; k < sets; ++k)
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          const T* row = gy.data() + ((k * n + i) * n + j) * h;
          T* li = gl.data() + (k * n + i) * h;
          T* rj = gr.data() + (k * n + j) * h;
          for (std::size_t c = 0; c < h; ++c) {
            li[c] += row[c];
            rj[c] += row[c];
          }
        }
    if (node(bias).requires_grad) {
      std::vector<T>& gb = grad_buffer(bias);
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < h; ++c) gb[c] += gl[r * h + c];
    }
    if (node(weight).requires_grad) {
      std::vector<T>& gw = grad_buffer(weight);
      const T* xin = value(x).data().data();
      blas::gemm<T>(true, false, h, w, rows, T(1), gl.data(), h, xin, w, T(1), gw.data(), 2 * w);
      blas::gemm<T>(true, false, h, w, rows, T(1), gr.data(), h, xin, w, T(1), gw.data() + w, 2 * w);
    }
    if (node(x).requires_grad) {
      std::vector<T>& gx = grad_buffer(x);
      const T* wt = value(weight).data().data();
      blas::gemm<T>(false, false, rows, w, h, T(1), gl.data(), h, wt, 2 * w, T(1), gx.data(), w);
      blas::gemm<T>(false, false, rows, w, h, T(1), gr.data(), h, wt + w, 2 * w, T(1), gx.data(), w);
    }
  };
  return y;
}

template <typename T>
Var Graph<T>::group_sum(Var x, std::size_t group) {
  const Shape& xs = shape(x);
  require(group > 0 && xs.size() == 2 && xs[0] % group == 0, ErrorCode::kShapeMismatch,
          "group_sum needs [G*group, h], got " + shape_string(xs) + " with group=" + std::to_string(group));
  const std::size_t groups = xs[0] / group, h = xs[1];
  Tensor<T> out({groups, h});
  const T* xv = value(x).data().data();
  T* o = out.data().data();
  for (std::size_t g = 0; g < groups; ++g)
    for (std::size_t r = 0; r < group; ++r) {
      const T* row = xv + (g * group + r) * h;
      for (std::size_t c = 0; c < h; ++c) o[g * h + c] += row[c];
    }
  const bool rg = node(x).requires_grad;
  Var y = push("group_sum", std::move(out), rg);
  if (!rg) return y;
  nodes_[y.id].backward = [=, this]() {
    const std::vector<T>& gy = nodes_[y.id].grad;
    std::vector<T>& gx = grad_buffer(x);
    for (std::size_t g = 0; g < groups; ++g)
      for (std::size_t r = 0; r < group; ++r)
        for (std::size_t c = 0; c < h; ++c) gx[(g * group + r) * h + c] += gy[g * h + c];
  };
  return y;
}

template <typename T>
Var Graph<T>::scale(Var x, T factor) {
  const Tensor<T>& xv = value(x);
  Tensor<T> out(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = xv[i] * factor;
  const bool rg = node(x).requires_grad;
  Var y = push("scale", std::move(out), rg);
  if (!rg) return y;
  nodes_[y.id].backward = [=, this]() {
    const std::vector<T>& gy = nodes_[y.id].grad;
    std::vector<T>& gx = grad_buffer(x);
    for (std::size_t i = 0; i < gy.size(); ++i) gx[i] += gy[i] * factor;
  };
  return y;
}

template <typename T>
Var Graph<T>::add(Var a, Var b) {
  require(shape(a) == shape(b), ErrorCode::kShapeMismatch,
          "add needs equal shapes, got " + shape_string(shape(a)) + " and " + shape_string(shape(b)));
  const Tensor<T>& av = value(a);
  const Tensor<T>& bv = value(b);
  Tensor<T> out(av.shape());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] + bv[i];
  const bool rg = node(a).requires_grad || node(b).requires_grad;
  Var y = push("add", std::move(out), rg);
  if (!rg) return y;
  nodes_[y.id].backward = [=, this]() {
    const std::vector<T>& gy = nodes_[y.id].grad;
    for (Var in : {a, b}) {
      if (!node(in).requires_grad) continue;
      std::vector<T>& gx = grad_buffer(in);
      for (std::size_t i = 0; i < gy.size(); ++i) gx[i] += gy[i];
    }
  };
  return y;
}

template <typename T>
Var Graph<T>::mul_mask(Var x, Tensor<T> mask) {
  require(mask.shape() == shape(x), ErrorCode::kShapeMismatch, "mask shape must match its input");
  const Tensor<T>& xv = value(x);
  Tensor<T> out(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = xv[i] * mask[i];
  const bool rg = node(x).requires_grad;
  Var y = push("mul_mask", std::move(out), rg);
  if (!rg) return y;
  nodes_[y.id].backward = [=, this, mask = std::move(mask)]() {
    const std::vector<T>& gy = nodes_[y.id].grad;
    std::vector<T>& gx = grad_buffer(x);
    for (std::size_t i = 0; i < gy.size(); ++i) gx[i] += gy[i] * mask[i];
  };
  return y;
}

template <typename T>
Var Graph<T>::sum(Var x) {
  T acc = T(0);
  for (T v : value(x).data()) acc += v;
  const bool rg = node(x).requires_grad;
  Var y = push("sum", Tensor<T>::scalar(acc), rg);
  if (!rg) return y;
  nodes_[y.id].backward = [=, this]() {
    const T g = nodes_[y.id].grad[0];
    for (T& gx : grad_buffer(x)) gx += g;
  };
  return y;
}

template <typename T>
Var Graph<T>::sum_squares(Var x) {
  T acc = T(0);
  for (T v : value(x).data()) acc += v * v;
  const bool rg = node(x).requires_grad;
  Var y = push("sum_squares", Tensor<T>::scalar(acc), rg);
  if (!rg) return y;
  nodes_[y.id].backward = [=, this]() {
    const T g = nodes_[y.id].grad[0];
    std::vector<T>& gx = grad_buffer(x);
    const Tensor<T>& xv = value(x);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += T(2) * xv[i] * g;
  };
  return y;
}

template <typename T>
Var Graph<T>::softmax_cross_entropy(Var scores, std::vector<std::uint32_t> targets) {
  const Shape& ss = shape(scores);
  require(ss.size() == 1 || ss.size() == 2, ErrorCode::kShapeMismatch, "scores must be [K] or [B,K]");
  const std::size_t batch = ss.size() == 2 ? ss[0] : 1;
  const std::size_t k = ss.back();
  require(targets.size() == batch, ErrorCode::kInvalidArgument, "one target per score row required");
  for (std::uint32_t t : targets)
    require(t < k, ErrorCode::kInvalidArgument,
            "target " + std::to_string(t) + " out of range 0.." + std::to_string(k - 1));
  const T* s = value(scores).data().data();
  for (std::size_t i = 0; i < batch * k; ++i)
    require(std::isfinite(s[i]), ErrorCode::kNumeric, "softmax_cross_entropy received a non-finite score");
  std::vector<double> probs(batch * k);
  double total = 0.0;
  for (std::size_t b = 0; b < batch; ++b) {
    const T* row = s + b * k;
    double mx = row[0];
    for (std::size_t j = 1; j < k; ++j) mx = std::max(mx, static_cast<double>(row[j]));
    double z = 0.0;
    for (std::size_t j = 0; j < k; ++j) z += std::exp(static_cast<double>(row[j]) - mx);
    for (std::size_t j = 0; j < k; ++j) probs[b * k + j] = std::exp(static_cast<double>(row[j]) - mx) / z;
    total += mx + std::log(z) - static_cast<double>(row[targets[b]]);
  }
  const bool rg = node(scores).requires_grad;
  Var y = push("softmax_cross_entropy", Tensor<T>::scalar(static_cast<T>(total / static_cast<double>(batch))), rg);
  if (!rg) return y;
  nodes_[y.id].backward = [=, this, probs = std::move(probs), targets = std::move(targets)]() {
    const double g = static_cast<double>(nodes_[y.id].grad[0]) / static_cast<double>(batch);
    std::vector<T>& gs = grad_buffer(scores);
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t j = 0; j < k; ++j) {
        const double onehot = j == targets[b] ? 1.0 : 0.0;
        gs[b * k + j] += static_cast<T>(g * (probs[b * k + j] - onehot));
      }
  };
  return y;
}

template class Tensor<float>;
template class Tensor<double>;
template class Graph<float>;
template class Graph<double>;

}  // namespace mlrn
