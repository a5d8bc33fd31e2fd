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

#include "encoding.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"

namespace mlrn {

namespace {
constexpr double kClampTolerance = 1e-6;

double checked_input(double x) {
  require(std::isfinite(x), ErrorCode::kDomain, "magnitude encoding input is not finite");
  require(x >= -1.0 - kClampTolerance && x <= 1.0 + kClampTolerance, ErrorCode::kDomain,
          "magnitude encoding input " + std::to_string(x) + " outside [-1, 1]");
  return std::clamp(x, -1.0, 1.0);
}

std::vector<double> encode_all(std::span<const double> x, const MEConfig& cfg, EncodingVariant variant) {
  cfg.validate();
  MEConfig c = cfg;
  c.variant = variant;
  std::vector<double> out(x.size() * cfg.d);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double v = checked_input(x[i]);
    for (std::size_t j = 0; j < cfg.d; ++j) out[i * cfg.d + j] = encode_component(v, j, c);
  }
  return out;
}
}  // namespace

std::string to_string(EncodingVariant v) { return v == EncodingVariant::kGaussian ? "gaussian" : "triangle"; }

EncodingVariant parse_encoding_variant(const std::string& s) {
  if (s == "gaussian") return EncodingVariant::kGaussian;
  if (s == "triangle") return EncodingVariant::kTriangle;
  fail(ErrorCode::kInvalidArgument, "unknown encoding variant '" + s + "'");
}

void MEConfig::validate() const {
  require(d >= 2, ErrorCode::kInvalidArgument, "magnitude encoding needs d >= 2");
  require(sigma > 0.0 && std::isfinite(sigma), ErrorCode::kInvalidArgument, "magnitude encoding needs sigma > 0");
}

double encode_component(double x, std::size_t j, const MEConfig& cfg) {
  const double diff = x - cfg.center(j);
  if (cfg.variant == EncodingVariant::kGaussian) return std::exp(-(diff * diff) / (2.0 * cfg.sigma * cfg.sigma));
  const double gap = 2.0 / static_cast<double>(cfg.d - 1);
  return std::max(0.0, 1.0 - std::abs(diff) / gap);
}

std::vector<double> magnitude_encode_gaussian(std::span<const double> x, const MEConfig& cfg) {
  return encode_all(x, cfg, EncodingVariant::kGaussian);
}

std::vector<double> magnitude_encode_triangle(std::span<const double> x, const MEConfig& cfg) {
  return encode_all(x, cfg, EncodingVariant::kTriangle);
}

std::vector<double> magnitude_encode(std::span<const double> x, const MEConfig& cfg) {
  return encode_all(x, cfg, cfg.variant);
}

PixelEncodingTable::PixelEncodingTable(const MEConfig& cfg) : d_(cfg.d) {
  cfg.validate();
  table_.resize(256 * d_);
  for (int b = 0; b < 256; ++b) {
    const double x = byte_to_unit(static_cast<std::uint8_t>(b));
    for (std::size_t j = 0; j < d_; ++j) table_[static_cast<std::size_t>(b) * d_ + j] = encode_component(x, j, cfg);
  }
}

}  // namespace mlrn
