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

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace mlrn {

enum class EncodingVariant { kGaussian, kTriangle };

std::string to_string(EncodingVariant v);
EncodingVariant parse_encoding_variant(const std::string& s);

// Magnitude encoding settings ("ME d"): d components centred on an even grid
// over [-1, 1].
struct MEConfig {
  std::size_t d = 20;
  double sigma = 0.28;
  EncodingVariant variant = EncodingVariant::kGaussian;

  void validate() const;
  // c_j = 2 j / (d - 1) - 1
  double center(std::size_t j) const { return 2.0 * static_cast<double>(j) / static_cast<double>(d - 1) - 1.0; }
};

// Encodes each x_i independently into d components, written row-major as
// [n, d]. Inputs may exceed [-1, 1] by at most 1e-6 (clamped); anything else
// throws kDomain.
std::vector<double> magnitude_encode(std::span<const double> x, const MEConfig& cfg);
std::vector<double> magnitude_encode_gaussian(std::span<const double> x, const MEConfig& cfg);
std::vector<double> magnitude_encode_triangle(std::span<const double> x, const MEConfig& cfg);

// Value of component j for a single in-range scalar.
double encode_component(double x, std::size_t j, const MEConfig& cfg);

// Byte pixels map to b / 127.5 - 1; this table holds the d-vector for each of
// the 256 byte values so panels can be encoded by lookup.
class PixelEncodingTable {
 public:
  explicit PixelEncodingTable(const MEConfig& cfg);
  std::size_t dims() const { return d_; }
  const double* row(std::uint8_t b) const { return table_.data() + static_cast<std::size_t>(b) * d_; }

 private:
  std::size_t d_;
  std::vector<double> table_;
};

inline double byte_to_unit(std::uint8_t b) { return static_cast<double>(b) / 127.5 - 1.0; }

}  // namespace mlrn
