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

#include "record.hpp"
#include "tensor.hpp"

namespace mlrn {

inline constexpr std::uint16_t kDatasetVersion = 1;

// "MPGM" | version u16 | count u64 | image_size u16 | records | crc32 u32.
// The checksum covers the record bytes.
void write_dataset(const std::vector<SampleRecord>& samples, const std::string& path, std::size_t image_size = 0);
std::vector<SampleRecord> read_dataset(const std::string& path);

std::vector<std::uint8_t> encode_dataset(const std::vector<SampleRecord>& samples, std::size_t image_size = 0);
std::vector<SampleRecord> decode_dataset(const std::vector<std::uint8_t>& bytes);

std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes);

// 2x2 mean pooling of [C, H, W] (or [H, W]) with even H and W.
Tensor<float> downscale(const Tensor<float>& image);

// Archive of named arrays (.npz): "image" u8 [16, H, W], "target" integer
// scalar or [1]; optional "triples" u8 [k, 3] in object/attribute/relation
// codes. Other members are ignored.
struct ExternalLayout {
  std::string image_key = "image";
  std::string target_key = "target";
  std::string triples_key = "triples";
  std::size_t source_size = 160;
  std::size_t output_size = 80;
};

SampleRecord load_external_record(const std::string& path, const ExternalLayout& layout = {});

}  // namespace mlrn
