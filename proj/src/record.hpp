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
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mlrn {

// Enum codes are the on-disk byte values of the dataset format.
enum class ObjectType : std::uint8_t { kLine = 0, kShape = 1 };
enum class AttributeType : std::uint8_t { kColor = 0, kPosition = 1, kType = 2, kNumber = 3, kSize = 4 };
enum class RelationType : std::uint8_t { kAnd = 0, kOr = 1, kXor = 2, kProgression = 3, kConsistentUnion = 4 };

inline constexpr std::array<ObjectType, 2> kAllObjects{ObjectType::kLine, ObjectType::kShape};
inline constexpr std::array<AttributeType, 5> kAllAttributes{AttributeType::kColor, AttributeType::kPosition,
                                                             AttributeType::kType, AttributeType::kNumber,
                                                             AttributeType::kSize};
inline constexpr std::array<RelationType, 5> kAllRelations{RelationType::kAnd, RelationType::kOr, RelationType::kXor,
                                                           RelationType::kProgression,
                                                           RelationType::kConsistentUnion};

std::string to_string(ObjectType v);
std::string to_string(AttributeType v);
std::string to_string(RelationType v);
std::optional<ObjectType> parse_object(const std::string& s);
std::optional<AttributeType> parse_attribute(const std::string& s);
std::optional<RelationType> parse_relation(const std::string& s);

struct StructureTriple {
  ObjectType object = ObjectType::kShape;
  AttributeType attribute = AttributeType::kPosition;
  RelationType relation = RelationType::kAnd;

  friend bool operator==(const StructureTriple&, const StructureTriple&) = default;
  std::string str() const;
  // "shape:position:AND" form used by config files.
  static StructureTriple parse(const std::string& s);
};

inline constexpr std::size_t kContextPanels = 8;
inline constexpr std::size_t kCandidates = 8;
inline constexpr std::size_t kPanelsPerSample = kContextPanels + kCandidates;

// One matrix: 8 context panels (grid cells 0..7, row-major), then 8 answer
// candidates. Pixels are stored as bytes b, meaning b / 127.5 - 1.
struct SampleRecord {
  std::size_t image_size = 0;
  std::vector<std::uint8_t> panels;  // kPanelsPerSample * S * S
  std::uint8_t target = 0;
  std::vector<StructureTriple> triples;

  std::size_t panel_pixels() const { return image_size * image_size; }
  std::span<const std::uint8_t> panel(std::size_t i) const {
    return std::span<const std::uint8_t>(panels).subspan(i * panel_pixels(), panel_pixels());
  }
  std::span<std::uint8_t> panel(std::size_t i) {
    return std::span<std::uint8_t>(panels).subspan(i * panel_pixels(), panel_pixels());
  }
  void validate() const;

  friend bool operator==(const SampleRecord&, const SampleRecord&) = default;
};

}  // namespace mlrn
