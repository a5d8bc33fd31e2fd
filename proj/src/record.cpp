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

#include "record.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "error.hpp"

namespace mlrn {

namespace {
std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}
}  // namespace

std::string to_string(ObjectType v) { return v == ObjectType::kLine ? "line" : "shape"; }

std::string to_string(AttributeType v) {
  switch (v) {
    case AttributeType::kColor: return "color";
    case AttributeType::kPosition: return "position";
    case AttributeType::kType: return "type";
    case AttributeType::kNumber: return "number";
    case AttributeType::kSize: return "size";
  }
  return "?";
}

std::string to_string(RelationType v) {
  switch (v) {
    case RelationType::kAnd: return "AND";
    case RelationType::kOr: return "OR";
    case RelationType::kXor: return "XOR";
    case RelationType::kProgression: return "progression";
    case RelationType::kConsistentUnion: return "consistent_union";
  }
  return "?";
}

std::optional<ObjectType> parse_object(const std::string& s) {
  const std::string l = lower(s);
  if (l == "line") return ObjectType::kLine;
  if (l == "shape") return ObjectType::kShape;
  return std::nullopt;
}

std::optional<AttributeType> parse_attribute(const std::string& s) {
  const std::string l = lower(s);
  for (AttributeType a : kAllAttributes)
    if (to_string(a) == l) return a;
  if (l == "colour") return AttributeType::kColor;
  return std::nullopt;
}

std::optional<RelationType> parse_relation(const std::string& s) {
  const std::string l = lower(s);
  if (l == "and") return RelationType::kAnd;
  if (l == "or") return RelationType::kOr;
  if (l == "xor") return RelationType::kXor;
  if (l == "progression") return RelationType::kProgression;
  if (l == "consistent_union" || l == "cons_union" || l == "consistent union") return RelationType::kConsistentUnion;
  return std::nullopt;
}

std::string StructureTriple::str() const {
  return to_string(object) + ":" + to_string(attribute) + ":" + to_string(relation);
}

StructureTriple StructureTriple::parse(const std::string& s) {
  std::stringstream ss(s);
  std::string o, a, r;
  std::getline(ss, o, ':');
  std::getline(ss, a, ':');
  std::getline(ss, r);
  auto obj = parse_object(o);
  auto attr = parse_attribute(a);
  auto rel = parse_relation(r);
  require(obj && attr && rel, ErrorCode::kInvalidArgument, "cannot parse structure triple '" + s + "'");
  return {*obj, *attr, *rel};
}

void SampleRecord::validate() const {
  require(image_size > 0, ErrorCode::kFormat, "sample image_size must be positive");
  require(panels.size() == kPanelsPerSample * panel_pixels(), ErrorCode::kFormat,
          "sample must hold 16 panels of " + std::to_string(image_size) + "x" + std::to_string(image_size));
  require(target < kCandidates, ErrorCode::kFormat, "sample target " + std::to_string(target) + " outside 0..7");
}

}  // namespace mlrn
