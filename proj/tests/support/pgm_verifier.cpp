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

#include "pgm_verifier.hpp"

#include <algorithm>
#include <array>
#include <cstdint>

namespace mlrn::testing {

namespace {

int bits(std::uint32_t m) {
  int n = 0;
  for (; m; m >>= 1) n += static_cast<int>(m & 1u);
  return n;
}

long read(const PanelSpec& p, ObjectType o, AttributeType a) {
  if (o == ObjectType::kShape) {
    switch (a) {
      case AttributeType::kPosition: return p.shapes.mask;
      case AttributeType::kNumber: return bits(p.shapes.mask);
      case AttributeType::kType: return p.shapes.type;
      case AttributeType::kSize: return p.shapes.size;
      case AttributeType::kColor: return p.shapes.color;
    }
  }
  switch (a) {
    case AttributeType::kPosition: return p.lines.mask;
    case AttributeType::kType: return p.lines.type;
    case AttributeType::kColor: return p.lines.color;
    default: return -1;
  }
}

bool relation_holds(RelationType r, const std::array<std::array<long, 3>, 3>& v) {
  switch (r) {
    case RelationType::kProgression: {
      const long d = v[0][1] - v[0][0];
      if (d == 0) return false;
      for (const auto& line : v)
        if (line[1] - line[0] != d || line[2] - line[1] != d) return false;
      return true;
    }
    case RelationType::kConsistentUnion: {
      auto sorted = [](std::array<long, 3> x) {
        std::sort(x.begin(), x.end());
        return x;
      };
      const auto first = sorted(v[0]);
      if (first[0] == first[1] || first[1] == first[2]) return false;
      for (const auto& line : v)
        if (sorted(line) != first) return false;
      return true;
    }
    case RelationType::kAnd:
    case RelationType::kOr:
    case RelationType::kXor:
      for (const auto& line : v) {
        long want = 0;
        for (int bit = 0; bit < 16; ++bit) {
          const bool a = (line[0] >> bit) & 1, b = (line[1] >> bit) & 1;
          const bool keep = r == RelationType::kAnd ? (a && b) : r == RelationType::kOr ? (a || b) : (a != b);
          if (keep) want |= 1L << bit;
        }
        if (line[2] != want) return false;
      }
      return true;
  }
  return false;
}

bool governs(const std::vector<StructureTriple>& ts, ObjectType o, AttributeType a) {
  return std::any_of(ts.begin(), ts.end(), [&](const StructureTriple& t) { return t.object == o && t.attribute == a; });
}

}  // namespace

bool completes_grid(const GeneratedSample& s, std::size_t candidate, const GeneratorConfig& cfg, std::string* why) {
  auto no = [&](const std::string& reason) {
    if (why) *why = reason;
    return false;
  };
  std::array<PanelSpec, 9> grid = s.grid;
  grid[8] = s.candidates.at(candidate);
  const auto& triples = s.record.triples;
  if (triples.empty()) return no("no triples");

  for (const StructureTriple& t : triples) {
    std::array<std::array<long, 3>, 3> v{};
    for (std::size_t line = 0; line < 3; ++line)
      for (std::size_t k = 0; k < 3; ++k)
        v[line][k] = read(grid[s.column_wise ? k * 3 + line : line * 3 + k], t.object, t.attribute);
    if (!relation_holds(t.relation, v)) return no("relation " + t.str() + " broken");
  }
  if (cfg.distractors) return true;

  for (ObjectType o : kAllObjects) {
    const bool used = std::any_of(triples.begin(), triples.end(), [&](const StructureTriple& t) { return t.object == o; });
    for (const PanelSpec& p : grid) {
      const std::uint32_t mask = o == ObjectType::kShape ? p.shapes.mask : p.lines.mask;
      if (!used && mask != 0) return no(to_string(o) + " layer present without a triple");
      if (used && mask == 0) return no(to_string(o) + " layer missing");
    }
    if (!used) continue;
    std::vector<AttributeType> attrs{AttributeType::kPosition, AttributeType::kType, AttributeType::kColor};
    if (o == ObjectType::kShape) attrs.push_back(AttributeType::kSize);
    for (AttributeType a : attrs) {
      if (governs(triples, o, a)) continue;
      if (o == ObjectType::kShape && a == AttributeType::kPosition && governs(triples, o, AttributeType::kNumber)) {
        for (const PanelSpec& p : grid) {
          const std::uint32_t m = p.shapes.mask;
          if (m != (1u << bits(m)) - 1u) return no("number-governed shapes off their canonical slots");
        }
        continue;
      }
      for (const PanelSpec& p : grid)
        if (read(p, o, a) != read(grid[0], o, a)) return no(to_string(o) + " " + to_string(a) + " not constant");
    }
  }
  return true;
}

std::vector<std::size_t> satisfying_candidates(const GeneratedSample& s, const GeneratorConfig& cfg) {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < s.candidates.size(); ++k)
    if (completes_grid(s, k, cfg)) out.push_back(k);
  return out;
}

}  // namespace mlrn::testing
