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
#include <vector>

#include "record.hpp"
#include "rng.hpp"
#include "tensor.hpp"

namespace mlrn {

// Symbolic content of one panel. A layer with mask 0 is absent.
struct ShapeLayer {
  std::uint32_t mask = 0;  // occupied grid slots; number = popcount(mask)
  std::uint8_t type = 0;
  std::uint8_t size = 0;
  std::uint8_t color = 0;
  friend bool operator==(const ShapeLayer&, const ShapeLayer&) = default;
};

struct LineLayer {
  std::uint32_t mask = 0;  // bits 0..g-1 horizontal lines, g..2g-1 vertical lines
  std::uint8_t type = 0;   // solid, dashed, dotted
  std::uint8_t color = 0;
  friend bool operator==(const LineLayer&, const LineLayer&) = default;
};

struct PanelSpec {
  ShapeLayer shapes;
  LineLayer lines;
  friend bool operator==(const PanelSpec&, const PanelSpec&) = default;
};

struct GeneratorConfig {
  std::size_t image_size = 32;
  std::size_t grid = 2;  // shape slots per side
  int number_max = 4;
  int size_levels = 3;
  int color_levels = 4;
  int type_count = 3;
  int line_type_count = 3;
  std::size_t triples_per_sample = 1;
  bool distractors = false;
  bool column_wise = false;
  // Legal (object, attribute, relation) combinations; editable config data.
  std::vector<StructureTriple> legal = default_legal_table();
  // Optional restrictions; empty means unrestricted.
  std::vector<ObjectType> objects;
  std::vector<AttributeType> attributes;
  std::vector<RelationType> relations;
  std::uint64_t seed = 0;
  int foil_retry_budget = 4000;

  static std::vector<StructureTriple> default_legal_table();
  // legal filtered by the restrictions.
  std::vector<StructureTriple> candidates() const;
  void validate() const;
};

// Inclusive value range of one (object, attribute); masks exclude 0.
struct AttributeDomain {
  std::uint32_t lo = 0;
  std::uint32_t hi = 0;
  bool is_mask = false;
  std::size_t count() const { return hi - lo + 1; }
};

AttributeDomain attribute_domain(ObjectType object, AttributeType attribute, const GeneratorConfig& cfg);
// Throws kInvalidArgument when the combination cannot be generated.
void check_triple_supported(const StructureTriple& t, const GeneratorConfig& cfg);

// Sample-level relation parameters shared by all three rows.
struct RelationPlan {
  int delta = 0;                                  // progression step
  std::array<std::uint32_t, 3> union_values{};    // consistent_union value set
};

RelationPlan draw_relation_plan(RelationType relation, const AttributeDomain& domain, Rng& rng);
std::uint32_t set_op(RelationType relation, std::uint32_t a, std::uint32_t b);
std::array<std::uint32_t, 3> apply_relation_row(RelationType relation, const AttributeDomain& domain,
                                                const RelationPlan& plan, Rng& rng);

std::vector<StructureTriple> sample_structure(Rng& rng, const GeneratorConfig& cfg);

// Reads / writes the attribute value a triple governs.
std::uint32_t attribute_value(const PanelSpec& p, ObjectType object, AttributeType attribute);

struct GeneratedSample {
  SampleRecord record;
  std::array<PanelSpec, 9> grid;        // cells row-major; cell 8 is the answer
  std::array<PanelSpec, 8> candidates;  // in record order
  bool column_wise = false;
};

GeneratedSample generate_sample(Rng& rng, const GeneratorConfig& cfg);
// Per-sample stream derived from (cfg.seed, index).
GeneratedSample generate_indexed(std::uint64_t index, const GeneratorConfig& cfg);
std::vector<SampleRecord> generate_dataset(std::size_t count, const GeneratorConfig& cfg);

std::uint8_t color_byte(int color, int levels);
std::vector<std::uint8_t> render_panel_bytes(const PanelSpec& spec, const GeneratorConfig& cfg);
// [1, S, S] in [-1, 1].
Tensor<float> render_panel(const PanelSpec& spec, const GeneratorConfig& cfg);

}  // namespace mlrn
