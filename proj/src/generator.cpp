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

#include "generator.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "encoding.hpp"
#include "error.hpp"

namespace mlrn {

std::vector<StructureTriple> GeneratorConfig::default_legal_table() {
  using O = ObjectType;
  using A = AttributeType;
  using R = RelationType;
  return {
      {O::kShape, A::kPosition, R::kAnd},       {O::kShape, A::kPosition, R::kOr},
      {O::kShape, A::kPosition, R::kXor},       {O::kShape, A::kNumber, R::kProgression},
      {O::kShape, A::kNumber, R::kConsistentUnion}, {O::kShape, A::kSize, R::kProgression},
      {O::kShape, A::kColor, R::kProgression},  {O::kShape, A::kColor, R::kConsistentUnion},
      {O::kShape, A::kType, R::kConsistentUnion}, {O::kLine, A::kPosition, R::kAnd},
      {O::kLine, A::kPosition, R::kOr},         {O::kLine, A::kPosition, R::kXor},
      {O::kLine, A::kColor, R::kProgression},   {O::kLine, A::kColor, R::kConsistentUnion},
      {O::kLine, A::kType, R::kConsistentUnion},
  };
}

namespace {

template <typename E>
bool allowed(const std::vector<E>& restriction, E v) {
  return restriction.empty() || std::find(restriction.begin(), restriction.end(), v) != restriction.end();
}

bool is_set_relation(RelationType r) {
  return r == RelationType::kAnd || r == RelationType::kOr || r == RelationType::kXor;
}

std::size_t shape_slots(const GeneratorConfig& cfg) { return cfg.grid * cfg.grid; }
std::size_t line_slots(const GeneratorConfig& cfg) { return 2 * cfg.grid; }

int shape_radius(int size, const GeneratorConfig& cfg) {
  const int cell = static_cast<int>(cfg.image_size / cfg.grid);
  const int rmax = cell / 2 - 2;
  return static_cast<int>(std::lround(static_cast<double>(rmax) * (size + 1) / cfg.size_levels));
}

}  // namespace

std::vector<StructureTriple> GeneratorConfig::candidates() const {
  std::vector<StructureTriple> out;
  for (const StructureTriple& t : legal)
    if (allowed(objects, t.object) && allowed(attributes, t.attribute) && allowed(relations, t.relation))
      out.push_back(t);
  return out;
}

AttributeDomain attribute_domain(ObjectType object, AttributeType attribute, const GeneratorConfig& cfg) {
  const bool shape = object == ObjectType::kShape;
  switch (attribute) {
    case AttributeType::kPosition: {
      const std::size_t bits = shape ? shape_slots(cfg) : line_slots(cfg);
      return {1, static_cast<std::uint32_t>((1u << bits) - 1), true};
    }
    case AttributeType::kNumber:
      require(shape, ErrorCode::kInvalidArgument, "lines have no number attribute");
      return {1, static_cast<std::uint32_t>(std::min<std::size_t>(cfg.number_max, shape_slots(cfg))), false};
    case AttributeType::kSize:
      require(shape, ErrorCode::kInvalidArgument, "lines have no size attribute");
      return {0, static_cast<std::uint32_t>(cfg.size_levels - 1), false};
    case AttributeType::kColor: return {0, static_cast<std::uint32_t>(cfg.color_levels - 1), false};
    case AttributeType::kType:
      return {0, static_cast<std::uint32_t>((shape ? cfg.type_count : cfg.line_type_count) - 1), false};
  }
  fail(ErrorCode::kInvalidArgument, "unknown attribute");
}

void check_triple_supported(const StructureTriple& t, const GeneratorConfig& cfg) {
  const bool line = t.object == ObjectType::kLine;
  require(!(line && (t.attribute == AttributeType::kNumber || t.attribute == AttributeType::kSize)),
          ErrorCode::kInvalidArgument, "illegal triple " + t.str() + ": lines carry no number/size");
  if (is_set_relation(t.relation))
    require(t.attribute == AttributeType::kPosition, ErrorCode::kInvalidArgument,
            "illegal triple " + t.str() + ": set relations apply to position only");
  else
    require(t.attribute != AttributeType::kPosition, ErrorCode::kInvalidArgument,
            "illegal triple " + t.str() + ": position takes set relations only");
  if (t.relation == RelationType::kProgression)
    require(t.attribute != AttributeType::kType, ErrorCode::kInvalidArgument,
            "illegal triple " + t.str() + ": type values are unordered");
  const AttributeDomain d = attribute_domain(t.object, t.attribute, cfg);
  if (t.relation == RelationType::kProgression || t.relation == RelationType::kConsistentUnion)
    require(d.count() >= 3, ErrorCode::kInvalidArgument,
            "triple " + t.str() + " needs at least 3 attribute values, domain has " + std::to_string(d.count()));
}

void GeneratorConfig::validate() const {
  require(grid >= 1 && grid <= 4, ErrorCode::kInvalidArgument, "generator grid must be 1..4");
  require(image_size % grid == 0, ErrorCode::kInvalidArgument, "image_size must be a multiple of grid");
  require(number_max >= 1 && size_levels >= 1 && color_levels >= 2, ErrorCode::kInvalidArgument,
          "attribute value counts too small");
  require(type_count >= 1 && type_count <= 4, ErrorCode::kInvalidArgument, "type_count must be 1..4");
  require(line_type_count >= 1 && line_type_count <= 3, ErrorCode::kInvalidArgument, "line_type_count must be 1..3");
  const int cell = static_cast<int>(image_size / grid);
  require(cell / 2 - 2 >= size_levels, ErrorCode::kInvalidArgument,
          "image_size too small to draw " + std::to_string(size_levels) + " distinct glyph sizes");
  for (int s = 1; s < size_levels; ++s)
    require(shape_radius(s, *this) > shape_radius(s - 1, *this), ErrorCode::kInvalidArgument,
            "glyph sizes collide at this image_size");
  require(triples_per_sample >= 1, ErrorCode::kInvalidArgument, "triples_per_sample must be >= 1");
  require(foil_retry_budget >= 7, ErrorCode::kInvalidArgument, "foil retry budget too small");
  for (const StructureTriple& t : legal) check_triple_supported(t, *this);
  require(!candidates().empty(), ErrorCode::kInvalidArgument, "no legal triple survives the configured restrictions");
}

// ---------------------------------------------------------------------------
// relations

std::uint32_t set_op(RelationType relation, std::uint32_t a, std::uint32_t b) {
  switch (relation) {
    case RelationType::kAnd: return a & b;
    case RelationType::kOr: return a | b;
    case RelationType::kXor: return a ^ b;
    default: fail(ErrorCode::kInvalidArgument, "set_op needs AND, OR or XOR");
  }
}

RelationPlan draw_relation_plan(RelationType relation, const AttributeDomain& domain, Rng& rng) {
  RelationPlan plan;
  if (relation == RelationType::kProgression) {
    require(domain.count() >= 3, ErrorCode::kDomain, "progression needs at least 3 ordered values");
    const int max_step = static_cast<int>((domain.count() - 1) / 2);
    int step = rng.range(1, max_step);
    plan.delta = rng.coin() ? step : -step;
  } else if (relation == RelationType::kConsistentUnion) {
    require(domain.count() >= 3, ErrorCode::kDomain, "consistent_union needs at least 3 values");
    std::vector<std::uint32_t> values;
    for (std::uint32_t v = domain.lo; v <= domain.hi; ++v) values.push_back(v);
    rng.shuffle(values);
    plan.union_values = {values[0], values[1], values[2]};
  }
  return plan;
}

std::array<std::uint32_t, 3> apply_relation_row(RelationType relation, const AttributeDomain& domain,
                                                const RelationPlan& plan, Rng& rng) {
  switch (relation) {
    case RelationType::kProgression: {
      require(plan.delta != 0, ErrorCode::kDomain, "progression step must be non-zero");
      const long span = 2L * std::abs(plan.delta);
      require(static_cast<long>(domain.count()) > span, ErrorCode::kDomain, "progression step too large for domain");
      const long lo = plan.delta > 0 ? domain.lo : domain.lo + span;
      const long hi = plan.delta > 0 ? domain.hi - span : domain.hi;
      const long a = lo + static_cast<long>(rng.below(static_cast<std::uint64_t>(hi - lo + 1)));
      return {static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a + plan.delta),
              static_cast<std::uint32_t>(a + 2 * plan.delta)};
    }
    case RelationType::kConsistentUnion: {
      std::vector<std::uint32_t> v(plan.union_values.begin(), plan.union_values.end());
      rng.shuffle(v);
      return {v[0], v[1], v[2]};
    }
    default: {
      require(domain.is_mask, ErrorCode::kDomain, "set relations need a position domain");
      require(domain.count() >= 3, ErrorCode::kDomain, "position domain too small");
      for (int attempt = 0; attempt < 10000; ++attempt) {
        const auto a = static_cast<std::uint32_t>(domain.lo + rng.below(domain.count()));
        const auto b = static_cast<std::uint32_t>(domain.lo + rng.below(domain.count()));
        const std::uint32_t c = set_op(relation, a, b);
        if (c != 0) return {a, b, c};
      }
      fail(ErrorCode::kDomain, "could not draw a non-empty set-relation row");
    }
  }
}

std::vector<StructureTriple> sample_structure(Rng& rng, const GeneratorConfig& cfg) {
  std::vector<StructureTriple> pool = cfg.candidates();
  require(!pool.empty(), ErrorCode::kInvalidArgument, "no legal triple under the generator config");
  std::vector<StructureTriple> out;
  while (out.size() < cfg.triples_per_sample) {
    std::vector<StructureTriple> compatible;
    for (const StructureTriple& t : pool) {
      bool ok = true;
      for (const StructureTriple& u : out) {
        if (t.object != u.object) continue;
        if (t.attribute == u.attribute) ok = false;
        const bool coupled = (t.attribute == AttributeType::kPosition && u.attribute == AttributeType::kNumber) ||
                             (t.attribute == AttributeType::kNumber && u.attribute == AttributeType::kPosition);
        if (coupled) ok = false;
      }
      if (ok) compatible.push_back(t);
    }
    require(!compatible.empty(), ErrorCode::kInvalidArgument,
            "cannot draw " + std::to_string(cfg.triples_per_sample) + " compatible triples from the legal set");
    out.push_back(compatible[rng.below(compatible.size())]);
  }
  return out;
}

std::uint32_t attribute_value(const PanelSpec& p, ObjectType object, AttributeType attribute) {
  if (object == ObjectType::kShape) {
    switch (attribute) {
      case AttributeType::kPosition: return p.shapes.mask;
      case AttributeType::kNumber: return static_cast<std::uint32_t>(std::popcount(p.shapes.mask));
      case AttributeType::kType: return p.shapes.type;
      case AttributeType::kSize: return p.shapes.size;
      case AttributeType::kColor: return p.shapes.color;
    }
  }
  switch (attribute) {
    case AttributeType::kPosition: return p.lines.mask;
    case AttributeType::kType: return p.lines.type;
    case AttributeType::kColor: return p.lines.color;
    default: fail(ErrorCode::kInvalidArgument, "lines have no " + to_string(attribute) + " attribute");
  }
}

// ---------------------------------------------------------------------------
// sample construction

namespace {

std::uint32_t random_mask(std::size_t bits, Rng& rng) {
  return static_cast<std::uint32_t>(1 + rng.below((1u << bits) - 1));
}

std::uint32_t random_mask_with_count(std::size_t bits, std::uint32_t count, Rng& rng) {
  std::vector<std::uint32_t> slots(bits);
  for (std::size_t i = 0; i < bits; ++i) slots[i] = static_cast<std::uint32_t>(i);
  rng.shuffle(slots);
  std::uint32_t m = 0;
  for (std::uint32_t i = 0; i < count; ++i) m |= 1u << slots[i];
  return m;
}

std::uint32_t canonical_mask(std::uint32_t count) { return (1u << count) - 1; }

struct Builder {
  const GeneratorConfig& cfg;
  Rng& rng;

  ShapeLayer random_shapes() {
    ShapeLayer s;
    s.mask = random_mask(shape_slots(cfg), rng);
    s.type = static_cast<std::uint8_t>(rng.below(cfg.type_count));
    s.size = static_cast<std::uint8_t>(rng.below(cfg.size_levels));
    s.color = static_cast<std::uint8_t>(rng.below(cfg.color_levels));
    return s;
  }

  LineLayer random_lines() {
    LineLayer l;
    l.mask = random_mask(line_slots(cfg), rng);
    l.type = static_cast<std::uint8_t>(rng.below(cfg.line_type_count));
    l.color = static_cast<std::uint8_t>(rng.below(cfg.color_levels));
    return l;
  }

  void set_value(PanelSpec& p, ObjectType object, AttributeType attribute, std::uint32_t value) {
    const auto b = static_cast<std::uint8_t>(value);
    if (object == ObjectType::kShape) {
      switch (attribute) {
        case AttributeType::kPosition: p.shapes.mask = value; break;
        case AttributeType::kNumber:
          p.shapes.mask = cfg.distractors ? random_mask_with_count(shape_slots(cfg), value, rng) : canonical_mask(value);
          break;
        case AttributeType::kType: p.shapes.type = b; break;
        case AttributeType::kSize: p.shapes.size = b; break;
        case AttributeType::kColor: p.shapes.color = b; break;
      }
      return;
    }
    switch (attribute) {
      case AttributeType::kPosition: p.lines.mask = value; break;
      case AttributeType::kType: p.lines.type = b; break;
      case AttributeType::kColor: p.lines.color = b; break;
      default: fail(ErrorCode::kInvalidArgument, "lines have no " + to_string(attribute) + " attribute");
    }
  }

  // Attributes of `object` not governed by any triple, as redrawable knobs.
  std::vector<AttributeType> free_attributes(ObjectType object, const std::vector<StructureTriple>& triples) {
    auto governed = [&](AttributeType a) {
      return std::any_of(triples.begin(), triples.end(),
                         [&](const StructureTriple& t) { return t.object == object && t.attribute == a; });
    };
    std::vector<AttributeType> out;
    if (object == ObjectType::kShape) {
      const bool pos = governed(AttributeType::kPosition);
      const bool num = governed(AttributeType::kNumber);
      if (!pos) out.push_back(num ? AttributeType::kNumber : AttributeType::kPosition);
      for (AttributeType a : {AttributeType::kType, AttributeType::kSize, AttributeType::kColor})
        if (!governed(a)) out.push_back(a);
    } else {
      for (AttributeType a : {AttributeType::kPosition, AttributeType::kType, AttributeType::kColor})
        if (!governed(a)) out.push_back(a);
    }
    return out;
  }

  // Redraws one free attribute. For a governed number, "number" here means
  // re-arranging the same count of shapes.
  void redraw_free(PanelSpec& p, ObjectType object, AttributeType a, const std::vector<StructureTriple>& triples) {
    const bool number_governed = std::any_of(triples.begin(), triples.end(), [&](const StructureTriple& t) {
      return t.object == object && t.attribute == AttributeType::kNumber;
    });
    if (object == ObjectType::kShape && a == AttributeType::kNumber && number_governed) {
      p.shapes.mask = random_mask_with_count(shape_slots(cfg), static_cast<std::uint32_t>(std::popcount(p.shapes.mask)), rng);
      return;
    }
    if (object == ObjectType::kShape && a == AttributeType::kPosition) {
      p.shapes.mask = random_mask(shape_slots(cfg), rng);
      return;
    }
    const AttributeDomain d = attribute_domain(object, a, cfg);
    set_value(p, object, a, static_cast<std::uint32_t>(d.lo + rng.below(d.count())));
  }
};

bool involves(const std::vector<StructureTriple>& triples, ObjectType o) {
  return std::any_of(triples.begin(), triples.end(), [&](const StructureTriple& t) { return t.object == o; });
}

}  // namespace

GeneratedSample generate_sample(Rng& rng, const GeneratorConfig& cfg) {
  Builder b{cfg, rng};
  GeneratedSample out;
  out.column_wise = cfg.column_wise;
  const std::vector<StructureTriple> triples = sample_structure(rng, cfg);
  const bool use_shapes = involves(triples, ObjectType::kShape);
  const bool use_lines = involves(triples, ObjectType::kLine);

  // Constant layers for distractor-free samples.
  const ShapeLayer base_shapes = b.random_shapes();
  const LineLayer base_lines = b.random_lines();
  for (PanelSpec& cell : out.grid) {
    if (use_shapes) {
      cell.shapes = cfg.distractors ? b.random_shapes() : base_shapes;
    } else if (cfg.distractors && rng.coin()) {
      cell.shapes = b.random_shapes();
    }
    if (use_lines) {
      cell.lines = cfg.distractors ? b.random_lines() : base_lines;
    } else if (cfg.distractors && rng.coin()) {
      cell.lines = b.random_lines();
    }
  }

  for (const StructureTriple& t : triples) {
    const AttributeDomain domain = attribute_domain(t.object, t.attribute, cfg);
    const RelationPlan plan = draw_relation_plan(t.relation, domain, rng);
    for (std::size_t line = 0; line < 3; ++line) {
      const auto values = apply_relation_row(t.relation, domain, plan, rng);
      for (std::size_t k = 0; k < 3; ++k) {
        const std::size_t cell = cfg.column_wise ? k * 3 + line : line * 3 + k;
        b.set_value(out.grid[cell], t.object, t.attribute, values[k]);
      }
    }
  }

  const PanelSpec& answer = out.grid[8];
  const std::vector<std::uint8_t> answer_image = render_panel_bytes(answer, cfg);
  std::vector<PanelSpec> options{answer};
  std::vector<std::vector<std::uint8_t>> images{answer_image};
  int attempts = 0;
  while (options.size() < kCandidates) {
    require(attempts++ < cfg.foil_retry_budget, ErrorCode::kDomain,
            "foil generation exhausted its retry budget; attribute domains too small");
    const StructureTriple& t = triples[rng.below(triples.size())];
    const AttributeDomain domain = attribute_domain(t.object, t.attribute, cfg);
    const std::uint32_t correct = attribute_value(answer, t.object, t.attribute);
    PanelSpec foil = answer;
    std::uint32_t wrong = correct;
    while (wrong == correct) wrong = static_cast<std::uint32_t>(domain.lo + rng.below(domain.count()));
    b.set_value(foil, t.object, t.attribute, wrong);
    // Once the pure perturbations are used up, vary one free attribute too.
    if (attempts > 16) {
      const auto knobs = b.free_attributes(t.object, triples);
      if (!knobs.empty()) b.redraw_free(foil, t.object, knobs[rng.below(knobs.size())], triples);
    }
    std::vector<std::uint8_t> img = render_panel_bytes(foil, cfg);
    if (std::find(images.begin(), images.end(), img) != images.end()) continue;
    options.push_back(foil);
    images.push_back(std::move(img));
  }

  std::vector<std::size_t> order(kCandidates);
  for (std::size_t i = 0; i < kCandidates; ++i) order[i] = i;
  rng.shuffle(order);

  SampleRecord& rec = out.record;
  rec.image_size = cfg.image_size;
  rec.triples = triples;
  const std::size_t plane = cfg.image_size * cfg.image_size;
  rec.panels.resize(kPanelsPerSample * plane);
  for (std::size_t c = 0; c < kContextPanels; ++c) {
    const auto img = render_panel_bytes(out.grid[c], cfg);
    std::copy(img.begin(), img.end(), rec.panels.begin() + static_cast<std::ptrdiff_t>(c * plane));
  }
  for (std::size_t k = 0; k < kCandidates; ++k) {
    out.candidates[k] = options[order[k]];
    if (order[k] == 0) rec.target = static_cast<std::uint8_t>(k);
    const auto& img = images[order[k]];
    std::copy(img.begin(), img.end(), rec.panels.begin() + static_cast<std::ptrdiff_t>((kContextPanels + k) * plane));
  }
  return out;
}

GeneratedSample generate_indexed(std::uint64_t index, const GeneratorConfig& cfg) {
  Rng rng = Rng::derive(cfg.seed, index);
  return generate_sample(rng, cfg);
}

std::vector<SampleRecord> generate_dataset(std::size_t count, const GeneratorConfig& cfg) {
  cfg.validate();
  std::vector<SampleRecord> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(generate_indexed(i, cfg).record);
  return out;
}

// ---------------------------------------------------------------------------
// rendering

std::uint8_t color_byte(int color, int levels) {
  if (levels <= 1) return 255;
  return static_cast<std::uint8_t>(96 + std::lround(159.0 * color / (levels - 1)));
}

std::vector<std::uint8_t> render_panel_bytes(const PanelSpec& spec, const GeneratorConfig& cfg) {
  const int s = static_cast<int>(cfg.image_size);
  const int g = static_cast<int>(cfg.grid);
  const int cell = s / g;
  std::vector<std::uint8_t> img(static_cast<std::size_t>(s) * s, 0);
  auto put = [&](int y, int x, std::uint8_t v) {
    if (y >= 0 && y < s && x >= 0 && x < s) img[static_cast<std::size_t>(y) * s + x] = v;
  };
  auto styled = [&](int t) {
    switch (spec.lines.type) {
      case 1: return t % 6 < 4;
      case 2: return t % 2 == 0;
      default: return true;
    }
  };
  if (spec.lines.mask) {
    const std::uint8_t v = color_byte(spec.lines.color, cfg.color_levels);
    for (int k = 0; k < g; ++k) {
      if (spec.lines.mask & (1u << k))
        for (int x = 0; x < s; ++x)
          if (styled(x)) put(k * cell, x, v);
      if (spec.lines.mask & (1u << (g + k)))
        for (int y = 0; y < s; ++y)
          if (styled(y)) put(y, k * cell, v);
    }
  }
  if (spec.shapes.mask) {
    const std::uint8_t v = color_byte(spec.shapes.color, cfg.color_levels);
    const int r = shape_radius(spec.shapes.size, cfg);
    for (int slot = 0; slot < g * g; ++slot) {
      if (!(spec.shapes.mask & (1u << slot))) continue;
      const int cy = (slot / g) * cell + cell / 2;
      const int cx = (slot % g) * cell + cell / 2;
      for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx) {
          bool on = false;
          switch (spec.shapes.type) {
            case 0: on = true; break;                                  // square
            case 1: on = dx * dx + dy * dy <= r * r + r; break;        // circle
            case 2: on = 2 * std::abs(dx) <= dy + r; break;            // triangle
            default: on = std::abs(dx) + std::abs(dy) <= r; break;     // diamond
          }
          if (on) put(cy + dy, cx + dx, v);
        }
    }
  }
  return img;
}

Tensor<float> render_panel(const PanelSpec& spec, const GeneratorConfig& cfg) {
  const auto bytes = render_panel_bytes(spec, cfg);
  Tensor<float> out({1, cfg.image_size, cfg.image_size});
  for (std::size_t i = 0; i < bytes.size(); ++i) out[i] = static_cast<float>(byte_to_unit(bytes[i]));
  return out;
}

}  // namespace mlrn
