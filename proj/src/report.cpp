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

#include "report.hpp"

#include <algorithm>
#include <cstdio>

#include "error.hpp"

namespace mlrn {

std::string category_name(ObjectType v) { return to_string(v); }
std::string category_name(AttributeType v) { return to_string(v); }
std::string category_name(RelationType v) {
  return v == RelationType::kConsistentUnion ? "cons_union" : to_string(v);
}

const CategoryRow* CategoryReport::find(const std::string& name) const {
  for (const CategoryRow& r : categories)
    if (r.name == name) return &r;
  return nullptr;
}

bool operator==(const CategoryReport& a, const CategoryReport& b) {
  auto same = [](const CategoryRow& x, const CategoryRow& y) {
    return x.name == y.name && x.correct == y.correct && x.total == y.total;
  };
  if (a.correct != b.correct || a.total != b.total || a.has_metadata != b.has_metadata) return false;
  if (a.all_single.has_value() != b.all_single.has_value()) return false;
  if (a.all_single && !same(*a.all_single, *b.all_single)) return false;
  return std::equal(a.categories.begin(), a.categories.end(), b.categories.begin(), b.categories.end(), same);
}

namespace {

struct Category {
  std::string name;
  bool (*match)(const StructureTriple&, int);
  int code;
};

std::vector<Category> table_order() {
  auto obj = [](const StructureTriple& t, int c) { return static_cast<int>(t.object) == c; };
  auto attr = [](const StructureTriple& t, int c) { return static_cast<int>(t.attribute) == c; };
  auto rel = [](const StructureTriple& t, int c) { return static_cast<int>(t.relation) == c; };
  std::vector<Category> out;
  for (ObjectType o : {ObjectType::kLine, ObjectType::kShape}) out.push_back({category_name(o), obj, static_cast<int>(o)});
  for (AttributeType a : {AttributeType::kColor, AttributeType::kPosition, AttributeType::kType, AttributeType::kNumber,
                          AttributeType::kSize})
    out.push_back({category_name(a), attr, static_cast<int>(a)});
  for (RelationType r : {RelationType::kAnd, RelationType::kConsistentUnion, RelationType::kXor, RelationType::kOr,
                         RelationType::kProgression})
    out.push_back({category_name(r), rel, static_cast<int>(r)});
  return out;
}

}  // namespace

CategoryReport build_category_report(const std::vector<std::vector<StructureTriple>>& triples,
                                     const std::vector<bool>& correct) {
  require(triples.size() == correct.size(), ErrorCode::kShapeMismatch,
          "category report needs one triple list per prediction");
  CategoryReport rep;
  rep.total = correct.size();
  rep.correct = static_cast<std::size_t>(std::count(correct.begin(), correct.end(), true));
  rep.has_metadata = !triples.empty() && std::all_of(triples.begin(), triples.end(), [](const auto& t) { return !t.empty(); });
  if (!rep.has_metadata) return rep;

  CategoryRow single{"All single acc"};
  for (const Category& c : table_order()) {
    CategoryRow row{c.name};
    for (std::size_t i = 0; i < triples.size(); ++i) {
      const bool hit = std::any_of(triples[i].begin(), triples[i].end(),
                                   [&](const StructureTriple& t) { return c.match(t, c.code); });
      if (!hit) continue;
      ++row.total;
      row.correct += correct[i] ? 1 : 0;
    }
    if (row.total) rep.categories.push_back(row);
  }
  for (std::size_t i = 0; i < triples.size(); ++i) {
    if (triples[i].size() != 1) continue;
    ++single.total;
    single.correct += correct[i] ? 1 : 0;
  }
  if (single.total) rep.all_single = single;
  return rep;
}

std::string format_report(const CategoryReport& report) {
  std::string out;
  char buf[96];
  auto line = [&](const std::string& name, double value) {
    std::snprintf(buf, sizeof buf, "%-16s %7.2f\n", name.c_str(), 100.0 * value);
    out += buf;
  };
  for (const CategoryRow& r : report.categories) line(r.name, r.accuracy());
  if (report.all_single) line(report.all_single->name, report.all_single->accuracy());
  line("Total acc", report.total_acc());
  line("Total error", report.total_error());
  return out;
}

}  // namespace mlrn
