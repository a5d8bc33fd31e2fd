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

#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "error.hpp"
#include "report.hpp"

namespace mlrn {
namespace {

StructureTriple T(const std::string& s) { return StructureTriple::parse(s); }

struct Expected {
  std::string name;
  std::size_t correct, total;
};

TEST(CategoryReport, HandTalliedSixSamples) {
  const std::vector<std::vector<StructureTriple>> triples{
      {T("shape:position:AND")},
      {T("line:color:progression")},
      {T("shape:number:progression"), T("line:type:consistent_union")},
      {T("shape:position:XOR")},
      {T("shape:color:consistent_union")},
      {T("line:position:OR")},
  };
  const std::vector<bool> correct{true, false, true, false, true, true};
  const CategoryReport rep = build_category_report(triples, correct);

  const std::vector<Expected> want{
      {"line", 2, 3},   {"shape", 3, 4},      {"color", 1, 2}, {"position", 2, 3},
      {"type", 1, 1},   {"number", 1, 1},     {"AND", 1, 1},   {"cons_union", 2, 2},
      {"XOR", 0, 1},    {"OR", 1, 1},         {"progression", 1, 2},
  };
  ASSERT_EQ(rep.categories.size(), want.size());
  for (std::size_t i = 0; i < want.size(); ++i) {
    EXPECT_EQ(rep.categories[i].name, want[i].name);
    EXPECT_EQ(rep.categories[i].correct, want[i].correct) << want[i].name;
    EXPECT_EQ(rep.categories[i].total, want[i].total) << want[i].name;
  }
  EXPECT_EQ(rep.find("size"), nullptr);
  ASSERT_TRUE(rep.all_single.has_value());
  EXPECT_EQ(rep.all_single->correct, 3u);
  EXPECT_EQ(rep.all_single->total, 5u);
  EXPECT_EQ(rep.correct, 4u);
  EXPECT_EQ(rep.total, 6u);
  EXPECT_DOUBLE_EQ(rep.total_acc(), 4.0 / 6.0);
  EXPECT_DOUBLE_EQ(rep.total_error(), 1.0 - 4.0 / 6.0);
  EXPECT_TRUE(rep.has_metadata);
}

TEST(CategoryReport, AllCorrect) {
  const std::vector<std::vector<StructureTriple>> triples{{T("shape:size:progression")}, {T("line:color:progression")}};
  const CategoryReport rep = build_category_report(triples, {true, true});
  for (const CategoryRow& r : rep.categories) EXPECT_EQ(r.accuracy(), 1.0);
  EXPECT_EQ(rep.total_error(), 0.0);
}

TEST(CategoryReport, RestrictedRelationOnlyListsPresentRows) {
  const std::vector<std::vector<StructureTriple>> triples{{T("shape:position:XOR")}, {T("line:position:XOR")}};
  const CategoryReport rep = build_category_report(triples, {true, false});
  EXPECT_NE(rep.find("XOR"), nullptr);
  for (const char* absent : {"AND", "OR", "progression", "cons_union", "color", "size"})
    EXPECT_EQ(rep.find(absent), nullptr) << absent;
}

TEST(CategoryReport, MissingMetadataLeavesTotalsOnly) {
  const std::vector<std::vector<StructureTriple>> triples{{T("shape:position:XOR")}, {}};
  const CategoryReport rep = build_category_report(triples, {true, false});
  EXPECT_FALSE(rep.has_metadata);
  EXPECT_TRUE(rep.categories.empty());
  EXPECT_FALSE(rep.all_single.has_value());
  EXPECT_EQ(rep.total_acc(), 0.5);
  EXPECT_EQ(format_report(rep), "Total acc          50.00\nTotal error        50.00\n");
}

TEST(CategoryReport, LengthMismatchRejected) {
  EXPECT_THROW(build_category_report({{T("shape:position:XOR")}}, {true, false}), Error);
}

TEST(CategoryReport, FormattedTable) {
  const std::vector<std::vector<StructureTriple>> triples{
      {T("shape:position:AND")}, {T("shape:position:AND")}, {T("shape:position:AND"), T("line:color:progression")}};
  const std::string text = format_report(build_category_report(triples, {true, false, true}));
  EXPECT_EQ(text,
            "line              100.00\n"
            "shape              66.67\n"
            "color             100.00\n"
            "position           66.67\n"
            "AND                66.67\n"
            "progression       100.00\n"
            "All single acc     50.00\n"
            "Total acc          66.67\n"
            "Total error        33.33\n");
}

TEST(CategoryReport, Names) {
  EXPECT_EQ(category_name(RelationType::kConsistentUnion), "cons_union");
  EXPECT_EQ(category_name(RelationType::kXor), "XOR");
  EXPECT_EQ(category_name(ObjectType::kLine), "line");
  EXPECT_EQ(category_name(AttributeType::kNumber), "number");
}

}  // namespace
}  // namespace mlrn
