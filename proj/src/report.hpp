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
#include <optional>
#include <string>
#include <vector>

#include "record.hpp"

namespace mlrn {

struct CategoryRow {
  std::string name;
  std::size_t correct = 0;
  std::size_t total = 0;
  double accuracy() const { return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0; }
};

// Rows follow the fixed order line, shape, color, position, type, number,
// size, AND, cons_union, XOR, OR, progression; empty categories are left out.
struct CategoryReport {
  std::vector<CategoryRow> categories;
  std::optional<CategoryRow> all_single;
  std::size_t correct = 0;
  std::size_t total = 0;
  bool has_metadata = false;

  double total_acc() const { return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0; }
  double total_error() const { return 1.0 - total_acc(); }
  const CategoryRow* find(const std::string& name) const;
  friend bool operator==(const CategoryReport& a, const CategoryReport& b);
};

// A sample counts toward every category named by any of its triples, once.
// Without triples on every sample only the totals are filled in.
CategoryReport build_category_report(const std::vector<std::vector<StructureTriple>>& triples,
                                     const std::vector<bool>& correct);

std::string category_name(ObjectType v);
std::string category_name(AttributeType v);
std::string category_name(RelationType v);

// Two-column text table, accuracies as percentages with two decimals.
std::string format_report(const CategoryReport& report);

}  // namespace mlrn
