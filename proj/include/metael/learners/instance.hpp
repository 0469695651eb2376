// Copyright 2026 The MetaEL Authors.
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
#include <set>
#include <span>
#include <string>
#include <vector>

#include "metael/error.hpp"

namespace metael {

struct BinaryInstance {
  std::vector<double> x;
  bool y = false;
};

struct MultiLabelInstance {
  std::vector<double> x;
  std::set<std::string> labels;
};

namespace detail {

// Returns the common feature dimension; rejects empty or ragged data.
template <typename Instance>
std::size_t check_dimensions(std::span<const Instance> data) {
  if (data.empty()) throw ValidationError("cannot train on an empty data set");
  const std::size_t dim = data.front().x.size();
  for (const auto& inst : data) {
    if (inst.x.size() != dim) throw ValidationError("inconsistent feature vector lengths in training data");
  }
  return dim;
}

}  // namespace detail

}  // namespace metael
