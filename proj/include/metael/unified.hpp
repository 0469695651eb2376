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

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "metael/corpus.hpp"

namespace metael {

// Decision paths recorded in provenance.
namespace path {
inline constexpr std::string_view kAgreement = "agreement";
inline constexpr std::string_view kPredicted = "predicted";
inline constexpr std::string_view kSingleSystem = "single-system";
inline constexpr std::string_view kBinaryAccepted = "binary-accepted";
}  // namespace path

struct UnifiedAnnotation {
  EntityAnnotation annotation;
  std::string system;  // system whose entity was emitted
  std::string path;    // decision path or baseline policy name

  friend bool operator==(const UnifiedAnnotation&, const UnifiedAnnotation&) = default;
};

// Output of a combination strategy: at most one annotation per mention.
struct UnifiedAnnotationSet {
  std::vector<UnifiedAnnotation> annotations;

  std::vector<EntityAnnotation> plain() const {
    std::vector<EntityAnnotation> out;
    out.reserve(annotations.size());
    for (const auto& u : annotations) out.push_back(u.annotation);
    return out;
  }

  std::size_t size() const { return annotations.size(); }

  friend bool operator==(const UnifiedAnnotationSet&, const UnifiedAnnotationSet&) = default;
};

inline nlohmann::json to_json(const UnifiedAnnotation& u) {
  nlohmann::json j = to_json(u.annotation);
  j["system"] = u.system;
  j["path"] = u.path;
  return j;
}

inline void write_unified(std::ostream& out, const UnifiedAnnotationSet& set) {
  for (const auto& u : set.annotations) out << to_json(u).dump() << '\n';
}

}  // namespace metael
