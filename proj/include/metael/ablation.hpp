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
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "metael/evaluation.hpp"
#include "metael/features.hpp"
#include "metael/pipeline.hpp"

namespace metael {

struct AblationMask {
  std::string name;
  FeatureMask mask;
};

struct AblationRow {
  std::string name;
  FeatureMask mask;
  PrfScore score;
};

// The 17 feature combinations: all features; each category alone; each pair
// of categories; all features except one, for each of the ten features.
inline std::vector<AblationMask> standard_ablation_masks() {
  const auto s = FeatureMask::surface();
  const auto m = FeatureMask::mention();
  const auto d = FeatureMask::document();
  std::vector<AblationMask> out = {
      {"All features", FeatureMask::all()},
      {"Only surface form-based", s},
      {"Only mention-based", m},
      {"Only document-based", d},
      {"Surface form-based + mention-based", s | m},
      {"Surface form-based + document-based", s | d},
      {"Mention-based + document-based", m | d},
  };
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    out.push_back({"All features except " + std::string(kFeatureNames[i]),
                   FeatureMask::all().without(static_cast<Feature>(i))});
  }
  return out;
}

// Everything an ablation needs: aligned training and test data.
struct AblationData {
  const Corpus& train_corpus;
  std::span<const MentionGroup> train_groups;
  const Corpus& test_corpus;
  std::span<const MentionGroup> test_groups;
  const GroundTruth& test_gt;
};

// Retrains the LOOSE pipeline once per mask with the same seeds and scores
// it on the test data.
inline std::vector<AblationRow> ablation_run(const AblationData& data, std::span<const std::string> systems,
                                             const CandidateDictionary& cand, const MetaElParams& params,
                                             std::span<const AblationMask> masks) {
  const CorpusIndex test_index(data.test_corpus, data.test_groups);
  const AnnotationContext ctx{test_index, cand};
  std::vector<AblationRow> rows;
  for (const auto& m : masks) {
    if (m.mask.empty()) throw ValidationError("ablation mask '" + m.name + "' selects no features");
    MetaElParams p = params;
    p.config.mask = m.mask;
    p.train_binary = false;
    const auto model = train_metael(data.train_corpus, data.train_groups, systems, cand, p);
    const auto out = annotate_loose(model, data.test_groups, ctx);
    rows.push_back({m.name, m.mask, el_prf(out, data.test_gt, params.config.mode)});
  }
  return rows;
}

inline std::vector<ScoreRow> to_score_rows(std::span<const AblationRow> rows) {
  std::vector<ScoreRow> out;
  for (const auto& r : rows) out.push_back({r.name, r.score});
  return out;
}

inline nlohmann::json to_json(std::span<const AblationRow> rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows) {
    out.push_back({{"name", r.name}, {"features", r.mask.names()}, {"score", to_json(r.score)}});
  }
  return out;
}

}  // namespace metael
