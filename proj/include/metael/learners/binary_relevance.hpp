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
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "metael/error.hpp"
#include "metael/learners/forest.hpp"
#include "metael/learners/instance.hpp"
#include "metael/rng.hpp"

namespace metael {

// One forest per label, trained on the decomposed binary problems.
struct BinaryRelevanceModel {
  std::vector<std::string> label_order;
  std::vector<DecisionForestModel> per_label;

  std::size_t feature_dim() const { return per_label.empty() ? 0 : per_label.front().feature_dim; }

  friend bool operator==(const BinaryRelevanceModel&, const BinaryRelevanceModel&) = default;
};

// Seed of the forest for label k. Exposed so that a standalone forest can be
// trained on the same decomposed problem.
inline std::uint64_t label_seed(std::uint64_t seed, std::size_t label_index) {
  return derive_seed(seed, static_cast<std::uint64_t>(label_index) + 0x4c4142454cULL);
}

inline std::vector<BinaryInstance> decompose(std::span<const MultiLabelInstance> data, const std::string& label) {
  std::vector<BinaryInstance> out;
  out.reserve(data.size());
  for (const auto& inst : data) out.push_back({inst.x, inst.labels.count(label) > 0});
  return out;
}

inline BinaryRelevanceModel train_binary_relevance(std::span<const MultiLabelInstance> data,
                                                   std::span<const std::string> labels,
                                                   const ForestParams& params) {
  if (labels.empty()) throw ValidationError("binary relevance needs at least one label");
  detail::check_dimensions<MultiLabelInstance>(data);
  if (std::set<std::string>(labels.begin(), labels.end()).size() != labels.size()) {
    throw ValidationError("binary relevance: duplicate label");
  }
  BinaryRelevanceModel model;
  model.label_order.assign(labels.begin(), labels.end());
  for (std::size_t k = 0; k < labels.size(); ++k) {
    ForestParams p = params;
    p.seed = label_seed(params.seed, k);
    const auto binary = decompose(data, labels[k]);
    model.per_label.push_back(train_forest(binary, p));
  }
  return model;
}

// Per-label confidences without any thresholding.
inline std::map<std::string, double> predict_label_confidences(const BinaryRelevanceModel& model,
                                                               std::span<const double> x) {
  std::map<std::string, double> out;
  for (std::size_t k = 0; k < model.label_order.size(); ++k) {
    out[model.label_order[k]] = predict_confidence(model.per_label[k], x);
  }
  return out;
}

inline nlohmann::json to_json(const BinaryRelevanceModel& m) {
  nlohmann::json per = nlohmann::json::array();
  for (const auto& f : m.per_label) per.push_back(to_json(f));
  return {{"label_order", m.label_order}, {"per_label", std::move(per)}};
}

inline BinaryRelevanceModel binary_relevance_from_json(const nlohmann::json& j) {
  BinaryRelevanceModel m;
  m.label_order = j.at("label_order").get<std::vector<std::string>>();
  for (const auto& f : j.at("per_label")) m.per_label.push_back(forest_from_json(f));
  if (m.per_label.size() != m.label_order.size()) {
    throw ValidationError("model file: label count does not match forest count");
  }
  for (const auto& f : m.per_label) {
    if (f.feature_dim != m.feature_dim()) throw ValidationError("model file: forests disagree on dimension");
  }
  return m;
}

}  // namespace metael
