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

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "metael/alignment.hpp"
#include "metael/corpus.hpp"
#include "metael/error.hpp"
#include "metael/evaluation.hpp"
#include "metael/features.hpp"
#include "metael/learners.hpp"
#include "metael/unified.hpp"

namespace metael {

inline constexpr int kModelFormatVersion = 1;

struct MetaElConfig {
  AlignmentMode mode = AlignmentMode::kStrong;
  FeatureMask mask = FeatureMask::all();
  // Emit the consensus entity without consulting the classifier when every
  // recogniser agrees.
  bool short_circuit_unanimous = true;
  // Keep multi-recogniser groups where no system is correct as all-negative
  // training instances.
  bool include_empty_label_sets = true;
};

struct MetaElParams {
  ForestParams forest;
  MarginParams margin;
  MetaElConfig config;
  bool train_binary = true;  // STRICT classifiers; LOOSE does not need them
};

struct MetaElModel {
  BinaryRelevanceModel br;
  std::map<std::string, MarginModel> per_system_binary;
  std::set<std::string> constant_accept;  // systems whose binary model is the fallback
  SystemTrainingStats stats;
  std::vector<std::string> systems;
  MetaElConfig config;
  MetaElParams params;
};

// Everything needed to turn a group into a numeric feature vector.
class Featurizer {
 public:
  Featurizer(const CorpusIndex& index, const CandidateDictionary& cand, const SystemTrainingStats& stats,
             std::span<const std::string> systems, FeatureMask mask)
      : index_(&index), cand_(&cand), stats_(&stats), systems_(systems.begin(), systems.end()), mask_(mask) {}

  FeatureVector features(const MentionGroup& g) const {
    return extract_features(g, *index_, *cand_, *stats_, systems_);
  }

  std::vector<double> operator()(const MentionGroup& g) const { return vectorize(features(g), systems_, mask_); }

 private:
  const CorpusIndex* index_;
  const CandidateDictionary* cand_;
  const SystemTrainingStats* stats_;
  std::vector<std::string> systems_;
  FeatureMask mask_;
};

// ---------------------------------------------------------------------------
// Labelling
// ---------------------------------------------------------------------------

// Systems that gave the gold entity for a group.
inline LabelSet correct_systems(const MentionGroup& g) {
  LabelSet out;
  if (!g.gold) return out;
  for (const auto& [sys, e] : g.per_system) {
    if (e == *g.gold) out.insert(sys);
  }
  return out;
}

// One instance per gold-bearing group with at least two recognisers.
inline std::vector<MultiLabelInstance> label_multilabel_instances(std::span<const MentionGroup> groups,
                                                                  const Featurizer& fz,
                                                                  bool include_empty = true) {
  std::vector<MultiLabelInstance> out;
  for (const auto& g : groups) {
    if (!g.gold || g.recognisers() < 2) continue;
    LabelSet labels = correct_systems(g);
    if (labels.empty() && !include_empty) continue;
    out.push_back({fz(g), std::move(labels)});
  }
  return out;
}

// One instance per gold-bearing group the system recognised.
inline std::vector<BinaryInstance> label_binary_instances(std::span<const MentionGroup> groups,
                                                          const std::string& system, const Featurizer& fz) {
  std::vector<BinaryInstance> out;
  for (const auto& g : groups) {
    if (!g.gold || g.entity_of(system) == nullptr) continue;
    out.push_back({fz(g), g.system_correct(system)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

// Trains the multi-label selector and the per-system binary classifiers on
// the aligned training groups (gold-less groups only contribute to corpus
// statistics and overall precision).
inline MetaElModel train_metael(const Corpus& corpus, std::span<const MentionGroup> groups,
                                std::span<const std::string> systems, const CandidateDictionary& cand,
                                const MetaElParams& params) {
  if (systems.empty()) throw ValidationError("train_metael: empty systems list");
  if (groups.empty()) throw ValidationError("train_metael: empty training data");
  MetaElModel model;
  model.systems.assign(systems.begin(), systems.end());
  model.config = params.config;
  model.params = params;
  model.stats = build_training_stats(groups, systems);

  const CorpusIndex index(corpus, groups);
  const Featurizer fz(index, cand, model.stats, systems, params.config.mask);

  const auto ml = label_multilabel_instances(groups, fz, params.config.include_empty_label_sets);
  if (ml.empty()) {
    throw ValidationError("train_metael: no gold mention is recognised by two or more systems");
  }
  model.br = train_binary_relevance(ml, systems, params.forest);

  if (params.train_binary) {
    const std::size_t dim = vector_length(systems.size(), params.config.mask);
    for (std::size_t k = 0; k < systems.size(); ++k) {
      const auto data = label_binary_instances(groups, systems[k], fz);
      std::size_t pos = 0;
      for (const auto& d : data) pos += d.y ? 1 : 0;
      if (data.empty() || pos == 0 || pos == data.size()) {
        model.per_system_binary[systems[k]] = MarginModel::constant_accept(dim);
        model.constant_accept.insert(systems[k]);
        continue;
      }
      MarginParams mp = params.margin;
      mp.seed = derive_seed(params.margin.seed, k);
      model.per_system_binary[systems[k]] = train_margin(data, mp);
    }
  }
  return model;
}

// ---------------------------------------------------------------------------
// Annotation
// ---------------------------------------------------------------------------

// Test-side inputs for feature extraction.
struct AnnotationContext {
  const CorpusIndex& index;
  const CandidateDictionary& cand;
};

namespace detail {

inline void check_group_systems(const MetaElModel& model, std::span<const MentionGroup> groups) {
  const std::set<std::string> known(model.systems.begin(), model.systems.end());
  for (const auto& g : groups) {
    for (const auto& [sys, e] : g.per_system) {
      if (!known.count(sys)) {
        throw ValidationError("system '" + sys + "' is not part of the model (trained on " +
                              std::to_string(model.systems.size()) + " systems)");
      }
    }
  }
}

inline bool unanimous(const MentionGroup& g) {
  const CanonicalEntityId* first = nullptr;
  for (const auto& [sys, e] : g.per_system) {
    if (first == nullptr) {
      first = &e;
    } else if (!(e == *first)) {
      return false;
    }
  }
  return true;
}

// First system in model order that recognised the group.
inline const std::string& first_present(const MetaElModel& model, const MentionGroup& g) {
  for (const auto& s : model.systems) {
    if (g.entity_of(s) != nullptr) return s;
  }
  throw ValidationError("group has no recogniser");
}

}  // namespace detail

// Present system with the highest confidence; exact ties go to the higher
// overall training F1, then to the earlier system in model order.
inline std::string select_system(const MetaElModel& model, const MentionGroup& g,
                                 const std::map<std::string, double>& confidences) {
  const std::string* best = nullptr;
  double best_conf = 0.0;
  double best_f1 = 0.0;
  for (const auto& s : model.systems) {
    if (g.entity_of(s) == nullptr) continue;
    const double c = confidences.at(s);
    const double f1 = model.stats.at(s).overall_f1();
    if (best == nullptr || c > best_conf || (c == best_conf && f1 > best_f1)) {
      best = &s;
      best_conf = c;
      best_f1 = f1;
    }
  }
  if (best == nullptr) throw ValidationError("group has no recogniser");
  return *best;
}

enum class Strategy { kLoose, kStrict };

inline UnifiedAnnotationSet annotate(const MetaElModel& model, std::span<const MentionGroup> groups,
                                     const AnnotationContext& ctx, Strategy strategy) {
  detail::check_group_systems(model, groups);
  const Featurizer fz(ctx.index, ctx.cand, model.stats, model.systems, model.config.mask);
  UnifiedAnnotationSet out;
  for (const auto& g : groups) {
    const std::size_t r = g.recognisers();
    if (r == 0) continue;
    if (r == 1) {
      const auto& [sys, entity] = *g.per_system.begin();
      if (strategy == Strategy::kLoose) {
        out.annotations.push_back({{g.mention, entity}, sys, std::string(path::kSingleSystem)});
        continue;
      }
      auto it = model.per_system_binary.find(sys);
      if (it == model.per_system_binary.end()) {
        throw ValidationError("model has no binary classifier for system '" + sys + "'");
      }
      if (predict_margin(it->second, fz(g))) {
        out.annotations.push_back({{g.mention, entity}, sys, std::string(path::kBinaryAccepted)});
      }
      continue;
    }
    if (model.config.short_circuit_unanimous && detail::unanimous(g)) {
      const auto& sys = detail::first_present(model, g);
      out.annotations.push_back({{g.mention, *g.entity_of(sys)}, sys, std::string(path::kAgreement)});
      continue;
    }
    const auto conf = predict_label_confidences(model.br, fz(g));
    const std::string sys = select_system(model, g, conf);
    out.annotations.push_back({{g.mention, *g.entity_of(sys)}, sys, std::string(path::kPredicted)});
  }
  return out;
}

// Recall-oriented: single-recogniser annotations are trusted.
inline UnifiedAnnotationSet annotate_loose(const MetaElModel& model, std::span<const MentionGroup> groups,
                                           const AnnotationContext& ctx) {
  return annotate(model, groups, ctx, Strategy::kLoose);
}

// Precision-oriented: single-recogniser annotations must pass the system's
// binary classifier.
inline UnifiedAnnotationSet annotate_strict(const MetaElModel& model, std::span<const MentionGroup> groups,
                                            const AnnotationContext& ctx) {
  return annotate(model, groups, ctx, Strategy::kStrict);
}

// ---------------------------------------------------------------------------
// Classifier diagnostics on a gold-bearing test set
// ---------------------------------------------------------------------------

// Multi-label view over gold groups with at least two recognisers. The
// chosen system is the classifier's selection (never the unanimity shortcut).
inline MultiLabelReport multilabel_diagnostics(const MetaElModel& model, std::span<const MentionGroup> groups,
                                               const AnnotationContext& ctx) {
  detail::check_group_systems(model, groups);
  const Featurizer fz(ctx.index, ctx.cand, model.stats, model.systems, model.config.mask);
  std::vector<LabelSet> predicted, truth;
  std::vector<std::optional<std::string>> chosen;
  std::vector<MentionGroup> used;
  for (const auto& g : groups) {
    if (!g.gold || g.recognisers() < 2) continue;
    const auto conf = predict_label_confidences(model.br, fz(g));
    LabelSet p;
    for (const auto& [sys, c] : conf) {
      if (c >= 0.5) p.insert(sys);
    }
    predicted.push_back(std::move(p));
    truth.push_back(correct_systems(g));
    chosen.emplace_back(select_system(model, g, conf));
    used.push_back(g);
  }
  return multilabel_metrics(predicted, truth, model.systems, chosen, used);
}

inline std::map<std::string, BinaryReport> binary_diagnostics(const MetaElModel& model,
                                                              std::span<const MentionGroup> groups,
                                                              const AnnotationContext& ctx) {
  detail::check_group_systems(model, groups);
  const Featurizer fz(ctx.index, ctx.cand, model.stats, model.systems, model.config.mask);
  std::map<std::string, BinaryReport> out;
  for (const auto& sys : model.systems) {
    auto it = model.per_system_binary.find(sys);
    if (it == model.per_system_binary.end()) continue;
    std::vector<bool> pred, truth;
    for (const auto& g : groups) {
      if (!g.gold || g.entity_of(sys) == nullptr) continue;
      pred.push_back(predict_margin(it->second, fz(g)));
      truth.push_back(g.system_correct(sys));
    }
    out[sys] = binary_metrics(pred, truth);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const SystemTrainingStats& s) {
  nlohmann::json per = nlohmann::json::object();
  for (const auto& [sys, st] : s.per_system) {
    nlohmann::json surfaces = nlohmann::json::object();
    for (const auto& [surf, c] : st.surfaces) surfaces[surf] = {c.correct, c.wrong};
    per[sys] = {{"overall", to_json(st.overall)}, {"surfaces", std::move(surfaces)}};
  }
  return {{"systems", s.systems}, {"per_system", std::move(per)}};
}

inline SystemTrainingStats training_stats_from_json(const nlohmann::json& j) {
  SystemTrainingStats s;
  s.systems = j.at("systems").get<std::vector<std::string>>();
  for (const auto& [sys, st] : j.at("per_system").items()) {
    SystemStats ss;
    const auto& o = st.at("overall");
    ss.overall = make_prf(o.at("correct").get<std::size_t>(), o.at("recognised").get<std::size_t>(),
                          o.at("gt_total").get<std::size_t>());
    for (const auto& [surf, c] : st.at("surfaces").items()) {
      ss.surfaces[surf] = {c.at(0).get<std::size_t>(), c.at(1).get<std::size_t>()};
    }
    s.per_system[sys] = std::move(ss);
  }
  return s;
}

inline nlohmann::json to_json(const MetaElConfig& c) {
  return {{"alignment", std::string(to_string(c.mode))},
          {"features", c.mask.names()},
          {"short_circuit_unanimous", c.short_circuit_unanimous},
          {"include_empty_label_sets", c.include_empty_label_sets}};
}

inline MetaElConfig config_from_json(const nlohmann::json& j) {
  MetaElConfig c;
  c.mode = parse_alignment_mode(j.value("alignment", std::string("strong")));
  if (j.contains("features")) c.mask = FeatureMask::from_names(j.at("features").get<std::vector<std::string>>());
  c.short_circuit_unanimous = j.value("short_circuit_unanimous", c.short_circuit_unanimous);
  c.include_empty_label_sets = j.value("include_empty_label_sets", c.include_empty_label_sets);
  return c;
}

inline nlohmann::json to_json(const MetaElModel& m) {
  nlohmann::json binary = nlohmann::json::object();
  for (const auto& [sys, mm] : m.per_system_binary) binary[sys] = to_json(mm);
  return {{"format_version", kModelFormatVersion},
          {"systems", m.systems},
          {"config", to_json(m.config)},
          {"params",
           {{"forest", to_json(m.params.forest)},
            {"margin", to_json(m.params.margin)},
            {"train_binary", m.params.train_binary}}},
          {"stats", to_json(m.stats)},
          {"multilabel", to_json(m.br)},
          {"binary", std::move(binary)},
          {"constant_accept", m.constant_accept}};
}

inline MetaElModel model_from_json(const nlohmann::json& j) {
  try {
    const int version = j.at("format_version").get<int>();
    if (version != kModelFormatVersion) {
      throw ValidationError("unsupported model format version " + std::to_string(version));
    }
    MetaElModel m;
    m.systems = j.at("systems").get<std::vector<std::string>>();
    m.config = config_from_json(j.at("config"));
    m.params.config = m.config;
    m.params.forest = forest_params_from_json(j.at("params").at("forest"));
    m.params.margin = margin_params_from_json(j.at("params").at("margin"));
    m.params.train_binary = j.at("params").value("train_binary", true);
    m.stats = training_stats_from_json(j.at("stats"));
    m.br = binary_relevance_from_json(j.at("multilabel"));
    for (const auto& [sys, mm] : j.at("binary").items()) m.per_system_binary[sys] = margin_from_json(mm);
    m.constant_accept = j.at("constant_accept").get<std::set<std::string>>();
    if (m.br.label_order != m.systems || m.stats.systems != m.systems) {
      throw ValidationError("model file: inconsistent system order");
    }
    if (m.br.feature_dim() != vector_length(m.systems.size(), m.config.mask)) {
      throw ValidationError("model file: feature dimension does not match the feature mask");
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("model file: ") + e.what());
  }
}

inline void save_model(const MetaElModel& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << to_json(m).dump() << '\n';
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

inline MetaElModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  return model_from_json(j);
}

}  // namespace metael
