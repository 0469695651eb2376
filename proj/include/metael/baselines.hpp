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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "metael/alignment.hpp"
#include "metael/error.hpp"
#include "metael/features.hpp"
#include "metael/rng.hpp"
#include "metael/unified.hpp"

namespace metael {

enum class BaselineKind {
  kRandom,
  kBestSystem,
  kMajorityRandom,
  kMajorityBest,
  kWeightedVoting,
  kWeightedVotingAll,
  kUpperBound,
};

inline constexpr BaselineKind kAllBaselines[] = {
    BaselineKind::kRandom,         BaselineKind::kBestSystem,        BaselineKind::kMajorityRandom,
    BaselineKind::kMajorityBest,   BaselineKind::kWeightedVoting,    BaselineKind::kWeightedVotingAll,
    BaselineKind::kUpperBound,
};

inline std::string_view to_string(BaselineKind k) {
  switch (k) {
    case BaselineKind::kRandom: return "random";
    case BaselineKind::kBestSystem: return "best_system";
    case BaselineKind::kMajorityRandom: return "majority_random";
    case BaselineKind::kMajorityBest: return "majority_best";
    case BaselineKind::kWeightedVoting: return "weighted_voting";
    case BaselineKind::kWeightedVotingAll: return "weighted_voting_all";
    case BaselineKind::kUpperBound: return "upper_bound";
  }
  return "?";
}

inline std::optional<BaselineKind> parse_baseline_kind(std::string_view s) {
  for (auto k : kAllBaselines) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

inline bool needs_priors(BaselineKind k) { return k != BaselineKind::kRandom && k != BaselineKind::kUpperBound; }

struct BaselinePolicy {
  BaselineKind kind = BaselineKind::kRandom;
  std::optional<SystemTrainingStats> priors;  // training-set precision / F1 per system
  std::uint64_t seed = 0;
  // Weighted voting: average instead of sum the supporting weights.
  bool mean_vote_score = false;
};

// Per-group generator; depends only on the seed and the mention position so
// output never depends on processing order.
inline Rng group_rng(std::uint64_t seed, const MentionGroup& g) {
  return Rng(derive_seed(seed, g.mention.doc_id + '\x1f' + std::to_string(g.mention.position)));
}

namespace detail {

struct Vote {
  CanonicalEntityId entity;
  std::vector<std::string> supporters;  // system ids, lexicographic
};

// Distinct entities of a group in entity order with their supporters.
inline std::vector<Vote> tally(const MentionGroup& g) {
  std::map<CanonicalEntityId, std::vector<std::string>> m;
  for (const auto& [sys, e] : g.per_system) m[e].push_back(sys);
  std::vector<Vote> out;
  for (auto& [e, s] : m) out.push_back({e, std::move(s)});
  return out;
}

// Best system among candidates by overall F1; ties go to the earlier
// system in the priors order.
inline const std::string& best_by_f1(const SystemTrainingStats& priors, std::span<const std::string> candidates) {
  const std::string* best = nullptr;
  double best_f1 = -1.0;
  for (const auto& s : priors.systems) {
    if (std::find(candidates.begin(), candidates.end(), s) == candidates.end()) continue;
    const double f1 = priors.at(s).overall_f1();
    if (f1 > best_f1) {
      best = &s;
      best_f1 = f1;
    }
  }
  if (best == nullptr) throw ValidationError("baseline: system missing from the training statistics");
  return *best;
}

inline void check_priors(const SystemTrainingStats& priors, const MentionGroup& g) {
  for (const auto& [sys, e] : g.per_system) {
    if (!priors.per_system.count(sys) ||
        std::find(priors.systems.begin(), priors.systems.end(), sys) == priors.systems.end()) {
      throw ValidationError("baseline: no training statistics for system '" + sys + "'");
    }
  }
}

}  // namespace detail

// Applies one combination baseline to every group with at least one
// recogniser. Random draws use group_rng(policy.seed, group):
//   random          - one draw over the present systems (lexicographic order)
//   majority_random - on a plurality tie, one draw over the tied entities
//                     (entity order), then one over that entity's supporters
inline UnifiedAnnotationSet apply_baseline(const BaselinePolicy& policy, std::span<const MentionGroup> groups) {
  const std::string name(to_string(policy.kind));
  if (needs_priors(policy.kind) && !policy.priors) {
    throw ValidationError("baseline '" + name + "' needs training statistics");
  }
  if (policy.kind == BaselineKind::kUpperBound &&
      std::none_of(groups.begin(), groups.end(), [](const MentionGroup& g) { return g.gold.has_value(); })) {
    throw ValidationError("upper_bound needs ground truth");
  }
  double threshold = 0.0;
  if (policy.priors) {
    for (const auto& s : policy.priors->systems) {
      threshold = std::max(threshold, policy.priors->at(s).overall_precision());
    }
  }

  UnifiedAnnotationSet out;
  auto emit = [&](const MentionGroup& g, const std::string& sys) {
    out.annotations.push_back({{g.mention, *g.entity_of(sys)}, sys, name});
  };

  for (const auto& g : groups) {
    if (g.recognisers() == 0) continue;
    if (policy.priors) detail::check_priors(*policy.priors, g);
    switch (policy.kind) {
      case BaselineKind::kRandom: {
        Rng rng = group_rng(policy.seed, g);
        auto it = g.per_system.begin();
        std::advance(it, static_cast<std::ptrdiff_t>(uniform_index(rng, g.per_system.size())));
        emit(g, it->first);
        break;
      }
      case BaselineKind::kBestSystem: {
        std::vector<std::string> present;
        for (const auto& [sys, e] : g.per_system) present.push_back(sys);
        emit(g, detail::best_by_f1(*policy.priors, present));
        break;
      }
      case BaselineKind::kMajorityRandom:
      case BaselineKind::kMajorityBest: {
        const auto votes = detail::tally(g);
        std::size_t top = 0;
        for (const auto& v : votes) top = std::max(top, v.supporters.size());
        std::vector<const detail::Vote*> tied;
        for (const auto& v : votes) {
          if (v.supporters.size() == top) tied.push_back(&v);
        }
        if (tied.size() == 1) {
          emit(g, tied.front()->supporters.front());
        } else if (policy.kind == BaselineKind::kMajorityRandom) {
          Rng rng = group_rng(policy.seed, g);
          const auto* v = tied[uniform_index(rng, tied.size())];
          emit(g, v->supporters[uniform_index(rng, v->supporters.size())]);
        } else {
          std::vector<std::string> cands;
          for (const auto* v : tied) cands.insert(cands.end(), v->supporters.begin(), v->supporters.end());
          emit(g, detail::best_by_f1(*policy.priors, cands));
        }
        break;
      }
      case BaselineKind::kWeightedVoting:
      case BaselineKind::kWeightedVotingAll: {
        const auto votes = detail::tally(g);
        const detail::Vote* best = nullptr;
        double best_score = 0.0;
        double best_weight = 0.0;
        std::string best_sys;
        for (const auto& v : votes) {
          double score = 0.0;
          double top_w = -1.0;
          std::string top_sys;
          for (const auto& s : v.supporters) {
            const double w = policy.priors->at(s).overall_precision();
            score += w;
            if (w > top_w) {
              top_w = w;
              top_sys = s;
            }
          }
          if (policy.mean_vote_score) score /= static_cast<double>(v.supporters.size());
          if (best == nullptr || score > best_score || (score == best_score && top_w > best_weight)) {
            best = &v;
            best_score = score;
            best_weight = top_w;
            best_sys = top_sys;
          }
        }
        if (policy.kind == BaselineKind::kWeightedVoting && best_score < threshold) break;
        emit(g, best_sys);
        break;
      }
      case BaselineKind::kUpperBound: {
        if (!g.gold) break;
        for (const auto& [sys, e] : g.per_system) {
          if (e == *g.gold) {
            emit(g, sys);
            break;
          }
        }
        break;
      }
    }
  }
  return out;
}

// A single system's output viewed as a unified set.
inline UnifiedAnnotationSet single_system_output(std::span<const MentionGroup> groups, const std::string& system) {
  UnifiedAnnotationSet out;
  for (const auto& g : groups) {
    if (const auto* e = g.entity_of(system)) out.annotations.push_back({{g.mention, *e}, system, system});
  }
  return out;
}

}  // namespace metael
