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
#include <iomanip>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "json.hpp"
#include "metael/corpus.hpp"
#include "metael/error.hpp"

namespace metael {

enum class AlignmentMode { kStrong, kOverlap };

inline std::string_view to_string(AlignmentMode m) {
  return m == AlignmentMode::kStrong ? "strong" : "overlap";
}

inline AlignmentMode parse_alignment_mode(std::string_view s) {
  if (s == "strong") return AlignmentMode::kStrong;
  if (s == "overlap") return AlignmentMode::kOverlap;
  throw ValidationError("unknown alignment mode '" + std::string(s) + "' (expected strong|overlap)");
}

// One aligned mention with the entity each system assigned to it.
struct MentionGroup {
  Mention mention;
  std::map<std::string, CanonicalEntityId> per_system;
  std::optional<CanonicalEntityId> gold;

  std::size_t recognisers() const { return per_system.size(); }

  const CanonicalEntityId* entity_of(const std::string& system) const {
    auto it = per_system.find(system);
    return it == per_system.end() ? nullptr : &it->second;
  }

  bool system_correct(const std::string& system) const {
    const auto* e = entity_of(system);
    return e != nullptr && gold.has_value() && *e == *gold;
  }
};

namespace detail {

struct AlignItem {
  std::size_t begin = 0;
  std::size_t end = 0;
  int source = -1;  // -1 = gold, otherwise index into the system sets
  const EntityAnnotation* ann = nullptr;

  std::size_t length() const { return end - begin; }
};

// Total order used everywhere in overlap mode so that the result never
// depends on input order.
inline bool item_less(const AlignItem& a, const AlignItem& b) {
  return std::forward_as_tuple(a.begin, b.end, a.source, a.ann->mention.surface,
                               a.ann->entity.value()) <
         std::forward_as_tuple(b.begin, a.end, b.source, b.ann->mention.surface,
                               b.ann->entity.value());
}

inline std::size_t overlap_len(const AlignItem& a, const AlignItem& b) {
  const std::size_t lo = std::max(a.begin, b.begin);
  const std::size_t hi = std::min(a.end, b.end);
  return hi > lo ? hi - lo : 0;
}

inline std::size_t gap(const AlignItem& a, const AlignItem& b) {
  if (a.end <= b.begin) return b.begin - a.end;
  if (b.end <= a.begin) return a.begin - b.end;
  return 0;
}

// Components of the transitive overlap relation. Input must be sorted.
inline std::vector<std::vector<AlignItem>> overlap_components(const std::vector<AlignItem>& sorted) {
  std::vector<std::vector<AlignItem>> comps;
  std::size_t reach = 0;
  for (const auto& it : sorted) {
    if (comps.empty() || it.begin >= reach) {
      comps.emplace_back();
      reach = it.end;
    } else {
      reach = std::max(reach, it.end);
    }
    comps.back().push_back(it);
  }
  return comps;
}

// Preferred annotation of one system for an anchor span: exact span match,
// else longest, else leftmost (input is already in total order).
inline std::size_t pick_for_anchor(const std::vector<AlignItem>& cands, const AlignItem& anchor) {
  std::size_t best = 0;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    const auto& c = cands[i];
    const auto& b = cands[best];
    const bool c_exact = c.begin == anchor.begin && c.end == anchor.end;
    const bool b_exact = b.begin == anchor.begin && b.end == anchor.end;
    if (c_exact != b_exact) {
      if (c_exact) best = i;
      continue;
    }
    if (c.length() > b.length()) best = i;
  }
  return best;
}

inline void resolve_component(const std::vector<AlignItem>& comp, std::span<const AnnotationSet> sets,
                              std::vector<MentionGroup>& out) {
  std::vector<AlignItem> golds;
  std::vector<AlignItem> sys;
  for (const auto& it : comp) (it.source < 0 ? golds : sys).push_back(it);

  std::vector<AlignItem> leftovers;
  auto emit = [&](const AlignItem& anchor, const std::vector<AlignItem>& members, bool with_gold) {
    MentionGroup g;
    g.mention = anchor.ann->mention;
    if (with_gold) g.gold = anchor.ann->entity;
    std::map<int, std::vector<AlignItem>> by_source;
    for (const auto& m : members) by_source[m.source].push_back(m);
    for (auto& [src, cands] : by_source) {
      const std::size_t pick = pick_for_anchor(cands, anchor);
      g.per_system.emplace(sets[static_cast<std::size_t>(src)].system_id, cands[pick].ann->entity);
      for (std::size_t i = 0; i < cands.size(); ++i) {
        if (i != pick) leftovers.push_back(cands[i]);
      }
    }
    out.push_back(std::move(g));
  };

  if (!golds.empty()) {
    std::vector<std::vector<AlignItem>> assigned(golds.size());
    for (const auto& s : sys) {
      std::size_t best = 0;
      for (std::size_t gi = 1; gi < golds.size(); ++gi) {
        const std::size_t ob = overlap_len(s, golds[best]);
        const std::size_t og = overlap_len(s, golds[gi]);
        if (og > ob || (og == ob && og == 0 && gap(s, golds[gi]) < gap(s, golds[best]))) best = gi;
      }
      assigned[best].push_back(s);
    }
    for (std::size_t gi = 0; gi < golds.size(); ++gi) emit(golds[gi], assigned[gi], true);
  } else {
    std::size_t rep = 0;
    for (std::size_t i = 1; i < sys.size(); ++i) {
      if (sys[i].length() > sys[rep].length()) rep = i;
    }
    emit(sys[rep], sys, false);
  }

  if (!leftovers.empty()) {
    std::sort(leftovers.begin(), leftovers.end(), item_less);
    for (const auto& c : overlap_components(leftovers)) resolve_component(c, sets, out);
  }
}

inline void check_system_ids(std::span<const AnnotationSet> sets) {
  std::set<std::string> ids;
  for (const auto& s : sets) {
    if (s.system_id.empty()) throw ValidationError("annotation set with empty system id");
    if (!ids.insert(s.system_id).second) {
      throw ValidationError("duplicate system id '" + s.system_id + "'");
    }
  }
}

}  // namespace detail

inline bool group_less(const MentionGroup& a, const MentionGroup& b) {
  return std::forward_as_tuple(a.mention.doc_id, a.mention.position, a.mention.surface) <
         std::forward_as_tuple(b.mention.doc_id, b.mention.position, b.mention.surface);
}

// Aligns the annotations of n systems (and optionally the gold standard)
// into mention groups. Output is sorted by document id, then position.
//
// Strong mode merges annotations with identical (doc, position, collapsed
// surface). Overlap mode merges annotations whose spans overlap, closed
// transitively. Inside an overlap component every gold span anchors its own
// group; each system annotation joins the gold span it overlaps most, and a
// system contributes at most one annotation per group (exact span, else
// longest). Surplus annotations are regrouped among themselves.
inline std::vector<MentionGroup> build_mention_groups(std::span<const AnnotationSet> sets,
                                                      const GroundTruth* gt, AlignmentMode mode) {
  detail::check_system_ids(sets);
  std::vector<MentionGroup> out;

  if (mode == AlignmentMode::kStrong) {
    std::map<MentionKey, std::size_t> index;
    auto slot = [&](const Mention& m) -> MentionGroup& {
      auto [it, inserted] = index.emplace(key_of(m), out.size());
      if (inserted) {
        out.emplace_back();
        out.back().mention = m;
      }
      return out[it->second];
    };
    if (gt != nullptr) {
      for (const auto& a : gt->annotations) slot(a.mention).gold = a.entity;
    }
    for (const auto& set : sets) {
      for (const auto& a : set.annotations) {
        auto& g = slot(a.mention);
        if (!g.per_system.emplace(set.system_id, a.entity).second) {
          throw ValidationError("system '" + set.system_id + "' has duplicate mention (" +
                                a.mention.doc_id + ", " + std::to_string(a.mention.position) + ")");
        }
      }
    }
  } else {
    std::map<std::string, std::vector<detail::AlignItem>> by_doc;
    auto add = [&](const EntityAnnotation& a, int source) {
      const std::size_t len = a.mention.length();
      by_doc[a.mention.doc_id].push_back({a.mention.position, a.mention.position + len, source, &a});
    };
    if (gt != nullptr) {
      for (const auto& a : gt->annotations) add(a, -1);
    }
    for (std::size_t s = 0; s < sets.size(); ++s) {
      for (const auto& a : sets[s].annotations) add(a, static_cast<int>(s));
    }
    for (auto& [doc, items] : by_doc) {
      std::sort(items.begin(), items.end(), detail::item_less);
      for (const auto& comp : detail::overlap_components(items)) {
        detail::resolve_component(comp, sets, out);
      }
    }
  }

  std::sort(out.begin(), out.end(), group_less);
  return out;
}

inline std::vector<MentionGroup> build_mention_groups(std::span<const AnnotationSet> sets,
                                                      const GroundTruth& gt, AlignmentMode mode) {
  return build_mention_groups(sets, &gt, mode);
}

inline std::vector<MentionGroup> build_mention_groups(std::span<const AnnotationSet> sets,
                                                      AlignmentMode mode) {
  return build_mention_groups(sets, nullptr, mode);
}

// Variant that first checks every annotation refers to a document of corpus.
inline std::vector<MentionGroup> build_mention_groups(const Corpus& corpus,
                                                      std::span<const AnnotationSet> sets,
                                                      const GroundTruth* gt, AlignmentMode mode) {
  auto check = [&](const std::vector<EntityAnnotation>& anns, const std::string& who) {
    for (const auto& a : anns) {
      if (!corpus.contains(a.mention.doc_id)) {
        throw ValidationError(who + " refers to unknown document '" + a.mention.doc_id + "'");
      }
    }
  };
  for (const auto& s : sets) check(s.annotations, "system '" + s.system_id + "'");
  if (gt != nullptr) check(gt->annotations, "ground truth");
  return build_mention_groups(sets, gt, mode);
}

// ---------------------------------------------------------------------------
// Agreement statistics
// ---------------------------------------------------------------------------

struct AgreementBucket {
  std::size_t count = 0;
  std::size_t all_same = 0;       // every recogniser gives one entity
  std::size_t partial = 0;        // some but not all recognisers agree
  std::size_t all_different = 0;  // pairwise distinct entities
  std::size_t correct_available = 0;
};

struct AgreementReport {
  std::size_t n_systems = 0;
  std::size_t gt_total = 0;
  std::map<std::string, std::size_t> system_totals;
  std::vector<AgreementBucket> buckets;  // index = number of recognisers
};

// Buckets gold-bearing groups by how many systems recognised them. Buckets
// with one recogniser count as all_same; bucket 0 carries no agreement
// sub-counts.
inline AgreementReport agreement_statistics(std::span<const MentionGroup> groups, std::size_t n) {
  if (n < 1) throw ValidationError("agreement statistics need at least one system");
  AgreementReport r;
  r.n_systems = n;
  r.buckets.resize(n + 1);
  for (const auto& g : groups) {
    for (const auto& [sys, e] : g.per_system) ++r.system_totals[sys];
    if (!g.gold) continue;
    const std::size_t k = g.recognisers();
    if (k > n) {
      throw ValidationError("group recognised by " + std::to_string(k) + " systems but n = " +
                            std::to_string(n));
    }
    ++r.gt_total;
    auto& b = r.buckets[k];
    ++b.count;
    if (k == 0) continue;
    std::set<CanonicalEntityId> distinct;
    bool correct = false;
    for (const auto& [sys, e] : g.per_system) {
      distinct.insert(e);
      correct = correct || e == *g.gold;
    }
    if (distinct.size() == 1) {
      ++b.all_same;
    } else if (distinct.size() == k) {
      ++b.all_different;
    } else {
      ++b.partial;
    }
    if (correct) ++b.correct_available;
  }
  return r;
}

inline nlohmann::json to_json(const AgreementReport& r) {
  nlohmann::json buckets = nlohmann::json::array();
  for (std::size_t k = 0; k < r.buckets.size(); ++k) {
    const auto& b = r.buckets[k];
    buckets.push_back({{"recognisers", k},
                       {"count", b.count},
                       {"all_same", b.all_same},
                       {"partial", b.partial},
                       {"all_different", b.all_different},
                       {"correct_available", b.correct_available}});
  }
  return {{"n_systems", r.n_systems},
          {"gt_total", r.gt_total},
          {"system_totals", r.system_totals},
          {"buckets", buckets}};
}

namespace detail {

inline std::string count_with_pct(std::size_t v, std::size_t total) {
  std::ostringstream os;
  os << v;
  if (total > 0) {
    os << " (" << std::fixed << std::setprecision(1) << 100.0 * static_cast<double>(v) / total
       << "%)";
  }
  return os.str();
}

}  // namespace detail

// Plain-text rendering laid out like the usual agreement table.
inline std::string render_table(const AgreementReport& r) {
  std::ostringstream os;
  const std::size_t n = r.n_systems;
  auto row = [&](const std::string& label, const std::string& value) {
    os << std::left << std::setw(48) << label << std::right << std::setw(18) << value << '\n';
  };
  row("Total number of GT annotations:", std::to_string(r.gt_total));
  for (const auto& [sys, c] : r.system_totals) row(sys + " annotations:", std::to_string(c));
  for (std::size_t k = 0; k <= n; ++k) {
    const auto& b = r.buckets[k];
    const std::string frac = std::to_string(k) + "/" + std::to_string(n);
    row("GT mentions recognised by " + frac + " tools:", detail::count_with_pct(b.count, r.gt_total));
    if (k == 0) continue;
    if (k >= 2) {
      row("  " + frac + " tools provide the same entity:", detail::count_with_pct(b.all_same, b.count));
      if (k >= 3) {
        row("  partial agreement:", detail::count_with_pct(b.partial, b.count));
      }
      row("  each tool provides a different entity:",
          detail::count_with_pct(b.all_different, b.count));
    }
    row("  correct entity is provided:", detail::count_with_pct(b.correct_available, b.count));
  }
  return os.str();
}

}  // namespace metael
