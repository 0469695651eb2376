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

#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "../support/builders.hpp"
#include "metael/alignment.hpp"
#include "metael/rng.hpp"

using namespace metael;
using fixture::ann;
using fixture::E;

namespace {

std::string describe(const std::vector<MentionGroup>& groups) {
  std::string s;
  for (const auto& g : groups) {
    s += g.mention.doc_id + ":" + std::to_string(g.mention.position) + ":" + g.mention.surface + "{";
    for (const auto& [sys, e] : g.per_system) s += sys + "=" + e.value() + ",";
    s += "} gold=" + (g.gold ? g.gold->value() : "-") + "\n";
  }
  return s;
}

// Random spans over a few documents for property tests.
struct RandomInput {
  std::vector<AnnotationSet> sets;
  GroundTruth gt;
  std::size_t total = 0;
};

RandomInput random_input(Rng& rng, bool nested_spans) {
  static const std::string word = "abcdefghijklmnopqrstuvwxyz";
  RandomInput in;
  for (const char* sys : {"A", "B", "C"}) {
    AnnotationSet s{sys, {}};
    std::set<MentionKey> used;
    for (int k = 0; k < 12; ++k) {
      const std::string doc = "d" + std::to_string(uniform_index(rng, 3));
      const std::size_t pos = uniform_index(rng, 20) * (nested_spans ? 1 : 3);
      const std::size_t len = nested_spans ? 1 + uniform_index(rng, 4) : 2;
      Mention m{doc, word.substr(pos % 20, len), pos};
      if (!used.insert(key_of(m)).second) continue;
      s.annotations.push_back({m, E("E" + std::to_string(uniform_index(rng, 3)))});
      ++in.total;
    }
    in.sets.push_back(std::move(s));
  }
  std::set<MentionKey> used;
  for (int k = 0; k < 8; ++k) {
    const std::string doc = "d" + std::to_string(uniform_index(rng, 3));
    const std::size_t pos = uniform_index(rng, 20) * (nested_spans ? 1 : 3);
    const std::size_t len = nested_spans ? 1 + uniform_index(rng, 4) : 2;
    Mention m{doc, word.substr(pos % 20, len), pos};
    if (!used.insert(key_of(m)).second) continue;
    in.gt.annotations.push_back({m, E("E" + std::to_string(uniform_index(rng, 3)))});
  }
  return in;
}

}  // namespace

TEST(Alignment, IdenticalKeysMerge) {
  const AnnotationSet a{"A", {ann("d1", 0, "Jordan", "e1")}};
  const AnnotationSet b{"B", {ann("d1", 0, "Jordan", "e2")}};
  const AnnotationSet sets[] = {a, b};
  const auto groups = build_mention_groups(sets, AlignmentMode::kStrong);
  ASSERT_EQ(groups.size(), 1u);
  EXPECT_EQ(groups[0].per_system.at("A"), E("e1"));
  EXPECT_EQ(groups[0].per_system.at("B"), E("e2"));
  EXPECT_FALSE(groups[0].gold);
}

TEST(Alignment, StrongModeKeepsDifferentSpansApart) {
  const AnnotationSet sets[] = {{"A", {ann("d1", 0, "Jordan", "e1")}}, {"B", {ann("d1", 0, "Jordan played", "e1")}}};
  EXPECT_EQ(build_mention_groups(sets, AlignmentMode::kStrong).size(), 2u);
}

TEST(Alignment, StrongModeComparesCollapsedSurfaces) {
  const AnnotationSet sets[] = {{"A", {ann("d1", 0, "Jordan  played", "e1")}},
                                {"B", {ann("d1", 0, "Jordan played", "e1")}}};
  EXPECT_EQ(build_mention_groups(sets, AlignmentMode::kStrong).size(), 1u);
}

TEST(Alignment, OverlapModeUsesGoldSpan) {
  const AnnotationSet sets[] = {{"A", {ann("d1", 0, "Jordan", "e1")}}, {"B", {ann("d1", 0, "Jordan played", "e2")}}};
  const GroundTruth gt{{ann("d1", 0, "Jordan", "e1")}};
  // Spans [0,6), [0,13) and gold [0,6) pairwise overlap: one component.
  const auto groups = build_mention_groups(sets, gt, AlignmentMode::kOverlap);
  ASSERT_EQ(groups.size(), 1u) << describe(groups);
  EXPECT_EQ(groups[0].mention, (Mention{"d1", "Jordan", 0}));
  EXPECT_EQ(groups[0].recognisers(), 2u);
  EXPECT_EQ(*groups[0].gold, E("e1"));
}

TEST(Alignment, OverlapModeWithoutGoldPicksLongestThenLeftmost) {
  const AnnotationSet sets[] = {{"A", {ann("d1", 7, "played", "e1")}},
                                {"B", {ann("d1", 0, "Jordan played", "e2")}},
                                {"C", {ann("d1", 10, "yed for", "e3")}}};
  auto groups = build_mention_groups(sets, AlignmentMode::kOverlap);
  ASSERT_EQ(groups.size(), 1u);
  EXPECT_EQ(groups[0].mention, (Mention{"d1", "Jordan played", 0}));

  const AnnotationSet tie[] = {{"A", {ann("d1", 4, "an pl", "e1")}}, {"B", {ann("d1", 0, "Jorda", "e2")}}};
  groups = build_mention_groups(tie, AlignmentMode::kOverlap);
  ASSERT_EQ(groups.size(), 1u);
  EXPECT_EQ(groups[0].mention.position, 0u);
}

TEST(Alignment, OverlapModeTransitiveChains) {
  // [0,4) overlaps [3,7) overlaps [6,9): one component by transitivity.
  const AnnotationSet sets[] = {{"A", {ann("d1", 0, "abcd", "e1")}},
                                {"B", {ann("d1", 3, "defg", "e1")}},
                                {"C", {ann("d1", 6, "ghi", "e1")}}};
  EXPECT_EQ(build_mention_groups(sets, AlignmentMode::kOverlap).size(), 1u);
}

TEST(Alignment, GoldOnlyGroupsRetained) {
  const AnnotationSet sets[] = {{"A", {ann("d1", 0, "Jordan", "e1")}}};
  const GroundTruth gt{{ann("d1", 0, "Jordan", "e1"), ann("d1", 20, "Wizards", "Washington Wizards")}};
  const auto groups = build_mention_groups(sets, gt, AlignmentMode::kStrong);
  ASSERT_EQ(groups.size(), 2u);
  EXPECT_EQ(groups[1].recognisers(), 0u);
  EXPECT_TRUE(groups[1].gold);
}

TEST(Alignment, Errors) {
  const AnnotationSet dup[] = {{"A", {}}, {"A", {}}};
  EXPECT_THROW(build_mention_groups(dup, AlignmentMode::kStrong), ValidationError);
  const auto c = fixture::corpus({{"d1", "Jordan played"}});
  const AnnotationSet foreign[] = {{"A", {ann("d2", 0, "Jordan", "e1")}}};
  EXPECT_THROW(build_mention_groups(c, foreign, nullptr, AlignmentMode::kStrong), ValidationError);
  EXPECT_THROW(parse_alignment_mode("fuzzy"), ValidationError);
  EXPECT_EQ(parse_alignment_mode("overlap"), AlignmentMode::kOverlap);
}

TEST(Alignment, StrongPartitionOnRandomInputs) {
  Rng rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    const auto in = random_input(rng, true);
    const auto groups = build_mention_groups(in.sets, in.gt, AlignmentMode::kStrong);
    std::size_t members = 0, gold = 0;
    for (const auto& g : groups) {
      members += g.per_system.size();
      gold += g.gold ? 1 : 0;
      ASSERT_TRUE(!g.per_system.empty() || g.gold);
    }
    ASSERT_EQ(members, in.total);
    ASSERT_EQ(gold, in.gt.annotations.size());
    for (std::size_t i = 1; i < groups.size(); ++i) {
      const auto& a = groups[i - 1].mention;
      const auto& b = groups[i].mention;
      ASSERT_TRUE(std::tie(a.doc_id, a.position) <= std::tie(b.doc_id, b.position));
    }
  }
}

TEST(Alignment, OverlapPartitionAndOrderIndependence) {
  Rng rng(12);
  for (int trial = 0; trial < 300; ++trial) {
    auto in = random_input(rng, true);
    const auto groups = build_mention_groups(in.sets, in.gt, AlignmentMode::kOverlap);
    std::size_t members = 0, gold = 0;
    for (const auto& g : groups) {
      members += g.per_system.size();
      gold += g.gold ? 1 : 0;
    }
    ASSERT_EQ(members, in.total) << describe(groups);
    ASSERT_EQ(gold, in.gt.annotations.size());

    for (auto& s : in.sets) {
      for (std::size_t i = s.annotations.size(); i > 1; --i) {
        std::swap(s.annotations[i - 1], s.annotations[uniform_index(rng, i)]);
      }
    }
    std::reverse(in.sets.begin(), in.sets.end());
    auto& g = in.gt.annotations;
    for (std::size_t i = g.size(); i > 1; --i) std::swap(g[i - 1], g[uniform_index(rng, i)]);
    ASSERT_EQ(describe(build_mention_groups(in.sets, in.gt, AlignmentMode::kOverlap)), describe(groups));
  }
}

TEST(Agreement, SingleGroupClassification) {
  const MentionGroup g = fixture::group({{"A", "e1"}, {"B", "e2"}, {"C", "e2"}}, "e1");
  const auto r = agreement_statistics(std::span(&g, 1), 3);
  ASSERT_EQ(r.buckets.size(), 4u);
  // Brute force: 2 distinct entities among 3 recognisers, gold among them.
  std::set<std::string> distinct;
  for (const auto& [s, e] : g.per_system) distinct.insert(e.value());
  const bool partial = distinct.size() > 1 && distinct.size() < g.per_system.size();
  EXPECT_EQ(r.buckets[3].count, 1u);
  EXPECT_EQ(r.buckets[3].partial, partial ? 1u : 0u);
  EXPECT_EQ(r.buckets[3].partial, 1u);
  EXPECT_EQ(r.buckets[3].all_same, 0u);
  EXPECT_EQ(r.buckets[3].all_different, 0u);
  EXPECT_EQ(r.buckets[3].correct_available, 1u);
}

TEST(Agreement, ZeroRecognisersAndTotals) {
  std::vector<MentionGroup> gs = {
      fixture::group({}, "e1"),
      fixture::group({{"A", "e1"}}, "e1", "d1", 10),
      fixture::group({{"A", "e1"}, {"B", "e1"}}, "e2", "d1", 20),
      fixture::group({{"A", "e1"}, {"B", "e2"}, {"C", "e3"}}, "e3", "d1", 30),
      fixture::group({{"A", "e1"}}, std::nullopt, "d1", 40),
  };
  const auto r = agreement_statistics(gs, 3);
  EXPECT_EQ(r.gt_total, 4u);
  EXPECT_EQ(r.buckets[0].count, 1u);
  EXPECT_EQ(r.buckets[1].count, 1u);
  EXPECT_EQ(r.buckets[2].all_same, 1u);
  EXPECT_EQ(r.buckets[2].correct_available, 0u);
  EXPECT_EQ(r.buckets[3].all_different, 1u);
  EXPECT_EQ(r.buckets[3].correct_available, 1u);
  std::size_t total = 0;
  for (std::size_t k = 0; k < r.buckets.size(); ++k) {
    const auto& b = r.buckets[k];
    total += b.count;
    EXPECT_LE(b.correct_available, b.count);
    if (k >= 1) {
      EXPECT_EQ(b.all_same + b.partial + b.all_different, b.count);
    }
  }
  EXPECT_EQ(total, r.gt_total);
  EXPECT_THROW(agreement_statistics(gs, 0), ValidationError);
  const std::string table = render_table(r);
  EXPECT_NE(table.find("3/3"), std::string::npos) << table;
  EXPECT_EQ(to_json(r)["buckets"].size(), 4u);
}
