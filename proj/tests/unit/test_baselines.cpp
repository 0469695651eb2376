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

#include <map>

#include "../support/builders.hpp"
#include "../support/oracles.hpp"
#include "metael/baselines.hpp"
#include "metael/evaluation.hpp"

using namespace metael;
using fixture::E;
using fixture::group;

namespace {

// Priors with the given (precision, f1) per system.
SystemTrainingStats priors(std::initializer_list<std::tuple<std::string, double, double>> systems) {
  SystemTrainingStats s;
  for (const auto& [name, p, f1] : systems) {
    s.systems.push_back(name);
    auto& st = s.per_system[name];
    st.overall.precision = p;
    st.overall.f1 = f1;
  }
  return s;
}

UnifiedAnnotationSet run(BaselineKind kind, const std::vector<MentionGroup>& gs,
                         std::optional<SystemTrainingStats> pr = std::nullopt, std::uint64_t seed = 1,
                         bool mean = false) {
  return apply_baseline({kind, std::move(pr), seed, mean}, gs);
}

}  // namespace

TEST(Baselines, Names) {
  for (auto k : kAllBaselines) EXPECT_EQ(parse_baseline_kind(to_string(k)), k);
  EXPECT_FALSE(parse_baseline_kind("oracle"));
  EXPECT_FALSE(needs_priors(BaselineKind::kRandom));
  EXPECT_TRUE(needs_priors(BaselineKind::kWeightedVoting));
}

TEST(Baselines, MajorityPlurality) {
  const std::vector<MentionGroup> gs = {group({{"A", "e1"}, {"B", "e1"}, {"C", "e2"}})};
  const auto pr = priors({{"A", 0.5, 0.5}, {"B", 0.6, 0.6}, {"C", 0.9, 0.9}});
  for (auto k : {BaselineKind::kMajorityRandom, BaselineKind::kMajorityBest}) {
    const auto out = run(k, gs, pr);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out.annotations[0].annotation.entity, E("e1"));
    EXPECT_EQ(out.annotations[0].path, to_string(k));
  }
}

TEST(Baselines, MajorityBestResolvesTiesByF1) {
  const std::vector<MentionGroup> gs = {group({{"A", "e1"}, {"B", "e2"}, {"C", "e3"}}),
                                        group({{"A", "e1"}, {"B", "e1"}, {"C", "e2"}, {"D", "e2"}}, {}, "d1", 9)};
  const auto pr = priors({{"A", 0.5, 0.5}, {"B", 0.6, 0.8}, {"C", 0.9, 0.6}, {"D", 0.1, 0.1}});
  const auto out = run(BaselineKind::kMajorityBest, gs, pr);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out.annotations[0].system, "B");
  EXPECT_EQ(out.annotations[1].system, "B");  // 2-2 split is a tie
}

TEST(Baselines, MajorityMatchesLonghandVote) {
  Rng rng(21);
  const std::vector<std::string> systems = {"A", "B", "C", "D"};
  for (int trial = 0; trial < 2000; ++trial) {
    SystemTrainingStats pr;
    pr.systems = systems;
    for (const auto& s : systems) pr.per_system[s].overall.f1 = static_cast<double>(uniform_index(rng, 4)) / 4;
    MentionGroup g;
    g.mention = {"doc", "x", static_cast<std::size_t>(trial)};
    for (const auto& s : systems) {
      if (uniform01(rng) < 0.75) g.per_system[s] = E("e" + std::to_string(uniform_index(rng, 3)));
    }
    if (g.per_system.empty()) continue;
    const std::vector<MentionGroup> one = {g};
    ASSERT_EQ(run(BaselineKind::kMajorityRandom, one, pr, 5).annotations[0].system,
              oracle::plurality(g, true, pr, 5));
    ASSERT_EQ(run(BaselineKind::kMajorityBest, one, pr, 5).annotations[0].system,
              oracle::plurality(g, false, pr, 5));
  }
}

TEST(Baselines, WeightedVotingThreshold) {
  const auto pr = priors({{"A", 0.6, 0.6}, {"B", 0.8, 0.8}, {"C", 0.8, 0.8}});
  // e1 scores 0.6 + 0.8 = 1.4 against the 0.8 threshold; emitted.
  std::vector<MentionGroup> gs = {group({{"A", "e1"}, {"B", "e1"}, {"C", "e2"}})};
  auto out = run(BaselineKind::kWeightedVoting, gs, pr);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out.annotations[0].annotation.entity, E("e1"));
  EXPECT_EQ(out.annotations[0].system, "B");
  // A alone scores 0.6 < 0.8; dropped, unless the _all variant is used.
  gs = {group({{"A", "e1"}})};
  EXPECT_EQ(run(BaselineKind::kWeightedVoting, gs, pr).size(), 0u);
  EXPECT_EQ(run(BaselineKind::kWeightedVotingAll, gs, pr).size(), 1u);
  // Mean scoring: e1 averages 0.7 < 0.8, e2 scores 0.8.
  gs = {group({{"A", "e1"}, {"B", "e1"}, {"C", "e2"}})};
  out = run(BaselineKind::kWeightedVoting, gs, pr, 1, true);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out.annotations[0].annotation.entity, E("e2"));
}

TEST(Baselines, WeightedVotingAllEqualsMajorityWithEqualWeights) {
  Rng rng(22);
  const auto pr = priors({{"A", 0.5, 0.5}, {"B", 0.5, 0.5}, {"C", 0.5, 0.5}, {"D", 0.5, 0.5}});
  for (int trial = 0; trial < 1000; ++trial) {
    MentionGroup g;
    g.mention = {"doc", "x", static_cast<std::size_t>(trial)};
    for (const auto& s : pr.systems) {
      if (uniform01(rng) < 0.8) g.per_system[s] = E("e" + std::to_string(uniform_index(rng, 3)));
    }
    if (g.per_system.empty()) continue;
    std::map<std::string, int> votes;
    for (const auto& [s, e] : g.per_system) votes[e.value()]++;
    int top = 0, at_top = 0;
    for (const auto& [e, c] : votes) top = std::max(top, c);
    for (const auto& [e, c] : votes) at_top += c == top;
    if (at_top > 1) continue;
    const std::vector<MentionGroup> one = {g};
    ASSERT_EQ(run(BaselineKind::kWeightedVotingAll, one, pr).annotations[0].annotation.entity,
              run(BaselineKind::kMajorityRandom, one, pr).annotations[0].annotation.entity);
  }
}

TEST(Baselines, UpperBound) {
  std::vector<MentionGroup> gs = {group({{"A", "e2"}, {"B", "e1"}}, "e1"), group({{"A", "e2"}}, "e1", "d1", 9),
                                  group({}, "e3", "d1", 19), group({{"A", "e5"}}, std::nullopt, "d1", 29)};
  const auto out = run(BaselineKind::kUpperBound, gs);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out.annotations[0].system, "B");
  EXPECT_EQ(out.annotations[0].annotation.entity, E("e1"));
  GroundTruth gt;
  for (const auto& g : gs) {
    if (g.gold) gt.annotations.push_back({g.mention, *g.gold});
  }
  EXPECT_EQ(el_prf(out, gt).precision, 1.0);
  const std::vector<MentionGroup> no_gold = {group({{"A", "e1"}})};
  EXPECT_THROW(run(BaselineKind::kUpperBound, no_gold), ValidationError);
}

TEST(Baselines, RandomAndBestSystem) {
  const std::vector<MentionGroup> gs = {group({{"A", "e1"}, {"B", "e2"}}), group({{"C", "e3"}}, {}, "d1", 9)};
  const auto a = run(BaselineKind::kRandom, gs, std::nullopt, 3);
  EXPECT_EQ(a.size(), 2u);
  EXPECT_EQ(a.annotations[1].system, "C");
  // Independent of processing order.
  const std::vector<MentionGroup> rev = {gs[1], gs[0]};
  EXPECT_EQ(run(BaselineKind::kRandom, rev, std::nullopt, 3).annotations[1].system, a.annotations[0].system);

  const auto pr = priors({{"A", 0.9, 0.4}, {"B", 0.1, 0.7}, {"C", 0.5, 0.5}});
  const auto best = run(BaselineKind::kBestSystem, gs, pr);
  EXPECT_EQ(best.annotations[0].system, "B");
  EXPECT_THROW(run(BaselineKind::kBestSystem, gs), ValidationError);
  const auto partial = priors({{"A", 0.9, 0.4}});
  EXPECT_THROW(run(BaselineKind::kBestSystem, gs, partial), ValidationError);
}

TEST(Baselines, RandomIsUniformish) {
  std::map<std::string, int> hits;
  for (std::size_t i = 0; i < 3000; ++i) {
    const std::vector<MentionGroup> one = {group({{"A", "e1"}, {"B", "e2"}, {"C", "e3"}}, {}, "d1", i)};
    hits[run(BaselineKind::kRandom, one, std::nullopt, 4).annotations[0].system]++;
  }
  for (const auto& [s, n] : hits) EXPECT_NEAR(n, 1000, 120) << s;
}

TEST(Baselines, NeverInventEntities) {
  Rng rng(23);
  const auto pr = priors({{"A", 0.3, 0.3}, {"B", 0.6, 0.5}, {"C", 0.9, 0.2}});
  std::vector<MentionGroup> gs;
  for (std::size_t i = 0; i < 500; ++i) {
    MentionGroup g;
    g.mention = {"d", "x", i};
    for (const auto& s : pr.systems) {
      if (uniform01(rng) < 0.6) g.per_system[s] = E("e" + std::to_string(uniform_index(rng, 4)));
    }
    g.gold = E("e" + std::to_string(uniform_index(rng, 4)));
    gs.push_back(g);
  }
  for (auto k : kAllBaselines) {
    const auto out = run(k, gs, pr);
    std::size_t gi = 0;
    for (const auto& u : out.annotations) {
      while (gs[gi].mention != u.annotation.mention) ++gi;
      ASSERT_TRUE(gs[gi].entity_of(u.system));
      ASSERT_EQ(*gs[gi].entity_of(u.system), u.annotation.entity);
    }
  }
}
