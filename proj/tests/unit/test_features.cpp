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
#include <cctype>
#include <sstream>

#include "../support/builders.hpp"
#include "metael/features.hpp"
#include "metael/rng.hpp"

using namespace metael;
using fixture::group;

namespace {

// Naive ASCII scans used as references.
std::size_t naive_occurrences(std::string hay, std::string needle) {
  for (auto& c : hay) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  for (auto& c : needle) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  std::size_t n = 0;
  for (std::size_t i = 0; i + needle.size() <= hay.size(); ++i) n += hay.compare(i, needle.size(), needle) == 0;
  return n;
}

std::size_t naive_sentence(const std::string& doc, std::size_t begin, std::size_t end) {
  auto mark = [](char c) { return c == '.' || c == '!' || c == '?' || c == ';'; };
  std::size_t l = begin;
  while (l > 0 && !mark(doc[l - 1])) --l;
  std::size_t r = end;
  while (r < doc.size() && !mark(doc[r])) ++r;
  return (r < doc.size() ? r + 1 : r) - l;
}

SystemTrainingStats empty_stats(std::span<const std::string> systems) {
  return build_training_stats(std::span<const MentionGroup>{}, systems);
}

}  // namespace

TEST(Features, HandScannedDocument) {
  const std::string doc = "Jordan played. Jordan won!";
  ASSERT_EQ(doc.size(), 26u);
  const auto c = fixture::corpus({{"d1", doc}});
  const std::vector<MentionGroup> gs = {group({{"A", "e1"}}, "e1", "d1", 0, "Jordan"),
                                        group({{"A", "e1"}}, "e1", "d1", 15, "Jordan")};
  const CorpusIndex index(c, gs);
  const std::vector<std::string> systems = {"A"};
  const auto stats = empty_stats(systems);
  const auto fv = extract_features(gs[0], index, CandidateDictionary{}, stats, systems);
  EXPECT_EQ(fv.s_f, naive_occurrences(doc, "Jordan"));
  EXPECT_EQ(fv.s_f, 2u);
  EXPECT_EQ(fv.m_sent, naive_sentence(doc, 0, 6));
  EXPECT_EQ(fv.m_sent, 14u);
  EXPECT_EQ(fv.m_pos, 0.0);
  EXPECT_EQ(fv.s_words, 1u);
  EXPECT_EQ(fv.s_df, 1u);
  EXPECT_EQ(fv.s_cand, 0u);
  EXPECT_EQ(fv.d_words, 4u);
  EXPECT_EQ(fv.d_ents, 2u);

  const auto second = extract_features(gs[1], index, CandidateDictionary{}, stats, systems);
  EXPECT_EQ(second.m_sent, naive_sentence(doc, 15, 21));
  EXPECT_DOUBLE_EQ(second.m_pos, 15.0 / 26.0);
}

TEST(Features, CaseInsensitiveOverlappingCounts) {
  const auto c = fixture::corpus({{"d1", "aaa AA"}, {"d2", "nothing"}, {"d3", "Aa"}});
  const std::vector<MentionGroup> gs = {group({{"A", "e"}}, std::nullopt, "d1", 0, "aa")};
  const CorpusIndex index(c, gs);
  EXPECT_EQ(index.occurrences(0, "aa"), naive_occurrences("aaa AA", "aa"));
  EXPECT_EQ(index.occurrences(0, "AA"), 3u);
  EXPECT_EQ(index.document_frequency("aA"), 2u);
}

TEST(Features, SentenceMarksInsideMentionIgnored) {
  const std::u32string doc = U"He met J.R. Smith today. Then left";
  EXPECT_EQ(sentence_length(doc, 7, 17), 24u);
  EXPECT_EQ(sentence_length(doc, 25, 29), 10u);
}

TEST(Features, CandidateDictionaryLookup) {
  auto in = fixture::lines({"Jordan\t12", "washington  wizards\t1"});
  const auto cand = parse_candidate_dictionary(in, "cand.tsv");
  EXPECT_EQ(cand.lookup("JORDAN"), 12u);
  EXPECT_EQ(cand.lookup("Washington Wizards"), 1u);
  EXPECT_EQ(cand.lookup("Pippen"), 0u);
  auto bad = fixture::lines({"Jordan\t-1"});
  EXPECT_THROW(parse_candidate_dictionary(bad, "cand.tsv"), ValidationError);
  auto missing = fixture::lines({"Jordan"});
  EXPECT_THROW(parse_candidate_dictionary(missing, "cand.tsv"), ValidationError);
}

TEST(TrainingStats, Bookkeeping) {
  const std::vector<std::string> systems = {"A", "B", "C"};
  const std::vector<MentionGroup> one = {group({{"A", "e1"}, {"B", "e2"}}, "e1")};
  auto s = build_training_stats(one, systems);
  EXPECT_EQ(s.counts("A", "jordan").correct, 1u);
  EXPECT_EQ(s.counts("A", "jordan").wrong, 0u);
  EXPECT_EQ(s.counts("B", "Jordan").wrong, 1u);
  EXPECT_TRUE(s.at("C").surfaces.empty());

  const std::vector<MentionGroup> two = {group({{"A", "e1"}}, "e1", "d1", 0),
                                         group({{"A", "e2"}}, "e2", "d1", 30)};
  s = build_training_stats(two, systems);
  EXPECT_EQ(s.counts("A", "Jordan").correct, 2u);
  EXPECT_DOUBLE_EQ(s.at("A").overall_precision(), 1.0);
  EXPECT_DOUBLE_EQ(s.at("A").overall_f1(), 1.0);
  EXPECT_EQ(s.at("B").overall_f1(), 0.0);
  EXPECT_THROW(build_training_stats(two, std::span<const std::string>{}), ValidationError);
}

TEST(TrainingStats, CorrectCountBoundedByPresence) {
  Rng rng(8);
  const std::vector<std::string> systems = {"A", "B"};
  const std::vector<std::string> surfaces = {"Jordan", "Bulls", "Chicago Bulls"};
  std::vector<MentionGroup> gs;
  for (std::size_t i = 0; i < 300; ++i) {
    MentionGroup g;
    g.mention = {"d1", surfaces[uniform_index(rng, 3)], i * 20};
    for (const auto& s : systems) {
      if (uniform01(rng) < 0.7) g.per_system[s] = fixture::E("e" + std::to_string(uniform_index(rng, 2)));
    }
    g.gold = fixture::E("e" + std::to_string(uniform_index(rng, 2)));
    gs.push_back(g);
  }
  const auto stats = build_training_stats(gs, systems);
  for (const auto& s : systems) {
    for (const auto& surf : surfaces) {
      std::size_t present = 0;
      for (const auto& g : gs) present += g.mention.surface == surf && g.entity_of(s);
      const auto c = stats.counts(s, surf);
      EXPECT_LE(c.correct, present);
      EXPECT_EQ(c.correct + c.wrong, present);
    }
  }
}

TEST(Features, RatioBacksOffToOverallPrecision) {
  const auto c = fixture::corpus({{"d1", "Jordan and Pippen"}});
  const std::vector<std::string> systems = {"A"};
  const std::vector<MentionGroup> train = {group({{"A", "e1"}}, "e1", "d1", 0, "Jordan"),
                                           group({{"A", "e2"}}, "e3", "d1", 11, "Pippen"),
                                           group({{"A", "e4"}}, std::nullopt, "d1", 7, "and")};
  const auto stats = build_training_stats(train, systems);
  const CorpusIndex index(c, train);
  const auto seen = extract_features(train[0], index, {}, stats, systems);
  EXPECT_EQ(seen.s_ratio[0], 1.0);
  EXPECT_EQ(seen.s_corr[0], 1u);
  const auto unseen = extract_features(train[2], index, {}, stats, systems);
  EXPECT_DOUBLE_EQ(unseen.s_ratio[0], 1.0 / 3.0);
  EXPECT_EQ(unseen.s_corr[0], 0u);
}

TEST(Features, VectorLayout) {
  FeatureVector fv;
  fv.s_words = 1;
  fv.s_f = 2;
  fv.s_df = 3;
  fv.s_cand = 4;
  fv.m_pos = 0.5;
  fv.m_sent = 6;
  fv.d_words = 7;
  fv.d_ents = 8;
  fv.systems = {"A", "B", "C"};
  fv.s_corr = {10, 20, 30};
  fv.s_ratio = {0.1, 0.2, 0.3};
  const std::vector<std::string> abc = {"A", "B", "C"};
  const auto x = vectorize(fv, abc);
  ASSERT_EQ(x.size(), 14u);
  EXPECT_EQ(vector_length(3), 14u);
  EXPECT_EQ(x, (std::vector<double>{1, 2, 3, 4, 0.5, 6, 7, 8, 10, 0.1, 20, 0.2, 30, 0.3}));

  const std::vector<std::string> cab = {"C", "A", "B"};
  const auto y = vectorize(fv, cab);
  EXPECT_TRUE(std::equal(x.begin(), x.begin() + 8, y.begin()));
  EXPECT_EQ(std::vector<double>(y.begin() + 8, y.end()), (std::vector<double>{30, 0.3, 10, 0.1, 20, 0.2}));

  const std::vector<std::string> wrong = {"A", "B", "D"};
  EXPECT_THROW(vectorize(fv, wrong), ValidationError);

  const auto masked = vectorize(fv, abc, FeatureMask::all().without(Feature::kSCorr).without(Feature::kMPos));
  EXPECT_EQ(masked.size(), vector_length(3, FeatureMask::all().without(Feature::kSCorr).without(Feature::kMPos)));
  EXPECT_EQ(masked.size(), 10u);

  FeatureVector zero;
  zero.systems = abc;
  zero.s_corr = {0, 0, 0};
  zero.s_ratio = {0, 0, 0};
  for (double v : vectorize(zero, abc)) EXPECT_EQ(v, 0.0);
}

TEST(Features, MaskNames) {
  EXPECT_EQ(FeatureMask::surface().count() + FeatureMask::mention().count() + FeatureMask::document().count(),
            kFeatureCount);
  const std::vector<std::string> names = {"s_f", "d_ents"};
  const auto m = FeatureMask::from_names(names);
  EXPECT_EQ(m.names(), names);
  EXPECT_THROW(parse_feature("s_magic"), ValidationError);
}

// Generated documents: range invariants, monotone m_pos, d_ents consistency.
TEST(Features, InvariantsOnGeneratedDocuments) {
  Rng rng(9);
  static const std::vector<std::string> words = {"Jordan", "played", "Bulls", "won.", "Chicago;", "Über", "?", "and"};
  const std::vector<std::string> systems = {"A", "B"};
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Document> docs;
    for (int d = 0; d < 3; ++d) {
      std::string t;
      const std::size_t n = 3 + uniform_index(rng, 15);
      for (std::size_t i = 0; i < n; ++i) t += (i ? " " : "") + words[uniform_index(rng, words.size())];
      docs.push_back({"d" + std::to_string(d), t});
    }
    const Corpus c(docs);
    std::vector<MentionGroup> gs;
    for (const auto& d : docs) {
      const auto dec = text::decode_utf8(d.text);
      for (std::size_t pos = 0; pos < dec.size(); pos += 1 + uniform_index(rng, 6)) {
        const std::size_t len = 1 + uniform_index(rng, std::min<std::size_t>(6, dec.size() - pos));
        const std::string surface = text::encode_utf8(dec.substr(pos, len));
        if (text::trim(text::decode_utf8(surface)).size() != text::length(surface)) continue;
        MentionGroup g;
        g.mention = {d.id, surface, pos};
        g.per_system["A"] = fixture::E("e" + std::to_string(uniform_index(rng, 3)));
        if (uniform01(rng) < 0.5) g.per_system["B"] = fixture::E("e1");
        g.gold = fixture::E("e1");
        gs.push_back(g);
      }
    }
    const auto stats = build_training_stats(gs, systems);
    const CorpusIndex index(c, gs);
    std::map<std::string, std::size_t> per_doc;
    for (const auto& g : gs) ++per_doc[g.mention.doc_id];
    double last_pos = -1;
    std::string last_doc;
    for (const auto& g : gs) {
      const auto fv = extract_features(g, index, {}, stats, systems);
      ASSERT_EQ(fv, extract_features(g, index, {}, stats, systems));
      ASSERT_GE(fv.s_words, 1u);
      ASSERT_GE(fv.s_f, 1u);
      ASSERT_GE(fv.s_df, 1u);
      ASSERT_GE(fv.m_pos, 0.0);
      ASSERT_LE(fv.m_pos, 1.0);
      ASSERT_GE(fv.m_sent, g.mention.length());
      ASSERT_EQ(fv.d_ents, per_doc[g.mention.doc_id]);
      for (double r : fv.s_ratio) {
        ASSERT_GE(r, 0.0);
        ASSERT_LE(r, 1.0);
      }
      if (g.mention.doc_id == last_doc) {
        ASSERT_GE(fv.m_pos, last_pos);
      }
      last_doc = g.mention.doc_id;
      last_pos = fv.m_pos;
    }
  }
}
