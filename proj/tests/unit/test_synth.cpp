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

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "metael/alignment.hpp"
#include "metael/evaluation.hpp"
#include "metael/features.hpp"
#include "metael/synth.hpp"

using namespace metael;
namespace fs = std::filesystem;

namespace {

synth::SynthParams small(std::uint64_t seed = 3) {
  synth::SynthParams p;
  p.n_docs = 20;
  p.vocab = 30;
  p.seed = seed;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Every regular file under dir, keyed by relative path.
std::map<std::string, std::string> tree(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = slurp(e.path());
  }
  return out;
}

fs::path scratch(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("metael_synth_" + name);
  fs::remove_all(d);
  return d;
}

}  // namespace

TEST(Synth, ByteIdenticalForFixedSeed) {
  const auto a = scratch("a"), b = scratch("b");
  synth::write_benchmark(synth::generate(small()), a, 3);
  synth::write_benchmark(synth::generate(small()), b, 3);
  const auto ta = tree(a), tb = tree(b);
  EXPECT_EQ(ta, tb);
  EXPECT_TRUE(ta.count("config.json"));
  EXPECT_TRUE(ta.count("candidates.tsv"));
  for (const std::string split : {"train", "test"}) {
    EXPECT_TRUE(ta.count(split + "/documents.jsonl"));
    EXPECT_TRUE(ta.count(split + "/ground_truth.jsonl"));
    for (int k = 1; k <= 3; ++k) EXPECT_TRUE(ta.count(split + "/sys" + std::to_string(k) + ".jsonl"));
  }
  synth::write_benchmark(synth::generate(small(4)), b, 4);
  EXPECT_NE(tree(b).at("train/documents.jsonl"), ta.at("train/documents.jsonl"));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Synth, WrittenFilesLoad) {
  const auto d = scratch("load");
  const auto bench = synth::generate(small());
  synth::write_benchmark(bench, d, 3);
  const Corpus corpus(load_corpus(d / "test" / "documents.jsonl"));
  EXPECT_EQ(corpus.size(), 20u);
  const auto gt = load_ground_truth(d / "test" / "ground_truth.jsonl", corpus);
  EXPECT_EQ(gt.annotations.size(), synth::load_split(bench.test, bench.system_ids).gt.annotations.size());
  const auto sys = load_annotation_set(d / "test" / "sys2.jsonl", "sys2", corpus);
  EXPECT_EQ(sys.annotations.size(), bench.test.systems[1].size());
  const auto cand = load_candidate_dictionary(d / "candidates.tsv");
  EXPECT_EQ(cand.size(), bench.candidates.size());
  fs::remove_all(d);
}

TEST(Synth, PerfectSystemsReproduceGold) {
  auto p = small();
  p.spurious_rate = 0.0;
  p.null_rate = 0.0;
  p.profiles.assign(3, {synth::Regime::kMultiWord, 1.0, 1.0, 0.9});
  const auto b = synth::generate(p);
  const auto s = synth::load_split(b.test, b.system_ids);
  for (const auto& set : s.sets) {
    const auto score = el_prf(set, s.gt);
    EXPECT_EQ(score.precision, 1.0) << set.system_id;
    EXPECT_EQ(score.recognised, set.annotations.size());
  }
}

TEST(Synth, StructuralInvariants) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto p = small(seed);
    p.n_systems = 4;
    const auto b = synth::generate(p);
    ASSERT_EQ(b.system_ids.size(), 4u);
    for (const auto* split : {&b.train, &b.test}) {
      ASSERT_EQ(split->documents.size(), p.n_docs);
      std::map<std::string, std::u32string> text;
      for (const auto& [id, t] : split->documents) text[id] = text::decode_utf8(t);
      auto check = [&](const synth::Record& r) {
        const auto& t = text.at(r.doc);
        const auto surf = text::decode_utf8(r.surface);
        ASSERT_LE(r.start + surf.size(), t.size());
        EXPECT_EQ(t.substr(r.start, surf.size()), surf);
      };
      for (const auto& r : split->gold) check(r);
      for (const auto& recs : split->systems) {
        std::set<std::pair<std::string, std::size_t>> seen;
        for (const auto& r : recs) {
          check(r);
          EXPECT_TRUE(seen.insert({r.doc, r.start}).second);
          EXPECT_TRUE(r.entity.has_value());
        }
      }
    }
    for (const auto& [surface, n] : b.candidates) EXPECT_GE(n, 1u);
  }
}

TEST(Synth, Validation) {
  auto p = small();
  p.profiles.assign(3, {synth::Regime::kMultiWord, 1.2, 0.4, 0.8});
  EXPECT_THROW(synth::generate(p), ValidationError);
  p.profiles.assign(3, {synth::Regime::kMultiWord, 0.9, -0.1, 0.8});
  EXPECT_THROW(synth::generate(p), ValidationError);
  p.profiles.assign(2, {});
  EXPECT_THROW(synth::generate(p), ValidationError);
  p = small();
  p.n_docs = 0;
  EXPECT_THROW(synth::generate(p), ValidationError);
  p = small();
  p.vocab = 1;
  EXPECT_THROW(synth::generate(p), ValidationError);
  p = small();
  p.null_rate = 2;
  EXPECT_THROW(synth::generate(p), ValidationError);
  EXPECT_EQ(synth::parse_regime("early_position"), synth::Regime::kEarlyPosition);
  EXPECT_THROW(synth::parse_regime("late"), ValidationError);
}
