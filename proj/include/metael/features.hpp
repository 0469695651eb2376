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

#include <bitset>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "metael/alignment.hpp"
#include "metael/corpus.hpp"
#include "metael/error.hpp"
#include "metael/evaluation.hpp"
#include "metael/text.hpp"

namespace metael {

// ---------------------------------------------------------------------------
// Candidate dictionary
// ---------------------------------------------------------------------------

// Surface form -> number of candidate entities in the reference KB. Keys are
// lower-cased and whitespace-collapsed; unknown surfaces have 0 candidates.
class CandidateDictionary {
 public:
  void add(std::string_view surface, std::size_t count) { counts_[text::surface_key(surface)] += count; }

  std::size_t lookup(std::string_view surface) const {
    auto it = counts_.find(text::surface_key(surface));
    return it == counts_.end() ? 0 : it->second;
  }

  std::size_t size() const { return counts_.size(); }
  const std::unordered_map<std::string, std::size_t>& entries() const { return counts_; }

 private:
  std::unordered_map<std::string, std::size_t> counts_;
};

inline CandidateDictionary parse_candidate_dictionary(std::istream& in, const std::string& source) {
  CandidateDictionary dict;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.rfind('\t');
    if (tab == std::string::npos || tab == 0) {
      throw ValidationError(source + ": line " + std::to_string(lineno) + ": expected surface<TAB>count");
    }
    const std::string count = line.substr(tab + 1);
    std::size_t value = 0;
    std::size_t used = 0;
    try {
      if (count.empty() || count[0] == '-') throw std::invalid_argument("negative");
      value = std::stoull(count, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != count.size()) {
      throw ValidationError(source + ": line " + std::to_string(lineno) + ": bad count '" + count + "'");
    }
    dict.add(line.substr(0, tab), value);
  }
  return dict;
}

inline CandidateDictionary load_candidate_dictionary(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return parse_candidate_dictionary(in, path.string());
}

// ---------------------------------------------------------------------------
// Training statistics
// ---------------------------------------------------------------------------

struct SurfaceCounts {
  std::size_t correct = 0;
  std::size_t wrong = 0;

  friend bool operator==(const SurfaceCounts&, const SurfaceCounts&) = default;
};

struct SystemStats {
  std::map<std::string, SurfaceCounts> surfaces;  // keyed by surface_key
  PrfScore overall;

  double overall_precision() const { return overall.precision; }
  double overall_f1() const { return overall.f1; }
};

struct SystemTrainingStats {
  std::vector<std::string> systems;
  std::map<std::string, SystemStats> per_system;

  const SystemStats& at(const std::string& system) const {
    auto it = per_system.find(system);
    if (it == per_system.end()) throw ValidationError("no training statistics for system '" + system + "'");
    return it->second;
  }

  SurfaceCounts counts(const std::string& system, std::string_view surface) const {
    const auto& s = at(system);
    auto it = s.surfaces.find(text::surface_key(surface));
    return it == s.surfaces.end() ? SurfaceCounts{} : it->second;
  }
};

// Per-system correct/wrong counts per surface over gold-bearing groups, plus
// each system's overall P/R/F1. Groups without gold count as recognised but
// incorrect annotations in the overall score and are ignored per surface.
inline SystemTrainingStats build_training_stats(std::span<const MentionGroup> groups,
                                                std::span<const std::string> systems) {
  if (systems.empty()) throw ValidationError("build_training_stats: empty systems list");
  SystemTrainingStats stats;
  stats.systems.assign(systems.begin(), systems.end());
  std::map<std::string, std::size_t> recognised;
  std::map<std::string, std::size_t> correct;
  std::size_t gold_total = 0;
  for (const auto& sys : systems) {
    if (!stats.per_system.emplace(sys, SystemStats{}).second) {
      throw ValidationError("build_training_stats: duplicate system '" + sys + "'");
    }
  }
  for (const auto& g : groups) {
    if (g.gold) ++gold_total;
    const std::string key = text::surface_key(g.mention.surface);
    for (const auto& sys : systems) {
      const auto* e = g.entity_of(sys);
      if (e == nullptr) continue;
      ++recognised[sys];
      if (!g.gold) continue;
      auto& c = stats.per_system[sys].surfaces[key];
      if (*e == *g.gold) {
        ++c.correct;
        ++correct[sys];
      } else {
        ++c.wrong;
      }
    }
  }
  for (const auto& sys : systems) {
    stats.per_system[sys].overall = make_prf(correct[sys], recognised[sys], gold_total);
  }
  return stats;
}

// ---------------------------------------------------------------------------
// Features
// ---------------------------------------------------------------------------

enum class Feature : std::size_t {
  kSWords = 0,
  kSF,
  kSDf,
  kSCand,
  kSCorr,
  kSRatio,
  kMPos,
  kMSent,
  kDWords,
  kDEnts,
};

inline constexpr std::size_t kFeatureCount = 10;

inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "s_words", "s_f", "s_df", "s_cand", "s_corr", "s_ratio", "m_pos", "m_sent", "d_words", "d_ents"};

inline Feature parse_feature(std::string_view name) {
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    if (kFeatureNames[i] == name) return static_cast<Feature>(i);
  }
  throw ValidationError("unknown feature '" + std::string(name) + "'");
}

// Subset of the ten features fed to the learners. Per-system features
// (s_corr, s_ratio) are switched on or off for all systems together.
class FeatureMask {
 public:
  FeatureMask() = default;

  static FeatureMask all() {
    FeatureMask m;
    m.bits_.set();
    return m;
  }
  static FeatureMask none() { return {}; }
  static FeatureMask surface() {
    return of({Feature::kSWords, Feature::kSF, Feature::kSDf, Feature::kSCand, Feature::kSCorr,
               Feature::kSRatio});
  }
  static FeatureMask mention() { return of({Feature::kMPos, Feature::kMSent}); }
  static FeatureMask document() { return of({Feature::kDWords, Feature::kDEnts}); }

  static FeatureMask of(std::initializer_list<Feature> fs) {
    FeatureMask m;
    for (auto f : fs) m.set(f);
    return m;
  }

  FeatureMask& set(Feature f, bool on = true) {
    bits_.set(static_cast<std::size_t>(f), on);
    return *this;
  }
  FeatureMask without(Feature f) const {
    FeatureMask m = *this;
    return m.set(f, false);
  }
  bool has(Feature f) const { return bits_.test(static_cast<std::size_t>(f)); }
  bool empty() const { return bits_.none(); }
  std::size_t count() const { return bits_.count(); }

  FeatureMask operator|(const FeatureMask& o) const {
    FeatureMask m;
    m.bits_ = bits_ | o.bits_;
    return m;
  }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
      if (bits_.test(i)) out.emplace_back(kFeatureNames[i]);
    }
    return out;
  }

  static FeatureMask from_names(std::span<const std::string> names) {
    FeatureMask m;
    for (const auto& n : names) m.set(parse_feature(n));
    return m;
  }

  unsigned long to_ulong() const { return bits_.to_ulong(); }

  friend bool operator==(const FeatureMask&, const FeatureMask&) = default;

 private:
  std::bitset<kFeatureCount> bits_;
};

struct FeatureVector {
  std::size_t s_words = 0;
  std::size_t s_f = 0;
  std::size_t s_df = 0;
  std::size_t s_cand = 0;
  std::vector<std::string> systems;  // order of s_corr / s_ratio
  std::vector<std::size_t> s_corr;
  std::vector<double> s_ratio;
  double m_pos = 0.0;
  std::size_t m_sent = 0;
  std::size_t d_words = 0;
  std::size_t d_ents = 0;

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

inline bool is_sentence_mark(char32_t c) { return c == U'.' || c == U'!' || c == U'?' || c == U';'; }

// Corpus-level statistics for feature extraction: per-document normalised
// text, word counts, group counts, and document frequencies. The corpus
// must outlive the index.
class CorpusIndex {
 public:
  CorpusIndex(const Corpus& corpus, std::span<const MentionGroup> groups) : corpus_(&corpus) {
    folded_.reserve(corpus.size());
    words_.reserve(corpus.size());
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      folded_.push_back(text::to_lower(text::collapse_whitespace(corpus.decoded(i))));
      words_.push_back(text::count_words(corpus.decoded(i)));
    }
    groups_per_doc_.assign(corpus.size(), 0);
    for (const auto& g : groups) {
      ++groups_per_doc_[corpus.index_of(g.mention.doc_id)];
      const std::string key = text::surface_key(g.mention.surface);
      if (!df_.count(key)) df_.emplace(key, compute_df(text::decode_utf8(key)));
    }
  }

  const Corpus& corpus() const { return *corpus_; }

  std::size_t occurrences(std::size_t doc, std::string_view surface) const {
    return count_in(folded_[doc], text::decode_utf8(text::surface_key(surface)));
  }

  std::size_t document_frequency(std::string_view surface) const {
    const std::string key = text::surface_key(surface);
    if (auto it = df_.find(key); it != df_.end()) return it->second;
    return compute_df(text::decode_utf8(key));
  }

  std::size_t words(std::size_t doc) const { return words_[doc]; }
  std::size_t groups_in(std::size_t doc) const { return groups_per_doc_[doc]; }

 private:
  // Overlapping matches: every start offset counts.
  static std::size_t count_in(const std::u32string& hay, const std::u32string& needle) {
    if (needle.empty()) return 0;
    std::size_t n = 0;
    for (auto pos = hay.find(needle); pos != std::u32string::npos; pos = hay.find(needle, pos + 1)) ++n;
    return n;
  }

  std::size_t compute_df(const std::u32string& needle) const {
    std::size_t n = 0;
    for (const auto& d : folded_) {
      if (d.find(needle) != std::u32string::npos) ++n;
    }
    return n;
  }

  const Corpus* corpus_;
  std::vector<std::u32string> folded_;
  std::vector<std::size_t> words_;
  std::vector<std::size_t> groups_per_doc_;
  std::unordered_map<std::string, std::size_t> df_;
};

// Characters of the sentence around [begin, end): from just after the
// previous sentence mark (or document start) through the next mark
// inclusive (or document end). Marks inside the mention are ignored.
inline std::size_t sentence_length(std::u32string_view doc, std::size_t begin, std::size_t end) {
  std::size_t left = begin;
  while (left > 0 && !is_sentence_mark(doc[left - 1])) --left;
  std::size_t right = std::min(end, doc.size());
  while (right < doc.size() && !is_sentence_mark(doc[right])) ++right;
  if (right < doc.size()) ++right;
  return right - left;
}

inline FeatureVector extract_features(const MentionGroup& group, const CorpusIndex& index,
                                      const CandidateDictionary& cand, const SystemTrainingStats& stats,
                                      std::span<const std::string> systems) {
  const Corpus& corpus = index.corpus();
  const std::size_t doc = corpus.index_of(group.mention.doc_id);
  const std::u32string& dtext = corpus.decoded(doc);
  const std::size_t len = group.mention.length();

  FeatureVector fv;
  fv.s_words = text::count_words(group.mention.surface);
  fv.s_f = index.occurrences(doc, group.mention.surface);
  fv.s_df = index.document_frequency(group.mention.surface);
  fv.s_cand = cand.lookup(group.mention.surface);
  fv.systems.assign(systems.begin(), systems.end());
  for (const auto& sys : systems) {
    const auto c = stats.counts(sys, group.mention.surface);
    fv.s_corr.push_back(c.correct);
    const std::size_t seen = c.correct + c.wrong;
    fv.s_ratio.push_back(seen > 0 ? static_cast<double>(c.correct) / static_cast<double>(seen)
                                  : stats.at(sys).overall_precision());
  }
  fv.m_pos = dtext.empty() ? 0.0 : static_cast<double>(group.mention.position) / static_cast<double>(dtext.size());
  fv.m_sent = sentence_length(dtext, group.mention.position, group.mention.position + len);
  fv.d_words = index.words(doc);
  fv.d_ents = index.groups_in(doc);
  return fv;
}

inline std::size_t vector_length(std::size_t n_systems, const FeatureMask& mask = FeatureMask::all()) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    const auto f = static_cast<Feature>(i);
    if (!mask.has(f)) continue;
    n += (f == Feature::kSCorr || f == Feature::kSRatio) ? n_systems : 1;
  }
  return n;
}

// Layout: s_words, s_f, s_df, s_cand, m_pos, m_sent, d_words, d_ents, then
// (s_corr, s_ratio) per system in the given order. Masked features are
// omitted.
inline std::vector<double> vectorize(const FeatureVector& fv, std::span<const std::string> systems,
                                     const FeatureMask& mask = FeatureMask::all()) {
  if (systems.size() != fv.systems.size() ||
      std::set<std::string>(systems.begin(), systems.end()) !=
          std::set<std::string>(fv.systems.begin(), fv.systems.end())) {
    throw ValidationError("vectorize: system list does not match the feature vector");
  }
  std::vector<double> x;
  x.reserve(vector_length(systems.size(), mask));
  auto put = [&](Feature f, double v) {
    if (mask.has(f)) x.push_back(v);
  };
  put(Feature::kSWords, static_cast<double>(fv.s_words));
  put(Feature::kSF, static_cast<double>(fv.s_f));
  put(Feature::kSDf, static_cast<double>(fv.s_df));
  put(Feature::kSCand, static_cast<double>(fv.s_cand));
  put(Feature::kMPos, fv.m_pos);
  put(Feature::kMSent, static_cast<double>(fv.m_sent));
  put(Feature::kDWords, static_cast<double>(fv.d_words));
  put(Feature::kDEnts, static_cast<double>(fv.d_ents));
  for (const auto& sys : systems) {
    const auto k = static_cast<std::size_t>(
        std::find(fv.systems.begin(), fv.systems.end(), sys) - fv.systems.begin());
    put(Feature::kSCorr, static_cast<double>(fv.s_corr[k]));
    put(Feature::kSRatio, fv.s_ratio[k]);
  }
  return x;
}

}  // namespace metael
