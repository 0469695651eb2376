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

// Seeded generator of a toy entity-linking benchmark: documents with planted
// entity mentions, gold annotations, simulated linker outputs whose accuracy
// depends on mention properties, and a candidate dictionary.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "metael/corpus.hpp"
#include "metael/error.hpp"
#include "metael/rng.hpp"
#include "metael/text.hpp"

namespace metael::synth {

// Mention property under which a simulated system is accurate.
enum class Regime {
  kMultiWord,      // surface has two or more words
  kEarlyPosition,  // mention starts in the first 40% of the document
  kHighFrequency,  // surface occurs at least twice in the document
};

inline std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::kMultiWord: return "multi_word";
    case Regime::kEarlyPosition: return "early_position";
    case Regime::kHighFrequency: return "high_frequency";
  }
  return "?";
}

inline Regime parse_regime(std::string_view s) {
  for (auto r : {Regime::kMultiWord, Regime::kEarlyPosition, Regime::kHighFrequency}) {
    if (to_string(r) == s) return r;
  }
  throw ValidationError("unknown regime '" + std::string(s) + "'");
}

struct SystemProfile {
  Regime regime = Regime::kMultiWord;
  double strong = 0.95;  // P(correct entity) inside the regime
  double weak = 0.45;    // P(correct entity) outside it
  double recall = 0.85;  // P(mention recognised)
};

struct SynthParams {
  std::size_t n_docs = 500;  // per split
  std::size_t vocab = 300;   // number of KB entities
  std::size_t n_systems = 3;
  std::vector<SystemProfile> profiles;  // empty = default_profiles(n_systems)
  std::uint64_t seed = 7;
  double spurious_rate = 0.05;  // per sentence and system
  double null_rate = 0.02;      // planted mentions whose gold entity is NULL
};

// System i is accurate in regime i mod 3.
inline std::vector<SystemProfile> default_profiles(std::size_t n) {
  static constexpr Regime kCycle[] = {Regime::kMultiWord, Regime::kEarlyPosition, Regime::kHighFrequency};
  std::vector<SystemProfile> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i].regime = kCycle[i % 3];
  return out;
}

struct Record {
  std::string doc;
  std::size_t start = 0;
  std::string surface;
  std::optional<std::string> entity;
};

struct Split {
  std::vector<std::pair<std::string, std::string>> documents;  // id, text
  std::vector<Record> gold;
  std::vector<std::vector<Record>> systems;  // per system
};

struct Benchmark {
  std::vector<std::string> system_ids;
  Split train;
  Split test;
  std::map<std::string, std::size_t> candidates;  // surface -> candidate count
};

namespace detail {

inline constexpr std::string_view kOnsets[] = {"b", "d", "f", "g", "k", "l", "m", "n", "p", "r",
                                              "s", "t", "v", "z", "br", "dr", "kr", "st", "th", "tr"};
inline constexpr std::string_view kNuclei[] = {"a", "e", "i", "o", "u", "ai", "ei", "ou", "ar", "or"};
inline constexpr std::string_view kCodas[] = {"", "", "n", "r", "s", "l", "th", "nd", "m", "x"};

inline constexpr std::string_view kFiller[] = {
    "the",     "a",      "of",      "in",     "on",      "after",  "before", "said",   "reported",
    "match",   "season", "team",    "city",   "council", "plan",   "market", "week",   "year",
    "new",     "old",    "first",   "final",  "game",    "deal",   "meeting", "vote",  "with",
    "against", "for",    "and",     "while",  "during",  "today",  "yesterday", "announced",
    "visited", "met",    "signed",  "scored", "won",     "lost",   "played", "opened", "closed",
    "café",    "naïve",  "rôle",    "über",   "officials", "analysts", "fans", "report"};

inline std::string capitalised_word(Rng& rng) {
  std::string w;
  const std::size_t syll = 2 + uniform_index(rng, 2);
  for (std::size_t s = 0; s < syll; ++s) {
    w += kOnsets[uniform_index(rng, std::size(kOnsets))];
    w += kNuclei[uniform_index(rng, std::size(kNuclei))];
    if (s + 1 == syll) w += kCodas[uniform_index(rng, std::size(kCodas))];
  }
  w[0] = static_cast<char>(w[0] - 'a' + 'A');
  return w;
}

struct Entity {
  std::string title;
  std::vector<std::string> surfaces;
  double weight = 1.0;
};

// Emits an entity title in the URI style of system i.
inline std::string entity_uri(const std::string& title, std::size_t system) {
  std::string under = title;
  std::replace(under.begin(), under.end(), ' ', '_');
  switch (system % 3) {
    case 0: return "http://en.wikipedia.org/wiki/" + under;
    case 1: return under;
    default: return "dbpedia.org/resource/" + under;
  }
}

class Generator {
 public:
  explicit Generator(const SynthParams& p) : p_(p), rng_(derive_seed(p.seed, "synth")) {
    profiles_ = p.profiles.empty() ? default_profiles(p.n_systems) : p.profiles;
  }

  Benchmark run() {
    make_entities();
    Benchmark b;
    for (std::size_t i = 0; i < p_.n_systems; ++i) b.system_ids.push_back("sys" + std::to_string(i + 1));
    b.train = make_split("train");
    b.test = make_split("test");
    for (const auto& e : entities_) {
      for (const auto& s : e.surfaces) ++b.candidates[s];
    }
    return b;
  }

 private:
  void make_entities() {
    std::vector<std::string> families;
    std::set<std::string> used;
    while (families.size() < std::max<std::size_t>(8, p_.vocab / 4)) {
      auto w = capitalised_word(rng_);
      if (used.insert(w).second) families.push_back(w);
    }
    std::set<std::string> titles;
    while (entities_.size() < p_.vocab) {
      const double u = uniform01(rng_);
      const std::size_t words = u < 0.4 ? 1 : (u < 0.8 ? 2 : 3);
      std::vector<std::string> parts;
      for (std::size_t w = 0; w + 1 < words; ++w) parts.push_back(capitalised_word(rng_));
      // Last words come from a small pool so aliases are ambiguous.
      parts.push_back(words == 1 && uniform01(rng_) < 0.5 ? capitalised_word(rng_)
                                                         : families[uniform_index(rng_, families.size())]);
      std::string title;
      for (const auto& part : parts) title += (title.empty() ? "" : " ") + part;
      if (!titles.insert(title).second) continue;
      Entity e;
      e.title = title;
      e.surfaces.push_back(title);
      if (words > 1 && uniform01(rng_) < 0.5) e.surfaces.push_back(parts.back());
      e.weight = 1.0 / static_cast<double>(entities_.size() + 1);  // Zipf-like popularity
      entities_.push_back(std::move(e));
    }
    // Shuffle popularity ranks so they are unrelated to generation order.
    for (std::size_t i = entities_.size(); i > 1; --i) {
      std::swap(entities_[i - 1].weight, entities_[uniform_index(rng_, i)].weight);
    }
    total_weight_ = 0.0;
    for (const auto& e : entities_) total_weight_ += e.weight;
    for (std::size_t i = 0; i < entities_.size(); ++i) {
      for (const auto& s : entities_[i].surfaces) by_surface_[s].push_back(i);
    }
  }

  std::size_t draw_entity() {
    double u = uniform01(rng_) * total_weight_;
    for (std::size_t i = 0; i < entities_.size(); ++i) {
      u -= entities_[i].weight;
      if (u < 0) return i;
    }
    return entities_.size() - 1;
  }

  struct Planted {
    std::size_t start = 0;  // code points
    std::string surface;
    std::size_t entity = 0;
    bool null_gold = false;
  };

  Split make_split(const std::string& prefix) {
    Split split;
    split.systems.resize(p_.n_systems);
    for (std::size_t d = 0; d < p_.n_docs; ++d) {
      const std::string id = prefix + "-" + std::to_string(d + 1);
      std::string text;
      std::size_t len = 0;  // code points so far
      std::vector<Planted> planted;
      std::vector<std::pair<std::size_t, std::string>> filler_spans;
      std::vector<std::size_t> doc_entities;
      auto append = [&](const std::string& s) {
        text += s;
        len += text::length(s);
      };
      const std::size_t sentences = 3 + uniform_index(rng_, 4);
      for (std::size_t s = 0; s < sentences; ++s) {
        const std::size_t words = 5 + uniform_index(rng_, 8);
        const std::size_t mentions = 1 + uniform_index(rng_, 2);
        std::set<std::size_t> slots;
        while (slots.size() < mentions) slots.insert(uniform_index(rng_, words));
        if (s > 0) append(" ");
        for (std::size_t w = 0; w < words; ++w) {
          if (w > 0) append(" ");
          if (slots.count(w)) {
            std::size_t ent;
            if (!doc_entities.empty() && uniform01(rng_) < 0.35) {
              ent = doc_entities[uniform_index(rng_, doc_entities.size())];
            } else {
              ent = draw_entity();
              doc_entities.push_back(ent);
            }
            const auto& e = entities_[ent];
            Planted pl{len, e.surfaces[uniform_index(rng_, e.surfaces.size())], ent,
                       uniform01(rng_) < p_.null_rate};
            append(pl.surface);
            planted.push_back(std::move(pl));
          } else {
            const std::string f(kFiller[uniform_index(rng_, std::size(kFiller))]);
            filler_spans.emplace_back(len, f);
            append(f);
          }
        }
        static constexpr std::string_view kMarks[] = {".", ".", ".", "!", "?", ";"};
        append(std::string(kMarks[uniform_index(rng_, std::size(kMarks))]));
      }
      split.documents.emplace_back(id, text);

      std::vector<std::size_t> first_of_doc;
      for (const auto& recs : split.systems) first_of_doc.push_back(recs.size());
      std::map<std::string, std::size_t> surface_freq;
      for (const auto& pl : planted) ++surface_freq[pl.surface];

      for (const auto& pl : planted) {
        split.gold.push_back({id, pl.start, pl.surface,
                              pl.null_gold ? std::nullopt : std::optional<std::string>(entities_[pl.entity].title)});
        for (std::size_t k = 0; k < p_.n_systems; ++k) {
          const auto& prof = profiles_[k];
          if (uniform01(rng_) >= prof.recall) continue;
          bool in_regime = false;
          switch (prof.regime) {
            case Regime::kMultiWord: in_regime = text::count_words(pl.surface) >= 2; break;
            case Regime::kEarlyPosition: in_regime = static_cast<double>(pl.start) < 0.4 * static_cast<double>(len); break;
            case Regime::kHighFrequency: in_regime = surface_freq[pl.surface] >= 2; break;
          }
          const bool correct = uniform01(rng_) < (in_regime ? prof.strong : prof.weak);
          const std::size_t ent = correct ? pl.entity : wrong_entity(pl, k);
          split.systems[k].push_back({id, pl.start, pl.surface, entity_uri(entities_[ent].title, k)});
        }
      }
      // Spurious links on filler words.
      for (std::size_t k = 0; k < p_.n_systems; ++k) {
        const std::size_t doc_begin = first_of_doc[k];
        for (std::size_t s = 0; s < sentences && !filler_spans.empty(); ++s) {
          if (uniform01(rng_) >= p_.spurious_rate) continue;
          const auto& [start, word] = filler_spans[uniform_index(rng_, filler_spans.size())];
          auto& recs = split.systems[k];
          const bool dup = std::any_of(recs.begin() + static_cast<std::ptrdiff_t>(doc_begin), recs.end(),
                                       [&](const Record& r) { return r.start == start; });
          if (dup) continue;
          recs.push_back({id, start, word, entity_uri(entities_[uniform_index(rng_, entities_.size())].title, k)});
        }
        std::stable_sort(split.systems[k].begin() + static_cast<std::ptrdiff_t>(doc_begin), split.systems[k].end(),
                         [](const Record& a, const Record& b) { return a.start < b.start; });
      }
    }
    return split;
  }

  // A wrong entity: another candidate of the same surface when the surface
  // is ambiguous, otherwise a random entity. Systems disagree on which.
  std::size_t wrong_entity(const Planted& pl, std::size_t system) {
    const auto& cands = by_surface_[pl.surface];
    std::vector<std::size_t> others;
    for (auto c : cands) {
      if (c != pl.entity) others.push_back(c);
    }
    if (!others.empty() && uniform01(rng_) < 0.7) {
      return others[(uniform_index(rng_, others.size()) + system) % others.size()];
    }
    std::size_t e = pl.entity;
    while (e == pl.entity) e = uniform_index(rng_, entities_.size());
    return e;
  }

  SynthParams p_;
  Rng rng_;
  std::vector<SystemProfile> profiles_;
  std::vector<Entity> entities_;
  double total_weight_ = 0.0;
  std::map<std::string, std::vector<std::size_t>> by_surface_;
};

inline void write_records(const std::filesystem::path& path, const std::vector<Record>& recs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  for (const auto& r : recs) {
    nlohmann::json j = {{"doc", r.doc}, {"start", r.start}, {"surface", r.surface}};
    j["entity"] = r.entity ? nlohmann::json(*r.entity) : nlohmann::json(nullptr);
    out << j.dump() << '\n';
  }
}

}  // namespace detail

inline void validate(const SynthParams& p) {
  if (p.n_docs == 0) throw ValidationError("synth: n_docs must be positive");
  if (p.vocab < 2) throw ValidationError("synth: vocab must be at least 2");
  if (p.n_systems == 0) throw ValidationError("synth: n_systems must be positive");
  if (!p.profiles.empty() && p.profiles.size() != p.n_systems) {
    throw ValidationError("synth: one profile per system is required");
  }
  auto prob = [](double v, const char* what) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw ValidationError(std::string("synth: ") + what + " must lie in [0, 1]");
    }
  };
  for (const auto& pr : p.profiles) {
    prob(pr.strong, "strong accuracy");
    prob(pr.weak, "weak accuracy");
    prob(pr.recall, "recall");
  }
  prob(p.spurious_rate, "spurious rate");
  prob(p.null_rate, "null rate");
}

// A split parsed through the regular loaders.
struct LoadedSplit {
  Corpus corpus;
  GroundTruth gt;
  std::vector<AnnotationSet> sets;
};

inline LoadedSplit load_split(const Split& split, std::span<const std::string> system_ids) {
  auto records = [](const std::vector<Record>& recs) {
    std::ostringstream out;
    for (const auto& r : recs) {
      nlohmann::json j = {{"doc", r.doc}, {"start", r.start}, {"surface", r.surface}};
      j["entity"] = r.entity ? nlohmann::json(*r.entity) : nlohmann::json(nullptr);
      out << j.dump() << '\n';
    }
    return std::istringstream(out.str());
  };
  std::vector<Document> docs;
  for (const auto& [id, txt] : split.documents) docs.push_back({id, txt});
  LoadedSplit out{Corpus(std::move(docs)), {}, {}};
  auto gin = records(split.gold);
  out.gt = parse_ground_truth(gin, "synthetic gold", out.corpus);
  for (std::size_t k = 0; k < system_ids.size(); ++k) {
    auto in = records(split.systems.at(k));
    out.sets.push_back(parse_annotation_set(in, "synthetic " + system_ids[k], system_ids[k], out.corpus));
  }
  return out;
}

inline Benchmark generate(const SynthParams& params) {
  validate(params);
  return detail::Generator(params).run();
}

// Writes train/ and test/ directories, candidates.tsv and a config.json
// that the CLI subcommands accept directly.
inline void write_benchmark(const Benchmark& b, const std::filesystem::path& dir, std::uint64_t seed) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
  nlohmann::json cfg;
  cfg["systems"] = b.system_ids;
  for (const auto& [name, split] : {std::pair<std::string, const Split*>{"train", &b.train}, {"test", &b.test}}) {
    fs::create_directories(dir / name, ec);
    if (ec) throw IoError("cannot create '" + (dir / name).string() + "': " + ec.message());
    {
      std::ofstream out(dir / name / "documents.jsonl", std::ios::binary);
      if (!out) throw IoError("cannot write documents for " + name);
      for (const auto& [id, txt] : split->documents) out << nlohmann::json{{"id", id}, {"text", txt}}.dump() << '\n';
    }
    detail::write_records(dir / name / "ground_truth.jsonl", split->gold);
    nlohmann::json anns = nlohmann::json::object();
    for (std::size_t k = 0; k < b.system_ids.size(); ++k) {
      detail::write_records(dir / name / (b.system_ids[k] + ".jsonl"), split->systems[k]);
      anns[b.system_ids[k]] = name + "/" + b.system_ids[k] + ".jsonl";
    }
    cfg[name] = {{"documents", name + "/documents.jsonl"},
                 {"ground_truth", name + "/ground_truth.jsonl"},
                 {"annotations", anns}};
  }
  {
    std::ofstream out(dir / "candidates.tsv", std::ios::binary);
    if (!out) throw IoError("cannot write candidates.tsv");
    for (const auto& [s, c] : b.candidates) out << s << '\t' << c << '\n';
  }
  cfg["candidates"] = "candidates.tsv";
  cfg["alignment"] = "strong";
  cfg["seed"] = seed;
  cfg["output_dir"] = "out";
  std::ofstream out(dir / "config.json", std::ios::binary);
  if (!out) throw IoError("cannot write config.json");
  out << cfg.dump(2) << '\n';
}

}  // namespace metael::synth
