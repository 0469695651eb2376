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

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"
#include "metael/error.hpp"
#include "metael/text.hpp"

namespace metael {

// ---------------------------------------------------------------------------
// Entity identifiers
// ---------------------------------------------------------------------------

namespace detail {

inline int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

inline std::string percent_decode(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '%' && i + 2 < s.size()) {
      const int hi = hex_value(s[i + 1]);
      const int lo = hex_value(s[i + 2]);
      if (hi >= 0 && lo >= 0) {
        out.push_back(static_cast<char>(hi * 16 + lo));
        i += 2;
        continue;
      }
    }
    out.push_back(s[i]);
  }
  return out;
}

// Removes "http(s)://<host>/wiki/" or "<host>/resource/" style prefixes.
// Without a scheme the host must contain a dot, so titles such as "AC/DC"
// are left alone.
inline std::string_view strip_kb_prefix(std::string_view s) {
  std::string_view rest = s;
  bool scheme = false;
  for (std::string_view p : {"https://", "http://"}) {
    if (rest.substr(0, p.size()) == p) {
      rest.remove_prefix(p.size());
      scheme = true;
      break;
    }
  }
  const auto slash = rest.find('/');
  if (slash == std::string_view::npos || slash == 0) return s;
  const std::string_view host = rest.substr(0, slash);
  if (host.find(' ') != std::string_view::npos) return s;
  if (!scheme && host.find('.') == std::string_view::npos) return s;
  const std::string_view path = rest.substr(slash + 1);
  for (std::string_view seg : {"wiki/", "resource/"}) {
    if (path.substr(0, seg.size()) == seg) return path.substr(seg.size());
  }
  return s;
}

inline std::string canonicalize_once(std::string_view raw) {
  std::u32string t = text::decode_utf8(raw);
  std::string trimmed = text::encode_utf8(text::trim(t));
  std::string decoded = percent_decode(strip_kb_prefix(trimmed));
  for (auto& c : decoded) {
    if (c == '_') c = ' ';
  }
  std::u32string u =
      std::u32string(text::trim(text::collapse_whitespace(text::decode_utf8(decoded))));
  if (!u.empty()) u[0] = text::to_upper(u[0]);
  return text::encode_utf8(u);
}

}  // namespace detail

// Canonical knowledge-base title. Always non-empty, percent-decoded,
// underscore-free, trimmed, with an upper-cased first character.
class CanonicalEntityId {
 public:
  CanonicalEntityId() = default;

  const std::string& value() const { return value_; }
  bool empty() const { return value_.empty(); }

  friend bool operator==(const CanonicalEntityId&, const CanonicalEntityId&) = default;
  friend auto operator<=>(const CanonicalEntityId&, const CanonicalEntityId&) = default;

 private:
  friend CanonicalEntityId canonicalize_entity(std::string_view raw);
  explicit CanonicalEntityId(std::string v) : value_(std::move(v)) {}

  std::string value_;
};

// Maps any of the URI styles emitted by common linkers onto one title form.
// The rewrite is iterated to a fixed point, which makes it idempotent even
// for inputs such as doubly percent-encoded titles.
inline CanonicalEntityId canonicalize_entity(std::string_view raw) {
  std::string cur(raw);
  for (int guard = 0; guard < 64; ++guard) {
    std::string next = detail::canonicalize_once(cur);
    if (next == cur) break;
    cur = std::move(next);
  }
  if (cur.empty()) {
    throw ValidationError("entity '" + std::string(raw) +
                          "' is empty after canonicalization");
  }
  return CanonicalEntityId(std::move(cur));
}

// ---------------------------------------------------------------------------
// Documents and mentions
// ---------------------------------------------------------------------------

struct Document {
  std::string id;
  std::string text;  // UTF-8

  friend bool operator==(const Document&, const Document&) = default;
};

// A recognised span: document, surface form, and code point offset.
struct Mention {
  std::string doc_id;
  std::string surface;
  std::size_t position = 0;

  // Span length in code points.
  std::size_t length() const { return text::length(surface); }

  friend bool operator==(const Mention&, const Mention&) = default;
};

// Identity of a mention: surfaces compare after whitespace collapsing.
struct MentionKey {
  std::string doc_id;
  std::size_t position = 0;
  std::string surface;

  friend bool operator==(const MentionKey&, const MentionKey&) = default;
  friend auto operator<=>(const MentionKey&, const MentionKey&) = default;
};

inline MentionKey key_of(const Mention& m) {
  return {m.doc_id, m.position, text::collapse_whitespace(m.surface)};
}

struct EntityAnnotation {
  Mention mention;
  CanonicalEntityId entity;

  friend bool operator==(const EntityAnnotation&, const EntityAnnotation&) = default;
};

struct AnnotationSet {
  std::string system_id;
  std::vector<EntityAnnotation> annotations;

  friend bool operator==(const AnnotationSet&, const AnnotationSet&) = default;
};

// Gold annotations; NULL and out-of-KB entries never make it in.
struct GroundTruth {
  std::vector<EntityAnnotation> annotations;

  friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

// Read-only view over a document collection with id lookup and decoded text.
class Corpus {
 public:
  Corpus() = default;

  explicit Corpus(std::vector<Document> docs) : docs_(std::move(docs)) {
    decoded_.reserve(docs_.size());
    for (std::size_t i = 0; i < docs_.size(); ++i) {
      const auto& d = docs_[i];
      if (d.id.empty()) {
        throw ValidationError("document " + std::to_string(i + 1) + ": empty id");
      }
      if (d.text.empty()) {
        throw ValidationError("document '" + d.id + "': empty text");
      }
      if (!index_.emplace(d.id, i).second) {
        throw ValidationError("document '" + d.id + "': duplicate id");
      }
      decoded_.push_back(text::decode_utf8(d.text));
    }
  }

  const std::vector<Document>& documents() const { return docs_; }
  std::size_t size() const { return docs_.size(); }

  bool contains(std::string_view id) const { return index_.count(std::string(id)) > 0; }

  std::size_t index_of(std::string_view id) const {
    auto it = index_.find(std::string(id));
    if (it == index_.end()) {
      throw ValidationError("unknown document id '" + std::string(id) + "'");
    }
    return it->second;
  }

  const Document& document(std::string_view id) const { return docs_[index_of(id)]; }
  const std::u32string& decoded(std::size_t i) const { return decoded_[i]; }
  const std::u32string& decoded(std::string_view id) const { return decoded_[index_of(id)]; }

 private:
  std::vector<Document> docs_;
  std::vector<std::u32string> decoded_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Checks the offset and surface-match invariants of a mention. Returns an
// empty string when valid, otherwise a description of the violation.
inline std::string check_mention(const Corpus& corpus, const Mention& m) {
  if (!corpus.contains(m.doc_id)) return "unknown document id '" + m.doc_id + "'";
  if (m.surface.empty()) return "empty surface";
  const std::u32string& doc = corpus.decoded(m.doc_id);
  const std::u32string surface = text::decode_utf8(m.surface);
  if (m.position + surface.size() > doc.size()) {
    return "span [" + std::to_string(m.position) + ", " +
           std::to_string(m.position + surface.size()) + ") exceeds document '" +
           m.doc_id + "' of length " + std::to_string(doc.size());
  }
  const auto span = std::u32string_view(doc).substr(m.position, surface.size());
  if (text::collapse_whitespace(span) != text::collapse_whitespace(surface)) {
    return "surface '" + m.surface + "' does not match document text '" +
           text::encode_utf8(span) + "' at position " + std::to_string(m.position);
  }
  return {};
}

// ---------------------------------------------------------------------------
// JSON Lines I/O
// ---------------------------------------------------------------------------

namespace detail {

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return in;
}

template <typename Fn>
void for_each_json_line(std::istream& in, const std::string& source, Fn&& fn) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ValidationError(source + ": record " + std::to_string(lineno) +
                            ": malformed JSON: " + e.what());
    }
    if (!j.is_object()) {
      throw ValidationError(source + ": record " + std::to_string(lineno) +
                            ": expected a JSON object");
    }
    fn(j, lineno);
  }
  if (in.bad()) throw IoError(source + ": read error");
}

inline std::string record_error(const std::string& source, std::size_t lineno,
                                const std::string& what) {
  return source + ": record " + std::to_string(lineno) + ": " + what;
}

inline const nlohmann::json& require_field(const nlohmann::json& j, const char* name,
                                           const std::string& source, std::size_t lineno) {
  auto it = j.find(name);
  if (it == j.end()) {
    throw ValidationError(record_error(source, lineno, std::string("missing field '") + name + "'"));
  }
  return *it;
}

inline bool is_null_entity(const nlohmann::json& e) {
  if (e.is_null()) return true;
  if (!e.is_string()) return false;
  const auto& s = e.get_ref<const std::string&>();
  return s == "NULL" || s == "OOKB";
}

}  // namespace detail

inline std::vector<Document> parse_corpus(std::istream& in, const std::string& source) {
  std::vector<Document> docs;
  std::set<std::string> seen;
  detail::for_each_json_line(in, source, [&](const nlohmann::json& j, std::size_t lineno) {
    const auto& id = detail::require_field(j, "id", source, lineno);
    const auto& txt = detail::require_field(j, "text", source, lineno);
    if (!id.is_string() || !txt.is_string()) {
      throw ValidationError(detail::record_error(source, lineno, "'id' and 'text' must be strings"));
    }
    Document d{id.get<std::string>(), txt.get<std::string>()};
    if (d.id.empty()) throw ValidationError(detail::record_error(source, lineno, "empty id"));
    if (d.text.empty()) {
      throw ValidationError(detail::record_error(source, lineno, "document '" + d.id + "' has empty text"));
    }
    if (!seen.insert(d.id).second) {
      throw ValidationError(detail::record_error(source, lineno, "duplicate document id '" + d.id + "'"));
    }
    docs.push_back(std::move(d));
  });
  return docs;
}

inline std::vector<Document> load_corpus(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  return parse_corpus(in, path.string());
}

namespace detail {

// Shared parser for system outputs and ground truth. In gold mode, null
// entities and the NULL/OOKB markers are dropped.
inline std::vector<EntityAnnotation> parse_annotations(std::istream& in, const std::string& source,
                                                       const Corpus& corpus, bool gold) {
  std::vector<EntityAnnotation> out;
  std::set<MentionKey> seen;
  for_each_json_line(in, source, [&](const nlohmann::json& j, std::size_t lineno) {
    const auto& doc = require_field(j, "doc", source, lineno);
    const auto& start = require_field(j, "start", source, lineno);
    const auto& surface = require_field(j, "surface", source, lineno);
    const auto& entity = require_field(j, "entity", source, lineno);
    if (!doc.is_string()) throw ValidationError(record_error(source, lineno, "'doc' must be a string"));
    if (!start.is_number_integer() || start.get<std::int64_t>() < 0) {
      throw ValidationError(record_error(source, lineno, "'start' must be a non-negative integer"));
    }
    if (!surface.is_string()) {
      throw ValidationError(record_error(source, lineno, "'surface' must be a string"));
    }
    if (gold && is_null_entity(entity)) return;
    if (!entity.is_string()) {
      throw ValidationError(record_error(
          source, lineno, gold ? "'entity' must be a string or null" : "'entity' must be a string"));
    }
    Mention m{doc.get<std::string>(), surface.get<std::string>(),
              static_cast<std::size_t>(start.get<std::int64_t>())};
    if (std::string problem = check_mention(corpus, m); !problem.empty()) {
      throw ValidationError(record_error(source, lineno, problem));
    }
    CanonicalEntityId e;
    try {
      e = canonicalize_entity(entity.get<std::string>());
    } catch (const ValidationError& err) {
      throw ValidationError(record_error(source, lineno, err.what()));
    }
    if (!seen.insert(key_of(m)).second) {
      throw ValidationError(record_error(source, lineno, "duplicate mention (" + m.doc_id + ", " +
                                                             std::to_string(m.position) + ", '" +
                                                             m.surface + "')"));
    }
    out.push_back({std::move(m), std::move(e)});
  });
  return out;
}

}  // namespace detail

inline AnnotationSet parse_annotation_set(std::istream& in, const std::string& source,
                                          std::string system_id, const Corpus& corpus) {
  return {std::move(system_id), detail::parse_annotations(in, source, corpus, false)};
}

inline AnnotationSet load_annotation_set(const std::filesystem::path& path, std::string system_id,
                                         const Corpus& corpus) {
  auto in = detail::open_input(path);
  return parse_annotation_set(in, path.string(), std::move(system_id), corpus);
}

inline GroundTruth parse_ground_truth(std::istream& in, const std::string& source,
                                      const Corpus& corpus) {
  return {detail::parse_annotations(in, source, corpus, true)};
}

inline GroundTruth load_ground_truth(const std::filesystem::path& path, const Corpus& corpus) {
  auto in = detail::open_input(path);
  return parse_ground_truth(in, path.string(), corpus);
}

inline nlohmann::json to_json(const EntityAnnotation& a) {
  return {{"doc", a.mention.doc_id},
          {"start", a.mention.position},
          {"surface", a.mention.surface},
          {"entity", a.entity.value()}};
}

inline void write_annotations(std::ostream& out, const std::vector<EntityAnnotation>& anns) {
  for (const auto& a : anns) out << to_json(a).dump() << '\n';
}

inline void write_documents(std::ostream& out, const std::vector<Document>& docs) {
  for (const auto& d : docs) out << nlohmann::json{{"id", d.id}, {"text", d.text}}.dump() << '\n';
}

}  // namespace metael
