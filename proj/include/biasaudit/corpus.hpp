// Copyright 2026 The biasaudit Authors.
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

// Document/corpus data model, line-delimited JSON ingestion and the
// deterministic sentence segmenter every downstream analysis relies on.

#pragma once

#include <array>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "biasaudit/common.hpp"

namespace biasaudit {

struct Document {
  std::string id;
  Gender gender = Gender::male;
  std::string text;
  std::optional<std::string> context;    // source biography (context-based generation only)
  std::optional<std::string> prompt;
  std::optional<std::string> source_id;  // links counterfactual pairs
  nlohmann::json metadata = nlohmann::json::object();

  bool operator==(const Document&) const = default;
};

inline void validate(const Document& doc) {
  if (doc.id.empty()) throw ValidationError("document id is empty");
  if (text::trim(doc.text).empty())
    throw ValidationError("document '" + doc.id + "' has empty text");
  if (doc.context && !doc.source_id)
    throw ValidationError("document '" + doc.id + "' has a context but no source_id");
  if (!doc.metadata.is_object())
    throw ValidationError("document '" + doc.id + "' metadata is not an object");
}

struct GenderedCorpora {
  std::string name;
  std::vector<Document> male_docs;
  std::vector<Document> female_docs;

  bool operator==(const GenderedCorpora&) const = default;

  std::size_t size() const { return male_docs.size() + female_docs.size(); }

  const std::vector<Document>& docs(Gender g) const {
    return g == Gender::male ? male_docs : female_docs;
  }

  // Partitions documents by gender and checks id uniqueness.
  static GenderedCorpora from_documents(std::string name, std::vector<Document> docs) {
    GenderedCorpora c;
    c.name = std::move(name);
    std::set<std::string> seen;
    for (auto& d : docs) {
      validate(d);
      if (!seen.insert(d.id).second)
        throw ValidationError("duplicate document id '" + d.id + "'");
      (d.gender == Gender::male ? c.male_docs : c.female_docs).push_back(std::move(d));
    }
    return c;
  }

  template <class Fn>
  void for_each(Fn&& fn) const {
    for (const auto& d : male_docs) fn(d);
    for (const auto& d : female_docs) fn(d);
  }
};

namespace detail {

inline std::optional<std::string> optional_string(const nlohmann::json& rec, const char* key,
                                                  std::size_t line) {
  auto it = rec.find(key);
  if (it == rec.end() || it->is_null()) return std::nullopt;
  if (!it->is_string())
    throw ValidationError("line " + std::to_string(line) + ": field '" + key +
                          "' must be a string");
  return it->get<std::string>();
}

inline std::string required_string(const nlohmann::json& rec, const char* key, std::size_t line) {
  auto v = optional_string(rec, key, line);
  if (!v)
    throw ValidationError("line " + std::to_string(line) + ": missing field '" + key + "'");
  return *v;
}

}  // namespace detail

inline Document document_from_json(const nlohmann::json& rec, std::size_t line = 0) {
  if (!rec.is_object())
    throw ValidationError("line " + std::to_string(line) + ": record is not an object");
  Document d;
  d.id = detail::required_string(rec, "id", line);
  const std::string g = detail::required_string(rec, "gender", line);
  try {
    d.gender = parse_gender(g);
  } catch (const ValidationError& e) {
    throw ValidationError("line " + std::to_string(line) + ": " + e.what());
  }
  d.text = detail::required_string(rec, "text", line);
  d.context = detail::optional_string(rec, "context", line);
  d.prompt = detail::optional_string(rec, "prompt", line);
  d.source_id = detail::optional_string(rec, "source_id", line);
  if (auto it = rec.find("metadata"); it != rec.end() && !it->is_null()) {
    if (!it->is_object())
      throw ValidationError("line " + std::to_string(line) + ": field 'metadata' must be an object");
    d.metadata = *it;
  }
  try {
    validate(d);
  } catch (const ValidationError& e) {
    throw ValidationError("line " + std::to_string(line) + ": " + e.what());
  }
  return d;
}

inline nlohmann::json to_json(const Document& d) {
  nlohmann::json j = nlohmann::json::object();
  j["id"] = d.id;
  j["gender"] = std::string(to_string(d.gender));
  j["text"] = d.text;
  if (d.context) j["context"] = *d.context;
  if (d.prompt) j["prompt"] = *d.prompt;
  if (d.source_id) j["source_id"] = *d.source_id;
  if (!d.metadata.empty()) j["metadata"] = d.metadata;
  return j;
}

// Reads one JSON record per line; blank lines are skipped.
inline GenderedCorpora read_corpus(std::istream& in, std::string name) {
  std::vector<Document> docs;
  std::map<std::string, std::size_t> first_line;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ValidationError("line " + std::to_string(lineno) + ": malformed JSON (" + e.what() + ")");
    }
    Document d = document_from_json(rec, lineno);
    auto [it, inserted] = first_line.emplace(d.id, lineno);
    if (!inserted)
      throw ValidationError("line " + std::to_string(lineno) + ": duplicate id '" + d.id +
                            "' (first seen on line " + std::to_string(it->second) + ")");
    docs.push_back(std::move(d));
  }
  return GenderedCorpora::from_documents(std::move(name), std::move(docs));
}

enum class CorpusFormat { jsonl };

inline GenderedCorpora load_corpus(const std::string& path, CorpusFormat = CorpusFormat::jsonl) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open corpus file '" + path + "'");
  return read_corpus(in, path);
}

inline void write_corpus(std::ostream& out, const GenderedCorpora& c) {
  c.for_each([&](const Document& d) { out << to_json(d).dump() << '\n'; });
}

// ---------------------------------------------------------------------------
// Sentence segmentation

struct SentenceSpan {
  std::string doc_id;
  std::size_t index = 0;
  std::size_t start = 0;  // byte offsets into the document text, [start, end)
  std::size_t end = 0;
  std::string text;

  bool operator==(const SentenceSpan&) const = default;
};

inline const std::array<std::string_view, 8>& sentence_abbreviations() {
  static const std::array<std::string_view, 8> kAbbrev = {
      "dr.", "mr.", "ms.", "mrs.", "prof.", "e.g.", "i.e.", "etc."};
  return kAbbrev;
}

namespace detail {

inline bool is_terminator(char c) { return c == '.' || c == '!' || c == '?'; }
inline bool is_closer(char c) { return c == '"' || c == '\'' || c == ')' || c == ']'; }
inline bool is_opener(char c) { return c == '"' || c == '\'' || c == '(' || c == '['; }

// True when the whitespace-delimited token ending at `dot` is a known abbreviation.
inline bool ends_with_abbreviation(std::string_view text, std::size_t dot) {
  std::size_t b = dot;
  while (b > 0 && !text::is_space(text[b - 1])) --b;
  while (b < dot && is_opener(text[b])) ++b;
  const std::string token = text::lower(text.substr(b, dot - b + 1));
  for (auto a : sentence_abbreviations())
    if (token == a) return true;
  return false;
}

// Position after a '\n', optional horizontal whitespace and a second '\n'; npos otherwise.
inline std::size_t blank_line_end(std::string_view text, std::size_t nl) {
  std::size_t k = nl + 1;
  while (k < text.size() && (text[k] == ' ' || text[k] == '\t' || text[k] == '\r')) ++k;
  if (k < text.size() && text[k] == '\n') return k + 1;
  return std::string_view::npos;
}

}  // namespace detail

// Rule-based segmentation. A sentence ends at a run of '.', '!' or '?'
// (plus trailing closing quotes/brackets) followed by end-of-text or by
// whitespace and an uppercase letter (optionally behind an opening quote or
// bracket). A lone '.' closing a bundled abbreviation never ends a sentence.
// Blank lines always end a sentence. Spans exclude surrounding whitespace.
inline std::vector<SentenceSpan> split_sentences(std::string_view text, std::string_view doc_id = {}) {
  std::vector<SentenceSpan> spans;
  constexpr std::size_t npos = std::string_view::npos;
  const std::size_t n = text.size();
  std::size_t start = npos;
  std::size_t last_nonspace = npos;

  auto close = [&](std::size_t end) {
    if (start == npos) return;
    spans.push_back({std::string(doc_id), spans.size(), start, end,
                     std::string(text.substr(start, end - start))});
    start = npos;
  };

  std::size_t i = 0;
  while (i < n) {
    const char c = text[i];
    if (c == '\n') {
      if (std::size_t k = detail::blank_line_end(text, i); k != npos) {
        if (start != npos) close(last_nonspace + 1);
        i = k;
        continue;
      }
    }
    if (text::is_space(c)) {
      ++i;
      continue;
    }
    if (start == npos) start = i;
    last_nonspace = i;
    if (!detail::is_terminator(c)) {
      ++i;
      continue;
    }
    std::size_t end = i + 1;
    while (end < n && detail::is_terminator(text[end])) ++end;
    while (end < n && detail::is_closer(text[end])) ++end;
    const bool lone_dot = (c == '.' && end == i + 1) ||
                          (c == '.' && end > i + 1 && !detail::is_terminator(text[i + 1]));
    bool boundary = false;
    std::size_t k = end;
    while (k < n && text::is_space(text[k])) ++k;
    if (k == n) {
      boundary = true;
    } else if (k > end) {
      std::size_t m = k;
      while (m < n && detail::is_opener(text[m])) ++m;
      boundary = m < n && text::is_upper(text[m]);
    }
    if (boundary && lone_dot && detail::ends_with_abbreviation(text, i)) boundary = false;
    last_nonspace = end - 1;
    if (boundary) close(end);
    i = end;
  }
  if (start != npos) close(last_nonspace + 1);
  return spans;
}

inline std::vector<SentenceSpan> split_sentences(const Document& doc) {
  return split_sentences(doc.text, doc.id);
}

// ---------------------------------------------------------------------------
// Counterfactual pairing

struct SourcePairing {
  std::vector<std::pair<Document, Document>> pairs;  // (male, female), ordered by source_id
  std::vector<Document> unpaired;
};

inline SourcePairing pair_by_source(const GenderedCorpora& corpora) {
  std::map<std::string, std::array<const Document*, 2>> by_source;
  SourcePairing out;
  corpora.for_each([&](const Document& d) {
    if (!d.source_id) {
      out.unpaired.push_back(d);
      return;
    }
    auto& slot = by_source[*d.source_id][d.gender == Gender::male ? 0 : 1];
    if (slot)
      throw ValidationError("source_id '" + *d.source_id + "' has more than one " +
                            std::string(to_string(d.gender)) + " document ('" + slot->id +
                            "', '" + d.id + "')");
    slot = &d;
  });
  for (const auto& [source, slot] : by_source) {
    if (slot[0] && slot[1]) {
      out.pairs.emplace_back(*slot[0], *slot[1]);
    } else {
      out.unpaired.push_back(slot[0] ? *slot[0] : *slot[1]);
    }
  }
  return out;
}

}  // namespace biasaudit
