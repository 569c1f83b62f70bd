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

#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "biasaudit/common.hpp"
#include "biasaudit/corpus.hpp"

namespace biasaudit {

// Coarse tag set carried by the scoring protocol.
enum class CoarseTag { NOUN, ADJ, VERB, PRON, OTHER };

inline std::string_view to_string(CoarseTag t) {
  switch (t) {
    case CoarseTag::NOUN: return "NOUN";
    case CoarseTag::ADJ: return "ADJ";
    case CoarseTag::VERB: return "VERB";
    case CoarseTag::PRON: return "PRON";
    case CoarseTag::OTHER: return "OTHER";
  }
  return "OTHER";
}

inline CoarseTag parse_tag(std::string_view s) {
  if (s == "NOUN") return CoarseTag::NOUN;
  if (s == "ADJ") return CoarseTag::ADJ;
  if (s == "VERB") return CoarseTag::VERB;
  if (s == "PRON") return CoarseTag::PRON;
  if (s == "OTHER") return CoarseTag::OTHER;
  throw ProtocolError("unknown tag '" + std::string(s) + "'");
}

struct TaggedToken {
  std::string token;
  CoarseTag tag = CoarseTag::OTHER;

  bool operator==(const TaggedToken&) const = default;
};

// Word tokens (letters, digits, UTF-8 bytes and internal hyphens) and single
// punctuation marks, case preserved. This is the tokenization the tagger
// contract is defined over.
inline std::vector<std::string> tokenize_for_tagging(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    if (text::is_space(c)) {
      ++i;
    } else if (text::is_word_byte(c)) {
      std::size_t j = i + 1;
      while (j < s.size() &&
             (text::is_word_byte(s[j]) ||
              (s[j] == '-' && j + 1 < s.size() && text::is_word_byte(s[j + 1]))))
        ++j;
      out.emplace_back(s.substr(i, j - i));
      i = j;
    } else {
      out.emplace_back(1, c);
      ++i;
    }
  }
  return out;
}

// Lowercased word tokens only; punctuation dropped.
inline std::vector<std::string> tokenize_words(std::string_view s) {
  std::vector<std::string> out;
  for (auto& t : tokenize_for_tagging(s))
    if (text::is_word_byte(t.front())) out.push_back(text::lower(t));
  return out;
}

// Tagging backend. Implementations: PretaggedTagger (below) and the
// scoring-protocol tagger in scoring.hpp.
class Tagger {
 public:
  virtual ~Tagger() = default;
  virtual std::vector<TaggedToken> tag(const Document& doc) = 0;
};

class TaggingError : public Error {
 public:
  TaggingError(std::string doc_id, const std::string& what)
      : Error("tagging failed for document '" + doc_id + "': " + what), doc_id_(std::move(doc_id)) {}
  const std::string& doc_id() const { return doc_id_; }

 private:
  std::string doc_id_;
};

// Pass-through for corpora tagged offline. File format: one JSON record per
// line, {"id": ..., "tokens": [["She", "PRON"], ["is", "VERB"], ...]}.
class PretaggedTagger final : public Tagger {
 public:
  PretaggedTagger() = default;
  explicit PretaggedTagger(std::map<std::string, std::vector<TaggedToken>> tags)
      : tags_(std::move(tags)) {}

  static PretaggedTagger from_stream(std::istream& in) {
    std::map<std::string, std::vector<TaggedToken>> tags;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (text::trim(line).empty()) continue;
      try {
        auto rec = nlohmann::json::parse(line);
        std::vector<TaggedToken> toks;
        for (const auto& pair : rec.at("tokens"))
          toks.push_back({pair.at(0).get<std::string>(), parse_tag(pair.at(1).get<std::string>())});
        tags[rec.at("id").get<std::string>()] = std::move(toks);
      } catch (const std::exception& e) {
        throw ValidationError("tag file line " + std::to_string(lineno) + ": " + e.what());
      }
    }
    return PretaggedTagger(std::move(tags));
  }

  std::vector<TaggedToken> tag(const Document& doc) override {
    auto it = tags_.find(doc.id);
    if (it == tags_.end()) throw TaggingError(doc.id, "no pre-tagged tokens");
    return it->second;
  }

 private:
  std::map<std::string, std::vector<TaggedToken>> tags_;
};

}  // namespace biasaudit
