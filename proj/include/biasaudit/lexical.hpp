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

// Lexical-content bias: POS-filtered word counts, odds ratios per word and
// per trait lexicon, salient-word extraction, and embedding association
// (WEAT) effect sizes.

#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "biasaudit/common.hpp"
#include "biasaudit/corpus.hpp"
#include "biasaudit/lexicon_data.hpp"
#include "biasaudit/tagging.hpp"

namespace biasaudit {

enum class PartOfSpeech { noun, adjective, all_tokens };

inline std::string_view to_string(PartOfSpeech p) {
  switch (p) {
    case PartOfSpeech::noun: return "noun";
    case PartOfSpeech::adjective: return "adjective";
    case PartOfSpeech::all_tokens: return "all_tokens";
  }
  return "all_tokens";
}

inline PartOfSpeech parse_pos(std::string_view s) {
  if (s == "noun") return PartOfSpeech::noun;
  if (s == "adjective") return PartOfSpeech::adjective;
  if (s == "all_tokens") return PartOfSpeech::all_tokens;
  throw ValidationError("unknown part of speech '" + std::string(s) + "'");
}

// Lowercased words of `doc` carrying the requested tag, in document order.
// all_tokens bypasses the tagger entirely.
inline std::vector<std::string> extract_pos_words(const Document& doc, PartOfSpeech pos, Tagger* tagger) {
  if (pos == PartOfSpeech::all_tokens) return tokenize_words(doc.text);
  if (text::trim(doc.text).empty()) return {};
  if (!tagger) throw TaggingError(doc.id, "no tagger configured");
  const CoarseTag want = pos == PartOfSpeech::noun ? CoarseTag::NOUN : CoarseTag::ADJ;
  std::vector<TaggedToken> tagged;
  try {
    tagged = tagger->tag(doc);
  } catch (const TaggingError&) {
    throw;
  } catch (const ScorerError&) {
    throw;
  } catch (const std::exception& e) {
    throw TaggingError(doc.id, e.what());
  }
  std::vector<std::string> out;
  for (const auto& t : tagged)
    if (t.tag == want) out.push_back(text::lower(t.token));
  return out;
}

// ---------------------------------------------------------------------------
// Word counts

struct WordCounts {
  Gender gender = Gender::male;
  PartOfSpeech pos = PartOfSpeech::all_tokens;
  std::map<std::string, std::uint64_t> counts;  // lowercased word -> occurrences (>= 1)
  std::uint64_t total = 0;

  void add(std::string_view word, std::uint64_t n = 1) {
    if (n == 0) return;
    counts[text::lower(word)] += n;
    total += n;
  }

  void merge(const WordCounts& other) {
    for (const auto& [w, n] : other.counts) add(w, n);
  }

  std::uint64_t count(std::string_view word) const {
    auto it = counts.find(text::lower(word));
    return it == counts.end() ? 0 : it->second;
  }

  template <class Range>
  static WordCounts from_words(Gender g, PartOfSpeech pos, const Range& words) {
    WordCounts wc;
    wc.gender = g;
    wc.pos = pos;
    for (const auto& w : words) wc.add(w);
    return wc;
  }
};

inline WordCounts count_words(const GenderedCorpora& corpora, Gender g, PartOfSpeech pos,
                              Tagger* tagger) {
  WordCounts wc;
  wc.gender = g;
  wc.pos = pos;
  for (const auto& d : corpora.docs(g))
    for (const auto& w : extract_pos_words(d, pos, tagger)) wc.add(w);
  return wc;
}

// ---------------------------------------------------------------------------
// Lexicons

struct LexiconPattern {
  std::string stem;  // without the trailing '*'
  bool prefix = false;

  bool matches(std::string_view token) const {
    return prefix ? token.substr(0, stem.size()) == stem && token.size() >= stem.size()
                  : token == stem;
  }
  bool operator==(const LexiconPattern&) const = default;
};

inline LexiconPattern parse_pattern(std::string_view raw) {
  std::string_view p = text::trim(raw);
  if (p.empty()) throw ValidationError("empty lexicon pattern");
  const bool prefix = p.back() == '*';
  if (prefix) p.remove_suffix(1);
  if (p.empty()) throw ValidationError("lexicon pattern '*' has no stem");
  if (p.find('*') != std::string_view::npos)
    throw ValidationError("'*' may only appear at the end of a lexicon pattern: '" + std::string(raw) + "'");
  for (char c : p)
    if (text::is_upper(c))
      throw ValidationError("lexicon pattern must be lowercase: '" + std::string(raw) + "'");
  return {std::string(p), prefix};
}

struct LexiconCategory {
  std::string name;
  std::vector<LexiconPattern> patterns;

  bool matches(std::string_view token) const {
    return std::any_of(patterns.begin(), patterns.end(),
                       [&](const LexiconPattern& p) { return p.matches(token); });
  }
  bool operator==(const LexiconCategory&) const = default;
};

// Lines of the form "<Name>: <item>, <item>, ..."; '#' starts a comment line.
inline std::vector<std::pair<std::string, std::vector<std::string>>> parse_named_lists(std::istream& in) {
  std::vector<std::pair<std::string, std::vector<std::string>>> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view l = text::trim(line);
    if (l.empty() || l.front() == '#') continue;
    auto colon = l.find(':');
    if (colon == std::string_view::npos || text::trim(l.substr(0, colon)).empty())
      throw ValidationError("list file line " + std::to_string(lineno) + ": expected '<name>: <items>'");
    std::vector<std::string> items;
    std::string rest(l.substr(colon + 1));
    std::stringstream ss(rest);
    std::string item;
    while (std::getline(ss, item, ',')) {
      auto t = text::trim(item);
      if (!t.empty()) items.emplace_back(t);
    }
    if (items.empty())
      throw ValidationError("list file line " + std::to_string(lineno) + ": no items");
    out.emplace_back(std::string(text::trim(l.substr(0, colon))), std::move(items));
  }
  return out;
}

inline std::vector<LexiconCategory> parse_lexicons(std::istream& in) {
  std::vector<LexiconCategory> cats;
  for (auto& [name, items] : parse_named_lists(in)) {
    LexiconCategory c{name, {}};
    for (const auto& it : items) c.patterns.push_back(parse_pattern(it));
    cats.push_back(std::move(c));
  }
  return cats;
}

inline std::vector<LexiconCategory> load_lexicons(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open lexicon file '" + path + "'");
  return parse_lexicons(in);
}

// The nine trait categories shipped with the library.
inline const std::vector<LexiconCategory>& bundled_lexicons() {
  static const std::vector<LexiconCategory> kCats = [] {
    std::istringstream in{std::string(data::kLexicons)};
    return parse_lexicons(in);
  }();
  return kCats;
}

inline const LexiconCategory& bundled_lexicon(std::string_view name) {
  for (const auto& c : bundled_lexicons())
    if (c.name == name) return c;
  throw ValidationError("no bundled lexicon named '" + std::string(name) + "'");
}

struct WeatWordLists {
  std::vector<std::string> male_names;
  std::vector<std::string> female_names;
  std::vector<std::string> career;
  std::vector<std::string> family;
};

inline WeatWordLists parse_weat_lists(std::istream& in) {
  WeatWordLists w;
  for (auto& [name, items] : parse_named_lists(in)) {
    if (name == "Male Names") w.male_names = items;
    else if (name == "Female Names") w.female_names = items;
    else if (name == "Career Words") w.career = items;
    else if (name == "Family Words") w.family = items;
    else throw ValidationError("unknown WEAT list '" + name + "'");
  }
  if (w.male_names.empty() || w.female_names.empty() || w.career.empty() || w.family.empty())
    throw ValidationError("WEAT list file must define all four lists");
  return w;
}

inline const WeatWordLists& bundled_weat_lists() {
  static const WeatWordLists kLists = [] {
    std::istringstream in{std::string(data::kWeatLists)};
    return parse_weat_lists(in);
  }();
  return kLists;
}

// ---------------------------------------------------------------------------
// Odds ratio

struct OddsRatioResult {
  std::string key;
  std::uint64_t male_count = 0;
  std::uint64_t female_count = 0;
  std::uint64_t male_total = 0;
  std::uint64_t female_total = 0;
  double or_value = 0.0;  // +inf when `infinite`
  bool infinite = false;
  bool included = true;

  std::uint64_t combined() const { return male_count + female_count; }
};

// Odds of `hits` among the male words against odds among the female words.
// The denominators exclude the counted items themselves.
inline OddsRatioResult odds_ratio_from_counts(std::string key, std::uint64_t male_hits,
                                              std::uint64_t male_total, std::uint64_t female_hits,
                                              std::uint64_t female_total, std::uint64_t min_count) {
  if (male_hits == 0 && female_hits == 0)
    throw ValidationError("'" + key + "' does not occur in either corpus");
  OddsRatioResult r;
  r.key = std::move(key);
  r.male_count = male_hits;
  r.female_count = female_hits;
  r.male_total = male_total;
  r.female_total = female_total;
  r.included = male_hits + female_hits >= min_count;

  const std::uint64_t male_rest = male_total - male_hits;
  const std::uint64_t female_rest = female_total - female_hits;
  const bool male_odds_inf = male_hits > 0 && male_rest == 0;
  const bool female_odds_inf = female_hits > 0 && female_rest == 0;
  if (male_odds_inf && female_odds_inf)
    throw StatsError("'" + r.key + "' is the only word in both corpora; odds ratio undefined");
  if (female_hits == 0 || male_odds_inf) {
    r.infinite = true;
    r.or_value = std::numeric_limits<double>::infinity();
  } else if (male_hits == 0 || female_odds_inf) {
    r.or_value = 0.0;
  } else {
    r.or_value = (static_cast<double>(male_hits) / static_cast<double>(male_rest)) /
                 (static_cast<double>(female_hits) / static_cast<double>(female_rest));
  }
  return r;
}

inline void require_same_pos(const WordCounts& male, const WordCounts& female) {
  if (male.pos != female.pos)
    throw ValidationError("odds ratio over counts of different parts of speech");
}

inline OddsRatioResult odds_ratio(std::string_view word, const WordCounts& male,
                                  const WordCounts& female, std::uint64_t min_count = 3) {
  require_same_pos(male, female);
  return odds_ratio_from_counts(text::lower(word), male.count(word), male.total,
                                female.count(word), female.total, min_count);
}

// Trait-level odds ratio: every token matching any pattern of the category
// counts towards the category. No frequency floor.
inline OddsRatioResult category_odds_ratio(const LexiconCategory& cat, const WordCounts& male,
                                           const WordCounts& female) {
  require_same_pos(male, female);
  auto matched = [&](const WordCounts& wc) {
    std::uint64_t n = 0;
    for (const auto& [w, c] : wc.counts)
      if (cat.matches(w)) n += c;
    return n;
  };
  const auto m = matched(male), f = matched(female);
  if (m == 0 && f == 0)
    throw ValidationError("lexicon category '" + cat.name + "' matches nothing in either corpus");
  return odds_ratio_from_counts(cat.name, m, male.total, f, female.total, 0);
}

struct SalientWords {
  std::vector<OddsRatioResult> top_male;    // highest OR first
  std::vector<OddsRatioResult> top_female;  // lowest OR first
  bool truncated = false;                   // fewer than 2k words passed the frequency floor
};

// Total order used for saliency ranking: +inf first, then OR descending,
// then combined count descending, then word ascending.
inline bool salient_before(const OddsRatioResult& a, const OddsRatioResult& b) {
  if (a.infinite != b.infinite) return a.infinite;
  if (!a.infinite && a.or_value != b.or_value) return a.or_value > b.or_value;
  if (a.combined() != b.combined()) return a.combined() > b.combined();
  return a.key < b.key;
}

inline std::vector<OddsRatioResult> ranked_odds_ratios(const WordCounts& male, const WordCounts& female,
                                                       std::uint64_t min_count) {
  require_same_pos(male, female);
  std::map<std::string, bool> vocab;
  for (const auto& [w, _] : male.counts) vocab[w] = true;
  for (const auto& [w, _] : female.counts) vocab[w] = true;
  std::vector<OddsRatioResult> all;
  for (const auto& [w, _] : vocab) {
    auto r = odds_ratio_from_counts(w, male.count(w), male.total, female.count(w), female.total, min_count);
    if (r.included) all.push_back(std::move(r));
  }
  std::sort(all.begin(), all.end(), salient_before);
  return all;
}

inline SalientWords salient_words(const WordCounts& male, const WordCounts& female, std::size_t k,
                                  std::uint64_t min_count = 3) {
  if (k == 0) throw ValidationError("salient_words requires k >= 1");
  auto ranked = ranked_odds_ratios(male, female, min_count);
  SalientWords out;
  out.truncated = ranked.size() < 2 * k;
  const std::size_t n_male = std::min(k, ranked.size());
  const std::size_t n_female = std::min(k, ranked.size() - n_male);
  out.top_male.assign(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(n_male));
  out.top_female.assign(ranked.rbegin(), ranked.rbegin() + static_cast<std::ptrdiff_t>(n_female));
  return out;
}

// ---------------------------------------------------------------------------
// Embeddings and WEAT

class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(std::size_t dimension) : dimension_(dimension) {}

  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return vectors_.size(); }

  void add(std::string word, std::vector<double> v) {
    if (dimension_ == 0) dimension_ = v.size();
    if (v.size() != dimension_ || dimension_ == 0)
      throw ValidationError("embedding for '" + word + "' has dimension " + std::to_string(v.size()) +
                            ", expected " + std::to_string(dimension_));
    double sq = 0;
    for (double x : v) sq += x * x;
    if (!(sq > 0) || !std::isfinite(sq))
      throw ValidationError("embedding for '" + word + "' has zero or non-finite norm");
    vectors_[std::move(word)] = std::move(v);
  }

  // Exact match first, then the lowercased word.
  const std::vector<double>* find(std::string_view word) const {
    if (auto it = vectors_.find(std::string(word)); it != vectors_.end()) return &it->second;
    if (auto it = vectors_.find(text::lower(word)); it != vectors_.end()) return &it->second;
    return nullptr;
  }

  // "word c1 c2 ... cD" per line, single-space separated.
  static EmbeddingTable read(std::istream& in) {
    EmbeddingTable t;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (text::trim(line).empty()) continue;
      std::istringstream ls(line);
      std::string word;
      ls >> word;
      std::vector<double> v;
      std::string tok;
      while (ls >> tok) {
        try {
          std::size_t used = 0;
          v.push_back(std::stod(tok, &used));
          if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
          throw ValidationError("embedding line " + std::to_string(lineno) + ": bad component '" + tok + "'");
        }
      }
      try {
        t.add(std::move(word), std::move(v));
      } catch (const ValidationError& e) {
        throw ValidationError("embedding line " + std::to_string(lineno) + ": " + e.what());
      }
    }
    return t;
  }

  static EmbeddingTable load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open embedding file '" + path + "'");
    return read(in);
  }

 private:
  std::size_t dimension_ = 0;
  std::map<std::string, std::vector<double>> vectors_;
};

inline double cosine(std::span<const double> a, std::span<const double> b) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

struct WeatResult {
  double effect_size = 0.0;
  std::vector<std::string> skipped;  // out-of-vocabulary words, in input order
};

// Effect size d = (mean_X s - mean_Y s) / popstd_{X u Y} s, with
// s(w) = mean_A cos(w, a) - mean_B cos(w, b). Positive d: X leans to A.
inline WeatResult weat_effect_size(std::span<const std::string> targets_x, std::span<const std::string> targets_y,
                                   std::span<const std::string> attrs_a, std::span<const std::string> attrs_b,
                                   const EmbeddingTable& emb) {
  WeatResult res;
  auto resolve = [&](std::span<const std::string> words, const char* label) {
    std::vector<const std::vector<double>*> vs;
    for (const auto& w : words) {
      if (const auto* v = emb.find(w)) vs.push_back(v);
      else res.skipped.push_back(w);
    }
    if (vs.empty())
      throw ValidationError(std::string("WEAT word list ") + label + " is empty after removing out-of-vocabulary words");
    return vs;
  };
  const auto x = resolve(targets_x, "X"), y = resolve(targets_y, "Y");
  const auto a = resolve(attrs_a, "A"), b = resolve(attrs_b, "B");

  auto mean_cos = [](const std::vector<double>& w, const std::vector<const std::vector<double>*>& set) {
    double s = 0;
    for (const auto* v : set) s += cosine(w, *v);
    return s / static_cast<double>(set.size());
  };
  auto assoc = [&](const std::vector<double>& w) { return mean_cos(w, a) - mean_cos(w, b); };

  std::vector<double> sx, sy;
  for (const auto* v : x) sx.push_back(assoc(*v));
  for (const auto* v : y) sy.push_back(assoc(*v));
  auto mean = [](const std::vector<double>& v) {
    double s = 0;
    for (double e : v) s += e;
    return s / static_cast<double>(v.size());
  };
  std::vector<double> pooled = sx;
  pooled.insert(pooled.end(), sy.begin(), sy.end());
  const double mu = mean(pooled);
  double ss = 0;
  for (double e : pooled) ss += (e - mu) * (e - mu);
  const double sd = std::sqrt(ss / static_cast<double>(pooled.size()));
  if (!(sd > 1e-12)) throw StatsError("WEAT association scores have zero spread; effect size undefined");
  res.effect_size = (mean(sx) - mean(sy)) / sd;
  return res;
}

}  // namespace biasaudit
