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

#include <cmath>
#include <fstream>
#include <regex>
#include <sstream>

#include <gtest/gtest.h>

#include "biasaudit/lexical.hpp"
#include "biasaudit/lexicon_data.hpp"
#include "biasaudit/mock_scorer.hpp"
#include "test_util.hpp"

namespace biasaudit {
namespace {

WordCounts counts(Gender g, std::initializer_list<std::pair<const char*, int>> items,
                  PartOfSpeech pos = PartOfSpeech::adjective) {
  WordCounts wc;
  wc.gender = g;
  wc.pos = pos;
  for (const auto& [w, n] : items) wc.add(w, static_cast<std::uint64_t>(n));
  return wc;
}

WordCounts example_male() { return counts(Gender::male, {{"respectful", 2}, {"kind", 3}, {"smart", 5}}); }
WordCounts example_female() { return counts(Gender::female, {{"respectful", 1}, {"warm", 4}, {"kind", 5}}); }

TEST(OddsRatio, WorkedExample) {
  const auto r = odds_ratio("respectful", example_male(), example_female());
  EXPECT_DOUBLE_EQ(r.or_value, 2.25);
  EXPECT_TRUE(r.included);
  EXPECT_FALSE(r.infinite);
  EXPECT_EQ(r.male_count, 2u);
  EXPECT_EQ(r.female_count, 1u);
}

TEST(OddsRatio, SymmetricCorporaGiveOne) {
  auto m = example_male();
  auto f = m;
  f.gender = Gender::female;
  for (const auto& [w, _] : m.counts) EXPECT_EQ(odds_ratio(w, m, f).or_value, 1.0);
}

TEST(OddsRatio, InfiniteZeroAndErrors) {
  const auto smart = odds_ratio("smart", example_male(), example_female());
  EXPECT_TRUE(smart.infinite);
  EXPECT_TRUE(std::isinf(smart.or_value));
  const auto warm = odds_ratio("warm", example_male(), example_female());
  EXPECT_EQ(warm.or_value, 0.0);
  EXPECT_FALSE(warm.infinite);
  EXPECT_THROW(odds_ratio("absent", example_male(), example_female()), ValidationError);
  auto noun = counts(Gender::female, {{"kind", 1}}, PartOfSpeech::noun);
  EXPECT_THROW(odds_ratio("kind", example_male(), noun), ValidationError);
}

TEST(OddsRatio, FrequencyFloor) {
  auto m = counts(Gender::male, {{"rare", 1}, {"x", 5}});
  auto f = counts(Gender::female, {{"rare", 1}, {"y", 5}});
  EXPECT_FALSE(odds_ratio("rare", m, f).included);
  EXPECT_TRUE(odds_ratio("rare", m, f, 2).included);
}

TEST(OddsRatio, OnlyWordInBothCorporaIsUndefined) {
  auto m = counts(Gender::male, {{"w", 3}});
  auto f = counts(Gender::female, {{"w", 2}});
  EXPECT_THROW(odds_ratio("w", m, f), StatsError);
}

TEST(CategoryOddsRatio, PrefixCategoryExample) {
  const LexiconCategory cat{"Kind", {parse_pattern("kind*")}};
  auto m = example_male(), f = example_female();
  m.pos = f.pos = PartOfSpeech::all_tokens;
  const auto r = category_odds_ratio(cat, m, f);
  EXPECT_EQ(r.male_count, 3u);
  EXPECT_EQ(r.female_count, 5u);
  EXPECT_NEAR(r.or_value, 3.0 / 7.0, 1e-15);
  EXPECT_EQ(r.key, "Kind");
  const LexiconCategory none{"None", {parse_pattern("zzz")}};
  EXPECT_THROW(category_odds_ratio(none, m, f), ValidationError);
}

TEST(LexiconPattern, PrefixSemantics) {
  const auto p = parse_pattern("intelligen*");
  EXPECT_TRUE(p.matches("intelligent"));
  EXPECT_TRUE(p.matches("intelligence"));
  EXPECT_TRUE(p.matches("intelligen"));
  EXPECT_FALSE(p.matches("intel"));
  const auto lit = parse_pattern("lead");
  EXPECT_TRUE(lit.matches("lead"));
  EXPECT_FALSE(lit.matches("leader"));
}

TEST(LexiconPattern, RejectsMalformed) {
  EXPECT_THROW(parse_pattern(""), ValidationError);
  EXPECT_THROW(parse_pattern("*"), ValidationError);
  EXPECT_THROW(parse_pattern("a*b"), ValidationError);
  EXPECT_THROW(parse_pattern("Kind"), ValidationError);
}

TEST(LexiconPattern, AgreesWithRegexOracle) {
  Rng rng(5);
  const std::string alphabet = "abcde";
  auto word = [&](std::size_t max) {
    std::string w;
    const auto n = rng.below(max) + 1;
    for (std::uint64_t i = 0; i < n; ++i) w += alphabet[rng.below(alphabet.size())];
    return w;
  };
  for (int trial = 0; trial < 2000; ++trial) {
    const std::string stem = word(3);
    const bool prefix = rng.below(2) == 1;
    const auto pat = parse_pattern(stem + (prefix ? "*" : ""));
    const std::regex re(prefix ? "^" + stem + "[a-z]*$" : "^" + stem + "$");
    const std::string tok = word(5);
    EXPECT_EQ(pat.matches(tok), std::regex_match(tok, re)) << stem << (prefix ? "*" : "") << " vs " << tok;
  }
}

TEST(Lexicons, BundledCategoriesMatchDataFile) {
  std::ifstream in(testutil::data_path("lexicons.txt"));
  ASSERT_TRUE(in);
  EXPECT_EQ(parse_lexicons(in), bundled_lexicons());
  EXPECT_EQ(testutil::read_file(testutil::data_path("lexicons.txt")), std::string(data::kLexicons));
  EXPECT_EQ(testutil::read_file(testutil::data_path("weat_lists.txt")), std::string(data::kWeatLists));
}

TEST(Lexicons, NineCategoriesInOrder) {
  const auto& cats = bundled_lexicons();
  const std::vector<std::string> names = {"Ability",  "Standout", "Leadership",   "Masculine", "Feminine",
                                          "Agentic",  "Communal", "Professional", "Personal"};
  ASSERT_EQ(cats.size(), names.size());
  for (std::size_t i = 0; i < names.size(); ++i) EXPECT_EQ(cats[i].name, names[i]);
  EXPECT_TRUE(bundled_lexicon("Masculine").matches("ambitious"));
  EXPECT_TRUE(bundled_lexicon("Feminine").matches("nurturing"));
  EXPECT_FALSE(bundled_lexicon("Leadership").matches("leader"));
  EXPECT_THROW(bundled_lexicon("Nope"), ValidationError);
}

TEST(Lexicons, WeatListsHaveEightWordsEach) {
  const auto w = bundled_weat_lists();
  EXPECT_EQ(w.male_names.size(), 8u);
  EXPECT_EQ(w.female_names.size(), 8u);
  EXPECT_EQ(w.career.size(), 8u);
  EXPECT_EQ(w.family.size(), 8u);
  EXPECT_EQ(w.male_names.front(), "John");
  EXPECT_EQ(w.family.back(), "relatives");
}

TEST(Lexicons, ParseErrors) {
  std::istringstream no_colon("Ability talent\n");
  EXPECT_THROW(parse_lexicons(no_colon), ValidationError);
  std::istringstream empty_list("Ability:\n");
  EXPECT_THROW(parse_lexicons(empty_list), ValidationError);
}

TEST(SalientWords, WorkedExample) {
  const auto s = salient_words(example_male(), example_female(), 1);
  ASSERT_EQ(s.top_male.size(), 1u);
  ASSERT_EQ(s.top_female.size(), 1u);
  EXPECT_EQ(s.top_male[0].key, "smart");
  EXPECT_EQ(s.top_female[0].key, "warm");
  EXPECT_FALSE(s.truncated);
}

TEST(SalientWords, InfiniteFirstThenTiesByCountThenWord) {
  auto m = counts(Gender::male, {{"a", 3}, {"b", 3}, {"c", 4}, {"z", 9}});
  auto f = m;
  f.gender = Gender::female;
  f.add("only_f", 3);
  m.add("only_m", 3);
  const auto ranked = ranked_odds_ratios(m, f, 3);
  ASSERT_GE(ranked.size(), 2u);
  EXPECT_EQ(ranked.front().key, "only_m");
  EXPECT_EQ(ranked.back().key, "only_f");
  // equal finite ORs: larger combined count first, then lexicographic
  std::vector<std::string> mid;
  for (std::size_t i = 1; i + 1 < ranked.size(); ++i) mid.push_back(ranked[i].key);
  EXPECT_EQ(mid, (std::vector<std::string>{"z", "c", "a", "b"}));
}

TEST(SalientWords, IdenticalCorporaDeterministicAndOrderInvariant) {
  std::vector<std::string> words = {"x", "y", "y", "z", "z", "z", "w", "w", "w", "w"};
  auto m1 = WordCounts::from_words(Gender::male, PartOfSpeech::noun, words);
  std::reverse(words.begin(), words.end());
  auto m2 = WordCounts::from_words(Gender::male, PartOfSpeech::noun, words);
  auto f = m1;
  f.gender = Gender::female;
  const auto a = salient_words(m1, f, 1, 1), b = salient_words(m2, f, 1, 1);
  ASSERT_EQ(a.top_male.size(), 1u);
  EXPECT_EQ(a.top_male[0].key, b.top_male[0].key);
  EXPECT_EQ(a.top_female[0].key, b.top_female[0].key);
  EXPECT_EQ(a.top_male[0].or_value, 1.0);
}

TEST(SalientWords, TruncatedWhenTooFewWords) {
  const auto s = salient_words(example_male(), example_female(), 3);
  EXPECT_TRUE(s.truncated);
  EXPECT_EQ(s.top_male.size() + s.top_female.size(), 4u);
  EXPECT_THROW(salient_words(example_male(), example_female(), 0), ValidationError);
}

EmbeddingTable table(std::initializer_list<std::pair<const char*, std::vector<double>>> rows) {
  EmbeddingTable t;
  for (const auto& [w, v] : rows) t.add(w, v);
  return t;
}

std::vector<std::string> L(std::initializer_list<const char*> ws) { return {ws.begin(), ws.end()}; }

TEST(Weat, TwoDimensionalExampleIsExactlyTwo) {
  const auto emb = table({{"x", {1, 0}}, {"y", {0, 1}}, {"a", {1, 0}}, {"b", {0, 1}}});
  const auto r = weat_effect_size(L({"x"}), L({"y"}), L({"a"}), L({"b"}), emb);
  EXPECT_EQ(r.effect_size, 2.0);
  EXPECT_TRUE(r.skipped.empty());
}

TEST(Weat, SignFlipsAndIdentity) {
  const auto emb = table({{"x1", {1, 0.2, 0.1}}, {"x2", {0.8, -0.1, 0.3}}, {"y1", {0.1, 1, 0}}, {"y2", {-0.2, 0.7, 0.4}},
                          {"a1", {1, 0, 0}}, {"a2", {0.9, 0.3, 0}}, {"b1", {0, 1, 0}}, {"b2", {0.2, 0.8, 0.1}}});
  const auto X = L({"x1", "x2"}), Y = L({"y1", "y2"}), A = L({"a1", "a2"}), B = L({"b1", "b2"});
  const double d = weat_effect_size(X, Y, A, B, emb).effect_size;
  EXPECT_GT(d, 0);
  EXPECT_NEAR(weat_effect_size(X, Y, B, A, emb).effect_size, -d, 1e-12);
  EXPECT_NEAR(weat_effect_size(Y, X, A, B, emb).effect_size, -d, 1e-12);
  const auto XY = L({"x1", "y1"});
  EXPECT_EQ(weat_effect_size(XY, XY, A, B, emb).effect_size, 0.0);
}

TEST(Weat, DegenerateAndOutOfVocabulary) {
  const auto emb = table({{"x", {1, 0}}, {"y", {0, 1}}, {"a", {1, 0}}, {"b", {0, 1}}, {"Kate", {1, 1}}});
  EXPECT_THROW(weat_effect_size(L({"x"}), L({"y"}), L({"a"}), L({"a"}), emb), StatsError);
  EXPECT_THROW(weat_effect_size(L({"nope"}), L({"y"}), L({"a"}), L({"b"}), emb), ValidationError);
  const auto r = weat_effect_size(L({"x", "nope"}), L({"y", "KATE", "kate"}), L({"a"}), L({"b"}), emb);
  EXPECT_EQ(r.skipped, L({"nope", "KATE", "kate"}));
}

TEST(EmbeddingTable, ReadAndValidate) {
  std::istringstream ok("alpha 1 0\nBeta 0.5 0.5\n");
  const auto t = EmbeddingTable::read(ok);
  EXPECT_EQ(t.size(), 2u);
  EXPECT_EQ(t.dimension(), 2u);
  EXPECT_NE(t.find("Beta"), nullptr);
  EXPECT_EQ(t.find("beta"), nullptr);  // lowercase fallback only goes one way
  EXPECT_NE(t.find("ALPHA"), nullptr);
  std::istringstream bad_dim("a 1 0\nb 1\n");
  EXPECT_THROW(EmbeddingTable::read(bad_dim), ValidationError);
  std::istringstream zero("a 0 0\n");
  EXPECT_THROW(EmbeddingTable::read(zero), ValidationError);
  std::istringstream junk("a 1 x\n");
  EXPECT_THROW(EmbeddingTable::read(junk), ValidationError);
}

TEST(ExtractPosWords, MockDictionaryTagging) {
  Document d{"d1", Gender::female, "She is a kind leader.", {}, {}, {}, nlohmann::json::object()};
  std::map<std::string, std::vector<TaggedToken>> tags;
  tags["d1"] = MockBackend::pos(d.text);
  PretaggedTagger tagger(tags);
  EXPECT_EQ(extract_pos_words(d, PartOfSpeech::adjective, &tagger), L({"kind"}));
  EXPECT_EQ(extract_pos_words(d, PartOfSpeech::noun, &tagger), L({"leader"}));
  EXPECT_EQ(extract_pos_words(d, PartOfSpeech::all_tokens, nullptr), L({"she", "is", "a", "kind", "leader"}));
  Document empty = d;
  empty.text = "";
  EXPECT_TRUE(extract_pos_words(empty, PartOfSpeech::noun, &tagger).empty());
}

TEST(ExtractPosWords, TaggerFailureCarriesDocId) {
  Document d{"missing", Gender::male, "Text here.", {}, {}, {}, nlohmann::json::object()};
  PretaggedTagger tagger;
  try {
    extract_pos_words(d, PartOfSpeech::noun, &tagger);
    FAIL();
  } catch (const TaggingError& e) {
    EXPECT_EQ(e.doc_id(), "missing");
  }
}

TEST(Tokenize, WordsAndTaggingTokens) {
  EXPECT_EQ(tokenize_words("She's a well-known, SMART leader!"), L({"she", "s", "a", "well-known", "smart", "leader"}));
  EXPECT_EQ(tokenize_for_tagging("kind leader."), L({"kind", "leader", "."}));
}

TEST(PretaggedTagger, ReadsJsonl) {
  std::istringstream in(R"({"id":"a","tokens":[["Kind","ADJ"],["people","NOUN"]]})" "\n");
  auto t = PretaggedTagger::from_stream(in);
  Document d{"a", Gender::male, "Kind people", {}, {}, {}, nlohmann::json::object()};
  EXPECT_EQ(extract_pos_words(d, PartOfSpeech::adjective, &t), L({"kind"}));
  std::istringstream bad(R"({"id":"a","tokens":[["Kind","ADVERB"]]})" "\n");
  EXPECT_THROW(PretaggedTagger::from_stream(bad), ValidationError);
}

TEST(CountWords, TotalsAndMerge) {
  auto a = counts(Gender::male, {{"x", 2}});
  auto b = counts(Gender::male, {{"X", 1}, {"y", 4}});
  a.merge(b);
  EXPECT_EQ(a.count("x"), 3u);
  EXPECT_EQ(a.total, 7u);
}

}  // namespace
}  // namespace biasaudit
