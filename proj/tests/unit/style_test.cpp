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

#include <gtest/gtest.h>

#include "biasaudit/style.hpp"
#include "oracle/stats_oracle.hpp"

namespace biasaudit {
namespace {

Document doc(std::string id, Gender g, std::string text) {
  return {std::move(id), g, std::move(text), {}, {}, {}, nlohmann::json::object()};
}

TEST(StylePercentages, Arithmetic) {
  const auto d = doc("d", Gender::male, "One. Two. Three. Four.");
  const std::vector<int> labels{1, 1, 0, 1};
  const auto s = style_percentages(d, StyleAspect::formality, labels);
  EXPECT_EQ(s.fraction, 0.75);
  EXPECT_EQ(s.labeled, 3u);
  EXPECT_EQ(s.n_sentences, 4u);
  const std::vector<int> zeros{0, 0, 0, 0};
  EXPECT_EQ(style_percentages(d, StyleAspect::agency, zeros).fraction, 0.0);
}

TEST(StylePercentages, Errors) {
  const auto d = doc("d", Gender::male, "One. Two.");
  const std::vector<int> three{1, 0, 1}, bad{1, 2};
  EXPECT_THROW(style_percentages(d, StyleAspect::formality, three), ValidationError);
  EXPECT_THROW(style_percentages(d, StyleAspect::formality, bad), ValidationError);
  EXPECT_THROW(style_fraction("d", StyleAspect::formality, {}), ValidationError);
}

GenderedCorpora corpora_with(const std::vector<double>& male, const std::vector<double>& female,
                             StyleScoreTable& table) {
  std::vector<Document> docs;
  for (auto a : kStyleAspects) (void)table[a];
  auto add = [&](Gender g, const std::vector<double>& xs) {
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const std::string id = std::string(to_string(g)) + std::to_string(i);
      docs.push_back(doc(id, g, "Text."));
      for (auto a : kStyleAspects) table[a][id] = StyleScore{id, a, 0, 1, xs[i]};
    }
  };
  add(Gender::male, male);
  add(Gender::female, female);
  return GenderedCorpora::from_documents("t", docs);
}

TEST(StyleBiasReport, SeparatedFractionsGetThreeStars) {
  const auto& f = oracle::separated_style();
  StyleScoreTable table;
  const auto c = corpora_with(f.male, f.female, table);
  const auto rows = style_bias_report(c, table);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].aspect, StyleAspect::formality);
  EXPECT_EQ(rows[1].aspect, StyleAspect::positivity);
  EXPECT_EQ(rows[2].aspect, StyleAspect::agency);
  for (const auto& r : rows) {
    EXPECT_LT(r.test.p, 1e-6);
    EXPECT_EQ(r.stars, 3);
    EXPECT_GT(r.test.t, 0);
    EXPECT_EQ(r.test.alternative, stats::Alternative::greater);
    EXPECT_EQ(r.test.a.n, 10u);
  }
}

TEST(StyleBiasReport, IdenticalDistributionsGetNoStars) {
  const std::vector<double> xs{0.2, 0.5, 0.4, 0.9, 0.1};
  StyleScoreTable table;
  const auto c = corpora_with(xs, xs, table);
  for (const auto& r : style_bias_report(c, table)) {
    EXPECT_EQ(r.stars, 0);
    EXPECT_EQ(r.test.p, 0.5);
  }
}

TEST(StyleBiasReport, MissingScoreIsAnError) {
  StyleScoreTable table;
  auto c = corpora_with({0.1, 0.2}, {0.3, 0.4}, table);
  table[StyleAspect::agency].erase("male0");
  EXPECT_THROW(style_bias_test(c, table, StyleAspect::agency), ValidationError);
}

TEST(StyleAspect, ParseRoundTrip) {
  for (auto a : kStyleAspects) EXPECT_EQ(parse_aspect(to_string(a)), a);
  EXPECT_THROW(parse_aspect("tone"), ValidationError);
}

}  // namespace
}  // namespace biasaudit
