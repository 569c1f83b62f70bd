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

// Language-style bias: per-document fractions of formal / positive /
// agentic sentences and one-sided Welch tests between the gender groups.

#pragma once

#include <array>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "biasaudit/common.hpp"
#include "biasaudit/corpus.hpp"
#include "biasaudit/stats.hpp"

namespace biasaudit {

enum class StyleAspect { formality, positivity, agency };

// Report row order.
inline constexpr std::array<StyleAspect, 3> kStyleAspects = {StyleAspect::formality, StyleAspect::positivity,
                                                             StyleAspect::agency};

inline std::string_view to_string(StyleAspect a) {
  switch (a) {
    case StyleAspect::formality: return "formality";
    case StyleAspect::positivity: return "positivity";
    case StyleAspect::agency: return "agency";
  }
  return "formality";
}

inline StyleAspect parse_aspect(std::string_view s) {
  for (auto a : kStyleAspects)
    if (to_string(a) == s) return a;
  throw ValidationError("unknown style aspect '" + std::string(s) + "'");
}

struct StyleScore {
  std::string doc_id;
  StyleAspect aspect = StyleAspect::formality;
  std::size_t labeled = 0;
  std::size_t n_sentences = 0;
  double fraction = 0;  // labeled / n_sentences
};

inline StyleScore style_fraction(std::string doc_id, StyleAspect aspect, std::span<const int> labels) {
  if (labels.empty())
    throw ValidationError("document '" + doc_id + "' has no sentences to score");
  StyleScore s{std::move(doc_id), aspect, 0, labels.size(), 0.0};
  for (int l : labels) {
    if (l != 0 && l != 1) throw ValidationError("style labels must be 0 or 1 (document '" + s.doc_id + "')");
    s.labeled += static_cast<std::size_t>(l);
  }
  s.fraction = static_cast<double>(s.labeled) / static_cast<double>(s.n_sentences);
  return s;
}

// `labels` holds one binary label per segmented sentence of `doc`.
inline StyleScore style_percentages(const Document& doc, StyleAspect aspect, std::span<const int> labels) {
  const auto n = split_sentences(doc.text).size();
  if (n == 0) throw ValidationError("document '" + doc.id + "' has no sentences");
  if (labels.size() != n)
    throw ValidationError("document '" + doc.id + "': " + std::to_string(labels.size()) + " labels for " +
                          std::to_string(n) + " sentences");
  return style_fraction(doc.id, aspect, labels);
}

struct BiasTestResult {
  StyleAspect aspect = StyleAspect::formality;
  stats::TTestResult test;  // sample a = male documents, b = female documents
  int stars = 0;
};

inline BiasTestResult make_bias_result(StyleAspect aspect, stats::TTestResult test) {
  const int stars = stats::significance_stars(test.p);
  return {aspect, std::move(test), stars};
}

// aspect -> doc id -> score
using StyleScoreTable = std::map<StyleAspect, std::map<std::string, StyleScore>>;

inline std::vector<double> fractions_for(const std::vector<Document>& docs, const std::map<std::string, StyleScore>& scores,
                                         StyleAspect aspect) {
  std::vector<double> out;
  out.reserve(docs.size());
  for (const auto& d : docs) {
    auto it = scores.find(d.id);
    if (it == scores.end())
      throw ValidationError("no " + std::string(to_string(aspect)) + " score for document '" + d.id + "'");
    out.push_back(it->second.fraction);
  }
  return out;
}

// Tests male fractions > female fractions for one aspect.
inline BiasTestResult style_bias_test(const GenderedCorpora& corpora, const StyleScoreTable& scores,
                                      StyleAspect aspect) {
  auto it = scores.find(aspect);
  if (it == scores.end()) throw ValidationError("no scores for aspect " + std::string(to_string(aspect)));
  const auto male = fractions_for(corpora.male_docs, it->second, aspect);
  const auto female = fractions_for(corpora.female_docs, it->second, aspect);
  try {
    return make_bias_result(aspect, stats::welch_t_test(male, female, stats::Alternative::greater));
  } catch (const StatsError& e) {
    throw StatsError(std::string(to_string(aspect)) + ": " + e.what());
  }
}

// One row per aspect, ordered formality, positivity, agency.
inline std::vector<BiasTestResult> style_bias_report(const GenderedCorpora& corpora, const StyleScoreTable& scores) {
  std::vector<BiasTestResult> rows;
  for (auto a : kStyleAspects) rows.push_back(style_bias_test(corpora, scores, a));
  return rows;
}

}  // namespace biasaudit
