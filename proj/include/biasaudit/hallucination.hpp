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

// Context-sentence NLI hallucination detection and the hallucination bias
// tests (propagation vs. amplification).

#pragma once

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "biasaudit/common.hpp"
#include "biasaudit/corpus.hpp"
#include "biasaudit/scoring.hpp"
#include "biasaudit/stats.hpp"
#include "biasaudit/style.hpp"

namespace biasaudit {

enum class Verdict { entailed, neutral, contradicted };

inline std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::entailed: return "entailed";
    case Verdict::neutral: return "neutral";
    case Verdict::contradicted: return "contradicted";
  }
  return "neutral";
}

inline Verdict parse_verdict(std::string_view s) {
  if (s == "entailed") return Verdict::entailed;
  if (s == "neutral") return Verdict::neutral;
  if (s == "contradicted") return Verdict::contradicted;
  throw ValidationError("unknown verdict '" + std::string(s) + "'");
}

struct HallucinationRecord {
  std::string doc_id;
  std::size_t n_sentences = 0;
  std::vector<Verdict> verdicts;                     // one per sentence
  std::vector<std::array<double, 3>> probabilities;  // (entailment, neutral, contradiction)
  std::vector<std::size_t> flagged;                  // ascending indices with verdict != entailed
};

// Maps (premise, hypothesis) pairs to class probabilities, in order.
using EntailmentScorer = std::function<std::vector<std::array<double, 3>>(const std::vector<NliPair>&)>;

inline EntailmentScorer entailment_scorer(ScoringClient& client) {
  return [&client](const std::vector<NliPair>& pairs) { return client.nli_batch(pairs); };
}

class HallucinationError : public Error {
 public:
  HallucinationError(std::string doc_id, std::optional<std::size_t> sentence, const std::string& what)
      : Error("hallucination detection failed for document '" + doc_id + "'" +
              (sentence ? " at sentence " + std::to_string(*sentence) : std::string()) + ": " + what),
        doc_id_(std::move(doc_id)),
        sentence_(sentence) {}
  const std::string& doc_id() const { return doc_id_; }
  std::optional<std::size_t> sentence() const { return sentence_; }

 private:
  std::string doc_id_;
  std::optional<std::size_t> sentence_;
};

// Argmax over (entailment, neutral, contradiction); ties go to the earlier class.
inline Verdict verdict_of(const std::array<double, 3>& p) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < 3; ++i)
    if (p[i] > p[best]) best = i;
  return static_cast<Verdict>(best);
}

// Premise is the whole context; each segmented sentence is a hypothesis.
inline HallucinationRecord detect_hallucinations(const Document& doc, const EntailmentScorer& nli) {
  if (!doc.context) throw HallucinationError(doc.id, std::nullopt, "document has no context");
  const auto spans = split_sentences(doc);
  if (spans.empty()) throw HallucinationError(doc.id, std::nullopt, "document has no sentences");
  std::vector<NliPair> pairs;
  pairs.reserve(spans.size());
  for (const auto& s : spans) pairs.emplace_back(*doc.context, s.text);

  std::vector<std::array<double, 3>> probs;
  try {
    probs = nli(pairs);
  } catch (const ScorerError& e) {
    throw ScorerError("nli for document '" + doc.id + "' (sentences 0-" + std::to_string(spans.size() - 1) +
                      "): " + e.what());
  } catch (const std::exception& e) {
    throw HallucinationError(doc.id, std::nullopt, e.what());
  }
  if (probs.size() != spans.size())
    throw HallucinationError(doc.id, std::min(probs.size(), spans.size()),
                             "scorer returned " + std::to_string(probs.size()) + " results for " +
                                 std::to_string(spans.size()) + " sentences");

  HallucinationRecord rec;
  rec.doc_id = doc.id;
  rec.n_sentences = spans.size();
  rec.probabilities = probs;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    for (double v : probs[i])
      if (!std::isfinite(v)) throw HallucinationError(doc.id, i, "non-finite class probability");
    rec.verdicts.push_back(verdict_of(probs[i]));
    if (rec.verdicts.back() != Verdict::entailed) rec.flagged.push_back(i);
  }
  return rec;
}

inline nlohmann::json to_json(const HallucinationRecord& r) {
  nlohmann::json sentences = nlohmann::json::array();
  for (std::size_t i = 0; i < r.n_sentences; ++i)
    sentences.push_back({{"index", i},
                         {"verdict", to_string(r.verdicts[i])},
                         {"probabilities", r.probabilities[i]}});
  return {{"doc_id", r.doc_id}, {"n_sentences", r.n_sentences}, {"flagged", r.flagged}, {"sentences", sentences}};
}

inline HallucinationRecord hallucination_record_from_json(const nlohmann::json& j) {
  HallucinationRecord r;
  r.doc_id = j.at("doc_id").get<std::string>();
  r.n_sentences = j.at("n_sentences").get<std::size_t>();
  for (const auto& s : j.at("sentences")) {
    r.verdicts.push_back(parse_verdict(s.at("verdict").get<std::string>()));
    r.probabilities.push_back(s.at("probabilities").get<std::array<double, 3>>());
  }
  r.flagged = j.at("flagged").get<std::vector<std::size_t>>();
  return r;
}

// ---------------------------------------------------------------------------
// Style fractions over hallucinated content

struct HallucinationSamples {
  std::vector<double> hall;         // one per document with >= 1 flagged sentence
  std::vector<double> full_paired;  // full-document fraction of the same documents, aligned with `hall`
  std::vector<double> full;         // one per document
  std::size_t excluded = 0;         // documents with no flagged sentence
};

// doc id -> one binary label per sentence
using SentenceLabels = std::map<std::string, std::vector<int>>;

inline std::map<Gender, HallucinationSamples> hallucination_style_samples(
    const GenderedCorpora& corpora, const std::map<std::string, HallucinationRecord>& records,
    const SentenceLabels& labels) {
  std::map<Gender, HallucinationSamples> out;
  for (Gender g : {Gender::male, Gender::female}) {
    auto& s = out[g];
    for (const auto& d : corpora.docs(g)) {
      auto rit = records.find(d.id);
      if (rit == records.end()) throw ValidationError("no hallucination record for document '" + d.id + "'");
      auto lit = labels.find(d.id);
      if (lit == labels.end()) throw ValidationError("no sentence labels for document '" + d.id + "'");
      const auto& rec = rit->second;
      const auto& lab = lit->second;
      if (lab.size() != rec.n_sentences)
        throw ValidationError("document '" + d.id + "': " + std::to_string(lab.size()) + " labels for " +
                              std::to_string(rec.n_sentences) + " sentences");
      if (lab.empty()) throw ValidationError("document '" + d.id + "' has no sentences");
      std::size_t pos = 0;
      for (int l : lab) pos += l == 1;
      const double full = static_cast<double>(pos) / static_cast<double>(lab.size());
      s.full.push_back(full);
      if (rec.flagged.empty()) {
        ++s.excluded;
        continue;
      }
      std::size_t hall_pos = 0;
      for (auto i : rec.flagged) {
        if (i >= lab.size()) throw ValidationError("document '" + d.id + "': flagged index out of range");
        hall_pos += lab[i] == 1;
      }
      s.hall.push_back(static_cast<double>(hall_pos) / static_cast<double>(rec.flagged.size()));
      s.full_paired.push_back(full);
    }
  }
  return out;
}

enum class HallucinationClass { amplification, propagation, none };

inline std::string_view to_string(HallucinationClass c) {
  switch (c) {
    case HallucinationClass::amplification: return "amplification";
    case HallucinationClass::propagation: return "propagation";
    case HallucinationClass::none: return "none";
  }
  return "none";
}

inline HallucinationClass parse_hallucination_class(std::string_view s) {
  if (s == "amplification") return HallucinationClass::amplification;
  if (s == "propagation") return HallucinationClass::propagation;
  if (s == "none") return HallucinationClass::none;
  throw ValidationError("unknown hallucination classification '" + std::string(s) + "'");
}

inline constexpr double kAmplificationAlpha = 0.1;

struct HallucinationBiasResult {
  Gender gender = Gender::male;
  StyleAspect aspect = StyleAspect::formality;
  std::optional<stats::TTestResult> result;  // sample a = hallucinated, b = full document
  int stars = 0;
  HallucinationClass classification = HallucinationClass::none;
  std::string note;
};

// Male: hallucinated > full (alternative greater). Female: hallucinated <
// full (alternative less). Significant at 0.1 -> amplification, otherwise
// propagation. Fewer than two hallucinated-sample values: no test,
// propagation with a note. `none` is left to callers for undefined tests.
inline HallucinationBiasResult hallucination_bias_test(Gender g, StyleAspect aspect, const HallucinationSamples& s,
                                                       bool paired = false) {
  HallucinationBiasResult r;
  r.gender = g;
  r.aspect = aspect;
  if (s.hall.size() < 2) {
    r.classification = HallucinationClass::propagation;
    r.note = "hallucinated sample has " + std::to_string(s.hall.size()) + " document(s); test not run";
    return r;
  }
  const auto alt = g == Gender::male ? stats::Alternative::greater : stats::Alternative::less;
  try {
    r.result = paired ? stats::paired_t_test(s.hall, s.full_paired, alt) : stats::welch_t_test(s.hall, s.full, alt);
  } catch (const StatsError& e) {
    throw StatsError(std::string(to_string(g)) + " " + std::string(to_string(aspect)) + ": " + e.what());
  }
  r.stars = stats::significance_stars(r.result->p);
  r.classification =
      r.result->p < kAmplificationAlpha ? HallucinationClass::amplification : HallucinationClass::propagation;
  if (s.excluded) r.note = std::to_string(s.excluded) + " document(s) without hallucinations excluded";
  return r;
}

// Rows ordered by aspect (formality, positivity, agency), female before male.
inline std::vector<HallucinationBiasResult> hallucination_bias_report(
    const std::map<StyleAspect, std::map<Gender, HallucinationSamples>>& samples, bool paired = false) {
  std::vector<HallucinationBiasResult> rows;
  for (auto a : kStyleAspects) {
    auto it = samples.find(a);
    if (it == samples.end()) continue;
    for (Gender g : {Gender::female, Gender::male}) {
      auto git = it->second.find(g);
      if (git == it->second.end()) continue;
      rows.push_back(hallucination_bias_test(g, a, git->second, paired));
    }
  }
  return rows;
}

}  // namespace biasaudit
