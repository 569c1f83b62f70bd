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

// End-to-end audit: filter -> segmentation -> scoring -> lexical, style
// and hallucination analyses -> report. Every stage writes its
// intermediates as line-delimited JSON into the output directory.

#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "biasaudit/common.hpp"
#include "biasaudit/corpus.hpp"
#include "biasaudit/hallucination.hpp"
#include "biasaudit/http_backend.hpp"
#include "biasaudit/lexical.hpp"
#include "biasaudit/mock_scorer.hpp"
#include "biasaudit/preprocess.hpp"
#include "biasaudit/scoring.hpp"
#include "biasaudit/stats.hpp"
#include "biasaudit/style.hpp"

namespace biasaudit {

inline constexpr std::string_view kReportSchemaVersion = "1";

struct AuditConfig {
  std::string corpus;
  std::string out = "audit_out";
  std::uint64_t seed = 0;
  std::string scorer = "mock";  // "mock" or a base URL
  std::string scorer_token;
  std::size_t batch_size = 64;
  int max_retries = 3;
  std::size_t max_in_flight = 4;
  bool filter = true;
  bool hallucination = false;
  bool paired_hallucination_test = false;
  std::size_t top_k = 10;
  std::uint64_t min_count = 3;
  double label_threshold = 0.5;  // positive-class probability at or above this labels a sentence
  std::string lexicon;           // empty: bundled lexicons
  std::string weat_lists;        // empty: bundled lists
  std::string embeddings;        // empty: WEAT not computed
  std::string pos_tags;          // empty: tag through the scorer
};

inline AuditConfig audit_config_from_json(const nlohmann::json& j, const std::filesystem::path& base = {}) {
  AuditConfig c;
  auto path = [&](const char* key, std::string& dst) {
    if (auto it = j.find(key); it != j.end() && !it->is_null()) {
      std::filesystem::path p = it->get<std::string>();
      dst = (p.is_relative() && !base.empty() ? base / p : p).lexically_normal().string();
    }
  };
  try {
    path("corpus", c.corpus);
    path("out", c.out);
    path("lexicon", c.lexicon);
    path("weat_lists", c.weat_lists);
    path("embeddings", c.embeddings);
    path("pos_tags", c.pos_tags);
    c.seed = j.value("seed", c.seed);
    c.scorer = j.value("scorer", c.scorer);
    c.scorer_token = j.value("scorer_token", c.scorer_token);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.max_retries = j.value("max_retries", c.max_retries);
    c.max_in_flight = j.value("max_in_flight", c.max_in_flight);
    c.filter = j.value("filter", c.filter);
    c.hallucination = j.value("hallucination", c.hallucination);
    c.paired_hallucination_test = j.value("paired_hallucination_test", c.paired_hallucination_test);
    c.top_k = j.value("top_k", c.top_k);
    c.min_count = j.value("min_count", c.min_count);
    c.label_threshold = j.value("label_threshold", c.label_threshold);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("bad audit config: ") + e.what());
  }
  static const std::set<std::string> kKnown = {
      "corpus",    "out",           "lexicon",        "weat_lists",       "embeddings", "pos_tags",
      "seed",      "scorer",        "scorer_token",   "batch_size",       "max_retries", "max_in_flight",
      "filter",    "hallucination", "paired_hallucination_test", "top_k", "min_count",  "label_threshold"};
  for (const auto& [k, _] : j.items())
    if (!kKnown.count(k)) throw ValidationError("bad audit config: unknown key '" + k + "'");
  if (c.top_k == 0) throw ValidationError("bad audit config: top_k must be >= 1");
  if (!(c.label_threshold > 0.0 && c.label_threshold < 1.0))
    throw ValidationError("bad audit config: label_threshold must lie in (0, 1)");
  return c;
}

inline AuditConfig load_audit_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open audit config '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("audit config '" + path + "' is not valid JSON: " + e.what());
  }
  return audit_config_from_json(j, std::filesystem::path(path).parent_path());
}

// ---------------------------------------------------------------------------
// Report model

struct FilterSection {
  bool enabled = false;
  std::size_t total = 0;
  std::size_t passed = 0;
  std::map<std::string, std::size_t> failures;  // reason -> count

  double success_rate() const { return total == 0 ? 0.0 : static_cast<double>(passed) / static_cast<double>(total); }
};

struct SalientSection {
  PartOfSpeech pos = PartOfSpeech::noun;
  std::vector<OddsRatioResult> male;
  std::vector<OddsRatioResult> female;
  bool truncated = false;
};

struct WeatRow {
  std::string label;  // "WEAT(MF)" or "WEAT(CF)"
  std::optional<double> effect_size;
  std::vector<std::string> targets_female;
  std::vector<std::string> targets_male;
  std::vector<std::string> skipped;
  std::string note;
};

struct StyleRow {
  StyleAspect aspect = StyleAspect::formality;
  std::optional<stats::TTestResult> result;  // a = male, b = female, alternative greater
  int stars = 0;
  std::string note;
};

struct AuditReport {
  std::string corpus_name;
  std::size_t n_male = 0;
  std::size_t n_female = 0;
  std::size_t n_pairs = 0;
  std::size_t n_unpaired = 0;
  std::size_t n_sentences = 0;
  std::uint64_t seed = 0;
  std::string scorer;
  std::map<std::string, std::string> model_ids;
  FilterSection filter;
  std::vector<SalientSection> salient;
  std::vector<OddsRatioResult> categories;
  std::vector<std::string> category_notes;
  std::vector<WeatRow> weat;
  std::vector<StyleRow> style;
  bool hallucination_enabled = false;
  bool hallucination_paired = false;
  std::size_t hallucinated_sentences = 0;
  std::vector<HallucinationBiasResult> hallucination;
  std::vector<std::string> artifacts;
};

// Failure inside a pipeline stage.
class StageError : public Error {
 public:
  enum class Kind { validation, scorer, other };

  StageError(std::string stage, std::string doc_id, Kind kind, const std::string& what)
      : Error("stage '" + stage + "'" + (doc_id.empty() ? std::string() : " (document '" + doc_id + "')") + ": " + what),
        stage_(std::move(stage)),
        doc_id_(std::move(doc_id)),
        kind_(kind) {}

  const std::string& stage() const { return stage_; }
  const std::string& doc_id() const { return doc_id_; }
  Kind kind() const { return kind_; }

 private:
  std::string stage_;
  std::string doc_id_;
  Kind kind_;
};

// ---------------------------------------------------------------------------
// JSON (de)serialization. Non-finite numbers are written as strings.

namespace detail {

inline nlohmann::json num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

inline double num_from(const nlohmann::json& j) {
  if (j.is_number()) return j.get<double>();
  const auto s = j.get<std::string>();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  throw ValidationError("bad number '" + s + "' in report");
}

inline nlohmann::json summary_json(const stats::Summary& s) {
  return {{"mean", num(s.mean)}, {"std", num(s.stddev)}, {"n", s.n}};
}

inline stats::Summary summary_from(const nlohmann::json& j) {
  return {num_from(j.at("mean")), num_from(j.at("std")), j.at("n").get<std::size_t>()};
}

inline nlohmann::json ttest_json(const stats::TTestResult& t) {
  return {{"t_statistic", num(t.t)}, {"df", num(t.df)}, {"p_value", num(t.p)}, {"alternative", stats::to_string(t.alternative)},
          {"sample_a", summary_json(t.a)}, {"sample_b", summary_json(t.b)}};
}

inline stats::TTestResult ttest_from(const nlohmann::json& j) {
  stats::TTestResult t;
  t.t = num_from(j.at("t_statistic"));
  t.df = num_from(j.at("df"));
  t.p = num_from(j.at("p_value"));
  t.alternative = stats::parse_alternative(j.at("alternative").get<std::string>());
  t.a = summary_from(j.at("sample_a"));
  t.b = summary_from(j.at("sample_b"));
  return t;
}

inline nlohmann::json or_json(const OddsRatioResult& r) {
  return {{"key", r.key},
          {"male_count", r.male_count},
          {"female_count", r.female_count},
          {"male_total", r.male_total},
          {"female_total", r.female_total},
          {"odds_ratio", num(r.or_value)},
          {"infinite", r.infinite},
          {"included", r.included}};
}

inline OddsRatioResult or_from(const nlohmann::json& j) {
  OddsRatioResult r;
  r.key = j.at("key").get<std::string>();
  r.male_count = j.at("male_count").get<std::uint64_t>();
  r.female_count = j.at("female_count").get<std::uint64_t>();
  r.male_total = j.at("male_total").get<std::uint64_t>();
  r.female_total = j.at("female_total").get<std::uint64_t>();
  r.or_value = num_from(j.at("odds_ratio"));
  r.infinite = j.at("infinite").get<bool>();
  r.included = j.at("included").get<bool>();
  return r;
}

}  // namespace detail

inline nlohmann::json to_json(const AuditReport& r) {
  using detail::num;
  nlohmann::json j;
  j["schema_version"] = kReportSchemaVersion;
  j["corpus"] = {{"name", r.corpus_name}, {"male_documents", r.n_male},   {"female_documents", r.n_female},
                 {"pairs", r.n_pairs},    {"unpaired", r.n_unpaired},     {"sentences", r.n_sentences},
                 {"seed", r.seed},        {"scorer", r.scorer},           {"model_ids", r.model_ids}};
  j["filter"] = {{"enabled", r.filter.enabled}, {"total", r.filter.total}, {"passed", r.filter.passed},
                 {"failures", r.filter.failures}, {"success_rate", num(r.filter.success_rate())}};
  nlohmann::json salient = nlohmann::json::array();
  for (const auto& s : r.salient) {
    nlohmann::json m = nlohmann::json::array(), f = nlohmann::json::array();
    for (const auto& o : s.male) m.push_back(detail::or_json(o));
    for (const auto& o : s.female) f.push_back(detail::or_json(o));
    salient.push_back({{"pos", to_string(s.pos)}, {"male", m}, {"female", f}, {"truncated", s.truncated}});
  }
  nlohmann::json cats = nlohmann::json::array();
  for (const auto& c : r.categories) cats.push_back(detail::or_json(c));
  nlohmann::json weat = nlohmann::json::array();
  for (const auto& w : r.weat)
    weat.push_back({{"label", w.label},
                    {"effect_size", w.effect_size ? num(*w.effect_size) : nlohmann::json(nullptr)},
                    {"targets_female", w.targets_female},
                    {"targets_male", w.targets_male},
                    {"skipped", w.skipped},
                    {"note", w.note}});
  j["lexical"] = {{"salient", salient}, {"categories", cats}, {"category_notes", r.category_notes}, {"weat", weat}};
  nlohmann::json style = nlohmann::json::array();
  for (const auto& s : r.style)
    style.push_back({{"aspect", to_string(s.aspect)},
                     {"test", s.result ? detail::ttest_json(*s.result) : nlohmann::json(nullptr)},
                     {"stars", s.stars},
                     {"note", s.note}});
  j["style"] = style;
  nlohmann::json hall = nlohmann::json::array();
  for (const auto& h : r.hallucination)
    hall.push_back({{"gender", to_string(h.gender)},
                    {"aspect", to_string(h.aspect)},
                    {"test", h.result ? detail::ttest_json(*h.result) : nlohmann::json(nullptr)},
                    {"stars", h.stars},
                    {"classification", to_string(h.classification)},
                    {"note", h.note}});
  j["hallucination"] = {{"enabled", r.hallucination_enabled},
                        {"paired", r.hallucination_paired},
                        {"hallucinated_sentences", r.hallucinated_sentences},
                        {"rows", hall}};
  j["artifacts"] = r.artifacts;
  return j;
}

inline AuditReport report_from_json(const nlohmann::json& j) {
  using detail::num_from;
  AuditReport r;
  try {
    if (j.at("schema_version").get<std::string>() != kReportSchemaVersion)
      throw ValidationError("unsupported report schema version");
    const auto& c = j.at("corpus");
    r.corpus_name = c.at("name").get<std::string>();
    r.n_male = c.at("male_documents").get<std::size_t>();
    r.n_female = c.at("female_documents").get<std::size_t>();
    r.n_pairs = c.at("pairs").get<std::size_t>();
    r.n_unpaired = c.at("unpaired").get<std::size_t>();
    r.n_sentences = c.at("sentences").get<std::size_t>();
    r.seed = c.at("seed").get<std::uint64_t>();
    r.scorer = c.at("scorer").get<std::string>();
    r.model_ids = c.at("model_ids").get<std::map<std::string, std::string>>();
    const auto& f = j.at("filter");
    r.filter.enabled = f.at("enabled").get<bool>();
    r.filter.total = f.at("total").get<std::size_t>();
    r.filter.passed = f.at("passed").get<std::size_t>();
    r.filter.failures = f.at("failures").get<std::map<std::string, std::size_t>>();
    const auto& lex = j.at("lexical");
    for (const auto& s : lex.at("salient")) {
      SalientSection sec;
      sec.pos = parse_pos(s.at("pos").get<std::string>());
      for (const auto& o : s.at("male")) sec.male.push_back(detail::or_from(o));
      for (const auto& o : s.at("female")) sec.female.push_back(detail::or_from(o));
      sec.truncated = s.at("truncated").get<bool>();
      r.salient.push_back(std::move(sec));
    }
    for (const auto& o : lex.at("categories")) r.categories.push_back(detail::or_from(o));
    r.category_notes = lex.at("category_notes").get<std::vector<std::string>>();
    for (const auto& w : lex.at("weat")) {
      WeatRow row;
      row.label = w.at("label").get<std::string>();
      if (!w.at("effect_size").is_null()) row.effect_size = num_from(w.at("effect_size"));
      row.targets_female = w.at("targets_female").get<std::vector<std::string>>();
      row.targets_male = w.at("targets_male").get<std::vector<std::string>>();
      row.skipped = w.at("skipped").get<std::vector<std::string>>();
      row.note = w.at("note").get<std::string>();
      r.weat.push_back(std::move(row));
    }
    for (const auto& s : j.at("style")) {
      StyleRow row;
      row.aspect = parse_aspect(s.at("aspect").get<std::string>());
      if (!s.at("test").is_null()) row.result = detail::ttest_from(s.at("test"));
      row.stars = s.at("stars").get<int>();
      row.note = s.at("note").get<std::string>();
      r.style.push_back(std::move(row));
    }
    const auto& h = j.at("hallucination");
    r.hallucination_enabled = h.at("enabled").get<bool>();
    r.hallucination_paired = h.at("paired").get<bool>();
    r.hallucinated_sentences = h.at("hallucinated_sentences").get<std::size_t>();
    for (const auto& row : h.at("rows")) {
      HallucinationBiasResult b;
      b.gender = parse_gender(row.at("gender").get<std::string>());
      b.aspect = parse_aspect(row.at("aspect").get<std::string>());
      if (!row.at("test").is_null()) b.result = detail::ttest_from(row.at("test"));
      b.stars = row.at("stars").get<int>();
      b.classification = parse_hallucination_class(row.at("classification").get<std::string>());
      b.note = row.at("note").get<std::string>();
      r.hallucination.push_back(std::move(b));
    }
    r.artifacts = j.at("artifacts").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed report: ") + e.what());
  }
  return r;
}

// ---------------------------------------------------------------------------
// Markdown rendering

namespace detail {

inline std::string fixed(double v, int digits = 2) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// 0.07, 1.58e-09: two decimals, scientific below 0.01.
inline std::string pvalue(double p) {
  if (p != 0.0 && p < 0.01) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2e", p);
    return buf;
  }
  return fixed(p);
}

inline std::string or_cell(const OddsRatioResult& r) { return r.infinite ? "inf" : fixed(r.or_value); }

inline std::string word_list(const std::vector<OddsRatioResult>& rs) {
  std::string s;
  for (const auto& r : rs) {
    if (!s.empty()) s += ", ";
    s += r.key + " (" + or_cell(r) + ")";
  }
  return s.empty() ? "-" : s;
}

inline std::string join(const std::vector<std::string>& xs) {
  std::string s;
  for (const auto& x : xs) s += (s.empty() ? "" : ", ") + x;
  return s;
}

}  // namespace detail

inline std::string render_markdown(const AuditReport& r) {
  using detail::fixed;
  using detail::pvalue;
  std::ostringstream md;
  md << "# Bias audit report: " << r.corpus_name << "\n\n";
  md << "## Corpus\n\n";
  md << "| Field | Value |\n|---|---|\n";
  md << "| Male documents | " << r.n_male << " |\n";
  md << "| Female documents | " << r.n_female << " |\n";
  md << "| Counterfactual pairs | " << r.n_pairs << " |\n";
  md << "| Unpaired documents | " << r.n_unpaired << " |\n";
  md << "| Sentences | " << r.n_sentences << " |\n";
  md << "| Seed | " << r.seed << " |\n";
  md << "| Scorer | " << r.scorer << " |\n";
  for (const auto& [task, id] : r.model_ids) md << "| Model (" << task << ") | " << id << " |\n";

  md << "\n## Generation filter\n\n";
  if (!r.filter.enabled) {
    md << "Filter disabled.\n";
  } else {
    md << "Success rate: " << r.filter.passed << " / " << r.filter.total << " = "
       << fixed(100.0 * r.filter.success_rate()) << "%\n";
    if (!r.filter.failures.empty()) {
      md << "\n| Failure | Count |\n|---|---|\n";
      for (const auto& [reason, n] : r.filter.failures) md << "| " << reason << " | " << n << " |\n";
    }
  }

  md << "\n## Lexical content\n\n";
  md << "### Salient words\n\n| Part of speech | Male | Female |\n|---|---|---|\n";
  for (const auto& s : r.salient)
    md << "| " << to_string(s.pos) << " | " << detail::word_list(s.male) << " | " << detail::word_list(s.female)
       << " |\n";
  for (const auto& s : r.salient)
    if (s.truncated) md << "\nNote: fewer than 2k " << to_string(s.pos) << "s passed the frequency floor.\n";

  md << "\n### Trait odds ratios\n\n";
  md << "Bold: higher odds in male documents; italic: higher odds in female documents.\n\n";
  md << "| Trait | Odds ratio | Male count | Female count |\n|---|---|---|---|\n";
  for (const auto& c : r.categories) {
    std::string cell = detail::or_cell(c);
    if (c.infinite || c.or_value > 1.0) cell = "**" + cell + "**";
    else if (c.or_value < 1.0) cell = "*" + cell + "*";
    md << "| " << c.key << " | " << cell << " | " << c.male_count << " | " << c.female_count << " |\n";
  }
  for (const auto& n : r.category_notes) md << "\nNote: " << n << "\n";

  md << "\n### Embedding association\n\n| Test | Score | Female targets | Male targets |\n|---|---|---|---|\n";
  for (const auto& w : r.weat)
    md << "| " << w.label << " | " << (w.effect_size ? fixed(*w.effect_size) : std::string("n/a")) << " | "
       << detail::join(w.targets_female) << " | " << detail::join(w.targets_male) << " |\n";
  for (const auto& w : r.weat) {
    if (!w.note.empty()) md << "\nNote (" << w.label << "): " << w.note << "\n";
    if (!w.skipped.empty()) md << "\nOut of vocabulary (" << w.label << "): " << detail::join(w.skipped) << "\n";
  }

  md << "\n## Language style\n\n";
  md << "Alternative: male fraction > female fraction. *p<0.1, **p<0.05, ***p<0.01.\n\n";
  md << "| Aspect | Statistic | df | p-value | Male mean | Female mean |\n|---|---|---|---|---|---|\n";
  std::vector<std::string> weak;
  for (const auto& s : r.style) {
    if (!s.result) {
      md << "| " << to_string(s.aspect) << " | n/a | n/a | n/a | n/a | n/a |\n";
      continue;
    }
    const auto& t = *s.result;
    md << "| " << to_string(s.aspect) << " | " << fixed(t.t) << " | " << fixed(t.df) << " | " << pvalue(t.p)
       << stats::render_stars(s.stars) << " | " << fixed(t.a.mean, 4) << " | " << fixed(t.b.mean, 4) << " |\n";
    if (t.p >= 0.05 && t.p < 0.1) weak.push_back(std::string(to_string(s.aspect)));
  }
  for (const auto& s : r.style)
    if (!s.note.empty()) md << "\nNote (" << to_string(s.aspect) << "): " << s.note << "\n";
  if (!weak.empty()) md << "\nWeak evidence (0.05 <= p < 0.1): " << detail::join(weak) << "\n";

  md << "\n## Hallucination bias\n\n";
  if (!r.hallucination_enabled) {
    md << "Hallucination analysis disabled.\n";
  } else {
    md << "Hallucinated sentences: " << r.hallucinated_sentences << " of " << r.n_sentences << ". Test: "
       << (r.hallucination_paired ? "paired" : "Welch") << "; male hallucinated > full, female hallucinated < full.\n\n";
    md << "| Aspect | Gender | Statistic | p-value | Classification |\n|---|---|---|---|---|\n";
    for (const auto& h : r.hallucination) {
      md << "| " << to_string(h.aspect) << " | " << (h.gender == Gender::male ? "M" : "F") << " | ";
      if (h.result)
        md << fixed(h.result->t) << " | " << pvalue(h.result->p) << stats::render_stars(h.stars);
      else
        md << "n/a | n/a";
      md << " | " << to_string(h.classification) << " |\n";
    }
    for (const auto& h : r.hallucination)
      if (!h.note.empty())
        md << "\nNote (" << to_string(h.aspect) << ", " << to_string(h.gender) << "): " << h.note << "\n";
  }
  md << "\n## Artifacts\n\n";
  for (const auto& a : r.artifacts) md << "- " << a << "\n";
  return md.str();
}

enum class ReportFormat { json, markdown };

inline std::string render_report(const AuditReport& r, ReportFormat fmt) {
  return fmt == ReportFormat::json ? to_json(r).dump(2) + "\n" : render_markdown(r);
}

inline void emit_report(const AuditReport& r, ReportFormat fmt, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write report '" + path.string() + "'");
  out << render_report(r, fmt);
}

// ---------------------------------------------------------------------------
// Pipeline

struct FilterRow {
  std::size_t line = 0;
  std::string id;
  FilterVerdict verdict;
};

// Applies filter_generation to the "text" field of every record. Records
// that pass are parsed into documents; failing ones are only reported.
inline GenderedCorpora filter_corpus(std::istream& in, const std::string& name, FilterSection& summary,
                                     std::vector<FilterRow>& rows) {
  summary = {};
  summary.enabled = true;
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
    if (!rec.is_object()) throw ValidationError("line " + std::to_string(lineno) + ": record is not an object");
    const std::string id = detail::required_string(rec, "id", lineno);
    if (auto [it, ok] = first_line.emplace(id, lineno); !ok)
      throw ValidationError("line " + std::to_string(lineno) + ": duplicate id '" + id + "' (first seen on line " +
                            std::to_string(it->second) + ")");
    const std::string body = detail::optional_string(rec, "text", lineno).value_or("");
    FilterRow row{lineno, id, filter_generation(body)};
    ++summary.total;
    if (row.verdict.passed()) {
      ++summary.passed;
      docs.push_back(document_from_json(rec, lineno));
    } else {
      ++summary.failures[std::string(to_string(row.verdict.reason))];
    }
    rows.push_back(std::move(row));
  }
  return GenderedCorpora::from_documents(name, std::move(docs));
}

inline std::shared_ptr<ScoringBackend> make_backend(const AuditConfig& cfg) {
  if (cfg.scorer == "mock") return std::make_shared<MockBackend>();
  HttpOptions http;
  http.token = cfg.scorer_token;
  return std::make_shared<HttpBackend>(cfg.scorer, http);
}

namespace detail {

class ArtifactWriter {
 public:
  explicit ArtifactWriter(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw ValidationError("cannot create output directory '" + dir_.string() + "': " + ec.message());
  }

  std::ofstream open(const std::string& name) {
    std::ofstream out(dir_ / name, std::ios::binary);
    if (!out) throw ValidationError("cannot write artifact '" + (dir_ / name).string() + "'");
    names_.push_back(name);
    return out;
  }

  const std::filesystem::path& dir() const { return dir_; }
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::filesystem::path dir_;
  std::vector<std::string> names_;
};

inline ScoreTask task_for(StyleAspect a) {
  switch (a) {
    case StyleAspect::formality: return ScoreTask::formality;
    case StyleAspect::positivity: return ScoreTask::sentiment;
    case StyleAspect::agency: return ScoreTask::agency;
  }
  return ScoreTask::formality;
}

// Runs `fn` and converts failures into StageError tagged with `stage`.
template <class Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const ScorerError& e) {
    throw StageError(name, "", StageError::Kind::scorer, e.what());
  } catch (const TaggingError& e) {
    throw StageError(name, e.doc_id(), StageError::Kind::validation, e.what());
  } catch (const HallucinationError& e) {
    throw StageError(name, e.doc_id(), StageError::Kind::validation, e.what());
  } catch (const Error& e) {
    throw StageError(name, "", StageError::Kind::validation, e.what());
  } catch (const std::exception& e) {
    throw StageError(name, "", StageError::Kind::other, e.what());
  }
}

}  // namespace detail

struct AuditResult {
  AuditReport report;
  std::filesystem::path out_dir;
};

// Runs every stage and writes intermediates plus report.json / report.md
// into cfg.out. Artifacts of completed stages survive a failing stage.
inline AuditResult run_audit(const AuditConfig& cfg, std::shared_ptr<ScoringBackend> backend = nullptr) {
  using detail::stage;
  if (cfg.corpus.empty()) throw StageError("config", "", StageError::Kind::validation, "no corpus configured");
  detail::ArtifactWriter art = stage("config", [&] { return detail::ArtifactWriter(cfg.out); });
  if (!backend) backend = stage("config", [&] { return make_backend(cfg); });
  ClientOptions copts;
  copts.batch_size = cfg.batch_size;
  copts.max_retries = cfg.max_retries;
  copts.max_in_flight = cfg.max_in_flight;
  ScoringClient client(backend, copts);

  AuditReport report;
  report.seed = cfg.seed;
  report.scorer = cfg.scorer;

  // load + filter
  GenderedCorpora corpora = stage("filter", [&] {
    std::ifstream in(cfg.corpus);
    if (!in) throw ValidationError("cannot open corpus file '" + cfg.corpus + "'");
    const std::string name = std::filesystem::path(cfg.corpus).filename().string();
    if (!cfg.filter) return read_corpus(in, name);
    std::vector<FilterRow> rows;
    auto c = filter_corpus(in, name, report.filter, rows);
    auto out = art.open("filter.jsonl");
    for (const auto& r : rows)
      out << nlohmann::json{{"line", r.line}, {"id", r.id}, {"verdict", to_string(r.verdict.reason)}, {"detail", r.verdict.detail}}.dump()
          << '\n';
    return c;
  });
  report.corpus_name = corpora.name;
  report.n_male = corpora.male_docs.size();
  report.n_female = corpora.female_docs.size();

  stage("config", [&] {
    if (corpora.male_docs.size() < 2 || corpora.female_docs.size() < 2)
      throw ValidationError("need at least 2 documents per gender after filtering (have " +
                            std::to_string(corpora.male_docs.size()) + " male, " +
                            std::to_string(corpora.female_docs.size()) + " female)");
    if (cfg.hallucination)
      corpora.for_each([](const Document& d) {
        if (!d.context)
          throw StageError("config", d.id, StageError::Kind::validation,
                           "hallucination analysis is enabled but the document has no context");
      });
    auto pairing = pair_by_source(corpora);
    report.n_pairs = pairing.pairs.size();
    report.n_unpaired = pairing.unpaired.size();
  });

  // segmentation
  std::map<std::string, std::vector<SentenceSpan>> sentences;
  std::vector<std::string> flat_sentences;
  std::vector<std::pair<std::string, std::size_t>> flat_index;  // (doc id, n sentences) in corpus order
  stage("segment", [&] {
    auto out = art.open("sentences.jsonl");
    corpora.for_each([&](const Document& d) {
      auto spans = split_sentences(d);
      for (const auto& s : spans) {
        out << nlohmann::json{{"doc_id", s.doc_id}, {"index", s.index}, {"start", s.start}, {"end", s.end}, {"text", s.text}}.dump()
            << '\n';
        flat_sentences.push_back(s.text);
      }
      flat_index.emplace_back(d.id, spans.size());
      sentences[d.id] = std::move(spans);
    });
    report.n_sentences = flat_sentences.size();
  });

  // sentence labels per aspect
  std::map<StyleAspect, SentenceLabels> labels;
  StyleScoreTable scores;
  stage("score", [&] {
    for (auto a : kStyleAspects) {
      const auto probs = client.classify_batch(detail::task_for(a), flat_sentences);
      std::size_t k = 0;
      for (const auto& [id, n] : flat_index) {
        auto& lab = labels[a][id];
        for (std::size_t i = 0; i < n; ++i, ++k) lab.push_back(probs[k][1] >= cfg.label_threshold ? 1 : 0);
        scores[a][id] = style_fraction(id, a, lab);
      }
    }
    auto out = art.open("labels.jsonl");
    for (const auto& [id, n] : flat_index) {
      nlohmann::json row{{"doc_id", id}};
      for (auto a : kStyleAspects) {
        row[std::string(to_string(a))] = labels[a][id];
        row[std::string(to_string(a)) + "_fraction"] = scores[a][id].fraction;
      }
      out << row.dump() << '\n';
    }
  });

  // lexical content
  stage("lexical", [&] {
    PretaggedTagger tagger;
    if (!cfg.pos_tags.empty()) {
      std::ifstream in(cfg.pos_tags);
      if (!in) throw ValidationError("cannot open pos tag file '" + cfg.pos_tags + "'");
      tagger = PretaggedTagger::from_stream(in);
    } else {
      const auto tagged = client.pos_tag_batch(flat_sentences);
      std::map<std::string, std::vector<TaggedToken>> by_doc;
      std::size_t k = 0;
      auto out = art.open("pos_tags.jsonl");
      for (const auto& [id, n] : flat_index) {
        auto& toks = by_doc[id];
        for (std::size_t i = 0; i < n; ++i, ++k) toks.insert(toks.end(), tagged[k].begin(), tagged[k].end());
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& t : toks) arr.push_back({t.token, to_string(t.tag)});
        out << nlohmann::json{{"id", id}, {"tokens", arr}}.dump() << '\n';
      }
      tagger = PretaggedTagger(std::move(by_doc));
    }

    auto counts_out = art.open("word_counts.jsonl");
    auto dump_counts = [&](const WordCounts& wc) {
      counts_out << nlohmann::json{{"gender", to_string(wc.gender)}, {"pos", to_string(wc.pos)}, {"total", wc.total},
                                   {"counts", wc.counts}}.dump()
                 << '\n';
    };

    const auto lexicons = cfg.lexicon.empty() ? bundled_lexicons() : load_lexicons(cfg.lexicon);
    auto in_lexicon = [&](const std::string& w) {
      return std::any_of(lexicons.begin(), lexicons.end(), [&](const LexiconCategory& c) { return c.matches(w); });
    };

    std::vector<std::string> fem_targets, male_targets;
    for (auto pos : {PartOfSpeech::noun, PartOfSpeech::adjective}) {
      const auto m = count_words(corpora, Gender::male, pos, &tagger);
      const auto f = count_words(corpora, Gender::female, pos, &tagger);
      dump_counts(m);
      dump_counts(f);
      SalientSection sec;
      sec.pos = pos;
      if (m.total == 0 && f.total == 0) {
        sec.truncated = true;
      } else {
        auto sw = salient_words(m, f, cfg.top_k, cfg.min_count);
        sec.male = std::move(sw.top_male);
        sec.female = std::move(sw.top_female);
        sec.truncated = sw.truncated;
      }
      for (const auto& o : sec.male)
        if (in_lexicon(o.key)) male_targets.push_back(o.key);
      for (const auto& o : sec.female)
        if (in_lexicon(o.key)) fem_targets.push_back(o.key);
      report.salient.push_back(std::move(sec));
    }

    const auto m_all = count_words(corpora, Gender::male, PartOfSpeech::all_tokens, nullptr);
    const auto f_all = count_words(corpora, Gender::female, PartOfSpeech::all_tokens, nullptr);
    dump_counts(m_all);
    dump_counts(f_all);
    for (const auto& cat : lexicons) {
      try {
        report.categories.push_back(category_odds_ratio(cat, m_all, f_all));
      } catch (const ValidationError& e) {
        report.category_notes.push_back(e.what());
      }
    }

    const auto& lists = [&]() -> WeatWordLists {
      if (cfg.weat_lists.empty()) return bundled_weat_lists();
      std::ifstream in(cfg.weat_lists);
      if (!in) throw ValidationError("cannot open WEAT list file '" + cfg.weat_lists + "'");
      return parse_weat_lists(in);
    }();
    std::optional<EmbeddingTable> emb;
    if (!cfg.embeddings.empty()) emb = EmbeddingTable::load(cfg.embeddings);
    for (const auto& [label, attr_f, attr_m] :
         {std::tuple{"WEAT(MF)", &lists.female_names, &lists.male_names},
          std::tuple{"WEAT(CF)", &lists.family, &lists.career}}) {
      WeatRow row;
      row.label = label;
      row.targets_female = fem_targets;
      row.targets_male = male_targets;
      if (!emb) {
        row.note = "no embedding table configured";
      } else {
        try {
          auto w = weat_effect_size(fem_targets, male_targets, *attr_f, *attr_m, *emb);
          row.effect_size = w.effect_size;
          row.skipped = std::move(w.skipped);
        } catch (const Error& e) {
          row.note = e.what();
        }
      }
      report.weat.push_back(std::move(row));
    }
    auto out = art.open("lexical.json");
    out << to_json(report)["lexical"].dump(2) << '\n';
  });

  // language style
  stage("style", [&] {
    for (auto a : kStyleAspects) {
      StyleRow row;
      row.aspect = a;
      try {
        auto r = style_bias_test(corpora, scores, a);
        row.result = r.test;
        row.stars = r.stars;
      } catch (const StatsError& e) {
        row.note = e.what();
      }
      report.style.push_back(std::move(row));
    }
  });

  // hallucination
  report.hallucination_enabled = cfg.hallucination;
  report.hallucination_paired = cfg.paired_hallucination_test;
  if (cfg.hallucination) {
    stage("hallucination", [&] {
      std::vector<NliPair> pairs;
      corpora.for_each([&](const Document& d) {
        for (const auto& s : sentences.at(d.id)) pairs.emplace_back(*d.context, s.text);
      });
      const auto probs = client.nli_batch(pairs);
      std::map<std::string, HallucinationRecord> records;
      std::size_t k = 0;
      auto out = art.open("hallucinations.jsonl");
      corpora.for_each([&](const Document& d) {
        const std::size_t n = sentences.at(d.id).size();
        const std::size_t begin = k;
        EntailmentScorer slice = [&](const std::vector<NliPair>& ps) {
          return std::vector<std::array<double, 3>>(probs.begin() + static_cast<std::ptrdiff_t>(begin),
                                                    probs.begin() + static_cast<std::ptrdiff_t>(begin + ps.size()));
        };
        auto rec = detect_hallucinations(d, slice);
        k += n;
        report.hallucinated_sentences += rec.flagged.size();
        out << to_json(rec).dump() << '\n';
        records.emplace(d.id, std::move(rec));
      });
      std::map<StyleAspect, std::map<Gender, HallucinationSamples>> samples;
      for (auto a : kStyleAspects) samples[a] = hallucination_style_samples(corpora, records, labels[a]);
      for (auto a : kStyleAspects)
        for (Gender g : {Gender::female, Gender::male}) {
          try {
            report.hallucination.push_back(hallucination_bias_test(g, a, samples[a][g], cfg.paired_hallucination_test));
          } catch (const StatsError& e) {
            HallucinationBiasResult row;
            row.gender = g;
            row.aspect = a;
            row.note = e.what();
            report.hallucination.push_back(std::move(row));
          }
        }
    });
  }

  report.model_ids = client.model_ids();
  report.artifacts = art.names();
  report.artifacts.push_back("report.json");
  report.artifacts.push_back("report.md");
  stage("report", [&] {
    emit_report(report, ReportFormat::json, art.dir() / "report.json");
    emit_report(report, ReportFormat::markdown, art.dir() / "report.md");
  });
  return {std::move(report), art.dir()};
}

}  // namespace biasaudit
