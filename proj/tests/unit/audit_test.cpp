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

#include <cstdlib>
#include <fstream>

#include <gtest/gtest.h>

#include "biasaudit/audit.hpp"
#include "test_util.hpp"

namespace biasaudit {
namespace {

AuditConfig fixture_config(const std::filesystem::path& out) {
  auto cfg = load_audit_config(testutil::data_path("fixtures/audit_config.json"));
  cfg.out = out.string();
  return cfg;
}

const OddsRatioResult& category(const AuditReport& r, std::string_view key) {
  for (const auto& c : r.categories)
    if (c.key == key) return c;
  throw std::runtime_error("no category " + std::string(key));
}

class AuditFixture : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new testutil::TempDir("audit");
    result_ = new AuditResult(run_audit(fixture_config(dir_->path() / "a")));
  }
  static void TearDownTestSuite() {
    delete result_;
    delete dir_;
  }
  static testutil::TempDir* dir_;
  static AuditResult* result_;
};
testutil::TempDir* AuditFixture::dir_ = nullptr;
AuditResult* AuditFixture::result_ = nullptr;

TEST_F(AuditFixture, CorpusAndFilter) {
  const auto& r = result_->report;
  EXPECT_EQ(r.n_male, 20u);
  EXPECT_EQ(r.n_female, 20u);
  EXPECT_EQ(r.n_pairs, 20u);
  EXPECT_EQ(r.filter.total, 43u);
  EXPECT_EQ(r.filter.passed, 40u);
  EXPECT_EQ(r.filter.failures.size(), 3u);
  EXPECT_EQ(r.model_ids.at("formality"), "mock-v1");
}

TEST_F(AuditFixture, TraitSignStructure) {
  const auto& r = result_->report;
  for (auto k : {"Masculine", "Agentic"}) {
    const auto& c = category(r, k);
    EXPECT_TRUE(c.infinite || c.or_value > 1.0) << k;
  }
  for (auto k : {"Feminine", "Communal"}) EXPECT_LT(category(r, k).or_value, 1.0) << k;
}

TEST_F(AuditFixture, AgencyIsSignificantlyMale) {
  const auto& r = result_->report;
  ASSERT_EQ(r.style.size(), 3u);
  const auto& agency = r.style[2];
  EXPECT_EQ(agency.aspect, StyleAspect::agency);
  ASSERT_TRUE(agency.result);
  EXPECT_GT(agency.result->t, 0);
  EXPECT_EQ(agency.stars, 3);
}

TEST_F(AuditFixture, WeatAndHallucinationSections) {
  const auto& r = result_->report;
  ASSERT_EQ(r.weat.size(), 2u);
  EXPECT_EQ(r.weat[0].label, "WEAT(MF)");
  EXPECT_EQ(r.weat[1].label, "WEAT(CF)");
  EXPECT_TRUE(r.hallucination_enabled);
  EXPECT_EQ(r.hallucination.size(), 6u);
  EXPECT_GT(r.hallucinated_sentences, 0u);
}

TEST_F(AuditFixture, ArtifactsWritten) {
  for (auto name : {"filter.jsonl", "sentences.jsonl", "labels.jsonl", "pos_tags.jsonl", "word_counts.jsonl",
                    "lexical.json", "hallucinations.jsonl", "report.json", "report.md"})
    EXPECT_TRUE(std::filesystem::exists(result_->out_dir / name)) << name;
}

TEST_F(AuditFixture, JsonAndMarkdownAgree) {
  const auto json = testutil::read_file(result_->out_dir / "report.json");
  const auto md = testutil::read_file(result_->out_dir / "report.md");
  const auto back = report_from_json(nlohmann::json::parse(json));
  EXPECT_EQ(render_markdown(back), md);
  EXPECT_EQ(to_json(back).dump(2) + "\n", json);
  EXPECT_NE(md.find("Success rate: 40 / 43"), std::string::npos);
  EXPECT_NE(md.find("| WEAT(MF) |"), std::string::npos);
  EXPECT_NE(md.find("| WEAT(CF) |"), std::string::npos);
}

TEST_F(AuditFixture, DeterministicAcrossRuns) {
  const auto again = run_audit(fixture_config(dir_->path() / "b"));
  for (auto name : {"report.json", "report.md", "labels.jsonl", "hallucinations.jsonl", "lexical.json"})
    EXPECT_EQ(testutil::read_file(result_->out_dir / name), testutil::read_file(again.out_dir / name)) << name;
}

TEST(AuditReportRender, StarsAndWeakEvidence) {
  AuditReport r;
  r.corpus_name = "x";
  StyleRow row;
  row.aspect = StyleAspect::formality;
  stats::TTestResult t;
  t.t = 2.0;
  t.df = 10;
  t.p = 0.03;
  row.result = t;
  row.stars = stats::significance_stars(t.p);
  r.style.push_back(row);
  row.aspect = StyleAspect::agency;
  row.result->p = 0.07;
  row.stars = stats::significance_stars(0.07);
  r.style.push_back(row);
  const auto md = render_markdown(r);
  EXPECT_NE(md.find("0.03**"), std::string::npos);
  EXPECT_NE(md.find("0.07*"), std::string::npos);
  EXPECT_NE(md.find("Weak evidence (0.05 <= p < 0.1): agency"), std::string::npos);
}

void write_lines(const std::filesystem::path& p, const std::vector<std::string>& lines) {
  std::ofstream out(p);
  for (const auto& l : lines) out << l << "\n";
}

TEST(AuditConfigErrors, MissingContextWithHallucination) {
  testutil::TempDir dir("nocontext");
  std::vector<std::string> lines;
  for (int i = 0; i < 3; ++i) {
    lines.push_back(R"({"id":"m)" + std::to_string(i) + R"(","gender":"male","text":"I recommend him. He is a strong leader. He works hard."})");
    lines.push_back(R"({"id":"f)" + std::to_string(i) + R"(","gender":"female","text":"I recommend her. She is a kind friend. She helps."})");
  }
  write_lines(dir / "c.jsonl", lines);
  AuditConfig cfg;
  cfg.corpus = (dir / "c.jsonl").string();
  cfg.out = (dir / "out").string();
  cfg.hallucination = true;
  try {
    run_audit(cfg);
    FAIL();
  } catch (const StageError& e) {
    EXPECT_EQ(e.kind(), StageError::Kind::validation);
    EXPECT_EQ(e.stage(), "config");
  }
  cfg.hallucination = false;
  EXPECT_NO_THROW(run_audit(cfg));
}

TEST(AuditConfigErrors, RejectsBadKeys) {
  EXPECT_THROW(audit_config_from_json(nlohmann::json::parse(R"({"corpus":"x","bogus":1})")), ValidationError);
  EXPECT_THROW(audit_config_from_json(nlohmann::json::parse(R"({"corpus":"x","top_k":0})")), ValidationError);
  EXPECT_THROW(audit_config_from_json(nlohmann::json::parse(R"({"corpus":"x","label_threshold":1.0})")),
               ValidationError);
}

int run_cli(const std::string& args, const std::filesystem::path& log) {
  const std::string cmd = std::string(BIASAUDIT_CLI) + " " + args + " >" + log.string() + " 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

TEST(Cli, ExitCodes) {
  testutil::TempDir dir("cli");
  const auto cfg = testutil::data_path("fixtures/audit_config.json");
  EXPECT_EQ(run_cli("audit --config " + cfg + " --out " + (dir / "ok").string(), dir / "ok.log"), 0);
  EXPECT_EQ(run_cli("report --out " + (dir / "ok").string(), dir / "report.log"), 0);
  EXPECT_EQ(testutil::read_file(dir / "report.log"), testutil::read_file(dir / "ok" / "report.md"));
  EXPECT_EQ(run_cli("audit --corpus /nonexistent.jsonl --out " + (dir / "bad").string(), dir / "bad.log"), 1);
  EXPECT_EQ(run_cli("audit --config " + cfg + " --scorer http://127.0.0.1:1 --out " + (dir / "down").string(),
                    dir / "down.log"),
            2);
  EXPECT_EQ(run_cli("frobnicate", dir / "usage.log"), 1);
}

}  // namespace
}  // namespace biasaudit
