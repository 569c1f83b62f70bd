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

// biasaudit command-line interface.
//
//   biasaudit preprocess --corpus bios.jsonl --out DIR [--seed N]
//   biasaudit prompts [--corpus bios.jsonl] [--out FILE]
//   biasaudit filter --corpus generations.jsonl --out DIR
//   biasaudit audit --config audit.json [--corpus F] [--seed N] [--scorer mock|URL] [--out DIR]
//   biasaudit report --out DIR [--format markdown|json]
//
// Exit status: 0 success, 1 validation or statistics error, 2 scorer error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "biasaudit/audit.hpp"
#include "biasaudit/corpus.hpp"
#include "biasaudit/preprocess.hpp"

namespace fs = std::filesystem;
using namespace biasaudit;

namespace {

std::ofstream open_out(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + p.string() + "'");
  return out;
}

std::string joined_context(const Biography& b) {
  std::string s;
  for (const auto& p : b.paragraphs) s += (s.empty() ? "" : "\n\n") + p;
  return s;
}

int cmd_preprocess(const std::string& corpus, const std::string& out_dir, std::uint64_t seed, std::size_t paragraphs,
                   const std::string& recommender) {
  const auto bios = load_biographies(corpus);
  AugmentOptions opts;
  opts.seed = seed;
  opts.paragraphs_per_bio = paragraphs;
  const auto pairs = augment_biographies(bios, opts);
  const fs::path dir(out_dir);
  auto aug = open_out(dir / "augmented.jsonl");
  auto prompts = open_out(dir / "cbg_prompts.jsonl");
  auto changes = open_out(dir / "changes.jsonl");
  std::size_t n_changes = 0;
  for (const auto& p : pairs)
    for (Gender g : {Gender::male, Gender::female}) {
      const Biography& b = g == Gender::male ? p.male : p.female;
      aug << to_json(b).dump() << '\n';
      prompts << nlohmann::json{{"id", b.source_id + "-" + std::string(to_string(g))},
                                {"gender", to_string(g)},
                                {"source_id", b.source_id},
                                {"context", joined_context(b)},
                                {"prompt", build_cbg_prompt(b, recommender)}}
                     .dump()
              << '\n';
      for (const auto& c : g == Gender::male ? p.male_changes : p.female_changes) {
        changes << nlohmann::json{{"source_id", b.source_id}, {"gender", to_string(g)}, {"kind", to_string(c.kind)},
                                  {"from", c.from}, {"to", c.to}}
                       .dump()
                << '\n';
        ++n_changes;
      }
    }
  auto meta = open_out(dir / "preprocess_meta.json");
  meta << nlohmann::json{{"seed", seed}, {"biographies", bios.size()}, {"paragraphs_per_bio", paragraphs},
                         {"changes", n_changes}}
              .dump(2)
       << '\n';
  std::cout << "augmented " << bios.size() << " biographies into " << 2 * pairs.size() << " versions (" << n_changes
            << " edits) -> " << dir.string() << "\n";
  return 0;
}

int cmd_prompts(const std::string& corpus, const std::string& out, const std::string& recommender) {
  std::optional<std::ofstream> file;
  if (!out.empty()) file = open_out(out);
  std::ostream& os = file ? static_cast<std::ostream&>(*file) : std::cout;
  if (corpus.empty()) {
    for (const auto& [d, prompt] : build_clg_prompts())
      os << nlohmann::json{{"name", d.name}, {"gender", to_string(d.gender)}, {"age", d.age},
                           {"occupation", d.occupation}, {"prompt", prompt}}
                .dump()
         << '\n';
  } else {
    for (const auto& b : load_biographies(corpus))
      os << nlohmann::json{{"source_id", b.source_id}, {"gender", to_string(b.person_gender)},
                           {"prompt", build_cbg_prompt(b, recommender)}}
                .dump()
         << '\n';
  }
  return 0;
}

int cmd_filter(const std::string& corpus, const std::string& out_dir) {
  std::ifstream in(corpus);
  if (!in) throw ValidationError("cannot open corpus file '" + corpus + "'");
  FilterSection summary;
  std::vector<FilterRow> rows;
  const auto kept = filter_corpus(in, fs::path(corpus).filename().string(), summary, rows);
  const fs::path dir(out_dir);
  auto verdicts = open_out(dir / "filter.jsonl");
  for (const auto& r : rows)
    verdicts << nlohmann::json{{"line", r.line}, {"id", r.id}, {"verdict", to_string(r.verdict.reason)},
                               {"detail", r.verdict.detail}}
                    .dump()
             << '\n';
  auto passed = open_out(dir / "filtered.jsonl");
  write_corpus(passed, kept);
  std::cout << "success rate: " << summary.passed << "/" << summary.total << "\n";
  return 0;
}

int cmd_audit(const std::string& config, const std::string& corpus, std::optional<std::uint64_t> seed,
              const std::string& scorer, const std::string& out) {
  AuditConfig cfg = config.empty() ? AuditConfig{} : load_audit_config(config);
  if (!corpus.empty()) cfg.corpus = corpus;
  if (seed) cfg.seed = *seed;
  if (!scorer.empty()) cfg.scorer = scorer;
  if (!out.empty()) cfg.out = out;
  const auto result = run_audit(cfg);
  std::cout << "report written to " << (result.out_dir / "report.md").string() << "\n";
  return 0;
}

int cmd_report(const std::string& out_dir, const std::string& format) {
  const fs::path dir(out_dir);
  std::ifstream in(dir / "report.json");
  if (!in) throw ValidationError("cannot open '" + (dir / "report.json").string() + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("report.json is not valid JSON: ") + e.what());
  }
  std::cout << render_report(report_from_json(j), format == "json" ? ReportFormat::json : ReportFormat::markdown);
  return 0;
}

int exit_code(StageError::Kind k) { return k == StageError::Kind::scorer ? 2 : 1; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gender-bias audit for generated reference letters"};
  app.require_subcommand(1);

  std::string corpus, out, config, scorer, format = "markdown", recommender = "professor";
  std::uint64_t seed = 0;
  std::size_t paragraphs = 2;

  auto* pre = app.add_subcommand("preprocess", "Counterfactual augmentation and CBG prompts");
  pre->add_option("--corpus", corpus, "biography JSONL")->required();
  pre->add_option("--out", out, "output directory")->required();
  pre->add_option("--seed", seed, "random seed");
  pre->add_option("--paragraphs", paragraphs, "paragraphs sampled per biography");
  pre->add_option("--recommender", recommender, "recommender occupation in CBG prompts");

  auto* prm = app.add_subcommand("prompts", "Emit CLG prompts, or CBG prompts for --corpus");
  prm->add_option("--corpus", corpus, "biography JSONL (CBG mode)");
  prm->add_option("--out", out, "output file (default stdout)");
  prm->add_option("--recommender", recommender, "recommender occupation in CBG prompts");

  auto* flt = app.add_subcommand("filter", "Drop failed generations");
  flt->add_option("--corpus", corpus, "generation JSONL")->required();
  flt->add_option("--out", out, "output directory")->required();

  std::optional<std::uint64_t> audit_seed;
  auto* aud = app.add_subcommand("audit", "Run the full audit");
  aud->add_option("--config", config, "audit config JSON");
  aud->add_option("--corpus", corpus, "generation JSONL (overrides config)");
  aud->add_option("--seed", audit_seed, "seed (overrides config)");
  aud->add_option("--scorer", scorer, "'mock' or scorer base URL (overrides config)");
  aud->add_option("--out", out, "output directory (overrides config)");

  auto* rep = app.add_subcommand("report", "Re-render an audit report");
  rep->add_option("--out", out, "audit output directory")->required();
  rep->add_option("--format", format, "markdown or json")->check(CLI::IsMember({"markdown", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*pre) return cmd_preprocess(corpus, out, seed, paragraphs, recommender);
    if (*prm) return cmd_prompts(corpus, out, recommender);
    if (*flt) return cmd_filter(corpus, out);
    if (*aud) return cmd_audit(config, corpus, audit_seed, scorer, out);
    if (*rep) return cmd_report(out, format);
  } catch (const StageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const ScorerError& e) {
    std::cerr << "scorer error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
