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

// Minimal library example: filter a JSONL corpus, then print trait-level
// odds ratios with the bundled lexicons. No scorer needed.
//
//   trait_odds data/fixtures/audit_corpus.jsonl

#include <cstdio>
#include <fstream>

#include "biasaudit/audit.hpp"

int main(int argc, char** argv) {
  namespace ba = biasaudit;
  if (argc != 2) {
    std::fprintf(stderr, "usage: %s CORPUS.jsonl\n", argv[0]);
    return 1;
  }
  try {
    std::ifstream in(argv[1]);
    if (!in) throw ba::ValidationError(std::string("cannot open '") + argv[1] + "'");
    ba::FilterSection stats;
    std::vector<ba::FilterRow> rows;
    const auto corpora = ba::filter_corpus(in, argv[1], stats, rows);
    std::printf("kept %zu of %zu generations\n\n", stats.passed, stats.total);
    const auto male = ba::count_words(corpora, ba::Gender::male, ba::PartOfSpeech::all_tokens, nullptr);
    const auto female = ba::count_words(corpora, ba::Gender::female, ba::PartOfSpeech::all_tokens, nullptr);
    std::printf("%-14s %10s %6s %6s\n", "trait", "OR", "male", "female");
    for (const auto& cat : ba::bundled_lexicons()) {
      try {
        const auto r = ba::category_odds_ratio(cat, male, female);
        if (r.infinite) std::printf("%-14s %10s %6llu %6llu\n", cat.name.c_str(), "inf",
                                    static_cast<unsigned long long>(r.male_count), static_cast<unsigned long long>(r.female_count));
        else std::printf("%-14s %10.3f %6llu %6llu\n", cat.name.c_str(), r.or_value,
                    static_cast<unsigned long long>(r.male_count), static_cast<unsigned long long>(r.female_count));
      } catch (const ba::ValidationError&) {
        std::printf("%-14s %10s %6d %6d\n", cat.name.c_str(), "-", 0, 0);
      }
    }
  } catch (const ba::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
