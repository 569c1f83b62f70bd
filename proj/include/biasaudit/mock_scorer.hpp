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

// Deterministic rule-based scorer. Lets the whole pipeline run offline;
// the rules are simple on purpose and make no claim to model quality.
//
//   formality  informal if the sentence contains '!' or an English
//              contraction ('t, 's after a pronoun, 're, 've, 'll, 'm, 'd)
//   sentiment  positive if the sentence ends with '!' or contains a token
//              of the Standout lexicon
//   agency     agentic if Agentic-lexicon hits exceed Communal-lexicon hits
//   nli        entailment if the trimmed hypothesis is a substring of the
//              premise, neutral otherwise
//   pos        dictionary lookup over tokenize_for_tagging(); unknown
//              tokens are OTHER

#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "biasaudit/lexical.hpp"
#include "biasaudit/scoring.hpp"

namespace biasaudit {

inline const std::map<std::string, CoarseTag, std::less<>>& mock_pos_dictionary() {
  static const std::map<std::string, CoarseTag, std::less<>> kDict = [] {
    std::map<std::string, CoarseTag, std::less<>> d;
    auto add = [&](CoarseTag tag, std::initializer_list<const char*> words) {
      for (const char* w : words) d[w] = tag;
    };
    add(CoarseTag::PRON, {"i", "me", "my", "mine", "myself", "you", "your", "yours", "he", "him", "his", "himself",
                          "she", "her", "hers", "herself", "it", "its", "we", "us", "our", "they", "them",
                          "their", "themselves", "who", "whom", "everyone", "anyone", "someone"});
    add(CoarseTag::VERB, {"is", "are", "was", "were", "be", "been", "being", "am", "has", "have", "had", "do",
                          "does", "did", "recommend", "recommends", "recommended", "work", "works", "worked",
                          "lead", "leads", "led", "manage", "manages", "managed", "help", "helps", "helped",
                          "write", "wrote", "written", "know", "known", "make", "makes", "made", "take", "takes",
                          "took", "bring", "brings", "brought", "earn", "earned", "became", "become", "starred",
                          "performed", "perform", "performs", "cares", "supports", "supported", "assists",
                          "assisted", "collaborate", "collaborates", "listens", "decides", "decided", "drives",
                          "drove", "built", "founded", "launched", "directed", "won", "released", "appeared",
                          "toured", "trained", "studied", "joined", "moved", "grew", "married", "raised", "began",
                          "met", "thanked", "saw", "gave", "told", "believe", "hope", "am", "will", "can",
                          "would", "should", "commands", "negotiates", "challenges", "asserts", "nurtures",
                          "mentors", "agree", "agrees", "connects", "hesitate", "contact", "excel", "excels"});
    add(CoarseTag::ADJ,
        {"kind", "warm", "caring", "gentle", "supportive", "compassionate", "sympathetic", "pleasant", "polite",
         "loyal", "helpful", "sensitive", "nurturing", "cheerful", "affectionate", "tender", "quiet", "agreeable",
         "understanding", "considerate", "cooperative", "emotional", "lovely", "beautiful", "stunning", "delightful",
         "confident", "ambitious", "assertive", "independent", "daring", "outspoken", "aggressive", "dominant",
         "decisive", "determined", "competitive", "courageous", "analytical", "logical", "objective", "intelligent",
         "smart", "brilliant", "bright", "clever", "capable", "competent", "skilled", "creative", "talented",
         "exceptional", "outstanding", "excellent", "remarkable", "extraordinary", "superb", "magnificent", "best",
         "leading", "respectful", "humble", "proud", "reputable", "authentic", "generous", "charming", "reliable",
         "dependable", "professional", "hardworking", "dedicated", "great", "good", "new", "young", "old",
         "successful", "famous", "popular", "early", "personal", "strong", "natural", "true", "unique", "positive",
         "able", "active", "adventurous", "athletic", "autonomous", "stubborn", "superior", "self-reliant",
         "interpersonal", "communal", "wonderful", "happy", "reserved", "tactful", "easygoing"});
    add(CoarseTag::NOUN,
        {"leader", "leadership", "talent", "skill", "skills", "ability", "abilities", "genius", "expert", "expertise",
         "intellect", "insight", "research", "analysis", "career", "business", "office", "executive", "management",
         "position", "profession", "promotion", "occupation", "corporation", "salary", "industry", "company", "team",
         "teams", "project", "projects", "role", "roles", "work", "colleague", "colleagues", "man", "woman", "actor",
         "actress", "writer", "chef", "artist", "dancer", "comedian", "musician", "model", "podcaster", "athlete",
         "student", "entrepreneur", "family", "home", "child", "children", "mother", "father", "son", "daughter",
         "husband", "wife", "parents", "parent", "marriage", "wedding", "relatives", "cousins", "kindness", "warmth",
         "compassion", "empathy", "sympathy", "affection", "care", "help", "support", "assistance", "agreement",
         "confidence", "ambition", "independence", "dominance", "force", "courage", "determination", "competition",
         "challenge", "challenges", "decision", "decisions", "success", "achievement", "achievements", "award",
         "awards", "film", "films", "album", "show", "shows", "stage", "kitchen", "restaurant", "book", "books",
         "novel", "performance", "performances", "audience", "audiences", "fans", "community", "friend", "friends",
         "letter", "recommendation", "reference", "person", "people", "individual", "year", "years", "time", "flair",
         "knack", "gift", "brain", "aptitude", "capacity", "instinct", "excellence", "integrity", "beauty", "grace",
         "delight", "icon", "joy", "trust", "commitment", "connection", "cheer", "loyalty", "nurture", "tact",
         "vision", "strategy", "initiative", "drive", "passion", "dedication", "professionalism", "reputation"});
    return d;
  }();
  return kDict;
}

class MockBackend final : public ScoringBackend {
 public:
  static constexpr std::string_view kModelId = "mock-v1";

  ScoreResponse score(const ScoreRequest& req) override {
    validate(req);
    ScoreResponse resp;
    resp.batch_id = req.batch_id;
    resp.model_id = std::string(kModelId);
    switch (req.task) {
      case ScoreTask::nli:
        for (const auto& [premise, hypothesis] : req.pairs) resp.probabilities.push_back(nli(premise, hypothesis));
        break;
      case ScoreTask::pos:
        for (const auto& s : req.sentences) resp.tags.push_back(pos(s));
        break;
      default:
        for (const auto& s : req.sentences) {
          const bool positive = req.task == ScoreTask::formality   ? formal(s)
                                : req.task == ScoreTask::sentiment ? positive_sentiment(s)
                                                                   : agentic(s);
          resp.probabilities.push_back(positive ? std::vector<double>{0.0, 1.0} : std::vector<double>{1.0, 0.0});
        }
    }
    return resp;
  }

  HealthStatus health() override {
    HealthStatus h;
    h.ok = true;
    for (auto t : kScoreTasks) h.models[std::string(to_string(t))] = std::string(kModelId);
    return h;
  }

  static bool formal(std::string_view s) {
    if (s.find('!') != std::string_view::npos) return false;
    static const std::set<std::string, std::less<>> kContractions = {"t", "re", "ve", "ll", "m", "d"};
    static const std::set<std::string, std::less<>> kPronouns = {"it", "he", "she", "that", "there", "what", "who"};
    const auto toks = tokenize_for_tagging(s);
    for (std::size_t i = 1; i + 1 < toks.size(); ++i) {
      if (toks[i] != "'") continue;
      const auto next = text::lower(toks[i + 1]);
      if (kContractions.count(next)) return false;
      if (next == "s" && kPronouns.count(text::lower(toks[i - 1]))) return false;
    }
    return true;
  }

  static bool positive_sentiment(std::string_view s) {
    auto t = text::trim(s);
    while (!t.empty() && (t.back() == '"' || t.back() == '\'' || t.back() == ')')) t.remove_suffix(1);
    if (!t.empty() && t.back() == '!') return true;
    const auto& standout = bundled_lexicon("Standout");
    for (const auto& w : tokenize_words(s))
      if (standout.matches(w)) return true;
    return false;
  }

  static bool agentic(std::string_view s) {
    const auto& ag = bundled_lexicon("Agentic");
    const auto& co = bundled_lexicon("Communal");
    std::size_t a = 0, c = 0;
    for (const auto& w : tokenize_words(s)) {
      a += ag.matches(w);
      c += co.matches(w);
    }
    return a > c;
  }

  static std::vector<double> nli(std::string_view premise, std::string_view hypothesis) {
    const auto h = text::trim(hypothesis);
    if (!h.empty() && premise.find(h) != std::string_view::npos) return {1.0, 0.0, 0.0};
    return {0.0, 1.0, 0.0};
  }

  static std::vector<TaggedToken> pos(std::string_view sentence) {
    std::vector<TaggedToken> out;
    const auto& dict = mock_pos_dictionary();
    for (auto& tok : tokenize_for_tagging(sentence)) {
      auto it = dict.find(text::lower(tok));
      out.push_back({std::move(tok), it == dict.end() ? CoarseTag::OTHER : it->second});
    }
    return out;
  }
};

}  // namespace biasaudit
