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

// Bundled copies of data/lexicons.txt and data/weat_lists.txt.
// tests/unit/lexical_test.cpp checks that both stay in sync.

#pragma once

#include <string_view>

namespace biasaudit::data {

inline constexpr std::string_view kLexicons = R"LEX(# Gender-stereotypical trait lexicons. One category per line:
#   <Category>: <pattern>, <pattern>, ...
# A trailing '*' marks a prefix pattern; all other entries match whole tokens.
Ability: talent, intelligen*, smart, skill, ability, genius, brillian*, bright, brain, aptitude, gift, capacity, flair, knack, clever, expert, proficien*, capab*, adept*, able, competent, instinct, adroit, creative, insight, analy*, research
Standout: excellen*, superb, outstand*, exceptional, unparallel*, most, magnificent, remarkable, extraordinary, supreme, unmatched, best, outstanding, leading, preeminent
Leadership: execut*, manage, lead, led
Masculine: activ*, adventur*, aggress, ambitio*, analy*, assert, athlet*, autonom*, boast, challeng*, compet*, courag*, decide, decisi*, determin*, dominan*, force, greedy, headstrong, hierarch, hostil*, implusive*, independen*, individual, intellect, lead, logic, masculine, objective, opinion, outspoken, persist, principle, reckless, stubborn, superior, confiden*, sufficien*, relian*
Feminine: affection, child, cheer, commit, communal, compassion, connect, considerat*, cooperat*, emotion, empath, feminine, flatterable, gentle, interperson*, interdependen*, kind, kinship, loyal, nurtur*, pleasant, polite, quiet, responsiv*, sensitiv*, submissive, supportiv*, sympath*, tender, together, trust, understanding, warm, whin*
Agentic: assert, confiden*, aggress, ambitio*, dominan*, force, independen*, daring, outspoken, intellect
Communal: affection, help, kind, sympath*, sensitive, nurtur*, agree, interperson*, warm, caring, tact, assist
Professional: execut*, profess, corporate, office, business, career, promot*, occupation, position
Personal: home, parent, child, family, marri*, wedding, relatives, husband, wife, mother, father, son, daughter
)LEX";

inline constexpr std::string_view kWeatLists = R"LEX(# Word lists for the embedding association test.
#   <List name>: <word>, <word>, ...
Male Names: John, Paul, Mike, Kevin, Steve, Greg, Jeff, Bill
Female Names: Amy, Joan, Lisa, Sarah, Diana, Kate, Ann, Donna
Career Words: executive, management, professional, corporation, salary, office, business, career
Family Words: home, parents, children, family, cousins, marriage, wedding, relatives
)LEX";

}  // namespace biasaudit::data
