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

#pragma once

#include "biasaudit/audit.hpp"
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
#include "biasaudit/tagging.hpp"
