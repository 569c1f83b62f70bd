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

// Client side of the sentence-scoring wire protocol (version "1").
//
//   POST /score   {"protocol_version": "1", "task": <task>, "batch_id": <id>,
//                  "items": [<sentence>, ...] | [[<premise>, <hypothesis>], ...]}
//              -> {"protocol_version": "1", "batch_id": <id>, "model_id": <id>,
//                  "results": [[p0, p1, ...], ...] | [[[<token>, <tag>], ...], ...]}
//   GET /health -> {"protocol_version": "1", "status": "ok", "models": {<task>: <model id>}}
//
// Binary tasks return (negative, positive) probabilities: formality is
// (informal, formal), sentiment (negative, positive), agency (communal,
// agentic). NLI returns (entailment, neutral, contradiction). Tags come from
// {NOUN, ADJ, VERB, PRON, OTHER}.

#pragma once

#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "biasaudit/common.hpp"
#include "biasaudit/corpus.hpp"
#include "biasaudit/tagging.hpp"

namespace biasaudit {

inline constexpr std::string_view kProtocolVersion = "1";

enum class ScoreTask { formality, sentiment, agency, nli, pos };

inline constexpr std::array<ScoreTask, 5> kScoreTasks = {ScoreTask::formality, ScoreTask::sentiment,
                                                         ScoreTask::agency, ScoreTask::nli, ScoreTask::pos};

inline std::string_view to_string(ScoreTask t) {
  switch (t) {
    case ScoreTask::formality: return "formality";
    case ScoreTask::sentiment: return "sentiment";
    case ScoreTask::agency: return "agency";
    case ScoreTask::nli: return "nli";
    case ScoreTask::pos: return "pos";
  }
  return "pos";
}

inline ScoreTask parse_task(std::string_view s) {
  for (auto t : kScoreTasks)
    if (to_string(t) == s) return t;
  throw ProtocolError("unknown task '" + std::string(s) + "'");
}

inline std::size_t class_count(ScoreTask t) {
  switch (t) {
    case ScoreTask::nli: return 3;
    case ScoreTask::pos: return 0;
    default: return 2;
  }
}

using NliPair = std::pair<std::string, std::string>;  // (premise, hypothesis)

struct ScoreRequest {
  ScoreTask task = ScoreTask::formality;
  std::vector<std::string> sentences;  // all tasks except nli
  std::vector<NliPair> pairs;          // nli only
  std::string batch_id;

  std::size_t size() const { return task == ScoreTask::nli ? pairs.size() : sentences.size(); }
};

struct ScoreResponse {
  std::string batch_id;
  std::vector<std::vector<double>> probabilities;  // classification tasks
  std::vector<std::vector<TaggedToken>> tags;      // pos
  std::string model_id;
};

struct HealthStatus {
  bool ok = false;
  std::map<std::string, std::string> models;  // task -> model id
  std::string detail;
};

inline void validate(const ScoreRequest& r) {
  if (r.task == ScoreTask::nli) {
    if (!r.sentences.empty()) throw ValidationError("nli requests carry (premise, hypothesis) pairs only");
  } else if (!r.pairs.empty()) {
    throw ValidationError("only nli requests may carry pairs");
  }
  if (r.size() == 0) throw ValidationError("score request has no items");
}

// ---------------------------------------------------------------------------
// JSON codec

inline nlohmann::json to_json(const ScoreRequest& r) {
  nlohmann::json items = nlohmann::json::array();
  if (r.task == ScoreTask::nli) {
    for (const auto& [p, h] : r.pairs) items.push_back({p, h});
  } else {
    for (const auto& s : r.sentences) items.push_back(s);
  }
  return {{"protocol_version", kProtocolVersion}, {"task", to_string(r.task)}, {"items", items}, {"batch_id", r.batch_id}};
}

inline void check_version(const nlohmann::json& j) {
  auto it = j.find("protocol_version");
  if (it == j.end() || !it->is_string() || it->get<std::string>() != kProtocolVersion)
    throw ProtocolError("missing or unsupported protocol_version");
}

inline ScoreRequest score_request_from_json(const nlohmann::json& j) {
  try {
    check_version(j);
    ScoreRequest r;
    r.task = parse_task(j.at("task").get<std::string>());
    r.batch_id = j.at("batch_id").get<std::string>();
    for (const auto& it : j.at("items")) {
      if (r.task == ScoreTask::nli) {
        if (!it.is_array() || it.size() != 2) throw ProtocolError("nli items must be [premise, hypothesis]");
        r.pairs.emplace_back(it.at(0).get<std::string>(), it.at(1).get<std::string>());
      } else {
        r.sentences.push_back(it.get<std::string>());
      }
    }
    validate(r);
    return r;
  } catch (const ProtocolError&) {
    throw;
  } catch (const std::exception& e) {
    throw ProtocolError(std::string("malformed score request: ") + e.what());
  }
}

inline nlohmann::json to_json(const ScoreResponse& r, ScoreTask task) {
  nlohmann::json results = nlohmann::json::array();
  if (task == ScoreTask::pos) {
    for (const auto& toks : r.tags) {
      nlohmann::json row = nlohmann::json::array();
      for (const auto& t : toks) row.push_back({t.token, to_string(t.tag)});
      results.push_back(row);
    }
  } else {
    for (const auto& p : r.probabilities) results.push_back(p);
  }
  return {{"protocol_version", kProtocolVersion}, {"batch_id", r.batch_id}, {"results", results}, {"model_id", r.model_id}};
}

inline constexpr double kProbabilityTolerance = 1e-6;

// Parses and checks a response against its request: batch id, result count,
// class count, probability range and normalization (within 1e-6; values are
// then clamped to [0, 1]).
inline ScoreResponse score_response_from_json(const nlohmann::json& j, const ScoreRequest& req) {
  ScoreResponse r;
  try {
    check_version(j);
    r.batch_id = j.at("batch_id").get<std::string>();
    r.model_id = j.at("model_id").get<std::string>();
    const auto& results = j.at("results");
    if (!results.is_array()) throw ProtocolError("results is not an array");
    if (req.task == ScoreTask::pos) {
      for (const auto& row : results) {
        std::vector<TaggedToken> toks;
        for (const auto& pair : row) {
          if (!pair.is_array() || pair.size() != 2) throw ProtocolError("pos results must be [token, tag] pairs");
          toks.push_back({pair.at(0).get<std::string>(), parse_tag(pair.at(1).get<std::string>())});
        }
        r.tags.push_back(std::move(toks));
      }
    } else {
      for (const auto& row : results) r.probabilities.push_back(row.get<std::vector<double>>());
    }
  } catch (const ProtocolError&) {
    throw;
  } catch (const std::exception& e) {
    throw ProtocolError("malformed score response for batch '" + req.batch_id + "': " + e.what());
  }
  if (r.batch_id != req.batch_id)
    throw ProtocolError("response batch_id '" + r.batch_id + "' does not match request '" + req.batch_id + "'");
  const std::size_t n = req.task == ScoreTask::pos ? r.tags.size() : r.probabilities.size();
  if (n != req.size())
    throw ProtocolError("batch '" + req.batch_id + "': " + std::to_string(n) + " results for " +
                        std::to_string(req.size()) + " items");
  const std::size_t k = class_count(req.task);
  for (std::size_t i = 0; i < r.probabilities.size(); ++i) {
    auto& p = r.probabilities[i];
    if (p.size() != k)
      throw ProtocolError("batch '" + req.batch_id + "' item " + std::to_string(i) + ": expected " +
                          std::to_string(k) + " class probabilities");
    double sum = 0;
    for (double& v : p) {
      if (!std::isfinite(v) || v < -kProbabilityTolerance || v > 1.0 + kProbabilityTolerance)
        throw ProtocolError("batch '" + req.batch_id + "' item " + std::to_string(i) + ": probability out of range");
      sum += v;
    }
    if (std::fabs(sum - 1.0) > kProbabilityTolerance)
      throw ProtocolError("batch '" + req.batch_id + "' item " + std::to_string(i) + ": probabilities sum to " +
                          std::to_string(sum));
    for (double& v : p) v = std::clamp(v, 0.0, 1.0);
  }
  return r;
}

inline nlohmann::json to_json(const HealthStatus& h) {
  return {{"protocol_version", kProtocolVersion}, {"status", h.ok ? "ok" : "unavailable"}, {"models", h.models}};
}

inline HealthStatus health_from_json(const nlohmann::json& j) {
  HealthStatus h;
  try {
    check_version(j);
    h.ok = j.at("status").get<std::string>() == "ok";
    h.models = j.at("models").get<std::map<std::string, std::string>>();
  } catch (const std::exception& e) {
    return {false, {}, std::string("malformed health response: ") + e.what()};
  }
  return h;
}

// ---------------------------------------------------------------------------
// Backends

// Transport-level failure; the client retries these.
class TransportError : public ScorerError {
 public:
  using ScorerError::ScorerError;
};

class ScoringBackend {
 public:
  virtual ~ScoringBackend() = default;
  virtual ScoreResponse score(const ScoreRequest& req) = 0;
  virtual HealthStatus health() = 0;
};

// ---------------------------------------------------------------------------
// Client

struct ClientOptions {
  std::size_t batch_size = 64;
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{100};
  std::size_t max_in_flight = 4;
  std::string batch_prefix = "batch";
  std::function<void(std::chrono::milliseconds)> sleep = [](std::chrono::milliseconds d) {
    std::this_thread::sleep_for(d);
  };
};

// Splits work into batches, dispatches them over at most `max_in_flight`
// workers, retries transport failures with exponential backoff and returns
// results in input order. Safe to share between threads.
class ScoringClient {
 public:
  explicit ScoringClient(std::shared_ptr<ScoringBackend> backend, ClientOptions opts = {})
      : backend_(std::move(backend)), opts_(std::move(opts)) {
    if (!backend_) throw ValidationError("scoring client needs a backend");
    if (opts_.batch_size == 0) throw ValidationError("batch size must be >= 1");
    if (opts_.max_in_flight == 0) opts_.max_in_flight = 1;
  }

  const ClientOptions& options() const { return opts_; }

  // One (negative, positive) vector per sentence.
  std::vector<std::array<double, 2>> classify_batch(ScoreTask task, const std::vector<std::string>& sentences) {
    if (task == ScoreTask::nli || task == ScoreTask::pos)
      throw ValidationError("classify_batch handles formality, sentiment and agency only");
    std::vector<std::array<double, 2>> out(sentences.size());
    run(task, sentences.size(),
        [&](std::size_t b, std::size_t e, ScoreRequest& req) {
          req.sentences.assign(sentences.begin() + static_cast<std::ptrdiff_t>(b),
                               sentences.begin() + static_cast<std::ptrdiff_t>(e));
        },
        [&](std::size_t b, const ScoreResponse& resp) {
          for (std::size_t i = 0; i < resp.probabilities.size(); ++i)
            out[b + i] = {resp.probabilities[i][0], resp.probabilities[i][1]};
        });
    return out;
  }

  // One (entailment, neutral, contradiction) vector per pair.
  std::vector<std::array<double, 3>> nli_batch(const std::vector<NliPair>& pairs) {
    std::vector<std::array<double, 3>> out(pairs.size());
    run(ScoreTask::nli, pairs.size(),
        [&](std::size_t b, std::size_t e, ScoreRequest& req) {
          req.pairs.assign(pairs.begin() + static_cast<std::ptrdiff_t>(b), pairs.begin() + static_cast<std::ptrdiff_t>(e));
        },
        [&](std::size_t b, const ScoreResponse& resp) {
          for (std::size_t i = 0; i < resp.probabilities.size(); ++i) {
            const auto& p = resp.probabilities[i];
            out[b + i] = {p[0], p[1], p[2]};
          }
        });
    return out;
  }

  std::vector<std::vector<TaggedToken>> pos_tag_batch(const std::vector<std::string>& sentences) {
    std::vector<std::vector<TaggedToken>> out(sentences.size());
    run(ScoreTask::pos, sentences.size(),
        [&](std::size_t b, std::size_t e, ScoreRequest& req) {
          req.sentences.assign(sentences.begin() + static_cast<std::ptrdiff_t>(b),
                               sentences.begin() + static_cast<std::ptrdiff_t>(e));
        },
        [&](std::size_t b, const ScoreResponse& resp) {
          for (std::size_t i = 0; i < resp.tags.size(); ++i) out[b + i] = resp.tags[i];
        });
    return out;
  }

  HealthStatus health() {
    try {
      return backend_->health();
    } catch (const std::exception& e) {
      return {false, {}, e.what()};
    }
  }

  // Model ids seen in responses so far, per task.
  std::map<std::string, std::string> model_ids() const {
    std::lock_guard lock(mu_);
    return model_ids_;
  }

  std::size_t requests_sent() const { return requests_.load(); }

 private:
  template <class Fill, class Store>
  void run(ScoreTask task, std::size_t n, Fill&& fill, Store&& store) {
    if (n == 0) throw ValidationError(std::string("empty ") + std::string(to_string(task)) + " batch");
    const std::size_t n_batches = (n + opts_.batch_size - 1) / opts_.batch_size;
    const std::uint64_t call = calls_.fetch_add(1);
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(n_batches);
    std::mutex store_mu;

    auto worker = [&] {
      for (std::size_t b = next.fetch_add(1); b < n_batches; b = next.fetch_add(1)) {
        try {
          const std::size_t begin = b * opts_.batch_size;
          const std::size_t end = std::min(n, begin + opts_.batch_size);
          ScoreRequest req;
          req.task = task;
          req.batch_id = opts_.batch_prefix + "-" + std::string(to_string(task)) + "-" + std::to_string(call) + "-" +
                         std::to_string(b);
          fill(begin, end, req);
          ScoreResponse resp = send(req);
          std::lock_guard lock(store_mu);
          store(begin, resp);
        } catch (...) {
          errors[b] = std::current_exception();
        }
      }
    };

    const std::size_t n_workers = std::min(opts_.max_in_flight, n_batches);
    if (n_workers <= 1) {
      worker();
    } else {
      std::vector<std::thread> threads;
      for (std::size_t i = 0; i < n_workers; ++i) threads.emplace_back(worker);
      for (auto& t : threads) t.join();
    }
    // Lowest failing batch wins so errors are reproducible.
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  ScoreResponse send(const ScoreRequest& req) {
    auto backoff = opts_.initial_backoff;
    for (int attempt = 0;; ++attempt) {
      try {
        requests_.fetch_add(1);
        ScoreResponse resp = backend_->score(req);
        // Re-validate whatever the backend produced against the contract.
        ScoreResponse checked = score_response_from_json(to_json(resp, req.task), req);
        std::lock_guard lock(mu_);
        model_ids_[std::string(to_string(req.task))] = checked.model_id;
        return checked;
      } catch (const TransportError& e) {
        if (attempt >= opts_.max_retries)
          throw ScorerError("batch '" + req.batch_id + "' failed after " + std::to_string(attempt + 1) +
                            " attempts: " + e.what());
        opts_.sleep(backoff);
        backoff *= 2;
      }
    }
  }

  std::shared_ptr<ScoringBackend> backend_;
  ClientOptions opts_;
  mutable std::mutex mu_;
  std::map<std::string, std::string> model_ids_;
  std::atomic<std::size_t> requests_{0};
  std::atomic<std::uint64_t> calls_{0};
};

// Tags a document sentence by sentence through the scoring protocol.
class ScorerTagger final : public Tagger {
 public:
  explicit ScorerTagger(ScoringClient& client) : client_(client) {}

  std::vector<TaggedToken> tag(const Document& doc) override {
    std::vector<std::string> sentences;
    for (auto& s : split_sentences(doc)) sentences.push_back(std::move(s.text));
    if (sentences.empty()) return {};
    try {
      std::vector<TaggedToken> out;
      for (auto& toks : client_.pos_tag_batch(sentences)) out.insert(out.end(), toks.begin(), toks.end());
      return out;
    } catch (const ScorerError& e) {
      throw ScorerError("tagging document '" + doc.id + "': " + e.what());
    } catch (const std::exception& e) {
      throw TaggingError(doc.id, e.what());
    }
  }

 private:
  ScoringClient& client_;
};

}  // namespace biasaudit
