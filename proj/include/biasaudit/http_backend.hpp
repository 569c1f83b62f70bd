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

// HTTP transport for the scoring protocol (cpp-httplib).

#pragma once

#include <chrono>
#include <string>

#include <httplib.h>
#include <json.hpp>

#include "biasaudit/scoring.hpp"

namespace biasaudit {

struct HttpOptions {
  std::chrono::milliseconds connect_timeout{2000};
  std::chrono::milliseconds read_timeout{60000};
  std::string token;  // sent as "Authorization: Bearer <token>" when non-empty
};

class HttpBackend final : public ScoringBackend {
 public:
  // `base_url` like "http://127.0.0.1:8080".
  explicit HttpBackend(std::string base_url, HttpOptions opts = {}) : base_url_(std::move(base_url)), opts_(opts) {
    while (!base_url_.empty() && base_url_.back() == '/') base_url_.pop_back();
    if (base_url_.rfind("http://", 0) != 0 && base_url_.rfind("https://", 0) != 0)
      throw ValidationError("scorer url must start with http:// or https://: '" + base_url_ + "'");
  }

  const std::string& url() const { return base_url_; }

  ScoreResponse score(const ScoreRequest& req) override {
    validate(req);
    // A client per request keeps the backend free of shared mutable state.
    auto cli = client();
    auto res = cli.Post("/score", headers(), to_json(req).dump(), "application/json");
    if (!res) throw TransportError("POST " + base_url_ + "/score: " + httplib::to_string(res.error()));
    if (res->status >= 500) throw TransportError("POST /score returned HTTP " + std::to_string(res->status));
    if (res->status != 200)
      throw ProtocolError("POST /score returned HTTP " + std::to_string(res->status) + ": " + res->body);
    nlohmann::json body;
    try {
      body = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::parse_error& e) {
      throw ProtocolError(std::string("score response is not JSON: ") + e.what());
    }
    return score_response_from_json(body, req);
  }

  HealthStatus health() override {
    auto cli = client();
    auto res = cli.Get("/health", headers());
    if (!res) return {false, {}, "GET " + base_url_ + "/health: " + httplib::to_string(res.error())};
    if (res->status != 200) return {false, {}, "GET /health returned HTTP " + std::to_string(res->status)};
    try {
      return health_from_json(nlohmann::json::parse(res->body));
    } catch (const std::exception& e) {
      return {false, {}, e.what()};
    }
  }

 private:
  httplib::Client client() const {
    httplib::Client cli(base_url_);
    cli.set_connection_timeout(opts_.connect_timeout);
    cli.set_read_timeout(opts_.read_timeout);
    return cli;
  }

  httplib::Headers headers() const {
    httplib::Headers h;
    if (!opts_.token.empty()) h.emplace("Authorization", "Bearer " + opts_.token);
    return h;
  }

  std::string base_url_;
  HttpOptions opts_;
};

}  // namespace biasaudit
