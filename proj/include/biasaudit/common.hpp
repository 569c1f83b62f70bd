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

#include <algorithm>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace biasaudit {

// Binary by construction: the audited corpora only carry male/female labels.
enum class Gender { male, female };

inline std::string_view to_string(Gender g) {
  return g == Gender::male ? "male" : "female";
}

inline Gender opposite(Gender g) {
  return g == Gender::male ? Gender::female : Gender::male;
}

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input, violated precondition, bad configuration.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Degenerate statistics (undefined t, zero-variance WEAT, ...).
class StatsError : public Error {
 public:
  using Error::Error;
};

// Scorer unreachable after retries.
class ScorerError : public Error {
 public:
  using Error::Error;
};

// Scorer reachable but the response violates the wire contract.
class ProtocolError : public ScorerError {
 public:
  using ScorerError::ScorerError;
};

inline Gender parse_gender(std::string_view s) {
  if (s == "male") return Gender::male;
  if (s == "female") return Gender::female;
  throw ValidationError("unknown gender value '" + std::string(s) + "'");
}

namespace text {

inline bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

inline bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
inline bool is_lower(char c) { return c >= 'a' && c <= 'z'; }
inline bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Bytes >= 0x80 belong to multi-byte UTF-8 sequences and count as letters.
inline bool is_word_byte(char c) {
  return is_upper(c) || is_lower(c) || is_digit(c) ||
         static_cast<unsigned char>(c) >= 0x80;
}

inline char to_lower(char c) { return is_upper(c) ? static_cast<char>(c - 'A' + 'a') : c; }
inline char to_upper(char c) { return is_lower(c) ? static_cast<char>(c - 'a' + 'A') : c; }

inline std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), to_lower);
  return out;
}

inline std::string_view trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return s.substr(b, e - b);
}

inline bool contains_ci(std::string_view haystack, std::string_view needle) {
  return lower(haystack).find(lower(needle)) != std::string::npos;
}

}  // namespace text

// Seeded randomness that is reproducible across standard libraries:
// std::mt19937_64 output is fully specified, the distributions are not,
// so bounded draws go through rejection sampling here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw ValidationError("Rng::below called with n = 0");
    const std::uint64_t limit =
        std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  // k distinct indices from [0, n), ascending.
  std::vector<std::size_t> choose(std::size_t n, std::size_t k) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    k = std::min(k, n);
    for (std::size_t i = 0; i < k; ++i) {
      std::size_t j = i + static_cast<std::size_t>(below(n - i));
      std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    return idx;
  }

 private:
  std::mt19937_64 engine_;
};

// FNV-1a; used to derive per-record seeds from stable string keys.
inline std::uint64_t stable_hash(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::string_view key) {
  std::uint64_t z = seed ^ stable_hash(key);
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace biasaudit
