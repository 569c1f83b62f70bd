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

// Student-t tail probabilities and the two-sample tests built on them.
// Tail probabilities come from the regularized incomplete beta function,
// evaluated by its continued fraction (modified Lentz).

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <string_view>

#include "biasaudit/common.hpp"

namespace biasaudit::stats {

namespace detail {

// Continued fraction for I_x(a, b); converges fast for x < (a + 1) / (a + b + 2).
inline double beta_cf(double x, double a, double b) {
  constexpr int kMaxIter = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  throw StatsError("incomplete beta continued fraction did not converge");
}

}  // namespace detail

// Regularized incomplete beta I_x(a, b). `y` must equal 1 - x; passing it
// separately keeps precision when x is close to 1.
inline double incomplete_beta(double x, double y, double a, double b) {
  if (!(a > 0) || !(b > 0)) throw StatsError("incomplete beta requires a, b > 0");
  if (x <= 0.0) return 0.0;
  if (y <= 0.0) return 1.0;
  const double log_front = a * std::log(x) + b * std::log(y) - std::lgamma(a) - std::lgamma(b) +
                           std::lgamma(a + b);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * detail::beta_cf(x, a, b) / a;
  return 1.0 - front * detail::beta_cf(y, b, a) / b;
}

inline double incomplete_beta(double x, double a, double b) { return incomplete_beta(x, 1.0 - x, a, b); }

// P(T > t) for Student's t with `df` degrees of freedom.
inline double student_t_upper(double t, double df) {
  if (!(df > 0)) throw StatsError("t distribution requires df > 0");
  if (std::isnan(t)) throw StatsError("t statistic is NaN");
  if (std::isinf(t)) return t > 0 ? 0.0 : 1.0;
  const double t2 = t * t;
  const double x = df / (df + t2);
  const double y = t2 / (df + t2);
  const double half_tail = 0.5 * incomplete_beta(x, y, 0.5 * df, 0.5);
  return t > 0 ? half_tail : 1.0 - half_tail;
}

enum class Alternative { greater, less, two_sided };

inline std::string_view to_string(Alternative a) {
  switch (a) {
    case Alternative::greater: return "greater";
    case Alternative::less: return "less";
    case Alternative::two_sided: return "two_sided";
  }
  return "two_sided";
}

inline Alternative parse_alternative(std::string_view s) {
  if (s == "greater") return Alternative::greater;
  if (s == "less") return Alternative::less;
  if (s == "two_sided") return Alternative::two_sided;
  throw ValidationError("unknown alternative '" + std::string(s) + "'");
}

inline double p_value(double t, double df, Alternative alt) {
  switch (alt) {
    case Alternative::greater: return student_t_upper(t, df);
    case Alternative::less: return student_t_upper(-t, df);
    case Alternative::two_sided:
      return std::min(1.0, 2.0 * std::min(student_t_upper(t, df), student_t_upper(-t, df)));
  }
  return 1.0;
}

struct Summary {
  double mean = 0;
  double stddev = 0;  // sample (n - 1) standard deviation
  std::size_t n = 0;
};

inline Summary summarize(std::span<const double> xs) {
  Summary s;
  s.n = xs.size();
  if (s.n == 0) return s;
  double sum = 0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(s.n - 1));
  }
  return s;
}

struct TTestResult {
  double t = 0;
  double df = 0;
  double p = 1;
  Summary a;
  Summary b;
  Alternative alternative = Alternative::two_sided;
};

// Unequal-variance two-sample t-test:
//   t = (mean_a - mean_b) / sqrt(s_a^2 / n_a + s_b^2 / n_b)
// with Welch-Satterthwaite degrees of freedom. When both samples are
// constant but their means differ, t is infinite and df falls back to
// n_a + n_b - 2.
inline TTestResult welch_t_test(std::span<const double> sample_a, std::span<const double> sample_b,
                                Alternative alt) {
  if (sample_a.size() < 2 || sample_b.size() < 2)
    throw StatsError("t-test needs at least 2 values per sample (got " + std::to_string(sample_a.size()) +
                     " and " + std::to_string(sample_b.size()) + ")");
  TTestResult r;
  r.alternative = alt;
  r.a = summarize(sample_a);
  r.b = summarize(sample_b);
  const double na = static_cast<double>(r.a.n), nb = static_cast<double>(r.b.n);
  const double va = r.a.stddev * r.a.stddev / na;
  const double vb = r.b.stddev * r.b.stddev / nb;
  const double se2 = va + vb;
  const double diff = r.a.mean - r.b.mean;
  if (se2 == 0.0) {
    if (diff == 0.0) throw StatsError("both samples are constant with equal means; t is undefined");
    r.t = diff > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
    r.df = na + nb - 2.0;
  } else {
    r.t = diff / std::sqrt(se2);
    r.df = se2 * se2 / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
  }
  r.p = p_value(r.t, r.df, alt);
  return r;
}

// Paired t-test on a_i - b_i; used as a sensitivity variant when both
// samples come from the same documents.
inline TTestResult paired_t_test(std::span<const double> sample_a, std::span<const double> sample_b,
                                 Alternative alt) {
  if (sample_a.size() != sample_b.size())
    throw StatsError("paired t-test needs samples of equal length");
  if (sample_a.size() < 2) throw StatsError("paired t-test needs at least 2 pairs");
  std::vector<double> diffs(sample_a.size());
  for (std::size_t i = 0; i < diffs.size(); ++i) diffs[i] = sample_a[i] - sample_b[i];
  TTestResult r;
  r.alternative = alt;
  r.a = summarize(sample_a);
  r.b = summarize(sample_b);
  const Summary d = summarize(diffs);
  r.df = static_cast<double>(d.n - 1);
  if (d.stddev == 0.0) {
    if (d.mean == 0.0) throw StatsError("paired differences are all zero; t is undefined");
    r.t = d.mean > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
  } else {
    r.t = d.mean / (d.stddev / std::sqrt(static_cast<double>(d.n)));
  }
  r.p = p_value(r.t, r.df, alt);
  return r;
}

// 3 if p < 0.01, 2 if p < 0.05, 1 if p < 0.1, else 0.
inline int significance_stars(double p) {
  if (p < 0.01) return 3;
  if (p < 0.05) return 2;
  if (p < 0.1) return 1;
  return 0;
}

inline std::string render_stars(int stars) { return std::string(static_cast<std::size_t>(stars), '*'); }

}  // namespace biasaudit::stats
