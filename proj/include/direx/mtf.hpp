// Copyright 2026 The direx Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <vector>

#include "direx/digp.hpp"
#include "json.hpp"

namespace direx {

enum class MtfVariant { round, blocked };

// Affine min-tradeoff function built from a dual certificate. Vertex values
// are indexed by score, with the generation symbol last.
struct MinTradeoff {
  DualCertificate cert;
  double gamma = 0.0;
  double lambda_v = 0.0;  // lambda . v
  double A = 0.0;
  double B = 0.0;
  MtfVariant variant = MtfVariant::round;
  int s_max = 1;
  double s_bar = 1.0;
  double fmax = 0.0;
  double fmin_bound = 0.0;
  double fvar_bound = 0.0;
  std::vector<double> vertices;

  std::size_t num_scores() const { return cert.lambda.size(); }

  double evaluate(const ScoreDistribution& p) const {
    if (p.size() != vertices.size())
      throw Error("mtf: distribution must include the generation symbol");
    double s = 0.0;
    for (std::size_t c = 0; c < vertices.size(); ++c) s += p[c] * vertices[c];
    return s;
  }
};

inline double block_mean_length(double gamma, int s_max) {
  return -std::expm1(s_max * std::log1p(-gamma)) / gamma;
}

namespace detail {

inline MinTradeoff make_mtf(const DualCertificate& cert, double gamma,
                            MtfVariant variant, int s_max) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw Error("mtf: gamma must lie in (0,1)");
  if (s_max < 1) throw Error("mtf: s_max must be >= 1");
  MinTradeoff f;
  f.cert = cert;
  f.gamma = gamma;
  f.variant = variant;
  f.s_max = s_max;
  f.s_bar = variant == MtfVariant::blocked ? block_mean_length(gamma, s_max)
                                           : 1.0;
  f.lambda_v = cert.dot(cert.v);
  if (!(f.lambda_v > 0.0 && f.lambda_v <= 1.0))
    throw Error("mtf: certificate value lambda.v outside (0,1]");
  f.A = 1.0 / M_LN2 - std::log2(f.lambda_v);
  f.B = 1.0 / (f.lambda_v * M_LN2);
  const double lmax = cert.lambda_max, lmin = cert.lambda_min;
  const double pre = (1.0 - gamma) * f.s_bar;
  const double gs = gamma * f.s_bar;
  f.fmax = pre * (f.A - f.B * lmin);
  f.fmin_bound = pre * (f.A - f.B * lmax);
  f.fvar_bound = (1.0 - gamma) * (1.0 - gamma) * f.s_bar * f.B * f.B *
                 (lmax - lmin) * (lmax - lmin) / gamma;
  for (double l : cert.lambda)
    f.vertices.push_back(pre * (f.A - f.B * (l - (1.0 - gs) * lmin) / gs));
  f.vertices.push_back(f.fmax);
  return f;
}

}  // namespace detail

inline MinTradeoff build(const DualCertificate& cert, double gamma) {
  return detail::make_mtf(cert, gamma, MtfVariant::round, 1);
}

inline MinTradeoff build_blocked(const DualCertificate& cert, double gamma,
                                 int s_max) {
  return detail::make_mtf(cert, gamma, MtfVariant::blocked, s_max);
}

// First-order expansion of (1-gamma)(-log2(lambda . q)) about q = v.
inline double tangent_lower_bound(const DualCertificate& cert, double gamma,
                                  const ScoreDistribution& q) {
  double lq = cert.dot(q);
  if (!(lq > 0.0)) throw Error("mtf: lambda.q must be positive");
  double lv = cert.dot(cert.v);
  if (!(lv > 0.0)) throw Error("mtf: lambda.v must be positive");
  double A = 1.0 / M_LN2 - std::log2(lv);
  double B = 1.0 / (lv * M_LN2);
  return (1.0 - gamma) * (A - B * lq);
}

inline nlohmann::json mtf_to_json(const MinTradeoff& f) {
  return {{"certificate", certificate_to_json(f.cert)},
          {"gamma", f.gamma},
          {"variant", f.variant == MtfVariant::round ? "round" : "blocked"},
          {"s_max", f.s_max},
          {"s_bar", f.s_bar},
          {"A", f.A},
          {"B", f.B},
          {"fmax", f.fmax},
          {"fmin_bound", f.fmin_bound},
          {"fvar_bound", f.fvar_bound}};
}

}  // namespace direx
