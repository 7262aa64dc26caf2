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

#include <gtest/gtest.h>

#include <random>

#include "direx/mtf.hpp"

using namespace direx;

namespace {

DualCertificate make_cert(std::vector<double> lambda, std::vector<double> v) {
  DualCertificate c;
  c.lambda = std::move(lambda);
  c.v.values = std::move(v);
  c.lambda_max = *std::max_element(c.lambda.begin(), c.lambda.end());
  c.lambda_min = *std::min_element(c.lambda.begin(), c.lambda.end());
  return c;
}

// A certificate with lambda . v = 0.5.
DualCertificate half_cert() { return make_cert({-1.0, 1.0, 2.0}, {0.25, 0.75, 0.0}); }

std::vector<double> random_simplex(std::mt19937_64& rng, int n) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> q(n);
  double s = 0.0;
  for (auto& x : q) s += (x = e(rng));
  for (auto& x : q) x /= s;
  return q;
}

}  // namespace

TEST(Mtf, AffineCoefficients) {
  MinTradeoff f = build(half_cert(), 0.01);
  EXPECT_DOUBLE_EQ(f.lambda_v, 0.5);
  EXPECT_NEAR(f.A, 1.0 / std::log(2.0) + 1.0, 1e-14);
  EXPECT_NEAR(f.B, 2.0 / std::log(2.0), 1e-14);
  EXPECT_EQ(f.vertices.size(), 4u);
  EXPECT_DOUBLE_EQ(f.vertices.back(), f.fmax);
  EXPECT_NEAR(f.fmax, 0.99 * (f.A + f.B), 1e-12);
  EXPECT_NEAR(f.fmin_bound, 0.99 * (f.A - 2.0 * f.B), 1e-12);
}

TEST(Mtf, GenerationVertex) {
  MinTradeoff f = build(half_cert(), 0.05);
  ScoreDistribution perp{{0, 0, 0, 1}, true};
  EXPECT_DOUBLE_EQ(f.evaluate(perp), f.fmax);
  EXPECT_THROW(f.evaluate(ScoreDistribution{{1, 0, 0}, false}), Error);
}

TEST(Mtf, ProtocolRespectingValueIsTangent) {
  std::mt19937_64 rng(1);
  DualCertificate c = half_cert();
  for (double gamma : {1e-3, 5e-3, 0.1}) {
    MinTradeoff f = build(c, gamma);
    for (int t = 0; t < 20; ++t) {
      ScoreDistribution q{random_simplex(rng, 3), false};
      if (c.dot(q) <= 0.0) continue;
      double expect = tangent_lower_bound(c, gamma, q);
      EXPECT_NEAR(f.evaluate(protocol_respecting(q, gamma)), expect,
                  1e-9 * std::max(1.0, std::abs(expect)));
    }
  }
}

TEST(Mtf, TangentBelowEntropy) {
  std::mt19937_64 rng(2);
  DualCertificate c = half_cert();
  for (int t = 0; t < 200; ++t) {
    ScoreDistribution q{random_simplex(rng, 3), false};
    double lq = c.dot(q);
    if (lq <= 0.0) continue;
    EXPECT_LE(tangent_lower_bound(c, 0.01, q), 0.99 * -std::log2(lq) + 1e-12);
  }
  EXPECT_NEAR(tangent_lower_bound(c, 0.01, c.v), 0.99, 1e-12);
}

TEST(Mtf, BoundsHoldOnProtocolRespectingPoints) {
  std::mt19937_64 rng(3);
  DualCertificate c = make_cert({-9.98, 7.59, 11.31}, {0.4225, 0.49, 0.0875});
  MinTradeoff f = build(c, 5e-3);
  for (int t = 0; t < 500; ++t) {
    ScoreDistribution p = protocol_respecting(ScoreDistribution{random_simplex(rng, 3), false}, 5e-3);
    double mean = f.evaluate(p);
    EXPECT_LE(mean, f.fmax + 1e-9);
    EXPECT_GE(mean, f.fmin_bound - 1e-9);
    double var = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) var += p[k] * std::pow(f.vertices[k] - mean, 2);
    EXPECT_LE(var, f.fvar_bound * (1 + 1e-12));
  }
}

TEST(Mtf, BlockMeanLength) {
  EXPECT_NEAR(block_mean_length(0.005, 200), 126.6084356548, 1e-9);
  EXPECT_DOUBLE_EQ(block_mean_length(0.3, 1), 1.0);
  EXPECT_NEAR(block_mean_length(0.01, 100000), 100.0, 1e-9);
  EXPECT_LT(block_mean_length(0.01, 50), block_mean_length(0.01, 51));
}

TEST(Mtf, BlockedWithUnitBlocksIsRoundVariant) {
  MinTradeoff a = build(half_cert(), 0.02);
  MinTradeoff b = build_blocked(half_cert(), 0.02, 1);
  EXPECT_DOUBLE_EQ(b.s_bar, 1.0);
  for (std::size_t k = 0; k < a.vertices.size(); ++k)
    EXPECT_NEAR(a.vertices[k], b.vertices[k], 1e-12);
  MinTradeoff big = build_blocked(half_cert(), 0.02, 200);
  EXPECT_GT(big.s_bar, 1.0);
  EXPECT_NEAR(big.fmax, big.s_bar * a.fmax, 1e-9 * big.fmax);
}

TEST(Mtf, RejectsBadInputs) {
  EXPECT_THROW(build(half_cert(), 0.0), Error);
  EXPECT_THROW(build(half_cert(), 1.0), Error);
  EXPECT_THROW(build_blocked(half_cert(), 0.1, 0), Error);
  EXPECT_THROW(build(make_cert({-1.0, 0.0}, {1.0, 0.0}), 0.1), Error);
  EXPECT_THROW(build(make_cert({2.0, 3.0}, {0.5, 0.5}), 0.1), Error);
}

TEST(Mtf, JsonFields) {
  auto j = mtf_to_json(build_blocked(half_cert(), 0.01, 10));
  EXPECT_EQ(j.at("variant"), "blocked");
  EXPECT_EQ(j.at("s_max"), 10);
  EXPECT_TRUE(j.contains("certificate"));
  EXPECT_TRUE(j.contains("fvar_bound"));
}
