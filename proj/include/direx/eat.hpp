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

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "direx/mtf.hpp"

namespace direx {

struct ProtocolParams {
  double n = 1e10;
  double gamma = 5e-3;
  std::vector<double> delta;
  double eps_s = 1e-8;
  double eps_eat = 1e-8;
  double eps_ext = 1e-9;
  double ell_ext = 0.0;
  int ab_size = 4;

  void validate() const {
    if (!(n >= 1.0)) throw Error("params: n must be >= 1");
    if (!(gamma > 0.0 && gamma < 1.0))
      throw Error("params: gamma must lie in (0,1)");
    if (!(eps_s > 0.0 && eps_s < 1.0) || !(eps_eat > 0.0 && eps_eat < 1.0))
      throw Error("params: eps_s and eps_eat must lie in (0,1)");
    if (!(eps_ext > 0.0)) throw Error("params: eps_ext must be positive");
    if (!(ell_ext >= 0.0)) throw Error("params: ell_ext must be >= 0");
    if (ab_size < 1) throw Error("params: ab_size must be positive");
    for (double d : delta)
      if (!(d >= 0.0)) throw Error("params: delta must be nonnegative");
  }
};

struct RateReport {
  double beta = 0.0;
  double eps_v = 0.0;
  double eps_k = 0.0;
  double eps_omega = 0.0;
  double first_order = 0.0;  // per round
  double entropy_bound_bits = 0.0;
  double rate_per_round = 0.0;
  double asymptotic_rate = 0.0;
  double output_length = 0.0;
  bool valid = true;
};

inline std::vector<double> delta_sgn(const std::vector<double>& delta,
                                     const std::vector<double>& lambda) {
  if (delta.size() != lambda.size()) throw Error("eat: delta length mismatch");
  std::vector<double> out(delta.size());
  for (std::size_t c = 0; c < delta.size(); ++c) {
    double s = lambda[c] < 0.0 ? 1.0 : (lambda[c] > 0.0 ? -1.0 : 0.0);
    out[c] = delta[c] * s;
  }
  return out;
}

struct ErrorTerms {
  double eps_v = 0.0;
  double eps_k = 0.0;
  double eps_omega = 0.0;
};

namespace detail {

// log2(2 * 2^(2t) + 1) for t = log2 of the per-round alphabet.
inline double log2_two_sq_plus_one(double t) {
  double e = 1.0 + 2.0 * t;
  return e + std::log2(1.0 + std::exp2(-e));
}

// ln(2^L + e^2), stable for large L.
inline double ln_pow2_plus_e2(double L) {
  double a = L * M_LN2;
  return a > 2.0 ? a + std::log1p(std::exp(2.0 - a))
                 : 2.0 + std::log1p(std::exp(a - 2.0));
}

}  // namespace detail

// Second-order EAT error terms. For the blocked variant the alphabet is the
// per-block one, |AB|^s_max.
inline ErrorTerms error_terms(double beta, const MinTradeoff& f, int ab_size,
                              double eps_s, double eps_eat) {
  if (!(beta > 0.0 && beta < 1.0)) throw Error("eat: beta must lie in (0,1)");
  const double t = f.s_max * std::log2(static_cast<double>(ab_size));
  ErrorTerms e;
  double v = detail::log2_two_sq_plus_one(t) + std::sqrt(f.fvar_bound + 2.0);
  e.eps_v = beta * M_LN2 / 2.0 * v * v;
  double L = t + f.fmax - f.fmin_bound;
  double ln3 = std::pow(detail::ln_pow2_plus_e2(L), 3);
  double lead = beta * beta / (6.0 * std::pow(1.0 - beta, 3) * M_LN2);
  e.eps_k = lead * std::exp(beta * L * M_LN2) * ln3;
  e.eps_omega = (1.0 - 2.0 * std::log2(eps_eat * eps_s)) / beta;
  return e;
}

inline double asymptotic_rate(const DualCertificate& cert,
                              const ScoreDistribution& omega) {
  double l = cert.dot(omega);
  if (!(l > 0.0 && l <= 1.0 + 1e-9))
    throw Error("eat: lambda.omega outside (0,1]");
  return -std::log2(std::min(l, 1.0));
}

inline RateReport certified_entropy(const ProtocolParams& p,
                                    const MinTradeoff& f,
                                    const ScoreDistribution& omega,
                                    double beta) {
  p.validate();
  const auto& lam = f.cert.lambda;
  if (omega.size() != lam.size() || p.delta.size() != lam.size())
    throw Error("eat: omega/delta length mismatch");
  for (std::size_t c = 0; c < lam.size(); ++c)
    if (!(p.delta[c] < omega[c] || (p.delta[c] == 0.0 && omega[c] == 0.0)))
      throw Error("eat: delta must be smaller than omega");
  RateReport r;
  r.beta = beta;
  auto ds = delta_sgn(p.delta, lam);
  double corner = 0.0;
  for (std::size_t c = 0; c < lam.size(); ++c)
    corner += lam[c] * (omega[c] - ds[c]);
  double lo = f.cert.dot(omega);
  r.asymptotic_rate = lo > 0.0 ? -std::log2(std::min(lo, 1.0)) : 0.0;
  if (!(corner > 0.0 && corner <= 1.0)) {
    r.valid = false;
    return r;
  }
  ErrorTerms e = error_terms(beta, f, p.ab_size, p.eps_s, p.eps_eat);
  r.eps_v = e.eps_v;
  r.eps_k = e.eps_k;
  r.eps_omega = e.eps_omega;
  // Blocked functions account per block of mean length s_bar.
  const double m = p.n / f.s_bar;
  r.first_order = (1.0 - f.gamma) * (f.A - f.B * corner);
  r.entropy_bound_bits =
      p.n * r.first_order - m * (e.eps_v + e.eps_k) - e.eps_omega;
  if (!std::isfinite(r.entropy_bound_bits))
    r.entropy_bound_bits = -std::numeric_limits<double>::infinity();
  r.rate_per_round = r.entropy_bound_bits / p.n;
  r.output_length =
      std::max(0.0, std::floor(r.entropy_bound_bits - p.ell_ext));
  return r;
}

// Log-uniform grid followed by golden-section refinement in log(beta).
inline double optimize_beta(const ProtocolParams& p, const MinTradeoff& f,
                            const ScoreDistribution& omega) {
  const double lo = std::log(1e-12), hi = std::log(1.0 - 1e-6);
  const int grid = 200;
  auto value = [&](double lb) {
    return certified_entropy(p, f, omega, std::exp(lb)).entropy_bound_bits;
  };
  int best = 0;
  double best_v = -std::numeric_limits<double>::infinity();
  std::vector<double> xs(grid);
  for (int i = 0; i < grid; ++i) {
    xs[i] = lo + (hi - lo) * i / (grid - 1);
    double v = value(xs[i]);
    if (v > best_v) {
      best_v = v;
      best = i;
    }
  }
  double a = xs[std::max(0, best - 1)], b = xs[std::min(grid - 1, best + 1)];
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double fc = value(c), fd = value(d);
  for (int it = 0; it < 100 && b - a > 1e-10; ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = value(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = value(d);
    }
  }
  double cand = fc > fd ? c : d;
  double cv = std::max(fc, fd);
  return std::exp(cv >= best_v ? cand : xs[best]);
}

inline RateReport optimized_entropy(const ProtocolParams& p,
                                    const MinTradeoff& f,
                                    const ScoreDistribution& omega) {
  return certified_entropy(p, f, omega, optimize_beta(p, f, omega));
}

// Union bound over the two-sided Chernoff tails of every score. Scores with
// omega = delta = 0 never occur for the honest device and contribute 0.
inline double completeness_error(double n, double gamma,
                                 const std::vector<double>& omega,
                                 const std::vector<double>& delta) {
  if (omega.size() != delta.size()) throw Error("eat: omega/delta mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < omega.size(); ++k) {
    if (omega[k] == 0.0 && delta[k] == 0.0) continue;
    if (!(delta[k] < omega[k]) || !(delta[k] > 0.0))
      throw Error("eat: need 0 < delta < omega");
    s += 2.0 * std::exp(-gamma * delta[k] * delta[k] * n / (3.0 * omega[k]));
  }
  return std::min(1.0, s);
}

struct DeltaResult {
  std::vector<double> delta;
  bool valid = true;  // false if some delta_k >= omega_k
};

inline DeltaResult delta_for_target(const std::vector<double>& omega,
                                    double gamma, double n, double target) {
  if (!(target > 0.0 && target < 1.0))
    throw Error("eat: target must lie in (0,1)");
  DeltaResult r;
  for (double w : omega) {
    double d = std::sqrt(3.0 * w * std::log(2.0 / target) / (gamma * n));
    r.delta.push_back(d);
    if (w > 0.0 && d >= w) r.valid = false;
  }
  return r;
}

inline double soundness_error(const ProtocolParams& p) {
  return std::max(p.eps_ext + 2.0 * p.eps_s, p.eps_eat);
}

inline double binary_entropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

inline double shannon_entropy(const std::vector<double>& p) {
  double h = 0.0;
  for (double v : p)
    if (v > 0.0) h -= v * std::log2(v);
  return h;
}

inline double expected_seed_bits(double n, double gamma,
                                 const std::vector<double>& mu) {
  return (gamma * shannon_entropy(mu) + binary_entropy(gamma)) * n;
}

// Original EAT statement applied to the blocked min-tradeoff function.
inline RateReport blocked_entropy(const ProtocolParams& p,
                                        const MinTradeoff& f,
                                        const ScoreDistribution& omega) {
  if (f.variant != MtfVariant::blocked)
    throw Error("eat: legacy bound needs a blocked min-tradeoff function");
  p.validate();
  const auto& lam = f.cert.lambda;
  if (omega.size() != lam.size() || p.delta.size() != lam.size())
    throw Error("eat: omega/delta length mismatch");
  RateReport r;
  auto ds = delta_sgn(p.delta, lam);
  double corner = 0.0;
  for (std::size_t c = 0; c < lam.size(); ++c)
    corner += lam[c] * (omega[c] - ds[c]);
  double lo = f.cert.dot(omega);
  r.asymptotic_rate = lo > 0.0 ? -std::log2(std::min(lo, 1.0)) : 0.0;
  if (!(corner > 0.0 && corner <= 1.0)) {
    r.valid = false;
    return r;
  }
  const double m = p.n / f.s_bar;
  const double t = f.s_max * std::log2(static_cast<double>(p.ab_size));
  // log2(1 + 2 * 2^t)
  double alpha = t + 1.0 + std::log2(1.0 + std::exp2(-(t + 1.0)));
  double spread = 0.0;
  for (double a : f.vertices)
    for (double b : f.vertices) spread = std::max(spread, std::abs(a - b));
  double eps = 2.0 * (alpha + std::ceil(spread)) *
               std::sqrt(1.0 - 2.0 * std::log2(p.eps_s * p.eps_eat));
  r.first_order = (1.0 - f.gamma) * (f.A - f.B * corner);
  r.eps_v = eps;
  r.entropy_bound_bits = m * f.s_bar * r.first_order - std::sqrt(m) * eps;
  r.rate_per_round = r.entropy_bound_bits / p.n;
  r.output_length =
      std::max(0.0, std::floor(r.entropy_bound_bits - p.ell_ext));
  return r;
}

}  // namespace direx
