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
#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <cstdint>
#include <vector>

#include "direx/eat.hpp"
#include "direx/game.hpp"

namespace direx {

using BigInt = boost::multiprecision::cpp_int;

// Distribution whose cumulative weights are multiples of 2^-64.
struct QuantizedDistribution {
  std::vector<double> probabilities;  // requested target
  std::vector<BigInt> cdf;            // size + 1 entries, cdf.back() == 2^64
  double quantization_distance = 0.0;

  std::size_t size() const { return probabilities.size(); }
  double quantized(std::size_t i) const {
    return static_cast<double>(cdf[i + 1] - cdf[i]) / 18446744073709551616.0;
  }
};

inline QuantizedDistribution quantize(const std::vector<double>& p) {
  if (p.empty()) throw Error("ria: empty distribution");
  double total = 0.0;
  for (double v : p) {
    if (!(v >= 0.0)) throw Error("ria: negative probability");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-12) throw Error("ria: probabilities must sum to 1");
  const BigInt one = BigInt(1) << 64;
  std::vector<BigInt> w(p.size());
  BigInt sum = 0;
  std::size_t largest = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    double scaled = std::floor(std::ldexp(p[i], 64));
    w[i] = BigInt(scaled);
    if (p[i] > 0.0 && w[i] == 0) w[i] = 1;
    if (w[i] > w[largest]) largest = i;
    sum += w[i];
  }
  w[largest] += one - sum;
  QuantizedDistribution q;
  q.probabilities = p;
  q.cdf.assign(p.size() + 1, 0);
  for (std::size_t i = 0; i < p.size(); ++i) q.cdf[i + 1] = q.cdf[i] + w[i];
  double dist = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i)
    dist += std::abs(p[i] - q.quantized(i));
  q.quantization_distance = dist / 2.0;
  return q;
}

class BitSource {
 public:
  virtual ~BitSource() = default;
  virtual int next() = 0;
};

class VectorBitSource : public BitSource {
 public:
  explicit VectorBitSource(std::vector<int> bits) : bits_(std::move(bits)) {}
  int next() override {
    if (pos_ >= bits_.size()) throw Error("ria: seed bit source exhausted");
    return bits_[pos_++];
  }
  std::size_t consumed() const { return pos_; }

 private:
  std::vector<int> bits_;
  std::size_t pos_ = 0;
};

// Deterministic pseudorandom bits for testing only; not cryptographic.
class SplitMixBitSource : public BitSource {
 public:
  explicit SplitMixBitSource(std::uint64_t seed) : state_(seed) {}
  int next() override {
    if (left_ == 0) {
      std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
      z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
      z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
      word_ = z ^ (z >> 31);
      left_ = 64;
    }
    --left_;
    return static_cast<int>((word_ >> left_) & 1U);
  }

 private:
  std::uint64_t state_;
  std::uint64_t word_ = 0;
  int left_ = 0;
};

struct RiaOutcome {
  std::vector<int> symbols;
  std::size_t bits_consumed = 0;
  bool truncated = false;
};

// Decodes one symbol per entry of dists. The target interval after j symbols
// is [low, low + width) in units of 2^(-64 j); the seed interval after k bits
// is [r, r + 1) in units of 2^(-k).
inline RiaOutcome ria_decode(const std::vector<const QuantizedDistribution*>& dists,
                             BitSource& bits, std::size_t k_max) {
  RiaOutcome out;
  BigInt low = 0, width = 1;
  std::size_t j = 0;  // symbols emitted so far, units 2^(-64 j)
  BigInt r = 0;
  std::size_t k = 0;
  for (const QuantizedDistribution* d : dists) {
    const std::size_t t = d->size();
    while (true) {
      // Compare in units 2^-(64(j+1) + k).
      BigInt seed_lo = r << (64 * (j + 1));
      BigInt seed_hi = (r + 1) << (64 * (j + 1));
      BigInt base = low << 64;
      int hit = -1;
      for (std::size_t i = 0; i < t && hit < 0; ++i) {
        if (d->cdf[i + 1] == d->cdf[i]) continue;
        BigInt a = (base + width * d->cdf[i]) << k;
        BigInt b = (base + width * d->cdf[i + 1]) << k;
        if (out.truncated) {
          if (seed_lo >= a && seed_lo < b) hit = static_cast<int>(i);
        } else if (seed_lo >= a && seed_hi <= b) {
          hit = static_cast<int>(i);
        }
      }
      if (hit >= 0) {
        out.symbols.push_back(hit);
        low = base + width * d->cdf[hit];
        width = width * (d->cdf[hit + 1] - d->cdf[hit]);
        ++j;
        break;
      }
      if (out.truncated) throw Error("ria: internal error, point not covered");
      if (k >= k_max) {
        out.truncated = true;
        continue;
      }
      r = (r << 1) | bits.next();
      ++k;
      ++out.bits_consumed;
    }
  }
  return out;
}

inline RiaOutcome ria_decode(const QuantizedDistribution& dist,
                             std::size_t count, BitSource& bits,
                             std::size_t k_max) {
  std::vector<const QuantizedDistribution*> seq(count, &dist);
  return ria_decode(seq, bits, k_max);
}

// Exact output distribution of a single-symbol decode, by enumerating every
// k_max-bit seed.
inline std::vector<double> ria_exact_distribution(const QuantizedDistribution& d,
                                                  std::size_t k_max) {
  if (k_max > 20) throw Error("ria: enumeration limited to k_max <= 20");
  std::vector<double> out(d.size(), 0.0);
  const std::size_t total = std::size_t{1} << k_max;
  for (std::size_t s = 0; s < total; ++s) {
    std::vector<int> bits(k_max);
    for (std::size_t b = 0; b < k_max; ++b)
      bits[b] = static_cast<int>((s >> (k_max - 1 - b)) & 1U);
    VectorBitSource src(bits);
    RiaOutcome o = ria_decode(d, 1, src, k_max);
    out[o.symbols[0]] += 1.0 / static_cast<double>(total);
  }
  return out;
}

inline double statistical_distance(const std::vector<double>& p,
                                   const std::vector<double>& q) {
  if (p.size() != q.size()) throw Error("distance: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return s / 2.0;
}

// Per-round input symbols: generation first, then the supported test pairs in
// row-major order.
struct RoundInputModel {
  double gamma = 0.0;
  std::vector<double> mu;
  int x_size = 0, y_size = 0;
  int x_gen = 0, y_gen = 0;
  std::vector<std::pair<int, int>> tests;
  std::vector<double> probabilities;

  RoundInputModel(const Game& g, double gam, int xg, int yg)
      : gamma(gam), mu(g.mu), x_size(g.x_size), y_size(g.y_size), x_gen(xg),
        y_gen(yg) {
    if (!(gam > 0.0 && gam < 1.0)) throw Error("inputs: gamma must lie in (0,1)");
    probabilities.push_back(1.0 - gam);
    for (int x = 0; x < g.x_size; ++x)
      for (int y = 0; y < g.y_size; ++y)
        if (g.input_prob(x, y) > 0.0) {
          tests.emplace_back(x, y);
          probabilities.push_back(gam * g.input_prob(x, y));
        }
  }

  std::size_t num_symbols() const { return probabilities.size(); }
  bool is_test(int symbol) const { return symbol != 0; }
  std::pair<int, int> inputs(int symbol) const {
    return symbol == 0 ? std::make_pair(x_gen, y_gen) : tests[symbol - 1];
  }
};

struct SeedRequirements {
  double n_padded = 0.0;
  double kappa = 0.0;
  double n_max = 0.0;
  double eps_ria = 0.0;
  double eps_dist = 0.0;
};

inline SeedRequirements seed_requirements(double n, double m_blocks,
                                          double gamma,
                                          const std::vector<double>& mu,
                                          double k_max) {
  if (!(m_blocks >= 1.0) || !(n >= 1.0) || !(k_max >= 1.0))
    throw Error("seed: n, m and k_max must be >= 1");
  SeedRequirements s;
  s.n_padded = std::ceil(n / m_blocks) * m_blocks;
  s.kappa = expected_seed_bits(s.n_padded, gamma, mu) + 3.0 * m_blocks;
  s.n_max = 2.0 * s.kappa;
  s.eps_ria = std::exp(-2.0 * s.kappa * s.kappa / (m_blocks * k_max * k_max));
  double supp = 0.0;
  for (double v : mu)
    if (v > 0.0) supp += 1.0;
  double e = std::log2(m_blocks) +
             s.n_padded * std::log2(supp + 1.0) / m_blocks - (k_max + 1.0);
  s.eps_dist = std::exp2(e);
  return s;
}

inline double chernoff_tail(double mean, double r) {
  if (!(mean > 0.0) || r < 0.0) throw Error("chernoff: bad arguments");
  if (r > mean) throw Error("chernoff: requires r <= mean");
  return std::min(1.0, 2.0 * std::exp(-r * r / (3.0 * mean)));
}

inline double hoeffding_tail(const std::vector<double>& ranges, double t) {
  double s = 0.0;
  for (double r : ranges) s += r * r;
  if (!(s > 0.0)) throw Error("hoeffding: ranges must be positive");
  return std::min(1.0, 2.0 * std::exp(-2.0 * t * t / s));
}

}  // namespace direx
