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
#include <cstdint>
#include <limits>
#include <optional>
#include <thread>
#include <vector>

#include "direx/behaviour.hpp"
#include "direx/eat.hpp"
#include "direx/seed.hpp"

namespace direx {

// Counter-based generator for simulation. Not cryptographic.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t keyed_random(std::uint64_t key, std::uint64_t counter,
                                  std::uint64_t lane) {
  return mix64(mix64(key) ^ mix64(counter * 4 + lane));
}

inline double keyed_uniform(std::uint64_t key, std::uint64_t counter,
                            std::uint64_t lane) {
  return static_cast<double>(keyed_random(key, counter, lane) >> 11) * 0x1.0p-53;
}

inline int sample_index(const std::vector<double>& cdf, double u) {
  auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  int i = static_cast<int>(it - cdf.begin());
  return std::min(i, static_cast<int>(cdf.size()) - 1);
}

struct Transcript {
  std::int64_t n = 0;
  std::vector<std::int64_t> score_counts;  // scores, then the generation symbol
  bool abort = false;
  std::int64_t seed_bits_used = 0;
  std::vector<std::uint8_t> outputs;  // a * |B| + b per round, when logged
  std::vector<std::uint8_t> symbols;  // input symbol per round, when logged
};

struct HonestDevice {
  Behaviour behaviour;
  std::uint64_t stream = 0;
  std::vector<std::vector<double>> cdfs;  // per (x, y)

  HonestDevice(Behaviour p, std::uint64_t s) : behaviour(std::move(p)), stream(s) {
    const Behaviour& b = behaviour;
    for (int x = 0; x < b.x_size; ++x)
      for (int y = 0; y < b.y_size; ++y) {
        std::vector<double> c;
        double acc = 0.0;
        for (int a = 0; a < b.a_size; ++a)
          for (int bb = 0; bb < b.b_size; ++bb) {
            acc += b(a, bb, x, y);
            c.push_back(acc);
          }
        for (auto& v : c) v /= acc;
        cdfs.push_back(std::move(c));
      }
  }

  // Returns a * |B| + b.
  int sample(std::int64_t round, int x, int y) const {
    double u = keyed_uniform(stream, static_cast<std::uint64_t>(round), 1);
    return sample_index(cdfs[x * behaviour.y_size + y], u);
  }
};

class InputSource {
 public:
  virtual ~InputSource() = default;
  virtual int symbol(std::int64_t round) const = 0;
  virtual std::int64_t length() const = 0;
  virtual std::int64_t seed_bits_used() const = 0;
};

class DirectInputSource : public InputSource {
 public:
  DirectInputSource(const RoundInputModel& m, std::uint64_t seed)
      : seed_(seed) {
    double acc = 0.0;
    for (double p : m.probabilities) {
      acc += p;
      cdf_.push_back(acc);
    }
  }
  int symbol(std::int64_t round) const override {
    return sample_index(cdf_, keyed_uniform(seed_, round, 0));
  }
  std::int64_t length() const override {
    return std::numeric_limits<std::int64_t>::max();
  }
  std::int64_t seed_bits_used() const override { return 0; }

 private:
  std::uint64_t seed_;
  std::vector<double> cdf_;
};

// Inputs decoded with the rounded interval algorithm, one invocation per block
// and an independent seed segment per block.
class RiaInputSource : public InputSource {
 public:
  RiaInputSource(const RoundInputModel& m, std::int64_t n, std::int64_t blocks,
                 std::size_t k_max, std::uint64_t seed, int threads = 1) {
    if (n < 1 || blocks < 1) throw Error("ria inputs: n and blocks must be >= 1");
    const std::int64_t per = (n + blocks - 1) / blocks;
    const std::int64_t padded = per * blocks;
    QuantizedDistribution q = quantize(m.probabilities);
    symbols_.assign(padded, 0);
    std::vector<std::int64_t> bits(blocks, 0);
    std::vector<int> truncated(blocks, 0);
    auto work = [&](int t) {
      for (std::int64_t b = t; b < blocks; b += threads) {
        SplitMixBitSource src(mix64(seed) ^ mix64(static_cast<std::uint64_t>(b)));
        RiaOutcome o = ria_decode(q, per, src, k_max);
        for (std::int64_t i = 0; i < per; ++i)
          symbols_[b * per + i] = static_cast<std::uint8_t>(o.symbols[i]);
        bits[b] = static_cast<std::int64_t>(o.bits_consumed);
        truncated[b] = o.truncated;
      }
    };
    threads = std::max(1, threads);
    std::vector<std::thread> pool;
    for (int t = 1; t < threads; ++t) pool.emplace_back(work, t);
    work(0);
    for (auto& th : pool) th.join();
    for (std::int64_t b = 0; b < blocks; ++b) {
      bits_ += bits[b];
      truncated_blocks_ += truncated[b];
    }
  }
  int symbol(std::int64_t round) const override {
    if (round < 0 || round >= length())
      throw Error("ria inputs: source exhausted");
    return symbols_[round];
  }
  std::int64_t length() const override {
    return static_cast<std::int64_t>(symbols_.size());
  }
  std::int64_t seed_bits_used() const override { return bits_; }
  std::int64_t truncated_blocks() const { return truncated_blocks_; }

 private:
  std::vector<std::uint8_t> symbols_;
  std::int64_t bits_ = 0;
  std::int64_t truncated_blocks_ = 0;
};

// Eq.-14 style window test on the score components; true means abort.
inline bool abort_decision(const std::vector<std::int64_t>& counts,
                           std::int64_t n, const std::vector<double>& omega,
                           const std::vector<double>& delta, double gamma) {
  if (n <= 0) throw Error("abort: n must be positive");
  if (omega.size() != delta.size() || counts.size() < omega.size())
    throw Error("abort: length mismatch");
  for (std::size_t c = 0; c < omega.size(); ++c) {
    double f = static_cast<double>(counts[c]) / static_cast<double>(n);
    if (omega[c] == 0.0 && delta[c] == 0.0) {
      if (counts[c] != 0) return true;
      continue;
    }
    if (!(gamma * (omega[c] - delta[c]) < f && f < gamma * (omega[c] + delta[c])))
      return true;
  }
  return false;
}

inline bool abort_decision(const Transcript& t, const std::vector<double>& omega,
                           const std::vector<double>& delta, double gamma) {
  return abort_decision(t.score_counts, t.n, omega, delta, gamma);
}

struct AccumulationOptions {
  int threads = 1;
  bool keep_logs = false;
  std::int64_t chunk = 1 << 16;
};

inline Transcript run_accumulation(const HonestDevice& device, const Game& game,
                                   const RoundInputModel& model,
                                   const InputSource& source, std::int64_t n,
                                   const AccumulationOptions& opt = {}) {
  if (!device.behaviour.matches(game))
    throw Error("accumulation: behaviour does not match game");
  if (n < 1) throw Error("accumulation: n must be >= 1");
  if (source.length() < n) throw Error("accumulation: input source exhausted");
  if (opt.keep_logs && n > 1000000)
    throw Error("accumulation: per-round logs limited to n <= 1e6");
  const std::size_t ns = game.num_scores();
  Transcript tr;
  tr.n = n;
  if (opt.keep_logs) {
    tr.outputs.assign(n, 0);
    tr.symbols.assign(n, 0);
  }
  const std::int64_t chunks = (n + opt.chunk - 1) / opt.chunk;
  std::vector<std::vector<std::int64_t>> partial(
      chunks, std::vector<std::int64_t>(ns + 1, 0));
  const int threads = std::max(1, opt.threads);
  auto work = [&](int t) {
    for (std::int64_t c = t; c < chunks; c += threads) {
      auto& cnt = partial[c];
      const std::int64_t end = std::min(n, (c + 1) * opt.chunk);
      for (std::int64_t i = c * opt.chunk; i < end; ++i) {
        int sym = source.symbol(i);
        auto [x, y] = model.inputs(sym);
        int ab = device.sample(i, x, y);
        if (model.is_test(sym))
          ++cnt[game.score(ab / game.b_size, ab % game.b_size, x, y)];
        else
          ++cnt[ns];
        if (opt.keep_logs) {
          tr.outputs[i] = static_cast<std::uint8_t>(ab);
          tr.symbols[i] = static_cast<std::uint8_t>(sym);
        }
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(work, t);
  work(0);
  for (auto& th : pool) th.join();
  tr.score_counts.assign(ns + 1, 0);
  for (const auto& p : partial)
    for (std::size_t k = 0; k <= ns; ++k) tr.score_counts[k] += p[k];
  tr.seed_bits_used = source.seed_bits_used();
  return tr;
}

struct PipelineResult {
  DualCertificate cert;
  MinTradeoff mtf;
  RateReport report;
  double completeness = 0.0;
  double soundness = 0.0;
};

inline PipelineResult certify_pipeline(
    GuessingProgram& prog, const ScoreDistribution& omega,
    const ProtocolParams& params,
    const std::optional<ScoreDistribution>& v = std::nullopt) {
  params.validate();
  if (!v) {
    GuessResult g = solve_guessing(prog, omega);
    if (!g.feasible())
      throw InfeasibleError(std::string("pipeline: omega rejected, status ") +
                            to_string(g.status));
  }
  PipelineResult r{dual_certificate(prog, v ? *v : omega), {}, {}, 0.0, 0.0};
  r.mtf = build(r.cert, params.gamma);
  r.report = optimized_entropy(params, r.mtf, omega);
  r.completeness = completeness_error(params.n, params.gamma, omega.values,
                                      params.delta);
  r.soundness = soundness_error(params);
  return r;
}

inline PipelineResult certify_pipeline(
    const Game& game, int x_gen, int y_gen, const std::string& level,
    const ScoreDistribution& omega, const ProtocolParams& params,
    const std::optional<ScoreDistribution>& v = std::nullopt) {
  GuessingProgram prog = build_guessing_program(game, x_gen, y_gen, level);
  return certify_pipeline(prog, omega, params, v);
}

// Toeplitz hashing: out_i = XOR_j seed[i + raw_len - 1 - j] & raw[j].
inline std::vector<std::uint8_t> extract_stub(const std::vector<std::uint8_t>& raw,
                                              const std::vector<std::uint8_t>& seed,
                                              std::size_t output_length) {
  if (output_length == 0) return {};
  const std::size_t len = raw.size();
  if (output_length > len) throw Error("extract: output longer than input");
  if (seed.size() < len + output_length - 1)
    throw Error("extract: seed needs raw_len + output_length - 1 bits");
  const std::size_t words = (len + 63) / 64;
  std::vector<std::uint64_t> rev(words, 0), s((len + output_length + 63) / 64 + 1, 0);
  for (std::size_t j = 0; j < len; ++j)
    if (raw[len - 1 - j] & 1U) rev[j / 64] |= std::uint64_t{1} << (j % 64);
  for (std::size_t k = 0; k < len + output_length - 1; ++k)
    if (seed[k] & 1U) s[k / 64] |= std::uint64_t{1} << (k % 64);
  auto window = [&](std::size_t start, std::size_t w) {
    std::size_t bit = start + 64 * w;
    std::size_t q = bit / 64, r = bit % 64;
    std::uint64_t lo = s[q] >> r;
    if (r != 0 && q + 1 < s.size()) lo |= s[q + 1] << (64 - r);
    return lo;
  };
  std::uint64_t tail = len % 64 == 0 ? ~std::uint64_t{0}
                                     : (std::uint64_t{1} << (len % 64)) - 1;
  std::vector<std::uint8_t> out(output_length);
  for (std::size_t i = 0; i < output_length; ++i) {
    std::uint64_t acc = 0;
    for (std::size_t w = 0; w < words; ++w) {
      std::uint64_t m = window(i, w) & rev[w];
      if (w + 1 == words) m &= tail;
      acc ^= m;
    }
    out[i] = static_cast<std::uint8_t>(__builtin_parityll(acc));
  }
  return out;
}

// Outputs of every round of a logged transcript, two bits per round for
// binary outputs.
inline std::vector<std::uint8_t> raw_output_bits(const Transcript& t,
                                                 const Game& game) {
  if (t.outputs.empty()) throw Error("raw bits: transcript has no logs");
  int bits_a = 0, bits_b = 0;
  while ((1 << bits_a) < game.a_size) ++bits_a;
  while ((1 << bits_b) < game.b_size) ++bits_b;
  std::vector<std::uint8_t> raw;
  for (std::int64_t i = 0; i < t.n; ++i) {
    int a = t.outputs[i] / game.b_size, b = t.outputs[i] % game.b_size;
    for (int k = bits_a - 1; k >= 0; --k) raw.push_back((a >> k) & 1);
    for (int k = bits_b - 1; k >= 0; --k) raw.push_back((b >> k) & 1);
  }
  return raw;
}

}  // namespace direx
