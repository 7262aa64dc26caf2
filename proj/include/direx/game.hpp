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
#include <cstdint>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace direx {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bipartite nonlocal game. The scoring rule is a dense table indexed by
// (x, y, a, b); entries are -1 only where mu(x, y) == 0.
struct Game {
  int x_size = 0;
  int y_size = 0;
  int a_size = 0;
  int b_size = 0;
  std::vector<double> mu;  // row-major over (x, y)
  std::vector<std::string> score_names;
  std::vector<int> rule;

  std::size_t num_scores() const { return score_names.size(); }

  double input_prob(int x, int y) const { return mu[x * y_size + y]; }

  std::size_t rule_index(int a, int b, int x, int y) const {
    return ((static_cast<std::size_t>(x) * y_size + y) * a_size + a) * b_size +
           b;
  }

  int score(int a, int b, int x, int y) const {
    return rule[rule_index(a, b, x, y)];
  }

  void validate() const {
    if (x_size <= 0 || y_size <= 0 || a_size <= 0 || b_size <= 0)
      throw Error("game: alphabet sizes must be positive");
    if (mu.size() != static_cast<std::size_t>(x_size * y_size))
      throw Error("game: mu has wrong size");
    double total = 0.0;
    for (double m : mu) {
      if (!(m >= 0.0)) throw Error("game: negative input probability");
      total += m;
    }
    if (std::abs(total - 1.0) > 1e-12) throw Error("game: mu does not sum to 1");
    if (score_names.empty()) throw Error("game: no scores");
    std::set<std::string> names(score_names.begin(), score_names.end());
    if (names.size() != score_names.size())
      throw Error("game: duplicate score names");
    if (rule.size() !=
        static_cast<std::size_t>(x_size * y_size * a_size * b_size))
      throw Error("game: rule table has wrong size");
    for (int x = 0; x < x_size; ++x)
      for (int y = 0; y < y_size; ++y)
        for (int a = 0; a < a_size; ++a)
          for (int b = 0; b < b_size; ++b) {
            int s = score(a, b, x, y);
            if (s >= static_cast<int>(num_scores()))
              throw Error("game: score index out of range");
            if (s < 0 && input_prob(x, y) > 0.0)
              throw Error("game: rule undefined on supported input");
          }
  }

  std::size_t support_size() const {
    std::size_t s = 0;
    for (double m : mu)
      if (m > 0.0) ++s;
    return s;
  }
};

// Distribution over the scores, optionally with the generation symbol
// appended as the last entry.
struct ScoreDistribution {
  std::vector<double> values;
  bool includes_perp = false;

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }
};

inline Game make_chsh_extended() {
  Game g;
  g.x_size = 2;
  g.y_size = 3;
  g.a_size = 2;
  g.b_size = 2;
  g.mu = {0.125, 0.125, 0.5, 0.125, 0.125, 0.0};
  g.score_names = {"c_CHSH", "c_align", "c_0"};
  g.rule.assign(24, 2);
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 3; ++y)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          int s = 2;
          if (y != 2 && (x * y) == (a ^ b)) s = 0;
          if (x == 0 && y == 2 && (a ^ b) == 0) s = 1;
          g.rule[g.rule_index(a, b, x, y)] = s;
        }
  return g;
}

// Reduced tuple set for the empirical behaviour game: all (a, b) with both
// outcomes below the last, plus Alice marginals read off y = 0 and Bob
// marginals read off x = 0.
inline bool eb_tuple_kept(int a, int b, int x, int y, int a_size, int b_size) {
  bool a_free = a < a_size - 1;
  bool b_free = b < b_size - 1;
  if (a_free && b_free) return true;
  if (a_free && b == b_size - 1 && y == 0) return true;
  if (b_free && a == a_size - 1 && x == 0) return true;
  return false;
}

inline Game make_empirical_behaviour_game(int x_size, int y_size,
                                          std::vector<double> mu,
                                          int a_size = 2, int b_size = 2) {
  Game g;
  g.x_size = x_size;
  g.y_size = y_size;
  g.a_size = a_size;
  g.b_size = b_size;
  if (mu.empty())
    mu.assign(static_cast<std::size_t>(x_size * y_size),
              1.0 / (x_size * y_size));
  g.mu = std::move(mu);
  if (g.mu.size() != static_cast<std::size_t>(x_size * y_size))
    throw Error("eb game: mu has wrong size");
  for (double m : g.mu)
    if (!(m > 0.0)) throw Error("eb game: mu must have full support");
  g.rule.assign(static_cast<std::size_t>(x_size * y_size * a_size * b_size),
                -1);
  std::vector<std::size_t> catch_all;
  for (int x = 0; x < x_size; ++x)
    for (int y = 0; y < y_size; ++y)
      for (int a = 0; a < a_size; ++a)
        for (int b = 0; b < b_size; ++b) {
          if (eb_tuple_kept(a, b, x, y, a_size, b_size)) {
            g.rule[g.rule_index(a, b, x, y)] =
                static_cast<int>(g.score_names.size());
            g.score_names.push_back("c_" + std::to_string(a) +
                                    std::to_string(b) + std::to_string(x) +
                                    std::to_string(y));
          } else {
            catch_all.push_back(g.rule_index(a, b, x, y));
          }
        }
  int rest = static_cast<int>(g.score_names.size());
  g.score_names.push_back("c_rest");
  for (std::size_t i : catch_all) g.rule[i] = rest;
  g.validate();
  return g;
}

inline Game make_correlator_game(int x_size, int y_size, int a_size = 2,
                                 int b_size = 2) {
  Game g;
  g.x_size = x_size;
  g.y_size = y_size;
  g.a_size = a_size;
  g.b_size = b_size;
  g.mu.assign(static_cast<std::size_t>(x_size * y_size),
              1.0 / (x_size * y_size));
  for (int x = 0; x < x_size; ++x)
    for (int y = 0; y < y_size; ++y)
      g.score_names.push_back("c_" + std::to_string(x) + std::to_string(y));
  int norm = static_cast<int>(g.score_names.size());
  g.score_names.push_back("c_norm");
  g.rule.assign(static_cast<std::size_t>(x_size * y_size * a_size * b_size),
                norm);
  for (int x = 0; x < x_size; ++x)
    for (int y = 0; y < y_size; ++y)
      for (int a = 0; a < a_size; ++a)
        for (int b = 0; b < b_size; ++b)
          if (a == b) g.rule[g.rule_index(a, b, x, y)] = x * y_size + y;
  return g;
}

inline ScoreDistribution frequency_distribution(
    const std::vector<std::uint64_t>& counts, std::uint64_t n) {
  std::uint64_t total = 0;
  for (auto c : counts) total += c;
  if (total != n || n == 0) throw Error("frequency: counts do not sum to n");
  ScoreDistribution f;
  f.includes_perp = true;
  f.values.resize(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i)
    f.values[i] = static_cast<double>(counts[i]) / static_cast<double>(n);
  return f;
}

// Protocol-respecting distribution (gamma * omega, 1 - gamma).
inline ScoreDistribution protocol_respecting(const ScoreDistribution& omega,
                                             double gamma) {
  ScoreDistribution p;
  p.includes_perp = true;
  for (double w : omega.values) p.values.push_back(gamma * w);
  p.values.push_back(1.0 - gamma);
  return p;
}

inline nlohmann::json game_to_json(const Game& g) {
  nlohmann::json j;
  j["x_size"] = g.x_size;
  j["y_size"] = g.y_size;
  j["a_size"] = g.a_size;
  j["b_size"] = g.b_size;
  j["mu"] = g.mu;
  j["scores"] = g.score_names;
  nlohmann::json rule = nlohmann::json::array();
  for (int x = 0; x < g.x_size; ++x)
    for (int y = 0; y < g.y_size; ++y)
      for (int a = 0; a < g.a_size; ++a)
        for (int b = 0; b < g.b_size; ++b) {
          int s = g.score(a, b, x, y);
          if (s >= 0) rule.push_back({a, b, x, y, s});
        }
  j["rule"] = rule;
  return j;
}

inline Game game_from_json(const nlohmann::json& j) {
  Game g;
  g.x_size = j.at("x_size").get<int>();
  g.y_size = j.at("y_size").get<int>();
  g.a_size = j.at("a_size").get<int>();
  g.b_size = j.at("b_size").get<int>();
  g.mu = j.at("mu").get<std::vector<double>>();
  g.score_names = j.at("scores").get<std::vector<std::string>>();
  g.rule.assign(
      static_cast<std::size_t>(g.x_size * g.y_size * g.a_size * g.b_size), -1);
  for (const auto& e : j.at("rule")) {
    int a = e.at(0), b = e.at(1), x = e.at(2), y = e.at(3), s = e.at(4);
    if (a < 0 || a >= g.a_size || b < 0 || b >= g.b_size || x < 0 ||
        x >= g.x_size || y < 0 || y >= g.y_size)
      throw Error("game: rule entry out of range");
    g.rule[g.rule_index(a, b, x, y)] = s;
  }
  g.validate();
  return g;
}

}  // namespace direx
