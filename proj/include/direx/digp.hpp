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
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "direx/behaviour.hpp"
#include "direx/game.hpp"
#include "direx/npa.hpp"
#include "direx/sdp.hpp"
#include "json.hpp"

namespace direx {

class InfeasibleError : public Error {
 public:
  using Error::Error;
};

// Relaxed guessing-probability program. One moment-matrix block per guess
// (a, b), plus a 1x1 slack block that only enters the trace row.
//
// Row layout: score rows for all scores but the last, the normalization row,
// the trace row sum_c tr(G_c) + s = d, then the per-block cell equalities.
struct GuessingProgram {
  Game game;
  int x_gen = 0;
  int y_gen = 0;
  std::string level;
  std::shared_ptr<const Relaxation> relaxation;
  SdpProblem sdp;
  int score_rows = 0;
  int norm_row = 0;
  int trace_row = 0;

  int guess_blocks() const { return game.a_size * game.b_size; }
  int dim() const { return relaxation->size(); }

  void set_omega(const ScoreDistribution& omega) {
    if (omega.size() != game.num_scores())
      throw Error("digp: score distribution has wrong length");
    for (int c = 0; c < score_rows; ++c) sdp.constraints[c].rhs = omega[c];
  }
};

namespace detail {

// Entries placing a class-level linear form on the representative cells.
inline void place_form(const Relaxation& r, const LinearForm& f, int block,
                       double scale, std::vector<SdpEntry>& out) {
  for (const auto& [cls, coef] : f.terms) {
    if (coef == 0.0) continue;
    auto [i, j] = r.class_rep[cls];
    double v = scale * coef * (i == j ? 1.0 : 0.5);
    bool merged = false;
    for (auto& e : out)
      if (e.block == block && e.row == i && e.col == j) {
        e.value += v;
        merged = true;
        break;
      }
    if (!merged) out.push_back({block, i, j, v});
  }
}

}  // namespace detail

inline GuessingProgram build_guessing_program(const Game& game, int x_gen,
                                              int y_gen,
                                              const std::string& level) {
  game.validate();
  if (x_gen < 0 || x_gen >= game.x_size || y_gen < 0 || y_gen >= game.y_size)
    throw Error("digp: generation inputs out of range");
  GuessingProgram g;
  g.game = game;
  g.x_gen = x_gen;
  g.y_gen = y_gen;
  g.level = level;
  g.relaxation = std::make_shared<Relaxation>(build_relaxation(
      game.x_size, game.y_size, game.a_size, game.b_size, level));
  const Relaxation& r = *g.relaxation;
  const int d = r.size();
  const int nblk = g.guess_blocks();

  g.sdp.blocks.assign(nblk, d);
  g.sdp.blocks.push_back(1);

  for (int a = 0; a < game.a_size; ++a)
    for (int b = 0; b < game.b_size; ++b)
      detail::place_form(r, behaviour_form(r, a, b, x_gen, y_gen),
                         a * game.b_size + b, 1.0, g.sdp.objective);

  const int ns = static_cast<int>(game.num_scores());
  std::vector<LinearForm> score_forms(ns);
  for (int x = 0; x < game.x_size; ++x)
    for (int y = 0; y < game.y_size; ++y) {
      double m = game.input_prob(x, y);
      if (m == 0.0) continue;
      for (int a = 0; a < game.a_size; ++a)
        for (int b = 0; b < game.b_size; ++b) {
          LinearForm f = behaviour_form(r, a, b, x, y);
          for (const auto& [cls, coef] : f.terms)
            score_forms[game.score(a, b, x, y)].add(cls, m * coef);
        }
    }
  g.score_rows = ns - 1;
  for (int c = 0; c < g.score_rows; ++c) {
    SdpConstraint row;
    for (int blk = 0; blk < nblk; ++blk)
      detail::place_form(r, score_forms[c], blk, 1.0, row.entries);
    g.sdp.constraints.push_back(std::move(row));
  }

  g.norm_row = g.score_rows;
  SdpConstraint norm;
  for (int blk = 0; blk < nblk; ++blk) norm.entries.push_back({blk, 0, 0, 1.0});
  norm.rhs = 1.0;
  g.sdp.constraints.push_back(std::move(norm));

  g.trace_row = g.norm_row + 1;
  SdpConstraint trace;
  for (int blk = 0; blk < nblk; ++blk)
    for (int i = 0; i < d; ++i) trace.entries.push_back({blk, i, i, 1.0});
  trace.entries.push_back({nblk, 0, 0, 1.0});
  trace.rhs = d;
  g.sdp.constraints.push_back(std::move(trace));

  for (int blk = 0; blk < nblk; ++blk) {
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) {
        int c = r.cls(i, j);
        if (c < 0) {
          double v = i == j ? 1.0 : 0.5;
          g.sdp.constraints.push_back({{{blk, i, j, v}}, 0.0});
          continue;
        }
        auto rep = r.class_rep[c];
        if (rep == std::make_pair(i, j)) continue;
        double ve = i == j ? 1.0 : 0.5;
        double vr = rep.first == rep.second ? -1.0 : -0.5;
        g.sdp.constraints.push_back(
            {{{blk, i, j, ve}, {blk, rep.first, rep.second, vr}}, 0.0});
      }
  }
  return g;
}

inline GuessingProgram assemble(const Game& game, int x_gen, int y_gen,
                                const std::string& level,
                                const ScoreDistribution& omega) {
  GuessingProgram g = build_guessing_program(game, x_gen, y_gen, level);
  g.set_omega(omega);
  return g;
}

struct GuessResult {
  SdpStatus status = SdpStatus::max_iter;
  double value = 0.0;
  SdpSolution solution;
  // A stalled run counts only if it ended close to optimal.
  bool feasible() const {
    if (status == SdpStatus::optimal) return true;
    return status == SdpStatus::max_iter &&
           solution.primal_residual <= 1e-6 && std::abs(solution.gap) <= 1e-5;
  }
};

inline GuessResult solve_guessing(GuessingProgram& prog,
                                  const ScoreDistribution& omega,
                                  const SdpSettings& st = {}) {
  prog.set_omega(omega);
  GuessResult r;
  r.solution = solve(prog.sdp, st);
  r.status = r.solution.status;
  r.value = r.solution.primal_value;
  return r;
}

inline double guessing_probability(GuessingProgram& prog,
                                   const ScoreDistribution& omega,
                                   const SdpSettings& st = {}) {
  GuessResult r = solve_guessing(prog, omega, st);
  if (!r.feasible())
    throw InfeasibleError(std::string("digp: solver status ") +
                          to_string(r.status));
  return r.value;
}

inline double guessing_probability(const Game& game, int x_gen, int y_gen,
                                   const std::string& level,
                                   const ScoreDistribution& omega) {
  GuessingProgram g = build_guessing_program(game, x_gen, y_gen, level);
  return guessing_probability(g, omega);
}

struct DualCertificate {
  std::vector<double> lambda;
  double normalization_multiplier = 0.0;
  ScoreDistribution v;
  std::string level;
  int x_gen = 0;
  int y_gen = 0;
  double dual_value = 0.0;
  double primal_value = 0.0;
  double feasibility_margin = 0.0;
  double repair_shift = 0.0;
  double lambda_max = 0.0;
  double lambda_min = 0.0;

  double dot(const ScoreDistribution& q) const {
    if (q.size() < lambda.size())
      throw Error("certificate: distribution too short");
    double s = 0.0;
    for (std::size_t c = 0; c < lambda.size(); ++c) s += lambda[c] * q[c];
    return s;
  }
};

inline DualCertificate certificate_from_solution(const GuessingProgram& prog,
                                                 const ScoreDistribution& v,
                                                 const SdpSolution& sol) {
  RepairResult rep = dual_feasibility_repair(prog.sdp, sol.y, prog.trace_row);
  DualCertificate c;
  const int ns = static_cast<int>(prog.game.num_scores());
  c.lambda.assign(ns, 0.0);
  for (int k = 0; k < prog.score_rows; ++k) c.lambda[k] = rep.y[k];
  c.normalization_multiplier =
      rep.y[prog.norm_row] + prog.sdp.constraints[prog.trace_row].rhs *
                                 rep.y[prog.trace_row];
  for (auto& l : c.lambda) l += c.normalization_multiplier;
  c.v = v;
  c.level = prog.level;
  c.x_gen = prog.x_gen;
  c.y_gen = prog.y_gen;
  c.dual_value = c.dot(v);
  c.primal_value = sol.primal_value;
  c.feasibility_margin =
      *std::min_element(rep.min_dual_slack_eig.begin(),
                        rep.min_dual_slack_eig.end());
  c.repair_shift = rep.shift;
  c.lambda_max = *std::max_element(c.lambda.begin(), c.lambda.end());
  c.lambda_min = *std::min_element(c.lambda.begin(), c.lambda.end());
  return c;
}

inline DualCertificate dual_certificate(GuessingProgram& prog,
                                        const ScoreDistribution& v,
                                        const SdpSettings& st = {}) {
  GuessResult r = solve_guessing(prog, v, st);
  if (!r.feasible())
    throw InfeasibleError(std::string("digp: no certificate, solver status ") +
                          to_string(r.status));
  return certificate_from_solution(prog, v, r.solution);
}

inline DualCertificate dual_certificate(const Game& game, int x_gen, int y_gen,
                                        const std::string& level,
                                        const ScoreDistribution& v) {
  GuessingProgram g = build_guessing_program(game, x_gen, y_gen, level);
  return dual_certificate(g, v);
}

struct VerifyReport {
  int probes = 0;
  int skipped = 0;  // probes found infeasible for the relaxation
  int violations = 0;
  double worst_margin = std::numeric_limits<double>::infinity();
  bool passed = false;
};

inline VerifyReport verify_certificate(GuessingProgram& prog,
                                       const DualCertificate& cert,
                                       const std::vector<ScoreDistribution>& probes,
                                       double tol = 1e-7) {
  VerifyReport rep;
  for (const auto& q : probes) {
    GuessResult r = solve_guessing(prog, q);
    if (!r.feasible()) {
      ++rep.skipped;
      continue;
    }
    ++rep.probes;
    double margin = cert.dot(q) - r.value;
    rep.worst_margin = std::min(rep.worst_margin, margin);
    if (margin < -tol) ++rep.violations;
  }
  rep.passed = rep.violations == 0 && rep.probes > 0;
  return rep;
}

inline std::vector<ScoreDistribution> deterministic_score_vectors(
    const Game& g) {
  std::vector<ScoreDistribution> out;
  for_each_deterministic(g.x_size, g.y_size, g.a_size, g.b_size,
                         [&](const Behaviour& p) {
                           out.push_back(expected_score_distribution(g, p));
                         });
  return out;
}

inline QubitSetup random_qubit_setup(int x_size, int y_size,
                                     std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ang(-M_PI, M_PI);
  std::uniform_real_distribution<double> th(0.05, M_PI / 4);
  QubitSetup s;
  s.theta = th(rng);
  for (int x = 0; x < x_size; ++x) s.alice_angles.push_back(ang(rng));
  for (int y = 0; y < y_size; ++y) s.bob_angles.push_back(ang(rng));
  return s;
}

// v itself, Dirichlet mixtures of random qubit score vectors and, for small
// input alphabets, every deterministic-strategy score vector.
inline std::vector<ScoreDistribution> default_probes(
    const Game& g, const ScoreDistribution& v, std::uint64_t seed,
    int mixtures = 20, int components = 4) {
  std::vector<ScoreDistribution> out{v};
  std::mt19937_64 rng(seed);
  if (g.a_size == 2 && g.b_size == 2) {
    std::gamma_distribution<double> gam(1.0, 1.0);
    for (int i = 0; i < mixtures; ++i) {
      ScoreDistribution q;
      q.values.assign(g.num_scores(), 0.0);
      std::vector<double> w(components);
      double tot = 0.0;
      for (auto& x : w) tot += (x = gam(rng));
      for (int k = 0; k < components; ++k) {
        auto s = random_qubit_setup(g.x_size, g.y_size, rng);
        auto sc = expected_score_distribution(g, behaviour_from_setup(s));
        for (std::size_t c = 0; c < q.size(); ++c)
          q.values[c] += w[k] / tot * sc[c];
      }
      out.push_back(q);
    }
  }
  if (g.x_size * g.y_size <= 6) {
    auto det = deterministic_score_vectors(g);
    out.insert(out.end(), det.begin(), det.end());
  }
  return out;
}

inline nlohmann::json certificate_to_json(const DualCertificate& c) {
  return {{"lambda", c.lambda},
          {"normalization_multiplier", c.normalization_multiplier},
          {"v", c.v.values},
          {"level", c.level},
          {"x_gen", c.x_gen},
          {"y_gen", c.y_gen},
          {"dual_value", c.dual_value},
          {"primal_value", c.primal_value},
          {"feasibility_margin", c.feasibility_margin},
          {"repair_shift", c.repair_shift},
          {"lambda_max", c.lambda_max},
          {"lambda_min", c.lambda_min}};
}

inline DualCertificate certificate_from_json(const nlohmann::json& j) {
  DualCertificate c;
  c.lambda = j.at("lambda").get<std::vector<double>>();
  c.normalization_multiplier = j.at("normalization_multiplier");
  c.v.values = j.at("v").get<std::vector<double>>();
  c.level = j.at("level");
  c.x_gen = j.at("x_gen");
  c.y_gen = j.at("y_gen");
  c.dual_value = j.at("dual_value");
  c.primal_value = j.at("primal_value");
  c.feasibility_margin = j.at("feasibility_margin");
  c.repair_shift = j.at("repair_shift");
  c.lambda_max = j.at("lambda_max");
  c.lambda_min = j.at("lambda_min");
  return c;
}

}  // namespace direx
