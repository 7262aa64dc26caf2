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

#include <Eigen/Dense>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "direx/engine.hpp"
#include "json.hpp"

namespace direx {

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error("config: " + what) {}
};

enum ExitCode { kExitOk = 0, kExitAbort = 2, kExitInfeasible = 3, kExitConfig = 4 };

struct OptimizerSettings {
  int restarts = 4;
  int iterations = 30;
  double step = 2e-3;        // min-tradeoff ascent step on the simplex
  double tolerance = 1e-5;   // smallest step before a run stops
  double fd_step = 1e-4;     // central difference step
  double restart_radius = 2e-3;
  double setup_step = 0.2;   // initial coordinate step for angles
  double setup_tolerance = 1e-3;
  int max_evaluations = 400;
  std::uint64_t seed = 1;
};

struct SweepSpec {
  std::string parameter = "eta";
  std::vector<double> grid;
};

struct SimulationSpec {
  std::int64_t n = 10000;
  bool use_ria = true;
  std::int64_t blocks = 0;  // 0: about 250 rounds per block
  std::size_t k_max = 0;    // 0: derived from the block entropy
  std::uint64_t seed = 1;
  std::int64_t desk_cap = 1000000;
  std::optional<QubitSetup> device;
  std::optional<Behaviour> device_behaviour;
};

struct SeedAccountSpec {
  double n = 1e10;
  double m = 1.0;
  double k_max = 1e6;
};

struct RunConfig {
  Game game;
  std::string game_name = "custom";
  int x_gen = 0;
  int y_gen = 0;
  std::string level = "2";
  std::optional<QubitSetup> setup;
  std::optional<Behaviour> behaviour;
  std::optional<ScoreDistribution> omega;
  ProtocolParams protocol;
  bool delta_given = false;
  std::optional<double> eps_comp_target;
  std::vector<ScoreDistribution> v;
  bool asymptotic_only = false;
  SweepSpec sweep;
  OptimizerSettings optimizer;
  SimulationSpec simulation;
  SeedAccountSpec seed_account;
  int threads = 1;
};

// Start setups with uniform outputs on the generation inputs.
inline QubitSetup default_setup(int x_size, int y_size) {
  if (x_size == 2 && y_size == 3) return fig1_setup();
  if (x_size == 2 && y_size == 2) {
    QubitSetup s;
    s.theta = M_PI / 4;
    s.alice_angles = {M_PI / 6, M_PI / 2};
    s.bob_angles = {M_PI / 3, 0.0};
    return s;
  }
  throw ConfigError("no default setup for these input sizes; give \"setup\"");
}

namespace detail {

inline std::vector<double> vec(const nlohmann::json& j, const char* what) {
  if (!j.is_array()) throw ConfigError(std::string(what) + " must be an array");
  std::vector<double> out;
  for (const auto& e : j) {
    if (!e.is_number()) throw ConfigError(std::string(what) + " must hold numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

inline ScoreDistribution dist(const nlohmann::json& j, const Game& g,
                              const char* what) {
  ScoreDistribution d;
  d.values = vec(j, what);
  if (d.size() != g.num_scores())
    throw ConfigError(std::string(what) + " needs one entry per score");
  double s = 0.0;
  for (double v : d.values) {
    if (v < 0.0) throw ConfigError(std::string(what) + " has a negative entry");
    s += v;
  }
  if (std::abs(s - 1.0) > 1e-9)
    throw ConfigError(std::string(what) + " must sum to 1");
  return d;
}

inline QubitSetup parse_setup(const nlohmann::json& j) {
  QubitSetup s;
  s.theta = j.value("theta", M_PI / 4);
  if (!j.contains("alice_angles") || !j.contains("bob_angles"))
    throw ConfigError("setup needs alice_angles and bob_angles");
  s.alice_angles = vec(j.at("alice_angles"), "alice_angles");
  s.bob_angles = vec(j.at("bob_angles"), "bob_angles");
  s.eta = j.value("eta", 1.0);
  s.werner = j.value("werner", 1.0);
  s.eta_b = j.value("eta_b", -1.0);
  try {
    s.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return s;
}

inline Behaviour parse_behaviour(const nlohmann::json& j, const Game& g) {
  Behaviour p(g.x_size, g.y_size, g.a_size, g.b_size);
  std::vector<double> v = vec(j, "behaviour");
  if (v.size() != p.p.size())
    throw ConfigError("behaviour must list p(a,b|x,y) in (x,y,a,b) order");
  p.p = v;
  if (!validate_no_signalling(p, 1e-9).passed)
    throw ConfigError("behaviour is not a no-signalling distribution");
  return p;
}

inline void builtin_game(const std::string& name, RunConfig& c) {
  if (name == "chsh") {
    c.game = make_chsh_extended();
    c.x_gen = 1;
    c.y_gen = 2;
  } else if (name == "eb23" || name == "eb22") {
    int ys = name == "eb23" ? 3 : 2;
    c.game = make_empirical_behaviour_game(2, ys, std::vector<double>(2 * ys, 0.5 / ys));
    c.x_gen = 1;
    c.y_gen = ys - 1;
  } else if (name == "ab23" || name == "ab22") {
    int ys = name == "ab23" ? 3 : 2;
    c.game = make_correlator_game(2, ys);
    c.x_gen = 1;
    c.y_gen = ys - 1;
  } else {
    throw ConfigError("unknown builtin game '" + name + "'");
  }
  c.game_name = name;
}

}  // namespace detail

inline RunConfig parse_config(const nlohmann::json& j) {
  using detail::vec;
  if (!j.is_object()) throw ConfigError("top level must be an object");
  RunConfig c;
  if (!j.contains("game")) throw ConfigError("missing \"game\"");
  const auto& gj = j.at("game");
  if (gj.is_string()) {
    detail::builtin_game(gj.get<std::string>(), c);
  } else {
    try {
      c.game = game_from_json(gj);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("game: ") + e.what());
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
  }
  if (j.contains("generation_inputs")) {
    auto gi = vec(j.at("generation_inputs"), "generation_inputs");
    if (gi.size() != 2) throw ConfigError("generation_inputs needs two entries");
    c.x_gen = static_cast<int>(gi[0]);
    c.y_gen = static_cast<int>(gi[1]);
  }
  if (c.x_gen < 0 || c.x_gen >= c.game.x_size || c.y_gen < 0 ||
      c.y_gen >= c.game.y_size)
    throw ConfigError("generation inputs out of range");
  if (j.contains("level")) {
    const auto& l = j.at("level");
    c.level = l.is_number() ? std::to_string(l.get<int>()) : l.get<std::string>();
  }
  if (j.contains("setup")) {
    c.setup = detail::parse_setup(j.at("setup"));
    if (static_cast<int>(c.setup->alice_angles.size()) != c.game.x_size ||
        static_cast<int>(c.setup->bob_angles.size()) != c.game.y_size)
      throw ConfigError("setup angle counts do not match the game");
    if (c.game.a_size != 2 || c.game.b_size != 2)
      throw ConfigError("qubit setups need binary outputs");
  }
  if (j.contains("behaviour"))
    c.behaviour = detail::parse_behaviour(j.at("behaviour"), c.game);
  if (j.contains("omega")) c.omega = detail::dist(j.at("omega"), c.game, "omega");
  if (j.contains("v")) {
    const auto& vj = j.at("v");
    if (!vj.empty() && vj.at(0).is_array()) {
      for (const auto& e : vj) c.v.push_back(detail::dist(e, c.game, "v"));
    } else {
      c.v.push_back(detail::dist(vj, c.game, "v"));
    }
  }
  if (j.contains("protocol")) {
    const auto& p = j.at("protocol");
    c.protocol.n = p.value("n", c.protocol.n);
    c.protocol.gamma = p.value("gamma", c.protocol.gamma);
    c.protocol.eps_s = p.value("eps_s", c.protocol.eps_s);
    c.protocol.eps_eat = p.value("eps_eat", c.protocol.eps_eat);
    c.protocol.eps_ext = p.value("eps_ext", c.protocol.eps_ext);
    c.protocol.ell_ext = p.value("ell_ext", c.protocol.ell_ext);
    if (p.contains("delta")) {
      const auto& d = p.at("delta");
      c.protocol.delta = d.is_number()
                             ? std::vector<double>(c.game.num_scores(), d.get<double>())
                             : vec(d, "delta");
      if (c.protocol.delta.size() != c.game.num_scores())
        throw ConfigError("delta needs one entry per score");
      c.delta_given = true;
    }
    if (p.contains("eps_comp_target"))
      c.eps_comp_target = p.at("eps_comp_target").get<double>();
  }
  c.protocol.ab_size = c.game.a_size * c.game.b_size;
  try {
    c.protocol.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  c.asymptotic_only = j.value("mode", std::string("full")) == "asymptotic";
  if (j.contains("sweep")) {
    const auto& s = j.at("sweep");
    c.sweep.parameter = s.value("parameter", std::string("eta"));
    if (c.sweep.parameter != "eta" && c.sweep.parameter != "werner")
      throw ConfigError("sweep parameter must be eta or werner");
    if (s.contains("grid")) {
      c.sweep.grid = vec(s.at("grid"), "sweep.grid");
    } else {
      double a = s.value("start", 1.0), b = s.value("stop", 0.8);
      int k = s.value("points", 11);
      if (k < 1) throw ConfigError("sweep.points must be >= 1");
      for (int i = 0; i < k; ++i)
        c.sweep.grid.push_back(k == 1 ? a : a + (b - a) * i / (k - 1));
    }
  }
  if (j.contains("optimizer")) {
    const auto& o = j.at("optimizer");
    auto& s = c.optimizer;
    s.restarts = o.value("restarts", s.restarts);
    s.iterations = o.value("iterations", s.iterations);
    s.step = o.value("step", s.step);
    s.tolerance = o.value("tolerance", s.tolerance);
    s.fd_step = o.value("fd_step", s.fd_step);
    s.restart_radius = o.value("restart_radius", s.restart_radius);
    s.setup_step = o.value("setup_step", s.setup_step);
    s.setup_tolerance = o.value("setup_tolerance", s.setup_tolerance);
    s.max_evaluations = o.value("max_evaluations", s.max_evaluations);
    s.seed = o.value("seed", s.seed);
    if (s.iterations < 1 || s.restarts < 0 || !(s.step > 0.0) ||
        !(s.fd_step > 0.0) || !(s.setup_step > 0.0))
      throw ConfigError("optimizer settings out of range");
  }
  if (j.contains("simulation")) {
    const auto& s = j.at("simulation");
    auto& m = c.simulation;
    m.n = s.value("n", m.n);
    m.use_ria = s.value("use_ria", m.use_ria);
    m.blocks = s.value("blocks", m.blocks);
    m.k_max = s.value("k_max", m.k_max);
    m.seed = s.value("seed", m.seed);
    m.desk_cap = s.value("desk_cap", m.desk_cap);
    if (s.contains("device")) {
      const auto& d = s.at("device");
      if (d.is_array())
        m.device_behaviour = detail::parse_behaviour(d, c.game);
      else
        m.device = detail::parse_setup(d);
    }
    if (m.n < 1 || m.n > m.desk_cap)
      throw ConfigError("simulation.n must lie in [1, desk_cap]");
  }
  if (j.contains("seed_account")) {
    const auto& s = j.at("seed_account");
    c.seed_account.n = s.value("n", c.protocol.n);
    c.seed_account.m = s.value("m", 1.0);
    c.seed_account.k_max = s.value("k_max", 1e6);
  } else {
    c.seed_account.n = c.protocol.n;
  }
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("parse error: ") + e.what());
  }
  return parse_config(j);
}

inline ScoreDistribution omega_for_setup(const Game& g, const QubitSetup& s) {
  return expected_score_distribution(g, behaviour_from_setup(s));
}

inline ScoreDistribution resolved_omega(const RunConfig& c) {
  if (c.omega) return *c.omega;
  if (c.behaviour) return expected_score_distribution(c.game, *c.behaviour);
  if (c.setup) return omega_for_setup(c.game, *c.setup);
  throw ConfigError("need omega, behaviour or setup");
}

// Fills delta from the completeness target when it was not given.
inline ProtocolParams resolved_params(const RunConfig& c,
                                      const ScoreDistribution& omega,
                                      std::optional<double> n = std::nullopt) {
  ProtocolParams p = c.protocol;
  if (n) p.n = *n;
  if (!c.delta_given) {
    if (!c.eps_comp_target)
      throw ConfigError("protocol needs delta or eps_comp_target");
    double terms = 0.0;
    for (double w : omega.values)
      if (w > 0.0) terms += 1.0;
    p.delta = delta_for_target(omega.values, p.gamma, p.n,
                               *c.eps_comp_target / std::max(1.0, terms))
                  .delta;
  }
  return p;
}

inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::string join(const std::vector<double>& v, char sep = ';') {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += sep;
    s += fmt(v[i]);
  }
  return s;
}

// Rate of a setup: -log2 of the guessing probability at its score distribution.
inline double setup_rate(GuessingProgram& prog, const QubitSetup& s) {
  GuessResult r = solve_guessing(prog, omega_for_setup(prog.game, s));
  if (!r.feasible() || !(r.value > 0.0))
    return -std::numeric_limits<double>::infinity();
  return -std::log2(std::min(1.0, r.value));
}

struct SetupOptResult {
  QubitSetup setup;
  double rate = -std::numeric_limits<double>::infinity();
  int evaluations = 0;
  std::vector<double> accepted;  // objective after each accepted step
};

inline std::vector<double> setup_params(const QubitSetup& s) {
  std::vector<double> x{s.theta};
  x.insert(x.end(), s.alice_angles.begin(), s.alice_angles.end());
  x.insert(x.end(), s.bob_angles.begin(), s.bob_angles.end());
  return x;
}

inline QubitSetup with_params(QubitSetup s, const std::vector<double>& x) {
  const std::size_t na = s.alice_angles.size();
  s.theta = std::clamp(x[0], 1e-3, M_PI / 4);
  for (std::size_t i = 0; i < na; ++i) s.alice_angles[i] = x[1 + i];
  for (std::size_t i = 0; i < s.bob_angles.size(); ++i)
    s.bob_angles[i] = x[1 + na + i];
  return s;
}

// Coordinate ascent over (theta, angles) at fixed noise. This is a simple
// stand-in for the iterative see-saw schemes used in the literature.
inline SetupOptResult optimize_setup(GuessingProgram& prog, const QubitSetup& start,
                                     const OptimizerSettings& st) {
  SetupOptResult r;
  r.setup = start;
  r.rate = setup_rate(prog, start);
  r.evaluations = 1;
  r.accepted.push_back(r.rate);
  std::vector<double> x = setup_params(start);
  double step = st.setup_step;
  while (step >= st.setup_tolerance && r.evaluations < st.max_evaluations) {
    bool improved = false;
    for (std::size_t i = 0; i < x.size() && r.evaluations < st.max_evaluations; ++i) {
      for (double sign : {1.0, -1.0}) {
        std::vector<double> t = x;
        t[i] += sign * step;
        if (i == 0) t[0] = std::clamp(t[0], 1e-3, M_PI / 4);
        if (t[i] == x[i]) continue;
        QubitSetup cand = with_params(start, t);
        double f = setup_rate(prog, cand);
        ++r.evaluations;
        if (f > r.rate + 1e-12) {
          x = t;
          r.rate = f;
          r.setup = cand;
          r.accepted.push_back(f);
          improved = true;
          break;
        }
      }
    }
    if (!improved) step /= 2.0;
  }
  return r;
}

struct SweepPoint {
  double value = 0.0;
  QubitSetup setup;
  double asymptotic_rate = 0.0;
  double eat_rate = 0.0;
  RateReport report;
  double eps_comp = 0.0;
};

inline QubitSetup apply_sweep_value(QubitSetup s, const std::string& param,
                                    double value) {
  if (param == "eta")
    s.eta = value;
  else
    s.werner = value;
  return s;
}

// Certificate parameters tried by the sweep: omega itself and omega pulled
// towards the uniform-output point, which helps on the quantum boundary.
inline const std::vector<double>& sweep_shrink_factors() {
  static const std::vector<double> t{0.0,  1e-4, 3e-4, 1e-3, 3e-3, 1e-2,
                                     0.02, 0.05, 0.1,  0.2,  0.35};
  return t;
}

inline void sweep_eat_for_setup(GuessingProgram& prog, const RunConfig& c,
                                const QubitSetup& setup, SweepPoint& pt) {
  ScoreDistribution omega = omega_for_setup(c.game, setup);
  ProtocolParams p = resolved_params(c, omega);
  double eps_comp = 0.0;
  try {
    eps_comp = completeness_error(p.n, p.gamma, omega.values, p.delta);
  } catch (const Error&) {
    return;
  }
  if (std::isnan(pt.eps_comp)) pt.eps_comp = eps_comp;
  Behaviour uniform(c.game.x_size, c.game.y_size, c.game.a_size, c.game.b_size);
  for (auto& v : uniform.p) v = 1.0 / (c.game.a_size * c.game.b_size);
  ScoreDistribution centre = expected_score_distribution(c.game, uniform);
  for (double t : sweep_shrink_factors()) {
    ScoreDistribution v = omega;
    for (std::size_t k = 0; k < v.size(); ++k)
      v[k] = (1.0 - t) * omega[k] + t * centre[k];
    try {
      PipelineResult r = certify_pipeline(
          prog, omega, p, t == 0.0 ? std::nullopt : std::optional<ScoreDistribution>(v));
      if (r.report.valid && r.report.rate_per_round > pt.eat_rate) {
        pt.report = r.report;
        pt.eat_rate = r.report.rate_per_round;
        pt.eps_comp = eps_comp;
      }
    } catch (const Error&) {
    }
  }
}

// Neighbouring optima are tried only when the point's own setup certifies
// nothing, e.g. when it drives a score to nearly zero.
inline void sweep_finish_point(GuessingProgram& prog, const RunConfig& c,
                               SweepPoint& pt,
                               const std::vector<QubitSetup>& fallbacks = {}) {
  if (c.asymptotic_only) return;
  pt.eps_comp = std::numeric_limits<double>::quiet_NaN();
  sweep_eat_for_setup(prog, c, pt.setup, pt);
  if (pt.eat_rate > 0.0) return;
  for (const QubitSetup& s : fallbacks)
    sweep_eat_for_setup(prog, c, apply_sweep_value(s, c.sweep.parameter, pt.value), pt);
}

// Phase 1 optimizes every grid point from the default start. Phase 2 offers
// each point every other point's optimum as a new start. Phase 3 fills in the
// finite-size columns.
inline std::vector<SweepPoint> run_sweep(const RunConfig& c, int threads = 1) {
  if (c.sweep.grid.empty()) throw ConfigError("sweep grid is empty");
  const QubitSetup base = c.setup ? *c.setup : default_setup(c.game.x_size, c.game.y_size);
  const std::size_t k = c.sweep.grid.size();
  std::vector<SweepPoint> pts(k);
  threads = std::max(1, threads);
  auto parallel = [&](auto&& fn) {
    std::vector<std::thread> pool;
    auto work = [&](int t) {
      GuessingProgram prog = build_guessing_program(c.game, c.x_gen, c.y_gen, c.level);
      for (std::size_t i = t; i < k; i += threads) fn(prog, i);
    };
    for (int t = 1; t < threads; ++t) pool.emplace_back(work, t);
    work(0);
    for (auto& th : pool) th.join();
  };
  parallel([&](GuessingProgram& prog, std::size_t i) {
    pts[i].value = c.sweep.grid[i];
    SetupOptResult r = optimize_setup(
        prog, apply_sweep_value(base, c.sweep.parameter, c.sweep.grid[i]), c.optimizer);
    pts[i].setup = r.setup;
    pts[i].asymptotic_rate = r.rate;
  });
  std::vector<SweepPoint> snapshot = pts;
  parallel([&](GuessingProgram& prog, std::size_t i) {
    int best = -1;
    double best_rate = pts[i].asymptotic_rate;
    for (std::size_t j = 0; j < k; ++j) {
      if (j == i) continue;
      QubitSetup s = apply_sweep_value(snapshot[j].setup, c.sweep.parameter, c.sweep.grid[i]);
      double f = setup_rate(prog, s);
      if (f > best_rate + 1e-9) {
        best_rate = f;
        best = static_cast<int>(j);
      }
    }
    if (best >= 0) {
      SetupOptResult r = optimize_setup(
          prog, apply_sweep_value(snapshot[best].setup, c.sweep.parameter, c.sweep.grid[i]),
          c.optimizer);
      pts[i].setup = r.setup;
      pts[i].asymptotic_rate = r.rate;
    }
  });
  snapshot = pts;
  parallel([&](GuessingProgram& prog, std::size_t i) {
    std::vector<QubitSetup> near;
    if (i > 0) near.push_back(snapshot[i - 1].setup);
    if (i + 1 < k) near.push_back(snapshot[i + 1].setup);
    sweep_finish_point(prog, c, pts[i], near);
  });
  return pts;
}

inline std::optional<double> threshold_value(const std::vector<SweepPoint>& pts) {
  std::optional<double> t;
  for (const auto& p : pts)
    if (p.eat_rate > 0.0 && (!t || p.value < *t)) t = p.value;
  return t;
}

inline void write_sweep_csv(const RunConfig& c, const std::vector<SweepPoint>& pts,
                            std::ostream& os) {
  os << "# schema: sweep/1\n";
  os << c.sweep.parameter
     << ",theta,angles,asymptotic_rate,eat_rate,beta,eps_v,eps_k,eps_omega,"
        "eps_comp,output_length\n";
  for (const auto& p : pts) {
    os << fmt(p.value) << ',' << fmt(p.setup.theta) << ','
       << join(p.setup.alice_angles) << '|' << join(p.setup.bob_angles) << ','
       << fmt(p.asymptotic_rate) << ',' << fmt(p.eat_rate) << ','
       << fmt(p.report.beta) << ',' << fmt(p.report.eps_v) << ','
       << fmt(p.report.eps_k) << ',' << fmt(p.report.eps_omega) << ','
       << fmt(p.eps_comp) << ',' << fmt(p.report.output_length) << '\n';
  }
  auto t = threshold_value(pts);
  os << "# threshold_" << c.sweep.parameter << ',' << (t ? fmt(*t) : "none") << '\n';
}

// Euclidean projection onto the probability simplex.
inline std::vector<double> project_simplex(const std::vector<double>& v) {
  std::vector<double> u = v;
  std::sort(u.begin(), u.end(), std::greater<double>());
  double css = 0.0, theta = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    css += u[i];
    double t = (css - 1.0) / static_cast<double>(i + 1);
    if (u[i] - t > 0.0) theta = t;
  }
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::max(0.0, v[i] - theta);
  return out;
}

// Orthonormal basis of {d : sum d = 0}.
inline Eigen::MatrixXd simplex_tangent_basis(int dim) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim - 1);
  for (int i = 0; i + 1 < dim; ++i) {
    m(i, i) = 1.0;
    m(dim - 1, i) = -1.0;
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  return qr.householderQ() * Eigen::MatrixXd::Identity(dim, dim - 1);
}

struct MtfEvaluation {
  double rate = -std::numeric_limits<double>::infinity();
  RateReport report;
};

inline MtfEvaluation mtf_rate(GuessingProgram& prog, const ScoreDistribution& omega,
                              const ProtocolParams& p, const ScoreDistribution& v) {
  MtfEvaluation e;
  try {
    DualCertificate cert = dual_certificate(prog, v);
    MinTradeoff f = build(cert, p.gamma);
    e.report = optimized_entropy(p, f, omega);
    if (e.report.valid && std::isfinite(e.report.rate_per_round))
      e.rate = e.report.rate_per_round;
  } catch (const Error&) {
  }
  return e;
}

struct MtfOptResult {
  ScoreDistribution v_start;
  double rate_start = 0.0;
  ScoreDistribution v;
  double rate = -std::numeric_limits<double>::infinity();
  RateReport report;
  int evaluations = 0;
};

// Projected gradient ascent on v with random restarts near the incumbent.
inline MtfOptResult optimize_mtf(GuessingProgram& prog, const ScoreDistribution& omega,
                                 const ProtocolParams& p, const ScoreDistribution& start,
                                 const OptimizerSettings& st) {
  MtfOptResult r;
  r.v_start = start;
  MtfEvaluation e0 = mtf_rate(prog, omega, p, start);
  r.evaluations = 1;
  r.v = start;
  r.rate = r.rate_start = e0.rate;
  r.report = e0.report;
  if (st.iterations <= 1) return r;
  const int dim = static_cast<int>(start.size());
  const Eigen::MatrixXd basis = simplex_tangent_basis(dim);
  std::mt19937_64 rng(st.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto make = [&](const std::vector<double>& x) {
    ScoreDistribution d;
    d.values = project_simplex(x);
    return d;
  };
  for (int run = 0; run <= st.restarts; ++run) {
    ScoreDistribution v = r.v;
    MtfEvaluation fv{r.rate, r.report};
    if (run > 0) {
      std::vector<double> x = r.v.values;
      for (int b = 0; b < dim - 1; ++b) {
        double z = normal(rng) * st.restart_radius;
        for (int i = 0; i < dim; ++i) x[i] += z * basis(i, b);
      }
      v = make(x);
      fv = mtf_rate(prog, omega, p, v);
      ++r.evaluations;
    }
    double step = st.step;
    for (int it = 1; it < st.iterations && step >= st.tolerance; ++it) {
      Eigen::VectorXd g = Eigen::VectorXd::Zero(dim);
      for (int b = 0; b < dim - 1; ++b) {
        std::vector<double> xp = v.values, xm = v.values;
        for (int i = 0; i < dim; ++i) {
          xp[i] += st.fd_step * basis(i, b);
          xm[i] -= st.fd_step * basis(i, b);
        }
        double fp = mtf_rate(prog, omega, p, make(xp)).rate;
        double fm = mtf_rate(prog, omega, p, make(xm)).rate;
        r.evaluations += 2;
        double d = 0.0;
        if (std::isfinite(fp) && std::isfinite(fm))
          d = (fp - fm) / (2.0 * st.fd_step);
        else if (std::isfinite(fp) && std::isfinite(fv.rate))
          d = (fp - fv.rate) / st.fd_step;
        else if (std::isfinite(fm) && std::isfinite(fv.rate))
          d = (fv.rate - fm) / st.fd_step;
        g += d * basis.col(b);
      }
      if (!(g.norm() > 0.0)) break;
      std::vector<double> x = v.values;
      for (int i = 0; i < dim; ++i) x[i] += step * g(i) / g.norm();
      ScoreDistribution cand = make(x);
      MtfEvaluation fc = mtf_rate(prog, omega, p, cand);
      ++r.evaluations;
      if (fc.rate > fv.rate) {
        v = cand;
        fv = fc;
        step *= 1.5;
      } else {
        step *= 0.5;
      }
    }
    if (fv.rate > r.rate) {
      r.rate = fv.rate;
      r.v = v;
      r.report = fv.report;
    }
  }
  return r;
}

inline nlohmann::json setup_to_json(const QubitSetup& s) {
  return {{"theta", s.theta},     {"alice_angles", s.alice_angles},
          {"bob_angles", s.bob_angles}, {"eta", s.eta},
          {"werner", s.werner},   {"eta_b", s.eta_bob()}};
}

inline nlohmann::json report_to_json(const RateReport& r) {
  return {{"beta", r.beta},
          {"eps_v", r.eps_v},
          {"eps_k", r.eps_k},
          {"eps_omega", r.eps_omega},
          {"first_order", r.first_order},
          {"entropy_bound_bits", r.entropy_bound_bits},
          {"rate_per_round", r.rate_per_round},
          {"asymptotic_rate", r.asymptotic_rate},
          {"output_length", r.output_length},
          {"valid", r.valid}};
}

inline int cmd_rate(const RunConfig& c, std::ostream& os) {
  ScoreDistribution omega = resolved_omega(c);
  GuessingProgram prog = build_guessing_program(c.game, c.x_gen, c.y_gen, c.level);
  std::vector<ScoreDistribution> vs{omega};
  vs.insert(vs.end(), c.v.begin(), c.v.end());
  if (c.asymptotic_only) {
    os << "game,v,p_guess,asymptotic_rate\n";
    for (const auto& v : vs) {
      DualCertificate cert = dual_certificate(prog, v);
      os << c.game_name << ',' << join(v.values) << ',' << fmt(cert.primal_value)
         << ',' << fmt(asymptotic_rate(cert, omega)) << '\n';
    }
    return kExitOk;
  }
  ProtocolParams p = resolved_params(c, omega);
  double seed_bits = expected_seed_bits(p.n, p.gamma, c.game.mu);
  os << "game,v,beta,first_order,rate_per_round,asymptotic_rate,eps_v,eps_k,"
        "eps_omega,eps_comp,eps_sound,entropy_bits,seed_bits,net_gain,"
        "output_length\n";
  for (std::size_t i = 0; i < vs.size(); ++i) {
    PipelineResult r = certify_pipeline(prog, omega, p,
                                        i == 0 ? std::nullopt
                                               : std::optional<ScoreDistribution>(vs[i]));
    const RateReport& rep = r.report;
    os << c.game_name << ',' << join(vs[i].values) << ',' << fmt(rep.beta) << ','
       << fmt(rep.first_order) << ',' << fmt(rep.rate_per_round) << ','
       << fmt(rep.asymptotic_rate) << ',' << fmt(rep.eps_v) << ','
       << fmt(rep.eps_k) << ',' << fmt(rep.eps_omega) << ','
       << fmt(r.completeness) << ',' << fmt(r.soundness) << ','
       << fmt(rep.entropy_bound_bits) << ',' << fmt(seed_bits) << ','
       << fmt(rep.entropy_bound_bits - seed_bits - p.ell_ext) << ','
       << fmt(rep.output_length) << '\n';
  }
  return kExitOk;
}

inline int cmd_sweep(const RunConfig& c, std::ostream& os) {
  write_sweep_csv(c, run_sweep(c, c.threads), os);
  return kExitOk;
}

inline int cmd_optimize_mtf(const RunConfig& c, std::ostream& os) {
  ScoreDistribution omega = resolved_omega(c);
  ProtocolParams p = resolved_params(c, omega);
  GuessingProgram prog = build_guessing_program(c.game, c.x_gen, c.y_gen, c.level);
  ScoreDistribution start = c.v.empty() ? omega : c.v.front();
  MtfOptResult r = optimize_mtf(prog, omega, p, start, c.optimizer);
  if (!std::isfinite(r.rate))
    throw InfeasibleError("optimize-mtf: every candidate v was rejected");
  nlohmann::json j = {{"game", c.game_name},
                      {"omega", omega.values},
                      {"v_start", r.v_start.values},
                      {"rate_start", r.rate_start},
                      {"v_star", r.v.values},
                      {"rate", r.rate},
                      {"report", report_to_json(r.report)},
                      {"evaluations", r.evaluations}};
  os << j.dump(2) << '\n';
  return kExitOk;
}

inline int cmd_optimize_setup(const RunConfig& c, std::ostream& os) {
  QubitSetup start = c.setup ? *c.setup : default_setup(c.game.x_size, c.game.y_size);
  GuessingProgram prog = build_guessing_program(c.game, c.x_gen, c.y_gen, c.level);
  SetupOptResult r = optimize_setup(prog, start, c.optimizer);
  nlohmann::json j = {{"game", c.game_name},
                      {"setup", setup_to_json(r.setup)},
                      {"asymptotic_rate", r.rate},
                      {"omega", omega_for_setup(c.game, r.setup).values},
                      {"evaluations", r.evaluations},
                      {"accepted", r.accepted}};
  os << j.dump(2) << '\n';
  return kExitOk;
}

struct SimulationResult {
  Transcript transcript;
  std::optional<PipelineResult> pipeline;
  std::vector<std::uint8_t> output;
  std::int64_t truncated_blocks = 0;
};

inline Behaviour simulation_device(const RunConfig& c) {
  if (c.simulation.device_behaviour) return *c.simulation.device_behaviour;
  if (c.simulation.device) return behaviour_from_setup(*c.simulation.device);
  if (c.behaviour) return *c.behaviour;
  if (c.setup) return behaviour_from_setup(*c.setup);
  throw ConfigError("simulation needs a device setup or behaviour");
}

inline SimulationResult simulate(const RunConfig& c, const ScoreDistribution& omega,
                                 const ProtocolParams& p) {
  const SimulationSpec& s = c.simulation;
  SimulationResult out;
  RoundInputModel model(c.game, p.gamma, c.x_gen, c.y_gen);
  HonestDevice dev(simulation_device(c), mix64(s.seed ^ 0x5EEDULL));
  std::unique_ptr<InputSource> src;
  if (s.use_ria) {
    std::int64_t blocks = s.blocks > 0 ? s.blocks : (s.n + 249) / 250;
    std::int64_t per = (s.n + blocks - 1) / blocks;
    std::size_t k_max = s.k_max;
    if (k_max == 0)
      k_max = static_cast<std::size_t>(
          std::ceil(2.0 * (shannon_entropy(model.probabilities) * per + 3.0)) + 32);
    auto ria = std::make_unique<RiaInputSource>(model, s.n, blocks, k_max, s.seed,
                                                c.threads);
    out.truncated_blocks = ria->truncated_blocks();
    src = std::move(ria);
  } else {
    src = std::make_unique<DirectInputSource>(model, s.seed);
  }
  AccumulationOptions opt;
  opt.threads = c.threads;
  opt.keep_logs = true;
  out.transcript = run_accumulation(dev, c.game, model, *src, s.n, opt);
  out.transcript.abort = abort_decision(out.transcript, omega.values, p.delta, p.gamma);
  if (out.transcript.abort) return out;
  out.pipeline = certify_pipeline(c.game, c.x_gen, c.y_gen, c.level, omega, p);
  std::vector<std::uint8_t> raw = raw_output_bits(out.transcript, c.game);
  std::size_t len = static_cast<std::size_t>(
      std::min<double>(out.pipeline->report.output_length, static_cast<double>(raw.size())));
  std::vector<std::uint8_t> seed_bits;
  if (len > 0) {
    SplitMixBitSource ext(mix64(s.seed ^ 0xE47ULL));
    seed_bits.resize(raw.size() + len - 1);
    for (auto& b : seed_bits) b = static_cast<std::uint8_t>(ext.next());
  }
  out.output = extract_stub(raw, seed_bits, len);
  return out;
}

inline int cmd_simulate(const RunConfig& c, std::ostream& os) {
  ScoreDistribution omega = resolved_omega(c);
  ProtocolParams p = resolved_params(c, omega, static_cast<double>(c.simulation.n));
  SimulationResult r = simulate(c, omega, p);
  std::string hex;
  for (std::size_t i = 0; i < r.output.size(); i += 4) {
    int nib = 0;
    for (std::size_t k = 0; k < 4; ++k)
      nib = (nib << 1) | (i + k < r.output.size() ? r.output[i + k] : 0);
    hex += "0123456789abcdef"[nib];
  }
  nlohmann::json j = {{"game", c.game_name},
                      {"n", r.transcript.n},
                      {"score_counts", r.transcript.score_counts},
                      {"abort", r.transcript.abort},
                      {"seed_bits_used", r.transcript.seed_bits_used},
                      {"ria", c.simulation.use_ria},
                      {"truncated_blocks", r.truncated_blocks},
                      {"delta", p.delta},
                      {"output_bits", r.output.size()},
                      {"output_hex", hex}};
  if (r.pipeline) {
    j["report"] = report_to_json(r.pipeline->report);
    j["eps_comp"] = r.pipeline->completeness;
    j["eps_sound"] = r.pipeline->soundness;
  }
  os << j.dump(2) << '\n';
  return r.transcript.abort ? kExitAbort : kExitOk;
}

inline int cmd_seed_account(const RunConfig& c, std::ostream& os) {
  const SeedAccountSpec& s = c.seed_account;
  SeedRequirements r = seed_requirements(s.n, s.m, c.protocol.gamma, c.game.mu, s.k_max);
  nlohmann::json j = {{"n", s.n},
                      {"n_padded", r.n_padded},
                      {"m", s.m},
                      {"k_max", s.k_max},
                      {"kappa", r.kappa},
                      {"n_max", r.n_max},
                      {"eps_ria", r.eps_ria},
                      {"eps_dist", r.eps_dist}};
  os << j.dump(2) << '\n';
  return kExitOk;
}

}  // namespace direx
