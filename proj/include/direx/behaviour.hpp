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
#include <unsupported/Eigen/KroneckerProduct>
#include <algorithm>
#include <cmath>
#include <vector>

#include "direx/game.hpp"

namespace direx {

// Conditional distribution p(a,b|x,y), stored row-major over (x, y, a, b).
struct Behaviour {
  int x_size = 0;
  int y_size = 0;
  int a_size = 0;
  int b_size = 0;
  std::vector<double> p;

  Behaviour() = default;
  Behaviour(int xs, int ys, int as, int bs)
      : x_size(xs), y_size(ys), a_size(as), b_size(bs),
        p(static_cast<std::size_t>(xs * ys * as * bs), 0.0) {}

  std::size_t index(int a, int b, int x, int y) const {
    return ((static_cast<std::size_t>(x) * y_size + y) * a_size + a) * b_size +
           b;
  }
  double operator()(int a, int b, int x, int y) const {
    return p[index(a, b, x, y)];
  }
  double& at(int a, int b, int x, int y) { return p[index(a, b, x, y)]; }

  double marginal_a(int a, int x, int y = 0) const {
    double s = 0.0;
    for (int b = 0; b < b_size; ++b) s += (*this)(a, b, x, y);
    return s;
  }
  double marginal_b(int b, int y, int x = 0) const {
    double s = 0.0;
    for (int a = 0; a < a_size; ++a) s += (*this)(a, b, x, y);
    return s;
  }

  bool matches(const Game& g) const {
    return g.x_size == x_size && g.y_size == y_size && g.a_size == a_size &&
           g.b_size == b_size;
  }
};

struct NoSignallingReport {
  double normalization = 0.0;  // max |sum_ab p - 1|
  double alice = 0.0;          // spread of Alice marginals across y
  double bob = 0.0;            // spread of Bob marginals across x
  double max_discrepancy = 0.0;
  bool passed = false;
};

inline NoSignallingReport validate_no_signalling(const Behaviour& p,
                                                 double tol) {
  NoSignallingReport r;
  for (int x = 0; x < p.x_size; ++x)
    for (int y = 0; y < p.y_size; ++y) {
      double s = 0.0;
      for (int a = 0; a < p.a_size; ++a)
        for (int b = 0; b < p.b_size; ++b) s += p(a, b, x, y);
      r.normalization = std::max(r.normalization, std::abs(s - 1.0));
    }
  for (int b = 0; b < p.b_size; ++b)
    for (int y = 0; y < p.y_size; ++y) {
      double lo = 1e300, hi = -1e300;
      for (int x = 0; x < p.x_size; ++x) {
        double m = p.marginal_b(b, y, x);
        lo = std::min(lo, m);
        hi = std::max(hi, m);
      }
      r.bob = std::max(r.bob, hi - lo);
    }
  for (int a = 0; a < p.a_size; ++a)
    for (int x = 0; x < p.x_size; ++x) {
      double lo = 1e300, hi = -1e300;
      for (int y = 0; y < p.y_size; ++y) {
        double m = p.marginal_a(a, x, y);
        lo = std::min(lo, m);
        hi = std::max(hi, m);
      }
      r.alice = std::max(r.alice, hi - lo);
    }
  r.max_discrepancy = std::max({r.normalization, r.alice, r.bob});
  r.passed = r.max_discrepancy <= tol;
  return r;
}

struct QubitSetup {
  double theta = M_PI / 4;
  std::vector<double> alice_angles;
  std::vector<double> bob_angles;
  double eta = 1.0;
  double werner = 1.0;
  double eta_b = -1.0;  // negative: same as eta

  double eta_bob() const { return eta_b < 0.0 ? eta : eta_b; }

  void validate() const {
    if (!(theta > 0.0 && theta <= M_PI / 4 + 1e-15))
      throw Error("setup: theta must lie in (0, pi/4]");
    if (!(eta >= 0.0 && eta <= 1.0) || !(eta_bob() >= 0.0 && eta_bob() <= 1.0))
      throw Error("setup: eta must lie in [0, 1]");
    if (!(werner >= 0.0 && werner <= 1.0))
      throw Error("setup: werner weight must lie in [0, 1]");
    if (alice_angles.empty() || bob_angles.empty())
      throw Error("setup: empty angle list");
  }
};

// Projector onto cos(phi/2)|0> + sin(phi/2)|1>.
inline Eigen::Matrix2d planar_projector(double phi) {
  double c = std::cos(phi / 2), s = std::sin(phi / 2);
  Eigen::Matrix2d m;
  m << c * c, c * s, c * s, s * s;
  return m;
}

inline Eigen::Matrix4d werner_state(double theta, double w) {
  Eigen::Vector4d psi(std::cos(theta), 0.0, 0.0, std::sin(theta));
  return w * psi * psi.transpose() +
         (1.0 - w) * Eigen::Matrix4d::Identity() / 4.0;
}

inline Eigen::Matrix2d outcome_projector(double phi, int outcome) {
  Eigen::Matrix2d p = planar_projector(phi);
  return outcome == 0 ? p : Eigen::Matrix2d(Eigen::Matrix2d::Identity() - p);
}

inline Behaviour behaviour_from_setup(const QubitSetup& s) {
  s.validate();
  const int xs = static_cast<int>(s.alice_angles.size());
  const int ys = static_cast<int>(s.bob_angles.size());
  Behaviour out(xs, ys, 2, 2);
  Eigen::Matrix4d rho = werner_state(s.theta, s.werner);
  const double ea = s.eta, eb = s.eta_bob();
  for (int x = 0; x < xs; ++x)
    for (int y = 0; y < ys; ++y) {
      double q[2][2];
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          Eigen::Matrix4d op = Eigen::kroneckerProduct(
              outcome_projector(s.alice_angles[x], a),
              outcome_projector(s.bob_angles[y], b));
          q[a][b] = (rho * op).trace();
        }
      double qa[2] = {q[0][0] + q[0][1], q[1][0] + q[1][1]};
      double qb[2] = {q[0][0] + q[1][0], q[0][1] + q[1][1]};
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          double v = ea * eb * q[a][b];
          if (a == 0 && b == 0) v += (1 - ea) * (1 - eb);
          if (a == 0) v += (1 - ea) * eb * qb[b];
          if (b == 0) v += ea * (1 - eb) * qa[a];
          out.at(a, b, x, y) = v;
        }
    }
  return out;
}

inline QubitSetup fig1_setup() {
  QubitSetup s;
  s.theta = M_PI / 4;
  s.alice_angles = {0.0, M_PI / 2};
  s.bob_angles = {M_PI / 4, -M_PI / 4, 0.0};
  return s;
}

inline Behaviour ideal_chsh_behaviour() {
  return behaviour_from_setup(fig1_setup());
}

// Local deterministic behaviour; fa[x] and fb[y] are the fixed outputs.
inline Behaviour deterministic_behaviour(const std::vector<int>& fa,
                                         const std::vector<int>& fb,
                                         int a_size, int b_size) {
  Behaviour p(static_cast<int>(fa.size()), static_cast<int>(fb.size()), a_size,
              b_size);
  for (int x = 0; x < p.x_size; ++x)
    for (int y = 0; y < p.y_size; ++y) p.at(fa[x], fb[y], x, y) = 1.0;
  return p;
}

// Calls fn(behaviour) for every local deterministic strategy.
template <class Fn>
void for_each_deterministic(int x_size, int y_size, int a_size, int b_size,
                            Fn&& fn) {
  std::vector<int> fa(x_size, 0), fb(y_size, 0);
  while (true) {
    fn(deterministic_behaviour(fa, fb, a_size, b_size));
    int i = 0;
    const int total = x_size + y_size;
    for (; i < total; ++i) {
      int& d = i < x_size ? fa[i] : fb[i - x_size];
      int base = i < x_size ? a_size : b_size;
      if (++d < base) break;
      d = 0;
    }
    if (i == total) return;
  }
}

inline ScoreDistribution expected_score_distribution(const Game& g,
                                                     const Behaviour& p) {
  if (!p.matches(g)) throw Error("score distribution: alphabet mismatch");
  ScoreDistribution w;
  w.values.assign(g.num_scores(), 0.0);
  for (int x = 0; x < g.x_size; ++x)
    for (int y = 0; y < g.y_size; ++y) {
      double m = g.input_prob(x, y);
      if (m == 0.0) continue;
      for (int a = 0; a < g.a_size; ++a)
        for (int b = 0; b < g.b_size; ++b)
          w.values[g.score(a, b, x, y)] += m * p(a, b, x, y);
    }
  return w;
}

// Inverse of the empirical behaviour scoring on no-signalling behaviours.
inline Behaviour reconstruct_behaviour(const Game& g,
                                       const ScoreDistribution& omega) {
  const int A = g.a_size, B = g.b_size;
  Behaviour p(g.x_size, g.y_size, A, B);
  auto joint = [&](int a, int b, int x, int y) {
    int s = g.score(a, b, x, y);
    return omega[s] / g.input_prob(x, y);
  };
  std::vector<double> pa(static_cast<std::size_t>(A * g.x_size), 0.0);
  std::vector<double> pb(static_cast<std::size_t>(B * g.y_size), 0.0);
  for (int x = 0; x < g.x_size; ++x)
    for (int a = 0; a + 1 < A; ++a)
      for (int b = 0; b < B; ++b) pa[x * A + a] += joint(a, b, x, 0);
  for (int y = 0; y < g.y_size; ++y)
    for (int b = 0; b + 1 < B; ++b)
      for (int a = 0; a < A; ++a) pb[y * B + b] += joint(a, b, 0, y);
  for (int x = 0; x < g.x_size; ++x)
    for (int y = 0; y < g.y_size; ++y) {
      double rest_a = 1.0, rest_b = 1.0;
      for (int a = 0; a + 1 < A; ++a) rest_a -= pa[x * A + a];
      for (int b = 0; b + 1 < B; ++b) rest_b -= pb[y * B + b];
      double corner = 1.0;
      for (int a = 0; a + 1 < A; ++a) {
        double row = pa[x * A + a];
        for (int b = 0; b + 1 < B; ++b) {
          double v = joint(a, b, x, y);
          p.at(a, b, x, y) = v;
          row -= v;
        }
        p.at(a, B - 1, x, y) = row;
      }
      for (int b = 0; b + 1 < B; ++b) {
        double col = pb[y * B + b];
        for (int a = 0; a + 1 < A; ++a) col -= joint(a, b, x, y);
        p.at(A - 1, b, x, y) = col;
      }
      corner = rest_a;
      for (int b = 0; b + 1 < B; ++b) corner -= p(A - 1, b, x, y);
      p.at(A - 1, B - 1, x, y) = corner;
      (void)rest_b;
    }
  return p;
}

}  // namespace direx
