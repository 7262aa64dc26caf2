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

#include <Eigen/Dense>
#include <random>
#include <unsupported/Eigen/KroneckerProduct>

#include "direx/behaviour.hpp"
#include "direx/npa.hpp"

using namespace direx;

namespace {

int count_pattern(const Relaxation& r, int na, int nb) {
  int n = 0;
  for (const auto& m : r.monomials)
    if (m.party_count(0) == na && m.party_count(1) == nb) ++n;
  return n;
}

Eigen::Matrix4d symbol_operator(const QubitSetup& s, const Symbol& sym) {
  Eigen::Matrix2d id = Eigen::Matrix2d::Identity();
  if (sym.party == 0) {
    Eigen::Matrix2d p = outcome_projector(s.alice_angles[sym.input], sym.outcome);
    return Eigen::kroneckerProduct(p, id);
  }
  Eigen::Matrix2d p = outcome_projector(s.bob_angles[sym.input], sym.outcome);
  return Eigen::kroneckerProduct(id, p);
}

Eigen::Matrix4d word_operator(const QubitSetup& s, const std::vector<Symbol>& w) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  for (const auto& sym : w) m = m * symbol_operator(s, sym);
  return m;
}

}  // namespace

TEST(Npa, LevelTwoMonomialCounts) {
  Relaxation r = build_relaxation(2, 3, 2, 2, "2");
  EXPECT_EQ(r.size(), 20);
  EXPECT_EQ(count_pattern(r, 0, 0), 1);
  EXPECT_EQ(count_pattern(r, 1, 0) + count_pattern(r, 0, 1), 5);
  EXPECT_EQ(count_pattern(r, 2, 0), 2);
  EXPECT_EQ(count_pattern(r, 1, 1), 6);
  EXPECT_EQ(count_pattern(r, 0, 2), 6);
  EXPECT_TRUE(r.monomials[0].word.empty());
}

TEST(Npa, ClassCountsMatchEnumeration) {
  EXPECT_EQ(build_relaxation(2, 3, 2, 2, "2").num_classes(), 79);
  EXPECT_EQ(build_relaxation(2, 3, 2, 2, "1").num_classes(), 16);
  EXPECT_EQ(build_relaxation(2, 3, 2, 2, "1").size(), 6);
}

TEST(Npa, ReductionRules) {
  Symbol a0{0, 0, 0}, a1{0, 0, 1}, a2{0, 1, 0}, b0{1, 0, 0};
  auto m = reduce({a0, a0});
  EXPECT_FALSE(m.zero);
  EXPECT_EQ(m.word.size(), 1u);
  EXPECT_TRUE(reduce({a0, a1}).zero);
  auto c = reduce({b0, a0, b0});
  ASSERT_FALSE(c.zero);
  EXPECT_EQ(c.word, (std::vector<Symbol>{a0, b0}));
  EXPECT_EQ(reduce({a0, a2, a0}).word.size(), 3u);
  EXPECT_EQ(reduce({b0, a2}).word, (std::vector<Symbol>{a2, b0}));
}

TEST(Npa, AdjointReversesEachParty) {
  Symbol a0{0, 0, 0}, a1{0, 1, 0}, b0{1, 0, 0}, b1{1, 1, 0};
  EXPECT_EQ(adjoint({a0, a1, b0, b1}), (std::vector<Symbol>{a1, a0, b1, b0}));
  EXPECT_EQ(adjoint(adjoint({a0, a1, b1})), (std::vector<Symbol>{a0, a1, b1}));
  EXPECT_TRUE(adjoint({}).empty());
}

TEST(Npa, ClassTableIsSymmetric) {
  Relaxation r = build_relaxation(2, 3, 2, 2, "2");
  for (int i = 0; i < r.size(); ++i)
    for (int j = 0; j < r.size(); ++j) EXPECT_EQ(r.cls(i, j), r.cls(j, i));
  EXPECT_EQ(r.cls(0, 0), 0);
  for (int c = 0; c < r.num_classes(); ++c) {
    auto [i, j] = r.class_rep[c];
    EXPECT_EQ(r.cls(i, j), c);
    EXPECT_LE(i, j);
  }
}

TEST(Npa, QubitMomentsRespectClassesAndArePsd) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ang(-M_PI, M_PI), th(0.05, M_PI / 4);
  for (const char* level : {"1", "2", "1+AB"}) {
    Relaxation r = build_relaxation(2, 3, 2, 2, level);
    for (int trial = 0; trial < 10; ++trial) {
      QubitSetup s;
      s.theta = th(rng);
      s.alice_angles = {ang(rng), ang(rng)};
      s.bob_angles = {ang(rng), ang(rng), ang(rng)};
      Eigen::Matrix4d rho = werner_state(s.theta, 1.0);
      const int d = r.size();
      Eigen::MatrixXd gamma(d, d);
      std::vector<double> value(r.num_classes(), 0.0);
      std::vector<bool> seen(r.num_classes(), false);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
          Eigen::Matrix4d op = word_operator(s, r.monomials[i].word).transpose() *
                               word_operator(s, r.monomials[j].word);
          gamma(i, j) = (rho * op).trace();
          int c = r.cls(i, j);
          if (c < 0) {
            EXPECT_NEAR(gamma(i, j), 0.0, 1e-12);
            continue;
          }
          if (!seen[c]) {
            seen[c] = true;
            value[c] = gamma(i, j);
          }
          EXPECT_NEAR(gamma(i, j), value[c], 1e-12) << level << " class " << c;
        }
      Eigen::MatrixXd sym = (gamma + gamma.transpose()) / 2;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
      EXPECT_GE(es.eigenvalues().minCoeff(), -1e-12);
    }
  }
}

TEST(Npa, BehaviourFormsReproduceProbabilities) {
  QubitSetup s = fig1_setup();
  s.theta = 0.6;
  s.alice_angles = {0.3, 1.9};
  Behaviour p = behaviour_from_setup(s);
  Relaxation r = build_relaxation(2, 3, 2, 2, "1+AB");
  Eigen::Matrix4d rho = werner_state(s.theta, 1.0);
  std::vector<double> moment(r.num_classes());
  for (int c = 0; c < r.num_classes(); ++c)
    moment[c] = (rho * word_operator(s, r.class_words[c])).trace();
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 3; ++y)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          LinearForm f = behaviour_form(r, a, b, x, y);
          double v = 0.0;
          for (auto [c, coef] : f.terms) v += coef * moment[c];
          EXPECT_NEAR(v, p(a, b, x, y), 1e-12);
        }
}

TEST(Npa, BehaviourCellsCoverDroppedParametrization) {
  Relaxation r = build_relaxation(2, 3, 2, 2, "1");
  auto cells = behaviour_cells(r);
  EXPECT_EQ(cells.size(), 2u + 3u + 6u);
  for (const auto& c : cells) EXPECT_EQ(r.cls(c.cell.first, c.cell.second), c.cls);
  Relaxation r3 = build_relaxation(2, 2, 3, 3, "1");
  EXPECT_EQ(behaviour_cells(r3).size(), 4u + 4u + 16u);
}

TEST(Npa, ClassCountInvariantUnderPermutation) {
  Relaxation base = build_relaxation(2, 3, 2, 2, "2");
  std::vector<int> perm(base.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(11);
  for (int t = 0; t < 5; ++t) {
    std::shuffle(perm.begin(), perm.end(), rng);
    Relaxation r = build_relaxation(2, 3, 2, 2, "2", perm);
    EXPECT_EQ(r.num_classes(), base.num_classes());
    EXPECT_EQ(r.zero_cells.size(), base.zero_cells.size());
    EXPECT_TRUE(r.monomials[0].word.empty());
  }
}

TEST(Npa, LevelsArePrefixClosed) {
  for (const char* level : {"1", "2", "1+AB", "3"}) {
    Relaxation r = build_relaxation(2, 2, 2, 2, level);
    for (const auto& m : r.monomials) {
      if (m.word.empty()) continue;
      std::vector<Symbol> prefix(m.word.begin(), m.word.end() - 1);
      bool found = false;
      for (const auto& o : r.monomials) found = found || o.word == prefix;
      EXPECT_TRUE(found) << level << " " << word_string(m.word);
    }
  }
}

TEST(Npa, IntermediateLevelSitsBetween) {
  int l1 = build_relaxation(2, 3, 2, 2, "1").size();
  int lab = build_relaxation(2, 3, 2, 2, "1+AB").size();
  int l2 = build_relaxation(2, 3, 2, 2, "2").size();
  EXPECT_EQ(lab, l1 + 6);
  EXPECT_LT(lab, l2);
}

TEST(Npa, RejectsBadSpecs) {
  EXPECT_THROW(build_relaxation(2, 2, 2, 2, "0"), Error);
  EXPECT_THROW(build_relaxation(2, 2, 2, 2, "BA"), Error);
  EXPECT_THROW(build_relaxation(2, 2, 2, 2, "1+"), Error);
  EXPECT_THROW(build_relaxation(2, 2, 2, 2, "x"), Error);
  EXPECT_THROW(build_relaxation(2, 2, 1, 2, "1"), Error);
}
