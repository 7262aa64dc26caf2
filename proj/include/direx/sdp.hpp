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
#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "direx/game.hpp"

namespace direx {

// Entry of a symmetric coefficient matrix: value at (row, col) and
// (col, row), stored with row <= col.
struct SdpEntry {
  int block = 0;
  int row = 0;
  int col = 0;
  double value = 0.0;
};

struct SdpConstraint {
  std::vector<SdpEntry> entries;
  double rhs = 0.0;
};

// maximize <C, X>  s.t.  <A_i, X> = b_i,  X >= 0 blockwise.
struct SdpProblem {
  std::vector<int> blocks;
  std::vector<SdpEntry> objective;
  std::vector<SdpConstraint> constraints;

  int num_constraints() const { return static_cast<int>(constraints.size()); }

  void validate() const {
    if (blocks.empty()) throw Error("sdp: no blocks");
    for (int b : blocks)
      if (b < 1) throw Error("sdp: block dimension must be positive");
    auto check = [&](const SdpEntry& e) {
      if (e.block < 0 || e.block >= static_cast<int>(blocks.size()))
        throw Error("sdp: entry block out of range");
      if (e.row < 0 || e.col < e.row || e.col >= blocks[e.block])
        throw Error("sdp: entry index out of range");
      if (!std::isfinite(e.value)) throw Error("sdp: non-finite coefficient");
    };
    for (const auto& e : objective) check(e);
    for (const auto& c : constraints) {
      for (const auto& e : c.entries) check(e);
      if (!std::isfinite(c.rhs)) throw Error("sdp: non-finite rhs");
    }
  }
};

enum class SdpStatus { optimal, primal_infeasible, dual_unbounded, max_iter };

inline const char* to_string(SdpStatus s) {
  switch (s) {
    case SdpStatus::optimal:
      return "optimal";
    case SdpStatus::primal_infeasible:
      return "primal_infeasible";
    case SdpStatus::dual_unbounded:
      return "dual_unbounded";
    case SdpStatus::max_iter:
      return "max_iter";
  }
  return "unknown";
}

struct SdpSolution {
  SdpStatus status = SdpStatus::max_iter;
  double primal_value = 0.0;
  double dual_value = 0.0;
  std::vector<double> y;
  double gap = 0.0;  // relative duality gap
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  std::vector<double> min_dual_slack_eig;
  std::vector<Eigen::MatrixXd> x;
  int iterations = 0;
};

struct SdpSettings {
  double gap_tol = 1e-9;
  double feas_tol = 1e-9;
  int max_iter = 200;
  double infeas_tol = 1e-8;
  double step_fraction = 0.98;
};

using BlockMatrix = std::vector<Eigen::MatrixXd>;

namespace detail {

inline double entry_weight(const SdpEntry& e) {
  return e.row == e.col ? e.value : 2.0 * e.value;
}

inline double inner(const std::vector<SdpEntry>& a, const BlockMatrix& x) {
  double s = 0.0;
  for (const auto& e : a) s += entry_weight(e) * x[e.block](e.row, e.col);
  return s;
}

inline void add_scaled(const std::vector<SdpEntry>& a, double t,
                       BlockMatrix& out) {
  for (const auto& e : a) {
    out[e.block](e.row, e.col) += t * e.value;
    if (e.row != e.col) out[e.block](e.col, e.row) += t * e.value;
  }
}

inline BlockMatrix zeros(const std::vector<int>& blocks) {
  BlockMatrix m;
  for (int b : blocks) m.push_back(Eigen::MatrixXd::Zero(b, b));
  return m;
}

inline BlockMatrix identity(const std::vector<int>& blocks) {
  BlockMatrix m;
  for (int b : blocks) m.push_back(Eigen::MatrixXd::Identity(b, b));
  return m;
}

inline double dot(const BlockMatrix& a, const BlockMatrix& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k].cwiseProduct(b[k]).sum();
  return s;
}

inline double norm(const BlockMatrix& a) { return std::sqrt(dot(a, a)); }

inline void axpy(double t, const BlockMatrix& x, BlockMatrix& y) {
  for (std::size_t k = 0; k < x.size(); ++k) y[k] += t * x[k];
}

inline BlockMatrix sandwich(const BlockMatrix& w, const BlockMatrix& m) {
  BlockMatrix out(m.size());
  for (std::size_t k = 0; k < m.size(); ++k) {
    out[k] = w[k] * m[k] * w[k];
    out[k] = 0.5 * (out[k] + out[k].transpose()).eval();
  }
  return out;
}

inline double min_eig(const Eigen::MatrixXd& m) {
  if (m.rows() == 1) return m(0, 0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m,
                                                    Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

// Largest step t in [0, inf) keeping I + t*M PSD.
inline double max_step(const Eigen::MatrixXd& m) {
  double e = min_eig(m);
  return e < 0.0 ? -1.0 / e : std::numeric_limits<double>::infinity();
}

// Schur complement operator M_ij = <A_i, W A_j W> with block arrow structure:
// local constraints touch one block, global constraints several.
class SchurSystem {
 public:
  SchurSystem(const SdpProblem& p) : p_(p) {
    const int nb = static_cast<int>(p.blocks.size());
    local_.assign(nb, {});
    for (int i = 0; i < p.num_constraints(); ++i) {
      const auto& en = p.constraints[i].entries;
      int blk = en.empty() ? 0 : en.front().block;
      bool single = true;
      for (const auto& e : en)
        if (e.block != blk) single = false;
      if (single)
        local_[blk].push_back(i);
      else
        global_.push_back(i);
    }
  }

  void factor(const BlockMatrix& w) {
    const int nb = static_cast<int>(p_.blocks.size());
    const int ng = static_cast<int>(global_.size());
    d_.assign(nb, {});
    cross_.assign(nb, Eigen::MatrixXd());
    glob_w_.clear();
    for (int g : global_) {
      BlockMatrix a = zeros(p_.blocks);
      add_scaled(p_.constraints[g].entries, 1.0, a);
      glob_w_.push_back(sandwich(w, a));
    }
    Eigen::MatrixXd s(ng, ng);
    for (int i = 0; i < ng; ++i)
      for (int j = 0; j <= i; ++j) {
        double v = inner(p_.constraints[global_[i]].entries, glob_w_[j]);
        s(i, j) = v;
        s(j, i) = v;
      }
    for (int b = 0; b < nb; ++b) {
      const auto& loc = local_[b];
      const int nl = static_cast<int>(loc.size());
      if (nl == 0) continue;
      const Eigen::MatrixXd& wb = w[b];
      Eigen::MatrixXd m(nl, nl);
      for (int i = 0; i < nl; ++i)
        for (int j = 0; j <= i; ++j) {
          double v = 0.0;
          for (const auto& e : p_.constraints[loc[i]].entries)
            for (const auto& f : p_.constraints[loc[j]].entries) {
              double t = wb(e.row, f.row) * wb(f.col, e.col);
              if (f.row != f.col) t += wb(e.row, f.col) * wb(f.row, e.col);
              v += entry_weight(e) * f.value * t;
            }
          m(i, j) = v;
          m(j, i) = v;
        }
      Eigen::MatrixXd c(ng, nl);
      for (int i = 0; i < ng; ++i)
        for (int j = 0; j < nl; ++j)
          c(i, j) = inner(p_.constraints[loc[j]].entries, glob_w_[i]);
      d_[b] = factor_dense(m);
      Eigen::MatrixXd dc = solve_dense(d_[b], c.transpose());
      s.noalias() -= c * dc;
      cross_[b] = std::move(c);
    }
    s_ = factor_dense(s);
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& r) const {
    const int nb = static_cast<int>(p_.blocks.size());
    const int ng = static_cast<int>(global_.size());
    Eigen::VectorXd rg(ng);
    for (int i = 0; i < ng; ++i) rg(i) = r(global_[i]);
    std::vector<Eigen::VectorXd> dl(nb);
    for (int b = 0; b < nb; ++b) {
      const auto& loc = local_[b];
      if (loc.empty()) continue;
      Eigen::VectorXd rl(loc.size());
      for (std::size_t j = 0; j < loc.size(); ++j) rl(j) = r(loc[j]);
      dl[b] = solve_dense(d_[b], rl);
      rg.noalias() -= cross_[b] * dl[b];
    }
    Eigen::VectorXd ug;
    if (ng > 0) ug = solve_dense(s_, rg);
    Eigen::VectorXd u(r.size());
    for (int i = 0; i < ng; ++i) u(global_[i]) = ug(i);
    for (int b = 0; b < nb; ++b) {
      const auto& loc = local_[b];
      if (loc.empty()) continue;
      Eigen::VectorXd rl(loc.size());
      for (std::size_t j = 0; j < loc.size(); ++j) rl(j) = r(loc[j]);
      if (ng > 0) rl.noalias() -= cross_[b].transpose() * ug;
      Eigen::VectorXd ul = solve_dense(d_[b], rl);
      for (std::size_t j = 0; j < loc.size(); ++j) u(loc[j]) = ul(j);
    }
    return u;
  }

 private:
  struct Factor {
    Eigen::LLT<Eigen::MatrixXd> llt;
    Eigen::LDLT<Eigen::MatrixXd> ldlt;
    bool use_llt = true;
  };

  static Factor factor_dense(const Eigen::MatrixXd& m) {
    Factor f;
    if (m.rows() == 0) return f;
    f.llt.compute(m);
    if (f.llt.info() == Eigen::Success) return f;
    f.use_llt = false;
    double scale = std::max(1.0, m.diagonal().cwiseAbs().maxCoeff());
    Eigen::MatrixXd reg = m;
    reg.diagonal().array() += 1e-14 * scale;
    f.ldlt.compute(reg);
    return f;
  }

  static Eigen::MatrixXd solve_dense(const Factor& f, const Eigen::MatrixXd& r) {
    if (r.rows() == 0) return r;
    return f.use_llt ? Eigen::MatrixXd(f.llt.solve(r))
                     : Eigen::MatrixXd(f.ldlt.solve(r));
  }

  const SdpProblem& p_;
  std::vector<std::vector<int>> local_;
  std::vector<int> global_;
  std::vector<Factor> d_;
  std::vector<Eigen::MatrixXd> cross_;
  std::vector<BlockMatrix> glob_w_;
  Factor s_;
};

}  // namespace detail

// A(X) for every constraint.
inline Eigen::VectorXd apply_constraints(const SdpProblem& p,
                                         const BlockMatrix& x) {
  Eigen::VectorXd r(p.num_constraints());
  for (int i = 0; i < p.num_constraints(); ++i)
    r(i) = detail::inner(p.constraints[i].entries, x);
  return r;
}

// sum_i y_i A_i.
inline BlockMatrix apply_adjoint(const SdpProblem& p, const Eigen::VectorXd& y) {
  BlockMatrix m = detail::zeros(p.blocks);
  for (int i = 0; i < p.num_constraints(); ++i)
    if (y(i) != 0.0) detail::add_scaled(p.constraints[i].entries, y(i), m);
  return m;
}

// Per-block minimum eigenvalue of sum_i y_i A_i - C.
inline std::vector<double> dual_slack_min_eig(const SdpProblem& p,
                                              const std::vector<double>& y) {
  Eigen::VectorXd yv = Eigen::Map<const Eigen::VectorXd>(y.data(), y.size());
  BlockMatrix z = apply_adjoint(p, yv);
  detail::add_scaled(p.objective, -1.0, z);
  std::vector<double> out;
  for (const auto& zb : z) out.push_back(detail::min_eig(zb));
  return out;
}

inline double dual_objective(const SdpProblem& p, const std::vector<double>& y) {
  double s = 0.0;
  for (int i = 0; i < p.num_constraints(); ++i) s += p.constraints[i].rhs * y[i];
  return s;
}

// Homogeneous self-dual interior point method with Nesterov-Todd scaling and
// Mehrotra predictor-corrector steps. Internally solves min <c,x> with c = -C.
inline SdpSolution solve(const SdpProblem& prob, const SdpSettings& st = {}) {
  using namespace detail;
  prob.validate();
  const int m = prob.num_constraints();
  const auto& blocks = prob.blocks;
  const int nb = static_cast<int>(blocks.size());
  double nu = 0.0;
  for (int b : blocks) nu += b;

  Eigen::VectorXd bvec(m);
  for (int i = 0; i < m; ++i) bvec(i) = prob.constraints[i].rhs;
  BlockMatrix c = zeros(blocks);
  add_scaled(prob.objective, -1.0, c);
  const double bnorm = bvec.norm();
  const double cnorm = norm(c);

  BlockMatrix x = identity(blocks), z = identity(blocks);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(m);
  double tau = 1.0, kappa = 1.0;

  SchurSystem schur(prob);
  SdpSolution best;
  double best_merit = std::numeric_limits<double>::infinity();
  BlockMatrix best_x;
  Eigen::VectorXd best_y;
  SdpStatus status = SdpStatus::max_iter;
  int it = 0;

  auto record = [&](double pres, double dres, double gap) {
    double merit = std::max({pres, dres, gap});
    if (merit < best_merit) {
      best_merit = merit;
      best_x = x;
      best_y = y / tau;
      for (auto& xb : best_x) xb /= tau;
      best.primal_residual = pres;
      best.dual_residual = dres;
      best.gap = gap;
    }
  };

  for (; it < st.max_iter; ++it) {
    Eigen::VectorXd ax = apply_constraints(prob, x);
    BlockMatrix aty = apply_adjoint(prob, y);
    double cx = dot(c, x);
    double by = bvec.dot(y);

    Eigen::VectorXd r1 = bvec * tau - ax;
    BlockMatrix r2 = c;
    for (int k = 0; k < nb; ++k) r2[k] = c[k] * tau - aty[k] - z[k];
    double r3 = cx - by + kappa;

    double pres = (ax / tau - bvec).norm() / (1.0 + bnorm);
    BlockMatrix dres_m = r2;
    for (auto& d : dres_m) d /= tau;
    double dres = norm(dres_m) / (1.0 + cnorm);
    double pobj = cx / tau, dobj = by / tau;
    double gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
    record(pres, dres, gap);
    if (pres <= st.feas_tol && dres <= st.feas_tol && gap <= st.gap_tol) {
      status = SdpStatus::optimal;
      break;
    }
    if (by > 0.0) {
      BlockMatrix ray = aty;
      axpy(1.0, z, ray);
      if (norm(ray) <= st.infeas_tol * by) {
        status = SdpStatus::primal_infeasible;
        break;
      }
    }
    if (cx < 0.0 && ax.norm() <= st.infeas_tol * (-cx)) {
      status = SdpStatus::dual_unbounded;
      break;
    }

    // Nesterov-Todd scaling point.
    BlockMatrix g(nb), w(nb);
    std::vector<Eigen::VectorXd> lam(nb);
    bool scaling_ok = true;
    for (int k = 0; k < nb; ++k) {
      Eigen::LLT<Eigen::MatrixXd> lx(x[k]), lz(z[k]);
      if (lx.info() != Eigen::Success || lz.info() != Eigen::Success) {
        scaling_ok = false;
        break;
      }
      Eigen::MatrixXd L = lx.matrixL(), R = lz.matrixL();
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(R.transpose() * L,
                                            Eigen::ComputeFullU |
                                                Eigen::ComputeFullV);
      Eigen::VectorXd s = svd.singularValues();
      if (s.minCoeff() <= 0.0) {
        scaling_ok = false;
        break;
      }
      g[k] = L * svd.matrixV() * s.cwiseSqrt().cwiseInverse().asDiagonal();
      w[k] = g[k] * g[k].transpose();
      lam[k] = s;
    }
    if (!scaling_ok) break;
    schur.factor(w);

    auto schur_solve = [&](const Eigen::VectorXd& r) {
      Eigen::VectorXd u = schur.solve(r);
      for (int pass = 0; pass < 2; ++pass) {
        Eigen::VectorXd res =
            r - apply_constraints(prob, sandwich(w, apply_adjoint(prob, u)));
        u += schur.solve(res);
      }
      return u;
    };

    BlockMatrix wcw = sandwich(w, c);
    BlockMatrix wr2w = sandwich(w, r2);
    Eigen::VectorXd a_vec = apply_constraints(prob, wcw);
    Eigen::VectorXd q = schur_solve(a_vec + bvec);
    const double c_wcw = dot(c, wcw);
    const double c_wr2w = dot(c, wr2w);
    Eigen::VectorXd a_wr2w = apply_constraints(prob, wr2w);
    const double mu = (dot(x, z) + tau * kappa) / (nu + 1.0);

    struct Direction {
      BlockMatrix dx, dz;
      Eigen::VectorXd dy;
      double dtau = 0.0, dkappa = 0.0;
    };

    // Scaled complementarity right-hand sides are given in the eigenbasis of
    // Lambda (diagonal), so R_x = G D G^T with D_ij = 2 R_ij / (l_i + l_j).
    auto direction = [&](const BlockMatrix& rs, double rtau, double eta) {
      Direction d;
      BlockMatrix rx(nb);
      for (int k = 0; k < nb; ++k) {
        const auto& l = lam[k];
        Eigen::MatrixXd dmat = rs[k];
        for (int i = 0; i < dmat.rows(); ++i)
          for (int j = 0; j < dmat.cols(); ++j)
            dmat(i, j) = 2.0 * dmat(i, j) / (l(i) + l(j));
        rx[k] = g[k] * dmat * g[k].transpose();
        rx[k] = 0.5 * (rx[k] + rx[k].transpose()).eval();
      }
      Eigen::VectorXd rhs = eta * r1 - apply_constraints(prob, rx) + eta * a_wr2w;
      Eigen::VectorXd p = schur_solve(rhs);
      double num = eta * r3 + dot(c, rx) - eta * c_wr2w + rtau / tau -
                   (bvec - a_vec).dot(p);
      double den = (bvec - a_vec).dot(q) + c_wcw + kappa / tau;
      d.dtau = num / den;
      d.dy = p + d.dtau * q;
      d.dz = r2;
      for (auto& m2 : d.dz) m2 *= eta;
      BlockMatrix atdy = apply_adjoint(prob, d.dy);
      axpy(-1.0, atdy, d.dz);
      axpy(d.dtau, c, d.dz);
      BlockMatrix wdzw = sandwich(w, d.dz);
      d.dx = rx;
      axpy(-1.0, wdzw, d.dx);
      d.dkappa = (rtau - kappa * d.dtau) / tau;
      return d;
    };

    auto scaled = [&](const Direction& d, BlockMatrix& sx, BlockMatrix& sz) {
      sx.resize(nb);
      sz.resize(nb);
      for (int k = 0; k < nb; ++k) {
        Eigen::MatrixXd gi = g[k].inverse();
        sx[k] = gi * d.dx[k] * gi.transpose();
        sz[k] = g[k].transpose() * d.dz[k] * g[k];
      }
    };

    auto step_length = [&](const BlockMatrix& sx, const BlockMatrix& sz,
                           const Direction& d) {
      double amax = std::numeric_limits<double>::infinity();
      for (int k = 0; k < nb; ++k) {
        Eigen::VectorXd is = lam[k].cwiseSqrt().cwiseInverse();
        amax = std::min(amax, max_step(is.asDiagonal() * sx[k] * is.asDiagonal()));
        amax = std::min(amax, max_step(is.asDiagonal() * sz[k] * is.asDiagonal()));
      }
      if (d.dtau < 0.0) amax = std::min(amax, -tau / d.dtau);
      if (d.dkappa < 0.0) amax = std::min(amax, -kappa / d.dkappa);
      return amax;
    };

    BlockMatrix r_aff(nb);
    for (int k = 0; k < nb; ++k)
      r_aff[k] = -Eigen::MatrixXd(lam[k].array().square().matrix().asDiagonal());
    Direction aff = direction(r_aff, -tau * kappa, 1.0);
    BlockMatrix sx, sz;
    scaled(aff, sx, sz);
    double a_aff = std::min(1.0, step_length(sx, sz, aff));
    double sigma = std::pow(1.0 - a_aff, 3);

    BlockMatrix r_cor(nb);
    for (int k = 0; k < nb; ++k) {
      Eigen::MatrixXd prod = sx[k] * sz[k];
      r_cor[k] = -0.5 * (prod + prod.transpose());
      r_cor[k].diagonal().array() += sigma * mu - lam[k].array().square();
    }
    double rtau = sigma * mu - tau * kappa - aff.dtau * aff.dkappa;
    Direction cor = direction(r_cor, rtau, 1.0 - sigma);
    scaled(cor, sx, sz);
    double alpha = std::min(1.0, st.step_fraction * step_length(sx, sz, cor));
    if (!(alpha > 0.0) || !std::isfinite(alpha)) break;

    axpy(alpha, cor.dx, x);
    axpy(alpha, cor.dz, z);
    y += alpha * cor.dy;
    tau += alpha * cor.dtau;
    kappa += alpha * cor.dkappa;
    for (int k = 0; k < nb; ++k) {
      x[k] = 0.5 * (x[k] + x[k].transpose()).eval();
      z[k] = 0.5 * (z[k] + z[k].transpose()).eval();
    }
  }

  SdpSolution sol = best;
  sol.status = status;
  sol.iterations = it;
  if (status == SdpStatus::optimal || status == SdpStatus::max_iter) {
    sol.x = best_x;
    sol.y.resize(m);
    for (int i = 0; i < m; ++i) sol.y[i] = -best_y(i);
    sol.primal_value = -dot(c, best_x);
    sol.dual_value = dual_objective(prob, sol.y);
    sol.min_dual_slack_eig = dual_slack_min_eig(prob, sol.y);
  } else {
    sol.y.resize(m);
    for (int i = 0; i < m; ++i) sol.y[i] = -y(i);
  }
  return sol;
}

// Shifts the multiplier of an identity-coefficient constraint until every
// dual slack block is PSD with the given margin.
struct RepairResult {
  std::vector<double> y;
  double shift = 0.0;
  double dual_value = 0.0;
  std::vector<double> min_dual_slack_eig;
};

inline bool is_identity_constraint(const SdpProblem& p, int k) {
  std::vector<std::vector<int>> seen;
  for (int b : p.blocks) seen.emplace_back(b, 0);
  for (const auto& e : p.constraints.at(k).entries) {
    if (e.row != e.col || e.value != 1.0) return false;
    if (seen[e.block][e.row]++) return false;
  }
  for (const auto& s : seen)
    for (int v : s)
      if (v != 1) return false;
  return true;
}

inline RepairResult dual_feasibility_repair(const SdpProblem& p,
                                            const std::vector<double>& y,
                                            int identity_constraint,
                                            double margin = 1e-12) {
  if (identity_constraint < 0 || identity_constraint >= p.num_constraints() ||
      !is_identity_constraint(p, identity_constraint))
    throw Error("sdp repair: designated constraint is not the identity");
  RepairResult r;
  r.y = y;
  auto eig = dual_slack_min_eig(p, y);
  double lo = *std::min_element(eig.begin(), eig.end());
  r.shift = std::max(0.0, -lo + margin);
  r.y[identity_constraint] += r.shift;
  r.dual_value = dual_objective(p, r.y);
  r.min_dual_slack_eig = dual_slack_min_eig(p, r.y);
  return r;
}

// Sparse SDPA text format. SDPA's dual problem max <F0,Y> s.t. <F_i,Y> = c_i
// is this problem with F0 = C, F_i = A_i and c = b.
inline void write_sdpa(const SdpProblem& p, std::ostream& os) {
  os.precision(17);
  os << p.num_constraints() << "\n" << p.blocks.size() << "\n";
  for (std::size_t k = 0; k < p.blocks.size(); ++k)
    os << p.blocks[k] << (k + 1 < p.blocks.size() ? " " : "\n");
  for (int i = 0; i < p.num_constraints(); ++i)
    os << p.constraints[i].rhs << (i + 1 < p.num_constraints() ? " " : "\n");
  for (const auto& e : p.objective)
    os << 0 << " " << e.block + 1 << " " << e.row + 1 << " " << e.col + 1
       << " " << e.value << "\n";
  for (int i = 0; i < p.num_constraints(); ++i)
    for (const auto& e : p.constraints[i].entries)
      os << i + 1 << " " << e.block + 1 << " " << e.row + 1 << " " << e.col + 1
         << " " << e.value << "\n";
}

}  // namespace direx
