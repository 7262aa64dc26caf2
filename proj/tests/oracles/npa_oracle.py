# Copyright 2026 The direx Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Independent guessing-probability oracle (cvxpy + Clarabel).

Used offline to produce the frozen reference values in the C++ tests.
Operators are strings like "A0|1" (outcome 0 of input 1); moments are keyed by
the sorted tuple of the two Hermitian-conjugate canonical words.
"""
import itertools
import sys

import cvxpy as cp
import numpy as np


def canon(word):
    a = [s for s in word if s[0] == "A"]
    b = [s for s in word if s[0] == "B"]
    out = []
    for part in (a, b):
        stack = []
        for s in part:
            if stack and stack[-1][1] == s[1]:
                if stack[-1][2] == s[2]:
                    continue
                return None
            stack.append(s)
        out.extend(stack)
    return tuple(out)


def dagger(word):
    a = [s for s in word if s[0] == "A"][::-1]
    b = [s for s in word if s[0] == "B"][::-1]
    return tuple(a + b)


def key(word):
    w = canon(word)
    if w is None:
        return None
    v = canon(dagger(w))
    return min((len(w), w), (len(v), v))


def monomials(nx, ny, level):
    gens = [("A", x, 0) for x in range(nx)] + [("B", y, 0) for y in range(ny)]
    words = {()}
    frontier = [()]
    for _ in range(level):
        nxt = []
        for w in frontier:
            for g in gens:
                c = canon(w + (g,))
                if c is not None and c not in words:
                    words.add(c)
                    nxt.append(c)
        frontier = nxt
    return sorted(words, key=lambda w: (len(w), w))


def chsh_game():
    mu = {(0, 0): .125, (0, 1): .125, (1, 0): .125, (1, 1): .125, (0, 2): .5}

    def rule(a, b, x, y):
        if y != 2 and (x * y) == (a ^ b):
            return 0
        if (x, y) == (0, 2) and a == b:
            return 1
        return 2
    return 2, 3, mu, rule, 3


def prob_expr(mom, a, b, x, y):
    # p(a,b|x,y) from <1>, <A0|x>, <B0|y>, <A0|x B0|y> for binary outputs.
    one = mom(())
    pa = mom((("A", x, 0),))
    pb = mom((("B", y, 0),))
    pab = mom((("A", x, 0), ("B", y, 0)))
    if a == 0 and b == 0:
        return pab
    if a == 0:
        return pa - pab
    if b == 0:
        return pb - pab
    return one - pa - pb + pab


def solve(game, omega, gen, level=2):
    nx, ny, mu, rule, ns = game
    mons = monomials(nx, ny, level)
    d = len(mons)
    blocks, cons, moments = [], [], []
    for _ in range(4):
        G = cp.Variable((d, d), symmetric=True)
        blocks.append(G)
        cons.append(G >> 0)
        first = {}
        for i in range(d):
            for j in range(i, d):
                k = key(dagger(mons[i]) + mons[j])
                if k is None:
                    cons.append(G[i, j] == 0)
                elif k in first:
                    p, q = first[k]
                    cons.append(G[i, j] == G[p, q])
                else:
                    first[k] = (i, j)

        def mom(w, G=G, first=first):
            p, q = first[key(w)]
            return G[p, q]
        moments.append(mom)
    score_cons = []
    for c in range(ns - 1):
        expr = 0
        for (x, y), m in mu.items():
            for a in range(2):
                for b in range(2):
                    if rule(a, b, x, y) == c:
                        for blk in range(4):
                            expr = expr + m * prob_expr(moments[blk], a, b, x, y)
        score_cons.append(expr == omega[c])
    norm = sum(moments[blk](()) for blk in range(4)) == 1
    obj = sum(prob_expr(moments[2 * a + b], a, b, *gen)
              for a in range(2) for b in range(2))
    prob = cp.Problem(cp.Maximize(obj), cons + score_cons + [norm])
    prob.solve(solver=cp.CLARABEL, tol_gap_abs=1e-10, tol_gap_rel=1e-10,
               tol_feas=1e-10)
    y = [float(c.dual_value) for c in score_cons]
    y0 = float(norm.dual_value)
    lam = [v + y0 for v in y] + [y0]
    return prob.value, lam


def class_count(nx, ny, level):
    mons = monomials(nx, ny, level)
    keys = set()
    for i in range(len(mons)):
        for j in range(i, len(mons)):
            k = key(dagger(mons[i]) + mons[j])
            if k is not None:
                keys.add(k)
    return len(mons), len(keys)


if __name__ == "__main__":
    for level in (1, 2):
        print("level", level, "monomials/classes", class_count(2, 3, level))
    game = chsh_game()
    for om in ([0.4225, 0.49, 0.0875], [0.421, 0.491, 0.088],
               [0.40, 0.45, 0.15]):
        for level in (2, 1):
            v, lam = solve(game, om, (1, 2), level)
            print("level", level, "omega", om, "pguess %.10f" % v,
                  "lambda", np.round(lam, 6),
                  "lambda.omega %.10f" % float(np.dot(lam, om)))
    sys.exit(0)
