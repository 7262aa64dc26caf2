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
#include <cctype>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "direx/game.hpp"

namespace direx {

// Projector A_{outcome|input} (party 0) or B_{outcome|input} (party 1).
struct Symbol {
  int party = 0;
  int input = 0;
  int outcome = 0;

  auto key() const { return std::make_tuple(party, input, outcome); }
  bool operator==(const Symbol& o) const { return key() == o.key(); }
  bool operator<(const Symbol& o) const { return key() < o.key(); }
};

// A word in canonical form. The zero flag marks the zero operator.
struct Monomial {
  std::vector<Symbol> word;
  bool zero = false;

  std::size_t length() const { return word.size(); }
  int party_count(int party) const {
    int n = 0;
    for (const auto& s : word)
      if (s.party == party) ++n;
    return n;
  }
};

// Graded lexicographic order on words.
inline bool graded_less(const std::vector<Symbol>& a,
                        const std::vector<Symbol>& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

// Canonical form: A symbols before B symbols, idempotency within each party,
// orthogonal neighbours give zero.
inline Monomial reduce(std::vector<Symbol> w) {
  std::stable_partition(w.begin(), w.end(),
                        [](const Symbol& s) { return s.party == 0; });
  Monomial m;
  for (const auto& s : w) {
    if (!m.word.empty()) {
      const Symbol& t = m.word.back();
      if (t.party == s.party && t.input == s.input) {
        if (t.outcome == s.outcome) continue;
        m.zero = true;
        m.word.clear();
        return m;
      }
    }
    m.word.push_back(s);
  }
  return m;
}

inline std::vector<Symbol> adjoint(const std::vector<Symbol>& w) {
  std::vector<Symbol> out;
  out.reserve(w.size());
  auto mid = std::find_if(w.begin(), w.end(),
                          [](const Symbol& s) { return s.party != 0; });
  out.insert(out.end(), std::make_reverse_iterator(mid), w.rend());
  out.insert(out.end(), w.rbegin(), std::make_reverse_iterator(mid));
  return out;
}

inline std::string word_string(const std::vector<Symbol>& w) {
  if (w.empty()) return "1";
  std::string s;
  for (const auto& sym : w) {
    s += sym.party == 0 ? 'A' : 'B';
    s += std::to_string(sym.outcome) + "|" + std::to_string(sym.input);
    s += ' ';
  }
  s.pop_back();
  return s;
}

// Linear combination of moment classes.
struct LinearForm {
  std::vector<std::pair<int, double>> terms;  // (class, coefficient)
  void add(int cls, double coef) {
    for (auto& t : terms)
      if (t.first == cls) {
        t.second += coef;
        return;
      }
    terms.emplace_back(cls, coef);
  }
};

struct Relaxation {
  int x_size = 0, y_size = 0, a_size = 0, b_size = 0;
  std::string level;
  std::vector<Monomial> monomials;
  std::vector<int> cell_class;  // d*d, -1 for zero cells
  std::vector<std::vector<Symbol>> class_words;
  std::vector<std::pair<int, int>> class_rep;  // first upper-triangle cell
  std::vector<std::pair<int, int>> zero_cells;  // upper triangle only

  int size() const { return static_cast<int>(monomials.size()); }
  int num_classes() const { return static_cast<int>(class_words.size()); }
  int cls(int i, int j) const { return cell_class[i * size() + j]; }

  int find_class(const std::vector<Symbol>& w) const {
    for (int c = 0; c < num_classes(); ++c)
      if (class_words[c] == w) return c;
    return -1;
  }

  std::string dump() const {
    std::ostringstream os;
    os << "level " << level << " size " << size() << " classes "
       << num_classes() << " zero_cells " << zero_cells.size() << "\n";
    for (int c = 0; c < num_classes(); ++c)
      os << c << " [" << word_string(class_words[c]) << "] rep ("
         << class_rep[c].first << "," << class_rep[c].second << ")\n";
    return os.str();
  }
};

namespace detail {

inline std::vector<Symbol> party_generators(int party, int inputs,
                                            int outcomes) {
  std::vector<Symbol> g;
  for (int x = 0; x < inputs; ++x)
    for (int a = 0; a + 1 < outcomes; ++a) g.push_back({party, x, a});
  return g;
}

// Reduced single-party words of exact length len.
inline void party_words(const std::vector<Symbol>& gens, int len,
                        std::vector<Symbol>& cur,
                        std::vector<std::vector<Symbol>>& out) {
  if (static_cast<int>(cur.size()) == len) {
    out.push_back(cur);
    return;
  }
  for (const auto& g : gens) {
    if (!cur.empty() && cur.back().input == g.input) continue;
    cur.push_back(g);
    party_words(gens, len, cur, out);
    cur.pop_back();
  }
}

inline std::vector<std::vector<Symbol>> pattern_words(
    const std::vector<Symbol>& ga, const std::vector<Symbol>& gb, int na,
    int nb) {
  std::vector<std::vector<Symbol>> wa, wb, out;
  std::vector<Symbol> cur;
  party_words(ga, na, cur, wa);
  party_words(gb, nb, cur, wb);
  for (const auto& a : wa)
    for (const auto& b : wb) {
      auto w = a;
      w.insert(w.end(), b.begin(), b.end());
      out.push_back(std::move(w));
    }
  return out;
}

}  // namespace detail

// Monomial set from a level spec: "k" for all words up to length k, or a
// '+'-separated list mixing levels and party patterns, e.g. "1+AB".
inline std::vector<Monomial> monomial_set(int x_size, int y_size, int a_size,
                                          int b_size,
                                          const std::string& spec) {
  auto ga = detail::party_generators(0, x_size, a_size);
  auto gb = detail::party_generators(1, y_size, b_size);
  std::vector<std::vector<Symbol>> words;
  if (!spec.empty() && spec.back() == '+')
    throw Error("npa: empty term in level spec");
  std::stringstream ss(spec);
  std::string term;
  bool any = false;
  while (std::getline(ss, term, '+')) {
    term.erase(std::remove_if(term.begin(), term.end(),
                              [](unsigned char c) { return std::isspace(c); }),
               term.end());
    if (term.empty()) throw Error("npa: empty term in level spec");
    any = true;
    if (std::all_of(term.begin(), term.end(),
                    [](unsigned char c) { return std::isdigit(c); })) {
      int k = std::stoi(term);
      if (k < 1) throw Error("npa: level must be >= 1");
      for (int len = 0; len <= k; ++len)
        for (int na = 0; na <= len; ++na) {
          auto w = detail::pattern_words(ga, gb, na, len - na);
          words.insert(words.end(), w.begin(), w.end());
        }
    } else {
      int na = 0, nb = 0;
      for (char c : term) {
        if (c == 'A') {
          if (nb > 0) throw Error("npa: pattern must list A before B");
          ++na;
        } else if (c == 'B') {
          ++nb;
        } else {
          throw Error("npa: bad level spec term '" + term + "'");
        }
      }
      auto w = detail::pattern_words(ga, gb, na, nb);
      words.insert(words.end(), w.begin(), w.end());
    }
  }
  if (!any) throw Error("npa: empty level spec");
  words.push_back({});
  std::sort(words.begin(), words.end(), graded_less);
  words.erase(std::unique(words.begin(), words.end()), words.end());
  std::vector<Monomial> out;
  for (auto& w : words) out.push_back(Monomial{std::move(w), false});
  return out;
}

// Builds the moment matrix class table. A non-empty permutation reorders the
// monomial basis before classes are assigned.
inline Relaxation build_relaxation(int x_size, int y_size, int a_size,
                                   int b_size, const std::string& level,
                                   const std::vector<int>& permutation = {}) {
  if (x_size < 1 || y_size < 1 || a_size < 2 || b_size < 2)
    throw Error("npa: bad scenario sizes");
  Relaxation r;
  r.x_size = x_size;
  r.y_size = y_size;
  r.a_size = a_size;
  r.b_size = b_size;
  r.level = level;
  r.monomials = monomial_set(x_size, y_size, a_size, b_size, level);
  if (!permutation.empty()) {
    std::vector<Monomial> perm;
    for (int i : permutation) perm.push_back(r.monomials.at(i));
    if (perm.size() != r.monomials.size())
      throw Error("npa: permutation has wrong length");
    r.monomials = std::move(perm);
  }
  const int d = r.size();
  r.cell_class.assign(static_cast<std::size_t>(d * d), -1);
  std::map<std::vector<Symbol>, int> index;
  auto class_of = [&](const std::vector<Symbol>& w) {
    auto key = w;
    auto adj = reduce(adjoint(w)).word;
    if (graded_less(adj, key)) key = adj;
    auto it = index.find(key);
    if (it != index.end()) return it->second;
    int c = static_cast<int>(r.class_words.size());
    index.emplace(key, c);
    r.class_words.push_back(key);
    return c;
  };
  class_of({});
  int id_pos = -1;
  for (int i = 0; i < d; ++i)
    if (r.monomials[i].word.empty()) id_pos = i;
  if (id_pos != 0) std::swap(r.monomials[0], r.monomials[id_pos]);
  r.class_rep.assign(1, {0, 0});
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      auto w = adjoint(r.monomials[i].word);
      w.insert(w.end(), r.monomials[j].word.begin(),
               r.monomials[j].word.end());
      Monomial m = reduce(std::move(w));
      int c = -1;
      if (m.zero) {
        r.zero_cells.emplace_back(i, j);
      } else {
        c = class_of(m.word);
        if (c >= static_cast<int>(r.class_rep.size()))
          r.class_rep.emplace_back(i, j);
      }
      r.cell_class[i * d + j] = c;
      r.cell_class[j * d + i] = c;
    }
  return r;
}

// Class of a reduced word, or -1 when absent from the relaxation.
inline int word_class(const Relaxation& r, std::vector<Symbol> w) {
  Monomial m = reduce(std::move(w));
  if (m.zero) return -1;
  auto key = m.word;
  auto adj = reduce(adjoint(key)).word;
  if (graded_less(adj, key)) key = adj;
  return r.find_class(key);
}

// Linear form of p(a,b|x,y) over the moment classes.
inline LinearForm behaviour_form(const Relaxation& r, int a, int b, int x,
                                 int y) {
  const int A = r.a_size, B = r.b_size;
  auto need = [&](std::vector<Symbol> w) {
    int c = word_class(r, std::move(w));
    if (c < 0) throw Error("npa: relaxation lacks a behaviour moment");
    return c;
  };
  LinearForm f;
  std::vector<int> as, bs;
  double sa = 1.0, sb = 1.0;
  if (a < A - 1) {
    as = {a};
  } else {
    for (int i = 0; i + 1 < A; ++i) as.push_back(i);
    sa = -1.0;
  }
  if (b < B - 1) {
    bs = {b};
  } else {
    for (int j = 0; j + 1 < B; ++j) bs.push_back(j);
    sb = -1.0;
  }
  bool a_last = a == A - 1, b_last = b == B - 1;
  if (a_last && b_last) f.add(0, 1.0);
  if (b_last)
    for (int i : as) f.add(need({{0, x, i}}), a_last ? -1.0 : 1.0);
  if (a_last)
    for (int j : bs) f.add(need({{1, y, j}}), b_last ? -1.0 : 1.0);
  for (int i : as)
    for (int j : bs) f.add(need({{0, x, i}, {1, y, j}}), sa * sb);
  return f;
}

// Cells carrying the one-outcome-dropped behaviour parametrization.
struct BehaviourCell {
  int a, b, x, y;  // -1 for a marginal on the other party
  int cls;
  std::pair<int, int> cell;
};

inline std::vector<BehaviourCell> behaviour_cells(const Relaxation& r) {
  std::vector<BehaviourCell> out;
  auto push = [&](int a, int b, int x, int y, std::vector<Symbol> w) {
    int c = word_class(r, std::move(w));
    if (c < 0) throw Error("npa: relaxation lacks a behaviour moment");
    out.push_back({a, b, x, y, c, r.class_rep[c]});
  };
  for (int x = 0; x < r.x_size; ++x)
    for (int a = 0; a + 1 < r.a_size; ++a) push(a, -1, x, -1, {{0, x, a}});
  for (int y = 0; y < r.y_size; ++y)
    for (int b = 0; b + 1 < r.b_size; ++b) push(-1, b, -1, y, {{1, y, b}});
  for (int x = 0; x < r.x_size; ++x)
    for (int y = 0; y < r.y_size; ++y)
      for (int a = 0; a + 1 < r.a_size; ++a)
        for (int b = 0; b + 1 < r.b_size; ++b)
          push(a, b, x, y, {{0, x, a}, {1, y, b}});
  return out;
}

}  // namespace direx
