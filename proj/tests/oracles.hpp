#pragma once
// Brute-force reference computations. These use plain loops over the full cube
// and share no code with the library beyond the function being evaluated.

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

namespace oracle {

using Fn = std::function<int(std::uint64_t)>;

inline double mass(const std::vector<double>& p, std::uint64_t x) {
  double m = 1.0;
  for (std::size_t i = 0; i < p.size(); ++i) m *= ((x >> i) & 1U) ? p[i] : 1.0 - p[i];
  return m;
}

inline bool same_outside(std::uint64_t x, std::uint64_t y, std::uint64_t S) { return ((x ^ y) & ~S) == 0; }

// Pr_x[some y agreeing with x outside S has f(y) = b], by scanning every y.
inline double influence(const Fn& f, const std::vector<double>& p, std::uint64_t S, int b) {
  const std::uint64_t total = std::uint64_t{1} << p.size();
  double out = 0.0;
  for (std::uint64_t x = 0; x < total; ++x) {
    for (std::uint64_t y = 0; y < total; ++y) {
      if (same_outside(x, y, S) && f(y) == b) {
        out += mass(p, x);
        break;
      }
    }
  }
  return out;
}

inline std::vector<double> boosted(const std::vector<double>& p, int t) {
  std::vector<double> q;
  for (double v : p) q.push_back(1.0 - std::pow(1.0 - v, t));
  return q;
}

// Law of the OR of t independent draws, computed by enumerating all t-tuples.
inline double or_of_draws_mass(const std::vector<double>& p, int t, std::uint64_t z) {
  const std::size_t n = p.size();
  const std::uint64_t cube = std::uint64_t{1} << n;
  std::function<double(int, std::uint64_t)> rec = [&](int left, std::uint64_t acc) -> double {
    if (left == 0) return acc == z ? 1.0 : 0.0;
    double s = 0.0;
    for (std::uint64_t x = 0; x < cube; ++x) {
      if ((x & ~z) != 0) continue;
      s += mass(p, x) * rec(left - 1, acc | x);
    }
    return s;
  };
  return rec(t, 0);
}

inline double expectation(const Fn& f, const std::vector<double>& p, int b) {
  double s = 0.0;
  for (std::uint64_t x = 0; x < (std::uint64_t{1} << p.size()); ++x) {
    if (f(x) == b) s += mass(p, x);
  }
  return s;
}

// Pr_x[f(x with x_k=0) != f(x with x_k=1)].
inline double variable_influence(const Fn& f, const std::vector<double>& p, std::size_t k) {
  double s = 0.0;
  const std::uint64_t bit = std::uint64_t{1} << k;
  for (std::uint64_t x = 0; x < (std::uint64_t{1} << p.size()); ++x) {
    if (f(x & ~bit) != f(x | bit)) s += mass(p, x);
  }
  return s;
}

// Value of a rushing game by maximizing over every pure strategy explicitly.
// Rounds have n players each; round i occupies bits i*n..i*n+n-1; B is a mask over [n].
// A pure strategy assigns B's bits in round i as a function of all good bits of
// rounds 0..i. Only tiny games are feasible.
struct Game {
  Fn f;
  std::size_t rounds;
  std::size_t n;
  std::vector<std::vector<double>> measures;
  std::uint64_t B;
  int b;
};

inline double strategy_value(const Game& g, const std::vector<std::vector<std::uint64_t>>& choice) {
  const std::uint64_t good = ((std::uint64_t{1} << g.n) - 1) & ~g.B;
  const std::uint64_t goods_total = std::uint64_t{1} << (g.rounds * g.n);
  double s = 0.0;
  // Enumerate the good bits of all rounds at once (B bits ignored in this index).
  for (std::uint64_t raw = 0; raw < goods_total; ++raw) {
    bool valid = true;
    std::uint64_t x = 0;
    std::uint64_t history = 0;
    std::size_t history_bits = 0;
    double m = 1.0;
    for (std::size_t r = 0; r < g.rounds; ++r) {
      const std::uint64_t round_bits = (raw >> (r * g.n)) & ((std::uint64_t{1} << g.n) - 1);
      if (round_bits & g.B) {
        valid = false;
        break;
      }
      for (std::size_t i = 0; i < g.n; ++i) {
        if ((good >> i) & 1U) {
          history |= ((round_bits >> i) & 1U) << history_bits;
          ++history_bits;
          m *= ((round_bits >> i) & 1U) ? g.measures[r][i] : 1.0 - g.measures[r][i];
        }
      }
      const std::uint64_t bad = choice[r][history];
      x |= (round_bits | bad) << (r * g.n);
    }
    if (valid && g.f(x) == g.b) s += m;
  }
  return s;
}

inline double game_value(const Game& g) {
  const std::size_t gw = static_cast<std::size_t>(__builtin_popcountll(((std::uint64_t{1} << g.n) - 1) & ~g.B));
  std::vector<std::uint64_t> bad_values;
  for (std::uint64_t v = 0; v < (std::uint64_t{1} << g.n); ++v) {
    if ((v & ~g.B) == 0) bad_values.push_back(v);
  }
  // Tables: round r indexed by the good history of rounds 0..r.
  std::vector<std::vector<std::uint64_t>> choice(g.rounds);
  std::vector<std::size_t> sizes;
  for (std::size_t r = 0; r < g.rounds; ++r) {
    choice[r].assign(std::size_t{1} << ((r + 1) * gw), 0);
    sizes.push_back(choice[r].size());
  }
  std::size_t slots = 0;
  for (auto s : sizes) slots += s;
  double best = 0.0;
  std::vector<std::size_t> digits(slots, 0);
  while (true) {
    std::size_t k = 0;
    for (std::size_t r = 0; r < g.rounds; ++r) {
      for (auto& c : choice[r]) c = bad_values[digits[k++]];
    }
    best = std::max(best, strategy_value(g, choice));
    std::size_t i = 0;
    while (i < slots && ++digits[i] == bad_values.size()) digits[i++] = 0;
    if (i == slots) break;
  }
  return best;
}

}  // namespace oracle
