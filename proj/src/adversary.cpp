#include "coinflip/adversary.hpp"

#include <string>

#include "coinflip/rng.hpp"

namespace coinflip {
namespace {

struct Layout {
  std::size_t rounds;
  std::size_t players;
  std::uint64_t good_mask;
  std::uint64_t bad_mask;
  std::size_t good_width;
  std::size_t bad_width;
};

Layout layout_of(const MultiRoundProtocol& protocol, const Coalition& coalition) {
  coalition.check_within(protocol.players());
  const std::uint64_t all = low_mask(protocol.players());
  Layout l{protocol.rounds(), protocol.players(), all & ~coalition.mask(), coalition.mask(), 0, 0};
  l.good_width = static_cast<std::size_t>(popcount(l.good_mask));
  l.bad_width = coalition.size();
  return l;
}

RangedFunction fast_outcome(const MultiRoundProtocol& protocol) {
  const auto& f = protocol.outcome();
  return f.arity() <= 24 ? f.tabulated() : f;
}

class Solver {
 public:
  Solver(const MultiRoundProtocol& protocol, const Coalition& coalition, std::int32_t b, bool record)
      : l_(layout_of(protocol, coalition)),
        f_(fast_outcome(protocol)),
        b_(b),
        good_(l_.good_mask),
        bad_(l_.bad_mask) {
    for (std::size_t i = 0; i < l_.rounds; ++i) masses_.emplace_back(protocol.round_measure(i), l_.good_mask);
    if (record) {
      for (std::size_t i = 0; i < l_.rounds; ++i) {
        tables_.emplace_back(std::size_t{1} << ((i + 1) * l_.good_width), 0);
      }
    }
    const std::size_t choices = std::size_t{1} << l_.bad_width;
    for (std::size_t c = 0; c < choices; ++c) order_.push_back(bad_.deposit(reverse_low_bits(c, l_.bad_width)));
  }

  double solve() { return value(0, 0, 0, !tables_.empty()); }
  std::vector<std::vector<std::uint64_t>> take_tables() { return std::move(tables_); }

 private:
  // With `record`, the argmax is written for every history reached under the
  // recorded choices of earlier rounds.
  double value(std::size_t round, std::uint64_t prefix, std::uint64_t history, bool record) {
    const std::size_t shift = round * l_.players;
    const std::uint64_t alphas = std::uint64_t{1} << l_.good_width;
    const bool last = round + 1 == l_.rounds;
    double total = 0.0;
    for (std::uint64_t a = 0; a < alphas; ++a) {
      const std::uint64_t with_good = prefix | (good_.deposit(a) << shift);
      const std::uint64_t h = history | (a << (round * l_.good_width));
      double best = -1.0;
      std::size_t best_choice = 0;
      for (std::size_t c = 0; c < order_.size(); ++c) {
        const std::uint64_t x = with_good | (order_[c] << shift);
        const double v = last ? (f_(x) == b_ ? 1.0 : 0.0) : value(round + 1, x, h, false);
        if (v > best) {
          best = v;
          best_choice = c;
          if (best >= 1.0) break;
        }
      }
      if (record) {
        tables_[round][h] = reverse_low_bits(best_choice, l_.bad_width);
        if (!last) value(round + 1, with_good | (order_[best_choice] << shift), h, true);
      }
      total += masses_[round](a) * best;
    }
    return total;
  }

  Layout l_;
  RangedFunction f_;
  std::int32_t b_;
  BitScatter good_;
  BitScatter bad_;
  std::vector<CompactMass> masses_;
  std::vector<std::uint64_t> order_;
  std::vector<std::vector<std::uint64_t>> tables_;
};

}  // namespace

std::uint64_t assemble_round(std::size_t round, std::size_t players, std::uint64_t good_mask, std::uint64_t good,
                             std::uint64_t bad) {
  const BitScatter g(good_mask);
  const BitScatter s(low_mask(players) & ~good_mask);
  return (g.deposit(good) | s.deposit(bad)) << (round * players);
}

bool game_in_budget(const MultiRoundProtocol& protocol, const Coalition& coalition) {
  const auto l = layout_of(protocol, coalition);
  return l.rounds * l.good_width <= kMaxGameGoodBits && l.rounds * l.bad_width <= kMaxGameBadBits &&
         l.rounds * l.players <= kMaxGameBits;
}

void check_game_budget(const MultiRoundProtocol& protocol, const Coalition& coalition) {
  if (!game_in_budget(protocol, coalition)) {
    throw BudgetExceeded("exact game: needs r*(n-|B|) <= 22, r*|B| <= 22 and r*n <= 28");
  }
}

Strategy::Strategy(Coalition coalition, std::size_t rounds, std::size_t players,
                   std::vector<std::vector<std::uint64_t>> tables)
    : coalition_(std::move(coalition)), rounds_(rounds), players_(players), tables_(std::move(tables)) {
  coalition_.check_within(players_);
  const std::size_t g = players_ - coalition_.size();
  if (tables_.size() != rounds_) throw DomainError("strategy: one table per round");
  for (std::size_t i = 0; i < rounds_; ++i) {
    if (tables_[i].size() != (std::size_t{1} << ((i + 1) * g))) throw DomainError("strategy: table size mismatch");
  }
}

Strategy Strategy::constant(Coalition coalition, std::size_t rounds, std::size_t players, std::uint64_t assignment) {
  const std::size_t g = players - coalition.size();
  if (rounds * g > kMaxGameGoodBits) throw BudgetExceeded("strategy tables: r*(n-|B|) above 22");
  std::vector<std::vector<std::uint64_t>> tables;
  for (std::size_t i = 0; i < rounds; ++i) tables.emplace_back(std::size_t{1} << ((i + 1) * g), assignment);
  return Strategy(std::move(coalition), rounds, players, std::move(tables));
}

Strategy Strategy::materialize(const Policy& policy, Coalition coalition, std::size_t rounds, std::size_t players) {
  const std::size_t g = players - coalition.size();
  if (rounds * g > kMaxGameGoodBits) throw BudgetExceeded("strategy tables: r*(n-|B|) above 22");
  std::vector<std::vector<std::uint64_t>> tables;
  std::vector<std::uint64_t> history;
  for (std::size_t i = 0; i < rounds; ++i) {
    std::vector<std::uint64_t> table(std::size_t{1} << ((i + 1) * g));
    history.assign(i + 1, 0);
    for (std::size_t h = 0; h < table.size(); ++h) {
      for (std::size_t j = 0; j <= i; ++j) history[j] = (h >> (j * g)) & low_mask(g);
      table[h] = policy(i, history) & low_mask(coalition.size());
    }
    tables.push_back(std::move(table));
  }
  return Strategy(std::move(coalition), rounds, players, std::move(tables));
}

std::uint64_t Strategy::respond(std::size_t round, std::span<const std::uint64_t> good_rounds) const {
  const std::size_t g = players_ - coalition_.size();
  std::uint64_t h = 0;
  for (std::size_t j = 0; j <= round; ++j) h |= good_rounds[j] << (j * g);
  return tables_.at(round).at(h);
}

Policy Strategy::policy() const {
  return [self = *this](std::size_t round, std::span<const std::uint64_t> good_rounds) {
    return self.respond(round, good_rounds);
  };
}

nlohmann::json Strategy::to_json() const {
  const std::size_t g = players_ - coalition_.size();
  nlohmann::json rounds = nlohmann::json::array();
  for (std::size_t i = 0; i < rounds_; ++i) {
    nlohmann::json table = nlohmann::json::object();
    for (std::size_t h = 0; h < tables_[i].size(); ++h) {
      table[bits_to_hex(h, (i + 1) * g)] = bits_to_hex(tables_[i][h], coalition_.size());
    }
    rounds.push_back(std::move(table));
  }
  return {{"coalition", coalition_.to_json()}, {"rounds", std::move(rounds)}};
}

Strategy Strategy::from_json(const nlohmann::json& j, std::size_t rounds, std::size_t players) {
  std::vector<std::size_t> members;
  for (const auto& v : j.at("coalition")) members.push_back(v.get<std::size_t>() - 1);
  Coalition coalition(std::move(members));
  const std::size_t g = players - coalition.size();
  const auto& rj = j.at("rounds");
  if (rj.size() != rounds) throw DomainError("strategy JSON: round count mismatch");
  std::vector<std::vector<std::uint64_t>> tables;
  for (std::size_t i = 0; i < rounds; ++i) {
    std::vector<std::uint64_t> table(std::size_t{1} << ((i + 1) * g), 0);
    std::vector<bool> seen(table.size(), false);
    for (const auto& [key, value] : rj[i].items()) {
      const auto h = hex_to_bits(key, (i + 1) * g);
      table[h] = hex_to_bits(value.get<std::string>(), coalition.size());
      seen[h] = true;
    }
    for (bool s : seen) {
      if (!s) throw DomainError("strategy JSON: round " + std::to_string(i + 1) + " table is not total");
    }
    tables.push_back(std::move(table));
  }
  return Strategy(std::move(coalition), rounds, players, std::move(tables));
}

InfluenceEstimate strategy_influence(const MultiRoundProtocol& protocol, const Coalition& coalition,
                                     const Policy& policy, std::int32_t b, const EvalOptions& options) {
  const auto l = layout_of(protocol, coalition);
  const RangedFunction f = fast_outcome(protocol);
  const BitScatter good(l.good_mask);
  const BitScatter bad(l.bad_mask);
  std::vector<std::uint64_t> history(l.rounds, 0);

  if (options.mode == Mode::exact) {
    if (l.rounds * l.good_width > kMaxGameGoodBits) throw BudgetExceeded("strategy_influence: r*(n-|B|) above 22");
    std::vector<CompactMass> masses;
    for (std::size_t i = 0; i < l.rounds; ++i) masses.emplace_back(protocol.round_measure(i), l.good_mask);
    const std::uint64_t alphas = std::uint64_t{1} << l.good_width;
    std::function<double(std::size_t, std::uint64_t)> walk = [&](std::size_t round, std::uint64_t prefix) {
      double total = 0.0;
      const std::size_t shift = round * l.players;
      for (std::uint64_t a = 0; a < alphas; ++a) {
        history[round] = a;
        const std::uint64_t beta = policy(round, std::span<const std::uint64_t>(history.data(), round + 1));
        const std::uint64_t x = prefix | ((good.deposit(a) | bad.deposit(beta)) << shift);
        const double v = round + 1 == l.rounds ? (f(x) == b ? 1.0 : 0.0) : walk(round + 1, x);
        total += masses[round](a) * v;
      }
      return total;
    };
    return InfluenceEstimate::exact(std::min(walk(0, 0), 1.0));
  }

  std::size_t hits = 0;
  for (std::size_t s = 0; s < kSampleStreams; ++s) {
    Rng rng = make_rng(derive_seed(options.seed, s));
    const std::size_t count = options.mc_samples / kSampleStreams + (s < options.mc_samples % kSampleStreams ? 1 : 0);
    for (std::size_t k = 0; k < count; ++k) {
      std::uint64_t x = 0;
      for (std::size_t round = 0; round < l.rounds; ++round) {
        const std::uint64_t full = protocol.round_measure(round).sample_bits(rng);
        history[round] = good.extract(full);
        const std::uint64_t beta = policy(round, std::span<const std::uint64_t>(history.data(), round + 1));
        x |= ((full & l.good_mask) | bad.deposit(beta)) << (round * l.players);
      }
      if (f(x) == b) ++hits;
    }
  }
  return monte_carlo_estimate(hits, options.mc_samples);
}

InfluenceEstimate strategy_influence(const MultiRoundProtocol& protocol, const Strategy& strategy, std::int32_t b,
                                     const EvalOptions& options) {
  if (strategy.rounds() != protocol.rounds() || strategy.players() != protocol.players()) {
    throw ArityMismatch("strategy_influence: strategy shape differs from the protocol");
  }
  return strategy_influence(protocol, strategy.coalition(), strategy.policy(), b, options);
}

GameValue optimal_influence(const MultiRoundProtocol& protocol, const Coalition& coalition, std::int32_t b) {
  check_game_budget(protocol, coalition);
  Solver solver(protocol, coalition, b, false);
  return {std::min(solver.solve(), 1.0), true};
}

Strategy extract_optimal_strategy(const MultiRoundProtocol& protocol, const Coalition& coalition, std::int32_t b) {
  check_game_budget(protocol, coalition);
  Solver solver(protocol, coalition, b, true);
  solver.solve();
  return Strategy(coalition, protocol.rounds(), protocol.players(), solver.take_tables());
}

}  // namespace coinflip
