#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "../oracles.hpp"
#include "coinflip/adversary.hpp"

using namespace coinflip;

namespace {

RangedFunction random_table(std::size_t n, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  std::vector<std::int32_t> table(std::size_t{1} << n);
  for (auto& v : table) v = static_cast<std::int32_t>(rng() & 1U);
  return RangedFunction::from_table(n, 2, table);
}

oracle::Game as_game(const MultiRoundProtocol& p, std::uint64_t B, int b) {
  std::vector<std::vector<double>> ms;
  for (const auto& m : p.round_measures()) ms.push_back(m.biases());
  const auto f = p.outcome();
  return {[f](std::uint64_t x) { return f(x); }, p.rounds(), p.players(), ms, B, b};
}

}  // namespace

TEST_CASE("single round game equals block influence for every 3-bit table") {
  for (const auto& mu : {ProductMeasure::uniform(3), ProductMeasure::constant_bias(3, 0.2)}) {
    for (std::uint32_t code = 0; code < 256; ++code) {
      std::vector<std::int32_t> table(8);
      for (std::size_t x = 0; x < 8; ++x) table[x] = static_cast<std::int32_t>((code >> x) & 1U);
      const auto f = RangedFunction::from_table(3, 2, table);
      const MultiRoundProtocol p(1, 3, f, {mu});
      for (std::uint64_t S = 0; S < 8; ++S) {
        for (int b = 0; b < 2; ++b) {
          const auto B = Coalition::from_mask(S);
          REQUIRE(std::abs(optimal_influence(p, B, b).value - coalition_influence(f, mu, B, b).value) < 1e-12);
        }
      }
    }
  }
}

TEST_CASE("backward induction matches the maximum over all pure strategies") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const auto f2 = random_table(4, seed);
    const MultiRoundProtocol p2(2, 2, f2, {ProductMeasure({0.3, 0.6}), ProductMeasure::uniform(2)});
    const auto f1 = random_table(3, seed + 50);
    const MultiRoundProtocol p1(1, 3, f1, {ProductMeasure({0.1, 0.5, 0.8})});
    for (int b = 0; b < 2; ++b) {
      for (std::uint64_t B = 0; B < 4; ++B) {
        CHECK(std::abs(optimal_influence(p2, Coalition::from_mask(B), b).value - oracle::game_value(as_game(p2, B, b))) <
              1e-12);
      }
      for (std::uint64_t B = 0; B < 8; ++B) {
        CHECK(std::abs(optimal_influence(p1, Coalition::from_mask(B), b).value - oracle::game_value(as_game(p1, B, b))) <
              1e-12);
      }
    }
  }
}

TEST_CASE("explicit strategies match full-history enumeration") {
  const std::size_t n = 2;
  const std::uint64_t B = 0b10;
  const Coalition coalition = Coalition::from_mask(B);
  const BitScatter scatter(B);
  Rng rng = make_rng(99);
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const auto f = random_table(2 * n, seed + 7);
    const MultiRoundProtocol p(2, n, f, {ProductMeasure({0.25, 0.5}), ProductMeasure({0.7, 0.1})});
    std::vector<std::vector<std::uint64_t>> compact = {std::vector<std::uint64_t>(2), std::vector<std::uint64_t>(4)};
    std::vector<std::vector<std::uint64_t>> full = compact;
    for (std::size_t r = 0; r < 2; ++r) {
      for (std::size_t h = 0; h < compact[r].size(); ++h) {
        compact[r][h] = rng() & 1U;
        full[r][h] = scatter.deposit(compact[r][h]);
      }
    }
    const Strategy strategy(coalition, 2, n, compact);
    for (int b = 0; b < 2; ++b) {
      CHECK(std::abs(strategy_influence(p, strategy, b).value - oracle::strategy_value(as_game(p, B, b), full)) < 1e-12);
    }
  }
}

TEST_CASE("parity games") {
  const std::size_t n = 2;
  const MultiRoundProtocol p(2, n, RangedFunction::parity(2 * n), {ProductMeasure::uniform(n), ProductMeasure::uniform(n)});
  const auto zero = Strategy::constant(Coalition({1}), 2, n, 0);
  for (int b = 0; b < 2; ++b) {
    CHECK(strategy_influence(p, zero, b).value == doctest::Approx(0.5));
    CHECK(optimal_influence(p, Coalition({1}), b).value == doctest::Approx(1.0));
  }
}

TEST_CASE("empty coalition plays honestly") {
  const auto f = random_table(6, 3);
  const MultiRoundProtocol p(2, 3, f, {ProductMeasure::constant_bias(3, 0.2), ProductMeasure::uniform(3)});
  for (int b = 0; b < 2; ++b) {
    CHECK(std::abs(optimal_influence(p, Coalition(), b).value -
                   oracle::expectation([f](std::uint64_t x) { return f(x); }, p.joint_measure().biases(), b)) < 1e-12);
  }
}

TEST_CASE("extracted strategies attain the game value") {
  const auto orp = MultiRoundProtocol(1, 3, RangedFunction::or_function(3), {ProductMeasure::constant_bias(3, 0.1)});
  const auto s = extract_optimal_strategy(orp, Coalition({0}), 1);
  // Only the all-zero history needs the coalition's 1; elsewhere ties go to 0.
  CHECK(s.tables()[0][0] == 1);
  CHECK(strategy_influence(orp, s, 1).value == doctest::Approx(1.0).epsilon(1e-14));

  const auto c = MultiRoundProtocol(2, 2, RangedFunction::constant(4, 1), {ProductMeasure::uniform(2), ProductMeasure::uniform(2)});
  const auto cs = extract_optimal_strategy(c, Coalition({0, 1}), 1);
  for (const auto& t : cs.tables()) {
    for (auto v : t) CHECK(v == 0);
  }
  CHECK(strategy_influence(c, cs, 1).value == 1.0);

  std::size_t inside = 0;
  std::size_t runs = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto f = random_table(6, seed + 30);
    const MultiRoundProtocol p(2, 3, f, {ProductMeasure({0.1, 0.4, 0.5}), ProductMeasure({0.5, 0.9, 0.3})});
    for (std::uint64_t B = 0; B < 8; ++B) {
      const auto coalition = Coalition::from_mask(B);
      const auto st = extract_optimal_strategy(p, coalition, 1);
      CHECK(std::abs(strategy_influence(p, st, 1).value - optimal_influence(p, coalition, 1).value) < 1e-12);
      const auto mc = strategy_influence(p, st, 1, {Mode::monte_carlo, 20000, seed});
      inside += std::abs(mc.value - optimal_influence(p, coalition, 1).value) <= mc.radius;
      ++runs;
    }
  }
  CHECK(static_cast<double>(inside) >= 0.95 * static_cast<double>(runs));
}

TEST_CASE("game value is monotone in the coalition and beats honest play") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto f = random_table(8, seed + 200);
    const MultiRoundProtocol p(2, 4, f, {ProductMeasure::uniform(4), ProductMeasure::constant_bias(4, 0.25)});
    double honest[2];
    for (int b = 0; b < 2; ++b) honest[b] = optimal_influence(p, Coalition(), b).value;
    for (std::uint64_t B = 0; B < 16; ++B) {
      double best = 0.0;
      for (int b = 0; b < 2; ++b) {
        const double v = optimal_influence(p, Coalition::from_mask(B), b).value;
        best = std::max(best, v);
        for (std::uint64_t extra = 0; extra < 4; ++extra) {
          const auto bigger = Coalition::from_mask(B | (std::uint64_t{1} << extra));
          CHECK(optimal_influence(p, bigger, b).value >= v - 1e-12);
        }
      }
      CHECK(best >= std::max(honest[0], honest[1]) - 1e-12);
    }
  }
}

TEST_CASE("strategy json round trip") {
  const auto f = random_table(6, 5);
  const MultiRoundProtocol p(2, 3, f, {ProductMeasure::uniform(3), ProductMeasure::uniform(3)});
  const auto s = extract_optimal_strategy(p, Coalition({1}), 0);
  const auto j = s.to_json();
  CHECK(j["coalition"] == nlohmann::json::array({2}));
  const auto back = Strategy::from_json(j, 2, 3);
  CHECK(back.tables() == s.tables());
}

TEST_CASE("game budget") {
  const auto f = RangedFunction::or_function(30);
  const MultiRoundProtocol p(2, 15, f, {ProductMeasure::uniform(15), ProductMeasure::uniform(15)});
  CHECK_FALSE(game_in_budget(p, Coalition()));
  CHECK_THROWS_AS(optimal_influence(p, Coalition(), 1), BudgetExceeded);
  const auto small = MultiRoundProtocol(2, 4, RangedFunction::or_function(8), {ProductMeasure::uniform(4), ProductMeasure::uniform(4)});
  CHECK(game_in_budget(small, Coalition({0})));
}

TEST_CASE("assemble_round places bits by round") {
  CHECK(assemble_round(1, 4, 0b0101, 0b11, 0b1) == ((0b0101ULL | 0b0010ULL) << 4));
}
