#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "../oracles.hpp"
#include "coinflip/search.hpp"
#include "coinflip/specs.hpp"

using namespace coinflip;

namespace {

oracle::Fn wrap(const RangedFunction& f) {
  return [f](std::uint64_t x) { return f(x); };
}

RangedFunction random_table(std::size_t n, std::uint64_t seed, std::uint32_t range = 2) {
  Rng rng = make_rng(seed);
  std::vector<std::int32_t> table(std::size_t{1} << n);
  for (auto& v : table) v = static_cast<std::int32_t>(uniform_below(rng, range));
  return RangedFunction::from_table(n, range, table);
}

}  // namespace

TEST_CASE("support size and sampling") {
  CHECK(boosted_support_size(0.25) == 56);
  CHECK(boosted_support_size(0.5) == 14);
  Rng rng = make_rng(1);
  const auto zero = sample_support(ProductMeasure::constant_bias(10, 0.0), 50, rng);
  CHECK(zero.empty());
  const auto all = sample_support(ProductMeasure::constant_bias(10, 0.5), 200, rng);
  CHECK(all.size() == 10);
}

TEST_CASE("boosted coalition") {
  const auto orf = RangedFunction::or_function(16);
  const auto mu = ProductMeasure::constant_bias(16, 1.0 / 16);
  const auto out = boosted_coalition(orf, mu, 0.25, 10, 3);
  REQUIRE(out.certified());
  CHECK(out.target == 1);
  CHECK(out.certificate.value == 1.0);
  CHECK(out.trace["attempts"] == 1);

  const auto zero = boosted_coalition(RangedFunction::constant(8, 0), ProductMeasure::uniform(8), 0.25, 5, 1);
  REQUIRE(zero.certified());
  CHECK(zero.target == 0);

  const std::size_t n = 12;
  const auto neg = negate_coordinates(RangedFunction::and_function(n), ProductMeasure::constant_bias(n, 1.0 - 1.0 / n),
                                      low_mask(n));
  const auto a = boosted_coalition(neg.function, neg.measure, 0.25, 20, 5);
  REQUIRE(a.certified());
  CHECK(a.certificate.value >= 0.75);
  CHECK(std::abs(a.certificate.value -
                 oracle::influence(wrap(neg.function), neg.measure.biases(), a.coalition.mask(), a.target)) < 1e-12);

  CHECK_THROWS_AS(boosted_coalition(orf, mu, 0.6, 1, 1), DomainError);
  CHECK_THROWS_AS(boosted_coalition(orf, mu, 0.0, 1, 1), DomainError);
}

TEST_CASE("boosted coalition is reproducible") {
  const auto f = RangedFunction::random(14, 3, {0.5, 0.5});
  const auto mu = ProductMeasure::constant_bias(14, 1.0 / 14);
  const auto a = boosted_coalition(f, mu, 0.3, 30, 17);
  const auto b = boosted_coalition(f, mu, 0.3, 30, 17);
  CHECK(a.to_json() == b.to_json());
}

TEST_CASE("support survey") {
  const auto s = survey_supports(RangedFunction::or_function(16), ProductMeasure::constant_bias(16, 1.0 / 16), 0.25, 50, 2);
  CHECK(s.k == 56);
  CHECK(s.successes[1] == 50);
  CHECK(s.fraction >= 0.99);
}

TEST_CASE("condition classification") {
  const auto mu = ProductMeasure::constant_bias(16, 1.0 / 16);
  const auto one = classify_conditions(RangedFunction::constant(16, 1), mu, 0.25, 1, 200, 200, 4);
  CHECK(one.verdict == ConditionReport::Verdict::condition_one);
  const auto none = classify_conditions(RangedFunction::constant(16, 0), mu, 0.25, 1, 200, 200, 4);
  CHECK(none.verdict == ConditionReport::Verdict::neither);
  const auto orr = classify_conditions(RangedFunction::or_function(16), mu, 0.25, 1, 400, 2000, 4);
  CHECK(orr.condition_two);
  CHECK(orr.fraction_two == doctest::Approx(1.0));
}

TEST_CASE("bias decomposition") {
  const auto half = decompose_bias(0.5, 0.1);
  CHECK(half.c == 0.5);
  CHECK(half.t == 1);
  const auto edge = decompose_bias(0.25 + 1e-9, 0.1);
  CHECK(edge.t == 1);
  CHECK(edge.c == doctest::Approx(0.25 + 1e-9));
  const auto nine = decompose_bias(0.09, 0.05);
  CHECK(nine.t == 2);
  CHECK(nine.c == doctest::Approx(0.3).epsilon(1e-12));
  CHECK_THROWS_AS(decompose_bias(0.04, 0.05), DomainError);
  CHECK_THROWS_AS(decompose_bias(0.6, 0.05), DomainError);
}

TEST_CASE("random small-bias subsets") {
  const auto mu = ProductMeasure::uniform(16);
  const auto one = random_small_bias(RangedFunction::constant(16, 1), mu, 0.25, 0.3, 14, 5, 1);
  REQUIRE(one.certified());
  CHECK(one.trace["attempts"] == 1);
  CHECK(one.coalition.size() == 14);
  CHECK(small_bias_subset_size(16, 0.25, 0.3) == 14);

  // Pr[TRIBES = 1] is about 0.2275 here, so gamma must stay below it.
  const auto tribes = RangedFunction::tribes(16, 4);
  CHECK_THROWS_AS(random_small_bias(tribes, mu, 0.25, 0.3, 14, 20, 9), PreconditionViolated);
  const std::size_t m = small_bias_subset_size(16, 0.45, 0.2);
  CHECK(m == 12);
  const auto t = random_small_bias(tribes, mu, 0.45, 0.2, m, 50, 9);
  REQUIRE(t.certified());
  CHECK(t.certificate.value == 1.0);

  // The size bound for MAJ on 15 inputs at gamma = 0.25 exceeds 7.
  CHECK(small_bias_subset_size(15, 0.25, 0.25) > 7);
  CHECK_THROWS_AS(random_small_bias(RangedFunction::majority(15), ProductMeasure::uniform(15), 0.25, 0.25, 7, 5, 1),
                  PreconditionViolated);
  // Any 7 fixed inputs of MAJ on 15 bits reach 1 - 2^-8.
  CHECK(coalition_influence(RangedFunction::majority(15), ProductMeasure::uniform(15), Coalition::from_mask(0x7F), 1)
            .value == doctest::Approx(255.0 / 256.0));

  CHECK_THROWS_AS(random_small_bias(RangedFunction::constant(16, 0), mu, 0.25, 0.3, 14, 5, 1), PreconditionViolated);
}

TEST_CASE("greedy small-bias search") {
  const auto dict = greedy_small_bias(RangedFunction::dictator(6, 0), ProductMeasure::uniform(6), 0.1, 1, 3);
  REQUIRE(dict.certified());
  CHECK(dict.coalition.to_string() == "1");

  const auto maj = RangedFunction::majority(9);
  const auto mu9 = ProductMeasure::uniform(9);
  const auto g = greedy_small_bias(maj, mu9, 0.2, 1, 4);
  REQUIRE(g.certified());
  CHECK(g.coalition.size() <= 4);
  CHECK(g.certificate.value >= 0.8);
  CHECK(std::abs(g.certificate.value - oracle::influence(wrap(maj), mu9.biases(), g.coalition.mask(), 1)) < 1e-12);

  const auto orf = RangedFunction::or_function(16);
  const auto mu = ProductMeasure::constant_bias(16, 1.0 / 16);
  const auto fail = greedy_small_bias(orf, mu, 0.25, 0, 4);
  CHECK_FALSE(fail.certified());
  CHECK(fail.coalition.size() == 4);
  CHECK(fail.certificate.value == doctest::Approx(std::pow(15.0 / 16.0, 12)).epsilon(1e-12));
  CHECK(fail.trace["stop"] == "budget-exhausted");
}

TEST_CASE("single-round search on uniform-biased parts") {
  const auto orf = RangedFunction::or_function(16);
  const auto biased = find_single_round(orf, ProductMeasure::constant_bias(16, 1.0 / 16), 0.3, 1);
  REQUIRE(biased.certified());
  CHECK(biased.target == 1);

  const auto tribes = RangedFunction::tribes(16, 4);
  const auto small = find_single_round(tribes, ProductMeasure::uniform(16), 0.3, 7);
  REQUIRE(small.certified());
  CHECK(small.certificate.value >= 0.7);
  CHECK(small.coalition.size() < 16);

  CHECK_THROWS_AS(find_single_round(orf, ProductMeasure::constant_bias(16, 0.9), 0.3, 1), PreconditionViolated);
  CHECK_THROWS_AS(find_single_round(RangedFunction::or_function(3), ProductMeasure::uniform(3), 0.3, 1),
                  PreconditionViolated);
}

TEST_CASE("single-round search on a mixed instance") {
  const auto f = parse_function("majxoror:9", 16);
  std::vector<double> p(9, 0.5);
  p.resize(16, 1.0 / 16);
  const ProductMeasure mu(p);
  const auto out = find_single_round(f, mu, 0.3, 2);
  REQUIRE(out.certified());
  CHECK(out.coalition.size() < 16);
  CHECK(out.certificate.value >= 0.7);
  CHECK(std::abs(out.certificate.value - coalition_influence(f, mu, out.coalition, out.target).value) < 1e-15);
  CHECK(find_single_round(f, mu, 0.3, 2).to_json() == out.to_json());
}

TEST_CASE("range search schedule") {
  CHECK(range_support_size(1, 1, 0.5) == static_cast<std::size_t>(std::ceil(4.0 * std::log(2.0))));
  CHECK(range_support_size(2, 2, 0.3) ==
        static_cast<std::size_t>(std::ceil(2.0 * 8.0 / 0.09 * std::log(4.0 / 0.3))));
  CHECK(dagger_threshold(0.5) == doctest::Approx(0.0625 / 65536.0));
}

TEST_CASE("dagger masses match the oracle") {
  const auto f = RangedFunction::random(8, 5, {0.4, 0.4}, 0.2).tabulated();
  const auto mu = ProductMeasure::constant_bias(8, 0.15);
  const auto masses = dagger_masses(f, mu, 3);
  REQUIRE(masses.size() == 3);
  for (std::size_t l = 1; l <= 3; ++l) {
    double expected = 0.0;
    const auto q = oracle::boosted(mu.biases(), static_cast<int>(l));
    for (std::uint64_t x = 0; x < 256; ++x) {
      if (f(x) == kDagger) expected += oracle::mass(q, x);
    }
    CHECK(std::abs(masses[l - 1] - expected) < 1e-12);
  }
}

TEST_CASE("range search with one bit agrees with the boosted checker") {
  const auto mu = ProductMeasure::constant_bias(12, 1.0 / 12);
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto f = random_table(12, seed + 40);
    const auto out = large_range_coalition(f, mu, 1, 0.3, seed);
    if (!out.certified()) continue;
    REQUIRE(out.level_certificates.size() == 1);
    const double direct = coalition_influence(f, mu, out.coalition, out.target).value;
    CHECK(out.level_certificates[0].value == doctest::Approx(direct).epsilon(1e-14));
    CHECK(direct >= 0.7 - 1e-12);
  }
}

TEST_CASE("range search on paired OR") {
  const auto f = parse_function("pair-or", 16);
  const auto mu = ProductMeasure::constant_bias(16, 1.0 / 16);
  const auto out = large_range_coalition(f, mu, 2, 0.3, 1);
  REQUIRE(out.certified());
  CHECK(out.target == 3);
  for (const auto& c : out.level_certificates) CHECK(c.value >= 0.7);
}

TEST_CASE("range search on 2-bit random functions") {
  const auto mu = ProductMeasure::constant_bias(12, 1.0 / 12);
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto f = RangedFunction::random(12, seed, {0.25, 0.25, 0.25, 0.25});
    const auto out = large_range_coalition(f, mu, 2, 0.3, seed);
    REQUIRE(out.certified());
    REQUIRE(out.level_certificates.size() == 2);
    for (int l = 1; l <= 2; ++l) {
      const double v = oracle::influence(wrap(f.tabulated()), oracle::boosted(mu.biases(), l), out.coalition.mask(),
                                         out.target);
      CHECK(std::abs(v - out.level_certificates[static_cast<std::size_t>(l - 1)].value) < 1e-12);
      CHECK(v >= 0.7);
    }
  }
}

TEST_CASE("range search rejects heavy dagger mass") {
  const auto f = RangedFunction::random(12, 1, {0.495, 0.495}, 0.01);
  CHECK_THROWS_AS(large_range_coalition(f, ProductMeasure::constant_bias(12, 1.0 / 12), 1, 0.3, 1),
                  PreconditionViolated);
}

TEST_CASE("round schedule") {
  CHECK(iterated_log2(16.0, 0) == 16.0);
  CHECK(iterated_log2(16.0, 2) == doctest::Approx(2.0));
  CHECK(iterated_log2(16.0, 5) < 1.0);
  const auto s = round_schedule(2, 8, 0.3, 1.0);
  CHECK(s.rounds == 2);
  REQUIRE(s.delta.size() == 3);
  REQUIRE(s.eta.size() == 3);
  for (std::size_t l = 1; l <= 2; ++l) {
    CHECK(s.eta[l] == s.delta[l - 1]);
    CHECK(s.delta[l] > 0.0);
    CHECK(s.delta[l] <= 1.0);
  }
  CHECK_FALSE(s.clamped.empty());
  CHECK(s.to_json().contains("delta"));
  CHECK_THROWS_AS(round_schedule(2, 8, 0.3, -1.0), OutOfRegime);
}

TEST_CASE("multi-round search with one round delegates to the single-round search") {
  const auto f = RangedFunction::tribes(16, 4);
  const auto mu = ProductMeasure::uniform(16);
  const MultiRoundProtocol p(1, 16, f, {mu});
  const auto multi = multi_round_coalition(p, 0.3, 7);
  const auto single = find_single_round(f, mu, 0.3, 7);
  CHECK(multi.status == single.status);
  CHECK(multi.coalition == single.coalition);
  CHECK(multi.target == single.target);
  CHECK(multi.certificate.value == single.certificate.value);
}

TEST_CASE("multi-round parity is won by a single last mover") {
  const std::size_t n = 8;
  const MultiRoundProtocol p(2, n, RangedFunction::parity(2 * n), {ProductMeasure::uniform(n), ProductMeasure::uniform(n)});
  const auto out = multi_round_coalition(p, 0.3, 1);
  REQUIRE(out.certified());
  CHECK(out.coalition.size() == 1);
  CHECK(out.certificate.value == 1.0);
  CHECK(out.trace["path"] == "pool");
}

TEST_CASE("multi-round OR then MAJ") {
  const std::size_t n = 8;
  const MultiRoundProtocol p(2, n, parse_function("orxormaj:8", 2 * n),
                             {ProductMeasure::constant_bias(n, 1.0 / n), ProductMeasure::uniform(n)});
  const auto out = multi_round_coalition(p, 0.3, 3);
  REQUIRE(out.certified());
  CHECK(out.certificate.value >= 0.7);
  CHECK(std::abs(optimal_influence(p, out.coalition, out.target).value - out.certificate.value) < 1e-15);
  CHECK(multi_round_coalition(p, 0.3, 3).to_json() == out.to_json());
  CHECK_THROWS_AS(multi_round_coalition(p, 0.7, 3), DomainError);
}
