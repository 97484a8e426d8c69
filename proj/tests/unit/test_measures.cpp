#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "../oracles.hpp"
#include "coinflip/measures.hpp"

using namespace coinflip;

TEST_CASE("mass of single points") {
  CHECK(ProductMeasure::uniform(2).mass(BitVector::from_string("11")) == doctest::Approx(0.25));
  CHECK(ProductMeasure({1.0, 0.0}).mass(BitVector::from_string("10")) == 1.0);
  CHECK(ProductMeasure({0.1, 0.1}).mass(BitVector::from_string("00")) == doctest::Approx(0.81).epsilon(1e-15));
  CHECK_THROWS_AS(ProductMeasure::uniform(3).mass(BitVector::from_string("11")), ArityMismatch);
}

TEST_CASE("mass sums to one and matches the product oracle") {
  for (std::size_t n : {1, 5, 12, 20}) {
    std::vector<double> p;
    for (std::size_t i = 0; i < n; ++i) p.push_back(0.03 + 0.9 * static_cast<double>(i) / static_cast<double>(n));
    const ProductMeasure mu(p);
    double total = 0.0;
    for (std::uint64_t x = 0; x < (std::uint64_t{1} << n); ++x) {
      const double m = mu.mass_bits(x);
      if (n <= 12) CHECK(m == doctest::Approx(oracle::mass(p, x)).epsilon(1e-13));
      total += m;
    }
    CHECK(std::abs(total - 1.0) < 1e-12);
  }
}

TEST_CASE("invalid biases and arities are rejected") {
  CHECK_THROWS_AS(ProductMeasure({1.2}), DomainError);
  CHECK_THROWS_AS(ProductMeasure({-0.1}), DomainError);
  CHECK_THROWS_AS(ProductMeasure::uniform(3).boost(0), DomainError);
  const std::vector<std::size_t> bad = {3};
  CHECK_THROWS_AS(ProductMeasure::uniform(3).restrict(bad), DomainError);
}

TEST_CASE("boost closed form") {
  const auto mu = ProductMeasure::uniform(4);
  CHECK(mu.boost(1) == mu);
  CHECK(mu.boost(2).bias(0) == doctest::Approx(0.75));
  const double p = 1.0 / 16.0;
  const auto b4 = ProductMeasure::constant_bias(16, p).boost(4);
  CHECK(b4.bias(3) == doctest::Approx(1.0 - std::pow(15.0 / 16.0, 4)).epsilon(1e-14));
  CHECK(b4.bias(3) == doctest::Approx(0.2275).epsilon(1e-3));
  CHECK(boosted_bias(1e-18, 3) == doctest::Approx(3e-18).epsilon(1e-12));
}

TEST_CASE("boost composes multiplicatively") {
  const ProductMeasure mu({0.01, 0.2, 0.37, 0.5, 0.9});
  for (std::size_t a = 1; a <= 4; ++a) {
    for (std::size_t b = 1; b <= 4; ++b) {
      const auto lhs = mu.boost(a).boost(b);
      const auto rhs = mu.boost(a * b);
      for (std::size_t i = 0; i < mu.size(); ++i) CHECK(std::abs(lhs.bias(i) - rhs.bias(i)) < 1e-14);
    }
  }
}

TEST_CASE("boost equals the law of an OR of independent draws") {
  const std::vector<double> p = {0.1, 0.3, 0.5};
  const ProductMeasure mu(p);
  for (int t = 1; t <= 3; ++t) {
    const auto boosted = mu.boost(static_cast<std::size_t>(t));
    for (std::uint64_t z = 0; z < 8; ++z) {
      CHECK(std::abs(boosted.mass_bits(z) - oracle::or_of_draws_mass(p, t, z)) < 1e-14);
    }
  }
}

TEST_CASE("sampled OR of draws matches the boosted mass within the Hoeffding radius") {
  const ProductMeasure mu = ProductMeasure::constant_bias(4, 1.0 / 16.0);
  const std::size_t t = 4;
  const Sampler sampler = or_compose(product_sampler(mu), t);
  Rng rng = make_rng(11);
  const std::size_t N = 100000;
  std::vector<std::size_t> counts(16, 0);
  for (std::size_t i = 0; i < N; ++i) ++counts[sampler(rng)];
  const double radius = std::sqrt(std::log(2.0 / 0.05) / (2.0 * N));
  const auto boosted = mu.boost(t);
  for (std::uint64_t z = 0; z < 16; ++z) {
    CHECK(std::abs(static_cast<double>(counts[z]) / N - boosted.mass_bits(z)) <= radius);
  }
}

TEST_CASE("sampling") {
  Rng rng = make_rng(3);
  const ProductMeasure zeros = ProductMeasure::constant_bias(10, 0.0);
  const ProductMeasure ones = ProductMeasure::constant_bias(10, 1.0);
  for (int i = 0; i < 100; ++i) {
    CHECK(zeros.sample(rng).bits() == 0);
    CHECK(ones.sample(rng).to_string() == "1111111111");
  }
  const auto mu = ProductMeasure::uniform(8);
  std::vector<std::size_t> ones_seen(8, 0);
  const std::size_t N = 100000;
  for (std::size_t s = 0; s < N; ++s) {
    const auto x = mu.sample_bits(rng);
    for (std::size_t i = 0; i < 8; ++i) ones_seen[i] += (x >> i) & 1U;
  }
  for (auto c : ones_seen) {
    CHECK(static_cast<double>(c) / N >= 0.49);
    CHECK(static_cast<double>(c) / N <= 0.51);
  }
}

TEST_CASE("restrict projects the biases") {
  const ProductMeasure mu({0.1, 0.5, 0.9});
  const std::vector<std::size_t> all = {0, 1, 2};
  CHECK(mu.restrict(all) == mu);
  const std::vector<std::size_t> ends = {0, 2};
  CHECK(mu.restrict(ends) == ProductMeasure({0.1, 0.9}));
  Rng rng = make_rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> p;
    for (int i = 0; i < 6; ++i) p.push_back(uniform01(rng));
    const ProductMeasure m(p);
    const auto coords = sample_subset(rng, 6, 3);
    const std::size_t t = 1 + uniform_below(rng, 5);
    CHECK(m.restrict(coords).boost(t) == m.boost(t).restrict(coords));
  }
}

TEST_CASE("flip and json round trip") {
  const ProductMeasure mu({0.9, 0.2});
  const auto flipped = mu.flip(0b01);
  CHECK(flipped.bias(0) == doctest::Approx(0.1));
  CHECK(flipped.bias(1) == 0.2);
  const auto j = mu.to_json();
  CHECK(j["n"] == 2);
  CHECK(ProductMeasure::from_json(j) == mu);
}

TEST_CASE("compact mass matches restricted mass") {
  const ProductMeasure mu({0.1, 0.2, 0.3, 0.4, 0.6, 0.7});
  const std::uint64_t coords = 0b101101;
  const CompactMass cm(mu, coords);
  const BitScatter scatter(coords);
  for (std::uint64_t c = 0; c < 16; ++c) {
    double expected = 1.0;
    const auto full = scatter.deposit(c);
    for (std::size_t i = 0; i < 6; ++i) {
      if ((coords >> i) & 1U) expected *= ((full >> i) & 1U) ? mu.bias(i) : 1.0 - mu.bias(i);
    }
    CHECK(cm(c) == doctest::Approx(expected).epsilon(1e-14));
  }
}
