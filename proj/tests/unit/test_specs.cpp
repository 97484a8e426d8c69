#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <set>

#include "coinflip/specs.hpp"

using namespace coinflip;

namespace {

int weight(std::uint64_t x) { return __builtin_popcountll(x); }

}  // namespace

TEST_CASE("named function specs") {
  const auto orf = parse_function("or", 6);
  CHECK(orf.arity() == 6);
  CHECK(orf(0) == 0);
  CHECK(orf(8) == 1);
  CHECK(parse_function("and", 4)(15) == 1);
  CHECK(parse_function("parity", 5)(0b10110) == 1);
  CHECK(parse_function("dictator:3", 5)(0b00100) == 1);
  CHECK(parse_function("dictator:3", 5)(0b11011) == 0);
  CHECK(parse_function("tribes:2", 4)(0b0011) == 1);
  CHECK(parse_function("constant:2", 4)(7) == 2);
  CHECK(parse_function("constant:2", 4).range_size() == 3);
  CHECK(parse_function("constant:0", 4).range_size() == 2);
}

TEST_CASE("prefix and composite specs") {
  const auto maj = parse_function("majority:3", 8);
  CHECK(maj.arity() == 8);
  for (std::uint64_t x = 0; x < 256; ++x) CHECK(maj(x) == (weight(x & 7U) >= 2 ? 1 : 0));
  const auto it = parse_function("itmaj", 10);
  CHECK(it.arity() == 10);
  CHECK(it(0b000000111) == 0);
  CHECK(it(0b000111111) == 1);
  const auto mx = parse_function("majxoror:3", 6);
  for (std::uint64_t x = 0; x < 64; ++x) CHECK(mx(x) == ((weight(x & 7U) >= 2 ? 1 : 0) ^ ((x >> 3) ? 1 : 0)));
  const auto om = parse_function("orxormaj", 6);
  for (std::uint64_t x = 0; x < 64; ++x) CHECK(om(x) == (((x & 7U) ? 1 : 0) ^ (weight(x >> 3) >= 2 ? 1 : 0)));
  const auto po = parse_function("pair-or", 4);
  CHECK(po.range_size() == 4);
  CHECK(po(0) == 0);
  CHECK(po(2) == 3);
}

TEST_CASE("random specs") {
  const auto a = parse_function("random:4", 10);
  const auto b = parse_function("random:4", 10);
  const auto c = parse_function("random:5", 10);
  bool differs = false;
  for (std::uint64_t x = 0; x < 1024; ++x) {
    REQUIRE(a(x) == b(x));
    differs = differs || a(x) != c(x);
  }
  CHECK(differs);
  const auto three = parse_function("random:1:0.2,0.3,0.5", 8);
  CHECK(three.range_size() == 3);
  const auto dag = parse_function("random:1:0.45,0.45:0.1", 8);
  std::size_t daggers = 0;
  for (std::uint64_t x = 0; x < 256; ++x) daggers += dag(x) == kDagger;
  CHECK(daggers > 0);
}

TEST_CASE("function files") {
  const std::string path = "test_specs_function.json";
  {
    std::ofstream out(path);
    out << R"({"n": 2, "range_size": 2, "table": [0, 1, 1, 0]})";
  }
  const auto f = parse_function("@" + path, 2);
  CHECK(f(1) == 1);
  CHECK(f(3) == 0);
  CHECK_THROWS_AS(parse_function("@" + path, 3), ArityMismatch);
  std::remove(path.c_str());
  CHECK_THROWS_AS(parse_function("@missing-file.json", 2), DomainError);
}

TEST_CASE("invalid function specs") {
  CHECK_THROWS_AS(parse_function("", 4), DomainError);
  CHECK_THROWS_AS(parse_function("bogus", 4), DomainError);
  CHECK_THROWS_AS(parse_function("dictator", 4), DomainError);
  CHECK_THROWS_AS(parse_function("dictator:0", 4), DomainError);
  CHECK_THROWS_AS(parse_function("dictator:x", 4), DomainError);
  CHECK_THROWS_AS(parse_function("tribes:3", 4), DomainError);
  CHECK_THROWS_AS(parse_function("majority:9", 4), DomainError);
  CHECK_THROWS_AS(parse_function("majxoror:4", 4), DomainError);
}

TEST_CASE("measure specs") {
  CHECK(parse_measure("uniform:3") == ProductMeasure::uniform(3));
  const auto b = parse_measure("bias:16:1/16");
  CHECK(b.size() == 16);
  CHECK(b.bias(5) == 1.0 / 16.0);
  CHECK(parse_measure("bias:2:0.3") == ProductMeasure::constant_bias(2, 0.3));
  CHECK(parse_measure("biases:0.1,0.5,0.9") == ProductMeasure({0.1, 0.5, 0.9}));
  CHECK_THROWS_AS(parse_measure("uniform"), DomainError);
  CHECK_THROWS_AS(parse_measure("bias:2:1.5"), DomainError);
  CHECK_THROWS_AS(parse_measure("gauss:3"), DomainError);
}

TEST_CASE("zoo") {
  const auto z = zoo(16);
  CHECK(z.size() >= 20);
  std::set<std::string> names;
  std::size_t randoms = 0;
  for (const auto& e : z) {
    CHECK(e.function.arity() == 16);
    names.insert(e.name);
    randoms += e.spec.rfind("random:", 0) == 0;
    const auto again = parse_function(e.spec, 16);
    for (std::uint64_t x = 0; x < 65536; x += 97) REQUIRE(again(x) == e.function(x));
  }
  CHECK(names.size() == z.size());
  CHECK(randoms == 10);
  CHECK(names.count("or") == 1);
  CHECK(names.count("and") == 1);
}
