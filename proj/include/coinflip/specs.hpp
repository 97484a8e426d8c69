#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "coinflip/functions.hpp"
#include "coinflip/measures.hpp"

namespace coinflip {

// Function specs (n is the arity to build):
//   or | and | parity | majority[:k] | itmaj | dictator:i | tribes:w | constant:c
//   random:seed[:p0,p1,...[:dagger]] | majxoror[:a] | orxormaj[:a] | pair-or | @file.json
// majority:k and itmaj read a prefix; the remaining coordinates are ignored.
// majxoror:a is MAJ(first a) XOR OR(rest); orxormaj:a is OR(first a) XOR MAJ(rest).
RangedFunction parse_function(const std::string& spec, std::size_t n);

// Measure specs: uniform:n | bias:n:p | biases:p1,p2,... | @file.json
ProductMeasure parse_measure(const std::string& spec);

struct ZooEntry {
  std::string name;
  std::string spec;
  RangedFunction function;
};

// Benchmark functions on n coordinates: the named families plus ten random tables.
std::vector<ZooEntry> zoo(std::size_t n);

}  // namespace coinflip
